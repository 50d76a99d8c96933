"""Command-line front end.

Exit codes: ``check`` returns 0 for irreducible and 1 for reducible; every
other command returns 0 on success.  2 signals a checker disagreement or
numerical failure, 3 a configuration or parse error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .algebra import commutant, generate_algebra
from .channel_markov import (
    channel_from_liouvillian,
    choi_matrix,
    classical_transition_matrix,
    export_dot,
    haar_unitary,
    is_irreducible_markov,
    kraus_from_choi,
)
from .irreducibility import CheckerDisagreement, NoWitnessFound, analyze, find_dark_states
from .liouvillian import LindbladSystem, SteadyStateError, build_superoperator, compute_K, spectrum, steady_states
from .models import preset, preset_names
from .operator_core import DEFAULT_TOL, ToleranceConfig, dagger

SCHEMA = 1
EXIT_IRREDUCIBLE, EXIT_REDUCIBLE, EXIT_ERROR, EXIT_PARSE = 0, 1, 2, 3

_PARAMS = ("n", "h", "J", "gp", "gm", "delta", "gamma")


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class ModelConfig:
    preset: str | None = None
    params: dict = field(default_factory=dict)
    explicit: dict | None = None
    tolerances: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        if (self.preset is None) == (self.explicit is None):
            raise ConfigError("exactly one of 'preset' and 'explicit' must be given")

    @classmethod
    def from_json(cls, data: dict) -> "ModelConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - {"preset", "params", "explicit", "tolerances", "seed"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(data.get("preset"), dict(data.get("params") or {}), data.get("explicit"),
                   dict(data.get("tolerances") or {}), data.get("seed"))

    def tolerance(self) -> ToleranceConfig:
        try:
            return DEFAULT_TOL.with_overrides(**self.tolerances)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def system(self) -> LindbladSystem:
        if self.preset is not None:
            try:
                return preset(self.preset, **self.params)
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(str(exc).strip("'\"")) from exc
        ex = self.explicit
        try:
            d = int(ex["dim"])
            h = parse_complex_matrix(ex["hamiltonian"], d)
            ls = [parse_complex_matrix(m, d) for m in ex.get("lindblads", [])]
            return LindbladSystem(h, tuple(ls), ex.get("name", "explicit"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad explicit model: {exc}") from exc


def parse_complex_matrix(rows, d: int) -> np.ndarray:
    """Nested ``[re, im]`` pairs -> complex ``d x d`` array."""
    arr = np.asarray(rows, dtype=float)
    if arr.shape != (d, d, 2):
        raise ValueError(f"expected a {d}x{d} matrix of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _config_from_args(args) -> ModelConfig:
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = ModelConfig.from_json(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    elif args.preset:
        cfg = ModelConfig(preset=args.preset)
    else:
        raise ConfigError("give --preset NAME or --config PATH")
    cfg.params.update({k: getattr(args, k) for k in _PARAMS if getattr(args, k) is not None})
    if args.tol is not None:
        cfg.tolerances["rank"] = args.tol
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


# ---------------------------------------------------------------------------
# serialization helpers
# ---------------------------------------------------------------------------

def _num(x: float) -> float:
    # 12 significant digits, round-off below 1e-15 reported as zero
    x = float(f"{float(x):.12g}")
    return 0.0 if abs(x) < 1e-15 else x


def _cplx(z) -> list:
    return [_num(np.real(z)), _num(np.imag(z))]


def _mat(m) -> list | None:
    if m is None:
        return None
    return [[_cplx(z) for z in row] for row in np.asarray(m)]


def _emit(payload: dict, as_json: bool, text: str, out) -> None:
    if as_json:
        out.write(json.dumps({"schema": SCHEMA, **payload}, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        out.write(text if text.endswith("\n") else text + "\n")


def _fmt_matrix(m, digits: int = 4) -> str:
    def f(z):
        z = complex(z)
        re, im = round(z.real, digits) + 0.0, round(z.imag, digits) + 0.0
        return f"{re:.{digits}f}" if im == 0 else f"{re:.{digits}f}{im:+.{digits}f}i"
    rows = [[f(z) for z in row] for row in np.asarray(m)]
    width = max(len(s) for r in rows for s in r)
    return "\n".join("  [" + ", ".join(s.rjust(width) for s in r) + "]" for r in rows)


def _spin_labels(d: int) -> list[str] | None:
    n = d.bit_length() - 1
    if d < 2 or 2 ** n != d:
        return None
    return ["".join("↑" if b == "0" else "↓" for b in format(i, f"0{n}b")) for i in range(d)]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_check(cfg: ModelConfig, as_json: bool, out, parallel: bool = False) -> int:
    sys_ = cfg.system()
    tol = cfg.tolerance()
    try:
        rep = analyze(sys_, tol, parallel=parallel)
    except CheckerDisagreement as exc:
        payload = {"command": "check", "model": sys_.name, "error": "disagreement",
                   "davies_algebra_verdict": exc.algebra.verdict.value,
                   "algebra_dim": exc.algebra.algebra_dim,
                   "davies_steady_verdict": exc.steady.verdict.value,
                   "null_dim": exc.steady.null_dim, "support_rank": exc.steady.support_rank}
        _emit(payload, as_json, f"ERROR: {exc}", out)
        return EXIT_ERROR
    except (NoWitnessFound, SteadyStateError) as exc:
        _emit({"command": "check", "model": sys_.name, "error": str(exc)}, as_json, f"ERROR: {exc}", out)
        return EXIT_ERROR
    payload = {
        "command": "check",
        "model": sys_.name,
        "dim": rep.dim,
        "verdict": rep.verdict.value,
        "davies_algebra_verdict": rep.davies_algebra_verdict.value,
        "algebra_dim": rep.algebra_dim,
        "davies_steady_verdict": rep.davies_steady_verdict.value,
        "null_dim": rep.null_dim,
        "support_rank": rep.support_rank,
        "steady_state_residual": _num(rep.steady.residual),
        "reducing_projection": _mat(rep.reducing_projection),
        "projection_residual": None if rep.projection_residual is None else _num(rep.projection_residual),
        "evans_verdict": rep.evans_verdict.value,
        "evans_commutant_dim": rep.evans_commutant_dim,
        "conserved_projection": _mat(rep.conserved_projection),
        "conservation_residual": None if rep.conservation_residual is None else _num(rep.conservation_residual),
        "frigerio1_applicable": rep.frigerio1_applicable,
        "frigerio1_conclusion": rep.frigerio1_conclusion,
        "frigerio2_applicable": rep.frigerio2_applicable,
        "frigerio2_conclusion": rep.frigerio2_conclusion,
    }
    lines = [
        f"model: {sys_.name} (d = {rep.dim})",
        f"verdict: {rep.verdict.value}",
        f"  algebra route:      {rep.davies_algebra_verdict.value} (dim {rep.algebra_dim}/{rep.dim ** 2})",
        f"  steady-state route: {rep.davies_steady_verdict.value} "
        f"(null_dim {rep.null_dim}, steady-state rank {rep.support_rank}/{rep.dim}, "
        f"residual {rep.steady.residual:.2e})",
        f"evans: {rep.evans_verdict.value} (commutant dim {rep.evans_commutant_dim})",
        f"frigerio 1: {'applicable, unique steady state' if rep.frigerio1_applicable else 'not applicable'}",
        f"frigerio 2: {'implies irreducible' if rep.frigerio2_applicable else 'not applicable'}",
    ]
    if rep.reducing_projection is not None:
        lines += [f"reducing projection (residual {rep.projection_residual:.2e}):",
                  _fmt_matrix(rep.reducing_projection)]
    if rep.conserved_projection is not None:
        lines += [f"conserved projection (||L^+(P)|| = {rep.conservation_residual:.2e}):",
                  _fmt_matrix(rep.conserved_projection)]
    _emit(payload, as_json, "\n".join(lines), out)
    return EXIT_IRREDUCIBLE if rep.verdict.value == "Irreducible" else EXIT_REDUCIBLE


def cmd_steady(cfg: ModelConfig, as_json: bool, out) -> int:
    sys_ = cfg.system()
    ss = steady_states(sys_, cfg.tolerance())
    payload = {"command": "steady", "model": sys_.name, "null_dim": ss.null_dim,
               "support_rank": ss.support_rank, "residual": _num(ss.residual),
               "state": _mat(ss.max_support_state)}
    text = "\n".join([
        f"model: {sys_.name} (d = {sys_.dim})",
        f"null_dim: {ss.null_dim}",
        f"rank: {ss.support_rank}",
        f"residual ||L(rho)||: {ss.residual:.2e}",
        "max-support steady state:",
        _fmt_matrix(ss.max_support_state),
    ])
    _emit(payload, as_json, text, out)
    return 0


def cmd_spectrum(cfg: ModelConfig, as_json: bool, out) -> int:
    sys_ = cfg.system()
    sp = spectrum(sys_, cfg.tolerance())
    payload = {"command": "spectrum", "model": sys_.name, "eigenvalues": [_cplx(z) for z in sp.eigenvalues],
               "gap": _num(sp.gap), "relaxing": sp.relaxing}
    evs = ", ".join(f"{_num(z.real):.6g}{z.imag:+.6g}i" if abs(z.imag) > 1e-12 else f"{_num(z.real):.6g}"
                    for z in sp.eigenvalues)
    text = f"model: {sys_.name}\neigenvalues: {evs}\ngap: {sp.gap:.6g}\nrelaxing: {sp.relaxing}"
    _emit(payload, as_json, text, out)
    return 0


def cmd_algebra(cfg: ModelConfig, as_json: bool, out, show_norms: bool = False) -> int:
    sys_ = cfg.system()
    tol = cfg.tolerance()
    k = compute_K(sys_)
    ls = list(sys_.lindblads)
    res = generate_algebra(ls + [k], tol)
    dims = {
        "L,K": commutant(ls + [k], tol).dim,
        "L": commutant(ls, tol).dim if ls else sys_.dim ** 2,
        "L,L+,H": commutant(ls + [dagger(l) for l in ls] + [sys_.hamiltonian], tol).dim,
    }
    payload = {"command": "algebra", "model": sys_.name, "algebra_dim": res.dim,
               "full_dim": sys_.dim ** 2, "is_full": res.is_full, "rounds": res.rounds,
               "commutant_dims": dims}
    lines = [f"model: {sys_.name}",
             f"algebra dim: {res.dim}/{sys_.dim ** 2} ({'full' if res.is_full else 'proper'}), "
             f"{res.rounds} rounds",
             "commutant dims: " + ", ".join(f"{{{k_}}}': {v}" for k_, v in dims.items())]
    if show_norms:
        norms = [float(np.linalg.norm(b, 2)) for b in res.basis]
        payload["basis_norms"] = [_num(x) for x in norms]
        lines.append("basis operator norms: " + ", ".join(f"{x:.4g}" for x in norms))
    _emit(payload, as_json, "\n".join(lines), out)
    return 0


def _markov_bases(spec: str, d: int, seed: int | None):
    if spec == "computational":
        return [("computational", np.eye(d, dtype=complex), _spin_labels(d))]
    if spec.startswith("random:"):
        try:
            count = int(spec.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError(f"bad basis spec {spec!r}") from exc
        if count < 1:
            raise ConfigError("random basis count must be >= 1")
        base = 0 if seed is None else seed
        return [(f"random:{k}", haar_unitary(d, np.random.default_rng(base + k)), None)
                for k in range(1, count + 1)]
    path = spec[5:] if spec.startswith("file:") else spec
    try:
        with open(path, encoding="utf-8") as fh:
            u = parse_complex_matrix(json.load(fh), d)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise ConfigError(f"cannot read basis file {path}: {exc}") from exc
    return [(f"file:{path}", u, None)]


def cmd_markov(cfg: ModelConfig, as_json: bool, out, t: float = 1.0, basis: str = "computational",
               threshold: float | None = None) -> int:
    if not t > 0:
        raise ConfigError("--t must be positive")
    sys_ = cfg.system()
    tol = cfg.tolerance()
    edge = tol.support if threshold is None else threshold
    ch = channel_from_liouvillian(sys_, t)
    entries, chunks = [], []
    for kind, u, labels in _markov_bases(basis, sys_.dim, cfg.seed):
        try:
            p = classical_transition_matrix(ch, u, labels)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        mv = is_irreducible_markov(p, edge)
        dot = export_dot(p, edge)
        entries.append({"basis": kind, "irreducible": mv.irreducible,
                        "components": [list(c) for c in mv.components],
                        "closed_classes": [list(c) for c in mv.closed_classes],
                        "matrix": [[_num(x) for x in row] for row in p.entries], "dot": dot})
        names = p.basis_labels or tuple(f"b{i}" for i in range(p.dim))
        closed = "; ".join("{" + ", ".join(names[i] for i in c) + "}" for c in mv.closed_classes)
        chunks.append(f"// basis {kind}: {'irreducible' if mv.irreducible else 'reducible'}"
                      f" (closed classes: {closed})\n{dot}")
    payload = {"command": "markov", "model": sys_.name, "t": _num(t), "seed": cfg.seed, "bases": entries}
    _emit(payload, as_json, "".join(chunks), out)
    return 0


def cmd_kraus(cfg: ModelConfig, as_json: bool, out, t: float = 1.0) -> int:
    if not t > 0:
        raise ConfigError("--t must be positive")
    sys_ = cfg.system()
    ch = channel_from_liouvillian(sys_, t)
    ks = kraus_from_choi(choi_matrix(ch))
    recon = float(np.linalg.norm(ks.superoperator() - ch.matrix))
    payload = {"command": "kraus", "model": sys_.name, "t": _num(t), "count": len(ks),
               "completeness_residual": _num(ks.completeness_residual()),
               "reconstruction_residual": _num(recon),
               "operators": [_mat(m) for m in ks.operators]}
    lines = [f"model: {sys_.name}, t = {t:g}", f"{len(ks)} Kraus operators",
             f"completeness residual: {ks.completeness_residual():.2e}",
             f"reconstruction residual: {recon:.2e}"]
    for i, m in enumerate(ks.operators):
        lines += [f"M_{i}:", _fmt_matrix(m)]
    _emit(payload, as_json, "\n".join(lines), out)
    return 0


def cmd_dark_states(cfg: ModelConfig, as_json: bool, out) -> int:
    sys_ = cfg.system()
    found = find_dark_states(sys_, cfg.tolerance())
    payload = {"command": "dark-states", "model": sys_.name, "count": len(found),
               "states": [{"state": [_cplx(z) for z in r.state],
                           "lindblad_eigenvalues": [_cplx(z) for z in r.lindblad_eigenvalues],
                           "k_eigenvalue": _cplx(r.k_eigenvalue),
                           "liouvillian_residual": _num(r.liouvillian_residual)} for r in found]}
    lines = [f"model: {sys_.name}", f"{len(found)} dark state(s)"]
    for r in found:
        amps = ", ".join(f"{z.real:.4g}{z.imag:+.4g}i" for z in r.state)
        lines.append(f"  psi = ({amps}), ||L(psi psi^+)|| = {r.liouvillian_residual:.2e}")
    _emit(payload, as_json, "\n".join(lines), out)
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--preset", help="named model: " + ", ".join(preset_names()))
    src.add_argument("--config", help="JSON model config file")
    common.add_argument("--json", action="store_true", help="machine-readable output (schema 1)")
    common.add_argument("--tol", type=float, help="relative rank tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, help="seed for random bases")
    for p, typ in (("n", int), ("h", float), ("J", float), ("gp", float), ("gm", float),
                   ("delta", float), ("gamma", float)):
        common.add_argument(f"--{p}", type=typ, dest=p, help=f"model parameter {p}")

    parser = _Parser(prog="lindirr", description="Irreducibility analysis of Lindblad dynamics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    c = sub.add_parser("check", parents=[common], help="all irreducibility verdicts")
    c.add_argument("--parallel", action="store_true", help="run independent checkers concurrently")
    sub.add_parser("steady", parents=[common], help="steady states")
    sub.add_parser("spectrum", parents=[common], help="Liouvillian spectrum and gap")
    a = sub.add_parser("algebra", parents=[common], help="generated algebra and commutants")
    a.add_argument("--norms", action="store_true", help="print basis operator norms")
    m = sub.add_parser("markov", parents=[common], help="classical Markov chains as DOT")
    m.add_argument("--t", type=float, default=1.0)
    m.add_argument("--basis", default="computational", help="computational | random:<k> | file:<path>")
    m.add_argument("--threshold", type=float, help="edge threshold (default 1e-10)")
    k = sub.add_parser("kraus", parents=[common], help="Kraus operators of exp(tL)")
    k.add_argument("--t", type=float, default=1.0)
    sub.add_parser("dark-states", parents=[common], help="pure steady states")
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        cfg.system()
        if args.command == "check":
            return cmd_check(cfg, args.json, out, args.parallel)
        if args.command == "steady":
            return cmd_steady(cfg, args.json, out)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, args.json, out)
        if args.command == "algebra":
            return cmd_algebra(cfg, args.json, out, args.norms)
        if args.command == "markov":
            return cmd_markov(cfg, args.json, out, args.t, args.basis, args.threshold)
        if args.command == "kraus":
            return cmd_kraus(cfg, args.json, out, args.t)
        return cmd_dark_states(cfg, args.json, out)
    except ConfigError as exc:
        print(f"lindirr: configuration error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SteadyStateError, NoWitnessFound, RuntimeError, ValueError) as exc:
        print(f"lindirr: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

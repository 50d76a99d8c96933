"""Named constructors for two-level examples and spin-1/2 chains.

Site 1 is the leftmost (most significant) tensor factor.  Rates enter as
square-root prefactors on the Lindblad operators.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .liouvillian import LindbladSystem
from .operator_core import I2, P_DOWN, P_UP, SM, SP, SX, SY, SZ, tensor

__all__ = [
    "Boundary",
    "DissipatorKind",
    "SpinChainSpec",
    "site_operator",
    "two_level",
    "two_level_preset",
    "two_site_ferromagnet",
    "xyz_chain",
    "transverse_ising",
    "xx_chain",
    "xxz_chain",
    "PRESETS",
    "preset",
    "preset_names",
]


class Boundary(str, Enum):
    OPEN = "open"
    PERIODIC = "periodic"


class DissipatorKind(str, Enum):
    GAIN = "gain"        # sigma^+
    LOSS = "loss"        # sigma^-
    DEPHASE = "dephase"  # sigma^z


_KIND_OP = {DissipatorKind.GAIN: SP, DissipatorKind.LOSS: SM, DissipatorKind.DEPHASE: SZ}


def site_operator(n: int, site: int, op) -> np.ndarray:
    """``1 x ... x op x ... x 1`` with ``op`` on ``site`` (1-based)."""
    if not 1 <= site <= n:
        raise ValueError(f"site {site} out of range 1..{n}")
    return tensor(*[op if i == site else I2 for i in range(1, n + 1)])


def _bonds(n: int, boundary: Boundary) -> list[tuple[int, int]]:
    bonds = [(i, i + 1) for i in range(1, n)]
    if boundary is Boundary.PERIODIC and n > 2:
        bonds.append((n, 1))
    return bonds


@dataclass(frozen=True)
class SpinChainSpec:
    """XYZ chain in z fields with single-site dissipators.

    ``jx``, ``jy``, ``jz`` list one coupling per bond: n - 1 entries for open
    chains, n for periodic ones (the last one being the (n, 1) bond).
    ``dissipators`` holds ``(site, kind, rate)`` triples.
    """

    n_sites: int
    h: tuple = ()
    jx: tuple = ()
    jy: tuple = ()
    jz: tuple = ()
    boundary: Boundary = Boundary.OPEN
    dissipators: tuple = field(default=())

    def __post_init__(self):
        n = self.n_sites
        if n < 1:
            raise ValueError("n_sites must be >= 1")
        boundary = Boundary(self.boundary)
        object.__setattr__(self, "boundary", boundary)
        nb = len(_bonds(n, boundary))
        h = tuple(float(x) for x in self.h) if len(self.h) else (0.0,) * n
        if len(h) != n:
            raise ValueError(f"need {n} fields, got {len(h)}")
        object.__setattr__(self, "h", h)
        for name in ("jx", "jy", "jz"):
            j = getattr(self, name)
            j = tuple(float(x) for x in j) if len(j) else (0.0,) * nb
            if len(j) != nb:
                raise ValueError(f"{name}: need {nb} couplings for {boundary.value} chain of "
                                 f"{n} sites, got {len(j)}")
            object.__setattr__(self, name, j)
        diss = []
        for site, kind, rate in self.dissipators:
            kind = DissipatorKind(kind)
            if not 1 <= site <= n:
                raise ValueError(f"dissipator site {site} out of range 1..{n}")
            if rate < 0:
                raise ValueError(f"negative rate {rate}")
            diss.append((int(site), kind, float(rate)))
        object.__setattr__(self, "dissipators", tuple(diss))

    @property
    def bonds(self) -> list[tuple[int, int]]:
        return _bonds(self.n_sites, self.boundary)


def _chain_dissipators(n, dissipators):
    return tuple(np.sqrt(rate) * site_operator(n, site, _KIND_OP[DissipatorKind(kind)])
                 for site, kind, rate in dissipators)


def xyz_chain(spec: SpinChainSpec, name: str = "xyz-chain") -> LindbladSystem:
    n = spec.n_sites
    d = 2 ** n
    ham = np.zeros((d, d), dtype=complex)
    for i, hi in enumerate(spec.h, start=1):
        if hi:
            ham += hi * site_operator(n, i, SZ)
    for (i, j), jx, jy, jz in zip(spec.bonds, spec.jx, spec.jy, spec.jz):
        for coupling, pauli in ((jx, SX), (jy, SY), (jz, SZ)):
            if coupling:
                ham += coupling * site_operator(n, i, pauli) @ site_operator(n, j, pauli)
    return LindbladSystem(ham, _chain_dissipators(n, spec.dissipators), name)


def _as_list(x, n):
    return [float(v) for v in x] if np.ndim(x) else [float(x)] * n


def _driving(n, driving, gp, gm):
    if driving == "boundary":
        return [(1, "gain", gp), (1, "loss", gm)]
    if driving == "max":
        return [(1, "gain", gp), (n, "loss", gm)]
    raise ValueError(f"unknown driving {driving!r}; use 'boundary' or 'max'")


def transverse_ising(n: int, h=1.0, J=1.0, gp=1.0, gm=1.0, driving: str = "boundary") -> LindbladSystem:
    """``H = sum h_i Z_i + sum J_i X_i X_{i+1}`` with gain/loss on site 1
    (``driving='boundary'``) or gain on site 1 and loss on site n (``'max'``)."""
    hs, js = _as_list(h, n), _as_list(J, n - 1)
    ham = sum(hs[i - 1] * site_operator(n, i, SZ) for i in range(1, n + 1))
    for i in range(1, n):
        ham = ham + js[i - 1] * tensor(*([I2] * (i - 1) + [SX, SX] + [I2] * (n - i - 1)))
    ls = _chain_dissipators(n, _driving(n, driving, gp, gm))
    return LindbladSystem(ham, ls, f"ising-{driving}")


def xx_chain(n: int, J=1.0, h=0.0, gp=1.0, gm=1.0, driving: str = "max") -> LindbladSystem:
    """``H = sum h_i Z_i + sum J_i (X_i X_{i+1} + Y_i Y_{i+1})``."""
    hs, js = _as_list(h, n), _as_list(J, n - 1)
    ham = sum(hs[i - 1] * site_operator(n, i, SZ) for i in range(1, n + 1))
    for i in range(1, n):
        pad = ([I2] * (i - 1), [I2] * (n - i - 1))
        ham = ham + js[i - 1] * (tensor(*pad[0], SX, SX, *pad[1]) + tensor(*pad[0], SY, SY, *pad[1]))
    ls = _chain_dissipators(n, _driving(n, driving, gp, gm))
    return LindbladSystem(ham, ls, f"xx-{driving}")


def xxz_chain(n: int, J=1.0, delta=1.0, gp=1.0, gm=1.0, driving: str = "max") -> LindbladSystem:
    """``H = J sum (X_i X_{i+1} + Y_i Y_{i+1} + delta Z_i Z_{i+1})``, no fields."""
    d = 2 ** n
    ham = np.zeros((d, d), dtype=complex)
    for i in range(1, n):
        pad = ([I2] * (i - 1), [I2] * (n - i - 1))
        ham += J * (tensor(*pad[0], SX, SX, *pad[1]) + tensor(*pad[0], SY, SY, *pad[1])
                    + delta * tensor(*pad[0], SZ, SZ, *pad[1]))
    ls = _chain_dissipators(n, _driving(n, driving, gp, gm))
    return LindbladSystem(ham, ls, f"xxz-{driving}")


def two_level(h: float = 0.0, lindblads=(), hamiltonian=None, name: str = "two-level") -> LindbladSystem:
    """Two-level system with ``H = h sigma^x`` unless an explicit Hamiltonian is given."""
    ham = h * SX if hamiltonian is None else np.asarray(hamiltonian, dtype=complex)
    return LindbladSystem(ham, tuple(lindblads), name)


_L1101 = np.array([[1, 1], [0, 1]], dtype=complex)


def two_level_preset(name: str, h: float = 1.0, gp: float = 1.0, gm: float = 1.0,
                     gamma: float = 1.0) -> LindbladSystem:
    """Two-level examples by name.

    ``lind1101``            H = 0, L = [[1, 1], [0, 1]]
    ``lind0101-lind0102``   H = 0, L1 = [[0, 1], [0, 1]], L2 = [[0, 1], [0, 2]]
    ``lind1101hsy``         H = sigma^y / 2, L = [[1, 1], [0, 1]]
    ``lind1101-lind1m101``  H = 0, L1 = [[1, 1], [0, 1]], L2 = [[1, -1], [0, 1]]
    ``lindsphsx``           H = h sigma^x, L = sigma^+
    ``loss-gain``           L+ = sqrt(gp) sigma^+, L- = sqrt(gm) sigma^-
    ``dephase``             L = sqrt(gamma) sigma^z
    ``sp-driven``           L = sqrt(gamma) sigma^+
    """
    zero = np.zeros((2, 2))
    if name == "lind1101":
        return two_level(hamiltonian=zero, lindblads=[_L1101], name=name)
    if name == "lind0101-lind0102":
        l1 = np.array([[0, 1], [0, 1]])
        l2 = np.array([[0, 1], [0, 2]])
        return two_level(hamiltonian=zero, lindblads=[l1, l2], name=name)
    if name == "lind1101hsy":
        return two_level(hamiltonian=SY / 2, lindblads=[_L1101], name=name)
    if name == "lind1101-lind1m101":
        return two_level(hamiltonian=zero, lindblads=[_L1101, np.array([[1, -1], [0, 1]])], name=name)
    if name == "lindsphsx":
        return two_level(h=h, lindblads=[SP], name=name)
    if name == "loss-gain":
        return two_level(hamiltonian=zero, lindblads=[np.sqrt(gp) * SP, np.sqrt(gm) * SM], name=name)
    if name == "dephase":
        return two_level(hamiltonian=zero, lindblads=[np.sqrt(gamma) * SZ], name=name)
    if name == "sp-driven":
        return two_level(hamiltonian=zero, lindblads=[np.sqrt(gamma) * SP], name=name)
    raise KeyError(f"unknown two-level preset {name!r}")


def two_site_ferromagnet() -> LindbladSystem:
    """Two spins, H = 0, dephasing on both sites plus aligned-neighbour flips."""
    def op(a, b):
        return tensor(a, b)
    ls = (
        op(SZ, I2),            # sigma^z_1
        op(I2, SZ),            # sigma^z_2
        op(P_UP, SP),          # P^up_1 sigma^+_2
        op(P_DOWN, SM),        # P^down_1 sigma^-_2
        op(SP, P_UP),          # P^up_2 sigma^+_1
        op(SM, P_DOWN),        # P^down_2 sigma^-_1
    )
    return LindbladSystem(np.zeros((4, 4)), ls, "ferromagnet2")


# Preset registry: name -> (constructor, default parameters).  Constructors
# accept keyword parameters n, h, J, gp, gm, delta, gamma as relevant.
PRESETS: dict = {
    "lind1101": (lambda **p: two_level_preset("lind1101"), {}),
    "lind0101-lind0102": (lambda **p: two_level_preset("lind0101-lind0102"), {}),
    "lind1101hsy": (lambda **p: two_level_preset("lind1101hsy"), {}),
    "lind1101-lind1m101": (lambda **p: two_level_preset("lind1101-lind1m101"), {}),
    "lindsphsx": (lambda h, **p: two_level_preset("lindsphsx", h=h), {"h": 1.0}),
    "loss-gain": (lambda gp, gm, **p: two_level_preset("loss-gain", gp=gp, gm=gm), {"gp": 1.0, "gm": 1.0}),
    "dephase": (lambda gamma, **p: two_level_preset("dephase", gamma=gamma), {"gamma": 1.0}),
    "sp-driven": (lambda gamma, **p: two_level_preset("sp-driven", gamma=gamma), {"gamma": 1.0}),
    "ferromagnet2": (lambda **p: two_site_ferromagnet(), {}),
    "ising-boundary": (
        lambda n, h, J, gp, gm, **p: transverse_ising(n, h, J, gp, gm, "boundary"),
        {"n": 3, "h": 1.0, "J": 1.0, "gp": 1.0, "gm": 1.0}),
    "ising-max": (
        lambda n, h, J, gp, gm, **p: transverse_ising(n, h, J, gp, gm, "max"),
        {"n": 3, "h": 1.0, "J": 1.0, "gp": 1.0, "gm": 1.0}),
    "xx-max": (
        lambda n, h, J, gp, gm, **p: xx_chain(n, J, h, gp, gm, "max"),
        {"n": 3, "h": 0.5, "J": 1.0, "gp": 1.0, "gm": 1.0}),
    "xxz-max": (
        lambda n, J, delta, gp, gm, **p: xxz_chain(n, J, delta, gp, gm, "max"),
        {"n": 3, "J": 1.0, "delta": 0.5, "gp": 1.0, "gm": 1.0}),
}


def preset_names() -> list[str]:
    return sorted(PRESETS)


def preset(name: str, **params) -> LindbladSystem:
    """Build a named model.  Underscores in the name are read as hyphens;
    parameters not used by the model are ignored, ``None`` values fall back
    to the defaults."""
    key = name.strip().lower().replace("_", "-")
    if key not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(preset_names())}")
    build, defaults = PRESETS[key]
    kw = dict(defaults)
    kw.update({k: v for k, v in params.items() if v is not None and k in defaults})
    if "n" in kw:
        kw["n"] = int(kw["n"])
        if kw["n"] < 2:
            raise ValueError("chain presets need n >= 2")
    sys = build(**kw)
    return LindbladSystem(sys.hamiltonian, sys.lindblads, key)

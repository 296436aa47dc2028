"""State catalog, spec-string grammar and pure-state entanglement tools."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import gaussian as gs
from .errors import CVTeleError, SpecParseError
from .fock import DEFAULT_TRUNC, FockDensityMatrix, guard_population
from .handle import State
from .teleport import epr_uncertainty

KINDS = (
    "vacuum", "coherent", "fock", "thermal", "cat",
    "svs", "psub-svs", "bell", "two-mode-vacuum",
)
TWO_MODE = {"svs", "psub-svs", "bell", "two-mode-vacuum"}
PURITY_TOL = 1e-8
FRONTIER_TOL = 1e-6


@dataclass(frozen=True)
class StateSpec:
    """Parsed state description, e.g. ``svs:r=0.4`` or ``bell:c0=0.8,c1=0.6``."""

    kind: str
    params: tuple = ()
    dim: int = DEFAULT_TRUNC

    @property
    def modes(self):
        return 2 if self.kind in TWO_MODE else 1

    def param(self, name, default=None):
        return dict(self.params).get(name, default)

    def with_dim(self, dim):
        return StateSpec(self.kind, self.params, dim)

    def __str__(self):
        if not self.params:
            return self.kind
        if self.kind == "coherent":
            return f"coherent:{format_complex(self.param('alpha'))}"
        if self.kind == "fock":
            return f"fock:{self.param('n')}"
        body = ",".join(f"{k}={_format_value(v)}" for k, v in self.params)
        return f"{self.kind}:{body}"


def _format_value(v):
    if isinstance(v, str):
        return v
    if isinstance(v, complex):
        return format_complex(v)
    return _num(v)


def _num(x):
    """Shortest round-tripping text; integral floats drop the ``.0``."""
    text = repr(float(x)) if not isinstance(x, int) else str(x)
    return text[:-2] if text.endswith(".0") else text


def format_complex(z):
    z = complex(z)
    if z.imag == 0:
        return _num(z.real)
    sign = "+" if z.imag >= 0 else "-"
    return f"{_num(z.real)}{sign}{_num(abs(z.imag))}i"


def _complex(text, spec):
    t = text.strip().replace(" ", "")
    if not t or not re.fullmatch(r"[0-9eE.+\-ij]+", t):
        raise SpecParseError(f"bad number {text!r} in spec {spec!r}", module="states", check="parse")
    try:
        return complex(t.replace("i", "j"))
    except ValueError:
        raise SpecParseError(f"bad number {text!r} in spec {spec!r}", module="states",
                             check="parse") from None


def _real(text, spec):
    z = _complex(text, spec)
    if z.imag != 0:
        raise SpecParseError(f"expected a real number in {spec!r}", module="states", check="parse")
    return z.real


def _kv(body, spec):
    out = {}
    for part in body.split(","):
        if "=" not in part:
            raise SpecParseError(f"expected key=value in {spec!r}", module="states", check="parse")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_spec(text, dim=DEFAULT_TRUNC):
    """Parse the CLI grammar into a :class:`StateSpec`."""
    spec = text.strip()
    kind, _, body = spec.partition(":")
    kind = kind.strip().lower()
    aliases = {"tmv": "two-mode-vacuum", "two_mode_vacuum": "two-mode-vacuum",
               "psub_svs": "psub-svs", "fock_bell": "bell"}
    kind = aliases.get(kind, kind)
    if kind not in KINDS:
        raise SpecParseError(f"unknown state kind {kind!r} in {spec!r}", module="states",
                             check="parse")
    if kind in ("vacuum", "two-mode-vacuum"):
        if body:
            raise SpecParseError(f"{kind} takes no parameters", module="states", check="parse")
        return StateSpec(kind, (), dim)
    if not body:
        raise SpecParseError(f"{kind} needs parameters: {spec!r}", module="states", check="parse")

    if kind == "coherent":
        value = _kv(body, spec).get("alpha") if "=" in body else body
        return StateSpec(kind, (("alpha", _complex(value, spec)),), dim)
    if kind == "fock":
        value = _kv(body, spec).get("n") if "=" in body else body
        n = _real(value, spec)
        if n != int(n) or n < 0:
            raise SpecParseError(f"fock level must be a non-negative integer: {spec!r}",
                                 module="states", check="parse")
        return StateSpec(kind, (("n", int(n)),), dim)
    if kind in ("thermal", "svs", "psub-svs"):
        key = "n" if kind == "thermal" else "r"
        value = _kv(body, spec).get(key) if "=" in body else body
        if value is None:
            raise SpecParseError(f"{kind} needs {key}=...", module="states", check="parse")
        x = _real(value, spec)
        if x < 0:
            raise SpecParseError(f"{key} must be non-negative in {spec!r}", module="states",
                                 check="parse")
        return StateSpec(kind, ((key, x),), dim)
    if kind == "cat":
        kv = _kv(body, spec)
        parity = kv.get("parity", "even").lower()
        if parity not in ("even", "odd") or "alpha" not in kv:
            raise SpecParseError(f"cat needs alpha=..., parity=even|odd: {spec!r}",
                                 module="states", check="parse")
        return StateSpec(kind, (("alpha", _complex(kv["alpha"], spec)), ("parity", parity)), dim)
    # bell
    kv = _kv(body, spec)
    coeffs = {}
    for k, v in kv.items():
        m = re.fullmatch(r"c(\d+)", k)
        if not m:
            raise SpecParseError(f"bell coefficients are named c0, c1, ...: {spec!r}",
                                 module="states", check="parse")
        coeffs[int(m.group(1))] = _complex(v, spec)
    params = tuple((f"c{n}", coeffs[n]) for n in sorted(coeffs))
    return StateSpec(kind, params, dim)


def bell_coefficients(spec):
    n_max = max(int(k[1:]) for k, _ in spec.params)
    c = np.zeros(n_max + 1, dtype=complex)
    for k, v in spec.params:
        c[int(k[1:])] = v
    return c


def _pure1(ket, population, label, gaussian=None):
    guard_population(population, label)
    ket = np.asarray(ket, dtype=complex)
    ket = ket / np.linalg.norm(ket)
    return State(fock=FockDensityMatrix.from_ket(ket, 1), gaussian=gaussian, ket=ket, label=label)


def _pure2(diag, population, label, dim, gaussian=None):
    """Two-mode pure state ``sum_n diag[n] |n, n>``."""
    guard_population(population, label)
    C = np.zeros((dim, dim), dtype=complex)
    n = np.arange(len(diag))
    C[n, n] = diag
    C /= np.linalg.norm(C)
    return State(fock=FockDensityMatrix.from_ket(C.ravel(), 2), gaussian=gaussian, ket=C, label=label)


def build(spec, dim=None):
    """Construct a normalised state handle for ``spec`` (string or :class:`StateSpec`)."""
    if isinstance(spec, str):
        spec = parse_spec(spec, dim or DEFAULT_TRUNC)
    elif dim is not None:
        spec = spec.with_dim(dim)
    d = spec.dim
    label = str(spec)
    kind = spec.kind
    n = np.arange(d)

    if kind == "vacuum":
        return _pure1(n == 0, 1.0, label, gs.vacuum(1))
    if kind == "coherent":
        alpha = spec.param("alpha")
        amps = gs.coherent_amplitudes(alpha, d)
        return _pure1(amps, float(np.sum(np.abs(amps) ** 2)), label, gs.coherent(alpha))
    if kind == "fock":
        k = spec.param("n")
        if k >= d:
            guard_population(0.0, label)
        return _pure1(n == k, 1.0, label)
    if kind == "thermal":
        g = gs.thermal(spec.param("n"))
        return State(fock=gs.gaussian_to_fock(g, d), gaussian=g, label=label)
    if kind == "cat":
        alpha = spec.param("alpha")
        sign = 1.0 if spec.param("parity") == "even" else -1.0
        amps = gs.coherent_amplitudes(alpha, d) * (1 + sign * (-1.0) ** n)
        norm2 = 2 * (1 + sign * math.exp(-2 * abs(alpha) ** 2))
        return _pure1(amps, float(np.sum(np.abs(amps) ** 2)) / norm2, label)
    if kind == "two-mode-vacuum":
        return _pure2(np.ones(1), 1.0, label, d, gs.vacuum(2))
    if kind == "svs":
        r = spec.param("r")
        t = math.tanh(r)
        diag = t**n / math.cosh(r)
        return _pure2(diag, float(np.sum(diag**2)), label, d, gs.svs(r))
    if kind == "psub-svs":
        r = spec.param("r")
        t = math.tanh(r)
        if t == 0:
            raise CVTeleError("photon subtraction from the vacuum is undefined", module="states",
                              check="psub_r")
        # a1 a2 sum t^n |n,n>  ->  sum (m+1) t^(m+1) |m,m>, norm^2 = t^2 (1+t^2)/(1-t^2)^3
        diag = (n + 1) * t ** (n + 1)
        full = t**2 * (1 + t**2) / (1 - t**2) ** 3
        return _pure2(diag, float(np.sum(diag**2)) / full, label, d)
    if kind == "bell":
        c = bell_coefficients(spec)
        if len(c) > d:
            kept = float(np.sum(np.abs(c[:d]) ** 2) / np.sum(np.abs(c) ** 2))
            guard_population(kept, label)
        if not np.any(c):
            raise CVTeleError("all bell coefficients are zero", module="states", check="bell")
        return _pure2(c[:d], 1.0, label, d)
    raise SpecParseError(f"unknown kind {kind}", module="states", check="parse")


# --- entanglement ----------------------------------------------------------


@dataclass(frozen=True)
class EntanglementRecord:
    entropy: float
    delta_epr: float
    spec: str
    schmidt: np.ndarray = field(repr=False, default=None)


def _coefficient_matrix(state):
    state = State.wrap(state)
    d = state.fock.dim
    if state.ket is not None:
        return np.asarray(state.ket).reshape(d, d)
    purity = state.fock.purity()
    if purity < 1 - PURITY_TOL:
        raise CVTeleError("Schmidt entropy needs a pure state", module="states", check="purity",
                          defect=1 - purity, tolerance=PURITY_TOL)
    w, v = np.linalg.eigh(state.fock.mat)
    return v[:, -1].reshape(d, d)


def schmidt_coefficients(state):
    s = np.linalg.svd(_coefficient_matrix(state), compute_uv=False)
    return s / np.linalg.norm(s)


def entropy_bits(schmidt):
    p = np.asarray(schmidt) ** 2
    p = p[p > 1e-300]
    return float(max(-np.sum(p * np.log2(p)), 0.0)) + 0.0


def schmidt_entropy(state):
    state = State.wrap(state)
    s = schmidt_coefficients(state)
    return EntanglementRecord(entropy_bits(s), epr_uncertainty(state, path="fock"), state.label, s)


def svs_entropy(r):
    """Entanglement entropy (bits) of the two-mode squeezed vacuum."""
    if r == 0:
        return 0.0
    c2, s2 = math.cosh(r) ** 2, math.sinh(r) ** 2
    return c2 * math.log2(c2) - s2 * math.log2(s2)


def svs_r_for_entropy(entropy, tol=1e-14):
    """Invert the monotone SVS entropy curve by bisection."""
    if entropy <= 0:
        return 0.0
    lo, hi = 0.0, 1.0
    while svs_entropy(hi) < entropy:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if svs_entropy(mid) < entropy:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def svs_frontier(entropy):
    """Smallest EPR uncertainty allowed at this entanglement (the SVS value)."""
    return math.exp(-2.0 * svs_r_for_entropy(entropy))


def is_svs_profile(schmidt, entropy, tol=FRONTIER_TOL):
    r = svs_r_for_entropy(entropy)
    k = np.arange(len(schmidt))
    ref = math.tanh(r) ** k / math.cosh(r)
    return bool(np.max(np.abs(np.sort(schmidt)[::-1] - ref)) <= tol)


def sample_pure_resources(count, seed, dim=DEFAULT_TRUNC, max_rank=6, psub_fraction=0.3,
                          r_range=(0.05, 0.6), complex_fraction=0.5):
    """Seeded mixture of random ``bell`` profiles and photon-subtracted SVS."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    specs = []
    for _ in range(count):
        if rng.random() < psub_fraction:
            r = float(np.round(rng.uniform(*r_range), 12))
            specs.append(StateSpec("psub-svs", (("r", r),), dim))
            continue
        rank = int(rng.integers(1, max_rank + 1))
        mags = rng.random(rank)
        if rng.random() < complex_fraction:
            coeffs = mags * np.exp(2j * np.pi * rng.random(rank))
        else:
            coeffs = mags.astype(complex)
        coeffs = np.round(coeffs / np.linalg.norm(coeffs), 12)
        params = tuple((f"c{n}", complex(c) if c.imag else float(c.real)) for n, c in enumerate(coeffs))
        specs.append(StateSpec("bell", params, dim))
    return specs


@dataclass(frozen=True)
class FrontierPoint:
    spec: str
    kind: str
    entropy: float
    delta_epr: float
    frontier: float
    violation: bool


def frontier_point(spec, dim=None, tol=FRONTIER_TOL):
    state = build(spec, dim)
    rec = schmidt_entropy(state)
    bound = svs_frontier(rec.entropy)
    gap = rec.delta_epr - bound
    violation = gap < -tol or (abs(gap) <= tol and not is_svs_profile(rec.schmidt, rec.entropy, tol)
                               and rec.entropy > 0)
    kind = spec.kind if isinstance(spec, StateSpec) else parse_spec(spec).kind
    return FrontierPoint(str(state.label), kind, rec.entropy, rec.delta_epr, bound, bool(violation))

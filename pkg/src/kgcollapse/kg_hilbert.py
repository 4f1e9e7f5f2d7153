"""Momentum-space Hilbert space of a free Klein-Gordon particle.

A state is a pair of Newton-Wigner amplitudes ``(amp_plus, amp_minus)`` on
a uniform momentum grid, one per energy sign. The inner product is the
plain quadrature ``sum(conj(a) * b) * dp`` over both sectors; in this
normalization the relational position operator acts as ``i d/dp`` and the
covariant amplitude is ``sqrt(2 omega) * phi``.

States never evolve. Clock dependence lives in the operators, see
:mod:`kgcollapse.relational_obs`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "MomentumGrid",
    "KGState",
    "GridMismatchError",
    "NullStateError",
    "CutoffWarning",
    "gaussian_packet",
    "inner",
    "norm",
    "normalize",
    "boost_state",
    "boost_norm_drift",
    "boost_amplitudes",
    "position_amplitudes",
    "evolve",
    "fidelity",
    "DEFAULT_N",
    "DEFAULT_PMAX_OVER_M",
    "DEFAULT_SIGMA_P_OVER_M",
]

DEFAULT_N = 1024
DEFAULT_PMAX_OVER_M = 16.0
DEFAULT_SIGMA_P_OVER_M = 0.5

NULL_NORM = 1e-14
TAIL_WARN = 1e-6


class GridMismatchError(ValueError):
    pass


class NullStateError(ValueError):
    pass


class CutoffWarning(UserWarning):
    """Part of a state falls outside the momentum cutoff."""


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform grid ``p_j = -p_max + j * dp``, ``dp = 2 p_max / N``."""

    N: int = DEFAULT_N
    p_max: float = DEFAULT_PMAX_OVER_M
    mass: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N}")
        if not self.p_max > 0:
            raise ValueError("p_max must be positive")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        object.__setattr__(self, "N", int(self.N))

    @classmethod
    def default(cls, mass: float = 1.0, N: int = DEFAULT_N, p_max_over_m: float = DEFAULT_PMAX_OVER_M):
        return cls(N, p_max_over_m * mass, mass)

    @property
    def dp(self) -> float:
        return 2.0 * self.p_max / self.N

    @cached_property
    def p(self) -> np.ndarray:
        p = -self.p_max + self.dp * np.arange(self.N)
        p.flags.writeable = False
        return p

    @cached_property
    def omega(self) -> np.ndarray:
        w = np.sqrt(self.p**2 + self.mass**2)
        w.flags.writeable = False
        return w

    @property
    def compton(self) -> float:
        return 1.0 / self.mass

    @property
    def dx(self) -> float:
        """Spacing of the conjugate position grid."""
        return 2.0 * math.pi / (self.N * self.dp)

    @property
    def position_period(self) -> float:
        """Positions are only resolved modulo this length."""
        return 2.0 * math.pi / self.dp

    @cached_property
    def x(self) -> np.ndarray:
        x = self.dx * (np.arange(self.N) - self.N // 2)
        x.flags.writeable = False
        return x

    def to_dict(self) -> dict:
        return {"N": self.N, "p_max": self.p_max, "mass": self.mass}


@dataclass(frozen=True, eq=False)
class KGState:
    grid: MomentumGrid
    amp_plus: np.ndarray
    amp_minus: np.ndarray

    def __post_init__(self):
        for name in ("amp_plus", "amp_minus"):
            a = np.array(getattr(self, name), dtype=complex)
            if a.shape != (self.grid.N,):
                raise ValueError(f"{name} must have shape ({self.grid.N},), got {a.shape}")
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @classmethod
    def zeros(cls, grid: MomentumGrid) -> "KGState":
        return cls(grid, np.zeros(grid.N, complex), np.zeros(grid.N, complex))

    def sector(self, eps: int) -> np.ndarray:
        return self.amp_plus if eps > 0 else self.amp_minus

    def with_sectors(self, plus=None, minus=None) -> "KGState":
        return KGState(
            self.grid,
            self.amp_plus if plus is None else plus,
            self.amp_minus if minus is None else minus,
        )

    def __mul__(self, c) -> "KGState":
        return KGState(self.grid, c * self.amp_plus, c * self.amp_minus)

    __rmul__ = __mul__

    def __add__(self, other: "KGState") -> "KGState":
        _check_grid(self, other)
        return KGState(self.grid, self.amp_plus + other.amp_plus, self.amp_minus + other.amp_minus)

    def __sub__(self, other: "KGState") -> "KGState":
        _check_grid(self, other)
        return KGState(self.grid, self.amp_plus - other.amp_plus, self.amp_minus - other.amp_minus)

    def momentum_expectation(self) -> float:
        g = self.grid
        w = (np.abs(self.amp_plus) ** 2 + np.abs(self.amp_minus) ** 2) * g.dp
        return float(np.sum(g.p * w) / np.sum(w))

    def velocity_expectation(self) -> float:
        """Expectation of p / p0 with p0 = eps * omega."""
        g = self.grid
        v = g.p / g.omega
        num = np.sum(v * np.abs(self.amp_plus) ** 2) - np.sum(v * np.abs(self.amp_minus) ** 2)
        return float(num * g.dp / norm(self) ** 2)


def _check_grid(a: KGState, b: KGState) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


def inner(a: KGState, b: KGState) -> complex:
    _check_grid(a, b)
    return complex((np.vdot(a.amp_plus, b.amp_plus) + np.vdot(a.amp_minus, b.amp_minus)) * a.grid.dp)


def norm(s: KGState) -> float:
    return math.sqrt(max(inner(s, s).real, 0.0))


def normalize(s: KGState) -> KGState:
    n = norm(s)
    if n < NULL_NORM:
        raise NullStateError(f"cannot normalize a state of norm {n:.3e}")
    return s * (1.0 / n)


def fidelity(a: KGState, b: KGState) -> float:
    """|<a|b>| for normalized inputs."""
    return abs(inner(a, b)) / (norm(a) * norm(b))


def gaussian_packet(grid: MomentumGrid, x0: float = 0.0, p0: float = 0.0,
                    sigma_p: float | None = None, eps: int = 1) -> KGState:
    """Gaussian packet of momentum width ``sigma_p`` centred at ``x0`` at clock time zero.

    Warns with :class:`CutoffWarning` if more than 1e-6 of the continuum
    weight lies beyond the momentum cutoff.
    """
    if sigma_p is None:
        sigma_p = DEFAULT_SIGMA_P_OVER_M * grid.mass
    if not sigma_p > 0:
        raise ValueError("sigma_p must be positive")
    if eps not in (1, -1):
        raise ValueError("eps must be +1 or -1")
    # continuum weight of |amp|^2 ~ N(p0, sigma_p^2) outside [-p_max, p_max]
    tail = 0.5 * (math.erfc((grid.p_max - p0) / (math.sqrt(2) * sigma_p))
                  + math.erfc((grid.p_max + p0) / (math.sqrt(2) * sigma_p)))
    if tail > TAIL_WARN:
        warnings.warn(f"packet tail beyond cutoff: {tail:.2e}", CutoffWarning, stacklevel=2)
    p = grid.p
    amp = np.exp(-((p - p0) ** 2) / (4.0 * sigma_p**2) - 1j * p * x0)
    zero = np.zeros(grid.N, complex)
    s = KGState(grid, amp, zero) if eps > 0 else KGState(grid, zero, amp)
    return normalize(s)


def evolve(s: KGState, t: float) -> KGState:
    """Schroedinger-picture state at lab time ``t``: phase exp(-i eps omega t)."""
    ph = np.exp(-1j * s.grid.omega * t)
    return KGState(s.grid, s.amp_plus * ph, s.amp_minus * np.conj(ph))


def position_amplitudes(s: KGState) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Newton-Wigner position amplitudes on the conjugate grid.

    Returns ``(x, psi_plus, psi_minus)`` with
    ``psi(x) = (2 pi)^-1/2 * sum_j phi_j exp(i p_j x) dp`` and
    ``sum |psi|^2 dx == norm(s)^2``.
    """
    g = s.grid
    x = g.x
    # exp(i p_j x_n) = exp(-i p_max x_n) * exp(2 pi i j n / N), n taken mod N
    pref = g.dp / math.sqrt(2 * math.pi) * g.N * np.exp(-1j * g.p_max * x)
    idx = np.mod(np.arange(g.N) - g.N // 2, g.N)
    out = []
    for a in (s.amp_plus, s.amp_minus):
        out.append(pref * np.fft.ifft(a)[idx])
    return x, out[0], out[1]


def boost_amplitudes(grid: MomentumGrid, amp: np.ndarray, chi: float, eps: int) -> np.ndarray:
    """Apply the unitary boost to one energy-sign sector (no renormalization).

    phi'(p) = sqrt(omega_q / omega_p) * phi(q), q = p cosh(chi) - eps * omega_p sinh(chi).
    The covariant amplitude sqrt(2 omega) phi is interpolated with a cubic
    spline; preimages outside the grid contribute zero.
    """
    if chi == 0.0:
        return np.array(amp, dtype=complex, copy=True)
    p, w = grid.p, grid.omega
    q = p * math.cosh(chi) - eps * w * math.sinh(chi)
    cov = np.sqrt(2.0 * w) * amp
    spline = CubicSpline(p, cov, axis=0, bc_type="not-a-knot", extrapolate=False)
    inside = (q >= p[0]) & (q <= p[-1])
    out = np.zeros(amp.shape, dtype=complex)
    out[inside] = spline(q[inside])
    return out / np.sqrt(2.0 * w).reshape((-1,) + (1,) * (amp.ndim - 1))


def boost_state(s: KGState, chi, *, renormalize: bool = True, warn: bool = True) -> KGState:
    """Unitary action of an active Lorentz boost of rapidity ``chi``."""
    chi = float(getattr(chi, "chi", chi))
    g = s.grid
    out = KGState(g, boost_amplitudes(g, s.amp_plus, chi, 1), boost_amplitudes(g, s.amp_minus, chi, -1))
    if warn:
        drift = norm(out) / max(norm(s), NULL_NORM) - 1.0
        if abs(drift) > TAIL_WARN:
            warnings.warn(f"boost by {chi} changed the norm by {drift:.2e}", CutoffWarning, stacklevel=2)
    return normalize(out) if renormalize else out


def boost_norm_drift(s: KGState, chi: float) -> float:
    """norm(boost(s)) - norm(s) before any renormalization."""
    return norm(boost_state(s, chi, renormalize=False, warn=False)) - norm(s)

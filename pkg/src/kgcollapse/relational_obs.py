"""Relational observables X(T), the energy sign, and their local projectors.

A local position projector for a device is assembled in the device rest
frame from the analytic region kernel

    K(p_j, p_k) = exp(i eps (w_j - w_k) T) * I_R(p_j - p_k) * dp,
    I_R(D) = (exp(-i D x1) - exp(-i D x2)) / (2 pi i D),

and then replaced by its spectral projection (eigenvalues rounded at 1/2).
On a band-limited grid the raw kernel is never idempotent: its spectrum
fills (0, 1) near the region edges. The spectral projection is the nearest
orthogonal projector and keeps the Born rule, complements and collapse
exactly consistent. The raw kernel stays available through
:func:`nw_kernel` for diagnostics.

For the symmetric region [-w/2, w/2] at T = 0 the kernel is the discrete
prolate (Slepian) concentration matrix, whose eigenvectors come from
``scipy.signal.windows.dpss``. Translation and clock phases are diagonal
unitaries, so one eigenproblem per width serves every device.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.signal.windows import dpss

from .kg_hilbert import (
    KGState,
    MomentumGrid,
    GridMismatchError,
    boost_state,
    evolve,
    position_amplitudes,
)

__all__ = [
    "ProjectorMatrix",
    "DegenerateRegionError",
    "nw_kernel",
    "nw_projector",
    "energy_sign_projector",
    "identity_projector",
    "complement",
    "apply",
    "apply_rest",
    "probability",
    "expectation_X",
    "expectation_q",
    "commutator_norm",
    "spectral_norm",
    "idempotence_defect",
    "kernel_idempotence_defect",
]

# exact dyadic grid for diagonal entries so that 1 - d is representable
_DIAG_QUANTUM = 2.0**-52


class DegenerateRegionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ProjectorMatrix:
    """Orthogonal projector on the two-sector momentum space.

    ``matrix`` is the dense N x N block (quadrature weight included) acting
    on sector ``sector``; the opposite sector is multiplied by the scalar
    ``other`` (0 or 1). The block is the rest-frame operator; for a device
    with rapidity ``eta`` the lab-frame action is
    ``boost(+eta) . block . boost(-eta)``.
    """

    grid: MomentumGrid
    sector: int
    matrix: np.ndarray = field(repr=False)
    other: float = 0.0
    region: tuple[float, float] | None = None
    T: float = 0.0
    eta: float = 0.0
    label: str = ""

    def __post_init__(self):
        if self.sector not in (1, -1):
            raise ValueError("sector must be +1 or -1")
        if self.other not in (0.0, 1.0):
            raise ValueError("other must be 0 or 1")
        self.matrix.flags.writeable = False

    @property
    def provenance(self) -> dict:
        return {"region": self.region, "T": self.T, "eta": self.eta, "sector": self.sector}

    def act_rest(self, s: KGState) -> KGState:
        """Action in the device rest frame (no boosts)."""
        blk = self.matrix @ s.sector(self.sector)
        oth = self.other * s.sector(-self.sector)
        return s.with_sectors(plus=blk, minus=oth) if self.sector > 0 else s.with_sectors(plus=oth, minus=blk)


def _hermitian(m: np.ndarray) -> np.ndarray:
    """Exactly Hermitian copy built from the upper triangle."""
    up = np.triu(m, 1)
    d = np.round(np.real(np.diagonal(m)) / _DIAG_QUANTUM) * _DIAG_QUANTUM
    return up + up.conj().T + np.diag(d).astype(complex)


def nw_kernel(grid: MomentumGrid, x1: float, x2: float, T: float = 0.0, eps: int = 1) -> np.ndarray:
    """Raw region kernel K(p_j, p_k) including the dp weight."""
    p, w = grid.p, grid.omega
    d = p[:, None] - p[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        k = (np.exp(-1j * d * x1) - np.exp(-1j * d * x2)) / (2j * math.pi * d)
    np.fill_diagonal(k, (x2 - x1) / (2 * math.pi))
    ph = np.exp(1j * eps * w * T)
    return _hermitian(ph[:, None] * k * ph.conj()[None, :] * grid.dp)


@lru_cache(maxsize=64)
def _centered_block(N: int, dp: float, width: float) -> np.ndarray:
    """Spectral projection of the T=0 kernel for [-width/2, width/2] (real symmetric)."""
    period = 2 * math.pi / dp
    if width >= period:
        return np.eye(N)
    half_band = dp * width / (4 * math.pi)  # Slepian half bandwidth W
    if half_band > 0.25:
        # complement region has the smaller eigenproblem; the shift by half a
        # period is the diagonal sign pattern (-1)^j
        sign = (-1.0) ** np.arange(N)
        return np.eye(N) - sign[:, None] * _centered_block(N, dp, period - width) * sign[None, :]
    nw = N * half_band
    kmax = min(N, int(math.ceil(2 * nw)) + 8)
    while True:
        vecs, ratios = dpss(N, nw, Kmax=kmax, return_ratios=True)
        vecs, ratios = np.atleast_2d(vecs), np.atleast_1d(ratios)
        if ratios[-1] < 0.5 or kmax == N:
            break
        kmax = min(N, 2 * kmax)
    keep = vecs[ratios > 0.5]
    block = keep.T @ keep
    block = 0.5 * (block + block.T)
    block.flags.writeable = False
    return block


def nw_projector(grid: MomentumGrid, region: tuple[float, float], T: float = 0.0,
                 eta: float = 0.0, eps: int = 1, label: str = "") -> ProjectorMatrix:
    """Local projector on NW positions in ``region`` at clock ``T`` of a device with rapidity ``eta``.

    ``region`` and ``T`` are rest-frame coordinates of the device.
    """
    x1, x2 = map(float, region)
    if not x2 - x1 > 1e-12 * grid.compton:
        raise DegenerateRegionError(f"region [{x1}, {x2}] is degenerate")
    c, w = 0.5 * (x1 + x2), x2 - x1
    block = _centered_block(grid.N, grid.dp, w)
    u = np.exp(-1j * grid.p * c + 1j * eps * grid.omega * T)
    mat = _hermitian(u[:, None] * block * u.conj()[None, :])
    return ProjectorMatrix(grid, eps, mat, 0.0, (x1, x2), float(T), float(eta), label)


def energy_sign_projector(grid: MomentumGrid, sign: int = 1, eta: float = 0.0, label: str = "") -> ProjectorMatrix:
    """Identity on the ``sign`` sector, zero on the other."""
    return ProjectorMatrix(grid, sign, np.eye(grid.N, dtype=complex), 0.0, None, 0.0, float(eta), label)


def identity_projector(grid: MomentumGrid) -> ProjectorMatrix:
    return ProjectorMatrix(grid, 1, np.eye(grid.N, dtype=complex), 1.0)


def complement(P: ProjectorMatrix) -> ProjectorMatrix:
    """I - P on the full two-sector space."""
    mat = np.eye(P.grid.N, dtype=complex) - P.matrix
    return ProjectorMatrix(P.grid, P.sector, mat, 1.0 - P.other, P.region, P.T, P.eta,
                           f"not {P.label}" if P.label else "")


def apply_rest(P: ProjectorMatrix, s: KGState) -> KGState:
    if P.grid != s.grid:
        raise GridMismatchError("projector and state live on different grids")
    return P.act_rest(s)


def apply(P: ProjectorMatrix, s: KGState) -> KGState:
    """Lab-frame action ``boost(eta) P_rest boost(-eta)``; result is not normalized."""
    if P.grid != s.grid:
        raise GridMismatchError("projector and state live on different grids")
    if P.eta == 0.0:
        return P.act_rest(s)
    rest = boost_state(s, -P.eta, renormalize=False, warn=False)
    return boost_state(P.act_rest(rest), P.eta, renormalize=False, warn=False)


def probability(P: ProjectorMatrix, s: KGState) -> float:
    """<s|P|s> for normalized ``s`` (computed as ||P s||^2)."""
    from .kg_hilbert import norm

    return norm(apply(P, s)) ** 2


def expectation_q(s: KGState) -> float:
    """<i d/dp> via the conjugate position grid (spectral derivative)."""
    x, psi_p, psi_m = position_amplitudes(s)
    dens = np.abs(psi_p) ** 2 + np.abs(psi_m) ** 2
    return float(np.sum(x * dens) / np.sum(dens))


def expectation_X(s: KGState, T: float) -> float:
    """<X(T)> = <q + p T / p0>, evaluated as <q> on exp(-i eps omega T) s.

    The two forms agree as an operator identity; computing through the
    evolved state keeps the kinematic identity checkable.
    """
    return expectation_q(evolve(s, T))


def spectral_norm(matvec, rmatvec, n: int, rtol: float = 1e-8, maxiter: int = 20000, seed: int = 0) -> float:
    """Largest singular value by power iteration on A^H A."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam_old = 0.0
    for _ in range(maxiter):
        w = rmatvec(matvec(v))
        lam = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(lam - lam_old) <= rtol * abs(lam):
            break
        lam_old = lam
    return math.sqrt(max(lam, 0.0))


def _lab_block(P: ProjectorMatrix, eta_ref: float) -> np.ndarray:
    """Dense block of P expressed in the rest frame of rapidity ``eta_ref``."""
    if P.eta == eta_ref:
        return P.matrix
    from .kg_hilbert import boost_amplitudes

    g = P.grid
    d = P.eta - eta_ref
    eye = np.eye(g.N, dtype=complex)
    b_fwd = boost_amplitudes(g, eye, d, P.sector)
    b_back = boost_amplitudes(g, eye, -d, P.sector)
    return b_fwd @ P.matrix @ b_back


def commutator_norm(P1: ProjectorMatrix, P2: ProjectorMatrix, rtol: float = 1e-8) -> float:
    """Spectral norm of P1 P2 - P2 P1.

    Blocks on different sectors, or scalar blocks, commute exactly. For
    devices with different rapidities both blocks are moved to the first
    device's frame with dense boost matrices.
    """
    if P1.grid != P2.grid:
        raise GridMismatchError("projectors live on different grids")
    if P1 is P2:
        return 0.0
    if P1.sector != P2.sector:
        return 0.0
    a = P1.matrix
    b = _lab_block(P2, P1.eta)
    if _is_scalar(a) or _is_scalar(b):
        return 0.0

    def mv(v):
        return a @ (b @ v) - b @ (a @ v)

    def rmv(v):
        ah, bh = a.conj().T, b.conj().T
        return bh @ (ah @ v) - ah @ (bh @ v)

    return spectral_norm(mv, rmv, P1.grid.N, rtol=rtol)


def _is_scalar(m: np.ndarray) -> bool:
    d = m[0, 0]
    return bool(np.all(m[np.triu_indices_from(m, 1)] == 0) and np.all(np.diagonal(m) == d))


def idempotence_defect(P: ProjectorMatrix) -> float:
    """||P^2 - P||_2 of the rest-frame block."""
    m = P.matrix
    d = m @ m - m
    return spectral_norm(lambda v: d @ v, lambda v: d.conj().T @ v, P.grid.N)


def kernel_idempotence_defect(grid: MomentumGrid, x1: float, x2: float) -> float:
    """||K^2 - K||_2 of the raw (unprojected) region kernel."""
    k = nw_kernel(grid, x1, x2)
    d = k @ k - k
    return spectral_norm(lambda v: d @ v, lambda v: d.conj().T @ v, grid.N)

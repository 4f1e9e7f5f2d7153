"""Independent reference computations used by the tests.

Nothing here calls the package's numerical kernels: geometry is checked by
dense point sampling, layering by the iterative set definition, and
densities by direct Fourier quadrature of analytic packets.
"""
from __future__ import annotations

import math

import numpy as np


# --- geometry ---------------------------------------------------------------


def segment_points(center_t, center_x, L, eta, n=801):
    s = np.linspace(-L, L, n)
    return center_t + s * math.sinh(eta), center_x + s * math.cosh(eta)


def future_margin(a_pts, b_pts):
    """For each point of b: max over a of (t_b - t_a - |x_b - x_a|).

    Positive means inside the causal future of the sampled set a.
    """
    at, ax = a_pts
    bt, bx = b_pts
    m = np.full(bt.shape, -np.inf)
    for k in range(0, at.size, 200):
        dt = bt[:, None] - at[None, k:k + 200]
        dx = np.abs(bx[:, None] - ax[None, k:k + 200])
        m = np.maximum(m, np.max(dt - dx, axis=1))
    return m


def sampled_relation(a, b, n=801):
    """Relation of b relative to a by dense sampling, plus the decision margin.

    ``a`` and ``b`` are ``(t, x, L, eta)`` tuples. Returns ``(name, margin)``;
    the verdict is only trustworthy when ``margin`` is comfortably positive.
    """
    pa, pb = segment_points(*a, n=n), segment_points(*b, n=n)
    mb = future_margin(pa, pb)  # b points vs J+(a)
    ma = future_margin(pb, pa)  # a points vs J+(b)
    b_in, b_meets = mb.min() >= 0, mb.max() > 0
    a_in, a_meets = ma.min() >= 0, ma.max() > 0
    margin = min(abs(mb.min()), abs(mb.max()), abs(ma.min()), abs(ma.max()))
    prec, succ = b_in and b_meets, a_in and a_meets
    if prec and succ:
        name = "Partial"
    elif prec:
        name = "Precedes"
    elif succ:
        name = "Succeeds"
    elif not b_meets and not a_meets:
        name = "Spacelike"
    else:
        name = "Partial"
    return name, margin


def iterative_layers(ids, preparer, precedes):
    """S^1 = devices preceded only by the preparer; S^i = devices all of whose
    predecessors lie in earlier sets. ``precedes(a, b)`` is a predicate."""
    placed = {preparer}
    rest = [d for d in ids if d != preparer]
    layers = []
    while rest:
        cur = sorted(d for d in rest if all(p in placed for p in ids if p != d and precedes(p, d)))
        if not cur:
            raise RuntimeError("no progress; cyclic precedence")
        layers.append(tuple(cur))
        placed.update(cur)
        rest = [d for d in rest if d not in cur]
    return tuple(layers)


# --- packets ----------------------------------------------------------------


def dense_momentum(p0, sigma_p, x0=0.0, n=8001, width=12.0):
    """Analytic Gaussian NW amplitude, normalized, on a fine momentum grid."""
    p = np.linspace(p0 - width * sigma_p, p0 + width * sigma_p, n)
    dp = p[1] - p[0]
    a = np.exp(-((p - p0) ** 2) / (4 * sigma_p**2) - 1j * p * x0)
    a /= math.sqrt(np.sum(np.abs(a) ** 2) * dp)
    return p, a, dp


def nw_amplitude(p, a, dp, x, omega=None, t=0.0):
    """psi(x) = (2 pi)^-1/2 int a(p) exp(i p x - i omega t) dp by direct summation."""
    ph = a if omega is None else a * np.exp(-1j * omega * t)
    out = np.empty(len(x), complex)
    for k in range(0, len(x), 256):
        out[k:k + 256] = np.exp(1j * np.outer(x[k:k + 256], p)) @ ph
    return out * dp / math.sqrt(2 * math.pi)


def region_probability(p0, sigma_p, x1, x2, x0=0.0, order=400):
    """Continuum NW probability of [x1, x2] for the analytic Gaussian."""
    p, a, dp = dense_momentum(p0, sigma_p, x0, n=4001)
    xs, ws = np.polynomial.legendre.leggauss(order)
    xq = 0.5 * (x2 - x1) * xs + 0.5 * (x1 + x2)
    psi = nw_amplitude(p, a, dp, xq)
    return float(np.sum(ws * np.abs(psi) ** 2) * 0.5 * (x2 - x1))


def position_mean(p0, sigma_p, x0, half_span=40.0, order=800):
    """Continuum <x> of the NW density of the analytic Gaussian."""
    p, a, dp = dense_momentum(p0, sigma_p, x0, n=4001)
    xs, ws = np.polynomial.legendre.leggauss(order)
    xq = x0 + half_span * xs
    dens = np.abs(nw_amplitude(p, a, dp, xq)) ** 2
    return float(np.sum(ws * xq * dens) / np.sum(ws * dens))


def boosted_gaussian_mean_p(p0, sigma_p, chi, m=1.0, eps=1, factor=16, p_max=16.0, N=1024):
    """<p> after the boost, from the analytic Gaussian on a 16x denser grid."""
    n = N * factor
    p = -p_max + (2 * p_max / n) * np.arange(n)
    w = np.sqrt(p**2 + m * m)
    q = p * math.cosh(chi) - eps * w * math.sinh(chi)
    wq = np.sqrt(q**2 + m * m)
    phi_q = np.exp(-((q - p0) ** 2) / (4 * sigma_p**2))
    amp = np.sqrt(wq / w) * phi_q
    dens = np.abs(amp) ** 2
    return float(np.sum(p * dens) / np.sum(dens))

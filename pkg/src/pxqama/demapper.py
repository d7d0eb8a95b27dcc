"""Per-user soft demapping.

Each receiver equalizes with its own gain and phase, splits I and Q, and
computes bit metrics independently on each branch. Two metric paths give
the same max-log quantity: a brute-force dual minimum over the
constellation and closed-form piecewise-linear expressions for up to
three bits per branch. The sign convention is LLR > 0 when bit 1 is
more likely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .hqam import HierPam

__all__ = [
    "BranchObservation",
    "LlrVector",
    "equalize",
    "dual_min_metric",
    "piecewise_metric",
    "exact_llr",
    "llr_scale",
    "bit_llrs",
    "METRICS",
]

MAX_PIECEWISE_BITS = 3


def equalize(y, gain: float, phase: float) -> tuple[np.ndarray, np.ndarray]:
    """One-tap equalization followed by I/Q decoupling."""
    if not gain > 0:
        raise ValueError("cannot equalize a zero-gain channel")
    r = np.exp(-1j * phase) * np.asarray(y, dtype=complex) / gain
    return r.real, r.imag


@dataclass(frozen=True, eq=False)
class BranchObservation:
    """Equalized samples of one branch with the constellation they belong to."""

    y: np.ndarray
    pam: HierPam
    noise_var: float


def _select_bit(z: np.ndarray, k: int | None) -> np.ndarray:
    if k is None:
        return z
    if not 1 <= k <= z.shape[-1]:
        raise ValueError(f"bit index {k} out of range 1..{z.shape[-1]}")
    return z[..., k - 1]


def dual_min_metric(y, pam: HierPam, k: int | None = None) -> np.ndarray:
    """Max-log bit metric by exhaustive search.

    ``z_k = min_{b_k=0} |y-s|^2/4 - min_{b_k=1} |y-s|^2/4``. Returns all
    bits along a new last axis unless ``k`` (1-based) is given. Works for
    any constellation size.
    """
    y = np.asarray(y, dtype=float)
    m = pam.bits_per_symbol
    dist = 0.25 * (y[..., None] - pam.points) ** 2
    z = np.empty(y.shape + (m,))
    for j in range(m):
        ones = pam.labels[:, j] == 1
        z[..., j] = (dist[..., ~ones].min(axis=-1)
                     - dist[..., ones].min(axis=-1))
    return _select_bit(z, k)


def piecewise_metric(y, pam: HierPam, k: int | None = None) -> np.ndarray:
    """Closed-form max-log metrics for hierarchical PAM with <= 3 bits.

    The three-bit expressions are used throughout; smaller constellations
    are handled by setting the missing inner distances to zero, which
    collapses the corresponding regions.
    """
    m = pam.bits_per_symbol
    if m > MAX_PIECEWISE_BITS:
        raise ValueError(f"piecewise metrics support at most "
                         f"{MAX_PIECEWISE_BITS} bits per branch, got {m}")
    y = np.asarray(y, dtype=float)
    d1, d2, d3 = np.concatenate([pam.distances, np.zeros(3 - m)])
    t = np.abs(y)
    sgn = np.sign(y)

    z1 = np.select(
        [t < d1 - d2, t < d1, t < d1 + d2],
        [y * (d1 - d2 - d3),
         (d1 - d2) * (y - sgn * d3),
         (d1 - d3) * (y - sgn * d2)],
        d1 * (y - sgn * (d2 + d3)))
    z2 = np.select(
        [t < d1 - d2, t < d1 + d2],
        [d2 * (d1 - d3 - t), (d2 - d3) * (d1 - t)],
        d2 * (d1 + d3 - t))
    z3 = d3 * (d2 - np.abs(d1 - t))
    z = np.stack([z1, z2, z3][:m], axis=-1) if m else np.empty(y.shape + (0,))
    return _select_bit(z, k)


METRICS = {"piecewise": piecewise_metric, "dual_min": dual_min_metric}


def exact_llr(y, pam: HierPam, noise_var: float) -> np.ndarray:
    """Full-sum log-likelihood ratios ``ln f(y|b=1)/f(y|b=0)`` per bit."""
    if not noise_var > 0:
        raise ValueError("noise variance must be positive")
    y = np.asarray(y, dtype=float)
    e = -((y[..., None] - pam.points) ** 2) / (2.0 * noise_var)
    m = pam.bits_per_symbol
    out = np.empty(y.shape + (m,))
    for j in range(m):
        ones = pam.labels[:, j] == 1
        out[..., j] = (logsumexp(e[..., ones], axis=-1)
                       - logsumexp(e[..., ~ones], axis=-1))
    return out


def llr_scale(gain: float, sigma2: float) -> float:
    """Factor turning a metric ``z`` into an LLR: ``4 G^2 / sigma^2``."""
    return 4.0 * gain**2 / sigma2


@dataclass(frozen=True, eq=False)
class LlrVector:
    """Metrics and LLRs of one user's composite bits, per branch."""

    z_i: np.ndarray
    z_q: np.ndarray
    scale: float

    @property
    def llr_i(self) -> np.ndarray:
        return self.scale * self.z_i

    @property
    def llr_q(self) -> np.ndarray:
        return self.scale * self.z_q

    def hard_bits(self) -> tuple[np.ndarray, np.ndarray]:
        return (self.z_i > 0).astype(np.int64), (self.z_q > 0).astype(np.int64)


def bit_llrs(y, eq, pam_i: HierPam, pam_q: HierPam,
             method: str = "piecewise") -> LlrVector:
    """LLRs of all composite bits from received samples ``y``.

    ``eq`` is the user's equivalent channel (gain, phase, sigma2). Only the
    user's own quantities enter; nothing about the other user is needed.
    """
    metric = METRICS[method]
    yi, yq = equalize(y, eq.gain, eq.phase)
    return LlrVector(metric(yi, pam_i), metric(yq, pam_q),
                     llr_scale(eq.gain, eq.sigma2))

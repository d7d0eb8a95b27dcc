"""Bit-channel mutual information and per-user rates.

Each labeled bit of a user's composite constellation is treated as a
binary-input channel to the equalized branch sample (BICM with a
bit-wise demapper). Its mutual information equals the information the
exact LLR carries about the bit. The production path evaluates the
defining integral with Gauss-Hermite quadrature, one rule per mixture
component; a Monte Carlo estimator is kept as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .demapper import exact_llr
from .hqam import HierPam, ModeConfig, build_hier_pam, received_layers

__all__ = [
    "BitChannelRates",
    "RatePoint",
    "branch_mi",
    "bit_mi_quadrature",
    "bit_mi_montecarlo",
    "llr_mi_estimate",
    "bit_channel_rates",
    "user_rates",
    "N_NODES",
]

N_NODES = 64
LOG2 = math.log(2.0)


@dataclass(frozen=True)
class _Rule:
    nodes: np.ndarray
    weights: np.ndarray


_RULES: dict[int, _Rule] = {}


def _rule(n: int) -> _Rule:
    if n not in _RULES:
        x, w = np.polynomial.hermite.hermgauss(n)
        _RULES[n] = _Rule(x, w / math.sqrt(math.pi))
    return _RULES[n]


def _natural(m: int) -> np.ndarray:
    idx = np.arange(2**m)
    return (idx[:, None] >> np.arange(m - 1, -1, -1)) & 1


def _lse(e: np.ndarray) -> np.ndarray:
    mx = e.max(axis=-1)
    return np.log(np.exp(e - mx[..., None]).sum(axis=-1)) + mx


def branch_mi(distances, noise_var, n_nodes: int = N_NODES) -> np.ndarray:
    """Mutual information of every bit of a hierarchical PAM branch.

    Parameters
    ----------
    distances : array_like, shape (m,) or (B, m)
        Layer distances, highest layer first. A batch axis may be given.
    noise_var : float or array_like, shape (B,)
        Real-branch noise variance.
    n_nodes : int
        Gauss-Hermite nodes per mixture component.

    Returns
    -------
    ndarray, shape (m,) or (B, m)
        Bits per channel use, one value per layer.
    """
    d = np.asarray(distances, dtype=float)
    single = d.ndim == 1
    d = np.atleast_2d(d)
    v = np.broadcast_to(np.asarray(noise_var, dtype=float), d.shape[:1])
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ValueError("noise variance must be positive and finite")
    b, m = d.shape
    if m == 0:
        out = np.zeros((b, 0))
        return out[0] if single else out
    natural = _natural(m)
    labels = natural.copy()
    labels[:, 1:] ^= natural[:, :-1]
    points = d @ (2 * natural - 1).T                       # (B, M)
    half = points.shape[1] // 2
    rule = _rule(n_nodes)
    # the constellation and every bit partition are mirror symmetric, so
    # averaging over the upper half of the transmitted points is enough
    scaled = ((points[:, half:, None] - points[:, None, :])
              / np.sqrt(2 * v)[:, None, None])             # (B, M/2, M)
    # e[b, s, n, s'] = log Gaussian kernel of point s' at y = s + sqrt(2v) x_n
    e = -(scaled[:, :, None, :] + rule.nodes[None, None, :, None]) ** 2
    out = np.empty((b, m))
    for j in range(m):
        ones = labels[:, j] == 1
        diff = _lse(e[..., ones]) - _lse(e[..., ~ones])    # (B, M/2, N)
        sent_one = ones[half:][None, :, None]
        penalty = np.logaddexp(0.0, np.where(sent_one, -diff, diff)) / LOG2
        out[:, j] = 1.0 - np.mean(penalty @ rule.weights, axis=-1)
    np.clip(out, 0.0, 1.0, out=out)
    return out[0] if single else out


def bit_mi_quadrature(pam: HierPam, k: int, noise_var: float,
                      n_nodes: int = N_NODES) -> float:
    """Mutual information of bit ``k`` (1-based) of ``pam``."""
    if not 1 <= k <= pam.bits_per_symbol:
        raise ValueError(f"bit index {k} out of range")
    return float(branch_mi(pam.distances, noise_var, n_nodes)[k - 1])


def llr_mi_estimate(llr, bits) -> tuple[float, float]:
    """Sample estimate of I(b; LLR) from exact LLRs and the sent bits.

    Returns the estimate and its standard error. Valid when the LLRs are
    the true a-posteriori log ratios (uniform priors).
    """
    llr = np.asarray(llr, dtype=float)
    sign = 2.0 * np.asarray(bits) - 1.0
    loss = np.logaddexp(0.0, -sign * llr) / LOG2
    n = loss.size
    return 1.0 - float(loss.mean()), float(loss.std(ddof=1) / math.sqrt(n))


def bit_mi_montecarlo(pam: HierPam, k: int, noise_var: float,
                      n_samples: int = 100_000, seed=0,
                      return_stderr: bool = False):
    """Monte Carlo estimate of the same quantity as :func:`bit_mi_quadrature`.

    Points are drawn uniformly, Gaussian noise is added and the exact LLR
    of bit ``k`` is averaged. ``seed`` may be an int or a sequence of ints
    (e.g. ``(seed, task_id)``) so independent tasks get independent,
    reproducible streams.
    """
    if n_samples < 10_000:
        raise ValueError("use at least 1e4 samples")
    if not 1 <= k <= pam.bits_per_symbol:
        raise ValueError(f"bit index {k} out of range")
    rng = np.random.default_rng(seed)
    idx = rng.integers(pam.size, size=n_samples)
    y = pam.points[idx] + math.sqrt(noise_var) * rng.standard_normal(n_samples)
    llr = exact_llr(y, pam, noise_var)[:, k - 1]
    est, se = llr_mi_estimate(llr, pam.labels[idx, k - 1])
    return (est, se) if return_stderr else est


@dataclass(frozen=True, eq=False)
class BitChannelRates:
    """Mutual information of every composite bit of both users.

    Arrays are indexed like the composite bit lists (shared layers first);
    layers the user cannot see have zero information.
    """

    mi_i: tuple[np.ndarray, np.ndarray]
    mi_q: tuple[np.ndarray, np.ndarray]

    def user(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        return self.mi_i[u - 1], self.mi_q[u - 1]


@dataclass(frozen=True, eq=False)
class RatePoint:
    """Achieved rate pair (bits per channel use) and the mode behind it."""

    r1: float
    r2: float
    mode: ModeConfig | None = None
    bit_rates: BitChannelRates | None = field(default=None, repr=False)

    @property
    def rates(self) -> tuple[float, float]:
        return self.r1, self.r2


def _user_bit_mi(mode: ModeConfig, eq, user: int,
                 n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    vis_i, vis_q = received_layers(mode, eq, user)
    comp = eq.composite
    if comp is None:
        raise ValueError("equivalent channel lacks composite distances; "
                         "build it with the mode")
    v = eq.branch_noise_var
    mi_i = np.zeros(vis_i.size)
    mi_q = np.zeros(vis_q.size)
    mi_i[vis_i] = branch_mi(np.asarray(comp.i_distances), v, n_nodes)
    mi_q[vis_q] = branch_mi(np.asarray(comp.q_distances), v, n_nodes)
    return mi_i, mi_q


def bit_channel_rates(mode: ModeConfig, eqs,
                      n_nodes: int = N_NODES) -> BitChannelRates:
    """Per-bit mutual information at both receivers."""
    u1 = _user_bit_mi(mode, eqs[0], 1, n_nodes)
    u2 = _user_bit_mi(mode, eqs[1], 2, n_nodes)
    return BitChannelRates((u1[0], u2[0]), (u1[1], u2[1]))


def _check_assignment(mode: ModeConfig, assign_i, assign_q):
    assign_i = tuple(mode.assign_i if assign_i is None else assign_i)
    assign_q = tuple(mode.assign_q if assign_q is None else assign_q)
    if len(assign_i) != mode.shared.m or len(assign_q) != mode.shared.n:
        raise ValueError("assignment must give one owner per shared bit")
    if not set(assign_i + assign_q) <= {1, 2}:
        raise ValueError("every shared bit must go to exactly one of users 1, 2")
    return assign_i, assign_q


def user_rates(mode: ModeConfig, eqs, assign_i=None, assign_q=None,
               n_nodes: int = N_NODES) -> RatePoint:
    """Rates of both users for a mode.

    A shared bit counts only for its owner and is evaluated on the owner's
    composite constellation. By default the mode's own assignment is used.
    """
    assign_i, assign_q = _check_assignment(mode, assign_i, assign_q)
    bits = bit_channel_rates(mode, eqs, n_nodes)
    rates = []
    for u in (1, 2):
        mi_i, mi_q = bits.user(u)
        prof = mode.private(u)
        own_i = np.array([a == u for a in assign_i] + [True] * prof.m, bool)
        own_q = np.array([a == u for a in assign_q] + [True] * prof.n, bool)
        rates.append(float(mi_i[own_i].sum() + mi_q[own_q].sum()))
    if (assign_i, assign_q) != (mode.assign_i, mode.assign_q):
        mode = replace(mode, assign_i=assign_i, assign_q=assign_q)
    return RatePoint(rates[0], rates[1], mode, bits)


def composite_pams(eq) -> tuple[HierPam, HierPam]:
    """Composite I and Q constellations stored on an equivalent channel."""
    comp = eq.composite
    return (build_hier_pam(comp.m, comp.i_distances),
            build_hier_pam(comp.n, comp.q_distances))

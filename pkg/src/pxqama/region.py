"""Transmission-mode sweeps, rate regions and mode reduction.

A transmission mode fixes the constellation sizes, the layer-distance
ratios, the owner of every shared bit, the shared-beam angle and the
power split. The sweep evaluates every valid mode of a grid, the region
is the convex hull of the resulting rate pairs (time sharing), and a
greedy pass picks a handful of modes whose polygon keeps most of the
region area.

Two evaluation paths exist. :func:`evaluate_mode` runs the full chain
for one :class:`ModeConfig` through the geometry, composite constellation
and mutual information code. :func:`sweep` produces the same numbers for
a whole grid in batches, because the bit-channel information does not
depend on the bit assignment and can be shared across the power grid.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence

import numpy as np

from .geometry import (ChannelPair, DegenerateModeError, equivalent_channels,
                       make_precoders)
from .hqam import DistanceProfile, ModeConfig, OrderingError
from .inforate import N_NODES, RatePoint, branch_mi, user_rates

__all__ = [
    "SweepGrid",
    "SweepResult",
    "RateRegion",
    "ModeSelection",
    "FAMILIES",
    "size_combos",
    "power_grid",
    "theta_grid",
    "enumerate_modes",
    "evaluate_mode",
    "sweep",
    "upper_hull",
    "build_region",
    "select_modes",
    "write_region_csv",
    "read_region_csv",
    "region_summary",
    "ModeSelectionError",
]

FAMILIES = ("pxqama", "sdma", "qama_bf")
SEAM_TOL = 1e-12

CSV_COLUMNS = ["mode_id", "m0", "n0", "m1", "n1", "theta0", "a0", "a1", "a2",
               "assignment_mask_i", "assignment_mask_q", "R1", "R2", "on_hull"]
RATIO_COLUMNS = ["ratio0", "ratio1", "ratio2"]


class ModeSelectionError(ValueError):
    """The requested number of modes cannot be selected."""


@dataclass(frozen=True)
class SweepGrid:
    """Search grid of a rate-region sweep.

    ``power_step`` is the step of the squared amplitudes on the power
    simplex; ``ratios`` lists the layer-distance ratios tried for each
    symbol (2.0 alone keeps every branch a uniform PAM).
    """

    theta_points: int = 17
    power_step: float = 0.05
    max_branch_bits: int = 3
    family: str = "pxqama"
    sizes: tuple[tuple[int, int, int, int], ...] | None = None
    ratios: tuple[float, ...] = (2.0,)
    iq_dedup: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.theta_points < 1:
            raise ValueError("theta grid is empty")
        steps = 1.0 / self.power_step if self.power_step > 0 else 0.0
        if not (self.power_step > 0 and abs(steps - round(steps)) < 1e-9):
            raise ValueError("power_step must divide 1")
        if not self.ratios or min(self.ratios) < 2.0:
            raise ValueError("distance ratios must be given and >= 2")
        if self.sizes is not None:
            sizes = tuple(tuple(int(x) for x in s) for s in self.sizes)
            if not sizes:
                raise ValueError("size grid is empty")
            object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))


def size_combos(grid: SweepGrid) -> list[tuple[int, int, int, int]]:
    """(m0, n0, m1, n1) combinations of a grid (private sizes shared by both users)."""
    cap = grid.max_branch_bits
    if grid.sizes is not None:
        combos = list(grid.sizes)
    else:
        combos = [c for c in itertools.product(range(cap + 1), repeat=4)
                  if c[0] + c[2] <= cap and c[1] + c[3] <= cap and any(c)]
    for c in combos:
        if len(c) != 4 or min(c) < 0 or not any(c):
            raise ValueError(f"invalid size combination {c}")
        if c[0] + c[2] > cap or c[1] + c[3] > cap:
            raise ValueError(f"size combination {c} exceeds {cap} bits per branch")
    if grid.family == "sdma":
        combos = [c for c in combos if c[0] == c[1] == 0]
    elif grid.family == "qama_bf":
        combos = [c for c in combos if c[2] == c[3] == 0]
    if grid.iq_dedup:
        keep = []
        seen = set(combos)
        for c in combos:
            mirror = (c[1], c[0], c[3], c[2])
            if mirror in seen and mirror < c:
                continue
            keep.append(c)
        combos = keep
    if not combos:
        raise ValueError("grid contains no size combination")
    return sorted(combos)


def power_grid(step: float) -> np.ndarray:
    """All squared-amplitude triples on the simplex with spacing ``step``."""
    k = int(round(1.0 / step))
    pts = [(i, j, k - i - j) for i in range(k + 1) for j in range(k + 1 - i)]
    return np.array(pts, dtype=float) / k


def theta_grid(ch: ChannelPair, n: int) -> np.ndarray:
    return np.linspace(0.0, ch.theta, n)


def _profiles(combo, ratio_triple):
    m0, n0, m1, n1 = combo
    r0, r1, r2 = ratio_triple
    return (DistanceProfile.uniform(m0, n0, r0),
            DistanceProfile.uniform(m1, n1, r1),
            DistanceProfile.uniform(m1, n1, r2))


def _ratio_triples(grid: SweepGrid) -> list[tuple[float, float, float]]:
    return list(itertools.product(grid.ratios, repeat=3))


def _power_ok(combo, p) -> str | None:
    """Reason code when a power split does not fit the sizes, else None."""
    m0, n0, m1, n1 = combo
    has_shared, has_private = m0 + n0 > 0, m1 + n1 > 0
    if has_shared and p[0] == 0:
        return "unpowered_shared"
    if not has_shared and p[0] > 0:
        return "wasted_power"
    if has_private and p[1] == 0 and p[2] == 0:
        return "unpowered_private"
    if not has_private and (p[1] > 0 or p[2] > 0):
        return "wasted_power"
    return None


def _assignments(m0: int, n0: int, symmetric: bool):
    """Owner masks over the shared bits; bit k-1 set means user 1 owns bit k."""
    out = []
    for mi in range(2**m0):
        for mq in range(2**n0):
            if symmetric and (mq, mi) < (mi, mq):
                continue
            out.append((mi, mq))
    return out


def _owners(mask: int, nbits: int) -> tuple[int, ...]:
    return tuple(1 if (mask >> k) & 1 else 2 for k in range(nbits))


def _mask(owners: Sequence[int]) -> int:
    return sum(1 << k for k, u in enumerate(owners) if u == 1)


def enumerate_modes(ch: ChannelPair, grid: SweepGrid,
                    rejected: Counter | None = None) -> Iterator[ModeConfig]:
    """Every valid mode of ``grid`` for the scenario ``ch``.

    Invalid modes are skipped; when ``rejected`` is given it counts them by
    reason code (``unpowered_shared``, ``unpowered_private``,
    ``wasted_power``, ``seam_order``, ``degenerate``).
    """
    rejected = Counter() if rejected is None else rejected
    thetas = theta_grid(ch, grid.theta_points)
    powers = power_grid(grid.power_step)
    for combo in size_combos(grid):
        m0, n0, m1, n1 = combo
        symmetric = grid.iq_dedup and m0 == n0 and m1 == n1
        for triple in _ratio_triples(grid):
            d0, d1, d2 = _profiles(combo, triple)
            for p in powers:
                reason = _power_ok(combo, p)
                if reason:
                    rejected[reason] += 1
                    continue
                alphas = tuple(float(x) for x in np.sqrt(p))
                for theta0 in (thetas if p[0] > 0 else thetas[:1]):
                    base = ModeConfig(d0, d1, d2, float(theta0), alphas,
                                      (2,) * m0, (2,) * n0)
                    try:
                        pre = make_precoders(ch, base.theta0, alphas)
                        equivalent_channels(ch, pre, base)
                    except OrderingError:
                        rejected["seam_order"] += 1
                        continue
                    except DegenerateModeError:
                        rejected["degenerate"] += 1
                        continue
                    for mi, mq in _assignments(m0, n0, symmetric):
                        yield replace(base, assign_i=_owners(mi, m0),
                                      assign_q=_owners(mq, n0))


def evaluate_mode(mode: ModeConfig, ch: ChannelPair,
                  n_nodes: int = N_NODES) -> RatePoint:
    """Rate pair of one mode through the full transmit/receive chain."""
    pre = make_precoders(ch, mode.theta0, mode.alphas)
    eqs = equivalent_channels(ch, pre, mode)
    return user_rates(mode, eqs, n_nodes=n_nodes)


# -- batched sweep ---------------------------------------------------------

_DTYPE = [("mode_id", np.int64), ("m0", np.int8), ("n0", np.int8),
          ("m1", np.int8), ("n1", np.int8), ("theta0", float),
          ("a0", float), ("a1", float), ("a2", float),
          ("assignment_mask_i", np.int16), ("assignment_mask_q", np.int16),
          ("R1", float), ("R2", float),
          ("ratio0", float), ("ratio1", float), ("ratio2", float)]


@dataclass(eq=False)
class SweepResult:
    """All evaluated rate points of a sweep plus rejection statistics."""

    table: np.ndarray
    rejected: Counter = field(default_factory=Counter)
    grid: SweepGrid | None = None

    def __len__(self):
        return self.table.size

    @property
    def rates(self) -> np.ndarray:
        return np.column_stack([self.table["R1"], self.table["R2"]])

    def mode(self, i: int) -> ModeConfig:
        return row_mode(self.table[i])


def row_mode(row) -> ModeConfig:
    """Rebuild the :class:`ModeConfig` of a sweep table row."""
    combo = tuple(int(row[c]) for c in ("m0", "n0", "m1", "n1"))
    triple = (float(row["ratio0"]), float(row["ratio1"]), float(row["ratio2"]))
    d0, d1, d2 = _profiles(combo, triple)
    alphas = (float(row["a0"]), float(row["a1"]), float(row["a2"]))
    # amplitudes came from sqrt of grid powers; renormalize against round-off
    norm = math.sqrt(sum(a * a for a in alphas))
    alphas = tuple(a / norm for a in alphas)
    return ModeConfig(d0, d1, d2, float(row["theta0"]), alphas,
                      _owners(int(row["assignment_mask_i"]), combo[0]),
                      _owners(int(row["assignment_mask_q"]), combo[1]))


def _batch_gains(ch: ChannelPair, theta0: float, p: np.ndarray):
    """Gains and mixing weights of both users over a batch of power splits."""
    lam1, lam2 = ch.lams
    big = ch.theta
    s = math.sin(big)
    a = np.sqrt(p)
    c1 = math.cos(theta0)
    c2 = math.cos(big - theta0)
    sh = np.stack([lam1 * a[:, 0] * c1, lam2 * a[:, 0] * c2])      # (2, P)
    pr = np.stack([lam1 * a[:, 1] * s, lam2 * a[:, 2] * s])
    g = np.hypot(sh, pr)
    with np.errstate(invalid="ignore", divide="ignore"):
        b0 = np.where(g > 0, sh / g, 0.0)
        bu = np.where(g > 0, pr / g, 0.0)
    # same snapping rule as the single-mode path
    off0 = (a[:, 0] == 0)[None, :] | (b0 < 1e-12)
    offu = np.stack([a[:, 1] == 0, a[:, 2] == 0]) | (bu < 1e-12)
    b0 = np.where(off0, 0.0, np.where(offu, 1.0, b0))
    bu = np.where(off0, 1.0, np.where(offu, 0.0, bu))
    return g, b0, bu


def _branch_batch(d_shared, d_private, b0, bu, v, n_nodes):
    """MI of composite branch layers for a batch; zero for unseen layers."""
    ms, mp = len(d_shared), len(d_private)
    out = np.zeros((b0.size, ms + mp))
    if ms + mp == 0:
        return out
    vis0, visu = b0 > 0, bu > 0
    for v0 in (False, True):
        for vu in (False, True):
            sel = (vis0 == v0) & (visu == vu)
            if not sel.any():
                continue
            cols, parts = [], []
            if v0 and ms:
                cols += list(range(ms))
                parts.append(b0[sel, None] * np.asarray(d_shared)[None, :])
            if vu and mp:
                cols += list(range(ms, ms + mp))
                parts.append(bu[sel, None] * np.asarray(d_private)[None, :])
            if not cols:
                continue
            d = np.concatenate(parts, axis=1)
            idx = np.flatnonzero(sel)
            out[np.ix_(idx, cols)] = branch_mi(d, v[sel], n_nodes)
    return out


def _seam_ok(d_shared, d_private, b0, bu) -> np.ndarray:
    if not len(d_shared) or not len(d_private):
        return np.ones(b0.size, dtype=bool)
    both = (b0 > 0) & (bu > 0)
    ok = b0 * d_shared[-1] >= 2.0 * bu * d_private[0] * (1 - SEAM_TOL)
    return ~both | ok


def _sweep_combo(args):
    ch, grid, combo, n_nodes = args
    m0, n0, m1, n1 = combo
    symmetric = grid.iq_dedup and m0 == n0 and m1 == n1
    thetas = theta_grid(ch, grid.theta_points)
    powers = power_grid(grid.power_step)
    rejected = Counter()
    reasons = [_power_ok(combo, p) for p in powers]
    for r in reasons:
        if r:
            rejected[r] += len(_ratio_triples(grid))
    ok = np.array([r is None for r in reasons])
    powers = powers[ok]
    assigns = _assignments(m0, n0, symmetric)
    own1_i = np.array([[(mi >> k) & 1 for k in range(m0)] for mi, _ in assigns],
                      dtype=float).reshape(len(assigns), m0)
    own1_q = np.array([[(mq >> k) & 1 for k in range(n0)] for _, mq in assigns],
                      dtype=float).reshape(len(assigns), n0)
    rows = []
    for triple in _ratio_triples(grid):
        d0, d1, d2 = _profiles(combo, triple)
        dp = (d1, d2)
        for t_idx, theta0 in enumerate(thetas):
            if t_idx == 0:
                p = powers
            else:
                p = powers[powers[:, 0] > 0]
            if not p.size:
                continue
            g, b0, bu = _batch_gains(ch, float(theta0), p)
            valid = np.ones(len(p), dtype=bool)
            for u in range(2):
                valid &= _seam_ok(d0.i_distances, dp[u].i_distances, b0[u], bu[u])
                valid &= _seam_ok(d0.q_distances, dp[u].q_distances, b0[u], bu[u])
            rejected["seam_order"] += int((~valid).sum())
            # a user with zero gain is a degenerate mode, as in the single path
            live = valid & (g > 0).all(axis=0)
            rejected["degenerate"] += int((valid & ~live).sum())
            valid = live
            if not valid.any():
                continue
            p, g, b0, bu = p[valid], g[:, valid], b0[:, valid], bu[:, valid]
            v = ch.sigma2 / (2.0 * g**2)
            shared_sum, private_sum = [], []
            for u in range(2):
                mi_i = _branch_batch(d0.i_distances, dp[u].i_distances,
                                     b0[u], bu[u], v[u], n_nodes)
                mi_q = _branch_batch(d0.q_distances, dp[u].q_distances,
                                     b0[u], bu[u], v[u], n_nodes)
                private_sum.append(mi_i[:, m0:].sum(1) + mi_q[:, n0:].sum(1))
                shared_sum.append((mi_i[:, :m0], mi_q[:, :n0]))
            # rates for every assignment: (P, A)
            s1i, s1q = shared_sum[0]
            s2i, s2q = shared_sum[1]
            r1 = s1i @ own1_i.T + s1q @ own1_q.T + private_sum[0][:, None]
            r2 = (s2i @ (1 - own1_i).T + s2q @ (1 - own1_q).T
                  + private_sum[1][:, None])
            a = np.sqrt(p)
            n_a = len(assigns)
            block = np.zeros(len(p) * n_a, dtype=_DTYPE)
            block["m0"], block["n0"], block["m1"], block["n1"] = combo
            block["theta0"] = theta0
            block["a0"] = np.repeat(a[:, 0], n_a)
            block["a1"] = np.repeat(a[:, 1], n_a)
            block["a2"] = np.repeat(a[:, 2], n_a)
            block["assignment_mask_i"] = np.tile([x[0] for x in assigns], len(p))
            block["assignment_mask_q"] = np.tile([x[1] for x in assigns], len(p))
            block["R1"] = r1.reshape(-1)
            block["R2"] = r2.reshape(-1)
            block["ratio0"], block["ratio1"], block["ratio2"] = triple
            rows.append(block)
    table = np.concatenate(rows) if rows else np.zeros(0, dtype=_DTYPE)
    return combo, table, rejected


def sweep(ch: ChannelPair, grid: SweepGrid = SweepGrid(),
          n_nodes: int = N_NODES, workers: int = 1) -> SweepResult:
    """Evaluate every valid mode of ``grid``.

    Size combinations are farmed out to ``workers`` processes; results are
    gathered in a fixed order so the table does not depend on scheduling.
    """
    combos = size_combos(grid)
    jobs = [(ch, grid, c, n_nodes) for c in combos]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_combo, jobs))
    else:
        results = [_sweep_combo(j) for j in jobs]
    results.sort(key=lambda r: r[0])
    rejected = Counter()
    for _, _, rej in results:
        rejected.update(rej)
    tables = [t for _, t, _ in results if t.size]
    table = np.concatenate(tables) if tables else np.zeros(0, dtype=_DTYPE)
    table["mode_id"] = np.arange(table.size)
    return SweepResult(table, rejected, grid)


# -- hull and region -------------------------------------------------------

def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def upper_hull(points) -> np.ndarray:
    """Indices of the upper-right convex frontier of nonnegative rate pairs.

    The frontier runs from the point with the largest R2 to the point with
    the largest R1 and is the boundary of the time-sharing region once the
    origin and the two axis projections are added. Collinear points are
    not reported as vertices.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        return np.zeros(0, dtype=int)
    order = np.lexsort((-pts[:, 1], -pts[:, 0]))      # R1 desc, R2 desc
    # Pareto filter: sweep by decreasing R1, keep strictly increasing R2
    pareto = []
    best = -np.inf
    for i in order:
        if pts[i, 1] > best:
            pareto.append(i)
            best = pts[i, 1]
    pareto = pareto[::-1]                              # R1 ascending, R2 descending
    hull: list[int] = []
    for i in pareto:
        while len(hull) >= 2 and _cross(pts[hull[-2]], pts[hull[-1]], pts[i]) >= 0:
            hull.pop()
        hull.append(i)
    return np.array(hull, dtype=int)


def pareto_indices(points) -> np.ndarray:
    """Indices of Pareto-efficient points (no other point is at least as good in both rates and better in one)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    order = np.lexsort((-pts[:, 1], -pts[:, 0]))       # R1 desc, then R2 desc
    keep, best = [], -np.inf
    for i in order:
        if pts[i, 1] > best:
            keep.append(i)
            best = pts[i, 1]
    return np.sort(np.array(keep, dtype=int))


def _polygon(pts: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Closed region polygon: origin, (0, R2max), frontier, (R1max, 0)."""
    front = pts[idx]
    poly = [(0.0, 0.0), (0.0, float(front[0, 1]))]
    poly += [tuple(map(float, p)) for p in front]
    poly.append((float(front[-1, 0]), 0.0))
    return np.array(poly)


def polygon_area(poly) -> float:
    p = np.asarray(poly, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


@dataclass(eq=False)
class RateRegion:
    """Convex hull of a set of rate points.

    ``frontier`` holds indices of the points on the upper-right hull,
    ordered from the largest R2 to the largest R1; ``polygon`` is the
    closed region including the origin and the axis anchors
    ``(0, R2max)`` and ``(R1max, 0)``.
    """

    points: np.ndarray
    frontier: np.ndarray
    polygon: np.ndarray
    area: float
    sweep: SweepResult | None = None

    @property
    def n_frontier(self) -> int:
        return int(self.frontier.size)

    @property
    def n_pareto(self) -> int:
        return int(pareto_indices(self.points).size) if len(self.points) else 0

    def on_hull(self) -> np.ndarray:
        mask = np.zeros(len(self.points), dtype=bool)
        mask[self.frontier] = True
        return mask

    def mode(self, i: int) -> ModeConfig:
        if self.sweep is None:
            raise ValueError("region was built without sweep metadata")
        return self.sweep.mode(i)

    def contains(self, r1: float, r2: float, tol: float = 1e-9) -> bool:
        """True if the rate pair is achievable by time sharing."""
        if r1 < -tol or r2 < -tol:
            return False
        poly = self.polygon
        for a, b in zip(poly, np.roll(poly, -1, axis=0)):
            # polygon is clockwise: origin, up the R2 axis, along the frontier
            if _cross(a, b, (r1, r2)) > tol * (1 + np.hypot(*(b - a))):
                return False
        return True


def build_region(points: Iterable | SweepResult) -> RateRegion:
    """Region spanned by rate points, their axis projections and the origin."""
    sw = None
    if isinstance(points, SweepResult):
        sw = points
        pts = points.rates
    else:
        items = list(points)
        if items and isinstance(items[0], RatePoint):
            pts = np.array([p.rates for p in items], dtype=float)
        else:
            pts = np.asarray(items, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise ValueError("a region needs at least one rate point")
    if np.any(pts < 0):
        raise ValueError("rates must be nonnegative")
    idx = upper_hull(pts)
    poly = _polygon(pts, idx)
    return RateRegion(pts, idx, poly, polygon_area(poly), sw)


@dataclass(eq=False)
class ModeSelection:
    """A reduced set of modes and the time-sharing polygon they span."""

    indices: np.ndarray
    polygon: np.ndarray
    area: float
    ratio: float


def select_modes(region: RateRegion, n_modes: int) -> ModeSelection:
    """Greedy reduction of the frontier to ``n_modes`` transmission modes.

    The two single-user corner modes (largest R1, largest R2) are always
    kept; each further step adds the frontier vertex that enlarges the
    polygon the most. The ratio compares the polygon area with the full
    region area.
    """
    cand = list(region.frontier)
    if n_modes < 2:
        raise ModeSelectionError("at least two modes are needed to anchor both axes")
    if n_modes > len(cand):
        raise ModeSelectionError(
            f"{n_modes} modes requested but the frontier has {len(cand)} vertices")
    pts = region.points
    chosen = {cand[0], cand[-1]}

    def area_of(sel) -> float:
        sel = np.array(sorted(sel))
        sub = pts[sel]
        return polygon_area(_polygon(sub, upper_hull(sub)))

    while len(chosen) < n_modes:
        best, best_area = None, -1.0
        for c in cand:
            if c in chosen:
                continue
            a = area_of(chosen | {c})
            if a > best_area + 1e-15:
                best, best_area = c, a
        chosen.add(best)
    # order along the frontier
    order = [c for c in cand if c in chosen]
    sub = pts[np.array(order)]
    poly = _polygon(sub, upper_hull(sub))
    area = polygon_area(poly)
    ratio = area / region.area if region.area > 0 else 1.0
    return ModeSelection(np.array(order, dtype=int), poly, area, ratio)


# -- I/O -------------------------------------------------------------------

def _fmt(x) -> str:
    return format(float(x), ".12g")


def write_region_csv(path, region: RateRegion) -> None:
    """Write every evaluated mode with its rates and a hull flag."""
    if region.sweep is None:
        raise ValueError("region has no sweep table to write")
    table = region.sweep.table
    grid = region.sweep.grid
    free = grid is not None and grid.ratios != (2.0,)
    cols = CSV_COLUMNS + (RATIO_COLUMNS if free else [])
    hull = region.on_hull()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for i, row in enumerate(table):
            rec = [int(row["mode_id"]), int(row["m0"]), int(row["n0"]),
                   int(row["m1"]), int(row["n1"]), _fmt(row["theta0"]),
                   _fmt(row["a0"]), _fmt(row["a1"]), _fmt(row["a2"]),
                   int(row["assignment_mask_i"]), int(row["assignment_mask_q"]),
                   _fmt(row["R1"]), _fmt(row["R2"]), int(hull[i])]
            if free:
                rec += [_fmt(row[c]) for c in RATIO_COLUMNS]
            w.writerow(rec)


def read_region_csv(path) -> SweepResult:
    """Load a table written by :func:`write_region_csv`."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        recs = list(reader)
    table = np.zeros(len(recs), dtype=_DTYPE)
    for i, r in enumerate(recs):
        for name, _ in _DTYPE:
            if name in r:
                table[i][name] = float(r[name])
            elif name.startswith("ratio"):
                table[i][name] = 2.0
    return SweepResult(table)


def region_summary(region: RateRegion, selection: ModeSelection | None = None,
                   extra: dict | None = None) -> dict:
    """JSON-ready summary: hull vertices, area and selected modes."""
    pts = region.points
    out = {
        "area": region.area,
        "n_points": int(len(pts)),
        "n_pareto": region.n_pareto,
        "n_frontier": region.n_frontier,
        "hull_vertices": [
            {"mode_id": int(i), "R1": float(pts[i, 0]), "R2": float(pts[i, 1])}
            for i in region.frontier],
        "polygon": region.polygon.tolist(),
    }
    if region.sweep is not None:
        out["rejected"] = dict(sorted(region.sweep.rejected.items()))
    if selection is not None:
        out["selected_modes"] = _selection_json(region, selection)
    if extra:
        out.update(extra)
    return out


def _selection_json(region: RateRegion, sel: ModeSelection) -> dict:
    modes = []
    for i in sel.indices:
        entry = {"mode_id": int(i), "R1": float(region.points[i, 0]),
                 "R2": float(region.points[i, 1])}
        if region.sweep is not None:
            row = region.sweep.table[i]
            entry.update({
                "m0": int(row["m0"]), "n0": int(row["n0"]),
                "m1": int(row["m1"]), "n1": int(row["n1"]),
                "theta0": float(row["theta0"]),
                "alphas": [float(row["a0"]), float(row["a1"]), float(row["a2"])],
                "assignment_mask_i": int(row["assignment_mask_i"]),
                "assignment_mask_q": int(row["assignment_mask_q"]),
            })
        modes.append(entry)
    return {"n_modes": int(sel.indices.size), "area": sel.area,
            "area_ratio": sel.ratio, "modes": modes,
            "polygon": sel.polygon.tolist()}


def dumps_summary(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=False)

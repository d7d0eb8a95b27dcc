"""Hierarchical PAM/QAM constellations with Gray labels.

Bit index 1 is always the highest layer (largest distance) of a branch.
Bits are handled as integer arrays whose last axis runs over the layers,
so every mapping function broadcasts over leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "OrderingError",
    "DistanceProfile",
    "HierPam",
    "BitWord",
    "ModeConfig",
    "natural_to_gray",
    "gray_to_natural",
    "build_hier_pam",
    "pam_symbol",
    "map_shared",
    "map_private",
    "composite_distances",
    "compose_received_constellation",
    "received_layers",
]

ENERGY_TOL = 1e-12


class OrderingError(ValueError):
    """A layer distance is smaller than twice the next one."""


def _check_branch(distances: np.ndarray, what: str = "distances") -> None:
    if np.any(distances <= 0):
        raise ValueError(f"{what} must be strictly positive, got {distances}")
    if distances.size > 1:
        ratio_ok = distances[:-1] >= 2.0 * distances[1:] * (1 - 1e-12)
        if not np.all(ratio_ok):
            k = int(np.argmin(ratio_ok)) + 1
            raise OrderingError(
                f"{what}: layer {k} distance {distances[k - 1]:.6g} is below "
                f"twice layer {k + 1} distance {distances[k]:.6g}")


@dataclass(frozen=True)
class DistanceProfile:
    """Layer distances of one H-QAM symbol, I branch and Q branch.

    The profile is stored normalized: the squared distances of both
    branches sum to one, which is the unit-energy condition of the
    constellation. Use :meth:`from_ratios` or :meth:`uniform` to build
    one from unnormalized values.
    """

    i_distances: tuple[float, ...] = ()
    q_distances: tuple[float, ...] = ()

    def __post_init__(self):
        di = np.asarray(self.i_distances, dtype=float)
        dq = np.asarray(self.q_distances, dtype=float)
        object.__setattr__(self, "i_distances", tuple(float(x) for x in di))
        object.__setattr__(self, "q_distances", tuple(float(x) for x in dq))
        _check_branch(di, "I distances")
        _check_branch(dq, "Q distances")
        if di.size + dq.size:
            energy = float(np.sum(di**2) + np.sum(dq**2))
            if abs(energy - 1.0) > ENERGY_TOL:
                raise ValueError(f"profile energy {energy!r} is not 1")

    @classmethod
    def from_ratios(cls, i_values: Sequence[float] = (),
                    q_values: Sequence[float] = ()) -> "DistanceProfile":
        """Normalize arbitrary positive layer distances to unit energy."""
        di = np.asarray(i_values, dtype=float)
        dq = np.asarray(q_values, dtype=float)
        energy = np.sum(di**2) + np.sum(dq**2)
        if di.size + dq.size == 0:
            return cls()
        if not energy > 0:
            raise ValueError("distances must be positive")
        scale = 1.0 / math.sqrt(energy)
        return cls(tuple(di * scale), tuple(dq * scale))

    @classmethod
    def uniform(cls, m: int, n: int, ratio: float = 2.0,
                q_ratio: float | None = None) -> "DistanceProfile":
        """Rectangular profile with ``m`` I bits and ``n`` Q bits.

        Consecutive layers on a branch differ by ``ratio`` (2 gives uniform
        PAM). Both branches share the same innermost distance, so the
        ratio-2 case is the ordinary rectangular QAM grid.
        """
        if m < 0 or n < 0:
            raise ValueError("bit counts must be nonnegative")
        q_ratio = ratio if q_ratio is None else q_ratio
        di = ratio ** np.arange(m - 1, -1, -1, dtype=float)
        dq = q_ratio ** np.arange(n - 1, -1, -1, dtype=float)
        return cls.from_ratios(di, dq)

    @property
    def m(self) -> int:
        return len(self.i_distances)

    @property
    def n(self) -> int:
        return len(self.q_distances)

    @property
    def bits(self) -> int:
        return self.m + self.n

    def __len__(self):
        return self.bits


def natural_to_gray(bits):
    """Binary-reflected Gray code of natural bits, MSB first."""
    a = np.asarray(bits, dtype=np.int64)
    if a.shape[-1:] == (0,):
        return a.copy()
    b = a.copy()
    b[..., 1:] = a[..., 1:] ^ a[..., :-1]
    return b


def gray_to_natural(bits):
    """Undo Gray coding: each natural bit is the running XOR of Gray bits."""
    b = np.asarray(bits, dtype=np.int64)
    return np.bitwise_xor.accumulate(b, axis=-1) if b.shape[-1] else b.copy()


@dataclass(frozen=True, eq=False)
class HierPam:
    """A real hierarchical 2**m-PAM with Gray labels.

    ``points`` are sorted ascending; ``labels[j]`` is the Gray label of
    ``points[j]`` with column 0 holding bit 1 (highest layer).
    """

    distances: np.ndarray
    points: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)

    @property
    def bits_per_symbol(self) -> int:
        return int(self.distances.size)

    @property
    def size(self) -> int:
        return int(self.points.size)

    def energy(self) -> float:
        return float(np.mean(self.points**2))

    def modulate(self, bits) -> np.ndarray:
        """Map Gray words (last axis = layers) to points."""
        return pam_symbol(bits, self.distances)

    def hard_decision(self, y) -> np.ndarray:
        """Gray labels of the nearest points to ``y``."""
        y = np.asarray(y, dtype=float)
        idx = np.argmin(np.abs(y[..., None] - self.points), axis=-1)
        return self.labels[idx]


def _index_bits(m: int) -> np.ndarray:
    idx = np.arange(2**m)
    return (idx[:, None] >> np.arange(m - 1, -1, -1)) & 1


def build_hier_pam(m: int, distances: Sequence[float] = ()) -> HierPam:
    """Build the hierarchical PAM with layer distances ``distances``.

    Points are indexed 0..2**m-1 from left to right; the natural bits of a
    point are the binary digits of its index and the Gray label follows by
    the usual reflection. ``m = 0`` gives the single point 0.
    """
    d = np.asarray(distances, dtype=float).reshape(-1)
    if d.size != m:
        raise ValueError(f"expected {m} distances, got {d.size}")
    _check_branch(d)
    natural = _index_bits(m)
    points = (2 * natural - 1) @ d if m else np.zeros(1)
    labels = natural_to_gray(natural)
    return HierPam(distances=d, points=np.asarray(points, dtype=float),
                   labels=labels)


def _layer_signs(bits) -> np.ndarray:
    # (-1)**(1 + running sum) over the layer axis
    b = np.asarray(bits, dtype=np.int64)
    return 1.0 - 2.0 * ((1 + np.cumsum(b, axis=-1)) & 1)


def pam_symbol(bits, distances) -> np.ndarray:
    """Gray-mapped hierarchical PAM value of ``bits`` (last axis = layers)."""
    d = np.asarray(distances, dtype=float)
    b = np.asarray(bits, dtype=np.int64)
    if b.shape[-1:] != d.shape:
        raise ValueError(f"bit words of length {b.shape[-1:]} do not match "
                         f"{d.size} distances")
    if d.size == 0:
        return np.zeros(b.shape[:-1])
    return np.sum(_layer_signs(b) * d, axis=-1)


def map_shared(bits_i, bits_q, profile: DistanceProfile) -> np.ndarray:
    """Conventional Gray mapping of the shared symbol, per branch."""
    re = pam_symbol(bits_i, profile.i_distances)
    im = pam_symbol(bits_q, profile.q_distances)
    return re + 1j * im


def _private_branch(bits, shared_bits, distances) -> np.ndarray:
    d = np.asarray(distances, dtype=float)
    b = np.asarray(bits, dtype=np.int64)
    s = np.asarray(shared_bits, dtype=np.int64)
    if b.shape[-1:] != d.shape:
        raise ValueError(f"bit words of length {b.shape[-1:]} do not match "
                         f"{d.size} distances")
    outer = 1.0 - 2.0 * ((1 + np.sum(s, axis=-1)) & 1)
    if d.size == 0:
        return np.zeros(np.broadcast_shapes(b.shape[:-1], s.shape[:-1]))
    inner = 1.0 - 2.0 * (np.cumsum(b, axis=-1) & 1)
    return outer * np.sum(inner * d, axis=-1)


def map_private(bits_i, bits_q, shared_i, shared_q,
                profile: DistanceProfile) -> np.ndarray:
    """Joint mapping of a private symbol.

    The Gray mapping of each branch is mirrored according to the parity of
    the shared symbol's bits on the same branch, so that adding the private
    symbol (with a suitable positive weight) on top of the shared symbol
    yields a Gray-coded composite.
    """
    re = _private_branch(bits_i, shared_i, profile.i_distances)
    im = _private_branch(bits_q, shared_q, profile.q_distances)
    return re + 1j * im


@dataclass(frozen=True, eq=False)
class BitWord:
    """Bits of one user's composite symbol, split by origin and branch."""

    shared_i: np.ndarray
    shared_q: np.ndarray
    private_i: np.ndarray
    private_q: np.ndarray

    @property
    def composite_i(self) -> np.ndarray:
        return np.concatenate([self.shared_i, self.private_i], axis=-1)

    @property
    def composite_q(self) -> np.ndarray:
        return np.concatenate([self.shared_q, self.private_q], axis=-1)

    def check(self, mode: "ModeConfig", user: int) -> None:
        prof = mode.private(user)
        want = (mode.shared.m, mode.shared.n, prof.m, prof.n)
        got = tuple(np.shape(x)[-1] for x in
                    (self.shared_i, self.shared_q, self.private_i,
                     self.private_q))
        if got != want:
            raise ValueError(f"bit word lengths {got} != mode sizes {want}")


@dataclass(frozen=True)
class ModeConfig:
    """One transmission mode.

    ``assign_i[k]`` / ``assign_q[k]`` give the user (1 or 2) that owns
    shared I/Q bit ``k + 1``. ``theta0`` is the shared-beam angle in
    radians and ``alphas`` the amplitudes of the three beams.
    """

    shared: DistanceProfile = DistanceProfile()
    private1: DistanceProfile = DistanceProfile()
    private2: DistanceProfile = DistanceProfile()
    theta0: float = 0.0
    alphas: tuple[float, float, float] = (1.0, 0.0, 0.0)
    assign_i: tuple[int, ...] = ()
    assign_q: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "alphas",
                           tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "assign_i", tuple(int(u) for u in self.assign_i))
        object.__setattr__(self, "assign_q", tuple(int(u) for u in self.assign_q))
        if len(self.alphas) != 3 or min(self.alphas) < 0:
            raise ValueError("alphas must be three nonnegative amplitudes")
        if abs(sum(a * a for a in self.alphas) - 1.0) > 1e-12:
            raise ValueError("beam powers must sum to one")
        if len(self.assign_i) != self.shared.m:
            raise ValueError("assign_i must name an owner per shared I bit")
        if len(self.assign_q) != self.shared.n:
            raise ValueError("assign_q must name an owner per shared Q bit")
        if not set(self.assign_i + self.assign_q) <= {1, 2}:
            raise ValueError("shared bits can only be assigned to user 1 or 2")

    @property
    def sizes(self) -> tuple[int, int, int, int, int, int]:
        return (self.shared.m, self.shared.n, self.private1.m,
                self.private1.n, self.private2.m, self.private2.n)

    def private(self, user: int) -> DistanceProfile:
        if user not in (1, 2):
            raise ValueError(f"user must be 1 or 2, got {user}")
        return self.private1 if user == 1 else self.private2

    def owned(self, user: int) -> tuple[np.ndarray, np.ndarray]:
        """Boolean masks over user ``user``'s composite I and Q bits."""
        prof = self.private(user)
        own_i = np.array([u == user for u in self.assign_i] + [True] * prof.m,
                         dtype=bool)
        own_q = np.array([u == user for u in self.assign_q] + [True] * prof.n,
                         dtype=bool)
        return own_i, own_q

    def bit_capacity(self, user: int) -> int:
        own_i, own_q = self.owned(user)
        return int(own_i.sum() + own_q.sum())


def composite_distances(shared, private, beta_shared: float,
                        beta_private: float) -> np.ndarray:
    """Received layer distances on one branch.

    A layer whose weight is zero is not seen by the receiver and is
    dropped; the remaining layers are checked for ordering, including the
    seam between the last shared and the first private layer.
    """
    parts = []
    if beta_shared > 0:
        parts.append(beta_shared * np.asarray(shared, dtype=float))
    if beta_private > 0:
        parts.append(beta_private * np.asarray(private, dtype=float))
    d = np.concatenate(parts) if parts else np.zeros(0)
    _check_branch(d, "composite distances")
    return d


def compose_received_constellation(mode: ModeConfig, eq, user: int
                                   ) -> tuple[HierPam, HierPam]:
    """Composite I and Q constellations seen by ``user``.

    ``eq`` is the user's equivalent channel (anything with
    ``beta_shared`` and ``beta_private`` attributes). Raises
    :class:`OrderingError` when the superposition is not a properly
    ordered hierarchical constellation.
    """
    b0, bu = float(eq.beta_shared), float(eq.beta_private)
    if b0 < 0 or bu < 0 or abs(b0 * b0 + bu * bu - 1) > 1e-12:
        raise ValueError(f"invalid mixing weights ({b0}, {bu})")
    prof = mode.private(user)
    di = composite_distances(mode.shared.i_distances, prof.i_distances, b0, bu)
    dq = composite_distances(mode.shared.q_distances, prof.q_distances, b0, bu)
    energy = float(np.sum(di**2) + np.sum(dq**2))
    if abs(energy - 1.0) > 1e-12:
        raise ValueError(f"user {user} receives power on a symbol that "
                         f"carries no bits (composite energy {energy:.6g})")
    return build_hier_pam(di.size, di), build_hier_pam(dq.size, dq)


def received_layers(mode: ModeConfig, eq, user: int
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Masks over the full composite I/Q bit lists that the user can see.

    Layers carried by a beam with zero weight at this receiver are absent
    from :func:`compose_received_constellation`; their bits carry nothing.
    """
    prof = mode.private(user)
    s0 = float(eq.beta_shared) > 0
    su = float(eq.beta_private) > 0
    vis_i = np.array([s0] * mode.shared.m + [su] * prof.m, dtype=bool)
    vis_q = np.array([s0] * mode.shared.n + [su] * prof.n, dtype=bool)
    return vis_i, vis_q

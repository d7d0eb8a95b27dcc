"""Two-user MISO channel geometry and the constrained precoders.

All quantities are in the linear domain. The precoder directions live in
the span of the two channel vectors, so they are valid for any number of
transmit antennas even though the scenario helper emits the two-antenna
channels used throughout the numerical study.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hqam import DistanceProfile, ModeConfig, composite_distances

__all__ = [
    "DegenerateChannelError",
    "DegenerateModeError",
    "ChannelPair",
    "PrecoderSet",
    "UserChannel",
    "make_channels",
    "gram_schmidt_basis",
    "shared_precoder_direction",
    "private_precoder_directions",
    "make_precoders",
    "equivalent_channels",
    "closed_form_gains",
    "transmit",
]

RHO_LIMIT = 1.0 - 1e-9


class DegenerateChannelError(ValueError):
    """The two channels are (numerically) parallel."""


class DegenerateModeError(ValueError):
    """A user receives no signal power in the given mode."""


@dataclass(frozen=True, eq=False)
class ChannelPair:
    """Channel vectors of the two users plus the noise variance.

    ``h1`` and ``h2`` are column channels, i.e. the received sample of
    user ``u`` is ``h_u^H x + w_u``.
    """

    h1: np.ndarray
    h2: np.ndarray
    sigma2: float = 1.0

    def __post_init__(self):
        h1 = np.asarray(self.h1, dtype=complex).reshape(-1)
        h2 = np.asarray(self.h2, dtype=complex).reshape(-1)
        if h1.shape != h2.shape:
            raise ValueError("channel vectors must have the same length")
        if not (np.linalg.norm(h1) > 0 and np.linalg.norm(h2) > 0):
            raise ValueError("channel vectors must be nonzero")
        if not self.sigma2 > 0:
            raise ValueError("noise variance must be positive")
        object.__setattr__(self, "h1", h1)
        object.__setattr__(self, "h2", h2)
        if abs(self.rho) >= RHO_LIMIT:
            raise DegenerateChannelError(
                f"|rho| = {abs(self.rho):.12g} is too close to 1")

    @property
    def n_t(self) -> int:
        return self.h1.size

    @property
    def lam1(self) -> float:
        return float(np.linalg.norm(self.h1))

    @property
    def lam2(self) -> float:
        return float(np.linalg.norm(self.h2))

    @property
    def lams(self) -> tuple[float, float]:
        return self.lam1, self.lam2

    @property
    def h1_unit(self) -> np.ndarray:
        return self.h1 / self.lam1

    @property
    def h2_unit(self) -> np.ndarray:
        return self.h2 / self.lam2

    @property
    def rho(self) -> complex:
        """Complex correlation of the normalized channels, ``h1~^H h2~``."""
        return complex(np.vdot(self.h1_unit, self.h2_unit))

    @property
    def theta(self) -> float:
        """Hermitian angle between the channels."""
        return math.acos(min(1.0, abs(self.rho)))

    @property
    def gammas(self) -> tuple[float, float]:
        """Reference SNRs ``lambda_u**2 / sigma2`` (linear)."""
        return self.lam1**2 / self.sigma2, self.lam2**2 / self.sigma2

    def h(self, user: int) -> np.ndarray:
        return self.h1 if user == 1 else self.h2


def make_channels(lam1: float, lam2: float, rho: complex, n_t: int = 2,
                  sigma2: float = 1.0) -> ChannelPair:
    """Canonical scenario channels.

    User 1 points along the first antenna axis and user 2 is rotated so
    that the normalized correlation ``h1~^H h2~`` equals ``rho``. Extra
    antennas (``n_t > 2``) get zero entries.
    """
    if not (lam1 > 0 and lam2 > 0):
        raise ValueError("channel norms must be positive")
    rho = complex(rho)
    if abs(rho) >= RHO_LIMIT:
        raise DegenerateChannelError(f"|rho| = {abs(rho)} must be below 1")
    if n_t < 2:
        raise ValueError("two users need at least two transmit antennas")
    h1 = np.zeros(n_t, dtype=complex)
    h2 = np.zeros(n_t, dtype=complex)
    h1[0] = lam1
    h2[0] = lam2 * rho
    h2[1] = lam2 * math.sqrt(1.0 - abs(rho) ** 2)
    return ChannelPair(h1, h2, sigma2)


def gram_schmidt_basis(ch: ChannelPair) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis (q1, q2) of span{h1, h2} with q1 along h1."""
    rho = ch.rho
    s = math.sqrt(1.0 - abs(rho) ** 2)
    q1 = ch.h1_unit
    q2 = (ch.h2_unit - rho * ch.h1_unit) / s
    return q1, q2


def shared_precoder_direction(ch: ChannelPair, theta0: float) -> np.ndarray:
    """Unit direction of the shared beam for beam angle ``theta0``.

    ``theta0 = 0`` points at user 1 and ``theta0 = Theta`` at user 2; the
    relative phase of the second basis vector is fixed so that user 2's
    gain is as large as possible for the given user-1 gain.
    """
    big = ch.theta
    if not (-1e-12 <= theta0 <= big + 1e-12):
        raise ValueError(f"theta0 = {theta0} outside [0, {big}]")
    theta0 = min(max(theta0, 0.0), big)
    q1, q2 = gram_schmidt_basis(ch)
    phase = np.exp(-1j * np.angle(ch.rho))
    return math.cos(theta0) * q1 + phase * math.sin(theta0) * q2


def private_precoder_directions(ch: ChannelPair
                                ) -> tuple[np.ndarray, np.ndarray]:
    """Zero-forcing private beams, phase-aligned with the shared beam."""
    rho = ch.rho
    s = math.sqrt(1.0 - abs(rho) ** 2)
    h1, h2 = ch.h1_unit, ch.h2_unit
    p1 = (h1 - np.conj(rho) * h2) / s
    p2 = np.exp(-1j * np.angle(rho)) * (h2 - rho * h1) / s
    return p1, p2


@dataclass(frozen=True, eq=False)
class PrecoderSet:
    """Precoders ``p_i = alpha_i * p~_i`` of the shared and private beams."""

    directions: tuple[np.ndarray, np.ndarray, np.ndarray]
    alphas: tuple[float, float, float]
    theta0: float

    @property
    def p0(self) -> np.ndarray:
        return self.alphas[0] * self.directions[0]

    @property
    def p1(self) -> np.ndarray:
        return self.alphas[1] * self.directions[1]

    @property
    def p2(self) -> np.ndarray:
        return self.alphas[2] * self.directions[2]

    def matrix(self) -> np.ndarray:
        """``N_t x 3`` matrix with columns p0, p1, p2."""
        return np.stack([self.p0, self.p1, self.p2], axis=1)

    def total_power(self) -> float:
        return float(np.sum(np.abs(self.matrix()) ** 2))


def make_precoders(ch: ChannelPair, theta0: float,
                   alphas: tuple[float, float, float]) -> PrecoderSet:
    a = tuple(float(x) for x in alphas)
    if len(a) != 3 or min(a) < 0:
        raise ValueError("alphas must be three nonnegative amplitudes")
    if abs(sum(x * x for x in a) - 1.0) > 1e-12:
        raise ValueError("beam powers must sum to one")
    p0 = shared_precoder_direction(ch, theta0)
    p1, p2 = private_precoder_directions(ch)
    return PrecoderSet((p0, p1, p2), a, float(theta0))


@dataclass(frozen=True)
class UserChannel:
    """Scalar equivalent channel of one user.

    ``y_u = exp(1j*phase) * gain * (beta_shared*s0 + beta_private*s_u) + w``.
    ``composite`` holds the received layer distances (zero-weight layers
    dropped) when a mode was supplied.
    """

    user: int
    gain: float
    phase: float
    beta_shared: float
    beta_private: float
    sigma2: float
    composite: DistanceProfile | None = None

    @property
    def branch_noise_var(self) -> float:
        """Noise variance per real branch after one-tap equalization."""
        return self.sigma2 / (2.0 * self.gain**2)

    @property
    def snr(self) -> float:
        return self.gain**2 / self.sigma2


def _user_channel(ch: ChannelPair, pre: PrecoderSet, user: int,
                  mode: ModeConfig | None) -> UserChannel:
    h = ch.h(user)
    a0 = complex(np.vdot(h, pre.p0))
    au = complex(np.vdot(h, pre.p1 if user == 1 else pre.p2))
    g = math.hypot(abs(a0), abs(au))
    if g == 0.0:
        raise DegenerateModeError(f"user {user} receives no signal")
    phase = float(np.angle(a0 if abs(a0) >= abs(au) else au))
    b0, bu = abs(a0) / g, abs(au) / g
    # beams that vanish at this receiver (zero power or a round-off null)
    # are snapped to exactly zero weight
    if pre.alphas[0] == 0.0 or b0 < 1e-12:
        b0, bu = 0.0, 1.0
    elif pre.alphas[user] == 0.0 or bu < 1e-12:
        b0, bu = 1.0, 0.0
    composite = None
    if mode is not None:
        prof = mode.private(user)
        di = composite_distances(mode.shared.i_distances, prof.i_distances,
                                 b0, bu)
        dq = composite_distances(mode.shared.q_distances, prof.q_distances,
                                 b0, bu)
        energy = float(np.sum(di**2) + np.sum(dq**2))
        if abs(energy - 1.0) > 1e-12:
            raise DegenerateModeError(
                f"user {user} receives power on a symbol without bits")
        composite = DistanceProfile(tuple(di), tuple(dq))
    return UserChannel(user, g, phase, b0, bu, ch.sigma2, composite)


def equivalent_channels(ch: ChannelPair, pre: PrecoderSet,
                        mode: ModeConfig | None = None
                        ) -> tuple[UserChannel, UserChannel]:
    """Per-user gain, phase and mixing weights seen after precoding.

    The weights are computed from the actual inner products ``h_u^H p_i``,
    so they hold for any precoder set satisfying the zero-forcing and
    phase-alignment constraints.
    """
    return (_user_channel(ch, pre, 1, mode), _user_channel(ch, pre, 2, mode))


def closed_form_gains(ch: ChannelPair, theta0: float,
                      alphas: tuple[float, float, float]
                      ) -> tuple[float, float]:
    """Equivalent gains of both users written directly in angles and powers."""
    lam1, lam2 = ch.lams
    big = ch.theta
    a0, a1, a2 = alphas
    sin_big = math.sin(big)
    g1 = math.hypot(lam1 * a0 * math.cos(theta0), lam1 * a1 * sin_big)
    g2 = math.hypot(lam2 * a0 * math.cos(big - theta0), lam2 * a2 * sin_big)
    return g1, g2


def transmit(pre: PrecoderSet, s0, s1, s2) -> np.ndarray:
    """Transmit vectors for symbol arrays; shape ``(..., N_t)``."""
    s = np.stack(np.broadcast_arrays(np.asarray(s0, dtype=complex),
                                     np.asarray(s1, dtype=complex),
                                     np.asarray(s2, dtype=complex)), axis=-1)
    return s @ pre.matrix().T

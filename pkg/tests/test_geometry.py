"""Channel pair, precoder synthesis and equivalent channels."""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pxqama.geometry import (
    DegenerateChannelError,
    DegenerateModeError,
    closed_form_gains,
    equivalent_channels,
    gram_schmidt_basis,
    make_channels,
    make_precoders,
    private_precoder_directions,
    shared_precoder_direction,
    transmit,
)
from pxqama.hqam import DistanceProfile, ModeConfig, map_private, map_shared

TOL = 1e-10

lams = st.floats(0.05, 50.0)
rho_abs = st.floats(0.0, 0.99)
phases = st.floats(-math.pi, math.pi)


@st.composite
def channels(draw):
    rho = draw(rho_abs) * cmath.exp(1j * draw(phases))
    return make_channels(draw(lams), draw(lams), rho, sigma2=draw(st.floats(0.01, 10.0)))


@st.composite
def power_splits(draw):
    w = np.array(draw(st.lists(st.floats(0.0, 1.0), min_size=3, max_size=3)))
    if w.sum() == 0:
        w[0] = 1.0
    return tuple(np.sqrt(w / w.sum()))


def qpsk_mode(theta0, alphas, b0_owner=(1,), q_owner=(2,)):
    q = DistanceProfile.uniform(1, 1)
    return ModeConfig(q, q, q, theta0, alphas, b0_owner, q_owner)


class TestMakeChannels:
    def test_orthogonal(self):
        ch = make_channels(1.0, 1.0, 0.0)
        assert ch.theta == pytest.approx(math.pi / 2)
        assert abs(np.vdot(ch.h1, ch.h2)) < 1e-15

    def test_real_correlation(self):
        ch = make_channels(1.0, 2.0, 0.6)
        assert ch.theta == pytest.approx(0.9273, abs=1e-4)
        assert math.sin(ch.theta) == pytest.approx(0.8)
        np.testing.assert_allclose(ch.h2_unit, [0.6, 0.8])

    def test_reference_snr(self):
        ch = make_channels(1.0, 1.0, 0.3, sigma2=0.1)
        assert 10 * math.log10(ch.gammas[0]) == pytest.approx(10.0)

    @given(channels())
    def test_stored_correlation(self, ch):
        assert abs(np.linalg.norm(ch.h1_unit) - 1) < 1e-12
        assert abs(np.linalg.norm(ch.h2_unit) - 1) < 1e-12
        assert math.cos(ch.theta) == pytest.approx(abs(ch.rho), abs=1e-12)

    @pytest.mark.parametrize("rho", [1.0, 0.9999999999, cmath.exp(0.3j)])
    def test_degenerate(self, rho):
        with pytest.raises(DegenerateChannelError):
            make_channels(1.0, 1.0, rho)

    def test_more_antennas(self):
        ch = make_channels(1.0, 1.0, 0.5j, n_t=4)
        assert ch.n_t == 4
        p1, p2 = private_precoder_directions(ch)
        assert abs(np.vdot(ch.h2, p1)) < TOL


class TestGramSchmidt:
    def test_orthogonal_channels(self):
        ch = make_channels(1.0, 3.0, 0.0)
        q1, q2 = gram_schmidt_basis(ch)
        np.testing.assert_allclose(q2, ch.h2_unit)

    def test_real_rho(self):
        q1, q2 = gram_schmidt_basis(make_channels(1.0, 1.0, 0.6))
        np.testing.assert_allclose(q2, [0, 1], atol=1e-15)

    @given(channels())
    def test_orthonormal(self, ch):
        q1, q2 = gram_schmidt_basis(ch)
        assert abs(np.vdot(q1, q2)) < 1e-12
        assert abs(np.linalg.norm(q2) - 1) < 1e-12


class TestSharedBeam:
    def test_points_at_user_one(self):
        ch = make_channels(1.0, 1.0, 0.4 + 0.2j)
        np.testing.assert_allclose(shared_precoder_direction(ch, 0.0), ch.h1_unit)

    def test_points_at_user_two(self):
        ch = make_channels(1.0, 1.0, 0.4 + 0.2j)
        p0 = shared_precoder_direction(ch, ch.theta)
        assert abs(np.vdot(ch.h2_unit, p0)) == pytest.approx(1.0)

    def test_bisector_for_orthogonal_channels(self):
        ch = make_channels(1.0, 1.0, 0.0)
        p0 = shared_precoder_direction(ch, math.pi / 4)
        np.testing.assert_allclose(p0, (ch.h1_unit + ch.h2_unit) / math.sqrt(2))

    def test_out_of_range(self):
        ch = make_channels(1.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            shared_precoder_direction(ch, ch.theta + 0.01)
        with pytest.raises(ValueError):
            shared_precoder_direction(ch, -0.01)

    @given(channels(), st.floats(0.0, 1.0))
    def test_gain_tradeoff(self, ch, frac):
        theta0 = frac * ch.theta
        p0 = shared_precoder_direction(ch, theta0)
        phase = cmath.exp(-1j * cmath.phase(ch.rho))
        assert abs(np.vdot(ch.h1_unit, p0) - math.cos(theta0)) < TOL
        assert abs(np.vdot(ch.h2_unit, p0) - math.cos(ch.theta - theta0) * phase) < TOL
        assert abs(np.linalg.norm(p0) - 1) < 1e-12


class TestPrivateBeams:
    def test_real_rho(self):
        ch = make_channels(1.0, 1.0, 0.6)
        p1, p2 = private_precoder_directions(ch)
        np.testing.assert_allclose(p1, [0.8, -0.6], atol=1e-15)
        assert np.vdot(ch.h1_unit, p1) == pytest.approx(0.8)

    def test_orthogonal_channels(self):
        ch = make_channels(2.0, 1.0, 0.0)
        p1, p2 = private_precoder_directions(ch)
        np.testing.assert_allclose(p1, ch.h1_unit)
        np.testing.assert_allclose(p2, ch.h2_unit)

    @given(channels())
    def test_zero_forcing_and_phase(self, ch):
        p1, p2 = private_precoder_directions(ch)
        assert abs(np.vdot(ch.h2, p1)) < 1e-12 * max(1.0, ch.lam2)
        assert abs(np.vdot(ch.h1, p2)) < 1e-12 * max(1.0, ch.lam1)
        for p in (p1, p2):
            assert abs(np.linalg.norm(p) - 1) < 1e-12
        g11 = np.vdot(ch.h1_unit, p1)
        g22 = np.vdot(ch.h2_unit, p2)
        assert abs(g11.imag) < TOL and g11.real > 0
        if abs(ch.rho) > 1e-6:
            err = cmath.phase(g22 * cmath.exp(1j * cmath.phase(ch.rho)))
            assert abs(err) < TOL
        assert abs(g11) == pytest.approx(math.sin(ch.theta))


class TestPrecoderSet:
    @given(channels(), st.floats(0, 1), power_splits())
    def test_alignment_and_power(self, ch, frac, alphas):
        pre = make_precoders(ch, frac * ch.theta, alphas)
        assert pre.total_power() == pytest.approx(1.0, abs=1e-12)
        a10, a11 = np.vdot(ch.h1, pre.directions[0]), np.vdot(ch.h1, pre.directions[1])
        a20, a22 = np.vdot(ch.h2, pre.directions[0]), np.vdot(ch.h2, pre.directions[2])
        for x, y in ((a10, a11), (a20, a22)):
            if abs(x) > 1e-9 and abs(y) > 1e-9:
                assert abs(cmath.phase(x / y)) < TOL

    def test_rejects_bad_powers(self):
        ch = make_channels(1.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            make_precoders(ch, 0.1, (0.5, 0.5, 0.5))


class TestEquivalentChannels:
    def test_single_beam(self):
        ch = make_channels(1.0, 2.0, 0.3 + 0.3j)
        eq1, eq2 = equivalent_channels(ch, make_precoders(ch, 0.4, (1.0, 0.0, 0.0)))
        for eq in (eq1, eq2):
            assert (eq.beta_shared, eq.beta_private) == (1.0, 0.0)

    def test_private_only(self):
        ch = make_channels(1.0, 2.0, 0.3 + 0.3j)
        a = (0.0, math.sqrt(0.5), math.sqrt(0.5))
        eq1, eq2 = equivalent_channels(ch, make_precoders(ch, 0.4, a))
        for eq in (eq1, eq2):
            assert (eq.beta_shared, eq.beta_private) == (0.0, 1.0)

    def test_worked_gain(self):
        ch = make_channels(1.0, 1.0, 0.0)
        a = math.sqrt(0.5)
        g1, g2 = closed_form_gains(ch, 0.0, (a, a, 0.0))
        assert g1 == pytest.approx(1.0)
        # user 2 sees neither beam here
        assert g2 == pytest.approx(0.0, abs=1e-15)
        # with a sliver of power on user 2 the user-1 weights are unchanged
        eps = 1e-3
        alphas = (a * math.sqrt(1 - eps), a * math.sqrt(1 - eps), math.sqrt(eps))
        eq1, _ = equivalent_channels(ch, make_precoders(ch, 0.0, alphas))
        assert eq1.beta_shared == pytest.approx(a)
        assert eq1.beta_private == pytest.approx(a)

    def test_zero_gain_is_degenerate(self):
        ch = make_channels(1.0, 1.0, 0.0)
        with pytest.raises(DegenerateModeError):
            equivalent_channels(ch, make_precoders(ch, 0.0, (0.0, 0.0, 1.0)))

    def test_power_on_empty_symbol(self):
        ch = make_channels(1.0, 1.0, 0.5)
        q = DistanceProfile.uniform(1, 1)
        mode = ModeConfig(q, DistanceProfile(), DistanceProfile(), 0.2,
                          (math.sqrt(0.5), math.sqrt(0.5), 0.0), (1,), (2,))
        with pytest.raises(DegenerateModeError):
            equivalent_channels(ch, make_precoders(ch, 0.2, mode.alphas), mode)

    @given(channels(), st.floats(0, 1), power_splits())
    def test_closed_form(self, ch, frac, alphas):
        theta0 = frac * ch.theta
        pre = make_precoders(ch, theta0, alphas)
        g1, g2 = closed_form_gains(ch, theta0, alphas)
        if min(g1, g2) < 1e-9:
            return
        eq1, eq2 = equivalent_channels(ch, pre)
        assert eq1.gain == pytest.approx(g1, rel=1e-10)
        assert eq2.gain == pytest.approx(g2, rel=1e-10)
        for eq in (eq1, eq2):
            assert eq.beta_shared**2 + eq.beta_private**2 == pytest.approx(1.0, abs=1e-12)
        if alphas[0] * math.cos(theta0) > 1e-6:
            assert abs(eq1.phase) < TOL
        if alphas[0] * math.cos(ch.theta - theta0) > 1e-6 and abs(ch.rho) > 1e-6:
            err = cmath.exp(1j * eq2.phase) / cmath.exp(-1j * cmath.phase(ch.rho))
            assert abs(cmath.phase(err)) < TOL

    @settings(max_examples=40)
    @given(channels(), st.floats(0.05, 0.95), st.floats(0.1, 20.0))
    def test_scaling_invariance(self, ch, frac, c):
        theta0 = frac * ch.theta
        alphas = (math.sqrt(0.8), math.sqrt(0.1), math.sqrt(0.1))
        mode = qpsk_mode(theta0, alphas)
        scaled = type(ch)(ch.h1 * c, ch.h2 * c, ch.sigma2 * c * c)
        try:
            eqa = equivalent_channels(ch, make_precoders(ch, theta0, alphas), mode)
        except ValueError:
            return
        eqb = equivalent_channels(scaled, make_precoders(scaled, theta0, alphas), mode)
        for a, b in zip(eqa, eqb):
            assert b.beta_shared == pytest.approx(a.beta_shared, abs=1e-12)
            assert b.branch_noise_var == pytest.approx(a.branch_noise_var, rel=1e-10)
            np.testing.assert_allclose(b.composite.i_distances, a.composite.i_distances, atol=1e-12)


def parallax_residual(ch, theta0, alphas, n, rng):
    """Largest gap between the antenna-domain and scalar receive models."""
    mode = qpsk_mode(theta0, alphas)
    pre = make_precoders(ch, theta0, alphas)
    eqs = equivalent_channels(ch, pre)
    bits = rng.integers(0, 2, size=(6, n, 1))
    s0 = map_shared(bits[0], bits[1], mode.shared)
    s1 = map_private(bits[2], bits[3], bits[0], bits[1], mode.private1)
    s2 = map_private(bits[4], bits[5], bits[0], bits[1], mode.private2)
    x = transmit(pre, s0, s1, s2)
    w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    worst = 0.0
    for u, su in ((1, s1), (2, s2)):
        h = ch.h(u)
        eq = eqs[u - 1]
        forward = x @ h.conj() + w
        model = cmath.exp(1j * eq.phase) * eq.gain * (eq.beta_shared * s0 + eq.beta_private * su) + w
        worst = max(worst, float(np.max(np.abs(forward - model))))
    return worst


class TestParallaxIdentity:
    def test_random_draws(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            rho = rng.uniform(0, 0.95) * cmath.exp(1j * rng.uniform(-math.pi, math.pi))
            ch = make_channels(rng.uniform(0.5, 5), rng.uniform(0.5, 5), rho)
            p = rng.dirichlet([1, 1, 1])
            theta0 = rng.uniform(0, 1) * ch.theta
            assert parallax_residual(ch, theta0, tuple(np.sqrt(p)), 500, rng) < TOL

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import bell_state, random_density
from qdistill.channels import (
    LocalChannel,
    PrepParams,
    apply_bilateral,
    dephasing_channel,
    identity_channel,
    prepare_spdc,
    rho_form1,
    rho_form2,
    slide_filter,
)
from qdistill.errors import NotNormalizedError, OutOfRangeError
from qdistill.states import SIGMA_0, SIGMA_X, LocalOp, apply_local

# Frozen oracle values (independent arithmetic on the closed forms).
RHO1_11 = 0.05201504548198821  # (0.23, 0.97, 0.013) after joint renormalization
RHO1_14 = 0.21873093962567922
RHO2_CORNER = 0.30182193655461736  # (0.44, sqrt(1-0.44^2), 0.063)


class TestPrepareSpdc:
    def test_balanced_gives_phi_plus(self):
        rho = prepare_spdc(PrepParams(1 / np.sqrt(2), 1 / np.sqrt(2)))
        assert_allclose(rho, bell_state("phi+"), atol=1e-12)

    def test_entries_follow_amplitudes(self):
        # The published pair (0.23, 0.97) is rounded; prepare_spdc does not
        # renormalize, so use the exactly normalized neighbour.
        a = 0.23
        b = np.sqrt(1 - a * a)
        rho = prepare_spdc(PrepParams(a, b))
        assert abs(rho[0, 0] - a * a) < 1e-12
        assert abs(rho[0, 3] - a * b) < 1e-12
        assert abs(rho[3, 3] - b * b) < 1e-12

    def test_rounded_pair_rejected(self):
        with pytest.raises(NotNormalizedError):
            PrepParams(0.23, 0.97)

    def test_product_state_limit(self):
        rho = prepare_spdc(PrepParams(1.0, 0.0))
        assert abs(rho[0, 0] - 1.0) < 1e-12
        assert np.abs(rho).sum() == pytest.approx(1.0, abs=1e-12)

    def test_relative_phase(self):
        rho = prepare_spdc(PrepParams(1 / np.sqrt(2), 1 / np.sqrt(2)), phase=np.pi)
        assert_allclose(rho, bell_state("phi-"), atol=1e-12)


class TestDephasingChannel:
    def test_p_zero_is_identity(self, rng):
        ch = dephasing_channel("z", 0.0)
        rho = random_density(rng)
        assert_allclose(apply_bilateral(rho, ch, ch), rho, atol=1e-12)

    def test_complete_z_dephasing_kills_coherence(self, rng):
        ch = dephasing_channel("z", 0.5)
        rho = apply_bilateral(random_density(rng), ch, ch)
        off = rho.copy()
        off[np.arange(4), np.arange(4)] = 0
        # z-dephasing at p = 1/2 on both arms removes every element that
        # is off-diagonal in H/V on either qubit except the (HV,VH) and
        # (HH,VV) pairs only when both flips compensate; for p = 1/2 all
        # single-qubit coherences vanish.
        assert abs(rho[0, 1]) < 1e-12 and abs(rho[0, 2]) < 1e-12
        assert abs(rho[1, 3]) < 1e-12 and abs(rho[2, 3]) < 1e-12

    def test_kraus_weights(self):
        ch = dephasing_channel("x", 0.013)
        assert_allclose(ch.kraus[0], np.sqrt(0.987) * SIGMA_0, atol=1e-15)
        assert_allclose(ch.kraus[1], np.sqrt(0.013) * SIGMA_X, atol=1e-15)

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            dephasing_channel("z", 1.5)
        with pytest.raises(OutOfRangeError):
            dephasing_channel("x", -0.01)

    def test_completeness_enforced(self):
        with pytest.raises(ValueError):
            LocalChannel((0.9 * SIGMA_0,), "custom")


class TestApplyBilateral:
    def test_identity_channels(self, rng):
        rho = random_density(rng)
        assert_allclose(
            apply_bilateral(rho, identity_channel(), identity_channel()), rho, atol=1e-14
        )

    def test_form1_matches_kraus_composition(self):
        a, p = 0.23, 0.013
        b = np.sqrt(1 - a * a)
        ch = dephasing_channel("x", p)
        via_kraus = apply_bilateral(prepare_spdc(PrepParams(a, b)), ch, ch)
        assert np.abs(rho_form1(a, b, p) - via_kraus).max() < 1e-12

    def test_form2_matches_kraus_composition(self):
        a, p = 0.44, 0.063
        b = np.sqrt(1 - a * a)
        ch = dephasing_channel("z", p)
        via_kraus = apply_bilateral(prepare_spdc(PrepParams(a, b)), ch, ch)
        assert np.abs(rho_form2(a, b, p) - via_kraus).max() < 1e-12

    def test_trace_preserved_random_channels(self, rng):
        for _ in range(200):
            rho = random_density(rng)
            p1, p2 = rng.uniform(0, 1, 2)
            ch_a = dephasing_channel("x" if rng.random() < 0.5 else "z", p1)
            ch_b = dephasing_channel("x" if rng.random() < 0.5 else "z", p2)
            out = apply_bilateral(rho, ch_a, ch_b)
            assert abs(np.trace(out).real - 1.0) < 1e-12

    def test_z_dephasing_composition_law(self, rng):
        # z(p1) then z(p2) equals z(p1 + p2 - 2 p1 p2) on any state.
        p1, p2 = 0.11, 0.31
        combined = dephasing_channel("z", p1 + p2 - 2 * p1 * p2)
        for _ in range(20):
            rho = random_density(rng)
            step = apply_bilateral(
                apply_bilateral(rho, dephasing_channel("z", p1), dephasing_channel("z", p1)),
                dephasing_channel("z", p2),
                dephasing_channel("z", p2),
            )
            direct = apply_bilateral(rho, combined, combined)
            assert np.abs(step - direct).max() < 1e-12


class TestClosedForms:
    def test_form1_no_decoherence_is_pure(self):
        a = 0.6
        b = 0.8
        assert_allclose(rho_form1(a, b, 0.0), prepare_spdc(PrepParams(a, b)), atol=1e-12)

    def test_form1_frozen_entries(self):
        rho = rho_form1(0.23, 0.97, 0.013)
        assert abs(rho[0, 0].real - RHO1_11) < 1e-12
        assert abs(rho[0, 3].real - RHO1_14) < 1e-12

    def test_form1_trace_on_grid(self):
        for a in np.linspace(0.1, 0.9, 10):
            b = np.sqrt(1 - a * a)
            for p in np.linspace(0.0, 1.0, 10):
                assert abs(np.trace(rho_form1(a, b, p)).real - 1.0) < 1e-12

    def test_form2_half_dephasing_is_classical(self):
        a = 0.44
        b = np.sqrt(1 - a * a)
        rho = rho_form2(a, b, 0.5)
        assert_allclose(rho, np.diag([a * a, 0, 0, b * b]), atol=1e-12)

    def test_form2_frozen_corner(self):
        a = 0.44
        rho = rho_form2(a, np.sqrt(1 - a * a), 0.063)
        assert abs(rho[0, 3].real - RHO2_CORNER) < 1e-12

    def test_form2_no_decoherence_is_pure(self):
        a = 0.52
        b = np.sqrt(1 - a * a)
        assert_allclose(rho_form2(a, b, 0.0), prepare_spdc(PrepParams(a, b)), atol=1e-12)

    def test_form2_coherence_symmetric_in_p(self):
        a = 0.3
        b = np.sqrt(1 - a * a)
        assert np.abs(rho_form2(a, b, 0.2) - rho_form2(a, b, 0.8)).max() < 1e-12

    def test_parameter_range_errors(self):
        with pytest.raises(OutOfRangeError):
            rho_form1(0.23, 0.97, 1.2)
        with pytest.raises(NotNormalizedError):
            rho_form1(0.5, 0.5, 0.1)


class TestSlideFilter:
    def test_lossless_is_identity(self):
        assert_allclose(slide_filter(1.0, 1.0).matrix, np.eye(2), atol=1e-15)

    def test_published_transmissions(self):
        # 92% / 22% intensity transmission gives diag(1, 0.489...), i.e.
        # the 0.49 filter to two decimals.
        op = slide_filter(0.92, 0.22)
        assert abs(op.matrix[0, 0] - 1.0) < 1e-12
        assert abs(op.matrix[1, 1] - np.sqrt(0.22 / 0.92)) < 1e-12
        assert abs(op.matrix[1, 1] - 0.49) < 0.005

    def test_neutral_attenuation(self, rng):
        # Normalized shape is the identity; the physical element passes
        # half the intensity of any state.
        op = slide_filter(0.5, 0.5)
        assert_allclose(op.matrix, np.eye(2), atol=1e-12)
        raw = LocalOp.filter(np.diag([np.sqrt(0.5), np.sqrt(0.5)]))
        out = apply_local(random_density(rng), raw, LocalOp.identity())
        assert abs(out.probability - 0.5) < 1e-12

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            slide_filter(1.2, 0.5)

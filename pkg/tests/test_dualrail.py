import math

import numpy as np
import pytest

from adqkd import qmat
from adqkd.dualrail import (
    ANCILLA,
    NO_FAULT,
    OPTIMAL,
    SITE_DECODER,
    SITE_ENCODER,
    SITE_POST_SELECTION,
    EncodedConfig,
    FaultSite,
    encode,
    encoded_branches,
    encoded_key_rate,
    gad_encoded_rates,
    joint_error_rates,
    run_encoded,
    table1_rates,
)
from adqkd.noise import AdParams, GadParams, dual_rail_gad
from adqkd.protocols import bb84_rates_ad, secure_fraction
from adqkd.qmat import DensityMatrix, PureState, apply_channel, apply_unitary
from conftest import random_pure_state


def dm(label):
    return PureState.from_label(label).density()


class TestEncode:
    def test_basis_states(self):
        assert encode(PureState.from_label("0")).isclose(dm("01"))
        assert encode(PureState.from_label("1")).isclose(dm("10"))

    def test_superposition(self):
        logical = PureState((qmat.ket("01") + qmat.ket("10")) / math.sqrt(2.0)).density()
        assert encode(PureState.from_label("+")).isclose(logical)

    def test_circuit_agrees_with_map(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            psi = random_pure_state(rng, 1)
            start = DensityMatrix(qmat.projector(np.kron(psi.amplitudes, qmat.KET0)))
            via_circuit = apply_unitary(start, qmat.cnot(2, 0, 1) @ qmat.x_gate(2, 1))
            assert encode(psi).isclose(via_circuit, atol=1e-12)

    def test_single_qubit_only(self):
        with pytest.raises(ValueError):
            encode(PureState.from_label("00"))


class TestFaultFreeRuns:
    @pytest.mark.parametrize("scheme", [ANCILLA, OPTIMAL])
    def test_survival_and_zero_errors(self, scheme):
        for gamma in (0.0, 0.1, 0.5, 0.9):
            for label in "01+-":
                res = run_encoded(PureState.from_label(label), scheme, AdParams(gamma))
                assert res.pass_probability == pytest.approx(1.0 - gamma, abs=1e-12)
                assert res.joint_error_z <= 1e-14 or label in "+-"
                if label == "0":
                    assert res.joint_error_z == 0.0
                if label == "+":
                    assert res.joint_error_x == 0.0

    @pytest.mark.parametrize("scheme", [ANCILLA, OPTIMAL])
    def test_conditional_state_is_input(self, scheme):
        rng = np.random.default_rng(13)
        for _ in range(20):
            psi = random_pure_state(rng, 1)
            res = run_encoded(psi, scheme, AdParams(0.3))
            assert res.conditional_state.fidelity_to_pure(psi) >= 1.0 - 1e-10

    def test_schemes_agree(self):
        rng = np.random.default_rng(29)
        for _ in range(10):
            psi = random_pure_state(rng, 1)
            gamma = float(rng.uniform())
            a = run_encoded(psi, ANCILLA, AdParams(gamma))
            b = run_encoded(psi, OPTIMAL, AdParams(gamma))
            assert a.pass_probability == pytest.approx(b.pass_probability, abs=1e-12)
            assert a.conditional_state.isclose(b.conditional_state, atol=1e-12)

    def test_full_damping_flagged(self):
        res = run_encoded(PureState.from_label("0"), OPTIMAL, AdParams(1.0))
        assert res.pass_probability == 0.0
        assert res.conditional_state is None


class TestFaultValidation:
    def test_site_names(self):
        with pytest.raises(ValueError):
            FaultSite("oracle", 0.1)
        with pytest.raises(ValueError):
            FaultSite("none", 0.1)  # beta without a site
        with pytest.raises(ValueError):
            FaultSite(SITE_ENCODER, 1.2)

    def test_optimal_has_no_decoder(self):
        with pytest.raises(ValueError):
            run_encoded(PureState.from_label("0"), OPTIMAL, AdParams(0.1), FaultSite(SITE_DECODER, 0.1))

    def test_gad_only_fault_free(self):
        with pytest.raises(ValueError):
            run_encoded(PureState.from_label("0"), ANCILLA, GadParams(0.1, 0.5), FaultSite(SITE_ENCODER, 0.1))


class TestTable1:
    def test_encoder_row(self):
        e_b, e_p = table1_rates(FaultSite(SITE_ENCODER, 0.1), 0.5)
        assert e_b == pytest.approx(0.01875, abs=1e-15)
        assert e_p == pytest.approx(0.01875, abs=1e-15)

    def test_post_selection_row(self):
        for gamma in (0.0, 0.3, 0.9):
            e_b, e_p = table1_rates(FaultSite(SITE_POST_SELECTION, 0.1), gamma)
            assert e_b == pytest.approx(0.025, abs=1e-15)
            assert e_p == pytest.approx(0.025, abs=1e-15)

    def test_decoder_row(self):
        e_b, e_p = table1_rates(FaultSite(SITE_DECODER, 0.1), 0.5)
        assert e_b == pytest.approx(0.025, abs=1e-15)
        assert e_p == pytest.approx(0.05, abs=1e-15)

    def test_needs_concrete_site(self):
        with pytest.raises(ValueError):
            table1_rates(NO_FAULT, 0.5)

    def test_joint_probabilities_match(self):
        for site in (SITE_ENCODER, SITE_POST_SELECTION, SITE_DECODER):
            for beta in (0.0, 0.1, 0.2):
                for gamma in (0.1, 0.5, 0.9):
                    fault = FaultSite(site, beta)
                    closed_b, closed_p = table1_rates(fault, gamma)
                    joint_b, joint_p, _ = joint_error_rates(ANCILLA, AdParams(gamma), fault)
                    assert joint_b == pytest.approx(closed_b, abs=1e-10)
                    if site != SITE_DECODER:
                        assert joint_p == pytest.approx(closed_p, abs=1e-10)
                    else:
                        # density-matrix value is half the closed form; both reported
                        assert joint_p == pytest.approx(closed_p / 2.0, abs=1e-10)

    def test_post_selection_fault_example(self):
        res = run_encoded(
            PureState.from_label("0"), ANCILLA, AdParams(0.5), FaultSite(SITE_POST_SELECTION, 0.2)
        )
        assert res.joint_error_z == pytest.approx(0.05, abs=1e-12)


class TestGadEncoded:
    def test_degenerate_mixing_is_error_free(self):
        assert gad_encoded_rates(GadParams(0.4, 1.0)).e_b == 0.0
        zero = gad_encoded_rates(GadParams(0.4, 0.0))
        assert zero.e_b == 0.0
        assert zero.sift == pytest.approx(0.6, abs=1e-15)

    def test_reference_point(self):
        rates = gad_encoded_rates(GadParams(0.4, 0.5))
        assert rates.sift == pytest.approx(0.68, abs=1e-15)
        assert rates.e_b == pytest.approx(0.04 / 0.68, abs=1e-12)
        assert rates.e_p == rates.e_b

    def test_matches_density_matrix_route(self):
        for gamma in np.linspace(0.0, 0.9, 7):
            for p in np.linspace(0.0, 1.0, 7):
                closed = gad_encoded_rates(GadParams(gamma, p))
                joint_b, joint_p, survival = joint_error_rates(ANCILLA, GadParams(gamma, p))
                assert survival == pytest.approx(closed.sift, abs=1e-10)
                assert joint_b == pytest.approx(closed.e_b * closed.sift, abs=1e-10)
                assert joint_p == pytest.approx(closed.e_p * closed.sift, abs=1e-10)

    def test_parity_detection(self):
        # the detection keeps exactly the odd-parity populations
        params = GadParams(0.35, 0.6)
        for label in "01+-":
            rho = apply_channel(encode(PureState.from_label(label)), dual_rail_gad(params))
            odd_mass = float(np.real(rho.matrix[1, 1] + rho.matrix[2, 2]))
            kept, dropped = encoded_branches(
                PureState.from_label(label), OPTIMAL, dual_rail_gad(params)
            )
            assert kept.trace() == pytest.approx(odd_mass, abs=1e-12)
            assert dropped.trace() == pytest.approx(1.0 - odd_mass, abs=1e-12)


class TestEncodedKeyRate:
    def test_fault_free_rate_is_survival(self):
        report = encoded_key_rate(ANCILLA, AdParams(0.3))
        assert report.secure_fraction == pytest.approx(0.7, abs=1e-12)
        assert report.rates.sift == pytest.approx(0.7, abs=1e-12)
        assert report.rates.e_b == 0.0

    def test_dominates_unencoded(self):
        for gamma in np.linspace(0.0, 1.0, 100):
            encoded = max(0.0, 1.0 - gamma)
            plain = secure_fraction(bb84_rates_ad(gamma, 0.0))
            assert encoded >= plain

    def test_gad_reference(self):
        report = encoded_key_rate(OPTIMAL, GadParams(0.4, 0.5))
        assert report.rates.sift == pytest.approx(0.68, abs=1e-10)
        assert report.rates.e_b == pytest.approx(0.0588235294, abs=1e-9)

    def test_starved_at_full_damping(self):
        report = encoded_key_rate(ANCILLA, AdParams(1.0))
        assert report.starved and report.l_sec == 0 and report.secure_fraction == 0.0

    def test_config_provenance(self):
        report = encoded_key_rate(ANCILLA, AdParams(0.2), FaultSite(SITE_ENCODER, 0.05))
        assert isinstance(report.config, EncodedConfig)
        assert report.config.fault.site == SITE_ENCODER

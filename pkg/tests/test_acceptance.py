"""Acceptance suite: one test per release criterion, each printing a
pass line (run with ``pytest tests/test_acceptance.py -v -s``)."""

import math
import time

import numpy as np
import pytest

from adqkd import cli, dualrail, montecarlo, protocols, sampling
from adqkd.dualrail import (
    ANCILLA,
    OPTIMAL,
    SITE_DECODER,
    SITE_ENCODER,
    SITE_POST_SELECTION,
    FaultSite,
    gad_encoded_rates,
    joint_error_rates,
    run_encoded,
    table1_rates,
)
from adqkd.montecarlo import HardwareProfile, QubitSpec, ShotPlan, finite_key, run_blocks
from adqkd.noise import AdParams, DampingSchedule, GadParams, doubled_delay_gamma, gamma_from_delay
from adqkd.protocols import (
    ALICE_SENDS,
    ANTI_CORRELATED,
    CHARLIE_MIDPOINT,
    CORRELATED,
    ProtocolConfig,
)
from adqkd.qmat import PureState
from conftest import random_pure_state


def bbm92_cfg(gamma, pair=CORRELATED, distribution=CHARLIE_MIDPOINT, **kw):
    return ProtocolConfig(
        "bbm92", AdParams(gamma), bbm92_pair=pair, bbm92_distribution=distribution, **kw
    )


def test_criterion_1_oracle_equivalence():
    """Closed forms match the density-matrix oracle at 1e-10, under 5 s."""
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0

    def gap(closed, oracle):
        return max(abs(closed.e_b - oracle.e_b), abs(closed.e_p - oracle.e_p))

    for _ in range(100):
        g, d = float(rng.uniform()), float(rng.uniform(0.0, 0.3))
        cfg = ProtocolConfig("bb84", AdParams(g), readout_delta=d)
        worst = max(worst, gap(protocols.bb84_rates_ad(g, d), protocols.simulate_protocol(cfg)))
    for _ in range(100):
        g, p, d = float(rng.uniform()), float(rng.uniform()), float(rng.uniform(0.0, 0.3))
        cfg = ProtocolConfig("bb84", GadParams(g, p), readout_delta=d)
        worst = max(worst, gap(protocols.bb84_rates_gad(g, p, d), protocols.simulate_protocol(cfg)))
    for _ in range(100):
        g, d = float(rng.uniform()), float(rng.uniform(0.0, 0.3))
        cfg = ProtocolConfig("b92", AdParams(g), readout_delta=d)
        worst = max(worst, gap(protocols.b92_rates(g, d), protocols.simulate_protocol(cfg)))
    for pair, dist in (
        (CORRELATED, CHARLIE_MIDPOINT),
        (ANTI_CORRELATED, CHARLIE_MIDPOINT),
        (CORRELATED, ALICE_SENDS),
    ):
        for _ in range(100):
            cfg = bbm92_cfg(float(rng.uniform()), pair=pair, distribution=dist)
            worst = max(worst, gap(protocols.bbm92_rates(cfg), protocols.simulate_protocol(cfg)))
    for _ in range(100):
        cfg = bbm92_cfg(0.0, gamma_a=float(rng.uniform()), gamma_b=float(rng.uniform()))
        worst = max(worst, gap(protocols.bbm92_rates(cfg), protocols.simulate_protocol(cfg)))
    elapsed = time.perf_counter() - start
    assert worst <= 1e-10
    assert elapsed < 5.0
    print(f"\nACCEPTANCE 1 PASS: oracle equivalence, max|diff|={worst:.2e}, {elapsed:.2f}s")


def test_criterion_2_phase_error_sign():
    """Oracle phase error is (1 - sqrt(1-gamma))/2: zero at 0, increasing."""
    gammas = np.linspace(0.0, 1.0, 101)
    worst = 0.0
    for proto in ("bb84", "b92"):
        values = []
        for g in gammas:
            oracle = protocols.simulate_protocol(ProtocolConfig(proto, AdParams(float(g))))
            expect = 0.5 * (1.0 - math.sqrt(1.0 - g))
            worst = max(worst, abs(oracle.e_p - expect))
            values.append(oracle.e_p)
        assert values[0] == pytest.approx(0.0, abs=1e-12)
        assert all(b >= a for a, b in zip(values, values[1:]))
        assert values[-1] > values[0]
    at_036 = protocols.simulate_protocol(ProtocolConfig("bb84", AdParams(0.36))).e_p
    assert at_036 == pytest.approx(0.1, abs=1e-10)
    assert worst <= 1e-10
    print(f"\nACCEPTANCE 2 PASS: e_p = (1-sqrt(1-gamma))/2, max|diff|={worst:.2e}")


def test_criterion_3_bbm92_identities():
    """BBM92 rate identities on a 101-point grid; asymmetric reduction."""
    worst = 0.0
    for g in np.linspace(0.0, 1.0, 101):
        g = float(g)
        for cfg, e_b_expect in (
            (bbm92_cfg(g), g * (1.0 - g)),
            (bbm92_cfg(g, pair=ANTI_CORRELATED), g),
            (bbm92_cfg(g, distribution=ALICE_SENDS), g - g * g / 2.0),
        ):
            for rates in (protocols.bbm92_rates(cfg), protocols.simulate_protocol(cfg)):
                worst = max(worst, abs(rates.e_b - e_b_expect), abs(rates.e_p - g / 2.0))
    assert worst <= 1e-10
    reduction = 0.0
    for g in np.linspace(0.0, 1.0, 101):
        g = float(g)
        sym = protocols.bbm92_rates(bbm92_cfg(g))
        asym = protocols.bbm92_rates(bbm92_cfg(0.0, gamma_a=g, gamma_b=g))
        reduction = max(reduction, abs(sym.e_b - asym.e_b), abs(sym.e_p - asym.e_p))
    assert reduction <= 1e-12
    print(f"\nACCEPTANCE 3 PASS: BBM92 identities, max|diff|={worst:.2e}, reduction {reduction:.2e}")


def test_criterion_4_ordering_claims():
    """Key-rate orderings hold with zero violations on the gamma grid."""
    violations = 0
    for g in np.linspace(0.0, 1.0, 101):
        g = float(g)
        bb84 = protocols.secure_fraction(protocols.bb84_rates_ad(g, 0.0))
        b92 = protocols.secure_fraction(protocols.b92_rates(g, 0.0))
        corr = protocols.secure_fraction(protocols.bbm92_rates(bbm92_cfg(g)))
        anti = protocols.secure_fraction(protocols.bbm92_rates(bbm92_cfg(g, pair=ANTI_CORRELATED)))
        alice = protocols.secure_fraction(protocols.bbm92_rates(bbm92_cfg(g, distribution=ALICE_SENDS)))
        dual = 1.0 - g
        violations += b92 < bb84
        violations += corr < anti
        violations += corr < alice
        violations += dual < bb84
    assert violations == 0
    print("\nACCEPTANCE 4 PASS: B92>=BB84, corr>=anti, midpoint>=direct, encoded>=plain")


def test_criterion_5_conditional_identity():
    """Fault-free post-selection returns the input state at rate 1-gamma."""
    rng = np.random.default_rng(55)
    states = [random_pure_state(rng, 1) for _ in range(100)]
    worst_fidelity = 1.0
    worst_pass = 0.0
    for gamma in (0.1, 0.3, 0.5, 0.9):
        for scheme in (ANCILLA, OPTIMAL):
            for psi in states:
                res = run_encoded(psi, scheme, AdParams(gamma))
                worst_pass = max(worst_pass, abs(res.pass_probability - (1.0 - gamma)))
                worst_fidelity = min(worst_fidelity, res.conditional_state.fidelity_to_pure(psi))
    assert worst_fidelity >= 1.0 - 1e-10
    assert worst_pass <= 1e-12
    print(
        f"\nACCEPTANCE 5 PASS: min fidelity {worst_fidelity:.15f}, max pass diff {worst_pass:.2e}"
    )


def test_criterion_6_table1_verification():
    """Single-fault joint errors reproduce the closed forms (decoder e_p
    reported with both values, not reconciled)."""
    worst = 0.0
    decoder_pairs = []
    for beta in np.linspace(0.0, 0.2, 5):
        for gamma in np.linspace(0.1, 0.9, 5):
            for site in (SITE_ENCODER, SITE_POST_SELECTION, SITE_DECODER):
                fault = FaultSite(site, float(beta))
                closed_b, closed_p = table1_rates(fault, float(gamma))
                joint_b, joint_p, _ = joint_error_rates(ANCILLA, AdParams(float(gamma)), fault)
                worst = max(worst, abs(joint_b - closed_b))
                if site == SITE_DECODER:
                    decoder_pairs.append((float(beta), float(gamma), closed_p, joint_p))
                else:
                    worst = max(worst, abs(joint_p - closed_p))
    assert worst <= 1e-10
    # decoder phase error: quoted closed form is exactly twice the
    # density-matrix value; log both rather than forcing agreement
    factor_gap = max(abs(c - 2.0 * j) for _, _, c, j in decoder_pairs)
    assert factor_gap <= 1e-10
    b, g, c, j = decoder_pairs[-1]
    print(
        f"\nACCEPTANCE 6 PASS: table verified at 1e-10 (max|diff|={worst:.2e}); "
        f"decoder e_p at (beta={b:.2f}, gamma={g:.2f}): closed {c:.6g} vs density-matrix {j:.6g}"
    )


def test_criterion_7_gad_dual_rail():
    """Encoded GAD rates match the closed forms on a 21x21 grid; p in {0,1}
    gives exactly zero logical error."""
    worst = 0.0
    for gamma in np.linspace(0.0, 1.0, 21):
        for p in np.linspace(0.0, 1.0, 21):
            params = GadParams(float(gamma), float(p))
            closed = gad_encoded_rates(params)
            joint_b, joint_p, survival = joint_error_rates(ANCILLA, params)
            worst = max(
                worst,
                abs(survival - closed.sift),
                abs(joint_b - closed.e_b * closed.sift),
                abs(joint_p - closed.e_p * closed.sift),
            )
    assert worst <= 1e-10
    for p in (0.0, 1.0):
        for gamma in np.linspace(0.0, 0.95, 20):
            for scheme in (ANCILLA, OPTIMAL):
                for label in ("0", "1"):
                    res = run_encoded(PureState.from_label(label), scheme, GadParams(float(gamma), p))
                    assert res.joint_error_z == 0.0
                for label in ("+", "-"):
                    res = run_encoded(PureState.from_label(label), scheme, GadParams(float(gamma), p))
                    assert res.joint_error_x == 0.0
    print(f"\nACCEPTANCE 7 PASS: GAD dual-rail grid max|diff|={worst:.2e}; exact zeros at p=0,1")


def test_criterion_8_key_length_bookkeeping():
    """l_sec = floor(l_sift (1 - h(e_b) - h(e_p))), clamped at zero."""
    assert protocols.secure_length(32768, 0.11, 0.11) == 5
    assert protocols.secure_length(32768, 0.0, 0.0) == 32768
    assert protocols.secure_length(32768, 0.2, 0.2) == 0
    est = montecarlo.QberEstimate(32768, 16384, 16384, 1802, 1802, 0.11, 0.11)
    assert finite_key(est).l_sec == 5
    print("\nACCEPTANCE 8 PASS: 32768 sifted bits -> 5 / 32768 / 0 secure bits")


def test_criterion_9_monte_carlo_convergence(tmp_path):
    """Empirical QBER within 3 binomial sigma in >= 19/20 seeded runs;
    byte-identical CSV on rerun; campaign under 60 s."""
    start = time.perf_counter()
    cfg = ProtocolConfig("bb84", AdParams(0.0))
    for gamma in (0.0, 0.1, 0.3):
        gate_ns = 0.0 if gamma == 0.0 else 1000.0 * math.log(1.0 / (1.0 - gamma))
        profile = HardwareProfile("synthetic", (QubitSpec(1.0, 0.0),), gate_ns)
        hits = 0
        for seed in range(20):
            est = run_blocks(cfg, ShotPlan(8192, 1, seed), profile)
            assert est.sifted_bits == 32768
            target = gamma / 2.0
            sigma = math.sqrt(target * (1.0 - target) / est.sifted_z)
            hits += abs(est.qber - target) <= 3.0 * sigma
        assert hits >= 19, f"gamma={gamma}: only {hits}/20 runs within 3 sigma"

    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = [
        "shots", "--profile", "yorktown", "--qubits", "3", "--seed", "90",
        "--n-gates-stop", "2000", "--n-gates-points", "5",
    ]
    assert cli.main(args + ["--out", str(out1)]) == 0
    assert cli.main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    print(f"\nACCEPTANCE 9 PASS: convergence + byte-identical CSV in {elapsed:.1f}s")


def test_criterion_10_delay_mapping():
    """gamma(T1=57.62us, 1000 x 35.6ns) = 0.46087; doubling composes."""
    gamma = gamma_from_delay(DampingSchedule(57.62, 35.6, 1000))
    assert gamma == pytest.approx(0.46087, abs=1e-4)
    worst = 0.0
    for n in (0, 1, 10, 137, 1000, 12345):
        once = gamma_from_delay(DampingSchedule(57.62, 35.6, n))
        twice = gamma_from_delay(DampingSchedule(57.62, 35.6, 2 * n))
        worst = max(worst, abs(doubled_delay_gamma(once) - twice))
    assert worst <= 1e-12
    print(f"\nACCEPTANCE 10 PASS: gamma(1000 gates)={gamma:.5f}, doubling diff {worst:.2e}")

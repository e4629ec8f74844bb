"""Desk-scale acceptance: one test per criterion, read from a single
``run all --seed 42`` report. Tolerances are the published bounds."""

import numpy as np

CRITERIA_BOUNDS = {
    "unitarity": 1e-10,
    "roundtrip": 1e-8,
    "heat_roundtrip_min": 1e-2,
    "velocity_reversal": 1e-10,
    "born_half": 1e-4,
    "born_quarter": 1e-3,
    "born_equivalence": 2e-4,
    "imag_after_extrapolation": 1e-6,
    "eigen_probabilities": 1e-8,
    "ks": 0.02,
    "within_3se": 0.95,
    "conj_P12": 1e-10,
    "four_term": 2e-4,
    "fringe_rel": 0.05,
    "dark_ratio": 0.1,
    "pair_identity": 1e-15,
    "decompose": 1e-12,
    "spin": 1e-15,
    "roughness_rel": 0.2,
    "u_scaling": 1e-10,
}


def m(report, key):
    return report["metrics"][key]


def test_criterion_1_unitarity(report_all):
    assert m(report_all, "evolve.norm_drift_configured") < CRITERIA_BOUNDS["unitarity"]
    assert m(report_all, "evolve.norm_drift_well") < CRITERIA_BOUNDS["unitarity"]


def test_criterion_2_reversibility(report_all):
    assert m(report_all, "reversal.roundtrip_l2") < CRITERIA_BOUNDS["roundtrip"]
    assert m(report_all, "reversal.heat_roundtrip_l2") > CRITERIA_BOUNDS["heat_roundtrip_min"]


def test_criterion_3_velocity_reversal(report_all):
    assert m(report_all, "hydro.velocity_reversal_max") < CRITERIA_BOUNDS["velocity_reversal"]


def test_criterion_4_born_by_intersection(report_all):
    assert abs(m(report_all, "born.born_F_half") - 0.5) <= CRITERIA_BOUNDS["born_half"]
    exact = 0.25 - 1.0 / (2.0 * np.pi)
    assert abs(m(report_all, "born.born_F_quarter") - exact) <= CRITERIA_BOUNDS["born_quarter"]
    assert m(report_all, "born.born_oracle_equivalence_max") < CRITERIA_BOUNDS["born_equivalence"]


def test_criterion_5_imaginary_decay(report_all):
    assert m(report_all, "born.born_imag_monotone") == 1.0
    assert m(report_all, "born.born_extrapolated_imag_max") < CRITERIA_BOUNDS["imag_after_extrapolation"]


def test_criterion_6_eigenbasis_born(report_all):
    tol = CRITERIA_BOUNDS["eigen_probabilities"]
    assert m(report_all, "eigen-born.p1_error") < tol
    assert m(report_all, "eigen-born.p2_error") < tol
    assert m(report_all, "eigen-born.cross_term_whole_abs") < tol
    assert m(report_all, "eigen-born.bump_total_error") < tol


def test_criterion_7_walker_equivariance(report_all):
    for case in ("stationary", "free"):
        assert m(report_all, f"walkers.ks_forward_{case}") < CRITERIA_BOUNDS["ks"]
        assert m(report_all, f"walkers.ks_backward_{case}") < CRITERIA_BOUNDS["ks"]
        assert m(report_all, f"walkers.within_3se_fraction_{case}") >= CRITERIA_BOUNDS["within_3se"]


def test_criterion_8_double_slit(report_all):
    assert m(report_all, "double-slit.P21_conj_P12_max") < CRITERIA_BOUNDS["conj_P12"]
    assert m(report_all, "double-slit.four_term_vs_born_max") < CRITERIA_BOUNDS["four_term"]
    assert m(report_all, "double-slit.fringe_spacing_rel_err") < CRITERIA_BOUNDS["fringe_rel"]
    assert m(report_all, "double-slit.dark_ratio") < CRITERIA_BOUNDS["dark_ratio"]


def test_criterion_9_event_calculus(report_all):
    assert m(report_all, "eventcalc.entangled_identity_max") <= CRITERIA_BOUNDS["pair_identity"]
    assert m(report_all, "eventcalc.decompose_conj_max") < CRITERIA_BOUNDS["decompose"]
    assert m(report_all, "eventcalc.hyper_truth_table") == 1.0


def test_criterion_10_spin_algebra(report_all):
    tol = CRITERIA_BOUNDS["spin"]
    assert m(report_all, "spin.orthonormality_table_err") <= tol
    assert m(report_all, "spin.up_amplitude_err") <= tol
    assert m(report_all, "spin.exclusivity_total_minus_one") == 0.0
    assert m(report_all, "spin.global_phase_err") <= tol


def test_criterion_11_classical_limit(report_all):
    assert m(report_all, "walkers.roughness_mass_scaling_rel_err") < CRITERIA_BOUNDS["roughness_rel"]
    assert m(report_all, "hydro.u_mass_scaling_rel_err") < CRITERIA_BOUNDS["u_scaling"]


def test_criterion_12_determinism(report_all, report_all_threads8):
    assert report_all["metrics"] == report_all_threads8["metrics"]
    assert report_all["exit_code"] == 0

"""The acceptance suite at desk scale, one criterion per test.

Each test prints a pass/fail line with the measured value and its pinned
tolerance (visible with pytest -s or in the captured output on failure).
"""
from catflow import acceptance


def _report(res):
    rec = res.record
    verdict = "PASS" if rec.passed else "FAIL"
    print(f"[criterion {rec.name}] {verdict} value={rec.value:.6g} "
          f"tolerance={rec.tolerance:.6g} ({rec.seconds:.2f}s) {rec.detail}")
    assert rec.passed, f"{rec.name}: value={rec.value!r} tol={rec.tolerance!r} {rec.detail}"


def test_criterion_1_one_dimensional_oracle():
    _report(acceptance.criterion_1())


def test_criterion_2_refinement_convergence():
    _report(acceptance.criterion_2())


def test_criterion_3_shortness_half_pi():
    _report(acceptance.criterion_3())


def test_criterion_4_strict_contraction_trend():
    _report(acceptance.criterion_4())


def test_criterion_5_distance_estimates():
    _report(acceptance.criterion_5())


def test_criterion_6_evi_negative_control():
    _report(acceptance.criterion_6())


def test_criterion_7_glued_pipeline():
    _report(acceptance.criterion_7())


def test_criterion_8_diagonal_pipeline():
    _report(acceptance.criterion_8())


def test_criterion_9_cone_pipeline():
    _report(acceptance.criterion_9())


def test_criterion_10_glued_engine():
    _report(acceptance.criterion_10())


def test_criterion_11_determinism(tmp_path):
    _report(acceptance.criterion_11(workdir=tmp_path))

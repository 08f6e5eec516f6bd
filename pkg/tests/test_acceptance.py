"""End-to-end acceptance gate: one check and one printed verdict per criterion."""

from qushadow import verify


def report(tag, result):
    print(f"[{tag}] {'PASS' if result.passed else 'FAIL'}: {result.details}")
    assert result.passed, result.details


def test_a1_projector_norms():
    report("A1", verify.check_projector_norms())


def test_a2_diagonal_observable_law():
    report("A2", verify.check_diagonal_law())


def test_a3_local_weyl_norms():
    report("A3", verify.check_local_weyl())


def test_a4_random_observable_bounds():
    report("A4", verify.check_random_observable_bounds())


def test_a5_tableau_against_dense():
    report("A5", verify.check_tableau())
    assert not verify.check_tableau(fault=1).passed


def test_a6_gadget_against_dense():
    report("A6", verify.check_gadget())


def test_a7_ghz_mse(ghz_workload):
    report("A7", verify.check_ghz_mse())


def test_a8_clifford_sampler():
    report("A8", verify.check_sampler())


def test_a9_moment_identities():
    report("A9", verify.check_moments())


def test_a10_median_of_means(ghz_workload):
    report("A10", verify.check_median_of_means())

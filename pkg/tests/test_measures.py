import math

import numpy as np
import pytest

from esdlab.channels import (
    DephasingRates,
    apply_channel,
    evolve_global_closed_form,
    evolve_local_x_state,
    global_kraus,
    local_kraus,
)
from esdlab.measures import (
    ConcurrenceResult,
    EsdClass,
    EsdReport,
    concurrence_curve,
    concurrence_general,
    concurrence_x_state,
    esd_time_global,
    esd_time_local,
    esd_time_numeric,
    is_separable,
    negativity,
    partial_transpose,
)
from esdlab.qmat import (
    as_x_state,
    bell_state,
    embed,
    random_density_matrix,
    random_unitary2,
    random_x_state,
    werner_state,
    x_state,
)

HALF_LN2 = 0.5 * math.log(2)


@pytest.mark.parametrize("kind", ["phi+", "phi-", "psi+", "psi-"])
def test_bell_states_are_maximally_entangled(kind):
    rho = embed(bell_state(kind))
    assert concurrence_general(rho).value == pytest.approx(1, abs=1e-12)
    assert concurrence_x_state(bell_state(kind)).value == 1
    assert not is_separable(rho)
    assert negativity(rho) == pytest.approx(0.5, abs=1e-12)


def test_bell_partial_transpose_spectrum():
    pt = partial_transpose(embed(bell_state("phi+")))
    vals = np.sort(np.linalg.eigvalsh(pt))
    np.testing.assert_allclose(vals, [-0.5, 0.5, 0.5, 0.5], atol=1e-15)


def test_maximally_mixed_is_separable():
    rho = np.eye(4) / 4
    assert concurrence_general(rho).value == 0
    assert is_separable(rho)
    assert negativity(rho) == 0


def test_diagonal_state_separable():
    x = x_state(0.1, 0.2, 0.3, 0.4)
    assert concurrence_x_state(x).value == 0
    assert concurrence_x_state(x).branch is None
    assert negativity(embed(x)) == 0


def test_pure_product_state_has_zero_concurrence():
    # defective spin-flip product; exercises the Hermitian fallback
    v = np.kron([1, 0], [math.cos(0.3), math.sin(0.3)])
    assert concurrence_general(np.outer(v, v)).value == pytest.approx(0, abs=1e-8)


def test_reference_states_start_at_one_third(case_one, case_two):
    r = concurrence_x_state(case_one)
    assert r.value == pytest.approx(1 / 3, abs=1e-15) and r.branch == "w"
    assert concurrence_x_state(case_two).value == pytest.approx(1 / 3, abs=1e-15)
    assert concurrence_general(embed(case_one)).value == pytest.approx(1 / 3, abs=1e-12)


def test_case_two_exponential_branch(case_two):
    for gt in np.linspace(0, 2, 21):
        c = concurrence_x_state(evolve_global_closed_form(case_two, gt, 1.0)).value
        assert c == pytest.approx(math.exp(-2 * gt) / 3, abs=1e-12)


@pytest.mark.parametrize("p, expected", [(0, 0), (1 / 3, 0), (0.5, 0.25), (1, 1)])
def test_werner_concurrence(p, expected):
    x = werner_state(p)
    assert concurrence_x_state(x).value == pytest.approx(expected, abs=1e-15)
    assert concurrence_general(embed(x)).value == pytest.approx(expected, abs=1e-8)


def test_x_state_lambdas_match_general(rng):
    for _ in range(50):
        x = random_x_state(rng)
        a = concurrence_x_state(x).lambdas
        b = concurrence_general(embed(x)).lambdas
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_concurrence_oracle_equivalence(rng):
    worst = max(abs(concurrence_general(embed(x)).value - concurrence_x_state(x).value)
                for x in (random_x_state(rng) for _ in range(1000)))
    assert worst <= 1e-8


def test_concurrence_range_on_general_states(rng):
    for rank in (1, 2, 4):
        for _ in range(50):
            c = concurrence_general(random_density_matrix(rng, rank)).value
            assert 0 <= c <= 1


def test_local_unitary_invariance(rng):
    for _ in range(100):
        rho = random_density_matrix(rng, rank=int(rng.integers(1, 5)))
        u = np.kron(random_unitary2(rng), random_unitary2(rng))
        rotated = u @ rho.m @ u.conj().T
        assert concurrence_general(rotated).value == pytest.approx(
            concurrence_general(rho).value, abs=1e-9)


def test_zero_set_agreement(rng):
    for _ in range(1000):
        rho = embed(random_x_state(rng))
        c = concurrence_general(rho).value > 1e-9
        n = negativity(rho) > 1e-9
        assert c == n == (not is_separable(rho))


def test_negativity_positive_iff_concurrence_positive_general(rng):
    for _ in range(200):
        rho = random_density_matrix(rng, rank=2)
        assert (negativity(rho) > 1e-9) == (concurrence_general(rho).value > 1e-9)


def test_monotone_decay_along_both_models(rng):
    grid = np.linspace(0, 4, 81)
    for _ in range(30):
        x = random_x_state(rng)
        for rates in (DephasingRates.local(0.6, 1.4), DephasingRates.global_(1.0)):
            if rates.model == "global":
                x = x.replace(z=0)
            values = [concurrence_curve(x, rates)(t).value for t in grid]
            assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))


# --- sudden death times ----------------------------------------------------

def test_global_death_time_case_one(case_one):
    report = esd_time_global(case_one, 1.0)
    assert report.classification is EsdClass.FINITE_DEATH
    assert report.binding_branch == "w"
    assert report.t_c == pytest.approx(HALF_LN2, abs=1e-12)
    assert esd_time_global(case_one, 2.0).t_c == pytest.approx(HALF_LN2 / 2, abs=1e-12)


def test_global_case_two_is_asymptotic(case_two):
    assert esd_time_global(case_two, 1.0).classification is EsdClass.ASYMPTOTIC_ONLY


def test_global_already_separable():
    x = x_state(0.25, 0.25, 0.25, 0.25)
    report = esd_time_global(x, 1.0)
    assert report.classification is EsdClass.ALREADY_SEPARABLE and report.t_c is None
    # boundary |w| = sqrt(bc) counts as already separable
    boundary = x_state(0.25, 0.25, 0.25, 0.25, w=0.25)
    assert esd_time_global(boundary, 1.0).classification is EsdClass.ALREADY_SEPARABLE


def test_global_rejects_z_branch():
    with pytest.raises(ValueError, match="decoherence-free"):
        esd_time_global(x_state(0.25, 0.25, 0.25, 0.25, w=0.1, z=0.1), 1.0)
    with pytest.raises(ValueError):
        esd_time_global(x_state(0.25, 0.25, 0.25, 0.25, w=0.1), 0.0)


def test_local_death_times(case_one):
    r = esd_time_local(case_one, 1.0, 1.0)
    assert r.classification is EsdClass.FINITE_DEATH
    assert r.t_c == pytest.approx(math.log(2), abs=1e-12)
    one_sided = esd_time_local(case_one, 1.0, 0.0)
    assert one_sided.t_c == pytest.approx(2 * math.log(2), abs=1e-12)
    assert one_sided.t_c > r.t_c > esd_time_global(case_one, 1.0).t_c


def test_local_bell_is_asymptotic():
    r = esd_time_local(bell_state("phi+"), 1.0, 1.0)
    assert r.classification is EsdClass.ASYMPTOTIC_ONLY and r.binding_branch == "w"
    r = esd_time_local(bell_state("psi-"), 1.0, 0.5)
    assert r.classification is EsdClass.ASYMPTOTIC_ONLY and r.binding_branch == "z"


def test_local_werner_dies_on_z_branch():
    x = werner_state(0.8)
    r = esd_time_local(x, 1.0, 1.0)
    # |z| e^{-t} = sqrt(ad) -> t = ln(0.4 / 0.05)
    assert r.binding_branch == "z"
    assert r.t_c == pytest.approx(math.log(0.4 / 0.05), abs=1e-12)


def test_local_picks_the_later_branch():
    x = x_state(0.3, 0.2, 0.2, 0.3, w=0.29, z=0.195)
    r = esd_time_local(x, 1.0, 1.0)
    t_w, t_z = math.log(0.29 / 0.2), math.log(0.195 / 0.3)
    assert t_z < 0  # z branch not entangled
    assert r.t_c == pytest.approx(t_w, abs=1e-12)
    with pytest.raises(ValueError):
        esd_time_local(x, 0.0, 0.0)


def test_numeric_matches_global_closed_form(case_one):
    rates = DephasingRates.global_(1.0)
    r = esd_time_numeric(concurrence_curve(case_one, rates), 10.0, 1e-6)
    assert r.classification is EsdClass.FINITE_DEATH
    assert abs(r.t_c - HALF_LN2) <= 1e-6
    assert r.binding_branch == "w"


def test_numeric_one_sided_local_from_kraus_channel(case_one):
    # oracle path: operator-sum evolution of the full matrix
    def curve(t):
        return concurrence_general(apply_channel(local_kraus(t, 1.0, 0.0), embed(case_one)))
    r = esd_time_numeric(curve, 10.0, 1e-7, zero_tol=1e-9)
    assert abs(r.t_c - 2 * math.log(2)) <= 1e-6


def test_numeric_case_two_asymptotic(case_two):
    curve = concurrence_curve(case_two, DephasingRates.global_(1.0))
    assert esd_time_numeric(curve, 20.0, 1e-6).classification is EsdClass.ASYMPTOTIC_ONLY


def test_numeric_constant_zero_curve():
    r = esd_time_numeric(lambda t: 0.0, 5.0, 1e-6)
    assert r.classification is EsdClass.ALREADY_SEPARABLE and r.t_c is None


def test_numeric_rejects_bad_arguments():
    with pytest.raises(ValueError):
        esd_time_numeric(lambda t: 0.0, 5.0, 0.0)
    with pytest.raises(ValueError):
        esd_time_numeric(lambda t: 0.0, -1.0, 1e-6)


def test_esd_report_invariants():
    with pytest.raises(ValueError):
        EsdReport(EsdClass.FINITE_DEATH)
    with pytest.raises(ValueError):
        EsdReport(EsdClass.ASYMPTOTIC_ONLY, t_c=1.0)
    with pytest.raises(ValueError):
        EsdReport(EsdClass.FINITE_DEATH, t_c=0.0)


def test_esd_consistency_on_random_states(rng):
    checked = 0
    for _ in range(500):
        x = random_x_state(rng)
        ga, gb = rng.uniform(0, 2, size=2)
        cases = [(esd_time_local(x, ga, gb), lambda t: evolve_local_x_state(x, t, ga, gb))]
        xg = x.replace(z=0)
        cases.append((esd_time_global(xg, 1.3), lambda t: evolve_global_closed_form(xg, t, 1.3)))
        for report, at in cases:
            if not report.finite or report.t_c < 1e-3:
                continue
            assert concurrence_x_state(at(report.t_c)).value <= 1e-12
            assert concurrence_x_state(at(report.t_c * (1 + 1e-6))).value <= 1e-12
            assert concurrence_x_state(at(report.t_c * (1 - 1e-3))).value > 0
            assert concurrence_x_state(at(report.t_c / 2)).value > 0
            checked += 1
    assert checked > 100


def test_concurrence_result_float():
    r = ConcurrenceResult(0.25, (1.0, 0.0, 0.0, 0.0))
    assert float(r) == 0.25
    assert r.sqrt_lambdas == (1.0, 0.0, 0.0, 0.0)


def test_physicality_along_channel_curves(case_one):
    for gt in np.linspace(0, 3, 31):
        for k in (global_kraus(gt, 1.0), local_kraus(gt, 1.0, 0.0)):
            out = apply_channel(k, embed(case_one))
            assert as_x_state(out) is not None

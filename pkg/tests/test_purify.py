import numpy as np
import pytest

from entcat import presets
from entcat.errors import HypothesisError
from entcat.purify import (KentClassState, Separability, catalyst_preserving_kraus,
                           catalyst_stabilizers, evaluate_map, fidelity_lambda_curve,
                           isotropic_noise, lambda0_bisect, min_pt_eigenvalue,
                           partial_transpose, ppt_separability, random_separable_attack,
                           random_separable_kraus, trial_rng)
from entcat.qcore import DensityMatrix, KrausPair, PureState, check_kraus, random_density

BELL = presets.bell_state()


def swap(d):
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1
    return s


def test_partial_transpose_of_bell():
    pt = partial_transpose(BELL.density().matrix, 2, 2)
    assert np.allclose(np.sort(np.linalg.eigvalsh(pt)), [-0.5, 0.5, 0.5, 0.5])
    assert min_pt_eigenvalue(BELL.density()) == pytest.approx(-0.5)


def test_ppt_verdicts():
    assert ppt_separability(BELL.density()) is Separability.ENTANGLED
    assert ppt_separability(DensityMatrix(np.eye(4) / 4, 2, 2)) is Separability.SEPARABLE
    # PPT is only a certificate of separability up to 2x3
    assert ppt_separability(DensityMatrix(np.eye(9) / 9, 3, 3)) is Separability.INCONCLUSIVE


def test_lambda0_of_bell_with_isotropic_noise():
    # lam |B><B| + (1 - lam)(1 - |B><B|)/3 is separable exactly when lam <= 1/2
    l0 = lambda0_bisect(BELL, isotropic_noise(BELL))
    assert l0.exact
    assert l0.value <= 0.5 <= l0.upper
    assert l0.upper - l0.value <= 1e-8


def test_lambda0_requires_orthogonal_noise():
    with pytest.raises(HypothesisError):
        lambda0_bisect(BELL, DensityMatrix(np.eye(4) / 4, 2, 2))


def test_kent_state_input_fidelity():
    st = KentClassState.build(0.7, BELL, isotropic_noise(BELL), 0.5)
    assert st.input_fidelity == pytest.approx(0.7, abs=1e-14)
    with pytest.raises(HypothesisError):
        KentClassState.build(1.0, BELL, isotropic_noise(BELL), 0.5)


def test_random_kraus_are_valid():
    rng = trial_rng(0, 0)
    for n in range(1, 5):
        kraus = random_separable_kraus(rng, n, 2, 3)
        check_kraus(kraus)
        total = sum(k.a_op.conj().T @ k.a_op for k in kraus)
        assert np.linalg.eigvalsh(total)[-1] == pytest.approx(1.0, abs=1e-12)


def test_trial_rng_is_keyed():
    a = trial_rng(3, 17).standard_normal(4)
    b = trial_rng(3, 17).standard_normal(4)
    c = trial_rng(3, 18).standard_normal(4)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_catalyst_stabilizers_fix_catalyst():
    rng = np.random.default_rng(0)
    for omega in (BELL, presets.catalyst_state()):
        u, v = catalyst_stabilizers(omega, rng)
        assert np.allclose(np.kron(u, v) @ omega.amplitudes, omega.amplitudes, atol=1e-12)
        assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12)


def test_catalyst_preserving_maps_are_admissible():
    rng = np.random.default_rng(1)
    sigma = random_density(2, 2, rng)
    kraus = catalyst_preserving_kraus(rng, 3, (2, 2), BELL)
    out = evaluate_map(sigma, BELL, kraus, BELL)
    assert out.mixture_admissible
    assert all(out.admissible)


def test_swap_consumes_catalyst_and_is_flagged():
    # swapping the main system with the catalyst is separable, hits fidelity 1,
    # and is only ruled out because the catalyst does not come back
    st = KentClassState.build(0.5, BELL, isotropic_noise(BELL), 0.5)
    pair = KrausPair(swap(2), swap(2))
    out = evaluate_map(st.sigma, BELL, [pair], BELL)
    assert out.mixture_fidelity == pytest.approx(1.0)
    assert not out.mixture_admissible


@pytest.mark.parametrize("catalyst", [None, BELL])
def test_attack_never_gains(catalyst):
    zeta = isotropic_noise(BELL)
    for lam in (0.5, 0.75):
        st = KentClassState.build(lam, BELL, zeta, 0.5)
        rep = random_separable_attack(st, catalyst, trials=300, seed=0)
        assert rep.admissible_results > 0
        assert rep.excess <= 1e-9


def test_attack_ppt_outputs_at_threshold():
    st = KentClassState.build(0.5, BELL, isotropic_noise(BELL), 0.5)
    rep = random_separable_attack(st, None, trials=200, seed=2, check_ppt=True)
    assert rep.ppt_violations == 0


def test_attack_records():
    st = KentClassState.build(0.5, BELL, isotropic_noise(BELL), 0.5)
    rep = random_separable_attack(st, None, trials=5, keep_records=True)
    assert {"trial", "branch_count", "prob", "fidelity_out"} <= rep.records[0].keys()
    again = random_separable_attack(st, None, trials=5, keep_records=True)
    assert [r["fidelity_out"] for r in rep.records] == [r["fidelity_out"] for r in again.records]


def test_attack_below_lambda0_rejected():
    st = KentClassState.build(0.2, BELL, isotropic_noise(BELL), 0.5)
    with pytest.raises(HypothesisError):
        random_separable_attack(st, None, trials=1)


def test_curve_sign_is_constant_for_random_maps():
    zeta = isotropic_noise(BELL)
    for i in range(20):
        rng = trial_rng(1, i)
        kraus = random_separable_kraus(rng, int(rng.integers(1, 5)), 2, 2)
        rep = fidelity_lambda_curve(kraus, BELL, zeta)
        assert rep.sign_constant


def test_curve_with_catalyst_preserving_map():
    rng = np.random.default_rng(4)
    kraus = catalyst_preserving_kraus(rng, 2, (2, 2), BELL)
    rep = fidelity_lambda_curve(kraus, BELL, isotropic_noise(BELL), omega=BELL)
    assert rep.sign_constant


def test_curve_identity_map_is_flat():
    rep = fidelity_lambda_curve([KrausPair(np.eye(2), np.eye(2))], BELL, isotropic_noise(BELL))
    assert np.allclose(rep.f, 0, atol=1e-14)
    assert rep.sign == 0 and rep.sign_constant
    assert rep.f_at_0 == pytest.approx(0) and rep.f_at_1 == pytest.approx(0)


def test_curve_grid_validation():
    with pytest.raises(ValueError):
        fidelity_lambda_curve([KrausPair(np.eye(2), np.eye(2))], BELL, isotropic_noise(BELL),
                              grid=[0.1, 0.2])

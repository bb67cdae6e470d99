import json

import numpy as np
import pytest

from conftest import OVERLAP, THETA, orthonormal, pair
from usdisc.concentration import SchmidtState, derived_states
from usdisc.ensemble import (
    StateEnsemble,
    check_independence,
    ensemble_from_json,
    gram,
    load_ensemble,
    random_ensemble,
    reciprocal_states,
)
from usdisc.errors import DependentStates, InvalidInput


def test_validation_rejects_bad_input():
    with pytest.raises(InvalidInput):
        StateEnsemble([[1, 1]], [1.0])
    with pytest.raises(InvalidInput):
        StateEnsemble([[1, 0], [0, 1]], [0.6, 0.6])
    with pytest.raises(InvalidInput):
        StateEnsemble([[1, 0], [0, 1]], [1.5, -0.5])
    with pytest.raises(InvalidInput):
        StateEnsemble([[1, 0], [0, 1]], [1.0])


def test_ensemble_is_immutable():
    ens = pair()
    with pytest.raises(ValueError):
        ens.states[0, 0] = 0
    with pytest.raises(AttributeError):
        ens.priors = np.array([1.0, 0.0])


def test_json_round_trip(tmp_path):
    ens = random_ensemble(3, np.random.default_rng(1))
    path = tmp_path / "e.json"
    path.write_text(json.dumps(ens.to_json()))
    back = load_ensemble(path)
    np.testing.assert_allclose(back.states, ens.states, atol=1e-15)
    np.testing.assert_allclose(back.priors, ens.priors, atol=1e-15)


def test_json_priors_default_uniform():
    ens = ensemble_from_json({"states": [[{"re": 1, "im": 0}, 0], [0, {"re": 0, "im": 1}]]})
    np.testing.assert_allclose(ens.priors, [0.5, 0.5])


@pytest.mark.parametrize(
    "doc",
    [
        {},
        {"states": []},
        {"states": [[1, 0], [1]]},
        {"states": [["x", 0]]},
        {"states": [[1, 0]], "priors": "uniform"},
        {"states": [[{"re": True, "im": 0}, 0]]},
    ],
)
def test_json_schema_violations(doc):
    with pytest.raises(InvalidInput):
        ensemble_from_json(doc)


def test_gram_orthonormal_pair():
    np.testing.assert_allclose(gram(orthonormal(2)), np.eye(2), atol=1e-15)


def test_gram_pair_overlap():
    g = gram(pair())
    np.testing.assert_allclose(g[0, 1], np.cos(2 * THETA), atol=1e-15)
    assert abs(g[0, 1] - 0.70711) < 1e-5


def test_gram_of_derived_states_by_direct_sum():
    c2 = np.array([0.5, 0.3, 0.2])
    g = gram(derived_states(SchmidtState.from_weights(c2)))
    n = 3
    expected = np.array(
        [[sum(c2[j] * np.exp(2j * np.pi * j * (kp - k) / n) for j in range(n)) for kp in range(n)] for k in range(n)]
    )
    np.testing.assert_allclose(g, expected, atol=1e-14)


def test_gram_invariants_random(rng):
    for _ in range(200):
        n = int(rng.integers(1, 7))
        ens = random_ensemble(n, rng, dim=int(rng.integers(n, n + 3)))
        g = gram(ens)
        assert np.array_equal(g, g.conj().T)
        np.testing.assert_allclose(np.diag(g).real, 1.0, atol=1e-9)
        assert abs(np.trace(g) - n) <= 1e-9
        assert np.linalg.eigvalsh(g)[0] >= -1e-10


def test_gram_identity_iff_orthonormal(rng):
    u = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))[0]
    ens = StateEnsemble.uniform(u.T)
    assert np.linalg.norm(gram(ens) - np.eye(4)) <= 1e-9
    skew = StateEnsemble.normalized(u.T + 1e-3 * np.roll(u.T, 1, axis=0))
    assert np.linalg.norm(gram(skew) - np.eye(4)) > 1e-9


def test_independence_examples():
    rep = check_independence(orthonormal(3))
    assert rep.independent
    assert abs(rep.smallest_eigenvalue - 1) <= 1e-12
    a, b = np.array([1, 0, 0]), np.array([0.6, 0.8, 0])
    dep = StateEnsemble.normalized([a, b, a + b])
    assert not check_independence(dep).independent


def test_derived_states_always_independent(rng):
    for _ in range(100):
        n = int(rng.integers(1, 9))
        s = SchmidtState.from_weights(rng.uniform(1e-3, 1, size=n), rng.uniform(0, 6.3, size=n))
        assert check_independence(derived_states(s)).independent


def test_independence_tolerance_is_relative():
    # smallest Gram eigenvalue is about eps^2 / 2 against a largest of 2
    eps = 1e-3
    ens = StateEnsemble.normalized([[1, 0], [1, eps]])
    assert check_independence(ens).independent
    assert not check_independence(ens, rel_tol=1e-6).independent


def test_reciprocals_of_pair():
    recip = reciprocal_states(pair())
    c, s = np.cos(THETA), np.sin(THETA)
    np.testing.assert_allclose(recip.vectors[0], [s, c], atol=1e-14)
    np.testing.assert_allclose(recip.vectors[1], [s, -c], atol=1e-14)
    np.testing.assert_allclose(recip.overlaps, np.sin(2 * THETA), atol=1e-14)
    assert abs(recip.overlaps[0] - 0.70711) < 1e-5
    np.testing.assert_allclose(recip.weights, 2.0, atol=1e-13)


def test_reciprocals_of_orthonormal_set():
    recip = reciprocal_states(orthonormal(4))
    np.testing.assert_allclose(recip.vectors, np.eye(4), atol=1e-15)
    np.testing.assert_allclose(recip.overlaps, 1.0)
    np.testing.assert_allclose(recip.weights, 1.0)


def test_reciprocal_weights_of_derived_states():
    c2 = np.array([0.5, 0.3, 0.2])
    recip = reciprocal_states(derived_states(SchmidtState.from_weights(c2)))
    big_n = np.sum(1 / c2)
    np.testing.assert_allclose(recip.weights, big_n / 9, atol=1e-12)
    np.testing.assert_allclose(recip.weights, 1.14815, atol=1e-5)


def test_biorthogonality_random(rng):
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        ens = random_ensemble(n, rng, dim=int(rng.integers(n, n + 3)))
        recip = reciprocal_states(ens)
        overlaps = recip.vectors.conj() @ ens.states.T
        off = overlaps[~np.eye(n, dtype=bool)]
        worst = max(worst, np.abs(off).max(initial=0.0))
        np.testing.assert_allclose(np.diag(overlaps).imag, 0.0, atol=1e-12)
        np.testing.assert_allclose(np.diag(overlaps).real, recip.overlaps, rtol=1e-9)
        assert np.all(recip.overlaps > 0)
        np.testing.assert_allclose(np.linalg.norm(recip.vectors, axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(recip.weights, recip.overlaps**-2, rtol=1e-14)
        # reciprocals stay inside the span
        proj = recip.basis @ recip.basis.conj().T
        assert np.linalg.norm(recip.vectors @ proj.T - recip.vectors) <= 1e-9
    assert worst <= 1e-9


def test_reciprocal_set_is_independent(rng):
    for _ in range(100):
        ens = random_ensemble(int(rng.integers(2, 6)), rng)
        recip = reciprocal_states(ens)
        assert check_independence(StateEnsemble.uniform(recip.vectors)).independent


def test_reciprocal_of_reciprocal_recovers_states(rng):
    for _ in range(200):
        n = int(rng.integers(1, 6))
        ens = random_ensemble(n, rng, dim=int(rng.integers(n, n + 2)))
        twice = reciprocal_states(StateEnsemble.uniform(reciprocal_states(ens).vectors))
        fid = np.abs(np.sum(ens.states.conj() * twice.vectors, axis=1))
        np.testing.assert_allclose(fid, 1.0, atol=1e-9)


def test_dependent_states_raise():
    with pytest.raises(DependentStates):
        reciprocal_states(StateEnsemble.normalized([[1, 0], [0, 1], [1, 1]]))
    with pytest.raises(DependentStates):
        reciprocal_states(StateEnsemble.uniform([[1, 0], [1, 0]]))


def test_zero_prior_state_is_kept():
    ens = StateEnsemble([[1, 0], [np.sqrt(0.5), np.sqrt(0.5)]], [1.0, 0.0])
    assert reciprocal_states(ens).n == 2


def test_overlap_of_pair_matches_constant():
    assert abs(abs(np.vdot(*pair().states)) - OVERLAP) < 1e-15

import numpy as np
import pytest

from latticescape.errors import (
    EigenSolverFailed,
    IndexOutOfRange,
    NotApplicable,
    OddPeriodicDual,
)
from latticescape.lattice import LatticeGeometry, to_linear
from latticescape.operators import (
    HamiltonianOperator,
    PotentialField,
    apply,
    dual_operator,
    to_dense,
)
from latticescape.random_media import Bernoulli, PotentialSpec, Uniform, generate
from latticescape.spectral import (
    check_duality,
    count_eigenvalues_below,
    dual_transform,
    eigenpairs,
    mirror_spectrum_check,
)


def _const_H(side, c, bc="periodic", dim=1):
    geom = LatticeGeometry(dim, side, bc)
    return geom, HamiltonianOperator(geom, PotentialField(geom, np.full(geom.n_sites, c), c))


def _random_H(geom, seed, v_max=5.0):
    field = generate(PotentialSpec(Uniform(v_max), seed=seed), geom)
    return HamiltonianOperator(geom, field)


def test_constant_potential_lowest_pair():
    geom, H = _const_H(10, 3.0)
    (pair,) = eigenpairs(H, lowest=1)
    assert pair.mu == pytest.approx(3.0, abs=1e-10)
    np.testing.assert_allclose(pair.phi, np.full(10, 1 / np.sqrt(10)), atol=1e-10)
    assert pair.ordinal == 1
    assert pair.residual <= 1e-10


def test_constant_potential_full_spectrum_k4():
    geom, H = _const_H(4, 2.0)
    mus = [p.mu for p in eigenpairs(H, lowest=4)]
    np.testing.assert_allclose(mus, [2.0, 4.0, 4.0, 6.0], atol=1e-10)


def test_bernoulli_spectrum_bound():
    geom = LatticeGeometry(1, 300, "dirichlet")
    field = generate(PotentialSpec(Bernoulli(0.0, 5.0, 0.7), seed=17), geom)
    H = HamiltonianOperator(geom, field)
    mus = np.linalg.eigvalsh(to_dense(H))
    assert mus.min() >= -1e-9
    assert mus.max() <= 9.0 + 1e-9


def test_orthonormality_and_rayleigh():
    geom = LatticeGeometry(1, 60, "periodic")
    H = _random_H(geom, 3)
    pairs = eigenpairs(H, lowest=6)
    for i, p in enumerate(pairs):
        assert abs(np.linalg.norm(p.phi) - 1.0) < 1e-10
        assert abs(p.mu - float(p.phi @ apply(H, p.phi))) <= 1e-7
        for q in pairs[i + 1 :]:
            assert abs(p.phi @ q.phi) <= 1e-8


def test_sign_convention():
    geom = LatticeGeometry(1, 50, "dirichlet")
    H = _random_H(geom, 4)
    for p in eigenpairs(H, lowest=4):
        assert p.phi[np.argmax(np.abs(p.phi))] > 0


def test_ordinal_selections():
    geom = LatticeGeometry(1, 30, "dirichlet")
    H = _random_H(geom, 5)
    full = np.linalg.eigvalsh(to_dense(H))
    pairs = eigenpairs(H, ordinals=[2, 7, 30])
    assert [p.ordinal for p in pairs] == [2, 7, 30]
    for p in pairs:
        assert p.mu == pytest.approx(full[p.ordinal - 1], abs=1e-9)
    top = eigenpairs(H, highest=3)
    assert [p.ordinal for p in top] == [28, 29, 30]


def test_iterative_path_matches_dense():
    geom = LatticeGeometry(1, 40, "dirichlet")
    H = _random_H(geom, 6)
    dense = eigenpairs(H, lowest=4)
    iterative = eigenpairs(H, lowest=4, dense_cutoff=10)
    for a, b in zip(dense, iterative):
        assert a.mu == pytest.approx(b.mu, abs=1e-8)
        assert min(np.max(np.abs(a.phi - b.phi)), np.max(np.abs(a.phi + b.phi))) < 1e-6
    top_dense = eigenpairs(H, highest=2)
    top_iter = eigenpairs(H, highest=2, dense_cutoff=10)
    for a, b in zip(top_dense, top_iter):
        assert a.mu == pytest.approx(b.mu, abs=1e-8)


def test_interior_ordinal_via_counting_matches_dense():
    geom = LatticeGeometry(1, 40, "dirichlet")
    H = _random_H(geom, 8)
    full = np.linalg.eigvalsh(to_dense(H))
    (pair,) = eigenpairs(H, ordinals=[17], dense_cutoff=10)
    assert pair.mu == pytest.approx(full[16], abs=1e-8)


def test_interior_ordinal_via_mirror_matches_dense():
    geom = LatticeGeometry(1, 40, "periodic")
    H = _random_H(geom, 9)
    full = np.linalg.eigvalsh(to_dense(H))
    (pair,) = eigenpairs(H, ordinals=[38], dense_cutoff=10)
    assert pair.mu == pytest.approx(full[37], abs=1e-8)
    assert pair.residual <= 1e-8


def test_count_eigenvalues_below():
    geom = LatticeGeometry(1, 25, "dirichlet")
    H = _random_H(geom, 7)
    full = np.linalg.eigvalsh(to_dense(H))
    for sigma in (0.5, 2.0, full[10] + 1e-12):
        assert count_eigenvalues_below(H, sigma) == int(np.sum(full < sigma))


def test_count_large_periodic_not_applicable():
    geom = LatticeGeometry(1, 2500, "periodic")
    field = generate(PotentialSpec(Bernoulli(0.0, 5.0, 0.7), seed=0), geom)
    H = HamiltonianOperator(geom, field)
    with pytest.raises(NotApplicable):
        count_eigenvalues_below(H, 1.0)


def test_selection_validation():
    geom, H = _const_H(10, 1.0)
    with pytest.raises(IndexOutOfRange):
        eigenpairs(H, ordinals=[0])
    with pytest.raises(IndexOutOfRange):
        eigenpairs(H, ordinals=[11])
    with pytest.raises(ValueError):
        eigenpairs(H, lowest=2, highest=2)
    with pytest.raises(ValueError):
        eigenpairs(H)


def test_dual_transform_examples():
    g4 = LatticeGeometry(1, 4, "periodic")
    np.testing.assert_array_equal(dual_transform(g4, np.ones(4)), [-1, 1, -1, 1])
    rng = np.random.default_rng(0)
    phi = rng.standard_normal(4)
    np.testing.assert_array_equal(dual_transform(g4, dual_transform(g4, phi)), phi)
    np.testing.assert_array_equal(np.abs(dual_transform(g4, phi)), np.abs(phi))

    g2 = LatticeGeometry(2, 4, "periodic")
    e11 = np.zeros(16)
    e11[to_linear(g2, (1, 1))] = 1.0
    np.testing.assert_array_equal(dual_transform(g2, e11), e11)


def test_dual_transform_odd_periodic_rejected():
    g = LatticeGeometry(1, 5, "periodic")
    with pytest.raises(OddPeriodicDual):
        dual_transform(g, np.ones(5))
    gd = LatticeGeometry(1, 5, "dirichlet")
    assert dual_transform(gd, np.ones(5)).tolist() == [-1, 1, -1, 1, -1]


def test_check_duality_even_periodic():
    geom = LatticeGeometry(1, 10, "periodic")
    H = _random_H(geom, 12)
    pairs = eigenpairs(H, lowest=10)
    results = check_duality(H, pairs)
    assert len(results) == 10
    assert all(r.passed for r in results)


def test_check_duality_dirichlet_odd_side():
    geom = LatticeGeometry(1, 9, "dirichlet")
    H = _random_H(geom, 13)
    pairs = eigenpairs(H, lowest=9)
    assert all(r.passed for r in check_duality(H, pairs))


def test_mirror_spectrum_dense():
    geom = LatticeGeometry(1, 10, "periodic")
    H = _random_H(geom, 14)
    assert mirror_spectrum_check(H).passed


def test_self_dual_spectrum_symmetric():
    geom, H = _const_H(8, 2.5)
    H = HamiltonianOperator(geom, PotentialField(geom, np.full(8, 2.5), 5.0))
    mus = np.linalg.eigvalsh(to_dense(H))
    center = 2 * geom.dim + 2.5
    np.testing.assert_allclose(mus + mus[::-1], np.full(8, 2 * center), atol=1e-10)

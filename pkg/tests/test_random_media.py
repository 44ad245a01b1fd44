import numpy as np
import pytest

from latticescape.errors import DimensionMismatch, InvalidPotential
from latticescape.lattice import LatticeGeometry
from latticescape.random_media import (
    Bernoulli,
    Constant,
    FromFile,
    PotentialSpec,
    Uniform,
    generate,
)


def test_same_seed_is_bit_identical():
    g = LatticeGeometry(1, 64, "periodic")
    spec = PotentialSpec(Bernoulli(0.0, 5.0, 0.7), seed=99)
    a = generate(spec, g)
    b = generate(spec, g)
    assert np.array_equal(a.values, b.values)
    assert a.v_max == b.v_max == 5.0


def test_bernoulli_values_and_empirical_fraction():
    g = LatticeGeometry(1, 300, "dirichlet")
    field = generate(PotentialSpec(Bernoulli(0.0, 5.0, 0.7), seed=0), g)
    assert set(np.unique(field.values)) <= {0.0, 5.0}
    frac = np.mean(field.values == 0.0)
    assert 0.6 <= frac <= 0.8


def test_bernoulli_four_sigma_sanity():
    g = LatticeGeometry(1, 400, "periodic")
    p = 0.7
    sigma = np.sqrt(p * (1 - p) / g.n_sites)
    for seed in range(10):
        field = generate(PotentialSpec(Bernoulli(0.0, 5.0, p), seed=seed), g)
        assert abs(np.mean(field.values == 0.0) - p) <= 4 * sigma


def test_constant_field():
    g = LatticeGeometry(2, 4, "dirichlet")
    field = generate(PotentialSpec(Constant(3.0), seed=1), g)
    assert np.all(field.values == 3.0)
    assert field.v_max == 3.0


def test_uniform_range():
    g = LatticeGeometry(1, 500, "periodic")
    field = generate(PotentialSpec(Uniform(5.0), seed=5), g)
    assert field.values.min() >= 0.0
    assert field.values.max() <= 5.0
    assert field.v_max == 5.0


def test_periodic_all_zero_draw_is_repaired():
    g = LatticeGeometry(1, 20, "periodic")
    # p_low = 1 forces an identically-zero draw, which must be repaired
    field = generate(PotentialSpec(Bernoulli(0.0, 5.0, 1.0), seed=3), g)
    assert np.count_nonzero(field.values) == 1
    assert field.values.max() == 5.0
    again = generate(PotentialSpec(Bernoulli(0.0, 5.0, 1.0), seed=3), g)
    assert np.array_equal(field.values, again.values)


def test_dirichlet_all_zero_draw_is_kept():
    g = LatticeGeometry(1, 20, "dirichlet")
    field = generate(PotentialSpec(Bernoulli(0.0, 5.0, 1.0), seed=3), g)
    assert not field.values.any()


def test_constant_zero_periodic_rejected():
    g = LatticeGeometry(1, 5, "periodic")
    with pytest.raises(InvalidPotential):
        generate(PotentialSpec(Constant(0.0), seed=0), g)
    gd = LatticeGeometry(1, 5, "dirichlet")
    assert generate(PotentialSpec(Constant(0.0), seed=0), gd).values.tolist() == [0.0] * 5


def test_invalid_parameters():
    with pytest.raises(InvalidPotential):
        Bernoulli(5.0, 5.0, 0.5)
    with pytest.raises(InvalidPotential):
        Bernoulli(0.0, 5.0, 1.5)
    with pytest.raises(InvalidPotential):
        Uniform(0.0)
    with pytest.raises(InvalidPotential):
        Constant(-1.0)


def test_from_file_plain_text(tmp_path):
    g = LatticeGeometry(1, 5, "dirichlet")
    path = tmp_path / "field.txt"
    path.write_text("\n".join(str(x) for x in [0.5, 1.5, 0.0, 2.0, 1.0]) + "\n")
    field = generate(PotentialSpec(FromFile(path), seed=0), g)
    assert field.values.tolist() == [0.5, 1.5, 0.0, 2.0, 1.0]
    assert field.v_max == 2.0


def test_from_file_csv_column(tmp_path):
    g = LatticeGeometry(1, 3, "dirichlet")
    path = tmp_path / "field.csv"
    path.write_text("linear_index,v,u\n0,1.0,9\n1,0.5,9\n2,2.5,9\n")
    field = generate(PotentialSpec(FromFile(path), seed=0), g)
    assert field.values.tolist() == [1.0, 0.5, 2.5]


def test_from_file_length_mismatch(tmp_path):
    g = LatticeGeometry(1, 5, "dirichlet")
    path = tmp_path / "short.txt"
    path.write_text("1.0\n2.0\n")
    with pytest.raises(DimensionMismatch):
        generate(PotentialSpec(FromFile(path), seed=0), g)


def test_from_file_all_zero_periodic_rejected(tmp_path):
    g = LatticeGeometry(1, 3, "periodic")
    path = tmp_path / "zeros.txt"
    path.write_text("0\n0\n0\n")
    with pytest.raises(InvalidPotential):
        generate(PotentialSpec(FromFile(path), seed=0), g)

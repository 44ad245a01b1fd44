import math

import numpy as np
import pytest

from latticescape.agmon import AgmonField, agmon_field
from latticescape.errors import HypothesisNotMet, InvalidAlpha
from latticescape.landscape import solve_landscape
from latticescape.lattice import BoundaryCondition, LatticeGeometry
from latticescape.operators import (
    HamiltonianOperator,
    PotentialField,
    antiperiodic_apply_1d,
    apply,
    inner,
)
from latticescape.random_media import Bernoulli, PotentialSpec, generate
from latticescape.report import CheckKind
from latticescape.spectral import eigenpairs
from latticescape.verify import (
    DecayBoundParams,
    agmon_test_function,
    calibrate_decay_params,
    check_decay_bound,
    check_eigen_identity,
    check_green,
    check_lipschitz,
    check_max_principle,
    check_uncertainty,
    decay_profile,
    estimate_C_abs,
)


def _bernoulli_setup(bc="periodic", side=80, seed=5):
    geom = LatticeGeometry(1, side, bc)
    field = generate(PotentialSpec(Bernoulli(0.0, 5.0, 0.7), seed=seed), geom)
    H = HamiltonianOperator(geom, field)
    return geom, H, solve_landscape(H)


def _const_setup(c=3.0, side=12):
    geom = LatticeGeometry(1, side, "periodic")
    H = HamiltonianOperator(geom, PotentialField(geom, np.full(side, c), c))
    return geom, H, solve_landscape(H)


# ---------------------------------------------------------------- green


@pytest.mark.parametrize("bc", ["periodic", "dirichlet"])
def test_check_green_random(bc):
    geom = LatticeGeometry(2, 16, bc)
    rng = np.random.default_rng(1)
    for _ in range(5):
        r = check_green(geom, rng.standard_normal(geom.n_sites), rng.standard_normal(geom.n_sites))
        assert r.passed and r.kind == CheckKind.IDENTITY


def test_check_green_constant_zero():
    geom = LatticeGeometry(2, 5, "periodic")
    c = np.full(geom.n_sites, 2.0)
    r = check_green(geom, c, c)
    assert r.passed and abs(r.lhs) < 1e-12 and abs(r.rhs) < 1e-12


# ---------------------------------------------------------------- max principle


def test_max_principle_on_landscape():
    geom, H, ls = _bernoulli_setup()
    assert check_max_principle(H, ls.u).passed
    # test function for the lower bound: H(u - 1/V_max) = 1 - v/V_max >= 0,
    # up to the landscape solve residual
    r = check_max_principle(H, ls.u - 1.0 / 5.0, tol=10 * ls.residual_inf + 1e-12)
    assert r.passed and r.info["applicable"]


def test_max_principle_antiperiodic_counterexample():
    f = np.array([-1.0, 1.0, 3.0])
    out = antiperiodic_apply_1d(np.zeros(3), f)
    assert out.tolist() == [0.0, 0.0, 4.0]
    r = check_max_principle(lambda x: antiperiodic_apply_1d(np.zeros(3), x), f)
    assert not r.passed
    assert r.witness == 0
    assert r.info["min_site_value"] == -1.0


def test_max_principle_vacuous_when_Hf_negative():
    geom, H, ls = _bernoulli_setup()
    f = -ls.u
    r = check_max_principle(H, f)
    assert r.passed and not r.info["applicable"]


# ---------------------------------------------------------------- uncertainty


@pytest.mark.parametrize("bc", ["periodic", "dirichlet"])
def test_uncertainty_identity_random(bc):
    geom, H, ls = _bernoulli_setup(bc=bc)
    rng = np.random.default_rng(2)
    for _ in range(5):
        ident, ineq = check_uncertainty(H, ls, rng.standard_normal(geom.n_sites),
                                        rng.standard_normal(geom.n_sites))
        assert ident.passed and ident.kind == CheckKind.IDENTITY
        assert ineq.passed


def test_uncertainty_with_landscape_itself():
    geom, H, ls = _bernoulli_setup()
    ident, ineq = check_uncertainty(H, ls, ls.u, ls.u)
    assert ident.passed and ineq.passed


def test_uncertainty_saturates_for_constant_potential():
    geom, H, ls = _const_setup(c=3.0, side=12)
    ident, ineq = check_uncertainty(H, ls, ls.u, ls.u)
    assert ident.passed
    # u constant: the gradient term vanishes, so both sides equal N/c
    assert abs(ineq.slack) <= 1e-12 * max(abs(ineq.lhs), 1.0)
    assert ineq.lhs == pytest.approx(geom.n_sites / 3.0, rel=1e-10)
    assert ineq.rhs == pytest.approx(geom.n_sites / 3.0, rel=1e-10)


# ---------------------------------------------------------------- eigen identity


def test_eigen_identity_constant_g_makes_rhs_vanish():
    geom, H, ls = _bernoulli_setup(side=60, seed=6)
    (pair,) = eigenpairs(H, lowest=1)
    ident, ineq = check_eigen_identity(H, ls, pair, np.ones(geom.n_sites))
    assert abs(ident.rhs) < 1e-12
    assert ident.passed and ineq.passed


@pytest.mark.parametrize("bc", ["periodic", "dirichlet"])
def test_eigen_identity_random_g(bc):
    geom, H, ls = _bernoulli_setup(bc=bc, side=60, seed=7)
    pairs = eigenpairs(H, lowest=3)
    rng = np.random.default_rng(3)
    for pair in pairs:
        for _ in range(3):
            ident, ineq = check_eigen_identity(H, ls, pair, rng.standard_normal(geom.n_sites))
            assert ident.passed and ineq.passed


def test_eigen_identity_theorem_test_function():
    geom, H, ls = _bernoulli_setup(side=60, seed=8)
    (pair,) = eigenpairs(H, lowest=1)
    af = agmon_field(ls, pair.mu, 0.01, geom)
    g = agmon_test_function(af.h, 0.3)
    ident, ineq = check_eigen_identity(H, ls, pair, g)
    assert ident.passed and ineq.passed


def test_eigen_identity_constant_potential_exact():
    geom, H, ls = _const_setup(c=2.0, side=10)
    (pair,) = eigenpairs(H, lowest=1)
    ident, ineq = check_eigen_identity(H, ls, pair, np.full(geom.n_sites, 1.3))
    assert abs(ident.lhs) < 1e-10 and abs(ident.rhs) < 1e-20
    assert ident.passed and ineq.passed


# ---------------------------------------------------------------- lipschitz


def test_lipschitz_on_computed_field():
    geom, H, ls = _bernoulli_setup(side=100, seed=9)
    (pair,) = eigenpairs(H, lowest=1)
    af = agmon_field(ls, pair.mu, 0.01, geom)
    r = check_lipschitz(af, geom)
    assert r.passed
    assert r.lhs <= 1e-12  # max violation over edges


def test_lipschitz_negative_control():
    geom = LatticeGeometry(1, 5, "dirichlet")
    # zero weights force equal h on neighbors; a hand-built ramp violates that
    fake = AgmonField(
        mu=0.0,
        delta=0.1,
        w=np.zeros(5),
        wells=np.array([0]),
        component_label=np.array([0, -1, -1, -1, -1]),
        h=np.array([0.0, 1.0, 2.0, 3.0, 4.0]),
        is_dual=False,
    )
    r = check_lipschitz(fake, geom)
    assert not r.passed
    assert r.witness is not None


# ---------------------------------------------------------------- decay params


def test_estimate_c_abs_vacuous():
    geom = LatticeGeometry(1, 6, "periodic")
    af = AgmonField(
        mu=1.0,
        delta=0.1,
        w=np.zeros(6),
        wells=np.arange(6),
        component_label=np.zeros(6, dtype=int),
        h=np.zeros(6),
        is_dual=False,
    )
    assert estimate_C_abs(af, 0.5, geom) == 0.0


def test_estimate_c_abs_monotone_in_alpha():
    geom, H, ls = _bernoulli_setup(side=100, seed=10)
    (pair,) = eigenpairs(H, lowest=1)
    af = agmon_field(ls, pair.mu, 0.01, geom)
    c_small = estimate_C_abs(af, 0.05, geom)
    c_mid = estimate_C_abs(af, 0.1, geom)
    c_big = estimate_C_abs(af, 0.2, geom)
    assert c_small <= c_mid <= c_big
    assert c_big > 0


def test_decay_params_formula_and_validation():
    p = DecayBoundParams.for_instance(0.3, 0.01, 0.5, 1, 5.0, BoundaryCondition.PERIODIC)
    e2a = math.exp(0.6)
    expected = (4 * e2a * 1 + (2 + 6 * 0.5 * 0.09) * e2a * 1 * 5.0) / (1 - 0.5 * 1 * 0.09)
    assert p.C0 == pytest.approx(expected, rel=1e-12)
    pd = DecayBoundParams.for_instance(0.3, 0.01, 0.5, 1, 5.0, BoundaryCondition.DIRICHLET)
    expected_d = (4 * e2a * 1 + (2 + 6 * 0.5 * 0.09) * e2a * 1 * 6.0) / (1 - 0.5 * 1 * 0.09)
    assert pd.C0 == pytest.approx(expected_d, rel=1e-12)
    with pytest.raises(InvalidAlpha):
        DecayBoundParams.for_instance(2.0, 0.01, 1.0, 1, 5.0, BoundaryCondition.PERIODIC)
    with pytest.raises(InvalidAlpha):
        DecayBoundParams.for_instance(-0.1, 0.01, 0.0, 1, 5.0, BoundaryCondition.PERIODIC)


def test_calibration_is_self_consistent():
    geom, H, ls = _bernoulli_setup(side=100, seed=11)
    (pair,) = eigenpairs(H, lowest=1)
    af = agmon_field(ls, pair.mu, 0.01, geom)
    params = calibrate_decay_params(af, geom, 5.0)
    assert params.alpha == pytest.approx(0.9 / math.sqrt(params.C_abs * geom.dim), rel=1e-6)
    assert estimate_C_abs(af, params.alpha, geom) <= params.C_abs * (1 + 1e-12)


# ---------------------------------------------------------------- decay bound


def test_decay_bound_constant_potential_trivial():
    # constant value 3 recorded against bound V_max = 5, so mu = 3 passes the gate
    geom = LatticeGeometry(1, 12, "periodic")
    H = HamiltonianOperator(geom, PotentialField(geom, np.full(12, 3.0), 5.0))
    ls = solve_landscape(H)
    (pair,) = eigenpairs(H, lowest=1)
    af = agmon_field(ls, pair.mu, 0.01, geom)
    params = calibrate_decay_params(af, geom, 5.0)
    r = check_decay_bound(pair, af, params, geom, 5.0)
    assert r.passed and r.lhs == 0.0


def test_decay_bound_bernoulli_ground_state():
    geom, H, ls = _bernoulli_setup(side=120, seed=12)
    (pair,) = eigenpairs(H, lowest=1)
    af = agmon_field(ls, pair.mu, 0.01, geom)
    params = calibrate_decay_params(af, geom, 5.0)
    r = check_decay_bound(pair, af, params, geom, 5.0)
    assert r.passed
    assert r.info["tightness"] <= params.C0


def test_decay_bound_hypothesis_gates():
    geom, H, ls = _bernoulli_setup(side=60, seed=13)
    pairs = eigenpairs(H, highest=1)
    top_pair = pairs[0]  # mu near 9, fails the primal gate
    af = agmon_field(ls, top_pair.mu, 0.01, geom)
    params = DecayBoundParams.for_instance(0.2, 0.01, 1.0, 1, 5.0, geom.bc)
    with pytest.raises(HypothesisNotMet):
        check_decay_bound(top_pair, af, params, geom, 5.0)


def test_decay_bound_dual_gate_and_mismatch():
    geom, H, ls = _bernoulli_setup(side=60, seed=14)
    from latticescape.landscape import dual_landscape

    ls_dual = dual_landscape(H)
    (low_pair,) = eigenpairs(H, lowest=1)
    af_dual = agmon_field(ls_dual, 4.0 + 5.0 - low_pair.mu, 0.01, geom)
    params = DecayBoundParams.for_instance(0.2, 0.01, 1.0, 1, 5.0, geom.bc)
    with pytest.raises(HypothesisNotMet):
        check_decay_bound(low_pair, af_dual, params, geom, 5.0)

    (top_pair,) = eigenpairs(H, highest=1)
    af_wrong = agmon_field(ls_dual, 1.23, 0.01, geom)
    with pytest.raises(ValueError):
        check_decay_bound(top_pair, af_wrong, params, geom, 5.0)


# ---------------------------------------------------------------- profile


def test_decay_profile_degenerate_for_constant():
    geom, H, ls = _const_setup(c=3.0, side=12)
    (pair,) = eigenpairs(H, lowest=1)
    af = agmon_field(ls, pair.mu, 0.01, geom)
    prof = decay_profile(pair, af)
    assert prof.degenerate and prof.slope is None


def test_decay_profile_localized_slope_negative():
    geom, H, ls = _bernoulli_setup(side=200, seed=15)
    (pair,) = eigenpairs(H, lowest=1)
    af = agmon_field(ls, pair.mu, 0.01, geom)
    prof = decay_profile(pair, af)
    assert not prof.degenerate
    assert prof.slope < 0


def test_agmon_test_function_shape():
    h = np.array([0.0, 0.5, 1.0, 2.0])
    g = agmon_test_function(h, 0.5)
    assert g[0] == 0.0
    assert g[1] == pytest.approx(0.5 * math.exp(0.25))
    assert g[2] == pytest.approx(math.exp(0.5))
    assert g[3] == pytest.approx(math.exp(1.0))

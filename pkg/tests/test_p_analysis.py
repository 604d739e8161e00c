import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from tenstruct.errors import NoPositiveProduct, OddOrderUnsupported, ResourceLimit
from tenstruct.generators import GenSpec, gen_symmetric
from tenstruct.p_analysis import (
    AlphaConfig,
    alpha_estimate,
    f_operator,
    grid_band,
    grid_p_decision,
    lattice_size,
    lattice_steps,
    max_product,
    p_classify,
    point_products,
    refutation_search,
    scaling_certificate,
    t_operator,
)
from tenstruct.structure_checks import row_norm_bound
from tenstruct.tensor_core import DenseTensor, make_special, polynomial_value, principal_subtensor

I2 = DenseTensor(np.eye(2))
NEG_I2 = DenseTensor(-np.eye(2))


def lattice_points(n, h):
    """Every point of {-1, -1+h, ..., 1}^n with infinity norm 1."""
    N = round(2 / h)
    vals = [-1 + 2 * k / N for k in range(N + 1)]
    return [np.array(p) for p in itertools.product(vals, repeat=n) if max(map(abs, p)) == 1]


def brute_alpha(A, h):
    """Lattice minimum of max_i x_i T(x)_i from the explicit loop contraction."""
    best = math.inf
    for x in lattice_points(A.dim, h):
        y = np.array(oracles.contract(A.data, x)) * float(x @ x) ** ((2 - A.order) / 2)
        best = min(best, float(np.max(x * y)))
    return best


# -- operators ---------------------------------------------------------------

def test_t_operator_examples():
    rng = np.random.default_rng(0)
    A = DenseTensor(rng.standard_normal((3, 3, 3)))
    assert t_operator(A, np.zeros(3)).tolist() == [0, 0, 0]
    assert t_operator(make_special("identity", 4, 2), [1, 1]).tolist() == [0.5, 0.5]
    M = DenseTensor(rng.standard_normal((3, 3)))
    x = rng.standard_normal(3)
    assert np.array_equal(t_operator(M, x), np.array(oracles.contract(M.data, x)))


def test_f_operator_examples():
    x = np.array([0.3, -2.0, 5.0])
    assert np.allclose(f_operator(make_special("identity", 4, 3), x), x, rtol=1e-15)
    assert np.allclose(f_operator(make_special("identity", 2, 3), x), x, rtol=0)
    with pytest.raises(OddOrderUnsupported):
        f_operator(make_special("identity", 3, 2), [1, 1])
    assert f_operator(make_special("diagonal", 4, 2, [8, 1]), [1, 1]).tolist() == [2, 1]


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31), m=st.sampled_from([2, 3, 4]), n=st.integers(1, 4),
       t=st.floats(1e-3, 10))
def test_operators_positively_homogeneous(seed, m, n, t):
    rng = np.random.default_rng(seed)
    A = DenseTensor(rng.standard_normal((n,) * m))
    x = rng.standard_normal(n)
    ops = [t_operator] + ([f_operator] if m % 2 == 0 else [])
    for op in ops:
        lhs, rhs = op(A, t * x), t * op(A, x)
        assert np.all(np.abs(lhs - rhs) <= 1e-10 * np.abs(rhs).max() + 1e-300)


# -- alpha -------------------------------------------------------------------

def test_alpha_identity_matrix_exact():
    est = alpha_estimate(I2, "T", AlphaConfig(h=0.05))
    assert est.value == 1.0 and est.certified and est.method == "grid"
    assert np.abs(est.minimizer).max() == 1.0


def test_alpha_identity_tensor_order4():
    est = alpha_estimate(make_special("identity", 4, 2), "T", AlphaConfig(h=0.01))
    assert abs(est.value - 2 ** ((2 - 4) / 2)) <= 1e-2
    assert np.abs(est.minimizer).tolist() == [1, 1]


def test_alpha_negative_identity():
    est = alpha_estimate(NEG_I2, "T", AlphaConfig(h=0.05))
    assert est.value == -1.0
    assert np.abs(est.minimizer).tolist() == [1, 1]
    assert est.minimizer.tolist() == [-1, -1]  # lexicographically smallest tie


def test_alpha_f_identity():
    est = alpha_estimate(make_special("identity", 4, 2), "F", AlphaConfig(h=0.05))
    assert est.value == 1.0
    with pytest.raises(OddOrderUnsupported):
        alpha_estimate(make_special("identity", 3, 2), "F")


def test_alpha_multistart_not_certified():
    est = alpha_estimate(make_special("identity", 4, 2), "T",
                         AlphaConfig(method="multistart", starts=8, seed=3))
    assert not est.certified and est.starts == 8 and est.seed == 3
    assert abs(est.value - 0.5) <= 1e-6


@pytest.mark.parametrize("m,n,h", [(2, 2, 0.25), (2, 3, 0.25), (3, 2, 0.125), (3, 3, 0.25),
                                   (4, 2, 0.125), (4, 3, 0.25)])
def test_grid_alpha_matches_brute_lattice(m, n, h):
    rng = np.random.default_rng(31 * m + n)
    for _ in range(4):
        A = DenseTensor(rng.standard_normal((n,) * m))
        est = alpha_estimate(A, "T", AlphaConfig(h=h))
        ref = brute_alpha(A, h)
        assert abs(est.value - ref) <= 1e-12 * max(1.0, abs(ref))
        assert est.evaluations == lattice_size(n, lattice_steps(h), halved=m % 2 == 0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), m=st.sampled_from([2, 3, 4]), n=st.integers(1, 3),
       method=st.sampled_from(["grid", "multistart"]))
def test_alpha_estimate_invariants(seed, m, n, method):
    A = DenseTensor(np.random.default_rng(seed).standard_normal((n,) * m))
    cfg = AlphaConfig(method=method, h=0.1, starts=4, iters=50, seed=seed)
    bound = row_norm_bound(A)
    for op in ("T", "F") if m % 2 == 0 else ("T",):
        est = alpha_estimate(A, op, cfg)
        assert abs(np.abs(est.minimizer).max() - 1) <= 1e-12
        assert abs(est.value - max_product(A, est.minimizer, op)) <= 1e-12 * max(1, abs(est.value))
        cap = bound.t_bound if op == "T" else bound.f_bound
        assert est.value <= cap * (1 + 1e-12)


def test_resource_limit(monkeypatch):
    A = DenseTensor(np.eye(4))
    with pytest.raises(ResourceLimit):
        alpha_estimate(A, "T", AlphaConfig(h=0.01, max_evals=1000))
    monkeypatch.setenv("TENSTRUCT_MAX_EVALS", "50")
    with pytest.raises(ResourceLimit):
        alpha_estimate(A, "T", AlphaConfig(h=0.5))
    with pytest.raises(ResourceLimit):
        grid_p_decision(A, 0.5)


def test_alpha_config_json():
    cfg = AlphaConfig.from_dict({"method": "multistart", "starts": 64, "iters": 500, "seed": 1})
    assert cfg.method == "multistart" and cfg.starts == 64
    assert AlphaConfig.from_dict({"method": "grid", "h": 0.05}).h == 0.05
    with pytest.raises(ValueError):
        AlphaConfig.from_dict({"method": "grid", "resolution": 0.1})
    with pytest.raises(ValueError):
        AlphaConfig(method="newton")


def test_sign_of_alpha_f_agrees_with_alpha_t():
    """The signed root and the factor ||x||^(2-m) both preserve the sign of
    every product x_i (A x^(m-1))_i, so on a common lattice the two grid
    minima must have the same sign (up to rounding at zero)."""
    rng = np.random.default_rng(12)
    signs = set()
    for k in range(60):
        n = int(rng.integers(1, 4))
        A = DenseTensor(rng.standard_normal((n,) * 4) + (k % 3) * make_special("identity", 4, n).data)
        cfg = AlphaConfig(h=0.05)
        at = alpha_estimate(A, "T", cfg).value
        af = alpha_estimate(A, "F", cfg).value
        if min(abs(at), abs(af)) > 1e-12:
            assert np.sign(at) == np.sign(af)
            signs.add(np.sign(at))
    assert signs == {-1.0, 1.0}


# -- P classification ----------------------------------------------------------

def test_p_classify_examples():
    for n in (1, 2, 3):
        v = p_classify(make_special("identity", 4, n), AlphaConfig(h=0.1))
        assert v.cls == "P" and v.witness is None and v.certified
    v = p_classify(make_special("identity", 3, 2))
    assert v.cls == "NOT_P0" and v.witness.tolist() == [-1, -1]
    assert point_products(make_special("identity", 3, 2), v.witness).tolist() == [-1, -1]
    v = p_classify(DenseTensor(np.diag([1.0, -1.0])))
    assert v.cls == "NOT_P0" and v.witness.tolist() == [0, 1]


def test_p_classify_zero_tensor_is_p0_not_p():
    v = p_classify(make_special("zero", 4, 2))
    assert v.cls == "P0_NOT_P" and v.witness is not None
    assert v.alpha_T.value == 0


def test_p_classify_witnesses_reverify():
    rng = np.random.default_rng(4)
    for _ in range(30):
        m, n = int(rng.integers(2, 5)), int(rng.integers(1, 4))
        A = DenseTensor(rng.standard_normal((n,) * m))
        v = p_classify(A, AlphaConfig(h=0.1))
        if v.witness is not None:
            p = point_products(A, v.witness)
            s = v.witness != 0
            if v.cls == "NOT_P0":
                assert np.all(p[s] < 0)
            else:
                assert p.max() <= 0
        d = v.to_dict()
        assert set(d) >= {"class", "witness", "alpha_T", "certified", "label"}


def test_odd_order_one_dimensional_is_not_p0():
    # m = 3, n = 1: x (a x^2) = a x^3 changes sign with x
    v = p_classify(DenseTensor(np.ones((1, 1, 1))), AlphaConfig(h=0.5))
    assert v.cls == "NOT_P0" and v.witness.tolist() == [-1]


def test_p_matrix_closure_under_subtensors():
    """Every principal sub-matrix of a P matrix is P (checked with p_classify)."""
    rng = np.random.default_rng(21)
    found = 0
    while found < 5:
        M = rng.standard_normal((3, 3)) + 2.5 * np.eye(3)
        if not oracles.is_p_matrix(M):
            continue
        A = DenseTensor(M)
        cfg = AlphaConfig(h=0.02)
        v = p_classify(A, cfg)
        if v.alpha_T.value <= v.alpha_T.band:
            continue
        found += 1
        assert v.cls == "P"
        for r in (1, 2):
            for J in itertools.combinations(range(3), r):
                assert p_classify(principal_subtensor(A, J), cfg).cls == "P"


def test_grid_p_decision_matches_pointwise_oracle():
    rng = np.random.default_rng(5)
    h = 0.25
    for _ in range(20):
        m, n = int(rng.integers(2, 5)), int(rng.integers(1, 4))
        A = DenseTensor(rng.standard_normal((n,) * m))
        pts = lattice_points(n, h)
        prods = [x * np.array(oracles.contract(A.data, x)) for x in pts]
        not_p = any(p.max() <= 0 for p in prods)
        not_p0 = any(np.all(p[x != 0] < 0) for x, p in zip(pts, prods))
        ref = "NOT_P0" if not_p0 else ("P0_NOT_P" if not_p else "P")
        assert grid_p_decision(A, h).cls == ref


def test_refutation_search_odd_symmetric_uses_sign_flip():
    A = gen_symmetric(GenSpec(3, 3, "symmetric", 8))
    r = refutation_search(A)
    assert r.weak_witness is not None


def test_proposition_zero_form_means_zero_tensor():
    """A symmetric tensor whose form vanishes on the whole grid is zero."""
    h = 0.25
    Z = make_special("zero", 4, 3)
    assert all(polynomial_value(Z, x) == 0 for x in lattice_points(3, h))
    for seed in range(5):
        E = 1e-9 * gen_symmetric(GenSpec(4, 3, "symmetric", seed)).data
        A = DenseTensor(E)
        assert any(polynomial_value(A, x) != 0 for x in lattice_points(3, h))


# -- scaling certificate -------------------------------------------------------

def test_scaling_certificate_examples():
    c = scaling_certificate(I2, [1, -1])
    assert c.k == 0 and c.D[0] == 1 and c.product == 1 + c.epsilon and c.product > 0
    c = scaling_certificate(DenseTensor(np.array([[1.0, 2.0], [0.0, 1.0]])), [1, -1])
    assert c.k == 1  # zero-based: the second index
    assert c.epsilon == pytest.approx(1 / 3, abs=1e-15)
    assert c.product == pytest.approx(1 - 1 / 3, abs=1e-15)
    assert c.D.tolist() == [c.epsilon, 1.0]
    with pytest.raises(NoPositiveProduct):
        scaling_certificate(NEG_I2, [0.3, -2])


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 2**31), m=st.integers(2, 4), n=st.integers(1, 4))
def test_scaling_certificate_property(seed, m, n):
    rng = np.random.default_rng(seed)
    A = DenseTensor(rng.standard_normal((n,) * m))
    x = rng.standard_normal(n)
    p = point_products(A, x)
    if p.max() <= 0:
        with pytest.raises(NoPositiveProduct):
            scaling_certificate(A, x)
        return
    c = scaling_certificate(A, x)
    assert c.product > 0 and 0 < c.epsilon <= 1
    assert c.k == int(np.flatnonzero(p == p.max())[0])
    assert c.D[c.k] == 1 and np.all(np.delete(c.D, c.k) == c.epsilon)
    assert c.product == pytest.approx(float(x @ (c.D * (p / np.where(x == 0, 1, x)))), rel=1e-9, abs=1e-12)

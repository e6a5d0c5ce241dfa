import math

import numpy as np
import pytest

from hinfdelay.errors import (DegenerateDenominator, InterpolationIllConditioned,
                              NotConjugateSymmetric)
from hinfdelay.quasipoly import DelayTransferFunction as TF
from hinfdelay.youla import (closed_loop_maps, coprime_factorization, map_to_fot,
                             parameterize_controller, solve_bezout, trivial_bezout,
                             two_block_objective, two_block_objective_q)

from oracles import blaschke, random_rhp_zeros

W = 1j * np.geomspace(1e-2, 1e2, 100)


@pytest.fixture(scope="module")
def simple():
    fact = coprime_factorization(TF.delay(1.0), TF.rational((-1.0, 1.0), (1.0, 1.0)))
    return fact, solve_bezout(fact)


def random_fact(seed):
    rng = np.random.default_rng(seed)
    z = random_rhp_zeros(rng)
    n_i = TF.rational(*blaschke(z))
    m = TF.delay(rng.uniform(0.3, 2.0)) * TF.rational((1.0, -0.5), (1.0, 0.5))
    n_o = TF.rational((rng.uniform(1, 3), 1.0), (rng.uniform(1, 3), 1.0))
    return coprime_factorization(m, n_i, n_o, rhp_zeros=z)


def random_q(rng):
    p = rng.uniform(0.2, 3.0)
    return TF.rational((rng.normal(), rng.normal()), (p, 1.0))


def test_single_node(simple):
    fact, b = simple
    assert fact.rhp_zeros == (1 + 0j,)
    assert complex(b.y_tf(0.0)) == pytest.approx(math.e)
    assert b.residual_sup < 1e-9
    s = 1j * np.linspace(0.01, 10, 100)
    assert np.max(np.abs(fact.n_tf(s) * b.x_tf(s) + fact.m_inner(s) * b.y_tf(s) - 1)) < 1e-9
    # X is finite near the removable singularity
    assert np.isfinite(abs(b.x_tf(1.0 + 1e-4)))


@pytest.mark.parametrize("seed", range(5))
def test_random_bezout(seed):
    fact = random_fact(seed)
    b = solve_bezout(fact)
    assert b.residual_sup < 1e-9
    for z in fact.rhp_zeros:
        assert abs(complex(b.y_tf(z)) - 1 / complex(fact.m_inner(z))) < 1e-10
    # Y has real coefficients and is proper
    assert b.y_tf.num.degree <= b.y_tf.den.degree


@pytest.mark.parametrize("seed", range(3))
def test_closed_loop_identities(seed):
    fact = random_fact(seed)
    b = solve_bezout(fact)
    rng = np.random.default_rng(100 + seed)
    for _ in range(10):
        q = random_q(rng)
        c = parameterize_controller(fact, b, q)
        pc = fact.plant(W) * c(W)
        sens, comp = closed_loop_maps(fact, b, q, W)
        assert np.max(np.abs(1 / (1 + pc) - sens) / np.abs(sens)) < 1e-8
        assert np.max(np.abs(pc / (1 + pc) - comp) / np.abs(comp)) < 1e-8


def test_q_zero_gives_x_over_y(simple):
    fact, b = simple
    c = parameterize_controller(fact, b, TF.constant(0.0))
    assert np.allclose(c(W), b.x_tf(W) / b.y_tf(W))


def test_degenerate_denominator():
    fact = coprime_factorization(TF.delay(1.0), TF.constant(1.0))
    b = solve_bezout(fact)
    assert complex(b.y_tf(0.3)) == 1.0
    with pytest.raises(DegenerateDenominator):
        parameterize_controller(fact, b, TF.constant(1.0))     # Y - N Q = 0


def test_trivial_bezout_for_units(ref):
    st1 = ref.stage1
    n = ref.plant.np_tf.invert() * st1.n_c
    b = trivial_bezout(n, st1.d_c, grid=ref.omegas)
    assert b.residual_sup < 1e-12


def test_not_conjugate_symmetric():
    n_i = TF.rational((-1.0, 1.0), (1.0, 1.0))
    with pytest.raises(NotConjugateSymmetric):
        coprime_factorization(TF.delay(1.0), n_i, rhp_zeros=[1 + 1j])


def test_ill_conditioned():
    z = [1.0, 1.0 + 2e-5, 1.0 + 4e-5, 1.0 + 6e-5]
    n_i = TF.rational(*blaschke(z))
    fact = coprime_factorization(TF.delay(1.0), n_i, rhp_zeros=z)
    with pytest.raises(InterpolationIllConditioned):
        solve_bezout(fact)


def test_invalid_factorizations():
    with pytest.raises(ValueError):
        coprime_factorization(TF.delay(1.0) * 2.0, TF.constant(1.0))   # M not inner
    with pytest.raises(ValueError):
        coprime_factorization(TF.delay(1.0), TF.constant(1.0), TF.rational((-1.0, 1.0), (1.0, 1.0)))


def test_two_block_reductions(simple):
    fact, b = simple
    q1 = TF.rational((0.5,), (1.0, 1.0))
    s = 1j * np.geomspace(1e-3, 1e3, 193)
    w1, w2 = TF.rational((1.0,), (1.0, 1.0)), TF.rational((0.1, 1.0), (1.0, 0.1))
    r = b.y_tf(s) - fact.n_inner(s) * q1(s)
    assert two_block_objective(fact, b, w1, None, q1) == pytest.approx(np.max(np.abs(w1(s) * r)))
    assert two_block_objective(fact, b, None, w2, q1) == pytest.approx(
        np.max(np.abs(w2(s) * (1 - fact.m_inner(s) * r))))


def test_two_block_identity_q():
    fact = coprime_factorization(TF.delay(1.0), TF.constant(1.0))
    b = solve_bezout(fact)
    w2 = TF.rational((0.1, 1.0), (1.0, 0.1))
    val = two_block_objective(fact, b, TF.constant(3.0), w2, b.y_tf)
    s = 1j * np.geomspace(1e-3, 1e3, 193)
    assert val == pytest.approx(np.max(np.abs(w2(s))))


@pytest.mark.parametrize("seed", range(3))
def test_two_block_forms_agree(seed):
    fact = random_fact(seed)
    b = solve_bezout(fact)
    rng = np.random.default_rng(seed)
    w1, w2 = TF.rational((1.0,), (0.5, 1.0)), TF.rational((0.2, 1.0), (2.0, 0.1))
    for _ in range(5):
        q = random_q(rng)
        a = two_block_objective_q(fact, b, w1, w2, q)
        c = two_block_objective(fact, b, w1, w2, fact.n_outer * q)
        assert abs(a - c) < 1e-8 * max(1.0, a)


def test_fot_mapping(simple):
    fact, b = simple
    w1, w2 = TF.rational((1.0,), (1.0, 1.0)), TF.constant(0.3)
    d = map_to_fot(w1, w2, b, fact)
    assert d.w1_fot is w2 and d.w2_fot is w1
    assert d.x_fot is b.y_tf and d.md_fot is fact.n_inner
    assert d.mn_fot is fact.m_inner and d.no_fot is fact.n_outer
    back = map_to_fot(d.w1_fot, d.w2_fot, b, fact)
    assert back.w1_fot is w1 and back.w2_fot is w2

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles as orc
from histq.decoherence import (
    MEDIUM,
    WEAK,
    consistency_check,
    d_matrix,
    d_weight,
    element_d,
    probability_measure,
    sum_rule_check,
)
from histq.effects import DensityState, Effect, Povm, gleason_prob
from histq.errors import (
    DimensionMismatch,
    NotConsistent,
    NotInCommonAlgebra,
    NotProjectorHistory,
    NullUnit,
)
from histq.histories import EvolutionContext, HomogeneousHistory, associated_effect
from histq.proj_lattice import family_from_pvms
from gen import random_history

S = 1 / np.sqrt(2)
P0, P1 = Effect.diag(1, 0), Effect.diag(0, 1)
PLUS = Effect.projector([S, S])
MINUS = PLUS.complement()
RHO0 = DensityState.pure([1, 0])
FREE = EvolutionContext.free(2)
H = np.array([[1.0, 0.3], [0.3, -1.0]])


def test_d_weight_examples():
    unit = HomogeneousHistory.unit(2)
    zero = HomogeneousHistory.single(0.0, Effect.zero(2))
    u = HomogeneousHistory.single(1.0, PLUS)
    assert d_weight(RHO0, unit, unit, FREE) == 1
    assert d_weight(RHO0, zero, u, FREE) == 0
    assert d_weight(RHO0, u, u, FREE) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(DimensionMismatch):
        d_weight(DensityState.maximally_mixed(3), unit, unit, FREE)


def test_d_weight_frozen_values():
    # two-time histories under H = [[1, .3], [.3, -1]], values from the scipy oracle
    ctx = EvolutionContext(H, 0.0)
    h = HomogeneousHistory(2, {1.0: PLUS, 2.0: P0})
    k = HomogeneousHistory(2, {1.0: MINUS, 2.0: P0})
    assert abs(d_weight(RHO0, h, k, ctx) - (0.17651265772300728 - 0.1094679330148677j)) < 1e-12
    assert abs(d_weight(RHO0, h, h, ctx) - 0.49796421388715634) < 1e-12
    assert abs(d_weight(RHO0, k, k, ctx) - 0.08663262437722688) < 1e-12
    # unsharp effect, shifted fiducial time, mixed state
    rho = DensityState([[0.6, 0.2 - 0.1j], [0.2 + 0.1j, 0.4]])
    e = HomogeneousHistory(2, {1.0: Effect.diag(0.3, 0.8), 1.7: PLUS})
    assert abs(d_weight(rho, e, e, EvolutionContext(H, 0.5)) - 0.1417347576898266) < 1e-12


def test_d_matrix_examples():
    dm = d_matrix(RHO0, [HomogeneousHistory.unit(2)], FREE)
    assert dm.gram.shape == (1, 1) and dm.gram[0, 0] == 1
    rng = np.random.default_rng(0)
    rho = DensityState(orc.state(rng, 3))
    pvm = [Effect(p) for p in orc.basis_projectors(orc.unitary(rng, 3))]
    free3 = EvolutionContext.free(3)
    dm = d_matrix(rho, [HomogeneousHistory.single(0.0, p) for p in pvm], free3)
    for i, p in enumerate(pvm):
        assert dm.gram[i, i] == pytest.approx(np.trace(p.op @ rho.op @ p.op).real, abs=1e-12)
    assert np.abs(dm.gram - np.diag(np.diag(dm.gram))).max() < 1e-12
    zero = HomogeneousHistory.single(0.0, Effect.zero(3))
    dm = d_matrix(rho, [zero, HomogeneousHistory.single(0.0, pvm[0])], free3)
    assert np.all(dm.gram[0] == 0) and np.all(dm.gram[:, 0] == 0)


def test_consistency_examples():
    rng = np.random.default_rng(1)
    rho = DensityState(orc.state(rng, 2))
    fam = [HomogeneousHistory.single(0.0, P0), HomogeneousHistory.single(0.0, P1)]
    assert consistency_check(d_matrix(rho, fam, FREE), MEDIUM, 1e-10).passed
    pair = [HomogeneousHistory.single(0.0, P0), HomogeneousHistory.single(0.0, PLUS)]
    rep = consistency_check(d_matrix(RHO0, pair, FREE), WEAK, disjoint_only=False)
    assert not rep.passed and rep.violations[0].residual == pytest.approx(0.5)
    assert consistency_check(d_matrix(RHO0, [], FREE)).passed
    effect_fam = [HomogeneousHistory.single(0.0, Effect.diag(0.5, 0.5))]
    with pytest.raises(NotProjectorHistory):
        consistency_check(d_matrix(RHO0, effect_fam, FREE), disjoint_only=True)


def test_probability_measure_examples():
    unit = HomogeneousHistory.unit(2)
    assert probability_measure(d_matrix(RHO0, [unit], FREE), 0) == [1.0]
    fam = [HomogeneousHistory.single(0.0, P0), HomogeneousHistory.single(0.0, P1), unit]
    assert probability_measure(d_matrix(RHO0, fam, FREE), 2) == [1.0, 0.0, 1.0]
    rng = np.random.default_rng(2)
    rho = DensityState(orc.state(rng, 3))
    pvm = [Effect(p) for p in orc.basis_projectors(orc.unitary(rng, 3))]
    fam = [HomogeneousHistory.single(0.0, p) for p in pvm] + [HomogeneousHistory.unit(3)]
    p = probability_measure(d_matrix(rho, fam, EvolutionContext.free(3)), 3)
    assert abs(sum(p[:3]) - 1) < 1e-8


def test_probability_measure_refuses():
    rho = DensityState.pure([1, 1])
    h = HomogeneousHistory(2, {1.0: P0, 2.0: PLUS})
    k = HomogeneousHistory(2, {1.0: P1, 2.0: PLUS})
    dm = d_matrix(rho, [h, k, HomogeneousHistory.unit(2)], FREE)
    with pytest.raises(NotConsistent) as info:
        probability_measure(dm, 2)
    (v,) = info.value.violations
    assert (v.i, v.j) == (0, 1) and v.residual == pytest.approx(0.25, abs=1e-12)
    zero = HomogeneousHistory.single(0.0, Effect.zero(2))
    with pytest.raises(NullUnit):
        probability_measure(d_matrix(rho, [zero], FREE), 0)


def test_sum_rule_examples():
    rho = DensityState.pure([1, 1])
    fam = family_from_pvms([(1.0, Povm.from_basis([[1, 0], [0, 1]])), (2.0, Povm.from_basis([[S, S], [S, -S]]))])
    # atoms: 0/0 = (up, plus), 0/1 = (up, minus), 1/0 = (down, plus), 1/1 = (down, minus)
    assert sum_rule_check(rho, fam, {0, 1}, {0, 1}, FREE) == 0.0
    # up and down branches both ending in plus interfere: residual 2 |Re d| = 0.5
    h, k = {0}, {2}
    re_d = element_d(rho, fam, h, k, FREE).real
    assert sum_rule_check(rho, fam, h, k, FREE) == pytest.approx(2 * abs(re_d), abs=1e-12)
    assert abs(re_d) == pytest.approx(0.25, abs=1e-12)
    # atoms at the final time are orthogonal projectors: no interference
    assert sum_rule_check(rho, fam, {0}, {1}, FREE) < 1e-12
    with pytest.raises(NotInCommonAlgebra):
        sum_rule_check(rho, fam, {7}, {0}, FREE)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_hermiticity_and_gleason_bridge(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(2, 5))
    ctx = EvolutionContext(orc.hermitian(rng, dim), rng.uniform(-1, 1))
    rho = DensityState(orc.state(rng, dim))
    u = random_history(rng, dim, int(rng.integers(0, 4)))
    v = random_history(rng, dim, int(rng.integers(0, 4)))
    assert abs(d_weight(rho, u, v, ctx) - np.conj(d_weight(rho, v, u, ctx))) < 1e-8
    assert abs(d_weight(rho, u, u, ctx) - gleason_prob(rho, associated_effect(u, ctx))) < 1e-8


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_bilinearity_on_disjoint_elements(seed):
    rng = np.random.default_rng(seed)
    ctx = EvolutionContext(orc.hermitian(rng, 2))
    rho = DensityState(orc.state(rng, 2))
    pvms = [(t, Povm.from_basis(list(orc.unitary(rng, 2).T))) for t in (0.3, 1.1)]
    fam = family_from_pvms(pvms)
    h, h2, k = {0}, {3}, {1, 3}
    lhs = element_d(rho, fam, h | h2, k, ctx)
    rhs = element_d(rho, fam, h, k, ctx) + element_d(rho, fam, h2, k, ctx)
    assert abs(lhs - rhs) < 1e-8

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

import oracles as orc
from histq.effects import (
    AXIOMS,
    FAIL,
    PASS,
    VACUOUS,
    AlphaParam,
    DensityState,
    Effect,
    Povm,
    commuting_meet_join,
    complement_alpha,
    dposet_axioms,
    effects_commute,
    gleason_prob,
    is_regular,
    leq_alpha,
    nscale_alpha,
    ominus_alpha,
    oplus_alpha,
    summable_alpha,
)
from histq.errors import (
    DimensionMismatch,
    InvalidAlpha,
    InvalidEffect,
    InvalidPovm,
    InvalidState,
    NotComparable,
    NotSummable,
)

S = 1 / np.sqrt(2)
KET0 = [1, 0]
PLUS = Effect.projector([S, S])
ALPHAS = [Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3)]


def close(a, b, tol=1e-9):
    a = a.op if isinstance(a, Effect) else a
    b = b.op if isinstance(b, Effect) else b
    return np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol


# construction ----------------------------------------------------------------

def test_effect_validation():
    with pytest.raises(InvalidEffect):
        Effect([[0, 1], [0, 0]])
    with pytest.raises(InvalidEffect):
        Effect(np.diag([1.2, 0.0]))
    with pytest.raises(InvalidEffect):
        Effect(np.diag([-0.1, 0.0]))
    e = Effect(np.diag([1 + 5e-10, -5e-10]))
    assert np.array_equal(e.op, np.diag([1.0, 0.0]).astype(complex))


def test_state_validation():
    with pytest.raises(InvalidState):
        DensityState(np.diag([0.5, 0.6]))
    with pytest.raises(InvalidState):
        DensityState(np.diag([1.5, -0.5]))
    assert close(DensityState.pure([2, 0]).op, np.diag([1, 0]))


def test_povm_must_sum_to_identity():
    with pytest.raises(InvalidPovm):
        Povm((("a", Effect.diag(1, 0)), ("b", Effect.diag(0, 0.5))))
    m = Povm.from_basis([[1, 0], [0, 1]], ["up", "down"])
    assert m.labels == ["up", "down"] and m.is_projective()
    unsharp = Povm((("a", Effect.diag(0.3, 0.6)), ("b", Effect.diag(0.7, 0.4))))
    assert not unsharp.is_projective()


def test_alpha_param():
    assert AlphaParam.parse("2/3").value == Fraction(2, 3)
    assert AlphaParam.parse(0.5).value == Fraction(1, 2)
    assert AlphaParam.parse("3").root == Fraction(1, 3)
    for bad in ("0", "-1", "13", "1/13", "x"):
        with pytest.raises(InvalidAlpha):
            AlphaParam.parse(bad)


# gleason -----------------------------------------------------------------------

def test_gleason_examples():
    rho = DensityState.pure(KET0)
    assert gleason_prob(rho, Effect.identity(2)) == 1.0
    assert gleason_prob(rho, Effect.zero(2)) == 0.0
    assert gleason_prob(rho, PLUS) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(DimensionMismatch):
        gleason_prob(rho, Effect.identity(3))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_gleason_additive(seed):
    rng = np.random.default_rng(seed)
    a = Effect(orc.effect(rng, 3, 0, 0.5))
    b = Effect(orc.effect(rng, 3, 0, 0.5))
    rho = DensityState(orc.state(rng, 3))
    s = oplus_alpha(a, b, 1)
    assert abs(gleason_prob(rho, s) - gleason_prob(rho, a) - gleason_prob(rho, b)) < 1e-8


# alpha sums ----------------------------------------------------------------------

def test_oplus_examples():
    p = Effect.diag(1, 0)
    assert oplus_alpha(p, p.complement(), 1).is_identity()
    q = Effect.diag(0, 1)
    assert close(oplus_alpha(p, q, 2), np.eye(2), 1e-10)
    half = Effect.scaled_identity(2, 0.5)
    with pytest.raises(NotSummable):
        oplus_alpha(half, half, 2)
    assert not summable_alpha(half, half, 2)


def test_ominus_examples():
    rng = np.random.default_rng(7)
    f = Effect(orc.effect(rng, 2, 0.05, 0.95))
    assert ominus_alpha(f, f, 3).is_zero(1e-9)
    assert close(ominus_alpha(Effect.identity(2), f, 1), np.eye(2) - f.op)
    g = Effect.diag(0.36, 0.09)
    # (1 - sqrt F)^2 on a diagonal: (1-0.6)^2, (1-0.3)^2
    assert close(ominus_alpha(Effect.identity(2), g, 2), np.diag([0.16, 0.49]), 1e-12)
    assert close(complement_alpha(g, 2), np.diag([0.16, 0.49]), 1e-12)
    with pytest.raises(NotComparable):
        ominus_alpha(Effect.diag(0.1, 0.1), Effect.diag(0.5, 0.0), 1)


def test_nscale_examples():
    a = Effect.scaled_identity(2, 1 / 9)
    assert close(nscale_alpha(a, 2, 2), np.eye(2) * 4 / 9, 1e-12)
    assert nscale_alpha(a, 1, 2).close_to(a)
    assert nscale_alpha(a, 0, 2).is_zero()
    with pytest.raises(NotSummable):
        nscale_alpha(a, 4, 2)


def test_is_regular():
    assert is_regular(Effect.diag(1, 0))
    assert not is_regular(Effect.scaled_identity(2, 1 / 3))
    assert is_regular(Effect.diag(0.2, 0.8))


def test_leq_alpha_depends_on_alpha():
    # 0.25 <= 0.3 at alpha=1 and alpha=2 (roots 0.5 <= 0.5477)
    a, b = Effect.diag(0.25, 0.1), Effect.diag(0.3, 0.2)
    for al in ALPHAS:
        assert leq_alpha(a, b, al)
    assert not leq_alpha(b, a, 1)


# axioms ----------------------------------------------------------------------------

def test_axioms_on_equal_triple():
    f = Effect.diag(0.3, 0.7)
    rep = dposet_axioms(f, f, f, 1)
    assert rep.passed
    assert rep.by_axiom()["double_difference"] == PASS


def test_axioms_chain_on_diagonal_triple():
    a, b, c = Effect.diag(0.1, 0.2), Effect.diag(0.3, 0.4), Effect.diag(0.6, 0.9)
    rep = dposet_axioms(a, b, c, 1)
    assert rep.passed
    chain = [r for r in rep.results if r.axiom == "chain_difference" and r.case == "A<=B<=C"]
    assert chain[0].status == PASS and chain[0].residual < 1e-12


def test_axioms_vacuous_when_incomparable():
    a, b = Effect.diag(0.9, 0.1), Effect.diag(0.1, 0.9)
    rep = dposet_axioms(a, b, Effect.diag(0.5, 0.5), 1)
    statuses = {r.status for r in rep.results if r.case == "A<=B" and r.axiom != AXIOMS[0]}
    assert statuses == {VACUOUS}
    assert rep.passed


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(ALPHAS))
def test_oplus_ominus_roundtrip(seed, alpha):
    rng = np.random.default_rng(seed)
    a = Effect(orc.effect(rng, 3, 0.05, 1.0))
    b = Effect(orc.effect(rng, 3, 0.05, 1.0))
    # shrink b until summable
    root_a = a.power(1 / alpha)
    top = np.linalg.eigvalsh(root_a + b.power(1 / alpha)).max()
    assume(np.linalg.eigvalsh(root_a).max() < 0.9)
    if top > 1:
        b = Effect(orc.mpow(b.power(1 / alpha) * (1 - np.linalg.eigvalsh(root_a).max()) * 0.99, float(alpha)))
    s = oplus_alpha(a, b, alpha)
    assert close(s, orc.alpha_sum(a.op, b.op, float(alpha)), 1e-8)
    assert close(ominus_alpha(s, a, alpha), b, 1e-8)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(ALPHAS))
def test_commutative_associative_on_diagonals(seed, alpha):
    rng = np.random.default_rng(seed)
    vals = rng.uniform(0, 1, size=(3, 3))
    vals = vals / vals.sum(axis=0) * rng.uniform(0.2, 1.0)
    a, b, c = (Effect.diag(*(v ** float(alpha))) for v in vals)
    assert close(oplus_alpha(a, b, alpha), oplus_alpha(b, a, alpha), 1e-9)
    left = oplus_alpha(oplus_alpha(a, b, alpha), c, alpha)
    right = oplus_alpha(a, oplus_alpha(b, c, alpha), alpha)
    assert close(left, right, 1e-8)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(ALPHAS))
def test_projection_collapse(seed, alpha):
    rng = np.random.default_rng(seed)
    u = orc.unitary(rng, 4)
    p = Effect(u[:, :1] @ u[:, :1].conj().T)
    q = Effect(u[:, 1:3] @ u[:, 1:3].conj().T)
    assert close(oplus_alpha(p, q, alpha), p.op + q.op, 1e-10)


# commuting meet / join ---------------------------------------------------------------

def test_commuting_meet_join():
    rng = np.random.default_rng(11)
    u = orc.unitary(rng, 3)
    a = Effect((u * [0.2, 0.7, 0.5]) @ u.conj().T)
    b = Effect((u * [0.4, 0.1, 0.5]) @ u.conj().T)
    assert effects_commute(a, b)
    lo, hi = commuting_meet_join(a, b)
    assert close(lo, (u * [0.2, 0.1, 0.5]) @ u.conj().T, 1e-10)
    assert close(hi, (u * [0.4, 0.7, 0.5]) @ u.conj().T, 1e-10)
    assert not effects_commute(Effect.diag(1, 0), PLUS)


def test_power_cache_returns_same_array():
    e = Effect.diag(0.25, 0.81)
    assert e.sqrt() is e.sqrt()
    assert close(e.sqrt(), np.diag([0.5, 0.9]), 1e-14)

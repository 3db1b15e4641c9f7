"""Tensor terms, alpha-scaled formal sums and the additive decoherence functional.

A homogeneous term is a list of effects over a support ``t_1 < ... < t_n``;
its operator is the Kronecker product of the factors and its alpha-root is
the Kronecker product of the factor roots. A formal sum is a finite list of
terms at a fixed ``alpha``; its operator value is ``(sum of roots)^alpha``.
Decoherence values of formal sums are double sums over term pairs, so they
are additive in each argument by construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import numlin as nl
from .decoherence import d_weight, pairing
from .effects import AlphaParam, DensityState, Effect, gleason_prob, oplus_alpha, summable_alpha
from .errors import (
    DimensionMismatch,
    IncompleteHint,
    InvalidAlpha,
    InvalidSupport,
    NotAdmissible,
    NotSummable,
    SlotMismatch,
    SupportMismatch,
    TimeNotAfterFinal,
    ValidationError,
)
from .histories import (
    EvolutionContext,
    HomogeneousHistory,
    class_operator,
    extend_at,
    padded_effects,
)

NECESSARY, EXACT = "necessary", "exact"


@dataclass(frozen=True, eq=False)
class HomogeneousTerm:
    """``E_1 (x) ... (x) E_n`` over a time-ordered support."""

    support: tuple
    factors: tuple

    def __post_init__(self):
        support = tuple(float(t) for t in self.support)
        factors = tuple(self.factors)
        if len(support) != len(factors):
            raise SupportMismatch("one factor per support time")
        if list(support) != sorted(set(support)):
            raise InvalidSupport(f"support {support} is not strictly increasing")
        if len({e.dim for e in factors}) > 1:
            raise DimensionMismatch("factor dimensions differ")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "factors", factors)

    @classmethod
    def from_map(cls, entries: Mapping[float, Effect]) -> "HomogeneousTerm":
        items = sorted((float(t), e) for t, e in entries.items())
        return cls(tuple(t for t, _ in items), tuple(e for _, e in items))

    @classmethod
    def unit(cls, support: Sequence[float], dim: int) -> "HomogeneousTerm":
        return cls(tuple(support), tuple(Effect.identity(dim) for _ in support))

    @property
    def dim(self) -> int | None:
        return self.factors[0].dim if self.factors else None

    @property
    def operator(self) -> np.ndarray:
        cache = self.__dict__.setdefault("_cache", {})
        if "op" not in cache:
            cache["op"] = nl.kron_all(e.op for e in self.factors)
        return cache["op"]

    def root(self, alpha) -> np.ndarray:
        al = AlphaParam.parse(alpha)
        cache = self.__dict__.setdefault("_cache", {})
        key = ("root", al.value)
        if key not in cache:
            cache[key] = nl.kron_all(e.power(al.root) for e in self.factors)
        return cache[key]

    def history(self) -> HomogeneousHistory:
        if not self.factors:
            raise ValidationError("a term on an empty support has no dimension")
        return HomogeneousHistory(self.dim, tuple(zip(self.support, self.factors)))

    def replace(self, slot: int, e: Effect) -> "HomogeneousTerm":
        fs = list(self.factors)
        fs[slot] = e
        return HomogeneousTerm(self.support, tuple(fs))


def term_from_history(u: HomogeneousHistory, support: Iterable[float] | None = None) -> HomogeneousTerm:
    """Identity-padded term of ``u`` over ``support`` (default: its own)."""
    support = tuple(sorted(u.support if support is None else (float(t) for t in support)))
    return HomogeneousTerm(support, tuple(padded_effects(u, support)))


@dataclass(frozen=True)
class Certificate:
    level: str
    residual: float


@dataclass(frozen=True, eq=False)
class FormalSum:
    """Formal alpha-sum of homogeneous terms on a common support."""

    alpha: AlphaParam
    support: tuple
    dim: int
    terms: tuple = ()
    certificate: Certificate | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "alpha", AlphaParam.parse(self.alpha))
        object.__setattr__(self, "support", tuple(float(t) for t in self.support))
        terms = tuple(self.terms)
        for t in terms:
            if t.support != self.support:
                raise SupportMismatch(f"term support {t.support} differs from {self.support}")
            if t.factors and t.dim != self.dim:
                raise DimensionMismatch(f"term dim {t.dim} vs sum dim {self.dim}")
        object.__setattr__(self, "terms", terms)
        if self.certificate is None:
            object.__setattr__(self, "certificate", is_admissible(self))

    @property
    def size(self) -> int:
        return self.dim ** len(self.support)

    def root_sum(self) -> np.ndarray:
        return sum((t.root(self.alpha) for t in self.terms), nl.zeros(self.size))

    def operator(self) -> np.ndarray:
        return nl.pow_psd(self.root_sum(), self.alpha.value)

    def __len__(self) -> int:
        return len(self.terms)


def formal_sum(terms: Sequence[HomogeneousTerm], alpha=1, hint: Sequence[HomogeneousTerm] | None = None) -> FormalSum:
    terms = tuple(terms)
    if not terms:
        raise ValidationError("use FormalSum directly for an empty sum")
    probe = FormalSum(alpha, terms[0].support, terms[0].dim or 1, terms, Certificate(NECESSARY, 0.0))
    return FormalSum(probe.alpha, probe.support, probe.dim, terms, is_admissible(probe, hint))


def unit_sum(support: Sequence[float], dim: int, alpha=1) -> FormalSum:
    return formal_sum([HomogeneousTerm.unit(support, dim)], alpha)


def is_admissible(s: FormalSum, completion_hint: Sequence[HomogeneousTerm] | None = None) -> Certificate:
    """Two-tier check that ``s`` is part of a decomposition of the unit.

    The necessary tier asks that the alpha-roots sum to at most the identity.
    The exact tier asks that the roots of ``s`` plus those of the hint (or of
    ``s`` alone) sum to the identity.
    """
    total = s.root_sum()
    top = nl.max_eigenvalue(total) if s.terms else 0.0
    if top > 1 + nl.TAU_PSD:
        raise NotAdmissible(f"alpha-roots sum to an operator with eigenvalue {top:.6g} > 1")
    one = nl.identity(s.size)
    if completion_hint is None:
        resid = nl.max_abs(total - one)
        return Certificate(EXACT if resid <= nl.TAU_FN else NECESSARY, resid)
    for t in completion_hint:
        if t.support != s.support or (t.factors and t.dim != s.dim):
            raise IncompleteHint("hint term does not live on the sum's support")
    full = total + sum((t.root(s.alpha) for t in completion_hint), nl.zeros(s.size))
    resid = nl.max_abs(full - one)
    if resid > nl.TAU_FN:
        raise IncompleteHint(f"terms and hint miss the identity by {resid:.3e}")
    return Certificate(EXACT, resid)


def _compatible(a: FormalSum, b: FormalSum) -> None:
    if a.alpha != b.alpha:
        raise InvalidAlpha(f"alpha {a.alpha} vs {b.alpha}")
    if a.support != b.support or a.dim != b.dim:
        raise SupportMismatch("formal sums live on different supports")


def oplus_D(a: FormalSum, b: FormalSum) -> FormalSum:
    """Concatenate term lists; :class:`NotAdmissible` if the roots overshoot 1."""
    _compatible(a, b)
    terms = a.terms + b.terms
    probe = FormalSum(a.alpha, a.support, a.dim, terms, Certificate(NECESSARY, 0.0))
    return FormalSum(a.alpha, a.support, a.dim, terms, is_admissible(probe))


def operator_close(a: FormalSum, b: FormalSum, tol: float = nl.TAU_FN) -> bool:
    _compatible(a, b)
    return nl.max_abs(a.root_sum() - b.root_sum()) <= tol


def _merge(x: HomogeneousTerm, y: HomogeneousTerm, al: AlphaParam) -> HomogeneousTerm | None:
    diff = [i for i, (e, f) in enumerate(zip(x.factors, y.factors)) if not e.close_to(f, nl.TAU_LIN)]
    if len(diff) > 1:
        return None
    if not diff:
        # identical terms: n-fold sum in the first slot
        if not x.factors:
            return None
        diff = [0]
    i = diff[0]
    if not summable_alpha(x.factors[i], y.factors[i], al):
        return None
    try:
        merged = oplus_alpha(x.factors[i], y.factors[i], al)
    except NotSummable:
        return None
    return x.replace(i, merged)


def normalize(s: FormalSum) -> FormalSum:
    """Canonical shorter term list with the same operator value.

    Zero terms are dropped and terms that differ in at most one factor are
    merged through that factor, repeatedly.
    """
    terms = [t for t in s.terms if not any(e.is_zero() for e in t.factors)]
    changed = True
    while changed:
        changed = False
        for i, j in itertools.combinations(range(len(terms)), 2):
            m = _merge(terms[i], terms[j], s.alpha)
            if m is not None:
                terms = [t for k, t in enumerate(terms) if k not in (i, j)] + [m]
                changed = True
                break
    return FormalSum(s.alpha, s.support, s.dim, tuple(terms), s.certificate)


# complements ---------------------------------------------------------------

def _rest_complement(roots: list[list[np.ndarray]], last: bool) -> list[list[np.ndarray]] | None:
    """Root-space terms completing ``sum_i (x) roots[i]`` to the identity.

    Peels one slot (the last one for G*, the first for G**) and recurses on
    the remaining slots. Returns None when some partial sum exceeds 1.
    """
    n = len(roots[0])
    dim = roots[0][0].shape[0]
    one = nl.identity(dim)
    if n == 1:
        rest = one - sum(r[0] for r in roots)
        if nl.min_eigenvalue(rest) < -nl.TAU_PSD:
            return None
        return [[rest]]
    out = []
    for r in roots:
        if last:
            out.append(r[:-1] + [one - r[-1]])
        else:
            out.append([one - r[0]] + r[1:])
    inner = _rest_complement([r[:-1] if last else r[1:] for r in roots], last)
    if inner is None:
        return None
    for r in inner:
        out.append(r + [one] if last else [one] + r)
    return out


def complement(s: FormalSum) -> tuple[FormalSum, str]:
    """Formal sum completing ``s`` to the unit, and which formula produced it.

    G* splits off the last slot, ``E_i (x) (1 - F_i^(1/alpha))^alpha`` plus
    ``(1 - sum E_i^(1/alpha))^alpha (x) 1``; G** is its mirror image. G* is
    preferred when both are defined.
    """
    al = s.alpha
    if not s.support:
        if len(s.terms) == 1:
            return FormalSum(al, (), s.dim, ()), "G*"
        raise NotAdmissible("a sum without slots is a unit only with exactly one term")
    if not s.terms:
        return unit_sum(s.support, s.dim, al), "G*"
    roots = [[e.power(al.root) for e in t.factors] for t in s.terms]
    for label, last in (("G*", True), ("G**", False)):
        comp = _rest_complement(roots, last)
        if comp is None:
            continue
        terms = [
            HomogeneousTerm(s.support, tuple(Effect(nl.pow_psd(r, al.value)) for r in row))
            for row in comp
        ]
        out = FormalSum(al, s.support, s.dim, tuple(terms), Certificate(NECESSARY, 0.0))
        return FormalSum(al, s.support, s.dim, out.terms, is_admissible(out, s.terms)), label
    raise NotAdmissible("neither G* nor G** is defined for this sum")


# decoherence of terms and sums -----------------------------------------------

def d_hat(rho: DensityState, a: HomogeneousTerm, b: HomogeneousTerm, ctx: EvolutionContext) -> complex:
    """Decoherence value of two terms read as effect histories on their support."""
    if a.support != b.support:
        raise SupportMismatch("terms live on different supports")
    if not a.factors:
        return complex(1.0)
    return d_weight(rho, a.history(), b.history(), ctx)


def d_sum(rho: DensityState, a: FormalSum, b: FormalSum, ctx: EvolutionContext) -> complex:
    """Sum of ``d_hat`` over all term pairs."""
    _compatible(a, b)
    if not a.support:
        return complex(len(a.terms) * len(b.terms))
    ca = [class_operator(t.history(), ctx) for t in a.terms]
    cb = [class_operator(t.history(), ctx) for t in b.terms]
    if rho.dim != ctx.dim or a.dim != ctx.dim:
        raise DimensionMismatch("state, sums and hamiltonian must share a dimension")
    return complex(sum((pairing(x, rho, y) for x in ca for y in cb), 0j))


# full D-poset of one-effect extensions -----------------------------------------

@dataclass(frozen=True, eq=False)
class FullDPoset:
    """Extensions ``u_E`` of a base history by one effect at ``t_star``."""

    base: HomogeneousHistory
    t_star: float
    ctx: EvolutionContext
    state: DensityState

    def __post_init__(self):
        object.__setattr__(self, "t_star", float(self.t_star))
        tf = self.base.t_final
        if tf is not None and not self.t_star > tf:
            raise TimeNotAfterFinal(f"t*={self.t_star} is not after final time {tf}")
        if not (self.base.dim == self.ctx.dim == self.state.dim):
            raise DimensionMismatch("base, hamiltonian and state dims differ")

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def support(self) -> tuple:
        return tuple(sorted(set(self.base.support) | {self.t_star}))

    def extension(self, e: Effect) -> HomogeneousHistory:
        return extend_at(self.base, self.t_star, e)

    def term(self, e: Effect) -> HomogeneousTerm:
        return term_from_history(self.extension(e), self.support)

    def d(self, e: Effect, f: Effect) -> complex:
        return d_hat(self.state, self.term(e), self.term(f), self.ctx)

    def reduced_state(self) -> np.ndarray:
        """``W C(u0) rho C(u0)^H W^H`` with ``W = U(t*, t0)``; trace ``d(u0, u0)``."""
        c = class_operator(self.base, self.ctx)
        w = self.ctx.U(self.t_star, self.ctx.t0) @ c
        return w @ self.state.op @ w.conj().T

    def reduced_prob(self, e: Effect) -> float:
        if e.dim != self.dim:
            raise DimensionMismatch("effect dim differs")
        return float(np.trace(self.reduced_state() @ e.op).real)


def full_dposet_prob(fd: FullDPoset, e: Effect) -> float:
    """``d(u_E, u_E)``, clamped to ``[0, 1]``."""
    if e.dim != fd.dim:
        raise DimensionMismatch(f"effect dim {e.dim} vs history dim {fd.dim}")
    p = fd.d(e, e).real
    return min(1.0, max(0.0, p))


def normalized_reduced_prob(fd: FullDPoset, e: Effect) -> float:
    """Born value of ``E`` in the normalized reduced state (when ``d(u0, u0) > 0``)."""
    sigma = fd.reduced_state()
    tr = float(np.trace(sigma).real)
    if tr <= nl.TAU_FN:
        raise ValidationError("base history has vanishing weight")
    return gleason_prob(DensityState(sigma / tr), e)


# order-k histories -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OrderKFamily:
    """Base history plus ``m`` blocks of ``k`` insertion times each.

    No base time and no time of another block may lie within a block's
    closed time span; that is what makes the propagators telescope.
    """

    base: HomogeneousHistory
    k: int
    slots: tuple
    ctx: EvolutionContext
    state: DensityState

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValidationError(f"k must be a positive integer, got {self.k!r}")
        slots = tuple(tuple(float(t) for t in block) for block in self.slots)
        if not slots:
            raise SlotMismatch("at least one block is needed")
        base_times = set(self.base.support)
        for r, block in enumerate(slots):
            if len(block) != self.k:
                raise SlotMismatch(f"block {r} has {len(block)} times, expected {self.k}")
            if any(b <= a for a, b in zip(block, block[1:])):
                raise InvalidSupport(f"block {r} times are not strictly increasing")
            lo, hi = block[0], block[-1]
            others = base_times | {t for s, blk in enumerate(slots) if s != r for t in blk}
            if any(lo <= t <= hi for t in others):
                raise InvalidSupport(f"block {r} span [{lo}, {hi}] interleaves other times")
        if not (self.base.dim == self.ctx.dim == self.state.dim):
            raise DimensionMismatch("base, hamiltonian and state dims differ")
        object.__setattr__(self, "slots", slots)

    @classmethod
    def grid(cls, base, k, m, ctx, state, half_width: float = 0.5, start: float | None = None) -> "OrderKFamily":
        """Blocks of width ``2 * half_width`` placed after the base history."""
        if start is None:
            start = (base.t_final if base.t_final is not None else ctx.t0) + 1.0
        slots = []
        for r in range(m):
            centre = start + r * (2 * half_width + 1.0) + half_width
            slots.append(tuple(np.linspace(centre - half_width, centre + half_width, k)) if k > 1 else (centre,))
        return cls(base, k, tuple(slots), ctx, state)

    @property
    def m(self) -> int:
        return len(self.slots)

    @property
    def t_initial(self) -> float:
        return min(set(self.base.support) | {t for b in self.slots for t in b})

    @property
    def support(self) -> tuple:
        return tuple(sorted(set(self.base.support) | {t for b in self.slots for t in b}))


def _heisenberg_effect(e: Effect, t: float, ti: float, ctx: EvolutionContext) -> Effect:
    w = ctx.U(t, ti)
    return Effect(w @ e.op @ w.conj().T)


def orderk_build(fam: OrderKFamily, effects: Sequence[Effect]) -> HomogeneousHistory:
    """Base history extended by ``E_r(t)`` at every time of block ``r``."""
    effects = list(effects)
    if len(effects) != fam.m:
        raise SlotMismatch(f"{len(effects)} effects for {fam.m} blocks")
    ti = fam.t_initial
    entries = dict(fam.base.entries)
    for block, e in zip(fam.slots, effects):
        if e.dim != fam.base.dim:
            raise DimensionMismatch("effect dim differs from history dim")
        for t in block:
            entries[t] = _heisenberg_effect(e, t, ti, fam.ctx)
    return HomogeneousHistory(fam.base.dim, entries)


def orderk_d(fam: OrderKFamily, left: Sequence[Effect], right: Sequence[Effect]) -> complex:
    u, v = orderk_build(fam, left), orderk_build(fam, right)
    return d_weight(fam.state, u, v, fam.ctx)


def orderk_additivity_residual(
    fam: OrderKFamily,
    r: int,
    e: Effect,
    d: Effect,
    rest: Sequence[Effect],
    probe: Sequence[Effect],
) -> float:
    """Additivity defect of the order-k functional under ``(+)_{2/k}`` in block ``r``.

    ``rest`` holds the effects of the other blocks (length ``m``; entry ``r``
    is ignored) and ``probe`` the right-hand argument.
    """
    rest = list(rest)
    if len(rest) != fam.m or len(probe) != fam.m or not 0 <= r < fam.m:
        raise SlotMismatch("rest/probe must list one effect per block")
    s = oplus_alpha(e, d, Fraction(2, fam.k))

    def with_r(x):
        out = list(rest)
        out[r] = x
        return out

    lhs = orderk_d(fam, with_r(s), probe)
    rhs = orderk_d(fam, with_r(e), probe) + orderk_d(fam, with_r(d), probe)
    return float(abs(lhs - rhs))


def sqrt_duality_check(a: FormalSum, b: FormalSum, tol: float = nl.TAU_PSD) -> bool:
    """Do "sqrt a (+) sqrt b defined" and "a (+)_2 b defined" agree for single terms?

    The first predicate works with square roots of the assembled tensor
    operators, the second with Kronecker products of factor roots.
    """
    for s in (a, b):
        if s.alpha.value != 2 or len(s.terms) != 1:
            raise ValidationError("sqrt duality is stated for single-term sums at alpha = 2")
    _compatible(a, b)
    ta, tb = a.terms[0], b.terms[0]
    lhs = nl.sqrt_psd(ta.operator) + nl.sqrt_psd(tb.operator)
    rhs = ta.root(2) + tb.root(2)
    first = nl.max_eigenvalue(lhs) <= 1 + tol
    second = nl.max_eigenvalue(rhs) <= 1 + tol
    return first == second

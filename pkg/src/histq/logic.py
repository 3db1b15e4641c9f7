"""Boolean history algebras, conditional probabilities and implication.

An algebra is generated by a finite set of atoms: disjoint projector
histories summing to the identity, or effect terms whose alpha-roots sum to
the identity. Elements are sets of atom indices; join, meet and negation are
union, intersection and complement relative to the algebra's own unit. All
decoherence data is additive over atoms, so ``d(S, T)`` is a block sum of
the atom Gram matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import numlin as nl
from .decoherence import (
    CONSISTENCY_TOL,
    WEAK,
    ConsistencyReport,
    DecoherenceMatrix,
    consistency_check,
    d_matrix,
)
from .effect_sums import EXACT, FullDPoset, HomogeneousTerm, formal_sum, full_dposet_prob, term_from_history
from .effects import AlphaParam, DensityState, Effect, commuting_meet_join, effects_commute
from .errors import (
    MeetUndefined,
    NotAdmissible,
    NotComplete,
    NotConsistent,
    NotInCommonAlgebra,
    NullUnit,
    ZeroCondition,
)
from .histories import EvolutionContext, HomogeneousHistory
from .proj_lattice import AtomFamily

PROJECTOR, EFFECT = "projector", "effect"


@dataclass(frozen=True, eq=False)
class BooleanHistoryAlgebra:
    kind: str
    atoms: tuple
    labels: tuple
    support: tuple
    alpha: AlphaParam
    ctx: EvolutionContext = field(repr=False)
    state: DensityState = field(repr=False)
    gram: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def unit(self) -> frozenset:
        return frozenset(range(len(self.atoms)))

    @property
    def zero(self) -> frozenset:
        return frozenset()

    def element(self, items: Iterable) -> frozenset:
        """Element from atom indices or atom labels."""
        out = set()
        for x in items:
            if isinstance(x, str):
                if x not in self.labels:
                    raise NotInCommonAlgebra(f"no atom labelled {x!r}")
                out.add(self.labels.index(x))
            else:
                i = int(x)
                if not 0 <= i < len(self.atoms):
                    raise NotInCommonAlgebra(f"atom index {i} out of range")
                out.add(i)
        return frozenset(out)

    def elements(self) -> list[frozenset]:
        n = len(self.atoms)
        return [frozenset(i for i in range(n) if mask >> i & 1) for mask in range(1 << n)]

    def join(self, a, b) -> frozenset:
        return self.element(a) | self.element(b)

    def meet(self, a, b) -> frozenset:
        return self.element(a) & self.element(b)

    def neg(self, a) -> frozenset:
        return self.unit - self.element(a)

    def valuation(self, s) -> np.ndarray:
        """Operator assigned to an element: projector sum, or ``(sum of roots)^alpha``."""
        s = sorted(self.element(s))
        n = len(self.support)
        size = self.ctx.dim ** n
        if self.kind == PROJECTOR:
            terms = [term_from_history(self.atoms[i], self.support) for i in s]
            return sum((t.operator for t in terms), nl.zeros(size))
        roots = sum((self.atoms[i].root(self.alpha) for i in s), nl.zeros(size))
        return nl.pow_psd(roots, self.alpha.value)

    def d(self, a, b) -> complex:
        ia, ib = sorted(self.element(a)), sorted(self.element(b))
        if not ia or not ib:
            return 0j
        return complex(self.gram[np.ix_(ia, ib)].sum())

    def consistency(self, mode: str = WEAK, tol: float = CONSISTENCY_TOL) -> ConsistencyReport:
        # atoms are pairwise disjoint, so every off-diagonal atom pair counts
        dm = DecoherenceMatrix(tuple(self._histories()), self.gram, self.ctx, self.state)
        return consistency_check(dm, mode, tol, disjoint_only=False)

    def _histories(self) -> list[HomogeneousHistory]:
        if self.kind == PROJECTOR:
            return list(self.atoms)
        return [t.history() for t in self.atoms]

    def unit_weight(self) -> float:
        w = self.d(self.unit, self.unit).real
        if w <= nl.TAU_FN:
            raise NullUnit(f"d(1, 1) = {w!r} vanishes")
        return w

    def prob(self, s) -> float:
        """``d(s, s) / d(1, 1)``; meaningful as a measure only on consistent algebras."""
        return min(1.0, max(0.0, self.d(s, s).real / self.unit_weight()))

    def require_consistent(self, tol: float = CONSISTENCY_TOL) -> None:
        rep = self.consistency(WEAK, tol)
        if not rep.passed:
            w = rep.worst()
            raise NotConsistent(
                f"algebra is not weakly decoherent: |Re d({w.i},{w.j})| = {w.residual:.6g} > {tol:g}",
                rep.violations,
            )


def build_algebra(
    atoms: Sequence,
    alpha,
    ctx: EvolutionContext,
    rho: DensityState,
    labels: Sequence[str] = (),
) -> BooleanHistoryAlgebra:
    """Algebra generated by projector-history atoms or by effect terms.

    Projector atoms must be pairwise disjoint and complete. Effect atoms
    (histories with a non-projector entry, or terms) must have alpha-roots
    summing exactly to the identity on their common support.
    """
    al = AlphaParam.parse(alpha)
    atoms = tuple(atoms)
    if not atoms:
        raise NotComplete("an algebra needs at least one atom")
    is_proj = all(isinstance(a, HomogeneousHistory) and a.is_projector_history() for a in atoms)
    if is_proj:
        fam = AtomFamily(atoms, tuple(labels))
        hist = list(fam.atoms)
        kind, stored, labels, support = PROJECTOR, fam.atoms, fam.labels, fam.support
    else:
        if all(isinstance(a, HomogeneousHistory) for a in atoms):
            support = tuple(sorted(set().union(*(a.support for a in atoms))))
            terms = [term_from_history(a, support) for a in atoms]
        elif all(isinstance(a, HomogeneousTerm) for a in atoms):
            terms = list(atoms)
            support = terms[0].support
        else:
            raise NotAdmissible("atoms must all be histories or all be terms")
        s = formal_sum(terms, al)
        if s.certificate.level != EXACT:
            raise NotComplete(
                f"atom roots at alpha={al} miss the identity by {s.certificate.residual:.3e}"
            )
        hist = [t.history() for t in terms]
        labels = tuple(labels) if labels else tuple(f"a{i}" for i in range(len(terms)))
        kind, stored = EFFECT, tuple(terms)
    dm = d_matrix(rho, hist, ctx)
    return BooleanHistoryAlgebra(kind, stored, tuple(labels), tuple(support), al, ctx, rho, dm.gram)


def conditional_prob(alg: BooleanHistoryAlgebra, h, k, tol: float = CONSISTENCY_TOL) -> float:
    """``p(h & k) / p(h)`` on a weakly consistent algebra."""
    alg.require_consistent(tol)
    ph = alg.prob(h)
    if ph <= nl.TAU_FN:
        raise ZeroCondition(f"p(h) = {ph!r} vanishes")
    return min(1.0, alg.prob(alg.meet(h, k)) / ph)


@dataclass(frozen=True)
class ImplicationResult:
    holds: bool
    p_meet: float
    p_left: float
    p_join: float
    p_right: float
    residuals: tuple

    def as_dict(self) -> dict:
        return {
            "holds": self.holds,
            "p_meet": self.p_meet,
            "p_left": self.p_left,
            "p_join": self.p_join,
            "p_right": self.p_right,
            "residuals": list(self.residuals),
        }


def _verdict(p_meet, p_left, p_join, p_right, tol) -> ImplicationResult:
    r1, r2 = abs(p_meet - p_left), abs(p_join - p_right)
    holds = r1 <= tol and r2 <= tol and p_left > tol and p_right > tol
    return ImplicationResult(bool(holds), p_meet, p_left, p_join, p_right, (r1, r2))


def implies(alg: BooleanHistoryAlgebra, u1, u2, tol: float = CONSISTENCY_TOL) -> ImplicationResult:
    """``u1`` implies ``u2``: ``p(u1 & u2) = p(u1) != 0`` and ``p(u1 | u2) = p(u2) != 0``."""
    a, b = alg.element(u1), alg.element(u2)
    w = alg.unit_weight()

    def p(s):
        return alg.d(s, s).real / w

    return _verdict(p(a & b), p(a), p(a | b), p(b), tol)


def implies_conditional(alg: BooleanHistoryAlgebra, h, k, tol: float = CONSISTENCY_TOL) -> bool:
    """Ordinary-history form of implication: ``p(k | h) = 1`` with ``p(h) > 0``."""
    try:
        return abs(conditional_prob(alg, h, k, tol) - 1.0) <= tol
    except ZeroCondition:
        return False


def equivalent(alg: BooleanHistoryAlgebra, u1, u2, tol: float = CONSISTENCY_TOL) -> bool:
    return implies(alg, u1, u2, tol).holds and implies(alg, u2, u1, tol).holds


def implies_full(fd: FullDPoset, e1: Effect, e2: Effect, tol: float = CONSISTENCY_TOL) -> ImplicationResult:
    """Implication between one-effect extensions, for commuting effects.

    The meet and join are taken pointwise in the commutative algebra
    generated by ``E1`` and ``E2``.
    """
    if not effects_commute(e1, e2):
        raise MeetUndefined("meet of non-commuting effects is not defined")
    lo, hi = commuting_meet_join(e1, e2)
    p = [full_dposet_prob(fd, e) for e in (lo, e1, hi, e2)]
    return _verdict(*p, tol)

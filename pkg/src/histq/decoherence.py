"""Decoherence functional, consistency checks and induced probabilities.

``d(u, v) = tr(C(u) rho C(v)^H)``. A family is weakly decoherent when
``Re d`` vanishes on its (disjoint) off-diagonal pairs and mediumly
decoherent when ``d`` itself vanishes there. On a consistent Boolean family
``p(h) = d(h, h) / d(1_C, 1_C)`` is a probability measure.

The consistency tolerance is purely numerical: exact arithmetic would need
``Re d = 0`` exactly, and nothing here treats a small nonzero value as
"approximately consistent".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import numlin as nl
from .effects import DensityState
from .errors import (
    DimensionMismatch,
    InternalError,
    NotConsistent,
    NotInCommonAlgebra,
    NotProjectorHistory,
    NullUnit,
    ValidationError,
)
from .histories import EvolutionContext, HomogeneousHistory, class_operator, disjoint_pointwise
from .proj_lattice import AtomFamily, class_operator_additive

CONSISTENCY_TOL = 1e-8

WEAK, MEDIUM = "weak", "medium"


def _check(rho: DensityState, ctx: EvolutionContext, *hs: HomogeneousHistory) -> None:
    if rho.dim != ctx.dim:
        raise DimensionMismatch(f"state dim {rho.dim} vs hamiltonian dim {ctx.dim}")
    for h in hs:
        if h.dim != ctx.dim:
            raise DimensionMismatch(f"history dim {h.dim} vs hamiltonian dim {ctx.dim}")


def pairing(c_u: np.ndarray, rho: DensityState, c_v: np.ndarray) -> complex:
    """``tr(C_u rho C_v^H)`` for precomputed class operators."""
    return complex(np.sum((c_u @ rho.op) * c_v.conj()))


def d_weight(rho: DensityState, u: HomogeneousHistory, v: HomogeneousHistory, ctx: EvolutionContext) -> complex:
    _check(rho, ctx, u, v)
    return pairing(class_operator(u, ctx), rho, class_operator(v, ctx))


@dataclass(frozen=True, eq=False)
class DecoherenceMatrix:
    family: tuple
    gram: np.ndarray
    context: EvolutionContext = field(repr=False)
    state: DensityState = field(repr=False)

    def __len__(self) -> int:
        return len(self.family)

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.gram))


def d_matrix(rho: DensityState, family: Sequence[HomogeneousHistory], ctx: EvolutionContext) -> DecoherenceMatrix:
    family = tuple(family)
    _check(rho, ctx, *family)
    ops = [class_operator(h, ctx) for h in family]
    n = len(ops)
    gram = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            gram[i, j] = pairing(ops[i], rho, ops[j])
            gram[j, i] = np.conj(gram[i, j])
    for i in range(n):
        d = gram[i, i].real
        if d < -nl.TAU_FN:
            raise InternalError(f"negative diagonal d({i},{i}) = {d!r}")
        gram[i, i] = max(d, 0.0)
    return DecoherenceMatrix(family, nl.frozen(gram) if n else gram, ctx, rho)


@dataclass(frozen=True)
class Violation:
    i: int
    j: int
    residual: float


@dataclass(frozen=True)
class ConsistencyReport:
    mode: str
    tolerance: float
    violations: tuple

    @property
    def passed(self) -> bool:
        return not self.violations

    def worst(self) -> Violation | None:
        return max(self.violations, key=lambda v: v.residual, default=None)


def disjoint_pairs(family: Sequence[HomogeneousHistory]) -> set[tuple[int, int]]:
    for h in family:
        if not h.is_projector_history():
            raise NotProjectorHistory("disjoint_only needs projector histories")
    return {
        (i, j)
        for i, j in itertools.combinations(range(len(family)), 2)
        if disjoint_pointwise(family[i], family[j])
    }


def consistency_check(
    dm: DecoherenceMatrix,
    mode: str = WEAK,
    tol: float = CONSISTENCY_TOL,
    disjoint_only: bool = True,
) -> ConsistencyReport:
    """Flag off-diagonal pairs with ``|Re d| > tol`` (weak) or ``|d| > tol`` (medium)."""
    if mode not in (WEAK, MEDIUM):
        raise ValidationError(f"unknown consistency mode {mode!r}")
    n = len(dm)
    if disjoint_only:
        pairs = sorted(disjoint_pairs(dm.family))
    else:
        pairs = list(itertools.combinations(range(n), 2))
    violations = []
    for i, j in pairs:
        z = dm.gram[i, j]
        r = abs(z.real) if mode == WEAK else abs(z)
        if r > tol:
            violations.append(Violation(i, j, float(r)))
    return ConsistencyReport(mode, float(tol), tuple(violations))


def probability_measure(
    dm: DecoherenceMatrix,
    unit_index: int,
    tol: float = CONSISTENCY_TOL,
    disjoint_only: bool | None = None,
) -> list[float]:
    """``p_i = d(h_i, h_i) / d(1_C, 1_C)`` with ``family[unit_index]`` as ``1_C``.

    Refuses with :class:`NotConsistent` unless the family is weakly
    decoherent. By default only disjoint pairs are checked when every history
    is a projector history, and all pairs otherwise.
    """
    if not 0 <= unit_index < len(dm):
        raise ValidationError(f"unit index {unit_index} out of range")
    if disjoint_only is None:
        disjoint_only = all(h.is_projector_history() for h in dm.family)
    report = consistency_check(dm, WEAK, tol, disjoint_only=disjoint_only)
    if not report.passed:
        w = report.worst()
        raise NotConsistent(
            f"family is not weakly decoherent: |Re d({w.i},{w.j})| = {w.residual:.6g} > {tol:g}",
            report.violations,
        )
    diag = dm.diagonal()
    norm = diag[unit_index]
    if norm <= nl.TAU_FN:
        raise NullUnit(f"d(1_C, 1_C) = {norm!r} vanishes")
    out = []
    for x in diag / norm:
        if x > 1 + nl.TAU_FN:
            raise InternalError(f"probability {x!r} exceeds 1")
        out.append(float(min(max(x, 0.0), 1.0)))
    return out


def element_d(
    rho: DensityState,
    fam: AtomFamily,
    a: Iterable[int],
    b: Iterable[int],
    ctx: EvolutionContext,
) -> complex:
    """Decoherence functional of two inhomogeneous histories given as atom sets."""
    return pairing(class_operator_additive(fam, a, ctx), rho, class_operator_additive(fam, b, ctx))


def sum_rule_check(
    rho: DensityState,
    fam: AtomFamily,
    h: Iterable[int],
    k: Iterable[int],
    ctx: EvolutionContext,
) -> float:
    """``|d(h|k) + d(h&k) - d(h) - d(k)|`` for elements of the family's Boolean algebra."""
    try:
        h = frozenset(int(i) for i in h)
        k = frozenset(int(i) for i in k)
    except (TypeError, ValueError) as exc:
        raise NotInCommonAlgebra("elements must be sets of atom indices") from exc
    if any(not 0 <= i < len(fam) for i in h | k):
        raise NotInCommonAlgebra("element refers to an atom outside the family")
    _check(rho, ctx, *fam.atoms)

    # class operators are additive over atoms, so build each atom's once
    atoms = {i: class_operator(fam.atoms[i], ctx) for i in h | k}
    zero = nl.zeros(fam.dim)

    def dd(s):
        c = sum((atoms[i] for i in s), zero)
        return pairing(c, rho, c)

    lhs = dd(h | k) + dd(h & k)
    rhs = dd(h) + dd(k)
    return float(abs(lhs - rhs))

"""Standard histories as projectors on tensor-product spaces.

A projector history ``h`` with support inside ``S`` is embedded as the
Kronecker product of its projectors over ``S`` (time order, identity
padding). Inhomogeneous histories are handled as sets of atoms of a disjoint
complete family; their class operator is the sum over member atoms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import numlin as nl
from .effects import Povm
from .errors import (
    NotComplete,
    NotDisjoint,
    NotProjectiveMeasurement,
    NotProjectorHistory,
    SupportMismatch,
    ValidationError,
)
from .histories import (
    EvolutionContext,
    HomogeneousHistory,
    class_operator,
    disjoint_pointwise,
    padded_effects,
)


@dataclass(frozen=True, eq=False)
class TensorProjector:
    support: tuple
    dim: int
    op: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(float(t) for t in self.support))
        m = nl.as_cmatrix(self.op, "tensor projector")
        if m.shape[0] != self.dim ** len(self.support):
            raise SupportMismatch(f"operator size {m.shape[0]} does not match dim^|S|")
        if not nl.is_projector(m, nl.TAU_FN):
            raise ValidationError("operator is not an orthogonal projector")
        object.__setattr__(self, "op", nl.frozen(m))

    @property
    def size(self) -> int:
        return self.op.shape[0]

    def close_to(self, other: "TensorProjector", tol: float = nl.TAU_FN) -> bool:
        return self.support == other.support and nl.max_abs(self.op - other.op) <= tol


def embed(h: HomogeneousHistory, support: Iterable[float] | None = None) -> TensorProjector:
    """Kronecker product of ``h``'s projectors over ``support`` (default: its own)."""
    if not h.is_projector_history():
        raise NotProjectorHistory("embed needs a projector history")
    support = tuple(sorted(h.support if support is None else (float(t) for t in support)))
    try:
        factors = padded_effects(h, support)
    except ValidationError as exc:
        raise SupportMismatch(str(exc)) from exc
    return TensorProjector(support, h.dim, nl.kron_all(e.op for e in factors))


def _pair(p: TensorProjector, q: TensorProjector) -> None:
    if p.support != q.support or p.dim != q.dim:
        raise SupportMismatch(f"supports {p.support} and {q.support} differ")


def proj_join(p: TensorProjector, q: TensorProjector) -> TensorProjector:
    """Projector onto ``range(p) + range(q)``."""
    _pair(p, q)
    return TensorProjector(p.support, p.dim, nl.range_projector(np.hstack([p.op, q.op])))


def proj_meet(p: TensorProjector, q: TensorProjector) -> TensorProjector:
    """Projector onto ``range(p)`` intersected with ``range(q)``."""
    _pair(p, q)
    one = nl.identity(p.size)
    return TensorProjector(p.support, p.dim, nl.null_projector(np.vstack([one - p.op, one - q.op])))


def proj_neg(p: TensorProjector) -> TensorProjector:
    return TensorProjector(p.support, p.dim, nl.identity(p.size) - p.op)


@dataclass(frozen=True, eq=False)
class AtomFamily:
    """Pairwise disjoint, complete family of projector histories.

    Atoms are compared over the union of their supports; an atom that is the
    identity at some of those times simply has a smaller own support.
    """

    atoms: tuple
    labels: tuple = ()

    def __post_init__(self):
        atoms = tuple(self.atoms)
        if not atoms:
            raise ValidationError("atom family is empty")
        dims = {a.dim for a in atoms}
        if len(dims) != 1:
            raise ValidationError(f"atoms have different dims {sorted(dims)}")
        for a in atoms:
            if not a.is_projector_history():
                raise NotProjectorHistory("atoms must be projector histories")
        labels = tuple(self.labels) if self.labels else tuple(f"a{i}" for i in range(len(atoms)))
        if len(labels) != len(atoms):
            raise ValidationError("one label per atom")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "labels", labels)
        for i, j in itertools.combinations(range(len(atoms)), 2):
            if not disjoint_pointwise(atoms[i], atoms[j]):
                raise NotDisjoint(f"atoms {labels[i]} and {labels[j]} are not disjoint")
        resid = self.completeness_residual()
        if resid > nl.TAU_FN:
            raise NotComplete(f"atoms do not sum to the identity (residual {resid:.3e})")

    @property
    def dim(self) -> int:
        return self.atoms[0].dim

    @property
    def support(self) -> tuple[float, ...]:
        return tuple(sorted(set().union(*(a.support for a in self.atoms))))

    def __len__(self) -> int:
        return len(self.atoms)

    def embedded(self) -> list[TensorProjector]:
        s = self.support
        return [embed(a, s) for a in self.atoms]

    def completeness_residual(self) -> float:
        ops = [p.op for p in self.embedded()]
        return nl.max_abs(sum(ops[1:], ops[0]) - nl.identity(ops[0].shape[0]))

    def element_projector(self, element: Iterable[int]) -> TensorProjector:
        """Tensor projector of the join of the given atoms."""
        idx = _element(self, element)
        emb = self.embedded()
        n = emb[0].size
        op = sum((emb[i].op for i in idx), nl.zeros(n))
        return TensorProjector(self.support, self.dim, op)


def _element(fam: AtomFamily, element: Iterable[int]) -> frozenset:
    idx = frozenset(int(i) for i in element)
    bad = [i for i in idx if not 0 <= i < len(fam)]
    if bad:
        raise ValidationError(f"atom indices {bad} out of range")
    return idx


def family_from_pvms(pvms: Sequence[tuple[float, Povm]], dim: int | None = None) -> AtomFamily:
    """All outcome combinations of projective measurements at distinct times.

    With no measurements the family is the single unit history (of ``dim``).
    """
    pvms = sorted(((float(t), m) for t, m in pvms), key=lambda x: x[0])
    times = [t for t, _ in pvms]
    if len(set(times)) != len(times):
        raise ValidationError("PVM times must be distinct")
    for t, m in pvms:
        if not m.is_projective():
            raise NotProjectiveMeasurement(f"measurement at t={t} is not projective")
    if not pvms:
        return unit_family(dim or 1)
    dim = pvms[0][1].dim
    atoms, labels = [], []
    for combo in itertools.product(*(m.outcomes for _, m in pvms)):
        atoms.append(HomogeneousHistory(dim, tuple((t, e) for t, (_, e) in zip(times, combo))))
        labels.append("/".join(lab for lab, _ in combo))
    return AtomFamily(tuple(atoms), tuple(labels))


def unit_family(dim: int) -> AtomFamily:
    return AtomFamily((HomogeneousHistory.unit(dim),), ("1",))


def class_operator_additive(fam: AtomFamily, element: Iterable[int], ctx: EvolutionContext) -> np.ndarray:
    """Sum of atom class operators over a subset of the family."""
    idx = _element(fam, element)
    c = nl.zeros(fam.dim)
    for i in sorted(idx):
        c = c + class_operator(fam.atoms[i], ctx)
    return c

"""Effects, density states, POVMs and the alpha-scaled D-poset operations.

For a positive rational ``alpha`` the partial sum on effects is

    A (+)_alpha B = (A^(1/alpha) + B^(1/alpha))^alpha,  defined iff A^(1/alpha) + B^(1/alpha) <= 1,

with ``alpha = 1`` the ordinary effect sum and ``alpha = 2`` the square-root
sum. The induced order is ``A <=_alpha B`` iff ``A^(1/alpha) <= B^(1/alpha)``
and the difference is ``B (-)_alpha A = (B^(1/alpha) - A^(1/alpha))^alpha``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import numlin as nl
from .errors import (
    DimensionMismatch,
    InternalError,
    InvalidAlpha,
    InvalidEffect,
    InvalidPovm,
    InvalidState,
    NotComparable,
    NotSummable,
    ValidationError,
)

MAX_ALPHA_TERM = 12


@dataclass(frozen=True)
class AlphaParam:
    """Positive rational scaling parameter with small numerator and denominator."""

    value: Fraction

    def __post_init__(self):
        v = Fraction(self.value)
        if v <= 0:
            raise InvalidAlpha(f"alpha must be positive, got {v}")
        if v.numerator > MAX_ALPHA_TERM or v.denominator > MAX_ALPHA_TERM:
            raise InvalidAlpha(f"alpha {v} exceeds numerator/denominator bound {MAX_ALPHA_TERM}")
        object.__setattr__(self, "value", v)

    @classmethod
    def parse(cls, x) -> "AlphaParam":
        if isinstance(x, AlphaParam):
            return x
        if isinstance(x, float):
            x = Fraction(x).limit_denominator(MAX_ALPHA_TERM)
        try:
            return cls(Fraction(x))
        except (ValueError, ZeroDivisionError, TypeError) as exc:
            raise InvalidAlpha(f"cannot parse alpha from {x!r}") from exc

    @property
    def root(self) -> Fraction:
        return 1 / self.value

    def __str__(self) -> str:
        return str(self.value)


def _alpha(a) -> AlphaParam:
    return AlphaParam.parse(a)


@dataclass(frozen=True, eq=False)
class Effect:
    """Operator ``F`` with ``0 <= F <= 1``.

    Construction symmetrizes the input and clamps eigenvalues that sit within
    ``tol`` outside ``[0, 1]``.
    """

    op: np.ndarray
    tol: float = field(default=nl.TAU_PSD, repr=False)

    def __post_init__(self):
        m = nl.as_cmatrix(self.op, "effect")
        defect = nl.hermiticity_defect(m)
        if defect > nl.TAU_LIN:
            raise InvalidEffect(f"effect is not Hermitian (defect {defect:.3e})")
        m = 0.5 * (m + m.conj().T)
        lam, v = np.linalg.eigh(m)
        if lam[0] < -self.tol or lam[-1] > 1 + self.tol:
            raise InvalidEffect(
                f"effect spectrum [{lam[0]:.6g}, {lam[-1]:.6g}] not within [0, 1]"
            )
        if lam[0] < 0 or lam[-1] > 1:
            m = (v * np.clip(lam, 0.0, 1.0)) @ v.conj().T
        object.__setattr__(self, "op", nl.frozen(m))

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    @classmethod
    def identity(cls, n: int) -> "Effect":
        return cls(nl.identity(n))

    @classmethod
    def zero(cls, n: int) -> "Effect":
        return cls(nl.zeros(n))

    @classmethod
    def scaled_identity(cls, n: int, c: float) -> "Effect":
        return cls(c * nl.identity(n))

    @classmethod
    def projector(cls, *vectors) -> "Effect":
        """Projector onto the span of the given vectors."""
        cols = np.column_stack([np.asarray(v, dtype=complex) for v in vectors])
        return cls(nl.range_projector(cols))

    @classmethod
    def diag(cls, *values) -> "Effect":
        return cls(np.diag(np.asarray(values, dtype=complex)))

    def power(self, p) -> np.ndarray:
        # cached per instance; the instance is immutable
        cache = self.__dict__.setdefault("_powers", {})
        key = Fraction(p) if not isinstance(p, float) else p
        if key not in cache:
            cache[key] = nl.frozen(nl.pow_psd(self.op, p))
        return cache[key]

    def sqrt(self) -> np.ndarray:
        return self.power(Fraction(1, 2))

    def complement(self) -> "Effect":
        return Effect(nl.identity(self.dim) - self.op)

    def is_projector(self, tol: float = nl.TAU_FN) -> bool:
        return nl.is_projector(self.op, tol)

    def is_identity(self, tol: float = nl.TAU_LIN) -> bool:
        return nl.max_abs(self.op - nl.identity(self.dim)) <= tol

    def is_zero(self, tol: float = nl.TAU_LIN) -> bool:
        return nl.max_abs(self.op) <= tol

    def close_to(self, other: "Effect", tol: float = nl.TAU_FN) -> bool:
        return self.dim == other.dim and nl.max_abs(self.op - other.op) <= tol

    def spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.op)


@dataclass(frozen=True, eq=False)
class DensityState:
    """Positive operator with unit trace."""

    op: np.ndarray

    def __post_init__(self):
        m = nl.as_cmatrix(self.op, "state")
        if nl.hermiticity_defect(m) > nl.TAU_LIN:
            raise InvalidState("state is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        lam, v = np.linalg.eigh(m)
        if lam[0] < -nl.TAU_PSD:
            raise InvalidState(f"state is not PSD (min eigenvalue {lam[0]:.3e})")
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > nl.TAU_LIN:
            raise InvalidState(f"state trace {tr!r} is not 1")
        if lam[0] < 0:
            m = (v * np.clip(lam, 0.0, None)) @ v.conj().T
        object.__setattr__(self, "op", nl.frozen(m))

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    @classmethod
    def pure(cls, ket) -> "DensityState":
        """Projector onto ``ket`` (normalized here)."""
        psi = np.asarray(ket, dtype=complex).ravel()
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise InvalidState("zero ket")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityState":
        return cls(nl.identity(n) / n)


@dataclass(frozen=True, eq=False)
class Povm:
    """Labelled effects summing to the identity."""

    outcomes: tuple
    tol: float = field(default=nl.TAU_LIN, repr=False)

    def __post_init__(self):
        outcomes = tuple((str(label), e) for label, e in self.outcomes)
        if not outcomes:
            raise InvalidPovm("POVM needs at least one outcome")
        dims = {e.dim for _, e in outcomes}
        if len(dims) != 1:
            raise InvalidPovm(f"outcome dimensions differ: {sorted(dims)}")
        labels = [label for label, _ in outcomes]
        if len(set(labels)) != len(labels):
            raise InvalidPovm("duplicate outcome labels")
        n = dims.pop()
        total = sum((e.op for _, e in outcomes), nl.zeros(n))
        resid = nl.max_abs(total - nl.identity(n))
        if resid > self.tol:
            raise InvalidPovm(f"outcomes do not sum to identity (residual {resid:.3e})")
        object.__setattr__(self, "outcomes", outcomes)

    @property
    def dim(self) -> int:
        return self.outcomes[0][1].dim

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.outcomes]

    @property
    def effects(self) -> list[Effect]:
        return [e for _, e in self.outcomes]

    def is_projective(self, tol: float = nl.TAU_FN) -> bool:
        return all(e.is_projector(tol) for e in self.effects)

    @classmethod
    def from_basis(cls, vectors: Sequence, labels: Sequence[str] | None = None) -> "Povm":
        labels = labels or [str(i) for i in range(len(vectors))]
        return cls(tuple((lab, Effect.projector(v)) for lab, v in zip(labels, vectors)))


def _same_dim(*effects: Effect) -> int:
    dims = {e.dim for e in effects}
    if len(dims) != 1:
        raise DimensionMismatch(f"effects have different dimensions {sorted(dims)}")
    return dims.pop()


def gleason_prob(rho: DensityState, f: Effect) -> float:
    """``Re tr(rho F)``, clamped to ``[0, 1]``."""
    if rho.dim != f.dim:
        raise DimensionMismatch(f"state dim {rho.dim} vs effect dim {f.dim}")
    p = float(np.trace(rho.op @ f.op).real)
    if p < -nl.TAU_FN or p > 1 + nl.TAU_FN:
        raise InternalError(f"Born value {p!r} outside [0, 1]")
    return min(1.0, max(0.0, p))


def _result_tol(al: AlphaParam, tol: float) -> float:
    # a root sum within tol of 1 lands within about alpha*tol of 1 after powering
    return max(nl.TAU_PSD, 2 * float(al.value) * tol)


def alpha_root(a: Effect, alpha) -> np.ndarray:
    return a.power(_alpha(alpha).root)


def from_root(root: np.ndarray, alpha) -> Effect:
    return Effect(nl.pow_psd(root, _alpha(alpha).value))


def summable_alpha(a: Effect, b: Effect, alpha, tol: float = nl.TAU_PSD) -> bool:
    _same_dim(a, b)
    return nl.max_eigenvalue(alpha_root(a, alpha) + alpha_root(b, alpha)) <= 1 + tol


def leq_alpha(a: Effect, b: Effect, alpha, tol: float = nl.TAU_PSD) -> bool:
    """Order of the D-poset ``(effects, (+)_alpha)``: some ``C`` with ``A (+) C = B``."""
    _same_dim(a, b)
    return nl.min_eigenvalue(alpha_root(b, alpha) - alpha_root(a, alpha)) >= -tol


def oplus_alpha(a: Effect, b: Effect, alpha=1, tol: float = nl.TAU_PSD) -> Effect:
    """``(A^(1/alpha) + B^(1/alpha))^alpha``; :class:`NotSummable` if the root sum exceeds 1."""
    al = _alpha(alpha)
    _same_dim(a, b)
    roots = alpha_root(a, al) + alpha_root(b, al)
    top = nl.max_eigenvalue(roots)
    if top > 1 + tol:
        raise NotSummable(f"root sum has eigenvalue {top:.6g} > 1 at alpha={al}")
    return Effect(nl.pow_psd(roots, al.value), tol=_result_tol(al, tol))


def ominus_alpha(b: Effect, a: Effect, alpha=1, tol: float = nl.TAU_PSD) -> Effect:
    """``(B^(1/alpha) - A^(1/alpha))^alpha``; :class:`NotComparable` unless ``A <=_alpha B``."""
    al = _alpha(alpha)
    _same_dim(a, b)
    diff = alpha_root(b, al) - alpha_root(a, al)
    low = nl.min_eigenvalue(diff)
    if low < -tol:
        raise NotComparable(f"A is not below B at alpha={al} (min eigenvalue {low:.3e})")
    return Effect(nl.pow_psd(diff, al.value, tol=tol))


def nscale_alpha(a: Effect, n: int, alpha=1, tol: float = nl.TAU_PSD) -> Effect:
    """``n``-fold alpha-sum of ``A`` with itself, ``(n A^(1/alpha))^alpha``."""
    al = _alpha(alpha)
    if int(n) != n or n < 0:
        raise ValidationError(f"n must be a natural number, got {n!r}")
    if n == 0:
        return Effect.zero(a.dim)
    roots = n * alpha_root(a, al)
    top = nl.max_eigenvalue(roots)
    if top > 1 + tol:
        raise NotSummable(f"{n}-fold root sum has eigenvalue {top:.6g} > 1")
    return Effect(nl.pow_psd(roots, al.value), tol=_result_tol(al, tol))


def complement_alpha(a: Effect, alpha=1) -> Effect:
    """``1 (-)_alpha A``, e.g. ``(1 - sqrt(A))^2`` for alpha = 2."""
    return ominus_alpha(Effect.identity(a.dim), a, alpha)


def is_regular(f: Effect, tol: float = nl.TAU_FN) -> bool:
    """Spectrum reaches strictly below and strictly above 1/2."""
    lam = f.spectrum()
    return bool(lam[0] < 0.5 - tol and lam[-1] > 0.5 + tol)


# D-poset axiom checks -----------------------------------------------------

PASS, FAIL, VACUOUS = "pass", "fail", "vacuous"


@dataclass(frozen=True)
class AxiomResult:
    axiom: str
    case: str
    status: str
    residual: float


@dataclass(frozen=True)
class DPosetReport:
    alpha: str
    results: tuple

    @property
    def passed(self) -> bool:
        return all(r.status != FAIL for r in self.results)

    def by_axiom(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for r in self.results:
            prev = out.get(r.axiom, VACUOUS)
            if r.status == FAIL or prev == FAIL:
                out[r.axiom] = FAIL
            elif r.status == PASS or prev == PASS:
                out[r.axiom] = PASS
            else:
                out[r.axiom] = VACUOUS
        return out

    def max_residual(self) -> float:
        vals = [r.residual for r in self.results if r.status != VACUOUS]
        return max(vals, default=0.0)


AXIOMS = (
    "defined_iff_leq",
    "difference_below",
    "double_difference",
    "chain_difference",
)


def _order_defect(a: Effect, b: Effect, al: AlphaParam) -> float:
    """How far ``A <=_alpha B`` is violated (0 when it holds)."""
    return max(0.0, -nl.min_eigenvalue(alpha_root(b, al) - alpha_root(a, al)))


def dposet_axioms(a: Effect, b: Effect, c: Effect, alpha=1, tol: float = nl.TAU_FN) -> DPosetReport:
    """Evaluate the four difference-poset axioms on every ordering of the triple.

    Axioms whose hypotheses fail on a case are reported as vacuous.
    """
    al = _alpha(alpha)
    _same_dim(a, b, c)
    named = {"A": a, "B": b, "C": c}
    results: list[AxiomResult] = []

    def diff(y, x):
        try:
            return ominus_alpha(y, x, al)
        except NotComparable:
            return None

    for (nx, x), (ny, y) in itertools.permutations(named.items(), 2):
        case = f"{nx}<={ny}"
        d = diff(y, x)
        leq = leq_alpha(x, y, al)
        # (1) y - x defined iff x <= y; when defined, x (+) (y - x) reconstructs y.
        if (d is not None) != leq:
            results.append(AxiomResult(AXIOMS[0], case, FAIL, _order_defect(x, y, al)))
            continue
        if d is None:
            results.append(AxiomResult(AXIOMS[0], case, PASS, 0.0))
            for ax in AXIOMS[1:3]:
                results.append(AxiomResult(ax, case, VACUOUS, 0.0))
            continue
        try:
            back = oplus_alpha(x, d, al)
            r1 = nl.max_abs(back.op - y.op)
        except NotSummable:
            r1 = float("inf")
        results.append(AxiomResult(AXIOMS[0], case, PASS if r1 <= tol else FAIL, r1))
        # (2) y - x <= y
        r2 = _order_defect(d, y, al)
        results.append(AxiomResult(AXIOMS[1], case, PASS if r2 <= tol else FAIL, r2))
        # (3) y - (y - x) = x
        dd = diff(y, d)
        r3 = float("inf") if dd is None else nl.max_abs(dd.op - x.op)
        results.append(AxiomResult(AXIOMS[2], case, PASS if r3 <= tol else FAIL, r3))

    for (nx, x), (ny, y), (nz, z) in itertools.permutations(named.items(), 3):
        case = f"{nx}<={ny}<={nz}"
        if not (leq_alpha(x, y, al) and leq_alpha(y, z, al)):
            results.append(AxiomResult(AXIOMS[3], case, VACUOUS, 0.0))
            continue
        zx, zy, yx = diff(z, x), diff(z, y), diff(y, x)
        if zx is None or zy is None or yx is None:
            results.append(AxiomResult(AXIOMS[3], case, FAIL, float("inf")))
            continue
        r_order = _order_defect(zy, zx, al)
        lhs = diff(zx, zy)
        r_eq = float("inf") if lhs is None else nl.max_abs(lhs.op - yx.op)
        r4 = max(r_order, r_eq)
        results.append(AxiomResult(AXIOMS[3], case, PASS if r4 <= tol else FAIL, r4))

    return DPosetReport(str(al), tuple(results))


def effects_commute(a: Effect, b: Effect, tol: float = nl.TAU_FN) -> bool:
    return nl.max_abs(a.op @ b.op - b.op @ a.op) <= tol


def joint_eigenbasis(a: Effect, b: Effect, tol: float = nl.TAU_FN) -> np.ndarray:
    """Unitary diagonalizing two commuting effects simultaneously."""
    lam, v = np.linalg.eigh(a.op)
    blocks: list[list[int]] = []
    for i, x in enumerate(lam):
        if blocks and abs(x - lam[blocks[-1][0]]) <= tol:
            blocks[-1].append(i)
        else:
            blocks.append([i])
    cols = []
    for idx in blocks:
        sub = v[:, idx]
        restricted = sub.conj().T @ b.op @ sub
        _, w = np.linalg.eigh(0.5 * (restricted + restricted.conj().T))
        cols.append(sub @ w)
    return np.hstack(cols)


def commuting_meet_join(a: Effect, b: Effect, tol: float = nl.TAU_FN) -> tuple[Effect, Effect]:
    """Largest effect below both and smallest above both, in the commutative algebra of ``A`` and ``B``."""
    w = joint_eigenbasis(a, b, tol)
    da = np.real(np.diag(w.conj().T @ a.op @ w))
    db = np.real(np.diag(w.conj().T @ b.op @ w))
    lo = (w * np.minimum(da, db)) @ w.conj().T
    hi = (w * np.maximum(da, db)) @ w.conj().T
    return Effect(lo), Effect(hi)


def sum_effects(effects: Iterable[Effect], alpha=1) -> Effect:
    """Alpha-sum of a finite family, computed recursively."""
    effects = list(effects)
    if not effects:
        raise ValidationError("empty family")
    acc = effects[0]
    for e in effects[1:]:
        acc = oplus_alpha(acc, e, alpha)
    return acc

"""Homogeneous (effect) histories and their class operators.

A history assigns an effect to each time in a finite support; off the support
it is the identity. For a history with support ``t_1 < ... < t_n`` the class
operator anchored at the fiducial time ``t0`` is

    C(u) = U(t0, t_n) sqrt(u_{t_n}) U(t_n, t_{n-1}) ... sqrt(u_{t_1}) U(t_1, t0)

(earliest time rightmost). For projector histories ``sqrt(P) = P``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import numlin as nl
from .effects import DensityState, Effect
from .errors import (
    DimensionMismatch,
    InvalidSupport,
    NotHermitian,
    NotProjectorHistory,
    TimeNotAfterFinal,
)


def _check_time(t) -> float:
    t = float(t)
    if not np.isfinite(t):
        raise InvalidSupport(f"non-finite time {t!r}")
    return t


@dataclass(frozen=True, eq=False)
class HomogeneousHistory:
    """Finite map from times to effects, identity entries removed."""

    dim: int
    entries: tuple = ()

    def __post_init__(self):
        if int(self.dim) < 1:
            raise DimensionMismatch("dim must be positive")
        items = self.entries.items() if isinstance(self.entries, Mapping) else self.entries
        kept: dict[float, Effect] = {}
        for t, e in items:
            t = _check_time(t)
            if not isinstance(e, Effect):
                e = Effect(e)
            if e.dim != self.dim:
                raise DimensionMismatch(f"effect at t={t} has dim {e.dim}, history dim {self.dim}")
            if t in kept:
                raise InvalidSupport(f"time {t} given twice")
            kept[t] = e
        entries = tuple(sorted((t, e) for t, e in kept.items() if not e.is_identity()))
        object.__setattr__(self, "entries", entries)

    @classmethod
    def unit(cls, dim: int) -> "HomogeneousHistory":
        return cls(dim, ())

    @classmethod
    def single(cls, t: float, e: Effect) -> "HomogeneousHistory":
        return cls(e.dim, ((t, e),))

    @property
    def support(self) -> tuple[float, ...]:
        return tuple(t for t, _ in self.entries)

    @property
    def t_initial(self) -> float | None:
        return self.entries[0][0] if self.entries else None

    @property
    def t_final(self) -> float | None:
        return self.entries[-1][0] if self.entries else None

    def effect_at(self, t: float) -> Effect:
        for s, e in self.entries:
            if s == t:
                return e
        return Effect.identity(self.dim)

    def is_projector_history(self, tol: float = nl.TAU_FN) -> bool:
        return all(e.is_projector(tol) for _, e in self.entries)

    def is_unit(self) -> bool:
        return not self.entries

    def __repr__(self) -> str:
        return f"HomogeneousHistory(dim={self.dim}, support={self.support})"


@dataclass(frozen=True, eq=False)
class EvolutionContext:
    """Time-independent Hamiltonian plus fiducial time."""

    hamiltonian: np.ndarray
    t0: float = 0.0
    _spec: nl.HermitianSpectrum = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        h = nl.as_cmatrix(self.hamiltonian, "hamiltonian")
        if nl.hermiticity_defect(h) > nl.TAU_LIN:
            raise NotHermitian("hamiltonian is not Hermitian")
        h = 0.5 * (h + h.conj().T)
        object.__setattr__(self, "hamiltonian", nl.frozen(h))
        object.__setattr__(self, "t0", _check_time(self.t0))
        object.__setattr__(self, "_spec", nl.hermitian_eig(h))

    @classmethod
    def free(cls, dim: int, t0: float = 0.0) -> "EvolutionContext":
        return cls(nl.zeros(dim), t0)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def U(self, t_to: float, t_from: float) -> np.ndarray:
        """Propagator from ``t_from`` to ``t_to``."""
        return nl.evolve_from_spectrum(self._spec, t_from, t_to)

    def with_t0(self, t0: float) -> "EvolutionContext":
        return EvolutionContext(self.hamiltonian, t0)


def _same_dim(u: HomogeneousHistory, v: HomogeneousHistory) -> None:
    if u.dim != v.dim:
        raise DimensionMismatch(f"history dims {u.dim} vs {v.dim}")


def _check_ctx(u: HomogeneousHistory, ctx: EvolutionContext) -> None:
    if u.dim != ctx.dim:
        raise DimensionMismatch(f"history dim {u.dim} vs hamiltonian dim {ctx.dim}")


def is_zero_history(u: HomogeneousHistory, tol: float = nl.TAU_LIN) -> bool:
    return any(e.is_zero(tol) for _, e in u.entries)


def coarser_leq(u1: HomogeneousHistory, u2: HomogeneousHistory, tol: float = nl.TAU_PSD) -> bool:
    """True iff ``(u1)_t <= (u2)_t`` at every time."""
    _same_dim(u1, u2)
    times = sorted(set(u1.support) | set(u2.support))
    return all(nl.op_leq(u1.effect_at(t).op, u2.effect_at(t).op, tol) for t in times)


def disjoint_pointwise(h1: HomogeneousHistory, h2: HomogeneousHistory, tol: float = nl.TAU_LIN) -> bool:
    """Projector histories are disjoint iff their projectors multiply to zero at some time."""
    _same_dim(h1, h2)
    for h in (h1, h2):
        if not h.is_projector_history():
            raise NotProjectorHistory("disjointness is only defined for projector histories")
    times = sorted(set(h1.support) | set(h2.support))
    return any(nl.max_abs(h1.effect_at(t).op @ h2.effect_at(t).op) <= tol for t in times)


def class_operator(u: HomogeneousHistory, ctx: EvolutionContext) -> np.ndarray:
    _check_ctx(u, ctx)
    c = ctx.U(u.t_initial, ctx.t0) if u.entries else nl.identity(u.dim)
    prev = u.t_initial
    for t, e in u.entries:
        c = e.sqrt() @ ctx.U(t, prev) @ c
        prev = t
    if u.entries:
        c = ctx.U(ctx.t0, prev) @ c
    return c


def class_operator_heisenberg(u: HomogeneousHistory, ctx: EvolutionContext) -> np.ndarray:
    """Same operator built from Heisenberg-picture roots relative to the initial time."""
    _check_ctx(u, ctx)
    if not u.entries:
        return nl.identity(u.dim)
    ti = u.t_initial
    prod = nl.identity(u.dim)
    for t, e in u.entries:
        w = ctx.U(t, ti)
        prod = (w.conj().T @ e.sqrt() @ w) @ prod
    return ctx.U(ctx.t0, ti) @ prod @ ctx.U(ti, ctx.t0)


def associated_effect(u: HomogeneousHistory, ctx: EvolutionContext) -> Effect:
    """``F(u) = C(u)^H C(u)``, the effect whose Born value is ``d(u, u)``."""
    c = class_operator(u, ctx)
    return Effect(c.conj().T @ c)


def extend_at(u0: HomogeneousHistory, t_star: float, e: Effect) -> HomogeneousHistory:
    """Append effect ``e`` at a time strictly after ``u0``'s final time."""
    t_star = _check_time(t_star)
    if u0.t_final is not None and not t_star > u0.t_final:
        raise TimeNotAfterFinal(f"t*={t_star} is not after final time {u0.t_final}")
    if e.dim != u0.dim:
        raise DimensionMismatch(f"effect dim {e.dim} vs history dim {u0.dim}")
    return HomogeneousHistory(u0.dim, u0.entries + ((t_star, e),))


def padded_effects(u: HomogeneousHistory, support: Iterable[float]) -> list[Effect]:
    """Effects of ``u`` listed over ``support`` (a superset of its own), identity-padded."""
    support = list(support)
    missing = set(u.support) - set(support)
    if missing:
        raise InvalidSupport(f"support {support} does not cover history times {sorted(missing)}")
    return [u.effect_at(t) for t in support]


def evolved_state(rho: DensityState, ctx: EvolutionContext, t: float) -> np.ndarray:
    w = ctx.U(t, ctx.t0)
    return w @ rho.op @ w.conj().T

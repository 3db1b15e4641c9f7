"""Decoherence functionals, consistent histories and effect-history logic.

Finite-dimensional toolkit: effects and the alpha-scaled D-poset operations,
homogeneous histories and class operators, the decoherence functional with
consistency checks, projector lattices on tensor products, formal sums of
effect terms, and Boolean history algebras with implication.
"""

__version__ = "0.1.0"

from .decoherence import (
    ConsistencyReport,
    DecoherenceMatrix,
    consistency_check,
    d_matrix,
    d_weight,
    probability_measure,
    sum_rule_check,
)
from .effect_sums import (
    FormalSum,
    FullDPoset,
    HomogeneousTerm,
    OrderKFamily,
    complement,
    d_hat,
    d_sum,
    formal_sum,
    full_dposet_prob,
    is_admissible,
    oplus_D,
    orderk_additivity_residual,
    orderk_build,
    sqrt_duality_check,
)
from .effects import (
    AlphaParam,
    DensityState,
    Effect,
    Povm,
    dposet_axioms,
    gleason_prob,
    leq_alpha,
    ominus_alpha,
    oplus_alpha,
)
from .errors import ConsistencyError, HistqError, NumericalError, ValidationError
from .histories import (
    EvolutionContext,
    HomogeneousHistory,
    associated_effect,
    class_operator,
    extend_at,
)
from .logic import BooleanHistoryAlgebra, build_algebra, conditional_prob, equivalent, implies, implies_full
from .proj_lattice import AtomFamily, TensorProjector, embed, family_from_pvms, proj_join, proj_meet, proj_neg

__all__ = [name for name in dir() if not name.startswith("_")]

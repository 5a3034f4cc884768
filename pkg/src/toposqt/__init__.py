"""Topos representations of finite-dimensional classical and quantum systems.

Contexts are abelian subalgebras of B(C^n) given by orthogonal decompositions;
finite posets of them carry the spectral presheaf, the quantity-value presheaf
of order-reversing functions, daseinised physical-quantity arrows and
sieve-valued truth values. The `systems` module models the category of
systems with its two monoidal products; `compose` pulls arrows back along
disjoint-sum and tensor-composite embeddings and measures where entanglement
obstructs exactness.
"""

from .contexts import (
    AbelianContext,
    ContextPoset,
    context_from_commuting,
    direct_sum_embed,
    generate_context_poset,
    largest_factor_subalgebra,
    tensor_composite_poset,
    trivial_context,
)
from .linalg import (
    HermitianOperator,
    ProjectionOperator,
    SpectralFamily,
    eigendecompose,
    projection_leq,
    spectral_family,
)
from .quantum import (
    daseinised_arrow,
    gelfand_spectrum,
    inner_das_projection,
    outer_das_operator,
    outer_das_projection,
    proposition_subobject,
    quantity_value_presheaf,
    spectral_presheaf,
    truth_value,
)
from .compose import (
    entanglement_gap,
    gap_search,
    lemma_direct_sum_check,
    sum_translation,
    tensor_translation,
)

__version__ = "0.1.0"

__all__ = [
    "AbelianContext",
    "ContextPoset",
    "HermitianOperator",
    "ProjectionOperator",
    "SpectralFamily",
    "context_from_commuting",
    "daseinised_arrow",
    "direct_sum_embed",
    "eigendecompose",
    "entanglement_gap",
    "gap_search",
    "gelfand_spectrum",
    "generate_context_poset",
    "inner_das_projection",
    "largest_factor_subalgebra",
    "lemma_direct_sum_check",
    "outer_das_operator",
    "outer_das_projection",
    "projection_leq",
    "proposition_subobject",
    "quantity_value_presheaf",
    "spectral_family",
    "spectral_presheaf",
    "sum_translation",
    "tensor_composite_poset",
    "tensor_translation",
    "trivial_context",
    "truth_value",
]

"""Folner tilings, quasidiagonalizing projections and crossed-product
commutator checks on concrete amenable residually finite groups."""

from .folner import (
    FolnerSet,
    Tiling,
    boundary_ratio,
    complete_tile,
    folner_box,
    separating_subgroup,
    verify_tiling,
)
from .groups import (
    CyclicProduct,
    DirectProduct,
    GroupElement,
    Heisenberg,
    IntegerLattice,
    quotient,
    word_ball,
)
from .projection import (
    build_phi,
    build_projection,
    coset_sum,
    coset_variation,
    lambda_commutator_norm,
    projection_defect,
)

__all__ = [
    "FolnerSet",
    "Tiling",
    "boundary_ratio",
    "complete_tile",
    "folner_box",
    "separating_subgroup",
    "verify_tiling",
    "CyclicProduct",
    "DirectProduct",
    "GroupElement",
    "Heisenberg",
    "IntegerLattice",
    "quotient",
    "word_ball",
    "build_phi",
    "build_projection",
    "coset_sum",
    "coset_variation",
    "lambda_commutator_norm",
    "projection_defect",
]

__version__ = "0.1.0"

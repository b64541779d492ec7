"""Exact algebra: SNF, abelian groups, modules, graded modules and rings."""
from .graded import GradedModule, GradedRingData, GradingMismatch, graded_hom, graded_tensor, shift_module
from .groups import GradingGroup, GroupHom, InfiniteSupport, direct_sum, hom_from_images
from .linalg import GF2, GF3, QQ, Field, NotSolvable, field
from .modules import (
    ZZ,
    BaseRing,
    FgModule,
    RingMismatch,
    direct_sum_modules,
    hom_module,
    is_exact_pair,
    tensor_module,
    tor_modules,
)
from .snf import integer_kernel, integer_solve, smith_normal_form

__all__ = [
    "BaseRing", "FgModule", "Field", "GF2", "GF3", "GradedModule", "GradedRingData",
    "GradingGroup", "GradingMismatch", "GroupHom", "InfiniteSupport", "NotSolvable",
    "QQ", "RingMismatch", "ZZ", "direct_sum", "direct_sum_modules", "field", "graded_hom",
    "graded_tensor", "hom_from_images", "hom_module", "integer_kernel", "integer_solve",
    "is_exact_pair", "shift_module", "smith_normal_form", "tensor_module", "tor_modules",
]

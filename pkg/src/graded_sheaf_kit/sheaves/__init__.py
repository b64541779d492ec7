"""Graded sheaves on finite graded spaces and the underived functors."""
from .adjunction import (
    AdjunctionReport,
    BaseChangeReport,
    adjunction_counit,
    adjunction_unit,
    base_change_check,
    base_change_map,
    check_sheaf_adjunction,
)
from .core import (
    GradedSheaf,
    NonFieldBase,
    SheafError,
    SheafMap,
    candidate_degrees,
    cokernel,
    constant_sheaf,
    direct_sum,
    generator,
    identity,
    image,
    is_exact_at,
    is_short_exact,
    kernel,
    point_generator,
    require_field,
    section_dim,
    section_space,
    sections,
    skyscraper,
    stalk,
    subquotient,
    zero_map,
    zero_sheaf,
)
from .flabby import (
    c_acyclic_failure,
    degree_cohomology,
    flabby_failure,
    is_c_acyclic,
    is_flabby,
    is_soft,
    soft_failure,
)
from .functors import (
    ExactSequence,
    HomSpace,
    NotLocallyClosed,
    basic_exact_sequence,
    degree_piece,
    direct_image_map,
    extend_by_zero,
    extend_by_zero_map,
    global_sections_degree0,
    hom_space,
    inverse_image_gr,
    inverse_image_map,
    pushforward_gr,
    pushforward_map,
    restrict,
    sheaf_hom,
    sheaf_hom_map,
    shift_family,
    shift_map,
    shift_sheaf,
    shriek_map,
    shriek_pushforward_gr,
    tensor_maps,
    tensor_sheaf,
)
from .presheaf import GradedPresheafTable, Sheafification, sections_table, sheafify, tensor_presheaf

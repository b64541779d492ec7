"""Complexes of graded sheaves, resolutions and derived functors."""
from .complexes import ChainMap, ComplexError, ComplexOfSheaves, VectorComplex, cone, total_complex
from .functors import (
    derived_global_sections,
    derived_hom,
    derived_pushforward,
    derived_shriek_pushforward,
    derived_tensor,
    hom_complex,
    hypercohomology,
    inverse_image_complex,
)
from .resolutions import (
    FlatnessUndecided,
    Resolution,
    flat_resolution,
    godement_complex,
    godement_resolution,
    iterated_godement_resolution,
)

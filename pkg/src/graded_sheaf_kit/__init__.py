"""Graded sheaves on finite graded spaces."""
from .algebra import GF2, GF3, QQ, Field, GradingGroup, GroupHom, InfiniteSupport
from .space import FinitePoset, GradedSpace, GradedSpaceMap
from .sheaves import GradedSheaf, SheafMap
from .derived import ComplexOfSheaves

__version__ = "0.1.0"

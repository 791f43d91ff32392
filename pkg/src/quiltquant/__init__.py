"""Exact quantization of moduli of flat connections on quilted surfaces.

The main entry points are re-exported here; the submodules hold the rest.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .associator import Associator, SolverError, solve_associator
from .chords import ChordSeries
from .hopf import HopfError, QuantumGroup, gamma_H, gamma_M
from .liealg import LieBialgebra, abelian_bialgebra, double, example_bialgebra
from .moduli import (
    CiliatedGraph,
    ModuliError,
    SkeletizedColouredSurface,
    SurfaceMorphism,
    apply_morphism,
    classical_moduli,
    disjoint_union,
    quantize,
)
from .ordcat import OrderedMorphism, ParenthesizedOrderedMorphism

__all__ = [
    "Associator",
    "ChordSeries",
    "CiliatedGraph",
    "HopfError",
    "LieBialgebra",
    "ModuliError",
    "OrderedMorphism",
    "ParenthesizedOrderedMorphism",
    "QuantumGroup",
    "SkeletizedColouredSurface",
    "SolverError",
    "SurfaceMorphism",
    "__version__",
    "abelian_bialgebra",
    "apply_morphism",
    "classical_moduli",
    "disjoint_union",
    "double",
    "example_bialgebra",
    "gamma_H",
    "gamma_M",
    "quantize",
    "solve_associator",
]

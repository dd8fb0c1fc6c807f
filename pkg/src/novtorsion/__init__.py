"""Novikov ring arithmetic, torsion of based complexes, and a torus experiment."""

from .lattice import DimensionMismatchError, GroupElement, Lattice
from .series import (
    AmbiguousLeadingTermError,
    DEFAULT_CUTOFF,
    LatticeMismatchError,
    LeadingTerm,
    NotInvertibleError,
    NovikovElement,
    divide,
)
from .linalg import IndeterminatePivotError, ShapeError, determinant
from .complexes import (
    BasedComplex,
    ChainMap,
    ComplexStructureError,
    NotAcyclicError,
    mapping_cone,
    rebase,
    relabel_lifts,
    two_term_complex,
)
from .torsion import (
    BasisChangeClass,
    WhiteheadClass,
    basis_change_class,
    homotopy_equivalent,
    milnor_torsion,
    milnor_torsion_unit,
    relative_torsion,
    whitehead_normalize,
)
from .document import (
    ComplexDocument,
    DocumentParseError,
    build_chain_map,
    build_complex,
    document_from_complex,
)
from .document import parse as parse_document
from .document import render as render_document
from .torus import (
    TorusSystem,
    assemble_floer,
    conley_zehnder,
    count_connecting,
    find_orbits,
    run_example,
    torus_torsion,
)

__version__ = "0.1.0"

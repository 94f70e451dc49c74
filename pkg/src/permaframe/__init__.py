"""Tight spectral Parseval frame transform for ranked data on the
permutahedron.

A vote tally over the n! complete rankings of n candidates is a signal on the
permutahedron.  This package decomposes such signals into analysis
coefficients indexed by (symmetry type, Laplacian eigenvalue, candidate
grouping), supports exact reconstruction and energy decomposition, and
projects signals onto the much smaller Schreier quotient graphs for
inspection.
"""

from .ballots import BallotFile, parse_ballots, read_ballot_file, serialize_ballots, tally
from .cache import FrameCache, SchreierBundle, build_cache, load_cache, save_cache, verify_cache
from .combinatorics import (
    ColumnStrictTableau,
    IntegerPartition,
    OrderedSetPartition,
    Permutation,
    dominates,
    enumerate_ordered_set_partitions,
    h_shapes,
    hook_dimension,
    kostka,
    lex_rank,
    lex_unrank,
    multiplicity_constants,
    partitions_of,
    reduced_representatives,
    sign,
)
from .errors import (
    CacheFormatError,
    NumericalError,
    PermaframeError,
    ResourceLimitError,
    ValidationError,
)
from .frame import (
    AtomId,
    CoefficientTable,
    EnergyTable,
    Signal,
    analyze,
    atom,
    conjugate_shape_energy,
    energy_table,
    graph_fourier,
    isotypic_project,
    mallows_baseline,
    reconstruct,
    schreier_projection,
    sign_flip,
    standard_basis_check,
    synthesize,
)
from .schreier import (
    CharacteristicMatrix,
    LiftingPath,
    SchreierGraph,
    build_characteristic,
    build_schreier,
    minimal_paths,
)
from .spectral import (
    ShapeSpectrum,
    deflate_and_solve,
    dense_oracle,
    hook_wedge_eigenvectors,
    path_eigenpairs,
    verify_dominance_conjecture,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

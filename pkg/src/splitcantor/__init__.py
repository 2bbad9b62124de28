"""Finite-model simulator for forcing-built split Cantor sets.

The model keeps 2^M binary codes, replaces each of the Lambda chosen codes
x_xi by 2n split points, and builds the sets A_{xi,j} from a descending
chain of finite forcing conditions.  Everything is exact: sets are
frozensets of points and all numbers are Fractions.
"""

__version__ = "0.1.0"

from .analysis import (
    PatternSpec,
    build_eps,
    diagonal_average_bound,
    number_lemma_pair,
    obstruction_scan,
    obstruction_thresholds,
    parity_pairing,
    refute_left_separation,
    verify_pattern,
)
from .cantor import Ground, Space, SpaceConfig, Split, algebra_atoms, in_generated_algebra, make_space
from .errors import (
    ConfigError,
    IncompleteChainError,
    PreconditionError,
    ResolutionError,
    ShapeError,
    SplitCantorError,
)
from .experiment import ExperimentConfig, fuzz_number_lemma, parse_config, run_experiment
from .family import (
    SplittingFamily,
    canonical_form,
    derive_family,
    residue_in_subalgebra,
    verify_balanced,
    verify_splitting,
)
from .forcing import (
    AddIndex,
    Chain,
    Complete,
    Condition,
    Deepen,
    RealizePattern,
    add_index,
    amalgamate,
    build_chain,
    deepen,
    delta_system,
    extends,
    isomorphic,
    validate,
)
from .measures import (
    AtomicMeasure,
    BiorthCandidate,
    SimpleFunction,
    check_biorthogonal,
    check_nice,
    check_semibiorthogonal,
    discrete_witness,
    extract_nice_3supported,
    integrate,
    property6_system,
)

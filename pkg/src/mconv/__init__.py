"""Exact-arithmetic middle convolution for monodromy tuples.

Builds the rank-2 tuples T_{m,r}, applies MC_{-1} and rank-one twists to produce the
four derived families, verifies their ranks and Jordan forms against the expected
tables, reduces coefficients to F_q, and certifies the special-linear hypothesis
battery residually."""

from .convolution import ConvolutionWorkspace, build_ambient, expected_rank, mc, mc_selfcheck
from .errors import MconvError
from .fields import (
    FieldElement,
    ResidueMap,
    apply_residue,
    make_cyclotomic_field,
    make_finite_field,
    make_residue_map,
    rational_field,
    root_of_unity,
)
from .groups import (
    Certificate,
    FormSpace,
    burnside_dimension,
    enumerate_group,
    invariant_bilinear_forms,
    reduce_tuple,
    sl_certificate,
    subfield_minimality,
)
from .linalg import (
    ExactMatrix,
    JordanData,
    Subspace,
    char_poly,
    induced_quotient_action,
    inverse,
    jordan_data,
    kernel,
    rank,
    rref,
    simultaneous_conjugacy,
)
from .pipeline import (
    PipelineConfig,
    PipelineReport,
    build_family,
    instantiate_oracle,
    run_pipeline,
)
from .tuples import (
    MonodromyTuple,
    RankOneTuple,
    construct_T,
    construct_rank_one,
    deserialize,
    entry_census,
    local_selfdual_check,
    serialize,
    tensor_rank_one,
    validate,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

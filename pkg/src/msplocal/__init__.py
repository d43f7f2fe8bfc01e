"""Exact localization-graph engine for mixed-spin-P moduli.

The package enumerates the decorated torus-fixed-locus graphs of the
mixed-spin-P moduli spaces attached to Fermat hypersurfaces in weighted
projective 4-space and evaluates each graph's localization term as an exact
multivariate rational function, with pluggable oracles for the stable-moduli
correlators.
"""

__version__ = "0.1.0"

from .algebra import (  # noqa: F401
    Polynomial,
    RatFunc,
    Variable,
    hodge_euler,
    homogeneous_degree,
    parse,
    render,
    standard_grading,
    substitute,
)
from .contributions import (  # noqa: F401
    GraphContribution,
    Policies,
    assemble_graph,
    edge_contribution,
    edge_group_order,
    flag_factor,
    node_contribution,
    tangent_weight,
    vertex_contribution,
)
from .enumeration import (  # noqa: F401
    EnumerationCaps,
    EnumerationResult,
    brute_force_enumerate,
    enumerate_flat_regular,
)
from .graphs import (  # noqa: F401
    DecoratedGraph,
    Edge,
    EdgeKind,
    GraphClass,
    Leg,
    Level,
    Vertex,
    classify,
    flag_monodromy,
    flatten,
    is_balanced,
    make_graph,
    validate,
)
from .model import (  # noqa: F401
    DiscreteData,
    Marking,
    WeightSystem,
    cosection_pairing,
    is_narrow,
    presets,
    virtual_dimension,
)
from .oracle import (  # noqa: F401
    SymbolicOracle,
    TabulatedOracle,
    ZeroOracle,
    sum_graphs,
)

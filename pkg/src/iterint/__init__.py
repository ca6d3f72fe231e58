"""Numeric iterated path integrals with exact word combinatorics.

The package turns closed-form 1-forms and sampled paths into iterated
integrals with error estimates, checks the algebraic identities those
integrals satisfy, builds homotopy-invariance certificates, and probes
the induced functions on universal covers for finite polynomial order
under the deck group.
"""

from .word_algebra import (
    AlgebraElement,
    EMPTY_WORD,
    FormSymbol,
    SymbolRegistry,
    Word,
    deconcatenations,
    element_from_json,
    element_to_json,
    reverse_signed,
    shuffle,
    shuffle_words,
)
from .geometry import (
    ChartDomain,
    OneForm,
    SmoothMap,
    TwoForm,
    exterior_derivative,
    is_closed,
    load_form_registry,
    pullback,
    rotation_map,
    scaling_map,
    wedge,
)
from .paths import (
    AnalyticPath,
    CompositePath,
    GriddedPath,
    PathFamily,
    SampledPath,
    arc_path,
    circle_path,
    compose,
    constant_path,
    load_path_specs,
    map_path,
    perturb,
    polyline_path,
    segment_path,
)
from .evaluator import (
    IteratedIntegralResult,
    check_composition,
    check_diffeo_invariance,
    check_reversal,
    check_shuffle,
    eval_element,
    eval_formal,
    iterint,
    within_tolerance,
)
from .homotopy import (
    DefiningSystem,
    build_defining_system,
    check_s2_condition,
    empirical_invariance,
    poincare_primitive,
)
from .cover import (
    Cocycle,
    CoverSpace,
    GroupRingElement,
    apply_group_ring,
    base_loop,
    check_eta_vanishing,
    eta,
    group_path,
    load_cover_registry,
    solve_coboundary,
    strip_cover,
    torus_cover,
)
from .invariants import (
    HigherInvariant,
    PairingResult,
    chen_pairing,
    f_omega,
    kernel_inclusion_check,
    order_check,
)
from .fixtures import get_cover, get_domain, get_form, get_path, list_fixtures
from .suites import SUITES, Scenario, ScenarioError, parse_scenario, run_suite

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement",
    "AnalyticPath",
    "ChartDomain",
    "Cocycle",
    "CompositePath",
    "CoverSpace",
    "DefiningSystem",
    "EMPTY_WORD",
    "FormSymbol",
    "GriddedPath",
    "GroupRingElement",
    "HigherInvariant",
    "IteratedIntegralResult",
    "OneForm",
    "PairingResult",
    "PathFamily",
    "SUITES",
    "SampledPath",
    "Scenario",
    "ScenarioError",
    "SmoothMap",
    "SymbolRegistry",
    "TwoForm",
    "Word",
    "apply_group_ring",
    "arc_path",
    "base_loop",
    "build_defining_system",
    "chen_pairing",
    "check_composition",
    "check_diffeo_invariance",
    "check_eta_vanishing",
    "check_reversal",
    "check_s2_condition",
    "check_shuffle",
    "circle_path",
    "compose",
    "constant_path",
    "deconcatenations",
    "element_from_json",
    "element_to_json",
    "empirical_invariance",
    "eta",
    "eval_element",
    "eval_formal",
    "exterior_derivative",
    "f_omega",
    "get_cover",
    "get_domain",
    "get_form",
    "get_path",
    "group_path",
    "is_closed",
    "iterint",
    "kernel_inclusion_check",
    "list_fixtures",
    "load_cover_registry",
    "load_form_registry",
    "load_path_specs",
    "map_path",
    "order_check",
    "parse_scenario",
    "perturb",
    "poincare_primitive",
    "polyline_path",
    "pullback",
    "reverse_signed",
    "rotation_map",
    "run_suite",
    "scaling_map",
    "segment_path",
    "shuffle",
    "shuffle_words",
    "solve_coboundary",
    "strip_cover",
    "torus_cover",
    "wedge",
    "within_tolerance",
    "__version__",
]

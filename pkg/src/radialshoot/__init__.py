"""Shooting-method laboratory for radial bound states of Delta u + f(u) = 0.

The pipeline: describe a nonlinearity piecewise with exact antiderivatives
(`nonlinearity`), summarize its potential landscape (`landscape`), integrate
the singular radial IVP with event detection (`integrator`), classify the
terminated trajectory (`classifier`), audit it against the conserved-ish
quantities (`diagnostics`), and search height space for bound states and
the spliced multi-ground-state construction (`finder`). `cli` wraps each
activity in a JSON-config subcommand; `presets` ships the fixture
nonlinearities used by the tests and examples.
"""
from .classifier import ClassKind, ShotClass, ZSequence, classify, node_count
from .diagnostics import (DiagnosticsReport, GstCheck, energy_series,
                          erbe_tang_P, gst_radius, gst_sign_change_check,
                          make_report, max_energy_increase,
                          nonexistence_bound, pohozaev_residual)
from .errors import (AmbiguousZero, BracketBroken, ContinuityGap,
                     DomainExceeded, FVanishes, InconclusiveClassification,
                     InvalidHeight, LandscapeIncomplete, NoBeta, NotFound,
                     NotMonotone, OrderingViolated, OutOfRange,
                     RadialShootError, ReproductionFailed, SearchExhausted,
                     StartRadiusTooLarge, StepSizeUnderflow)
from .finder import (BoundState, ExampleReport, SweepMap, SweepPoint,
                     find_ground_state, find_kth_bound_state,
                     multiplicity_scan, reproduce_example, sweep, tune_jump)
from .integrator import (Event, EventKind, IVProblem, SolverOptions,
                         TerminalReason, Trajectory, integrate,
                         landscape_for)
from .landscape import Landscape, analyze_landscape, cached_landscape
from .nonlinearity import (LinearBridge, NonlinearitySpec, Piece, Power,
                           PowerMinusLinear, PolynomialExpr, Scaled,
                           build_jump_family, polynomial_spec, power_spec,
                           power_minus_linear_spec, scaled_spec,
                           single_form_spec)
from .presets import (slow_entry_family, slow_entry_shot_height,
                      stretched_two_hump_spec, two_hump_spec)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousZero", "BoundState", "BracketBroken", "ClassKind",
    "ContinuityGap", "DiagnosticsReport", "DomainExceeded", "Event",
    "EventKind", "ExampleReport", "FVanishes", "GstCheck", "IVProblem",
    "InconclusiveClassification", "InvalidHeight", "Landscape",
    "LandscapeIncomplete", "LinearBridge", "NoBeta", "NonlinearitySpec",
    "NotFound", "NotMonotone", "OrderingViolated", "OutOfRange", "Piece",
    "PolynomialExpr", "Power", "PowerMinusLinear", "RadialShootError",
    "ReproductionFailed", "Scaled", "SearchExhausted", "ShotClass",
    "SolverOptions", "StartRadiusTooLarge", "StepSizeUnderflow", "SweepMap",
    "SweepPoint", "TerminalReason", "Trajectory", "ZSequence",
    "analyze_landscape", "build_jump_family", "cached_landscape", "classify",
    "energy_series", "erbe_tang_P", "find_ground_state",
    "find_kth_bound_state", "gst_radius", "gst_sign_change_check",
    "integrate", "landscape_for", "make_report", "max_energy_increase",
    "multiplicity_scan", "node_count", "nonexistence_bound",
    "pohozaev_residual", "polynomial_spec", "power_minus_linear_spec",
    "power_spec", "reproduce_example", "scaled_spec", "single_form_spec",
    "slow_entry_family", "slow_entry_shot_height", "stretched_two_hump_spec",
    "sweep", "tune_jump", "two_hump_spec",
]

"""Session-wide fixtures for the expensive shared computations.

The worked example, the two-hump multiplicity ladder, and the trajectory
corpus are each computed once per session and reused by the unit tests
and the acceptance suite.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import pytest

from radialshoot.classifier import ShotClass, classify
from radialshoot.errors import NotFound
from radialshoot.finder import multiplicity_scan, reproduce_example
from radialshoot.integrator import (IVProblem, SolverOptions, Trajectory,
                                    integrate, landscape_for)
from radialshoot.nonlinearity import (NonlinearitySpec,
                                      power_minus_linear_spec, power_spec)
from radialshoot.presets import (slow_entry_family, slow_entry_shot_height,
                                 stretched_two_hump_spec, two_hump_spec)

#: Solver settings shared by the whole trajectory corpus.
CORPUS_OPTIONS = SolverOptions(rel_tol=1e-8, abs_tol=1e-11)


@dataclass(frozen=True)
class CorpusCase:
    """One corpus trajectory plus everything needed to re-integrate it."""

    tag: str
    spec: NonlinearitySpec
    n_dim: int
    alpha: float
    options: SolverOptions
    trajectory: Trajectory
    verdict: ShotClass | None

    def reintegrate(self, **changes) -> Trajectory:
        return integrate(IVProblem(self.spec, self.n_dim, self.alpha,
                                   replace(self.options, **changes)))


def _case(tag, spec, n_dim, alpha, **opt_changes) -> CorpusCase:
    options = replace(CORPUS_OPTIONS, **opt_changes)
    traj = integrate(IVProblem(spec, n_dim, alpha, options))
    try:
        verdict = classify(traj)
    except Exception:
        verdict = None
    return CorpusCase(tag, spec, n_dim, alpha, options, traj, verdict)


@pytest.fixture(scope="session")
def corpus() -> list[CorpusCase]:
    """Mixed bag of terminated shots across all shipped nonlinearities."""
    well = power_minus_linear_spec(2.0)
    hump = two_hump_spec()
    return [
        _case("well_trap", well, 4, 10.0),
        _case("well_low", well, 4, 2.0),
        _case("well_tall", well, 4, 20.0),
        _case("well_neg", well, 4, -10.0),
        _case("well_past_trap", well, 4, 10.0, continue_past_trap=True),
        _case("power_sub", power_spec(2.0), 4, 12.0),
        _case("power_super", power_spec(4.0), 4, 7.0),
        _case("power_cubic", power_spec(3.0), 3, 5.0),
        _case("critical_bubble", power_spec(5.0), 3, 1.0),
        _case("hump_descent", hump, 3, 5.99),
        _case("hump_band", hump, 3, 5.0),
        _case("hump_mid", hump, 3, 3.0),
        _case("stretched_top", stretched_two_hump_spec(), 3, 29.3),
        _case("slowdown", slow_entry_family(), 4, slow_entry_shot_height()),
    ]


@pytest.fixture(scope="session")
def example_report():
    return reproduce_example()


@pytest.fixture(scope="session")
def hump_ladder() -> dict[int, list]:
    """multiplicity_scan results on the two-hump fixture, k = 0..7.

    Values are lists of BoundState, or None where the scan certified the
    window empty (NotFound).
    """
    spec = two_hump_spec()
    lsc = landscape_for(spec, 0.0)
    out: dict[int, list] = {}
    for k in range(8):
        try:
            out[k] = multiplicity_scan(spec, lsc, 3, k)
        except NotFound:
            out[k] = None
    return out

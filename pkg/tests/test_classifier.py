"""Verdict logic, exercised on real shots and on synthetic event streams.

The synthetic trajectories pin down branches whose natural triggers need
bisection to machine precision (double zeros, monotone equilibrium tails);
building the event stream by hand makes those branches deterministic.
"""

from __future__ import annotations

import numpy as np
import pytest

from radialshoot.classifier import (ClassKind, ShotClass, ZSequence,
                                    classify, never_reaches_zero, node_count,
                                    z_sequence)
from radialshoot.errors import InconclusiveClassification, OrderingViolated
from radialshoot.integrator import (Event, EventKind, IVProblem,
                                    SolverOptions, TerminalReason,
                                    Trajectory, integrate)
from radialshoot.nonlinearity import (power_minus_linear_spec, power_spec)
from radialshoot.presets import two_hump_spec

SPEC = power_minus_linear_spec(2.0)


def shot(spec, n_dim, alpha, **opts):
    return integrate(IVProblem(spec, n_dim, alpha, SolverOptions(**opts)))


def synthetic(spec, n_dim, alpha, events, reason, *, equilibrium=None,
              tail_u=None):
    """Hand-built trajectory carrying just enough state for classify."""
    u_end = tail_u if tail_u is not None else np.full(24, alpha)
    n = len(u_end)
    r = np.linspace(1.0, 10.0, n)
    return Trajectory(problem=IVProblem(spec, n_dim, alpha),
                      r=r, u=np.asarray(u_end, dtype=float),
                      du=np.zeros(n), events=tuple(events), reason=reason,
                      r_end=10.0, equilibrium=equilibrium)


# ---------------------------------------------------------------------------
# verdicts on real trajectories
# ---------------------------------------------------------------------------

class TestRealShots:
    def test_trivial_zero_shot(self):
        v = classify(shot(SPEC, 4, 0.0))
        assert v.kind is ClassKind.P and v.k == 0
        assert v.refinement is None
        assert "trivial" in v.note

    def test_trapped_after_one_crossing(self):
        t = shot(SPEC, 4, 10.0)
        v = classify(t)
        assert (v.kind, v.k, v.refinement) == (ClassKind.P, 1, "Q")
        assert str(v) == "P(1)[Q]"
        # evidence points at the crossing and the trap certificate
        kinds = [t.events[i].kind for i in v.evidence]
        assert kinds[0] is EventKind.ZERO_CROSSING
        assert kinds[-1] is EventKind.POSITIVE_MIN_BELOW_BETA

    def test_trapped_without_crossing(self):
        v = classify(shot(SPEC, 4, 2.0))
        assert (v.kind, v.k, v.refinement) == (ClassKind.P, 0, "Q")

    def test_in_flight_at_horizon(self):
        v = classify(shot(power_spec(3.0), 3, 5.0, r_max=3.0))
        assert v.kind is ClassKind.N and v.k == 1
        assert "in flight" in v.note

    def test_node_budget_verdict(self):
        v = classify(shot(power_spec(3.0), 3, 5.0, max_nodes=2))
        assert v.kind is ClassKind.N and v.k == 2

    def test_band_trap_refines_to_middle_band(self):
        t = shot(two_hump_spec(), 3, 5.0)
        v = classify(t)
        assert v.kind is ClassKind.P and v.k == 0
        assert v.refinement == "S"
        lo, hi = v.band
        assert (lo, hi) == pytest.approx((4.2, 6.0), rel=1e-6)

    def test_descent_through_rungs_then_origin_well(self):
        v = classify(shot(two_hump_spec(), 3, 5.99))
        assert v.kind is ClassKind.P and v.refinement == "Q"
        assert v.k >= 3

    def test_horizon_without_certificate_is_inconclusive(self):
        # still mid-descent at the horizon, no crossing, Q(10) > 0
        with pytest.raises(InconclusiveClassification) as exc:
            classify(shot(SPEC, 4, 10.0, r_max=2.0))
        assert exc.value.reason == "ReachedRmax"
        assert exc.value.nodes == 0

    def test_near_critical_tail_confined_at_origin(self):
        # just under the ground height: residual energy ~1e-13 pins the
        # orbit to a vanishing neighborhood of zero for all later radii
        v = classify(shot(SPEC, 4, 8.6719342995, r_max=12.0))
        assert (v.kind, v.k, v.refinement) == (ClassKind.P, 0, "Q")
        assert "decays to zero" in v.note

    def test_critical_power_decay_is_pohozaev_positive(self):
        # Q = 2nF - (n-2) s f vanishes identically at the critical power
        v = classify(shot(power_spec(5.0), 3, 1.0))
        assert (v.kind, v.k, v.refinement) == (ClassKind.P, 0, "Q")
        assert "never cross" in v.note


# ---------------------------------------------------------------------------
# verdicts on synthetic event streams
# ---------------------------------------------------------------------------

class TestSyntheticShots:
    def test_double_zero_is_inconclusive(self):
        t = synthetic(SPEC, 4, 5.0,
                      [Event(EventKind.ZERO_CROSSING, 3.0, 0.0, -2.0,
                             direction=-1),
                       Event(EventKind.NEAR_DOUBLE_ZERO, 9.0, 0.0, 0.0)],
                      TerminalReason.DOUBLE_ZERO)
        with pytest.raises(InconclusiveClassification) as exc:
            classify(t)
        assert exc.value.reason == "NearDoubleZero"
        assert exc.value.nodes == 1

    def test_slow_crossing_before_trap_is_inconclusive(self):
        # |u'| below 1000 event_tol cannot be called transversal
        t = synthetic(SPEC, 4, 5.0,
                      [Event(EventKind.ZERO_CROSSING, 3.0, 0.0, -1e-8,
                             direction=-1),
                       Event(EventKind.EXTREMUM, 6.0, -0.9, 0.0,
                             direction=1, height=-0.9),
                       Event(EventKind.POSITIVE_MIN_BELOW_BETA, 6.0, -0.9,
                             0.0, direction=1, height=-0.9)],
                      TerminalReason.TRAPPED)
        with pytest.raises(InconclusiveClassification) as exc:
            classify(t)
        assert exc.value.reason == "slow-crossing"

    def test_monotone_tail_into_nonzero_equilibrium(self):
        t = synthetic(SPEC, 4, 3.0, [], TerminalReason.CONVERGED_TO_EQUILIBRIUM,
                      equilibrium=1.0, tail_u=np.linspace(3.0, 1.0, 24))
        v = classify(t)
        assert v.kind is ClassKind.TRAPPED_MONOTONE and v.k == 0

    def test_tail_pinned_at_a_rung_is_upsilon(self):
        lsc_gamma = 2.1999999999999713  # first rung of the two-hump fixture
        tail = np.full(24, lsc_gamma)
        t = synthetic(two_hump_spec(), 3, 5.0, [],
                      TerminalReason.CONVERGED_TO_EQUILIBRIUM,
                      equilibrium=lsc_gamma, tail_u=tail)
        v = classify(t)
        assert v.kind is ClassKind.P and v.refinement == "Upsilon"
        assert v.band == (lsc_gamma, lsc_gamma)

    def test_wandering_tail_near_a_rung_is_unresolved(self):
        lsc_gamma = 2.1999999999999713
        tail = lsc_gamma + np.linspace(-0.1, 0.1, 24)
        t = synthetic(two_hump_spec(), 3, 5.0, [],
                      TerminalReason.CONVERGED_TO_EQUILIBRIUM,
                      equilibrium=lsc_gamma, tail_u=tail)
        assert classify(t).refinement == "Unresolved"


# ---------------------------------------------------------------------------
# crossing bookkeeping
# ---------------------------------------------------------------------------

class TestCrossings:
    def test_node_count_ignores_tangential_grazes(self):
        t = synthetic(SPEC, 4, 5.0,
                      [Event(EventKind.ZERO_CROSSING, 2.0, 0.0, -2.0),
                       Event(EventKind.ZERO_CROSSING, 4.0, 0.0, 1e-8)],
                      TerminalReason.REACHED_RMAX)
        assert node_count(t) == 1

    def test_z_sequence_interleaves(self):
        t = shot(two_hump_spec(), 3, 5.99)
        zs = z_sequence(t)
        assert len(zs.t) == len(zs.z) - 1
        for a, m, b in zip(zs.z, zs.t, zs.z[1:]):
            assert a < m < b

    def test_z_sequence_rejects_missing_extremum(self):
        with pytest.raises(OrderingViolated):
            ZSequence(z=(1.0, 2.0), t=())

    def test_z_sequence_rejects_bad_ordering(self):
        with pytest.raises(OrderingViolated):
            ZSequence(z=(1.0, 2.0), t=(2.5,))


# ---------------------------------------------------------------------------
# Pohozaev positivity certificate
# ---------------------------------------------------------------------------

class TestNeverReachesZero:
    def test_critical_power_certifies(self):
        assert never_reaches_zero(power_spec(5.0), 3, 7.0)

    def test_subcritical_power_does_not(self):
        assert not never_reaches_zero(power_spec(3.0), 3, 7.0)

    def test_height_dependent_certificate(self):
        # 8F - 2sf = (2/3) s^3 - 2 s^2 changes sign at s = 3
        assert never_reaches_zero(SPEC, 4, 2.5)
        assert not never_reaches_zero(SPEC, 4, 4.0)

    def test_zero_height_is_trivially_certified(self):
        assert never_reaches_zero(SPEC, 4, 0.0)


def test_shot_class_serialization():
    v = ShotClass(ClassKind.N, 2, evidence=(0, 3))
    d = v.to_dict()
    assert d == {"kind": "N", "k": 2, "refinement": None, "evidence": [0, 3]}
    assert str(v) == "N(2)"

"""Search layer: sweeps, bracketed bisection, scans, and the worked example.

Reference heights were frozen from independent coarse integration (the
fixed-step oracle brackets the 0-node transition of u^2 - u at n = 4
between 8.66 and 8.69) and from repeated runs at tightened tolerances;
every frozen digit string below reproduces under a 10x tighter alpha_tol.
"""

from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import brentq

from oracles import crossing_count, rk4_shoot
from radialshoot.classifier import ClassKind, classify, node_count
from radialshoot.diagnostics import gst_radius
from radialshoot.errors import (BracketBroken, DomainExceeded,
                                LandscapeIncomplete, NotFound,
                                ReproductionFailed)
from radialshoot.finder import (BoundState, SweepMap, SweepPoint,
                                find_ground_state, find_kth_bound_state,
                                multiplicity_scan, reproduce_example, sweep,
                                tune_jump)
from radialshoot.integrator import (IVProblem, SolverOptions, integrate,
                                    landscape_for)
from radialshoot.nonlinearity import (build_jump_family,
                                      power_minus_linear_spec, power_spec)
from radialshoot.presets import two_hump_spec

SPEC = power_minus_linear_spec(2.0)

#: 0-node transition height of u^2 - u at n = 4 (frozen at alpha_tol 1e-12).
GROUND_HEIGHT = 8.6719342995202169
#: 1- and 2-node transition heights of the same problem.
FIRST_EXCITED = 37.209564691409469
SECOND_EXCITED = 96.333272401243448


@pytest.fixture(scope="module")
def ground():
    return find_ground_state(SPEC, 4, (5.0, 12.0))


# ---------------------------------------------------------------------------
# ground state
# ---------------------------------------------------------------------------

class TestGroundState:
    def test_bracket_straddles_the_frozen_height(self, ground):
        lo, hi = ground.bracket
        assert lo <= GROUND_HEIGHT <= hi
        assert ground.width <= 1e-10 * max(1.0, hi)
        assert ground.midpoint == pytest.approx(GROUND_HEIGHT, abs=1e-9)

    def test_oracle_bracket_contains_it(self):
        # independent fixed-step runs: 8.66 never crosses by r = 12,
        # 8.69 crosses near r = 5.26
        def f(u):
            return u * u - u

        _, us_lo, _ = rk4_shoot(f, 4, 8.66, 12.0)
        _, us_hi, _ = rk4_shoot(f, 4, 8.69, 12.0)
        assert crossing_count(us_lo) == 0
        assert crossing_count(us_hi) >= 1
        assert 8.66 < GROUND_HEIGHT < 8.69

    def test_endpoint_certificates(self, ground):
        assert ground.lo_class.kind is ClassKind.P
        assert ground.lo_class.k == 0
        assert ground.hi_class.kind is ClassKind.N
        assert ground.hi_class.k >= 1

    def test_witness_is_a_full_run(self, ground):
        assert ground.witness.problem.alpha == ground.midpoint
        assert ground.witness.problem.options.max_nodes is None

    def test_same_side_bracket_is_rejected(self):
        with pytest.raises(BracketBroken, match="P-side at k = 0"):
            find_ground_state(SPEC, 4, (2.0, 5.0))

    def test_degenerate_bracket_is_rejected(self):
        with pytest.raises(ValueError):
            find_ground_state(SPEC, 4, (5.0, 5.0))

    def test_serialization(self, ground):
        d = ground.to_dict(witness_ref="witness.csv")
        assert d["k"] == 0 and d["witness"] == "witness.csv"
        assert d["bracket"] == list(ground.bracket)
        assert d["lo_class"]["kind"] == "P"


# ---------------------------------------------------------------------------
# excited states
# ---------------------------------------------------------------------------

class TestExcitedStates:
    def test_first_excited(self):
        state = find_kth_bound_state(SPEC, 4, 1, (20.0, 50.0), grid_size=16)
        assert state.midpoint == pytest.approx(FIRST_EXCITED, rel=1e-9)
        assert state.lo_class.kind is ClassKind.P and state.lo_class.k == 1
        assert state.hi_class.kind is ClassKind.N and state.hi_class.k >= 2

    def test_second_excited(self):
        state = find_kth_bound_state(SPEC, 4, 2, (60.0, 120.0), grid_size=16)
        assert state.midpoint == pytest.approx(SECOND_EXCITED, rel=1e-9)
        assert state.k == 2

    def test_windows_without_a_transition(self):
        # strictly between the 1- and 2-node heights: every probe is N-side
        with pytest.raises(NotFound):
            find_kth_bound_state(SPEC, 4, 1, (39.0, 45.0), grid_size=5)

    def test_negative_k_is_rejected(self):
        with pytest.raises(ValueError):
            find_kth_bound_state(SPEC, 4, -1, (5.0, 12.0))


# ---------------------------------------------------------------------------
# sweeping
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def coarse() -> SweepMap:
    return sweep(SPEC, 4, (2.0, 50.0), 9)


class TestSweep:
    def test_grid_and_verdicts(self, coarse):
        assert [p.alpha for p in coarse.grid] == list(np.linspace(2, 50, 9))
        ks = [p.verdict.k for p in coarse.grid]
        assert ks == [0, 0, 1, 1, 1, 1, 2, 2, 2]
        assert all(p.verdict.kind is ClassKind.P for p in coarse.grid)

    def test_transitions_bracket_the_frozen_heights(self, coarse):
        pairs = coarse.transition_brackets()
        assert pairs == [(8.0, 14.0), (32.0, 38.0)]
        assert pairs[0][0] < GROUND_HEIGHT < pairs[0][1]
        assert pairs[1][0] < FIRST_EXCITED < pairs[1][1]

    def test_worker_pool_matches_serial(self, coarse):
        parallel = sweep(SPEC, 4, (2.0, 50.0), 9, workers=2)
        assert parallel.to_dict() == coarse.to_dict()

    def test_range_validation(self):
        with pytest.raises(ValueError):
            sweep(SPEC, 4, (5.0, 2.0), 9)
        with pytest.raises(ValueError):
            sweep(SPEC, 4, (2.0, 5.0), 1)
        with pytest.raises(DomainExceeded):
            sweep(two_hump_spec(), 3, (1.0, 7.0), 5)

    def test_grid_must_increase(self):
        pt = SweepPoint(1.0, None)
        with pytest.raises(ValueError):
            SweepMap((pt, pt), ())


# ---------------------------------------------------------------------------
# multiplicity scan
# ---------------------------------------------------------------------------

class TestMultiplicityScan:
    def test_empty_below_the_threshold(self, hump_ladder):
        assert hump_ladder[3] is None

    def test_two_states_at_the_threshold(self, hump_ladder):
        states = hump_ladder[4]
        assert len(states) == 2
        mids = [s.midpoint for s in states]
        assert mids == pytest.approx([5.837864, 5.870933], abs=1e-5)
        assert all(s.k == 4 for s in states)
        assert mids == sorted(mids)

    def test_witnesses_carry_the_node_count(self, hump_ladder):
        for state in hump_ladder[4]:
            assert node_count(state.witness) in (4, 5)

    def test_needs_rungs(self):
        lsc = landscape_for(SPEC, 0.0)
        with pytest.raises(LandscapeIncomplete):
            multiplicity_scan(SPEC, lsc, 4, 0)


# ---------------------------------------------------------------------------
# jump tuning
# ---------------------------------------------------------------------------

class TestTuneJump:
    def test_tuned_triple_passes_its_own_gates(self):
        eps, amp, alpha2 = tune_jump(SPEC, GROUND_HEIGHT, power_spec(2.0),
                                     (2.0, 6.0))
        assert (eps, amp) == (0.1, pytest.approx(np.sqrt(10.0), rel=1e-12))
        assert alpha2 == pytest.approx(11.017746817805726, rel=1e-6)

        # re-check the certificate by hand on the spliced family
        family = build_jump_family([SPEC, power_spec(2.0)],
                                   [GROUND_HEIGHT + eps], [eps], [amp * amp])
        traj = integrate(IVProblem(family, 4, alpha2))
        verdict = classify(traj)
        assert verdict.kind in (ClassKind.P, ClassKind.TRAPPED_MONOTONE)
        assert verdict.k == 0

        j = int(np.nonzero(traj.u < GROUND_HEIGHT)[0][0])
        r_star = brentq(lambda rr: traj.sample_at(rr)[0] - GROUND_HEIGHT,
                        traj.r[j - 1], traj.r[j], xtol=1e-13)
        du_star = traj.sample_at(r_star)[1]
        lsc = landscape_for(SPEC, GROUND_HEIGHT)
        assert r_star <= 0.9 * gst_radius(SPEC, lsc, 4, GROUND_HEIGHT)
        assert 2.0 <= r_star * abs(du_star) <= 6.0

    def test_window_must_sit_under_the_capture_bound(self):
        # (alpha* - b)(n - 2) = 15.34...: a window top above it is senseless
        with pytest.raises(ValueError, match="must stay below"):
            tune_jump(SPEC, GROUND_HEIGHT, power_spec(2.0), (2.0, 16.0))

    def test_window_ordering(self):
        with pytest.raises(ValueError):
            tune_jump(SPEC, GROUND_HEIGHT, power_spec(2.0), (6.0, 2.0))


# ---------------------------------------------------------------------------
# the worked example
# ---------------------------------------------------------------------------

class TestExample:
    def test_base_height(self, example_report):
        assert example_report.alpha_star == pytest.approx(GROUND_HEIGHT,
                                                          abs=1e-9)

    def test_probe_classes_alternate(self, example_report):
        assert example_report.classes == ("N", "P", "N", "P", "N")
        assert list(example_report.alphas) == sorted(example_report.alphas)

    def test_five_distinct_brackets(self, example_report):
        mids = [b.midpoint for b in example_report.brackets]
        assert len(mids) == 5
        assert all(a < b for a, b in zip(mids, mids[1:]))
        gaps = np.diff(mids)
        widths = [b.width for b in example_report.brackets]
        assert np.min(gaps) > 100.0 * max(widths)

    def test_first_bracket_is_the_base_ground_state(self, example_report):
        lo, hi = example_report.brackets[0].bracket
        assert lo <= GROUND_HEIGHT <= hi

    def test_spliced_family_layout(self, example_report):
        # base + four (bridge, donor) blocks
        assert len(example_report.spec.pieces) == 9
        assert example_report.to_dict()["classes"] == ["N", "P", "N", "P", "N"]

    def test_breaking_the_slowdown_fails_loudly(self):
        with pytest.raises(ReproductionFailed) as exc:
            reproduce_example(amps_sq=(10.0, 10.0, 10.0, 0.1))
        assert exc.value.stage == "alpha_3"

    def test_amplitude_count_is_checked(self):
        with pytest.raises(ValueError):
            reproduce_example(amps_sq=(10.0, 0.1))


# ---------------------------------------------------------------------------
# bracket container
# ---------------------------------------------------------------------------

class TestBoundState:
    def test_rejects_single_sided_certificates(self, ground):
        from radialshoot.classifier import ShotClass

        p0 = ShotClass(ClassKind.P, 0)
        with pytest.raises(BracketBroken):
            BoundState((1.0, 2.0), 0, ground.witness, p0, p0)

    def test_trapped_monotone_counts_as_settled(self, ground):
        from radialshoot.classifier import ShotClass

        tm = ShotClass(ClassKind.TRAPPED_MONOTONE, 1)
        n2 = ShotClass(ClassKind.N, 2)
        state = BoundState((1.0, 2.0), 1, ground.witness, tm, n2)
        assert state.midpoint == 1.5

    def test_rejects_empty_bracket(self, ground):
        from radialshoot.classifier import ShotClass

        p0 = ShotClass(ClassKind.P, 0)
        n1 = ShotClass(ClassKind.N, 1)
        with pytest.raises(ValueError):
            BoundState((2.0, 2.0), 0, ground.witness, p0, n1)

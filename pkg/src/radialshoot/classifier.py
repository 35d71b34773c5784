"""Map terminated trajectories onto the shooting taxonomy.

A shot is P(k) when it can never reach zero again after k transversal
crossings (energy trap, or decay to the zero equilibrium), N(k) when it
has made k transversal crossings and is still in flight, and
TrappedMonotone(k) when it slides monotonically into the nonzero
equilibrium +-b. G(k) marks a bound state; it is a bracket property and
is only ever attached by the finder, never to a single trajectory.

P-classes are refined against the ladder of record maxima of F: Q means
the final oscillation sits below the first rung, S between two rungs,
Upsilon asymptotic to a rung itself.

k always counts transversal zero crossings. Where an index is quoted for
a k-th bound state elsewhere, that state has k nodes here.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InconclusiveClassification, OrderingViolated
from .integrator import (Event, EventKind, TerminalReason, Trajectory,
                         landscape_for)
from .landscape import Landscape

#: |u'| at a crossing must exceed this many event_tols to count as a node.
TRANSVERSAL_FACTOR = 1e3

#: Relative half-width of the "asymptotic to a rung" acceptance band.
BAND_RTOL = 1e-6

#: Fraction of the sample tail that must sit inside the band for Upsilon.
TAIL_FRACTION = 0.3


class ClassKind(Enum):
    P = "P"
    N = "N"
    G = "G"
    TRAPPED_MONOTONE = "TrappedMonotone"


@dataclass(frozen=True)
class ShotClass:
    """Classification verdict plus the events that justify it.

    evidence holds indices into trajectory.events; band is the rung
    interval the final oscillation was confined to, when one applies.
    """

    kind: ClassKind
    k: int
    refinement: str | None = None
    evidence: tuple[int, ...] = ()
    band: tuple[float, float] | None = None
    note: str = ""

    def __str__(self) -> str:
        tail = f"[{self.refinement}]" if self.refinement else ""
        return f"{self.kind.value}({self.k}){tail}"

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value, "k": self.k,
               "refinement": self.refinement,
               "evidence": list(self.evidence)}
        if self.band is not None:
            out["band"] = list(self.band)
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class ZSequence:
    """Crossing radii interleaved with the principal extremum radii.

    t[i] is the largest-|u| extremum strictly between z[i] and z[i+1];
    construction fails loudly if the strict interleaving ever breaks.
    """

    z: tuple[float, ...]
    t: tuple[float, ...]

    def __post_init__(self):
        if len(self.t) != max(len(self.z) - 1, 0):
            raise OrderingViolated("need exactly one extremum per gap")
        merged = []
        for i, zi in enumerate(self.z):
            merged.append(zi)
            if i < len(self.t):
                merged.append(self.t[i])
        if any(b <= a for a, b in zip(merged, merged[1:])):
            raise OrderingViolated(
                f"crossings and extrema do not interleave: {merged}")


def z_sequence(trajectory: Trajectory) -> ZSequence:
    """Extract the interleaved crossing/extremum radii from the events."""
    zs = [e.r for e in trajectory.events
          if e.kind is EventKind.ZERO_CROSSING]
    exts = [e for e in trajectory.events if e.kind is EventKind.EXTREMUM]
    ts = []
    for a, b in zip(zs, zs[1:]):
        gap = [e for e in exts if a < e.r < b]
        if not gap:
            raise OrderingViolated(
                f"no extremum between crossings at r = {a:.6g} and {b:.6g}")
        ts.append(max(gap, key=lambda e: abs(e.u)).r)
    return ZSequence(tuple(zs), tuple(ts))


def node_count(trajectory: Trajectory) -> int:
    """Number of transversal zero crossings certified by the events."""
    thr = TRANSVERSAL_FACTOR * trajectory.problem.options.event_tol
    return sum(1 for e in trajectory.events
               if e.kind is EventKind.ZERO_CROSSING and abs(e.du) > thr)


def never_reaches_zero(spec, n_dim: int, alpha: float) -> bool:
    """Pohozaev positivity certificate: Q <= 0 on (0, |alpha|].

    A transversal crossing at radius r would force the weighted boundary
    term r^N u'^2 > 0 to equal the integral of t^(N-1) Q(u), which is
    nonpositive when Q never goes positive on the reachable heights. So
    a shot under this certificate can never cross zero, at any horizon.
    """
    a = abs(alpha)
    if a == 0.0:
        return True
    grid = np.linspace(0.0, a, 4097)
    bps = [b for b in spec.breakpoints if b < a]
    if bps:
        grid = np.unique(np.concatenate([grid, bps]))
    q = np.asarray(spec.Q(n_dim, grid))
    # tolerance must track the cancelled terms, not Q itself: at a critical
    # power Q is pure rounding residue of magnitudes ~ 2n F
    parts = 2.0 * n_dim * np.abs(np.asarray(spec.F(grid)))
    scale = max(1.0, float(np.max(parts)))
    return bool(np.all(q <= 1e-12 * scale))


# ---------------------------------------------------------------------------
# the verdict
# ---------------------------------------------------------------------------

_TRAP_KINDS = (EventKind.POSITIVE_MIN_BELOW_BETA, EventKind.BAND_TRAP)


def _band_refinement(lsc: Landscape, m: float) -> tuple[str, tuple[float, float]]:
    lo, hi = lsc.band_edges(m)
    return ("Q" if lo == 0.0 else "S"), (lo, hi)


def _crossing_indices(trajectory: Trajectory, before: float) -> list[int]:
    return [i for i, e in enumerate(trajectory.events)
            if e.kind is EventKind.ZERO_CROSSING and e.r <= before]


def _transversal_up_to(trajectory: Trajectory, before: float) -> tuple[int, bool]:
    thr = TRANSVERSAL_FACTOR * trajectory.problem.options.event_tol
    idx = _crossing_indices(trajectory, before)
    k = sum(1 for i in idx if abs(trajectory.events[i].du) > thr)
    return k, k == len(idx)


def classify(trajectory: Trajectory,
             landscape: Landscape | None = None) -> ShotClass:
    """Verdict for one terminated trajectory.

    Raises InconclusiveClassification when the run ended without any
    usable certificate (horizon hit mid-flight, a near-double zero, an
    escape before the first crossing, or a crossing too slow to call
    transversal); the caller decides whether to extend r_max, tighten
    event_tol, or hand the bracket to the finder.
    """
    prob = trajectory.problem
    lsc = landscape if landscape is not None else landscape_for(
        prob.spec, prob.alpha)

    if prob.alpha == 0.0:
        return ShotClass(ClassKind.P, 0, note="trivial zero solution")

    traps = [i for i, e in enumerate(trajectory.events)
             if e.kind in _TRAP_KINDS]
    if traps:
        i_trap = traps[0]
        ev = trajectory.events[i_trap]
        k, clean = _transversal_up_to(trajectory, ev.r)
        if not clean:
            raise InconclusiveClassification(
                "slow zero crossing before the trap; tighten event_tol",
                reason="slow-crossing", nodes=k)
        ref, band = _band_refinement(lsc, abs(ev.u))
        return ShotClass(ClassKind.P, k, refinement=ref, band=band,
                         evidence=tuple(_crossing_indices(trajectory, ev.r)
                                        + [i_trap]))

    reason = trajectory.reason
    k, clean = _transversal_up_to(trajectory, trajectory.r_end)
    cross_idx = tuple(_crossing_indices(trajectory, trajectory.r_end))

    if reason is TerminalReason.DOUBLE_ZERO:
        raise InconclusiveClassification(
            "near-double zero; bound-state certification needs a bracket",
            reason="NearDoubleZero", nodes=k)

    if reason in (TerminalReason.NODE_LIMIT, TerminalReason.BLOWUP,
                  TerminalReason.REACHED_RMAX):
        if k >= 1 and clean:
            if reason is TerminalReason.REACHED_RMAX:
                return ShotClass(ClassKind.N, k, evidence=cross_idx,
                                 note="in flight at the horizon")
            return ShotClass(ClassKind.N, k, evidence=cross_idx)
        if not clean:
            raise InconclusiveClassification(
                "crossing below the transversality threshold",
                reason="slow-crossing", nodes=k)
        # k == 0 from here
        if reason is TerminalReason.BLOWUP:
            raise InconclusiveClassification(
                "escaped the working domain before any crossing",
                reason="Blowup", nodes=0)
        if never_reaches_zero(prob.spec, prob.n_dim, prob.alpha):
            return ShotClass(ClassKind.P, 0, refinement="Q",
                             band=lsc.band_edges(abs(trajectory.u[-1])),
                             note="Pohozaev-positive: can never cross")
        raise InconclusiveClassification(
            "no certificate at the horizon; extend r_max",
            reason="ReachedRmax", nodes=0)

    # ConvergedToEquilibrium
    if not clean:
        raise InconclusiveClassification(
            "crossing below the transversality threshold",
            reason="slow-crossing", nodes=k)
    e = trajectory.equilibrium
    m = abs(e) if e is not None else 0.0
    if m == 0.0:
        return ShotClass(ClassKind.P, k, refinement="Q",
                         band=lsc.band_edges(0.0),
                         evidence=cross_idx, note="decays to zero")
    if lsc.b > 0.0 and abs(m - lsc.b) <= 1e-9 * max(1.0, lsc.b):
        return ShotClass(ClassKind.TRAPPED_MONOTONE, k, evidence=cross_idx,
                         note=f"monotone tail into {e:.17g}")
    rung = next((g for g in lsc.gamma_seq
                 if abs(m - g) <= 1e-9 * max(1.0, g)), None)
    if rung is not None:
        n_tail = max(4, int(TAIL_FRACTION * len(trajectory.r)))
        inside = np.abs(np.abs(trajectory.u[-n_tail:]) - rung) \
            <= BAND_RTOL * rung
        ref = "Upsilon" if bool(np.all(inside)) else "Unresolved"
        return ShotClass(ClassKind.P, k, refinement=ref,
                         band=(rung, rung), evidence=cross_idx,
                         note=f"tail at the rung {rung:.17g}")
    ref, band = _band_refinement(lsc, m)
    return ShotClass(ClassKind.P, k, refinement=ref, band=band,
                     evidence=cross_idx, note=f"tail at equilibrium {e:.17g}")

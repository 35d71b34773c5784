"""Adaptive shooting integrator for the singular radial IVP.

Solves u'' + (N-1)/r u' + f(u) = 0, u(0) = alpha, u'(0) = 0, for an odd
piecewise nonlinearity f. The r = 0 singularity is removed by a quartic
series on [0, h0]; from there an embedded Runge-Kutta 5(4) scheme with
dense output advances in chunks whose ends are pinned to the kink levels
of f (bridge joints and the odd-extension seam at u = 0), so no accepted
step straddles a point where f loses smoothness. Zero crossings,
extrema and monitored height crossings are refined on the dense output
and post-processed into trap, near-double-zero, node-budget and
equilibrium certificates that can terminate the run early.

Negative initial heights are integrated through the positive mirror
trajectory and negated, so odd symmetry holds exactly.
"""
from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (DomainExceeded, OutOfRange, StartRadiusTooLarge,
                     StepSizeUnderflow)
from .landscape import Landscape, analyze_landscape, cached_landscape
from .nonlinearity import NonlinearitySpec

#: Hard cap on chunk restarts (kink crossings) in one run.
MAX_CHUNKS = 20000


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and budgets for one integration run.

    max_nodes stops the run right at the given zero-crossing count, which
    is how sweeps ask "does this shot cross at least k times" without
    paying for the tail. continue_past_trap records trap certificates but
    keeps integrating; it exists so soundness checks can look for (absent)
    crossings after a trap.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    r_max: float = 50.0
    h0: float = 1e-3
    event_tol: float = 1e-9
    max_step: float = 0.5
    max_nodes: int | None = None
    continue_past_trap: bool = False

    def __post_init__(self):
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0
                and self.event_tol > 0.0):
            raise ValueError("tolerances must be positive")
        if not self.r_max > self.h0 > 0.0:
            raise ValueError("need r_max > h0 > 0")
        if self.max_step <= 0.0:
            raise ValueError("max_step must be positive")
        if self.max_nodes is not None and self.max_nodes < 1:
            raise ValueError("max_nodes must be at least 1")


@dataclass(frozen=True)
class IVProblem:
    """One radial shooting problem: dimension, initial height, f."""

    spec: NonlinearitySpec
    n_dim: int
    alpha: float
    options: SolverOptions = SolverOptions()

    def __post_init__(self):
        if int(self.n_dim) != self.n_dim or self.n_dim < 2:
            raise ValueError("dimension must be an integer >= 2")
        if abs(self.alpha) > self.spec.domain_top:
            raise DomainExceeded(
                f"alpha = {self.alpha:.17g} outside the nonlinearity domain "
                f"(+-{self.spec.domain_top:.17g})")


class EventKind(Enum):
    ZERO_CROSSING = "ZeroCrossing"
    EXTREMUM = "Extremum"
    HEIGHT_CROSSING = "HeightCrossing"
    POSITIVE_MIN_BELOW_BETA = "PositiveMinBelowBeta"
    BAND_TRAP = "BandTrap"
    NEAR_DOUBLE_ZERO = "NearDoubleZero"


class TerminalReason(Enum):
    REACHED_RMAX = "ReachedRmax"
    TRAPPED = "Trapped"
    DOUBLE_ZERO = "DoubleZeroDetected"
    CONVERGED_TO_EQUILIBRIUM = "ConvergedToEquilibrium"
    BLOWUP = "Blowup"
    NODE_LIMIT = "NodeLimit"


@dataclass(frozen=True)
class Event:
    """One refined trajectory event.

    direction carries the sign of u' at crossings and, for extrema, +1
    for a maximum / -1 for a minimum (0 when degenerate). height is the
    monitored level for height crossings and the extremum height for
    extremum and trap events.
    """

    kind: EventKind
    r: float
    u: float
    du: float
    direction: int = 0
    height: float | None = None
    note: str = ""

    def mirrored(self) -> "Event":
        return Event(self.kind, self.r, -self.u, -self.du, -self.direction,
                     None if self.height is None else -self.height, self.note)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "r": self.r, "u": self.u,
                "du": self.du, "direction": self.direction,
                "height": self.height, "note": self.note}


class _Quartic:
    """Start series u = alpha + a2 r^2 + a4 r^4, valid on [0, h0]."""

    __slots__ = ("alpha", "a2", "a4")

    def __init__(self, alpha: float, a2: float, a4: float):
        self.alpha, self.a2, self.a4 = alpha, a2, a4

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        r2 = r * r
        u = self.alpha + r2 * (self.a2 + self.a4 * r2)
        du = r * (2.0 * self.a2 + 4.0 * self.a4 * r2)
        return np.stack([u, du])


class _Negate:
    __slots__ = ("fn",)

    def __init__(self, fn):
        self.fn = fn

    def __call__(self, r):
        return -self.fn(r)


@dataclass
class Trajectory:
    """Result of one integration; treat as immutable once returned.

    Samples are the accepted solver nodes (first one at r = h0); dense
    segments cover [0, r_end] so sample_at can interpolate anywhere,
    including the series head below h0.
    """

    problem: IVProblem
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    events: tuple[Event, ...]
    reason: TerminalReason
    r_end: float
    equilibrium: float | None = None
    _seg_lo: np.ndarray = field(default=None, repr=False)
    _seg_fn: tuple = field(default=(), repr=False)

    @property
    def samples(self) -> np.ndarray:
        return np.column_stack([self.r, self.u, self.du])

    def events_of(self, *kinds: EventKind) -> tuple[Event, ...]:
        return tuple(e for e in self.events if e.kind in kinds)

    def sample_at(self, r: float) -> tuple[float, float]:
        """Interpolated (u, u') at radius r in [0, r_end]."""
        if not 0.0 <= r <= self.r_end * (1.0 + 4e-16):
            raise OutOfRange(
                f"r = {r:.17g} outside [0, {self.r_end:.17g}]")
        i = np.searchsorted(self.r, r)
        if i < len(self.r) and self.r[i] == r:
            return float(self.u[i]), float(self.du[i])
        j = int(np.searchsorted(self._seg_lo, r, side="right")) - 1
        y = self._seg_fn[max(j, 0)](r)
        return float(y[0]), float(y[1])

    def dense_eval(self, rs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized sample_at for ascending radii within [0, r_end]."""
        rs = np.asarray(rs, dtype=float)
        if rs.size and not (rs[0] >= 0.0
                            and rs[-1] <= self.r_end * (1.0 + 4e-16)):
            raise OutOfRange("radii outside [0, r_end]")
        u = np.empty_like(rs)
        du = np.empty_like(rs)
        idx = np.clip(np.searchsorted(self._seg_lo, rs, side="right") - 1,
                      0, len(self._seg_fn) - 1)
        for j in np.unique(idx):
            m = idx == j
            y = self._seg_fn[j](rs[m])
            u[m], du[m] = y[0], y[1]
        return u, du

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("r,u,du\n")
            for r, u, du in zip(self.r, self.u, self.du):
                fh.write(f"{r:.17g},{u:.17g},{du:.17g}\n")

    def sidecar_dict(self) -> dict:
        return {
            "alpha": self.problem.alpha,
            "n_dim": self.problem.n_dim,
            "terminal": {"reason": self.reason.value, "r_end": self.r_end},
            "equilibrium": self.equilibrium,
            "events": [e.to_dict() for e in self.events],
        }


def sample_at(trajectory: Trajectory, r: float) -> tuple[float, float]:
    return trajectory.sample_at(r)


# ---------------------------------------------------------------------------
# fast scalar evaluation (the solver hot path)
# ---------------------------------------------------------------------------

def _fast_eval(spec: NonlinearitySpec):
    """Unchecked scalar (f, f') closures over plain floats.

    No domain check: steps may probe marginally past a finite top before
    the blowup event truncates, and the last closed form extends there.
    """
    los = [p.lo for p in spec.pieces]
    forms = [p.form for p in spec.pieces]
    last = len(forms) - 1

    def f(s: float) -> float:
        t = -s if s < 0.0 else s
        i = bisect_right(los, t) - 1
        v = float(forms[i if i < last else last].value(t))
        return v if s >= 0.0 else -v

    def fp(s: float) -> float:
        t = -s if s < 0.0 else s
        i = bisect_right(los, t) - 1
        return float(forms[i if i < last else last].deriv(t))

    return f, fp


# ---------------------------------------------------------------------------
# series start
# ---------------------------------------------------------------------------

def _series_coeffs(spec: NonlinearitySpec, n_dim: int,
                   alpha: float) -> tuple[float, float]:
    """Quartic start coefficients from matching the ODE order by order."""
    fa = float(spec.f(alpha))
    fpa = float(spec.f_prime(alpha)) if fa != 0.0 else 0.0
    a2 = -fa / (2.0 * n_dim)
    a4 = fa * fpa / (8.0 * n_dim * (n_dim + 2.0))
    return a2, a4


def _start_defect(fun_f, n_dim: int, alpha: float, a2: float, a4: float,
                  h0: float) -> float:
    """Estimated error of the series at h0, via its ODE defect.

    Plugging the quartic into the ODE leaves the curvature remainder of f
    plus the dropped sixth-order term; integrating that defect twice
    bounds the start error to leading order.
    """
    u_h = alpha + a2 * h0 * h0 + a4 * h0 ** 4
    upp = 2.0 * a2 + 12.0 * a4 * h0 * h0
    up = 2.0 * a2 * h0 + 4.0 * a4 * h0 ** 3
    defect = upp + (n_dim - 1.0) / h0 * up + fun_f(u_h)
    return 0.5 * abs(defect) * h0 * h0


def taylor_start(problem: IVProblem) -> tuple[float, float, float]:
    """State (r, u, u') at r = h0 from the series start.

    Raises StartRadiusTooLarge when the series' estimated error at h0
    exceeds the solver's own accept threshold abs_tol + rel_tol*|alpha|.
    """
    opts = problem.options
    alpha, h0 = problem.alpha, opts.h0
    a2, a4 = _series_coeffs(problem.spec, problem.n_dim, alpha)
    if a2 == 0.0 and a4 == 0.0:
        return h0, alpha, 0.0
    fun_f, _ = _fast_eval(problem.spec)
    est = _start_defect(fun_f, problem.n_dim, alpha, a2, a4, h0)
    if est > opts.abs_tol + opts.rel_tol * abs(alpha):
        raise StartRadiusTooLarge(
            f"series start error ~{est:.3g} at h0 = {h0:.3g} exceeds "
            "tolerance; shrink h0")
    q = _Quartic(alpha, a2, a4)
    y = q(h0)
    return h0, float(y[0]), float(y[1])


def _start_state(problem: IVProblem,
                 fun_f) -> tuple[float, float, float, float, float]:
    """Series state for integrate, shrinking the start radius as needed.

    options.h0 acts as an upper bound: when the quartic cannot meet the
    solver's accept threshold there (strong f, large alpha), the start
    radius is reduced along the ~h^6 scaling of the defect estimate.
    """
    opts = problem.options
    alpha = problem.alpha
    a2, a4 = _series_coeffs(problem.spec, problem.n_dim, alpha)
    if a2 == 0.0 and a4 == 0.0:
        return opts.h0, alpha, 0.0, a2, a4
    tol = opts.abs_tol + opts.rel_tol * abs(alpha)
    h = opts.h0
    for _ in range(8):
        est = _start_defect(fun_f, problem.n_dim, alpha, a2, a4, h)
        if est <= tol:
            u = alpha + a2 * h * h + a4 * h ** 4
            du = 2.0 * a2 * h + 4.0 * a4 * h ** 3
            return h, u, du, a2, a4
        h *= 0.7 * (tol / est) ** (1.0 / 6.0)
        if h < 1e-10:
            break
    raise StartRadiusTooLarge(
        f"no usable series start below h0 = {opts.h0:.3g}")


# ---------------------------------------------------------------------------
# landscape with a horizon wide enough for this alpha
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _capped_landscape(spec: NonlinearitySpec, cap: float) -> Landscape:
    return analyze_landscape(spec, domain_cap=cap)


def landscape_for(spec: NonlinearitySpec, alpha: float) -> Landscape:
    """Cached landscape whose working cap safely contains |alpha|."""
    lsc = cached_landscape(spec)
    if lsc.cap_touched and abs(alpha) >= 0.25 * lsc.cap:
        cap = 2.0 ** math.ceil(math.log2(8.0 * abs(alpha)))
        lsc = _capped_landscape(spec, max(cap, lsc.cap))
    return lsc


# ---------------------------------------------------------------------------
# the run
# ---------------------------------------------------------------------------

def _make_event(fn, terminal=False, direction=0):
    fn.terminal = terminal
    fn.direction = direction
    return fn


class _Shooter:
    """Single-use state machine for one positive-alpha integration."""

    def __init__(self, problem: IVProblem):
        self.problem = problem
        self.opts = problem.options
        self.spec = problem.spec
        self.n_dim = problem.n_dim
        self.alpha = problem.alpha
        self.lsc = landscape_for(problem.spec, problem.alpha)
        self.f, self.fp = _fast_eval(problem.spec)
        self.blow_cap = self.lsc.cap

        bps = self.spec.breakpoints
        # 0.0 is a kink too: the odd extension is C1 but not C2 there, so
        # letting a step straddle it would degrade the scheme's order
        self.kinks = sorted([-b for b in bps] + [0.0] + list(bps))
        mons = sorted(set(bps) | set(self.lsc.gamma_seq))
        merged: list[float] = []
        for m in mons:
            if not merged or m - merged[-1] > 1e-12 * max(1.0, m):
                merged.append(m)
        self.monitors = [-m for m in reversed(merged)] + merged

        fmax = self.lsc.f_abs_max_on((0.0, max(self.alpha, 1e-9)))
        self.trap_margin = 10.0 * self.opts.event_tol * fmax

        self.events: list[Event] = []
        self.node_count = 0
        self.r_parts: list[np.ndarray] = []
        self.y_parts: list[np.ndarray] = []
        self.seg_lo: list[float] = []
        self.seg_fn: list[Callable] = []
        self.stop: tuple[float, float, float, TerminalReason] | None = None
        self.equilibrium: float | None = None

    # -- helpers ------------------------------------------------------------

    def rhs(self, r, y):
        u, v = y
        return (v, -(self.n_dim - 1.0) / r * v - self.f(u))

    def _record(self, ev: Event) -> None:
        self.events.append(ev)

    def _set_stop(self, r, u, du, reason) -> None:
        self.stop = (r, u, du, reason)

    # -- event processing ---------------------------------------------------

    def _on_zero(self, r, u, du) -> bool:
        """Returns True when the run must stop at this event."""
        tol = self.opts.event_tol
        if abs(du) <= tol:
            self._record(Event(EventKind.ZERO_CROSSING, r, u, du,
                               direction=0))
            self._record(Event(EventKind.NEAR_DOUBLE_ZERO, r, u, du))
            self._set_stop(r, u, du, TerminalReason.DOUBLE_ZERO)
            return True
        d = 1 if du > 0 else -1
        self._record(Event(EventKind.ZERO_CROSSING, r, u, du, direction=d))
        self.node_count += 1
        mn = self.opts.max_nodes
        if mn is not None and self.node_count >= mn:
            self._set_stop(r, u, du, TerminalReason.NODE_LIMIT)
            return True
        return False

    def _on_extremum(self, r, u, du) -> bool:
        fu = self.f(u)
        kind = 0 if fu == 0.0 else (1 if fu > 0.0 else -1)  # +1 max, -1 min
        self._record(Event(EventKind.EXTREMUM, r, u, du,
                           direction=kind, height=u))
        if abs(u) <= self.opts.event_tol:
            self._record(Event(EventKind.NEAR_DOUBLE_ZERO, r, u, du))
            self._set_stop(r, u, du, TerminalReason.DOUBLE_ZERO)
            return True
        # a min above zero or a max below zero can be energy-trapped
        if (kind == -1 and u > 0.0) or (kind == 1 and u < 0.0):
            m = abs(u)
            barrier = self.lsc.barrier_below(m)
            Fm = float(self.spec.F(m))
            if Fm < barrier - self.trap_margin:
                ek = (EventKind.POSITIVE_MIN_BELOW_BETA if barrier == 0.0
                      else EventKind.BAND_TRAP)
                self._record(Event(
                    ek, r, u, du, direction=kind, height=u,
                    note=f"F={Fm:.6g} barrier={barrier:.6g}"))
                if not self.opts.continue_past_trap:
                    self._set_stop(r, u, du, TerminalReason.TRAPPED)
                    return True
        return False

    # -- chunk driver ---------------------------------------------------------

    def _chunk_event_fns(self, u0: float):
        """Terminal kink/blowup events plus the non-terminal monitors."""
        i_up = bisect_right(self.kinks, u0)
        i_dn = bisect_left(self.kinks, u0) - 1
        lev_up = self.kinks[i_up] if i_up < len(self.kinks) else None
        lev_dn = self.kinks[i_dn] if i_dn >= 0 else None

        tagged = []
        if lev_up is not None:
            tagged.append(("kink", lev_up, _make_event(
                lambda r, y, s=lev_up: y[0] - s, terminal=True, direction=1)))
        if lev_dn is not None:
            tagged.append(("kink", lev_dn, _make_event(
                lambda r, y, s=lev_dn: y[0] - s, terminal=True, direction=-1)))
        tagged.append(("blow", None, _make_event(
            lambda r, y: self.blow_cap - abs(y[0]), terminal=True,
            direction=-1)))
        tagged.append(("zero", None, _make_event(lambda r, y: y[0])))
        tagged.append(("extremum", None, _make_event(lambda r, y: y[1])))
        lo = lev_dn if lev_dn is not None else -math.inf
        hi = lev_up if lev_up is not None else math.inf
        for lev in self.monitors:
            if lo < lev < hi:
                tagged.append(("height", lev, _make_event(
                    lambda r, y, s=lev: y[0] - s)))
        return tagged

    def _nudge(self, r, u, du, lev) -> tuple[float, float, float]:
        """Micro Taylor step past a kink so the next chunk starts clear.

        When the crossing is so shallow that the quadratic term would
        fold u back to the original side within the linear nudge, the dip
        is below tolerance; jump past it and stay on the original side.
        """
        acc = -(self.n_dim - 1.0) / r * du - self.f(u)
        dr = 1e-9 * max(1.0, r)
        if acc != 0.0:
            dr_turn = abs(du) / abs(acc)
            if dr >= 0.5 * dr_turn:
                dr = 2.2 * dr_turn
        for _ in range(6):
            u_n = u + du * dr + 0.5 * acc * dr * dr
            du_n = du + acc * dr
            if abs(u_n - lev) > 4e-16 * max(1.0, abs(lev)):
                return r + dr, u_n, du_n
            dr *= 10.0
        raise StepSizeUnderflow(
            f"cannot clear the kink at u = {lev:.17g}, r = {r:.17g}")

    def run(self) -> Trajectory:
        opts = self.opts
        h0, u0, v0, a2, a4 = _start_state(self.problem, self.f)
        head = _Quartic(self.alpha, a2, a4)
        self.seg_lo.append(0.0)
        self.seg_fn.append(head)

        if a2 == 0.0 and a4 == 0.0:
            return self._constant_trajectory()

        r0, y = h0, (u0, v0)
        reason = None
        for _ in range(MAX_CHUNKS):
            tagged = self._chunk_event_fns(y[0])
            sol = solve_ivp(self.rhs, (r0, opts.r_max), y, method="RK45",
                            rtol=opts.rel_tol, atol=opts.abs_tol,
                            max_step=opts.max_step, dense_output=True,
                            events=[fn for _, _, fn in tagged])
            if sol.status == -1:
                raise StepSizeUnderflow(sol.message)
            self.r_parts.append(sol.t)
            self.y_parts.append(sol.y)
            self.seg_lo.append(r0)
            self.seg_fn.append(sol.sol)

            hits = []
            tiny = 1e-14 * max(1.0, r0)
            for (tag, lev, _), times in zip(tagged, sol.t_events):
                hits.extend((t, tag, lev) for t in times if t > r0 + tiny)
            hits.sort(key=lambda h: h[0])

            restart = None
            for t, tag, lev in hits:
                ys = sol.sol(t)
                ut, vt = float(ys[0]), float(ys[1])
                if tag == "zero":
                    if self._on_zero(t, ut, vt):
                        break
                elif tag == "extremum":
                    if self._on_extremum(t, ut, vt):
                        break
                elif tag == "height":
                    self._record(Event(EventKind.HEIGHT_CROSSING, t, ut, vt,
                                       direction=1 if vt > 0 else -1,
                                       height=lev))
                elif tag == "blow":
                    self._record(Event(EventKind.HEIGHT_CROSSING, t, ut, vt,
                                       direction=1 if vt > 0 else -1,
                                       height=math.copysign(self.blow_cap, ut)))
                    self._set_stop(t, ut, vt, TerminalReason.BLOWUP)
                    break
                else:  # kink; the zero monitor records the u = 0 seam
                    if lev != 0.0:
                        self._record(Event(EventKind.HEIGHT_CROSSING, t, ut,
                                           vt, direction=1 if vt > 0 else -1,
                                           height=lev))
                    restart = self._nudge(t, ut, vt, lev)

            if self.stop is not None:
                reason = self.stop[3]
                break
            if sol.status == 0:
                reason = TerminalReason.REACHED_RMAX
                break
            if restart is None:
                # terminal event fired but its hit fell inside the start
                # guard band; treat as stalled rather than looping
                raise StepSizeUnderflow(
                    f"no progress past r = {r0:.17g}")
            r0, u_n, v_n = restart
            y = (u_n, v_n)
            if r0 >= opts.r_max:
                reason = TerminalReason.REACHED_RMAX
                break
        else:
            raise StepSizeUnderflow(
                f"more than {MAX_CHUNKS} kink restarts; pieces too sharp")

        return self._assemble(reason)

    # -- assembly -------------------------------------------------------------

    def _constant_trajectory(self) -> Trajectory:
        opts = self.opts
        r = np.linspace(opts.h0, opts.r_max, 17)
        u = np.full_like(r, self.alpha)
        du = np.zeros_like(r)
        return Trajectory(
            problem=self.problem, r=r, u=u, du=du, events=(),
            reason=TerminalReason.CONVERGED_TO_EQUILIBRIUM,
            r_end=opts.r_max, equilibrium=self.alpha,
            _seg_lo=np.array([0.0]),
            _seg_fn=(_Quartic(self.alpha, 0.0, 0.0),))

    def _tail_equilibrium(self, r, u, du) -> float | None:
        """Certify monotone convergence to a zero of f at the horizon."""
        opts = self.opts
        m = max(8, len(r) // 5)
        if len(r) < m:
            return None
        ut, dut = u[-m:], du[-m:]
        moving = np.abs(dut) > opts.event_tol
        sgn = np.sign(dut[moving])
        if sgn.size and np.any(sgn != sgn[0]):
            return None
        I_end = 0.5 * du[-1] ** 2 + float(self.spec.F(u[-1]))
        I_0 = float(self.spec.F(self.alpha))
        cands = sorted({math.copysign(e, u[-1]) if e else 0.0
                        for e in self.lsc.equilibria},
                       key=lambda e: abs(u[-1] - e))
        for e in cands:
            d = np.abs(ut - e)
            slack = 10.0 * (opts.abs_tol + opts.rel_tol * max(1.0, abs(e)))
            if np.any(np.diff(d) > slack) or d[-1] > d[0] + slack:
                continue
            gap = I_end - float(self.spec.F(e))
            thresh = max(100.0 * opts.abs_tol,
                         1e-7 * abs(I_0 - float(self.spec.F(e))))
            if gap <= thresh:
                return e
        return None

    def _assemble(self, reason: TerminalReason) -> Trajectory:
        r = np.concatenate(self.r_parts)
        y = np.concatenate(self.y_parts, axis=1)
        u, du = y[0], y[1]
        if self.stop is not None:
            r_end, u_end, du_end, _ = self.stop
            keep = r < r_end * (1.0 - 1e-15)
            r = np.append(r[keep], r_end)
            u = np.append(u[keep], u_end)
            du = np.append(du[keep], du_end)
        else:
            r_end = float(r[-1])
        # defensive: strictly increasing samples
        keep = np.empty(len(r), dtype=bool)
        keep[0] = True
        keep[1:] = np.diff(r) > 0.0
        r, u, du = r[keep], u[keep], du[keep]

        if reason is TerminalReason.REACHED_RMAX:
            e = self._tail_equilibrium(r, u, du)
            if e is not None:
                reason = TerminalReason.CONVERGED_TO_EQUILIBRIUM
                self.equilibrium = e

        return Trajectory(
            problem=self.problem, r=r, u=u, du=du,
            events=tuple(self.events), reason=reason, r_end=float(r_end),
            equilibrium=self.equilibrium,
            _seg_lo=np.array(self.seg_lo), _seg_fn=tuple(self.seg_fn))


def integrate(problem: IVProblem) -> Trajectory:
    """Advance the shooting problem until a terminal certificate fires.

    Terminal reasons: the horizon r_max (possibly upgraded to equilibrium
    convergence by the tail test), an energy trap at an extremum, a
    near-double zero, the node budget, or escape past the working domain
    cap. Trajectories for alpha < 0 are exact mirrors of their positive
    counterparts.
    """
    if problem.alpha < 0.0:
        pos = replace(problem, alpha=-problem.alpha)
        return _mirror(integrate(pos), problem)
    return _Shooter(problem).run()


def _mirror(traj: Trajectory, problem: IVProblem) -> Trajectory:
    return Trajectory(
        problem=problem, r=traj.r, u=-traj.u, du=-traj.du,
        events=tuple(e.mirrored() for e in traj.events),
        reason=traj.reason, r_end=traj.r_end,
        equilibrium=None if traj.equilibrium is None else -traj.equilibrium,
        _seg_lo=traj._seg_lo,
        _seg_fn=tuple(_Negate(fn) for fn in traj._seg_fn))

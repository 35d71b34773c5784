"""Static analysis of the potential landscape F(s) = int_0^s f.

Everything the shooting machinery needs to reason about confinement is a
feature of F on the positive half-axis: where f turns positive (b), where
F recovers to zero (beta), the ladder of record-setting local maxima of F
(gamma_seq) and the height beta_star where F last revisits the top rung
before the domain end. Features are isolated by sign-change bracketing on
a dense grid and polished with Brent's method to ~1e-12 relative accuracy;
none of this is symbolic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import AmbiguousZero, NoBeta
from .nonlinearity import NonlinearitySpec

#: Working cap for an unbounded domain, as a multiple of beta.
CAP_FACTOR = 1e3

#: Total grid budget for one feature scan.
GRID_BUDGET = 1 << 21

#: refined |f| below this times the local shoulder flags an unisolated zero.
TOUCH_RTOL = 1e-6


@dataclass(frozen=True)
class Landscape:
    """Feature summary of one nonlinearity on [0, cap].

    Attributes
    ----------
    b : first height after which f > 0 (0.0 when f has no initial well).
    beta : first positive zero of F (0.0 when F has no initial well).
    delta : largest grid-certified height with F < 0 on (0, delta);
        diagnostic only, converges to beta from below.
    zeros_of_f : sign-changing zeros of f in (delta, cap), ascending.
    maxima / minima : (height, F) pairs at interior critical points of F.
    gamma_seq : record-setting maxima heights: gamma_1 is the first local
        max with F > 0, each later entry the first with a larger F value.
    gamma_F : F at gamma_seq.
    beta_companions : for gamma_i, the last height below gamma_i where F
        equals the previous record (zero for i = 1); entry i pairs with
        gamma_seq[i].
    beta_star : last height in (gamma_seq[-1], cap) where F returns to
        F(gamma_seq[-1]); None when gamma_seq is empty or F never returns.
    cap : scan horizon (domain_top when finite).
    cap_touched : True when the horizon truncated an unbounded domain.
    """

    spec: NonlinearitySpec
    b: float
    beta: float
    delta: float
    zeros_of_f: tuple[float, ...]
    maxima: tuple[tuple[float, float], ...]
    minima: tuple[tuple[float, float], ...]
    gamma_seq: tuple[float, ...]
    gamma_F: tuple[float, ...]
    beta_companions: tuple[float, ...]
    beta_star: float | None
    cap: float
    cap_touched: bool

    # -- derived queries ----------------------------------------------------

    @property
    def domain_top(self) -> float:
        return self.spec.domain_top

    @property
    def equilibria(self) -> tuple[float, ...]:
        """All nonnegative heights where f vanishes, 0 and b included."""
        pts = {0.0}
        if self.b > 0.0:
            pts.add(self.b)
        pts.update(self.zeros_of_f)
        return tuple(sorted(pts))

    def _crit_in(self, lo: float, hi: float) -> list[float]:
        pts = [x for x, _ in self.maxima if lo < x < hi]
        pts += [x for x, _ in self.minima if lo < x < hi]
        if lo < self.b < hi:
            pts.append(self.b)
        return pts

    def F_min_on(self, interval: tuple[float, float]) -> float:
        """Exact minimum of F over a closed height interval in [0, cap]."""
        lo, hi = interval
        pts = self._crit_in(lo, hi) + [lo, hi]
        return float(np.min(self.spec.F(np.array(pts))))

    def F_max_on(self, interval: tuple[float, float]) -> float:
        lo, hi = interval
        pts = self._crit_in(lo, hi) + [lo, hi]
        return float(np.max(self.spec.F(np.array(pts))))

    def barrier_below(self, m: float) -> float:
        """sup of F over heights strictly below m, including F(0) = 0.

        An orbit resting at height m with F(m) below this value can never
        reach zero again: the energy I is nonincreasing and passing any
        height h costs I >= F(h).
        """
        vals = [0.0] + [Fv for x, Fv in self.maxima if x < m]
        return max(vals)

    def band_edges(self, m: float) -> tuple[float, float]:
        """Confinement band (gamma_i, gamma_{i+1}) that contains height m.

        Below the first rung the band is (0, gamma_1); above the last rung
        it is (gamma_M, cap). With no rungs at all, (0, cap).
        """
        lo, hi = 0.0, self.cap
        for g in self.gamma_seq:
            if g < m:
                lo = g
            else:
                hi = g
                break
        return lo, hi

    def f_abs_max_on(self, interval: tuple[float, float]) -> float:
        lo, hi = interval
        hi = min(hi, self.cap)
        grid = np.linspace(lo, hi, 4097)
        joints = [x for x in self.spec.breakpoints if lo <= x <= hi]
        if joints:
            grid = np.concatenate([grid, joints])
        return float(np.max(np.abs(self.spec.f(grid))))


# ---------------------------------------------------------------------------
# scanning helpers
# ---------------------------------------------------------------------------

def _piece_grid(spec: NonlinearitySpec, lo: float, hi: float,
                budget: int = GRID_BUDGET) -> np.ndarray:
    """Piece-aligned scan grid on [lo, hi] with roughly uniform density."""
    cuts = [lo] + [x for x in spec.breakpoints if lo < x < hi] + [hi]
    span = hi - lo
    parts = []
    for a, b in zip(cuts, cuts[1:]):
        n = max(64, int(budget * (b - a) / span))
        parts.append(np.linspace(a, b, n, endpoint=False))
    parts.append(np.array([hi]))
    return np.concatenate(parts)


def _sign_change_roots(spec: NonlinearitySpec, grid: np.ndarray,
                       vals: np.ndarray) -> list[tuple[float, int]]:
    """(root, direction) for every sign change of `vals` along `grid`.

    direction is +1 for a -/+ crossing and -1 for +/-. Runs of near-zero
    values that never commit to a sign raise AmbiguousZero.
    """
    absv = np.abs(vals)
    # interior dips of |f| that approach zero without a sign change nearby
    # signal a (numerically) non-transversal zero; a transversal one seen on
    # this grid bottoms out around spacing/window ~ 3% of its shoulder
    dip = np.nonzero((absv[1:-1] <= absv[:-2]) & (absv[1:-1] <= absv[2:]))[0] + 1
    for i in dip:
        lo, hi = max(0, i - 32), min(len(vals), i + 33)
        shoulder = float(np.max(absv[lo:hi]))
        if shoulder <= 0.0 or absv[i] > 1e-3 * shoulder:
            continue
        if np.all(vals[lo:hi] >= 0.0) or np.all(vals[lo:hi] <= 0.0):
            fine = np.linspace(grid[lo], grid[hi - 1], 2001)
            fv = spec.f(fine)
            if (np.all(fv >= 0.0) or np.all(fv <= 0.0)) and \
                    float(np.min(np.abs(fv))) < TOUCH_RTOL * shoulder:
                raise AmbiguousZero(
                    f"f touches zero near s={grid[i]:.6g} without changing "
                    "sign; zeros there cannot be isolated")
    sgn = np.sign(vals)
    nz = sgn != 0
    out = []
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    for i in idx:
        root = brentq(lambda x: float(spec.f(x)), grid[i], grid[i + 1],
                      xtol=1e-300, rtol=4 * np.finfo(float).eps)
        out.append((float(root), 1 if sgn[i] < 0 else -1))
    # exact zeros sitting on grid nodes (rare, e.g. constructed joints)
    for i in np.nonzero(~nz)[0]:
        if 0 < i < len(grid) - 1 and sgn[i - 1] * sgn[i + 1] < 0:
            out.append((float(grid[i]), 1 if sgn[i - 1] < 0 else -1))
    out.sort()
    return out


def _last_level_crossing(spec: NonlinearitySpec, level: float,
                         lo: float, hi: float) -> float | None:
    """Largest height in (lo, hi) where F equals `level`, or None."""
    grid = _piece_grid(spec, lo, hi, budget=1 << 16)
    g = spec.F(grid) - level
    sgn = np.sign(g)
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    if len(idx) == 0:
        return None
    i = idx[-1]
    return float(brentq(lambda x: float(spec.F(x)) - level,
                        grid[i], grid[i + 1],
                        xtol=1e-300, rtol=4 * np.finfo(float).eps))


def analyze_landscape(spec: NonlinearitySpec, *,
                      domain_cap: float | None = None) -> Landscape:
    """Extract the confinement features of F; see Landscape for the fields.

    Raises
    ------
    NoBeta
        If F dips below zero near the origin and never recovers within the
        scan horizon (grown geometrically up to ~1e6 for unbounded domains).
    AmbiguousZero
        If a zero of f cannot be isolated at the grid resolution.
    """
    top = spec.domain_top

    # initial well: probe whether f < 0 right after 0
    probe = np.geomspace(1e-12, min(1.0, top if math.isfinite(top) else 1.0), 64)
    fp = spec.f(probe)
    has_well = bool(fp[0] < 0.0) or bool(np.any(fp < 0.0) and fp[np.nonzero(fp)[0][0]] < 0.0)

    if not has_well:
        b = beta = delta = 0.0
    else:
        # find b, then beta, growing the window until F recovers
        window = min(4.0, top) if math.isfinite(top) else 4.0
        b = None
        while True:
            grid = _piece_grid(spec, 0.0, window, budget=1 << 18)[1:]
            vals = spec.f(grid)
            pos = np.nonzero(vals > 0.0)[0]
            if len(pos) and b is None:
                i = pos[0]
                if i == 0:
                    b = float(grid[0])
                else:
                    b = float(brentq(lambda x: float(spec.f(x)),
                                     grid[i - 1], grid[i],
                                     xtol=1e-300, rtol=4 * np.finfo(float).eps))
            if b is not None:
                Fv = spec.F(grid)
                rec = np.nonzero((grid > b) & (Fv > 0.0))[0]
                if len(rec):
                    i = rec[0]
                    beta = float(brentq(lambda x: float(spec.F(x)),
                                        grid[i - 1], grid[i],
                                        xtol=1e-300, rtol=4 * np.finfo(float).eps))
                    delta = float(grid[max(0, i - 2)])
                    break
            if math.isfinite(top) and window >= top:
                raise NoBeta(
                    f"F never returns to zero on (0, {top:.6g})")
            if window > 1e6:
                raise NoBeta(
                    "F never returns to zero within the 1e6 scan horizon")
            window = min(window * 4.0, top)

    if domain_cap is not None:
        cap = float(domain_cap)
        cap_touched = math.isinf(top) or cap < top
    elif math.isfinite(top):
        cap, cap_touched = top, False
    else:
        cap = CAP_FACTOR * max(beta, 1.0)
        cap_touched = True

    # sign-changing zeros of f and the resulting critical points of F
    grid = _piece_grid(spec, 0.0, cap)[1:]
    crossings = _sign_change_roots(spec, grid, spec.f(grid))
    # drop a crossing that is just the finite endpoint zero f(top) = 0;
    # root polishing on float polynomial forms lands such a zero up to a
    # few hundred ulp inside the endpoint, so the guard is generous
    eps_top = 4096 * np.finfo(float).eps * max(1.0, cap)
    crossings = [(x, d) for x, d in crossings if x < cap - eps_top]

    maxima = tuple((x, float(spec.F(x))) for x, d in crossings if d < 0)
    minima = tuple((x, float(spec.F(x))) for x, d in crossings if d > 0)

    gamma_seq: list[float] = []
    gamma_F: list[float] = []
    companions: list[float] = []
    record = 0.0
    prev_top = 0.0
    for x, Fv in maxima:
        if Fv > record:
            comp = _last_level_crossing(spec, record, prev_top, x)
            gamma_seq.append(x)
            gamma_F.append(Fv)
            companions.append(comp if comp is not None else prev_top)
            record = Fv
            prev_top = x

    beta_star = None
    if gamma_seq:
        beta_star = _last_level_crossing(spec, gamma_F[-1], gamma_seq[-1], cap)

    return Landscape(
        spec=spec, b=b, beta=beta, delta=delta,
        zeros_of_f=tuple(x for x, _ in crossings if x > delta),
        maxima=maxima, minima=minima,
        gamma_seq=tuple(gamma_seq), gamma_F=tuple(gamma_F),
        beta_companions=tuple(companions), beta_star=beta_star,
        cap=cap, cap_touched=cap_touched)


@lru_cache(maxsize=128)
def cached_landscape(spec: NonlinearitySpec) -> Landscape:
    """Default-parameter analyze_landscape, memoized per spec."""
    return analyze_landscape(spec)

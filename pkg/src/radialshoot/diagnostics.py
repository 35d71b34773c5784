"""Functionals and thresholds evaluated along trajectories and landscapes.

Everything here is read-only over a terminated trajectory: the energy
I(r) = u'^2/2 + F(u) and its monotonicity defect, the weighted integral
identity residual (the solver-error proxy), the guaranteed-sign-change
radius C(s0) with its per-crossing verdicts, the inverse-radius
functional P(s) on monotone segments, and the k-dependent nonexistence
inequality read off the F-landscape.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (FVanishes, InvalidHeight, LandscapeIncomplete,
                     NotMonotone)
from .integrator import EventKind, TerminalReason, Trajectory
from .landscape import Landscape
from .nonlinearity import NonlinearitySpec


def energy_series(trajectory: Trajectory,
                  spec: NonlinearitySpec | None = None) -> np.ndarray:
    """(r, I) rows at every stored sample; I = u'^2/2 + F(u)."""
    spec = spec if spec is not None else trajectory.problem.spec
    I = 0.5 * trajectory.du ** 2 + np.asarray(spec.F(trajectory.u))
    return np.column_stack([trajectory.r, I])


def max_energy_increase(trajectory: Trajectory,
                        spec: NonlinearitySpec | None = None) -> float:
    """Largest per-step increase of I; nonpositive for a sound run."""
    I = energy_series(trajectory, spec)[:, 1]
    return float(np.max(np.diff(I))) if len(I) > 1 else 0.0


def pohozaev_residual(trajectory: Trajectory,
                      spec: NonlinearitySpec | None = None,
                      n_dim: int | None = None) -> float:
    """Relative defect of the weighted boundary identity at r_end.

    The boundary term r^N u'^2 + (N-2) r^(N-1) u' u + 2 r^N F(u) must
    equal the integral of t^(N-1) Q(u(t)) from 0. The head below the
    first sample is integrated analytically from the start series
    (Q(u) ~ Q(alpha) + Q'(alpha) a2 t^2 there); the rest by composite
    Simpson on the dense output, four panels per accepted step so the
    quadrature error stays below the interpolant's and the residual
    tracks the solver tolerance.
    """
    prob = trajectory.problem
    spec = spec if spec is not None else prob.spec
    n = n_dim if n_dim is not None else prob.n_dim

    r_end = trajectory.r_end
    u_e, du_e = trajectory.sample_at(r_end)
    lhs = (r_end ** n * du_e ** 2
           + (n - 2.0) * r_end ** (n - 1.0) * du_e * u_e
           + 2.0 * r_end ** n * float(spec.F(u_e)))

    alpha = prob.alpha
    h = float(trajectory.r[0])
    a2 = -float(spec.f(alpha)) / (2.0 * n)
    head = (float(spec.Q(n, alpha)) * h ** n / n
            + float(spec.Q_prime(n, alpha)) * a2 * h ** (n + 2.0) / (n + 2.0))

    rs = trajectory.r[trajectory.r <= r_end]
    if rs[-1] != r_end:
        rs = np.append(rs, r_end)
    widths = np.diff(rs)
    # 9 nodes per step = 4 Simpson panels; steps stay panel-aligned so
    # kink radii (chunk ends) never fall inside a panel
    offs = np.arange(9.0) / 8.0
    grid = rs[:-1, None] + widths[:, None] * offs[None, :]
    u_g, _ = trajectory.dense_eval(grid.ravel())
    g = (grid.ravel() ** (n - 1.0)
         * np.asarray(spec.Q(n, u_g))).reshape(grid.shape)
    w_simp = np.array([1.0, 4.0, 2.0, 4.0, 2.0, 4.0, 2.0, 4.0, 1.0]) / 24.0
    body = float(np.sum(widths * (g @ w_simp)))

    return abs(lhs - (head + body)) / (1.0 + abs(lhs))


# ---------------------------------------------------------------------------
# guaranteed sign change
# ---------------------------------------------------------------------------

def gst_radius(spec: NonlinearitySpec, landscape: Landscape, n_dim: int,
               s0: float) -> float:
    """Radius beyond which reaching height s0 while falling forces a node.

    C(s0) = sqrt(2) (N-1) (s0 / F(s0)) sqrt(F(s0) - min F on (0, beta)).
    Only meaningful where F(s0) > 0, i.e. above beta and outside any
    later negative dip of F.
    """
    beta = landscape.beta
    if s0 <= beta:
        raise InvalidHeight(f"s0 = {s0:.17g} is not above beta = {beta:.17g}")
    F0 = float(spec.F(s0))
    if F0 <= 0.0:
        raise InvalidHeight(f"F({s0:.17g}) = {F0:.3g} is not positive")
    Fmin = landscape.F_min_on((0.0, beta)) if beta > 0.0 else 0.0
    return math.sqrt(2.0) * (n_dim - 1.0) * (s0 / F0) * math.sqrt(F0 - Fmin)


class GstCheck(NamedTuple):
    """One monitored falling crossing against the C(s0) threshold.

    confirmed is True when a later zero crossing exists, False when the
    trajectory is certified to never cross again (a genuine violation),
    and None when the lemma makes no claim (r0 < C) or the run ended at
    the horizon undecided.
    """

    s0: float
    r0: float
    c: float
    confirmed: bool | None
    note: str = ""


def gst_sign_change_check(trajectory: Trajectory,
                          spec: NonlinearitySpec | None = None,
                          landscape: Landscape | None = None,
                          n_dim: int | None = None) -> list[GstCheck]:
    """Audit every monitored falling height crossing above beta."""
    from .integrator import landscape_for

    prob = trajectory.problem
    spec = spec if spec is not None else prob.spec
    n = n_dim if n_dim is not None else prob.n_dim
    lsc = landscape if landscape is not None else landscape_for(
        spec, prob.alpha)

    zero_rs = [e.r for e in trajectory.events
               if e.kind is EventKind.ZERO_CROSSING]
    settled = trajectory.reason in (TerminalReason.TRAPPED,
                                    TerminalReason.CONVERGED_TO_EQUILIBRIUM)
    out: list[GstCheck] = []
    for e in trajectory.events_of(EventKind.HEIGHT_CROSSING):
        if e.height is None:
            continue
        m = abs(e.height)
        # falling toward zero: |u| shrinking through the level
        if m <= lsc.beta or e.du * math.copysign(1.0, e.height) >= 0.0:
            continue
        if float(spec.F(m)) <= 0.0:
            continue
        c = gst_radius(spec, lsc, n, m)
        if e.r < c:
            out.append(GstCheck(m, e.r, c, None, "below threshold"))
            continue
        if any(zr > e.r for zr in zero_rs):
            out.append(GstCheck(m, e.r, c, True))
        elif settled:
            out.append(GstCheck(m, e.r, c, False, "no node ever follows"))
        else:
            out.append(GstCheck(m, e.r, c, None, "undecided at horizon"))
    return out


# ---------------------------------------------------------------------------
# inverse-radius functional on monotone segments
# ---------------------------------------------------------------------------

def erbe_tang_P(trajectory: Trajectory, spec: NonlinearitySpec | None,
                n_dim: int | None, segment: tuple[float, float],
                n_points: int = 257) -> np.ndarray:
    """(s, P) rows of the inverse-radius functional along a segment.

    With r(s) the inverse of u on a strictly monotone radius window and
    r' = dr/ds = 1/u', P(s) = -2N (F/f)(s) r^(N-1)/r' - r^N/r'^2
    - 2 r^N F(s). Raises NotMonotone or FVanishes when the segment
    violates the preconditions.
    """
    prob = trajectory.problem
    spec = spec if spec is not None else prob.spec
    n = n_dim if n_dim is not None else prob.n_dim
    r_lo, r_hi = segment
    if not 0.0 <= r_lo < r_hi <= trajectory.r_end:
        raise NotMonotone(
            f"segment [{r_lo:.6g}, {r_hi:.6g}] not inside the trajectory")
    rs = np.linspace(r_lo, r_hi, n_points)
    u, du = trajectory.dense_eval(rs)
    if np.any(du == 0.0) or np.any(np.sign(du) != np.sign(du[0])):
        raise NotMonotone("u' changes sign inside the segment")
    fu = np.asarray(spec.f(u))
    if np.any(fu == 0.0) or np.any(np.sign(fu) != np.sign(fu[0])):
        raise FVanishes("f(u) vanishes inside the segment")
    Fu = np.asarray(spec.F(u))
    P = (-2.0 * n * (Fu / fu) * rs ** (n - 1.0) * du
         - rs ** n * du ** 2
         - 2.0 * rs ** n * Fu)
    return np.column_stack([u, P])


# ---------------------------------------------------------------------------
# nonexistence inequality
# ---------------------------------------------------------------------------

def nonexistence_bound(spec: NonlinearitySpec, landscape: Landscape,
                       n_dim: int, k: int, F_gamma_star: float) -> bool:
    """True when the landscape certifies no j-bound states, j <= k,
    with initial height in (beta_star, gamma_star).

    The test is -min F on [0, beta_star] <
    (beta_star - gamma_1) / (2 (N-1) (k+1)) * F(gamma_1) / (2 gamma_1)
    - F_gamma_star, with F_gamma_star supplied by the caller (sup of F
    over the relevant initial window when the domain is unbounded).
    """
    if not landscape.gamma_seq or landscape.beta_star is None:
        raise LandscapeIncomplete(
            "need at least one record maximum and a beta_star level")
    g1 = landscape.gamma_seq[0]
    F_g1 = landscape.gamma_F[0]
    b_star = landscape.beta_star
    lhs = -landscape.F_min_on((0.0, b_star))
    rhs = ((b_star - g1) / (2.0 * (n_dim - 1.0) * (k + 1.0))
           * F_g1 / (2.0 * g1) - F_gamma_star)
    return bool(lhs < rhs)


# ---------------------------------------------------------------------------
# solution-quality report
# ---------------------------------------------------------------------------

def ode_residual(trajectory: Trajectory, n_points: int = 129) -> float:
    """Max normalized defect of the interpolated solution in the ODE.

    u'' is recovered by central differences of the dense u' and plugged
    back into u'' + (N-1)/r u' + f(u); the defect is normalized by the
    local scale max(1, |f(u)|).
    """
    prob = trajectory.problem
    n = prob.n_dim
    r0, r1 = trajectory.r[0], trajectory.r_end
    rs = np.linspace(r0 + (r1 - r0) * 1e-3, r1 - (r1 - r0) * 1e-3, n_points)
    h = (r1 - r0) * 1e-7
    u, du = trajectory.dense_eval(rs)
    _, du_p = trajectory.dense_eval(rs + h)
    _, du_m = trajectory.dense_eval(rs - h)
    upp = (du_p - du_m) / (2.0 * h)
    res = upp + (n - 1.0) / rs * du + np.asarray(prob.spec.f(u))
    return float(np.max(np.abs(res) / np.maximum(1.0, np.abs(
        np.asarray(prob.spec.f(u))))))


@dataclass
class DiagnosticsReport:
    """Bundle of the per-trajectory quality measures."""

    energy: np.ndarray
    max_energy_increase: float
    pohozaev_residual: float
    gst_radius_at: dict[float, float]
    gst_report: list[GstCheck]
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "max_energy_increase": self.max_energy_increase,
            "pohozaev_residual": self.pohozaev_residual,
            "gst_radius_at": {f"{s:.17g}": c
                              for s, c in self.gst_radius_at.items()},
            "gst_report": [e._asdict() for e in self.gst_report],
            "notes": self.notes,
        }

    def energy_to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("r,I\n")
            for r, I in self.energy:
                fh.write(f"{r:.17g},{I:.17g}\n")


def make_report(trajectory: Trajectory,
                landscape: Landscape | None = None) -> DiagnosticsReport:
    """Assemble the standard report for one trajectory."""
    from .integrator import landscape_for

    prob = trajectory.problem
    spec, n = prob.spec, prob.n_dim
    lsc = landscape if landscape is not None else landscape_for(
        spec, prob.alpha)
    notes: list[str] = []

    radii: dict[float, float] = {}
    for s0 in sorted(set(spec.breakpoints) | set(lsc.gamma_seq)):
        if s0 > lsc.beta and float(spec.F(s0)) > 0.0:
            radii[s0] = gst_radius(spec, lsc, n, s0)

    report = gst_sign_change_check(trajectory, spec, lsc, n)
    bad = [e for e in report if e.confirmed is False]
    if bad:
        notes.append(f"{len(bad)} guaranteed-sign-change violation(s)")

    return DiagnosticsReport(
        energy=energy_series(trajectory, spec),
        max_energy_increase=max_energy_increase(trajectory, spec),
        pohozaev_residual=pohozaev_residual(trajectory, spec, n),
        gst_radius_at=radii,
        gst_report=report,
        notes=notes,
    )

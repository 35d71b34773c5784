"""Shipped fixture nonlinearities for demos, the CLI, and the test corpus.

Everything here is buildable from the public constructors; the point of
shipping them is that their landscape features (well depths, record maxima,
re-crossing levels) are tuned to make specific behaviors observable at
double precision, which takes some care to get right.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .nonlinearity import (LinearBridge, NonlinearitySpec, Piece,
                           PolynomialExpr, build_jump_family,
                           power_minus_linear_spec, power_spec)

__all__ = [
    "BASE_GROUND_HEIGHT",
    "TWO_HUMP_NDIM",
    "STRETCHED_NDIM",
    "two_hump_spec",
    "stretched_two_hump_spec",
    "slow_entry_family",
    "slow_entry_shot_height",
]

# Bisected once at alpha_tol = 1e-9 for f(u) = u^2 - u at N = 4 and frozen;
# the demo constructions below only need it to a few digits.
BASE_GROUND_HEIGHT = 8.67193429952

# Intended dimension for the landscape fixtures below.
TWO_HUMP_NDIM = 3
STRETCHED_NDIM = 3


def _poly_from_roots(roots: Sequence[Fraction],
                     scale: Fraction) -> tuple[float, ...]:
    """Ascending coefficients of scale * prod (s - r), expanded exactly."""
    coeffs = [Fraction(1)]
    for r in roots:
        nxt = [Fraction(0)] * (len(coeffs) + 1)
        for k, c in enumerate(coeffs):
            nxt[k + 1] += c
            nxt[k] -= c * r
        coeffs = nxt
    return tuple(float(c * scale) for c in coeffs)


def two_hump_spec() -> NonlinearitySpec:
    """Polynomial with a well at the origin and two interior F-records.

    f(s) = (1/20) s (s-1/2)(s-11/5)(s-13/5)(s-21/5)(s-23/5)(s-6)^2 on
    [0, 6]. The potential F dips below zero until ~0.89, then posts record
    maxima at 2.2 and 4.2 and climbs to a strict global maximum at the
    endpoint 6, where f has a double zero.

    The double zero is deliberate: shots started just under the top linger
    near the (degenerate) equilibrium with only power-law sensitivity to
    the gap, so the family of trapped verdicts with increasing node count
    accumulates at initial heights that are still far apart at double
    precision. With a simple zero the same family collapses within a few
    hundred ulp of the top and is unobservable. Intended for n_dim = 3.
    """
    roots = [Fraction(0), Fraction(1, 2), Fraction(11, 5), Fraction(13, 5),
             Fraction(21, 5), Fraction(23, 5), Fraction(6), Fraction(6)]
    coeffs = _poly_from_roots(roots, Fraction(1, 20))
    return NonlinearitySpec((Piece(0.0, 6.0, PolynomialExpr(coeffs)),))


# (s, f(s)) knots of the stretched fixture; segments are linear between.
_STRETCHED_KNOTS: tuple[tuple[float, float], ...] = (
    (0.0, 0.0), (0.1, -0.5), (0.2, 0.0),        # shallow well, depth 1/20
    (0.4, 16.0), (0.6, 0.0),                    # first record: F(0.6) = 3.15
    (0.8, -0.3), (1.0, 0.0),                    # slight dip to F = 3.09
    (1.5, 0.01), (27.0, 0.01), (27.5, 0.0),     # long low-slope stretch
    (28.0, -0.2), (28.5, 0.0),                  # second record: F(27.5) = 3.35
    (29.0, 2.0), (29.75, 2.0), (30.0, 0.0),     # final rise to F(30) = 5.5
)


def stretched_two_hump_spec() -> NonlinearitySpec:
    """Piecewise-linear two-record landscape with a very long mid-stretch.

    The re-crossing level of the last record sits at 28.5 + sqrt(1/20),
    about 28.1 above the first record at 0.6, while the well depth is only
    1/20. That ratio is what the small-node nonexistence certificate
    trades on: at n_dim = 3 the certificate holds for k <= 2 and fails
    from k = 3 on, so scans for low node counts over the top window must
    come back empty. Intended for n_dim = 3.
    """
    pieces = tuple(
        Piece(s0, s1, LinearBridge(s0, f0, s1, f1))
        for (s0, f0), (s1, f1) in zip(_STRETCHED_KNOTS, _STRETCHED_KNOTS[1:]))
    return NonlinearitySpec(pieces)


def slow_entry_family(eps: float = 0.1,
                      amp_sq: float = 1e-3) -> NonlinearitySpec:
    """u^2 - u spliced onto a tiny-amplitude u^2 regime above the ground.

    With amp_sq small the restoring force above the bridge is weak, so a
    shot released just over the junction drifts down and falls through the
    base ground height far from the origin -- past the forced-crossing
    radius threshold, which a plain shot of the base nonlinearity never
    reaches. Intended for n_dim = 4.
    """
    junction = BASE_GROUND_HEIGHT + eps
    return build_jump_family(
        [power_minus_linear_spec(2.0), power_spec(2.0)],
        [junction], [eps], [amp_sq])


def slow_entry_shot_height(eps: float = 0.1) -> float:
    """Release height pairing with slow_entry_family: just over the bridge."""
    return BASE_GROUND_HEIGHT + 2.0 * eps + 0.5

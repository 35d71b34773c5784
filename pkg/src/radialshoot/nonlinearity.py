"""Piecewise nonlinearities f and their exact potentials F.

A nonlinearity is described on [0, domain_top) by a tuple of pieces, each
carrying a closed-form expression, and is extended to negative arguments as
an odd function: f(-s) = -f(s) exactly, so F(s) = int_0^s f is even. The
potential F is accumulated piece by piece from exact antiderivatives, never
by quadrature.

Heights are always in u-space ("s" in signatures); nothing here knows about
the radial variable.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import ContinuityGap, DomainExceeded, OrderingViolated

ArrayLike = Union[float, np.ndarray]

#: Relative mismatch allowed at piece joints before ContinuityGap is raised.
JOINT_RTOL = 1e-9


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Power:
    """f(s) = s**p on s >= 0 (odd extension |s|**(p-1) s overall)."""

    p: float

    def value(self, t: ArrayLike) -> ArrayLike:
        return t ** self.p

    def antideriv(self, t: ArrayLike) -> ArrayLike:
        return t ** (self.p + 1.0) / (self.p + 1.0)

    def deriv(self, t: ArrayLike) -> ArrayLike:
        return self.p * t ** (self.p - 1.0)

    def to_dict(self) -> dict:
        return {"kind": "power", "p": self.p}


@dataclass(frozen=True)
class PowerMinusLinear:
    """f(s) = s**p - s, the classic sign-changing model nonlinearity."""

    p: float

    def value(self, t: ArrayLike) -> ArrayLike:
        return t ** self.p - t

    def antideriv(self, t: ArrayLike) -> ArrayLike:
        return t ** (self.p + 1.0) / (self.p + 1.0) - 0.5 * t * t

    def deriv(self, t: ArrayLike) -> ArrayLike:
        return self.p * t ** (self.p - 1.0) - 1.0

    def to_dict(self) -> dict:
        return {"kind": "power_minus_linear", "p": self.p}


@dataclass(frozen=True)
class LinearBridge:
    """Straight segment joining (s_lo, f_lo) to (s_hi, f_hi).

    Used to splice two amplitude regimes together continuously; the piece
    that carries this form must have lo == s_lo and hi == s_hi.
    """

    s_lo: float
    f_lo: float
    s_hi: float
    f_hi: float

    @property
    def slope(self) -> float:
        return (self.f_hi - self.f_lo) / (self.s_hi - self.s_lo)

    def value(self, t: ArrayLike) -> ArrayLike:
        return self.f_lo + self.slope * (t - self.s_lo)

    def antideriv(self, t: ArrayLike) -> ArrayLike:
        d = t - self.s_lo
        return self.f_lo * d + 0.5 * self.slope * d * d

    def deriv(self, t: ArrayLike) -> ArrayLike:
        return self.slope + 0.0 * t

    def to_dict(self) -> dict:
        return {"kind": "linear_bridge", "s_lo": self.s_lo, "f_lo": self.f_lo,
                "s_hi": self.s_hi, "f_hi": self.f_hi}


@dataclass(frozen=True)
class Scaled:
    """f(s) = c2 * inner(s); c2 plays the role of a squared amplitude."""

    c2: float
    inner: "Form"

    def value(self, t: ArrayLike) -> ArrayLike:
        return self.c2 * self.inner.value(t)

    def antideriv(self, t: ArrayLike) -> ArrayLike:
        return self.c2 * self.inner.antideriv(t)

    def deriv(self, t: ArrayLike) -> ArrayLike:
        return self.c2 * self.inner.deriv(t)

    def to_dict(self) -> dict:
        return {"kind": "scaled", "c2": self.c2, "inner": self.inner.to_dict()}


@dataclass(frozen=True)
class PolynomialExpr:
    """f(s) = sum_k coeffs[k] * s**k with ascending coefficients."""

    coeffs: tuple[float, ...]

    def value(self, t: ArrayLike) -> ArrayLike:
        return np.polynomial.polynomial.polyval(t, self.coeffs)

    def antideriv(self, t: ArrayLike) -> ArrayLike:
        anti = [0.0] + [c / (k + 1.0) for k, c in enumerate(self.coeffs)]
        return np.polynomial.polynomial.polyval(t, anti)

    def deriv(self, t: ArrayLike) -> ArrayLike:
        der = [k * c for k, c in enumerate(self.coeffs)][1:] or [0.0]
        return np.polynomial.polynomial.polyval(t, der)

    def to_dict(self) -> dict:
        return {"kind": "polynomial", "coeffs": list(self.coeffs)}


Form = Union[Power, PowerMinusLinear, LinearBridge, Scaled, PolynomialExpr]

_FORM_KINDS = {
    "power": Power,
    "power_minus_linear": PowerMinusLinear,
    "linear_bridge": LinearBridge,
    "scaled": Scaled,
    "polynomial": PolynomialExpr,
}


def form_from_dict(d: dict) -> Form:
    kind = d.get("kind")
    if kind == "power":
        return Power(float(d["p"]))
    if kind == "power_minus_linear":
        return PowerMinusLinear(float(d["p"]))
    if kind == "linear_bridge":
        return LinearBridge(float(d["s_lo"]), float(d["f_lo"]),
                            float(d["s_hi"]), float(d["f_hi"]))
    if kind == "scaled":
        return Scaled(float(d["c2"]), form_from_dict(d["inner"]))
    if kind == "polynomial":
        return PolynomialExpr(tuple(float(c) for c in d["coeffs"]))
    raise ValueError(f"unknown form kind {kind!r}")


# ---------------------------------------------------------------------------
# pieces and the assembled spec
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    form: Form

    def to_dict(self) -> dict:
        return {"lo": self.lo,
                "hi": None if math.isinf(self.hi) else self.hi,
                "form": self.form.to_dict()}


@dataclass(frozen=True)
class NonlinearitySpec:
    """Odd piecewise nonlinearity on (-domain_top, domain_top).

    Pieces must tile [0, domain_top) contiguously starting at 0, agree at
    shared endpoints (relative mismatch below JOINT_RTOL), and satisfy
    f(0) = 0. The domain is treated as closed at a finite top so that
    boundary quantities like f(domain_top) and F(domain_top), which appear
    in the landscape bookkeeping, stay evaluable.
    """

    pieces: tuple[Piece, ...]

    _los: np.ndarray = field(init=False, repr=False, compare=False)
    _offsets: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("spec needs at least one piece")
        if self.pieces[0].lo != 0.0:
            raise ValueError("first piece must start at 0")
        for a, b in zip(self.pieces, self.pieces[1:]):
            if not (b.lo == a.hi and b.hi > b.lo):
                raise ValueError("pieces must tile [0, domain_top) contiguously")
        if not self.pieces[0].hi > 0.0:
            raise ValueError("pieces must have positive length")

        v0 = float(self.pieces[0].form.value(0.0))
        if v0 != 0.0:
            raise ValueError(f"f(0) must vanish, got {v0!r}")

        # joint continuity, exact for bridges and near-exact otherwise
        for a, b in zip(self.pieces, self.pieces[1:]):
            fa = float(a.form.value(a.hi))
            fb = float(b.form.value(b.lo))
            scale = max(1.0, abs(fa), abs(fb))
            if abs(fa - fb) > JOINT_RTOL * scale:
                raise ContinuityGap(
                    f"pieces disagree at s={a.hi:.17g}: {fa:.17g} vs {fb:.17g}")

        offsets = [0.0]
        for p in self.pieces[:-1]:
            lo_val = float(p.form.antideriv(p.lo))
            hi_val = float(p.form.antideriv(p.hi))
            offsets.append(offsets[-1] + (hi_val - lo_val))
        object.__setattr__(self, "_offsets", tuple(offsets))
        object.__setattr__(self, "_los",
                           np.array([p.lo for p in self.pieces]))

    # -- geometry ----------------------------------------------------------

    @property
    def domain_top(self) -> float:
        return self.pieces[-1].hi

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Interior joints where f may have a kink."""
        return tuple(p.hi for p in self.pieces[:-1])

    def _index(self, t: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self._los, t, side="right") - 1
        return np.clip(idx, 0, len(self.pieces) - 1)

    def _check_domain(self, t) -> None:
        top = self.domain_top
        if math.isinf(top):
            return
        if np.any(np.asarray(t) > top):
            raise DomainExceeded(
                f"|s| beyond domain top {top:.17g}")

    # -- evaluation --------------------------------------------------------

    def f(self, s: ArrayLike) -> ArrayLike:
        """Odd extension of the piecewise expression; exact at s = 0."""
        if np.isscalar(s) or getattr(s, "ndim", 1) == 0:
            s = float(s)
            t = abs(s)
            self._check_domain(t)
            if t == 0.0:
                return 0.0
            p = self.pieces[int(self._index(np.float64(t)))]
            v = float(p.form.value(t))
            return v if s > 0 else -v
        s = np.asarray(s, dtype=float)
        t = np.abs(s)
        self._check_domain(t)
        out = np.empty_like(t)
        idx = self._index(t)
        for i, p in enumerate(self.pieces):
            m = idx == i
            if m.any():
                out[m] = p.form.value(t[m])
        return np.sign(s) * out

    def f_prime(self, s: ArrayLike) -> ArrayLike:
        """Piecewise derivative of f; even by oddness of f.

        At interior joints the left-hand slope is reported; at s = 0 the
        right-hand slope.
        """
        scalar = np.isscalar(s) or getattr(s, "ndim", 1) == 0
        t = np.atleast_1d(np.abs(np.asarray(s, dtype=float)))
        self._check_domain(t)
        # nudge joints onto the lower piece so one-sided slopes are used
        idx = self._index(np.where(t > 0, np.nextafter(t, 0.0), t))
        out = np.empty_like(t)
        for i, p in enumerate(self.pieces):
            m = idx == i
            if m.any():
                out[m] = p.form.deriv(t[m])
        return float(out[0]) if scalar else out

    def F(self, s: ArrayLike) -> ArrayLike:
        """Exact potential F(s) = int_0^s f, an even function."""
        scalar = np.isscalar(s) or getattr(s, "ndim", 1) == 0
        t = np.atleast_1d(np.abs(np.asarray(s, dtype=float)))
        self._check_domain(t)
        idx = self._index(t)
        out = np.empty_like(t)
        for i, p in enumerate(self.pieces):
            m = idx == i
            if m.any():
                base = float(p.form.antideriv(p.lo))
                out[m] = self._offsets[i] + (p.form.antideriv(t[m]) - base)
        return float(out[0]) if scalar else out

    def Q(self, n_dim: int, s: ArrayLike) -> ArrayLike:
        """Pohozaev integrand weight Q(s) = 2N F(s) - (N-2) s f(s)."""
        return 2.0 * n_dim * self.F(s) - (n_dim - 2.0) * np.multiply(s, self.f(s))

    def Q_prime(self, n_dim: int, s: ArrayLike) -> ArrayLike:
        """dQ/ds = (N+2) f(s) - (N-2) s f'(s); used by the start correction."""
        return (n_dim + 2.0) * self.f(s) - (n_dim - 2.0) * np.multiply(s, self.f_prime(s))

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        top = self.domain_top
        return {"pieces": [p.to_dict() for p in self.pieces],
                "domain_top": None if math.isinf(top) else top}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @staticmethod
    def from_dict(d: dict) -> "NonlinearitySpec":
        raw = d["pieces"]
        if not raw:
            raise ValueError("spec needs at least one piece")
        top = d.get("domain_top")
        top = math.inf if top is None else float(top)
        pieces = []
        for i, pd in enumerate(raw):
            hi = pd.get("hi")
            if hi is None:
                hi = top if i == len(raw) - 1 else None
            if hi is None:
                raise ValueError("only the last piece may omit 'hi'")
            pieces.append(Piece(float(pd["lo"]), float(hi),
                                form_from_dict(pd["form"])))
        if not math.isinf(top) and pieces[-1].hi != top:
            raise ValueError("domain_top disagrees with last piece")
        return NonlinearitySpec(tuple(pieces))

    @staticmethod
    def from_json(text: str) -> "NonlinearitySpec":
        return NonlinearitySpec.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def single_form_spec(form: Form, domain_top: float = math.inf) -> NonlinearitySpec:
    return NonlinearitySpec((Piece(0.0, domain_top, form),))


def power_spec(p: float) -> NonlinearitySpec:
    return single_form_spec(Power(p))


def power_minus_linear_spec(p: float) -> NonlinearitySpec:
    return single_form_spec(PowerMinusLinear(p))


def polynomial_spec(coeffs: Sequence[float],
                    domain_top: float = math.inf) -> NonlinearitySpec:
    return single_form_spec(PolynomialExpr(tuple(float(c) for c in coeffs)),
                            domain_top)


def _scale_form(form: Form, c2: float) -> Form:
    if isinstance(form, Scaled):
        return Scaled(c2 * form.c2, form.inner)
    return Scaled(c2, form)


def scaled_spec(spec: NonlinearitySpec, c2: float) -> NonlinearitySpec:
    """Spec for c2 * f; nested amplitudes are collapsed."""
    if c2 <= 0.0:
        raise ValueError("amplitude must be positive")
    return NonlinearitySpec(tuple(
        Piece(p.lo, p.hi, _scale_form(p.form, c2)) for p in spec.pieces))


def _clip_pieces(spec: NonlinearitySpec, lo: float, hi: float) -> list[Piece]:
    """Pieces of `spec` restricted to [lo, hi]; endpoints must lie in-domain."""
    if hi > spec.domain_top:
        raise DomainExceeded(
            f"window [{lo:.17g}, {hi:.17g}] exceeds donor domain "
            f"top {spec.domain_top:.17g}")
    out = []
    for p in spec.pieces:
        a, b = max(p.lo, lo), min(p.hi, hi)
        if b > a:
            out.append(Piece(a, b, p.form))
    return out


# ---------------------------------------------------------------------------
# multi-jump construction
# ---------------------------------------------------------------------------

def build_jump_family(f_specs: Sequence[NonlinearitySpec],
                      alphas: Sequence[float],
                      epsilons: Sequence[float],
                      amps_sq: Sequence[float]) -> NonlinearitySpec:
    """Splice amplitude jumps onto a base nonlinearity.

    The result equals f_specs[0] on [0, alphas[0]], then for each junction i
    a linear bridge on [alphas[i], alphas[i] + epsilons[i]] joins continuously
    onto amps_sq[i] * f_specs[i+1], which runs up to the next junction (the
    last one up to its own domain top).

    Parameters
    ----------
    f_specs : donor nonlinearities, one more than the number of junctions.
    alphas : junction heights, strictly increasing with room for each bridge:
        alphas[i] + epsilons[i] < alphas[i+1].
    epsilons : bridge widths, all positive.
    amps_sq : squared amplitudes A**2 applied multiplicatively, all positive.

    Raises
    ------
    OrderingViolated
        If the junction ordering or bridge-room condition fails.
    ValueError
        If a donor is not strictly positive on its assigned range.
    """
    k = len(f_specs)
    if not (len(alphas) == len(epsilons) == len(amps_sq) == k - 1 and k >= 2):
        raise ValueError("need one donor spec more than junctions")
    alphas = [float(a) for a in alphas]
    epsilons = [float(e) for e in epsilons]
    amps_sq = [float(a) for a in amps_sq]
    if any(e <= 0 for e in epsilons):
        raise OrderingViolated("bridge widths must be positive")
    if any(a <= 0 for a in amps_sq):
        raise ValueError("amplitudes must be positive")
    for i in range(k - 2):
        if not alphas[i] + epsilons[i] < alphas[i + 1]:
            raise OrderingViolated(
                f"junction {i + 2} at {alphas[i + 1]:.17g} overlaps the "
                f"bridge ending at {alphas[i] + epsilons[i]:.17g}")

    pieces = _clip_pieces(f_specs[0], 0.0, alphas[0])
    left_val = float(f_specs[0].f(alphas[0]))
    for i in range(k - 1):
        lo, width = alphas[i], epsilons[i]
        hi = lo + width
        c2 = amps_sq[i]
        donor = f_specs[i + 1]
        upper = alphas[i + 1] if i + 1 < k - 1 else donor.domain_top
        right_val = c2 * float(donor.f(hi))
        # donor must be positive where it takes over (and so must the bridge)
        probe_hi = upper if math.isfinite(upper) else hi + max(10.0, 10 * width)
        probe = np.linspace(hi, probe_hi, 257)
        if left_val <= 0.0 or right_val <= 0.0 or np.min(donor.f(probe)) <= 0.0:
            raise ValueError(
                f"donor {i + 1} not strictly positive on "
                f"[{hi:.17g}, {probe_hi:.17g}]")
        pieces.append(Piece(lo, hi, LinearBridge(lo, left_val, hi, right_val)))
        for q in _clip_pieces(donor, hi, upper):
            pieces.append(Piece(q.lo, q.hi, _scale_form(q.form, c2)))
        if i + 1 < k - 1:
            left_val = c2 * float(donor.f(alphas[i + 1]))
    return NonlinearitySpec(tuple(pieces))

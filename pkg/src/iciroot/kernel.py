"""Pure rootfinding step formulas over (x, f(x), f'(x)) samples.

Everything here is a stateless function of one or two :class:`PointSample`
values, defined identically for real and complex scalars.  The production
step, :func:`ici_step`, is a residual-weighted average of two Newton steps
and a secant step; it equals the value of the inverse cubic Hermite
interpolant at height zero, so it is exact whenever the two samples are
drawn from the inverse of a cubic.  The iteration driver lives in
:mod:`iciroot.solve`.
"""

from __future__ import annotations

from dataclasses import dataclass


class DegenerateIntervalError(ValueError):
    """Two-point operation received samples with equal abscissae."""


class EqualResidualsError(ValueError):
    """Two-point operation received samples with equal residuals."""


class ZeroDerivativeError(ValueError):
    """A Newton-type sub-step requires a nonzero derivative."""


@dataclass(frozen=True)
class PointSample:
    """One function sample: abscissa, residual f(x), derivative f'(x)."""

    x: object
    y: object
    yp: object


def hermite_forward_eval(pa: PointSample, pb: PointSample, theta):
    """Cubic Hermite interpolant of f through two derivative-tagged samples.

    theta is the normalized abscissa (x - pa.x) / (pb.x - pa.x); the result
    interpolates pa.y, pb.y with slopes pa.yp, pb.yp at theta = 0, 1.
    """
    if pa.x == pb.x:
        raise DegenerateIntervalError("samples share the same abscissa")
    h = pb.x - pa.x
    omt = theta - 1
    return ((1 + 2 * theta) * omt * omt * pa.y
            + theta * omt * omt * h * pa.yp
            + theta * theta * (3 - 2 * theta) * pb.y
            + theta * theta * omt * h * pb.yp)


def hermite_inverse_eval(pa: PointSample, pb: PointSample, s):
    """Cubic interpolant of the inverse function x(y), evaluated at s.

    s is the normalized height (y - pa.y) / (pb.y - pa.y); the inverse data
    are the abscissae with slopes 1/pa.yp, 1/pb.yp at s = 0, 1.
    """
    if pa.y == pb.y:
        raise EqualResidualsError("equal residuals: inverse interpolant undefined")
    if pa.yp == 0 or pb.yp == 0:
        raise ZeroDerivativeError("zero derivative: inverse slope undefined")
    delta = pb.y - pa.y
    oms = 1 - s
    return (((1 + 2 * s) * pa.x + s * delta / pa.yp) * oms * oms
            + ((3 - 2 * s) * pb.x - oms * delta / pb.yp) * s * s)


def newton_step(p: PointSample):
    """x - y/y'."""
    if p.yp == 0:
        raise ZeroDerivativeError("zero derivative in Newton step")
    return p.x - p.y / p.yp


def secant_step(p_prev: PointSample, p_cur: PointSample):
    """Root of the line through the two samples; symmetric in its arguments."""
    if p_prev.y == p_cur.y:
        raise EqualResidualsError("equal residuals in secant step")
    return p_cur.x - p_cur.y * (p_cur.x - p_prev.x) / (p_cur.y - p_prev.y)


def _weights(p_prev: PointSample, p_cur: PointSample):
    # u - v = 1, so v*v + u*u - 2*u*v = 1 exactly in exact arithmetic.
    dy = p_prev.y - p_cur.y
    t = 1 / dy
    u = p_prev.y * t
    v = p_cur.y * t
    return v * v, u * u, -2 * u * v


def ici_step(p_prev: PointSample, p_cur: PointSample):
    """The stable blended step: weighted average of Newton, Newton, secant.

    With y0 = p_prev.y, y1 = p_cur.y the weights are y1^2, y0^2 and
    -2*y0*y1, each divided by (y0 - y1)^2; they sum to 1 and give the most
    weight to the more accurate estimate.  Exact for samples of an inverse
    cubic, and independent of the argument order.
    """
    if p_prev.y == p_cur.y:
        raise EqualResidualsError("equal residuals: blended step undefined")
    if p_prev.yp == 0 or p_cur.yp == 0:
        raise ZeroDerivativeError("zero derivative in blended step")
    w_prev, w_cur, w_sec = _weights(p_prev, p_cur)
    return (w_prev * newton_step(p_prev)
            + w_cur * newton_step(p_cur)
            + w_sec * secant_step(p_prev, p_cur))


def ici_step_blind(p_prev: PointSample, p_cur: PointSample):
    """Direct substitution of height zero into the inverse cubic interpolant.

    Mathematically equal to :func:`ici_step` but written without the
    stabilizing small-update grouping; kept for cross-checks and stability
    experiments.
    """
    if p_prev.y == p_cur.y:
        raise EqualResidualsError("equal residuals: blended step undefined")
    if p_prev.yp == 0 or p_cur.yp == 0:
        raise ZeroDerivativeError("zero derivative in blended step")
    a, fa, dfa = p_prev.x, p_prev.y, p_prev.yp
    b, dfb = p_cur.x, p_cur.yp
    delta = p_cur.y - p_prev.y
    q = fa / delta
    return (((1 - 2 * q) * a - fa / dfa) * (1 + q) * (1 + q)
            + q * q * ((3 + 2 * q) * b - (delta / dfb) * (1 + q)))


def ici_step_averaged(p_prev: PointSample, p_cur: PointSample):
    """Blended step computed as (average of base points) + (average of updates).

    Same weights as :func:`ici_step`; the three sub-step base points
    (x_prev, x_cur, x_cur) and the three small updates are averaged
    separately before combining.  Mathematically equal to :func:`ici_step`.
    """
    if p_prev.y == p_cur.y:
        raise EqualResidualsError("equal residuals: blended step undefined")
    if p_prev.yp == 0 or p_cur.yp == 0:
        raise ZeroDerivativeError("zero derivative in blended step")
    w_prev, w_cur, w_sec = _weights(p_prev, p_cur)
    base = w_prev * p_prev.x + w_cur * p_cur.x + w_sec * p_cur.x
    update = (w_prev * (-p_prev.y / p_prev.yp)
              + w_cur * (-p_cur.y / p_cur.yp)
              + w_sec * (-p_cur.y * (p_cur.x - p_prev.x) / (p_cur.y - p_prev.y)))
    return base + update

"""Independent reference computations for the tests.

These run on raw mpmath contexts, deliberately bypassing the package's own
arithmetic helpers, so they stay independent of the code paths they check.
"""

import math

from mpmath.ctx_mp import MPContext


def make_ctx(digits):
    ctx = MPContext()
    ctx.prec = math.ceil(digits * math.log2(10)) + 32
    return ctx


def bisect_root(f, lo, hi, digits, steps=None):
    """Plain sign-change bisection; f(lo) and f(hi) must have opposite signs."""
    ctx = make_ctx(digits + 10)
    lo, hi = ctx.mpf(lo), ctx.mpf(hi)
    flo, fhi = f(lo), f(hi)
    assert flo * fhi <= 0, "bisection bracket does not change sign"
    if steps is None:
        steps = int((digits + 10) * math.log2(10)) + int(ctx.log(hi - lo, 2)) + 4
    for _ in range(steps):
        mid = (lo + hi) / 2
        fmid = f(mid)
        if fmid == 0:
            return mid
        if flo * fmid <= 0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return (lo + hi) / 2


def central_diff(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


def digits_of_accuracy(x, ref):
    """-log10 |x - ref| as a float; inf when the difference is exactly zero."""
    ctx = make_ctx(50)
    err = abs(ctx.mpf(str(x)) - ctx.mpf(str(ref)))
    if err == 0:
        return float("inf")
    return float(-ctx.log(err, 10))

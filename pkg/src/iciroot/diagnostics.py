"""Convergence diagnostics: digits per step, residual ratios, order estimates.

For the blended two-point iteration the forward errors obey, to leading
order, e_{n+1} = K * (e_{n-1} * e_n)^2 with

    K = (f1^2*f4 - 10*f1*f2*f3 + 15*f2^3) / (24*f1^3)

in terms of the first four derivatives at the root.  Since the residual is
y ~ f1*e near a simple root, the observable residual ratios
r_k = |y_k| / (|y_{k-1}|*|y_{k-2}|)^2 approach K / f1^3, and solving the
log-recurrence gives asymptotic order 1 + sqrt(3) = 2.732...  The fitted
model used throughout is y_k = C**((1+sqrt(3))**k) with C fixed from the
final data point only.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .mpscalar import context_of, log10_abs, to_decimal
from .solve import IterationTrace

ORDER_TARGET = "1+sqrt(3)"


class DiagnosticsError(ValueError):
    pass


class FitUndefinedError(DiagnosticsError):
    """Final residual missing, zero, or >= 1: the decay model cannot be fit."""


class MultipleRootError(DiagnosticsError):
    """First derivative vanishes at the root."""


def _ctx(trace: IterationTrace):
    return context_of(trace.records[0].y)


def _rho(ctx):
    return 1 + ctx.sqrt(ctx.mpf(3))


def ratio_sequence(trace: IterationTrace):
    """Residual ratios r_k = |y_k| / (|y_{k-1}|*|y_{k-2}|)^2 for k >= 2.

    The sequence is truncated at the first k whose denominator residuals
    include a zero.  Traces with fewer than three records give [].
    """
    ys = trace.residuals()
    out = []
    for k in range(2, len(ys)):
        if ys[k - 1] == 0 or ys[k - 2] == 0:
            break
        out.append(abs(ys[k]) / (abs(ys[k - 1]) * abs(ys[k - 2])) ** 2)
    return out


def fit_constant(trace: IterationTrace):
    """Constant C of the decay model y_k = C**rho**k, fit at the final point.

    Raises:
        FitUndefinedError: if the final residual is zero or not below 1.
    """
    ys = trace.residuals()
    if not ys:
        raise FitUndefinedError("empty trace")
    ctx = _ctx(trace)
    y_last = abs(ys[-1])
    if y_last == 0:
        raise FitUndefinedError("final residual is exactly zero")
    if y_last >= 1:
        raise FitUndefinedError("final residual is not below 1")
    K = len(ys) - 1
    return y_last ** (_rho(ctx) ** (-K))


def predict_next(trace: IterationTrace):
    """Predicted |y_{K+1}| = r_last * (|y_K|*|y_{K-1}|)^2 from the last ratio."""
    ratios = ratio_sequence(trace)
    ys = trace.residuals()
    if not ratios or len(ratios) < len(ys) - 2:
        raise DiagnosticsError("need at least three consecutive nonzero residuals")
    return ratios[-1] * (abs(ys[-1]) * abs(ys[-2])) ** 2


def order_estimate(trace: IterationTrace):
    """Successive-exponent order estimates rho_k = ln|y_{k+1}| / ln|y_k|.

    Only indices where both residuals are nonzero, below 1 and strictly
    decreasing contribute; other k are skipped.
    """
    ys = trace.residuals()
    ctx = _ctx(trace)
    out = []
    for k in range(len(ys) - 1):
        a, b = abs(ys[k]), abs(ys[k + 1])
        if a == 0 or b == 0 or a >= 1 or b >= 1 or b >= a:
            continue
        out.append(ctx.log(b) / ctx.log(a))
    return out


def error_constant_oracle(f1, f2, f3, f4):
    """Leading coefficient K of the forward-error recurrence e+ = K*(e-*e)^2.

    Takes the first four derivatives of f at the root.  K vanishes when
    f2 = f3 = f4 = 0, and blows up toward multiple roots.

    Raises:
        MultipleRootError: if f1 is zero.
    """
    if f1 == 0:
        raise MultipleRootError("first derivative is zero at the root")
    return (f1 * f1 * f4 - 10 * f1 * f2 * f3 + 15 * f2 ** 3) / (24 * f1 ** 3)


def residual_ratio_limit(f1, f2, f3, f4):
    """Limit of the residual ratios r_k, namely K / f1^3 (since y ~ f1*e)."""
    return error_constant_oracle(f1, f2, f3, f4) / f1 ** 3


def ratio_growth_flag(trace: IterationTrace, window: int = 4) -> bool:
    """True when the trailing ratios grow steadily: the multiple-root signature.

    The residual recorded at a converged stop sits at the evaluation noise
    floor, so its ratio is dropped before looking at the tail.  A simple
    root settles to a constant ratio (quotients -> 1); a multiple root keeps
    multiplying the ratio by a large steady factor.
    """
    ratios = ratio_sequence(trace)
    if trace.converged:
        ratios = ratios[:-1]
    if len(ratios) < window:
        return False
    tail = ratios[-window:]
    if any(r == 0 for r in tail):
        return False
    return all(tail[i + 1] >= 10 * tail[i] for i in range(window - 1))


@dataclass
class ConvergenceReport:
    digits_per_step: list
    ratios: list
    order_estimates: list
    fitted_constant: object       # None when the fit is undefined
    predicted_next: object        # None when fewer than 3 nonzero residuals
    fit_misfit_log10: object      # |log10 y_{K-1} - model|; None if unavailable


def build_report(trace: IterationTrace) -> ConvergenceReport:
    """Compute every diagnostic that the trace supports; missing ones are None."""
    ctx = _ctx(trace)
    digits = [-log10_abs(r.y) for r in trace.records]
    ratios = ratio_sequence(trace)
    orders = order_estimate(trace)
    try:
        c_fit = fit_constant(trace)
    except FitUndefinedError:
        c_fit = None
    try:
        predicted = predict_next(trace)
    except DiagnosticsError:
        predicted = None
    misfit = None
    ys = trace.residuals()
    if c_fit is not None and len(ys) >= 2 and ys[-2] != 0:
        k_prev = len(ys) - 2
        model = (_rho(ctx) ** k_prev) * log10_abs(c_fit)
        misfit = abs(log10_abs(ys[-2]) - model)
    return ConvergenceReport(digits, ratios, orders, c_fit, predicted, misfit)


# ---------------------------------------------------------------------------
# serialization

def _fmt_optional(value, digits):
    return to_decimal(value, digits) if value is not None else "-"


def report_to_text(report: ConvergenceReport, digits: int = 8) -> str:
    lines = [
        f"fitted_constant: {_fmt_optional(report.fitted_constant, digits)}",
        f"predicted_next: {_fmt_optional(report.predicted_next, digits)}",
        f"fit_misfit_log10: {_fmt_optional(report.fit_misfit_log10, digits)}",
        "order_estimates: " + " ".join(to_decimal(o, digits) for o in report.order_estimates),
        "k,digits,ratio",
    ]
    for k, d in enumerate(report.digits_per_step):
        ratio = to_decimal(report.ratios[k - 2], digits) if 2 <= k < len(report.ratios) + 2 else ""
        lines.append(f"{k},{to_decimal(d, digits)},{ratio}")
    return "\n".join(lines) + "\n"


def write_report_csv(report: ConvergenceReport, path_or_file, digits: int = 12):
    """Per-step table (digits, ratio) plus summary columns on the k = 0 row."""
    close = False
    if isinstance(path_or_file, (str, bytes)):
        fh = open(path_or_file, "w", newline="")
        close = True
    else:
        fh = path_or_file
    try:
        w = csv.writer(fh)
        w.writerow(["k", "digits", "ratio",
                    "fitted_constant", "predicted_next", "fit_misfit_log10", "order_tail"])
        tail = report.order_estimates[-1] if report.order_estimates else None
        for k, d in enumerate(report.digits_per_step):
            ratio = to_decimal(report.ratios[k - 2], digits) if 2 <= k < len(report.ratios) + 2 else ""
            summary = ([_fmt_optional(report.fitted_constant, digits),
                        _fmt_optional(report.predicted_next, digits),
                        _fmt_optional(report.fit_misfit_log10, digits),
                        _fmt_optional(tail, digits)]
                       if k == 0 else ["", "", "", ""])
            w.writerow([k, to_decimal(d, digits), ratio] + summary)
    finally:
        if close:
            fh.close()


def write_logplot_csv(trace: IterationTrace, path_or_file, digits: int = 12):
    """Two-column (k, log10|y_k|) CSV, ready for external plotting."""
    close = False
    if isinstance(path_or_file, (str, bytes)):
        fh = open(path_or_file, "w", newline="")
        close = True
    else:
        fh = path_or_file
    try:
        w = csv.writer(fh)
        w.writerow(["k", "log10_abs_y"])
        for rec in trace.records:
            w.writerow([rec.n, to_decimal(log10_abs(rec.y), digits)])
    finally:
        if close:
            fh.close()

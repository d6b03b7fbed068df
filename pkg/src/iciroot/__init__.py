"""Arbitrary-precision scalar rootfinding via a blended Newton/secant step.

The production iteration averages two Newton steps and a secant step with
residual-derived weights, equivalently evaluating an inverse cubic Hermite
interpolant at height zero.  It needs one function evaluation and one
derivative evaluation per step and converges with order 1 + sqrt(3).
"""

from .basins import BasinRaster, BasinSpec, line_scan, render, write_image
from .diagnostics import (ConvergenceReport, build_report, error_constant_oracle,
                          fit_constant, order_estimate, predict_next, ratio_growth_flag,
                          ratio_sequence, residual_ratio_limit)
from .expr import ExprError, ExprSyntaxError, UnknownIdentifierError, differentiate, evaluate, parse, render as render_expr
from .kernel import (DegenerateIntervalError, EqualResidualsError, PointSample,
                     ZeroDerivativeError, hermite_forward_eval, hermite_inverse_eval,
                     ici_step, ici_step_averaged, ici_step_blind, newton_step, secant_step)
from .mpscalar import (Precision, UndefinedPhaseError, log10_abs, parse_complex,
                       parse_real, phase, to_decimal)
from .solve import (IterationRecord, IterationTrace, SolveConfig, read_trace_text,
                    solve, solve_expr, write_trace_csv, write_trace_text)

__version__ = "0.1.0"

__all__ = [
    "BasinRaster", "BasinSpec", "line_scan", "render", "write_image",
    "ConvergenceReport", "build_report", "error_constant_oracle", "fit_constant",
    "order_estimate", "predict_next", "ratio_growth_flag", "ratio_sequence",
    "residual_ratio_limit",
    "ExprError", "ExprSyntaxError", "UnknownIdentifierError", "differentiate",
    "evaluate", "parse", "render_expr",
    "DegenerateIntervalError", "EqualResidualsError", "PointSample",
    "ZeroDerivativeError", "hermite_forward_eval", "hermite_inverse_eval",
    "ici_step", "ici_step_averaged", "ici_step_blind", "newton_step", "secant_step",
    "Precision", "UndefinedPhaseError", "log10_abs", "parse_complex", "parse_real",
    "phase", "to_decimal",
    "IterationRecord", "IterationTrace", "SolveConfig", "read_trace_text",
    "solve", "solve_expr", "write_trace_csv", "write_trace_text",
]

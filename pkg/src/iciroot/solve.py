"""Iteration driver: seed, one Newton step, then blended two-point steps.

The solver takes a single initial guess, generates the second point with one
Newton step, and from then on applies the configured two-point method.  Each
trace record holds exactly one fresh function evaluation and one fresh
derivative evaluation; previous evaluations are always reused.

Degenerate situations the step formulas cannot handle are safeguarded:

* (nearly) equal residuals: if already within tolerance the solve stops as
  converged, otherwise a plain Newton step from the current point is taken
  and recorded as ``safeguard_newton``;
* vanishing current derivative (below ``dfmin`` * local scale): the blended
  methods fall back to a plain secant step, which needs no derivative;
* vanishing previous derivative: plain Newton from the current point;
* NaN or infinity anywhere: the solve stops with status ``nan`` and a
  partial trace.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from . import expr as _expr
from .kernel import PointSample, ici_step, ici_step_averaged, newton_step, secant_step
from .mpscalar import Precision, is_finite, log10_abs, parse_complex, parse_real, to_decimal

METHODS = ("newton", "secant", "ici", "ici_averaged")

STATUS_CONVERGED = "converged"
STATUS_MAX_ITER = "max_iter"
STATUS_DEGENERATE = "degenerate"
STATUS_NAN = "nan"


@dataclass
class SolveConfig:
    """Solver parameters; unset tolerances get precision-scaled defaults.

    tol defaults to 10**(-digits+10), leaving guard digits so the residual
    evaluation itself is trustworthy.  dy_guard (relative residual-gap
    threshold) and dfmin (derivative threshold, relative to the local
    residual scale) both default to 10**(-digits+5).
    """

    precision: Precision = field(default_factory=Precision)
    tol: object = None
    max_iter: int = 100
    method: str = "ici"
    dy_guard: object = None
    dfmin: object = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        ctx = self.precision.ctx
        d = self.precision.digits
        self.tol = ctx.mpf(10) ** (-d + 10) if self.tol is None else self.precision.real(self.tol)
        guard_default = ctx.mpf(10) ** (-d + 5)
        self.dy_guard = guard_default if self.dy_guard is None else self.precision.real(self.dy_guard)
        self.dfmin = guard_default if self.dfmin is None else self.precision.real(self.dfmin)
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.dy_guard < 0 or self.dfmin < 0:
            raise ValueError("dy_guard and dfmin must be >= 0")


@dataclass(frozen=True)
class IterationRecord:
    n: int
    x: object
    y: object
    yp: object
    step_kind: str


@dataclass
class IterationTrace:
    records: list
    status: str

    def __len__(self):
        return len(self.records)

    @property
    def final(self) -> IterationRecord:
        return self.records[-1]

    @property
    def converged(self) -> bool:
        return self.status == STATUS_CONVERGED

    def iterates(self):
        return [r.x for r in self.records]

    def residuals(self):
        return [r.y for r in self.records]


def _sample(rec: IterationRecord) -> PointSample:
    return PointSample(rec.x, rec.y, rec.yp)


def solve(f, fp, x0, cfg: SolveConfig | None = None) -> IterationTrace:
    """Run the configured iteration from one initial guess, recording a trace.

    Args:
        f: residual function, evaluable on the working scalar kind.
        fp: its derivative.
        x0: initial guess (real or complex; kind selects the working mode).
        cfg: solver configuration; defaults to ``SolveConfig()``.

    Returns:
        IterationTrace whose records satisfy y = f(x), yp = fp(x), with one
        fresh (f, fp) evaluation pair per record.
    """
    cfg = cfg if cfg is not None else SolveConfig()
    x = cfg.precision.scalar(x0)
    records = []

    def evaluate(xv, kind):
        try:
            y = f(xv)
            yp = fp(xv)
        except ZeroDivisionError:
            y = yp = cfg.precision.nan
        records.append(IterationRecord(len(records), xv, y, yp, kind))
        return y, yp

    y, yp = evaluate(x, "seed")
    if not (is_finite(y) and is_finite(yp)):
        return IterationTrace(records, STATUS_NAN)
    if abs(y) <= cfg.tol:
        return IterationTrace(records, STATUS_CONVERGED)

    def df_floor(cur_y):
        scale = abs(cur_y)
        return cfg.dfmin * (scale if scale > 1 else 1)

    for _ in range(cfg.max_iter):
        cur = records[-1]
        if len(records) == 1 or cfg.method == "newton":
            if abs(cur.yp) <= df_floor(cur.y):
                return IterationTrace(records, STATUS_DEGENERATE)
            x_next, kind = newton_step(_sample(cur)), "newton"
        else:
            prev = records[-2]
            gap = abs(cur.y - prev.y)
            if gap <= cfg.dy_guard * max(abs(cur.y), abs(prev.y)):
                if abs(cur.yp) <= df_floor(cur.y):
                    return IterationTrace(records, STATUS_DEGENERATE)
                x_next, kind = newton_step(_sample(cur)), "safeguard_newton"
            elif cfg.method == "secant":
                x_next, kind = secant_step(_sample(prev), _sample(cur)), "secant"
            elif abs(cur.yp) <= df_floor(cur.y):
                x_next, kind = secant_step(_sample(prev), _sample(cur)), "secant"
            elif abs(prev.yp) <= df_floor(prev.y):
                x_next, kind = newton_step(_sample(cur)), "safeguard_newton"
            else:
                step = ici_step if cfg.method == "ici" else ici_step_averaged
                x_next, kind = step(_sample(prev), _sample(cur)), cfg.method
        if not is_finite(x_next):
            return IterationTrace(records, STATUS_NAN)
        y, yp = evaluate(x_next, kind)
        if not (is_finite(y) and is_finite(yp)):
            return IterationTrace(records, STATUS_NAN)
        if abs(y) <= cfg.tol:
            return IterationTrace(records, STATUS_CONVERGED)
    return IterationTrace(records, STATUS_MAX_ITER)


def solve_expr(ftext: str, x0, cfg: SolveConfig | None = None) -> IterationTrace:
    """Parse ``ftext``, differentiate it symbolically, and solve.

    The working mode (real/complex) follows the kind of ``x0``.  Parse and
    identifier errors from the expression module surface unchanged.
    """
    cfg = cfg if cfg is not None else SolveConfig()
    tree = _expr.parse(ftext)
    names = _expr.free_variables(tree)
    if len(names) > 1:
        extra = sorted(names)[1]
        raise _expr.UnknownIdentifierError(f"more than one variable in expression: {extra!r}")
    var = names.pop() if names else "x"
    dtree = _expr.differentiate(tree, var)
    complex_mode = hasattr(x0, "_mpc_") or isinstance(x0, complex)
    f = _expr.compile_fn(tree, var, cfg.precision, complex_mode)
    fp = _expr.compile_fn(dtree, var, cfg.precision, complex_mode)
    return solve(f, fp, x0, cfg)


# ---------------------------------------------------------------------------
# serialization

_CSV_HEADER = ["n", "x", "y", "yp", "step_kind", "log10_abs_y"]


def _record_row(rec: IterationRecord, digits: int):
    return [str(rec.n),
            to_decimal(rec.x, digits),
            to_decimal(rec.y, digits),
            to_decimal(rec.yp, digits),
            rec.step_kind,
            to_decimal(log10_abs(rec.y), 12)]


def write_trace_csv(trace: IterationTrace, path_or_file, digits: int | None = None):
    """Write the trace as CSV with full-precision decimal columns."""
    close = False
    if isinstance(path_or_file, (str, bytes)):
        fh = open(path_or_file, "w", newline="")
        close = True
    else:
        fh = path_or_file
    try:
        w = csv.writer(fh)
        w.writerow(_CSV_HEADER)
        for rec in trace.records:
            w.writerow(_record_row(rec, digits))
    finally:
        if close:
            fh.close()


def write_trace_text(trace: IterationTrace, meta: dict, path_or_file):
    """Write run metadata (key: value lines) followed by the CSV table."""
    close = False
    if isinstance(path_or_file, (str, bytes)):
        fh = open(path_or_file, "w", newline="")
        close = True
    else:
        fh = path_or_file
    try:
        for key, value in meta.items():
            fh.write(f"{key}: {value}\n")
        fh.write(f"status: {trace.status}\n")
        buf = io.StringIO()
        write_trace_csv(trace, buf, digits=int(meta["digits"]) if "digits" in meta else None)
        fh.write(buf.getvalue())
    finally:
        if close:
            fh.close()


def read_trace_text(path_or_file):
    """Read a trace written by :func:`write_trace_text`.

    Returns:
        (IterationTrace, meta dict).  Record values are reconstructed at the
        precision named by the ``digits`` metadata entry.
    """
    close = False
    if isinstance(path_or_file, (str, bytes)):
        fh = open(path_or_file, "r", newline="")
        close = True
    else:
        fh = path_or_file
    try:
        meta = {}
        lines = fh.read().splitlines()
    finally:
        if close:
            fh.close()
    k = 0
    while k < len(lines) and not lines[k].startswith("n,"):
        if lines[k].strip():
            key, _, value = lines[k].partition(":")
            meta[key.strip()] = value.strip()
        k += 1
    if k == len(lines):
        raise ValueError("missing trace table header")
    p = Precision(int(meta.get("digits", 40)))
    records = []
    for row in csv.reader(lines[k + 1:]):
        if not row:
            continue
        n, x_s, y_s, yp_s, kind = row[0], row[1], row[2], row[3], row[4]
        conv = parse_complex if x_s.rstrip().endswith("i") else parse_real
        records.append(IterationRecord(int(n), conv(x_s, p), conv(y_s, p), conv(yp_s, p), kind))
    status = meta.pop("status", STATUS_MAX_ITER)
    return IterationTrace(records, status), meta

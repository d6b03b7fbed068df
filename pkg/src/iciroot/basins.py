"""Basin-of-attraction rendering over a complex-plane pixel grid.

Every pixel center seeds one iteration (Newton first, then the blended
two-point step).  A pixel records either the converged limit, the final
iterate after ``max_iter`` steps, or a NaN flag when the iteration hit a
degeneracy (equal residuals, zero derivative, division by zero) or escaped
the overflow cap.  Arbitrary-precision arithmetic never overflows on its
own, so the cap — a decimal exponent, IEEE-double-like 308 by default —
is what makes "iteration blew up" an observable pixel state.

Pixels are independent; rows may be partitioned across worker processes.
Per-pixel results are transported as raw mantissa/exponent tuples, so the
assembled raster is bit-identical regardless of the worker count.
"""

from __future__ import annotations

import colorsys
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import expr as _expr
from .mpscalar import LOG2_10, Precision

DEFAULT_BASIN_DIGITS = 34


@dataclass
class BasinSpec:
    """Grid, iteration budget and precision for one basin render."""

    ftext: str
    re_range: tuple = (-2.0, 2.0)
    im_range: tuple = (-2.0, 2.0)
    width: int = 200
    height: int = 200
    max_iter: int = 13
    tol: object = "1e-8"
    precision: Precision = field(default_factory=lambda: Precision(DEFAULT_BASIN_DIGITS))
    overflow_exp: int = 308
    workers: int = 1

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("width and height must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not (float(self.re_range[0]) < float(self.re_range[1])
                and float(self.im_range[0]) < float(self.im_range[1])):
            raise ValueError("re_range and im_range must be non-degenerate intervals")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def pixel_center(self, i: int, j: int):
        """Center of pixel (i, j); row j = 0 sits at the top of im_range.

        Range endpoints go through their decimal string form, matching the
        renderer's grid exactly whether the spec carried floats or strings.
        """
        ctx = self.precision.ctx
        re0, re1 = (self.precision.real(str(v)) for v in self.re_range)
        im0, im1 = (self.precision.real(str(v)) for v in self.im_range)
        dre = (re1 - re0) / self.width
        dim = (im1 - im0) / self.height
        return ctx.mpc(re0 + (i + ctx.mpf("0.5")) * dre, im1 - (j + ctx.mpf("0.5")) * dim)


@dataclass
class BasinRaster:
    """Per-pixel outcome arrays, indexed [row j][column i]."""

    width: int
    height: int
    final: list        # mpc limit, or None on a NaN pixel
    iterations: list   # iterations used (0 when the seed evaluation failed)
    converged: list
    nan_mask: list
    phase: list        # float in (-pi, pi], or None on a NaN pixel
    spec: BasinSpec

    def counts(self):
        conv = sum(r.count(True) for r in self.converged)
        nan = sum(r.count(True) for r in self.nan_mask)
        return conv, nan

    def to_csv(self, path_or_file):
        import csv

        close = False
        if isinstance(path_or_file, (str, bytes)):
            fh = open(path_or_file, "w", newline="")
            close = True
        else:
            fh = path_or_file
        try:
            w = csv.writer(fh)
            w.writerow(["i", "j", "re_z0", "im_z0", "converged", "iterations", "phase"])
            for j in range(self.height):
                for i in range(self.width):
                    z0 = self.spec.pixel_center(i, j)
                    ph = self.phase[j][i]
                    w.writerow([i, j, repr(float(z0.real)), repr(float(z0.imag)),
                                int(self.converged[j][i]), self.iterations[j][i],
                                "" if ph is None else repr(ph)])
        finally:
            if close:
                fh.close()


# ---------------------------------------------------------------------------
# per-process iteration machinery

_STATE: dict = {}


def _compile_state(payload: dict) -> dict:
    p = Precision(payload["digits"])
    ctx = p.ctx
    tree = _expr.parse(payload["ftext"])
    names = _expr.free_variables(tree)
    if len(names) > 1:
        raise _expr.UnknownIdentifierError(
            f"more than one variable in expression: {sorted(names)[1]!r}")
    var = names.pop() if names else "z"
    f = _expr.compile_fn(tree, var, p, complex_mode=True)
    fp = _expr.compile_fn(_expr.differentiate(tree, var), var, p, complex_mode=True)
    return {
        "ctx": ctx,
        "f": f,
        "fp": fp,
        "tol": p.real(payload["tol"]),
        "max_iter": payload["max_iter"],
        "cap_mag": int(payload["overflow_exp"] * LOG2_10) + 1,
        "re0": p.real(payload["re0"]), "re1": p.real(payload["re1"]),
        "im0": p.real(payload["im0"]), "im1": p.real(payload["im1"]),
        "width": payload["width"], "height": payload["height"],
        "half": ctx.mpf("0.5"),
    }


def _init_worker(payload):
    _STATE.clear()
    _STATE.update(_compile_state(payload))


def _iterate_point(state, z0):
    """Newton seed step then blended steps; returns (z, iters, converged, nan).

    Degeneracies and overflow produce (None, iters, False, True) instead of
    raising; their pixels render as NaN.
    """
    ctx = state["ctx"]
    f, fp = state["f"], state["fp"]
    tol = state["tol"]
    cap = state["cap_mag"]
    isfinite, mag = ctx.isfinite, ctx.mag

    def bad(v):
        return (not isfinite(v)) or mag(v) > cap

    try:
        zc = z0
        yc = f(zc)
        dc = fp(zc)
        if bad(yc) or bad(dc):
            return None, 0, False, True
        zp = yp = dp = None
        for it in range(1, state["max_iter"] + 1):
            if zp is None:
                if dc == 0:
                    return None, it, False, True
                zn = zc - yc / dc
            else:
                dy = yp - yc
                if dy == 0 or dp == 0 or dc == 0:
                    return None, it, False, True
                t = 1 / dy
                u = yp * t
                v = yc * t
                zn = (v * v * (zp - yp / dp) + u * u * (zc - yc / dc)
                      - 2 * u * v * (zc + v * (zc - zp)))
            if bad(zn):
                return None, it, False, True
            yn = f(zn)
            dn = fp(zn)
            if bad(yn) or bad(dn):
                return None, it, False, True
            zp, yp, dp = zc, yc, dc
            zc, yc, dc = zn, yn, dn
            if abs(yc) <= tol:
                return zc, it, True, False
        return zc, state["max_iter"], False, False
    except ZeroDivisionError:
        return None, 0, False, True


def _render_row(j):
    state = _STATE
    ctx = state["ctx"]
    w = state["width"]
    dre = (state["re1"] - state["re0"]) / w
    dim = (state["im1"] - state["im0"]) / state["height"]
    im = state["im1"] - (j + state["half"]) * dim
    row = []
    for i in range(w):
        re = state["re0"] + (i + state["half"]) * dre
        z, iters, conv, nan = _iterate_point(state, ctx.mpc(re, im))
        if nan:
            row.append((None, iters, False, True, None))
        else:
            row.append((z._mpc_, iters, conv, False, float(ctx.arg(z))))
    return j, row


def _spec_payload(spec: BasinSpec) -> dict:
    return {
        "ftext": spec.ftext,
        "digits": spec.precision.digits,
        "tol": str(spec.tol),
        "max_iter": spec.max_iter,
        "overflow_exp": spec.overflow_exp,
        "re0": str(spec.re_range[0]), "re1": str(spec.re_range[1]),
        "im0": str(spec.im_range[0]), "im1": str(spec.im_range[1]),
        "width": spec.width, "height": spec.height,
    }


def render(spec: BasinSpec) -> BasinRaster:
    """Iterate from every pixel center and assemble the outcome raster.

    The result is a pure function of the spec: identical specs give
    bit-identical rasters, whatever ``spec.workers`` is.
    """
    payload = _spec_payload(spec)
    rows = [None] * spec.height
    if spec.workers == 1 or spec.height == 1:
        _init_worker(payload)
        for j in range(spec.height):
            rows[j] = _render_row(j)[1]
    else:
        with ProcessPoolExecutor(max_workers=spec.workers,
                                 initializer=_init_worker,
                                 initargs=(payload,)) as pool:
            chunk = max(1, spec.height // (spec.workers * 4))
            for j, row in pool.map(_render_row, range(spec.height), chunksize=chunk):
                rows[j] = row
    ctx = spec.precision.ctx
    final, iters, conv, nan_mask, phase = [], [], [], [], []
    for row in rows:
        final.append([None if t[0] is None else ctx.make_mpc(t[0]) for t in row])
        iters.append([t[1] for t in row])
        conv.append([t[2] for t in row])
        nan_mask.append([t[3] for t in row])
        phase.append([t[4] for t in row])
    return BasinRaster(spec.width, spec.height, final, iters, conv, nan_mask, phase, spec)


def write_image(raster: BasinRaster, path):
    """Write a binary PPM (P6, maxval 255): hue from phase, NaN pixels white.

    hue = (phase + pi) / (2*pi) through an HSV->RGB map with S = V = 1;
    row 0 of the file is the top of the imaginary range.
    """
    two_pi = 2 * math.pi
    with open(path, "wb") as fh:
        fh.write(f"P6\n{raster.width} {raster.height}\n255\n".encode("ascii"))
        buf = bytearray()
        for j in range(raster.height):
            for i in range(raster.width):
                if raster.nan_mask[j][i]:
                    buf.extend((255, 255, 255))
                else:
                    hue = (raster.phase[j][i] + math.pi) / two_pi
                    r, g, b = colorsys.hsv_to_rgb(min(max(hue, 0.0), 1.0), 1.0, 1.0)
                    buf.extend((round(r * 255), round(g * 255), round(b * 255)))
        fh.write(bytes(buf))


def line_scan(spec: BasinSpec, segment, samples: int):
    """Iterate from points along a segment; assign each limit to a root index.

    Successive distinct limits (within 1000 * tol of each other) share an
    index, in order of first appearance; NaN outcomes get -1.  The number of
    index changes along the scan witnesses basin disconnection on the line.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    state = _compile_state(_spec_payload(spec))
    ctx = state["ctx"]
    p = spec.precision
    z_start, z_end = p.scalar(segment[0]), p.scalar(segment[1])
    radius = state["tol"] * 1000
    reps = []
    assignments = []
    for k in range(samples):
        t = ctx.mpf(k) / (samples - 1) if samples > 1 else ctx.mpf(0)
        z0 = z_start + t * (z_end - z_start)
        z, _, _, nan = _iterate_point(state, z0)
        if nan:
            assignments.append(-1)
            continue
        for idx, rep in enumerate(reps):
            if abs(z - rep) <= radius:
                assignments.append(idx)
                break
        else:
            reps.append(z)
            assignments.append(len(reps) - 1)
    return assignments

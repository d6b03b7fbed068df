import io

import pytest

from iciroot.diagnostics import ratio_growth_flag
from iciroot.mpscalar import Precision, is_nan, to_decimal
from iciroot.solve import (IterationTrace, SolveConfig, read_trace_text, solve,
                           solve_expr, write_trace_csv, write_trace_text)

from oracles import bisect_root, digits_of_accuracy


def _cubic(p):
    f = lambda x: x ** 3 - 2 * x - 5
    fp = lambda x: 3 * x ** 2 - 2
    return f, fp


def test_linear_function_converges_in_one_newton_step():
    p = Precision(20)
    trace = solve(lambda x: x, lambda x: x * 0 + 1, p.real(5), SolveConfig(precision=p))
    assert trace.status == "converged"
    assert len(trace) == 2
    assert trace.records[0].step_kind == "seed"
    assert trace.records[1].step_kind == "newton"
    assert trace.final.x == 0


def test_seed_already_at_root():
    p = Precision(20)
    trace = solve(lambda x: x - 1, lambda x: x * 0 + 1, p.real(1), SolveConfig(precision=p))
    assert trace.status == "converged"
    assert len(trace) == 1
    assert trace.records[0].step_kind == "seed"


def test_classic_cubic_trace_shape_and_convergence():
    p = Precision(40)
    f, fp = _cubic(p)
    trace = solve(f, fp, p.real(1), SolveConfig(precision=p))
    assert trace.status == "converged"
    kinds = [r.step_kind for r in trace.records]
    assert kinds[0] == "seed"
    assert kinds[1] == "newton"
    assert set(kinds[2:]) == {"ici"}
    root = bisect_root(lambda x: x ** 3 - 2 * x - 5, 2, 3, 60)
    assert digits_of_accuracy(trace.final.x, root) >= 30


def test_every_record_is_a_fresh_consistent_evaluation():
    p = Precision(40)
    f, fp = _cubic(p)
    calls = {"f": 0, "fp": 0}

    def fc(x):
        calls["f"] += 1
        return f(x)

    def fpc(x):
        calls["fp"] += 1
        return fp(x)

    trace = solve(fc, fpc, p.real(1), SolveConfig(precision=p))
    assert calls["f"] == len(trace)
    assert calls["fp"] == len(trace)
    for rec in trace.records:
        assert rec.y == f(rec.x)
        assert rec.yp == fp(rec.x)


def test_first_step_matches_newton_for_every_method():
    p = Precision(40)
    f, fp = _cubic(p)
    x1 = {}
    for method in ("newton", "ici", "ici_averaged", "secant"):
        trace = solve(f, fp, p.real(2), SolveConfig(precision=p, method=method, max_iter=3))
        x1[method] = trace.records[1].x
        assert trace.records[1].step_kind == "newton"
    assert len(set(map(str, x1.values()))) == 1


def test_solver_is_scale_invariant():
    p = Precision(40)
    f, fp = _cubic(p)
    cfg = SolveConfig(precision=p, tol="1e-35")
    t1 = solve(f, fp, p.real(1), cfg)
    t17 = solve(lambda x: 17 * f(x), lambda x: 17 * fp(x), p.real(1),
                SolveConfig(precision=p, tol="1e-35"))
    n = min(len(t1), len(t17))
    for a, b in zip(t1.records[:n], t17.records[:n]):
        assert abs(a.x - b.x) <= max(abs(a.x), p.real(1)) * 10 * p.eps


def test_converged_status_implies_residual_below_tol():
    p = Precision(30)
    cfg = SolveConfig(precision=p)
    trace = solve_expr("x^2-2", p.real("1.5"), cfg)
    assert trace.converged
    assert abs(trace.final.y) <= cfg.tol


def test_solve_expr_matches_handle_based_solve():
    p = Precision(40)
    f, fp = _cubic(p)
    cfg = SolveConfig(precision=p)
    t_handle = solve(f, fp, p.real(1), cfg)
    t_text = solve_expr("x^3-2*x-5", p.real(1), cfg)
    assert t_handle.status == t_text.status
    assert [str(r.x) for r in t_handle.records] == [str(r.x) for r in t_text.records]


def test_kepler_equation_root_matches_bisection_oracle():
    p = Precision(40)
    trace = solve_expr("x - 0.083*sin(x) - 1", p.real("1.0"), SolveConfig(precision=p))
    assert trace.converged

    def kepler(x):
        ctx = x.context
        return x - ctx.mpf("0.083") * ctx.sin(x) - 1

    root = bisect_root(kepler, 1, "1.2", 50)
    assert str(root).startswith("1.07292384667653582")
    assert digits_of_accuracy(trace.final.x, root) >= 29


def test_multiple_root_converges_slowly_with_growing_ratios():
    p = Precision(30)
    cfg = SolveConfig(precision=p)
    trace = solve_expr("(x-2)^2", p.real("0.5"), cfg)
    assert trace.converged
    assert abs(trace.final.x - 2) <= p.real("1e-10")
    assert len(trace) - 1 > 10  # linear-rate convergence: many steps
    assert ratio_growth_flag(trace)


def test_complex_solve_finds_a_cube_root_of_unity():
    p = Precision(34)
    cfg = SolveConfig(precision=p, tol="1e-20", max_iter=40)
    trace = solve_expr("z^3-1", p.cplx("0.5", "0.5"), cfg)
    assert trace.converged
    assert abs(trace.final.x ** 3 - 1) <= p.real("1e-19")


def test_nan_mid_run_gives_partial_trace():
    p = Precision(30)
    trace = solve_expr("log(x)+2", p.real(10), SolveConfig(precision=p, max_iter=20))
    assert trace.status == "nan"
    assert len(trace) >= 2
    assert is_nan(trace.final.y)


def test_nan_at_seed():
    p = Precision(30)
    trace = solve_expr("sqrt(x)", p.real(-4), SolveConfig(precision=p))
    assert trace.status == "nan"
    assert len(trace) == 1


def test_dy_guard_falls_back_to_safeguard_newton():
    p = Precision(30)
    f, fp = (lambda x: x ** 3 - 2 * x - 5), (lambda x: 3 * x ** 2 - 2)
    cfg = SolveConfig(precision=p, dy_guard=2.0)  # every gap counts as degenerate
    trace = solve(f, fp, p.real(2), cfg)
    kinds = {r.step_kind for r in trace.records[2:]}
    assert kinds == {"safeguard_newton"}
    assert trace.converged


def test_dfmin_falls_back_to_secant():
    p = Precision(30)
    calls = {"n": 0}

    def f(x):
        return x * x - 2

    def fp(x):
        # derivative goes numerically dead after the seed evaluation
        calls["n"] += 1
        return 2 * x if calls["n"] == 1 else p.real("1e-40")

    trace = solve(f, fp, p.real("1.5"), SolveConfig(precision=p))
    kinds = [r.step_kind for r in trace.records]
    assert kinds[:2] == ["seed", "newton"]
    assert set(kinds[2:]) == {"secant"}
    assert trace.converged


def test_dead_derivative_at_seed_is_degenerate():
    p = Precision(30)
    f, fp = (lambda x: x ** 3 - 2 * x - 5), (lambda x: 3 * x ** 2 - 2)
    trace = solve(f, fp, p.real(2), SolveConfig(precision=p, dfmin="1e30"))
    assert len(trace) == 1
    assert trace.status == "degenerate"


def test_degenerate_status_on_flat_function():
    p = Precision(30)
    trace = solve(lambda x: x * 0 + 1, lambda x: x * 0, p.real(1), SolveConfig(precision=p))
    assert trace.status == "degenerate"


def test_config_validation():
    p = Precision(30)
    with pytest.raises(ValueError):
        SolveConfig(precision=p, method="halley")
    with pytest.raises(ValueError):
        SolveConfig(precision=p, max_iter=0)
    with pytest.raises(ValueError):
        SolveConfig(precision=p, tol=0)
    cfg = SolveConfig(precision=p)
    assert cfg.tol == p.ctx.mpf(10) ** (-20)
    assert cfg.dy_guard == p.ctx.mpf(10) ** (-25)


def test_trace_csv_has_full_precision_columns():
    p = Precision(40)
    trace = solve_expr("x^3-2*x-5", p.real(1), SolveConfig(precision=p))
    buf = io.StringIO()
    write_trace_csv(trace, buf, digits=40)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "n,x,y,yp,step_kind,log10_abs_y"
    assert lines[1].startswith("0,1.0,-6.0,1.0,seed,")
    root_field = lines[-1].split(",")[1]
    assert root_field.startswith("2.0945514815423265914823865405793")


def test_trace_text_round_trip():
    p = Precision(40)
    cfg = SolveConfig(precision=p)
    trace = solve_expr("x^3-2*x-5", p.real(1), cfg)
    buf = io.StringIO()
    meta = {"function": "x^3-2*x-5", "x0": "1", "digits": 40,
            "tol": to_decimal(cfg.tol, 8), "method": "ici"}
    write_trace_text(trace, meta, buf)
    back, meta2 = read_trace_text(io.StringIO(buf.getvalue()))
    assert meta2["function"] == "x^3-2*x-5"
    assert back.status == trace.status
    assert len(back) == len(trace)
    for a, b in zip(trace.records, back.records):
        assert a.step_kind == b.step_kind
        assert abs(a.x - p.real(b.x)) <= max(abs(a.x), p.real(1)) * p.eps
        assert abs(a.y - p.real(b.y)) <= max(abs(a.y), p.real(1)) * p.eps


def test_complex_trace_text_round_trip():
    p = Precision(34)
    cfg = SolveConfig(precision=p, tol="1e-20", max_iter=40)
    trace = solve_expr("z^3-1", p.cplx("0.5", "0.5"), cfg)
    buf = io.StringIO()
    write_trace_text(trace, {"function": "z^3-1", "x0": "0.5+0.5i", "digits": 34}, buf)
    back, _ = read_trace_text(io.StringIO(buf.getvalue()))
    assert hasattr(back.final.x, "_mpc_")
    assert abs(back.final.x - trace.final.x) <= abs(trace.final.x) * 10 * p.eps

import random

import pytest

from iciroot.mpscalar import (Precision, UndefinedPhaseError, is_finite, is_nan,
                              log10_abs, parse_complex, parse_real, phase, to_decimal)


def test_precision_rejects_fewer_than_ten_digits():
    with pytest.raises(ValueError):
        Precision(9)
    with pytest.raises(ValueError):
        Precision(0)
    Precision(10)


def test_contexts_are_independent_and_cached():
    a, b = Precision(40), Precision(1624)
    assert a.ctx is Precision(40).ctx
    assert a.ctx is not b.ctx
    assert a.ctx.prec >= 40 * 3.32 + 32
    assert b.ctx.prec >= 1624 * 3.32 + 32


def test_phase_axis_examples():
    p = Precision(40)
    assert phase(p.cplx(1, 0)) == 0
    assert abs(phase(p.cplx(0, 1)) - p.ctx.pi / 2) < p.eps
    # branch convention: arg(-1) = +pi, in (-pi, pi]
    assert abs(phase(p.cplx(-1, 0)) - p.ctx.pi) < p.eps
    assert phase(p.cplx(-1, 0)) > 0


def test_phase_of_zero_is_an_error():
    p = Precision(40)
    with pytest.raises(UndefinedPhaseError):
        phase(p.cplx(0, 0))
    with pytest.raises(UndefinedPhaseError):
        phase(p.real(0))


def test_log10_abs_examples():
    p = Precision(40)
    assert log10_abs(p.real(100)) == 2
    tiny = p.real("1e-594")
    assert abs(log10_abs(tiny) + 594) < p.eps
    z = p.cplx(3, 4)
    assert abs(log10_abs(z) - p.ctx.log(p.real(5), 10)) < p.eps


def test_log10_abs_of_zero_is_minus_infinity_sentinel():
    p = Precision(40)
    v = log10_abs(p.real(0))
    assert v == p.ctx.mpf("-inf")
    assert not is_nan(v)


def test_render_reparse_round_trip_within_one_ulp():
    rng = random.Random(20240811)
    for digits in (12, 40, 200):
        p = Precision(digits)
        for _ in range(40):
            x = p.real(rng.uniform(-1, 1)) * p.ctx.mpf(10) ** rng.randint(-30, 30)
            s = to_decimal(x, digits)
            back = parse_real(s, p)
            assert abs(back - x) <= abs(x) * p.eps


def test_recompute_at_higher_precision_agrees_through_lower_digits():
    lo, hi = Precision(30), Precision(90)

    def compute(p):
        x = p.real("1.75")
        return p.ctx.exp(p.ctx.sin(x)) + p.ctx.sqrt(x) / 3

    a, b = compute(lo), compute(hi)
    assert abs(lo.real(b) - a) < abs(a) * lo.ctx.mpf(10) ** (2 - lo.digits)


def test_sin_cos_identity_spot_checks():
    for digits in (20, 100):
        p = Precision(digits)
        for t in ("0.5", "1.25", "-3.1", "12.0"):
            x = p.real(t)
            r = p.ctx.sin(x) ** 2 + p.ctx.cos(x) ** 2 - 1
            assert abs(r) <= 4 * p.eps


def test_nan_and_infinity_propagate_through_arithmetic():
    p = Precision(40)
    assert is_nan(p.nan + 1)
    assert is_nan(p.inf - p.inf)
    assert not is_finite(p.inf * 2)
    assert is_nan(p.nan * p.real(3))


def test_scientific_notation_beyond_1e6():
    p = Precision(40)
    assert "e" in to_decimal(p.real("1.25e7"), 8)
    assert "e" in to_decimal(p.real("3e-9"), 8)
    assert "e" not in to_decimal(p.real("0.001"), 8)
    assert "e" not in to_decimal(p.real("999999"), 8)
    assert to_decimal(p.real("1.7383e-1622"), 5) == "1.7383e-1622"
    assert to_decimal(p.nan) == "nan"
    assert to_decimal(-p.inf) == "-inf"


def test_complex_rendering():
    p = Precision(30)
    assert to_decimal(p.cplx(1, -2), 5).endswith("i")
    assert "-" in to_decimal(p.cplx(1, -2), 5)
    assert to_decimal(p.cplx(0, 1), 5) == "0.0+1.0i"


@pytest.mark.parametrize("text,re_im", [
    ("1.5", ("1.5", "0")),
    ("-2", ("-2", "0")),
    ("1+2i", ("1", "2")),
    ("1.5-0.25j", ("1.5", "-0.25")),
    ("2i", ("0", "2")),
    ("-i", ("0", "-1")),
    ("i", ("0", "1")),
    ("3e-2+1e-3i", ("0.03", "0.001")),
])
def test_parse_complex_forms(text, re_im):
    p = Precision(30)
    z = parse_complex(text, p)
    assert z.real == p.real(re_im[0])
    assert z.imag == p.real(re_im[1])


def test_parse_complex_rejects_garbage():
    p = Precision(30)
    with pytest.raises(ValueError):
        parse_complex("", p)
    with pytest.raises(ValueError):
        parse_complex("1+2k", p)

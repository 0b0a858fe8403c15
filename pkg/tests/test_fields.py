# tests/test_fields.py

import math

import numpy as np
import pytest

from bandkit.errors import BandError, ExpressionError
from bandkit.fields import (
    FUNCTIONS,
    BinOp,
    Call,
    Neg,
    Num,
    Var,
    compensated_density,
    evaluate,
    evaluate_array,
    field_sampler,
    gradient,
    load_image_field,
    parse_expression,
    read_pgm,
    sample_image_field,
    to_text,
)
from bandkit.noise import lattice_value, value_noise
from bandkit.schemas import FieldKind, FieldSpec, ViewRect


def write_pgm(path, rows, maxval=255):
    h, w = len(rows), len(rows[0])
    header = f"P5\n# test image\n{w} {h}\n{maxval}\n".encode("ascii")
    dtype = ">u2" if maxval > 255 else np.uint8
    path.write_bytes(header + np.array(rows, dtype=dtype).tobytes())
    return path


def test_parse_precedence():
    prog = parse_expression("1 + 2 * x")
    assert prog.ast == BinOp("+", Num(1.0), BinOp("*", Num(2.0), Var("x")))
    assert to_text(prog.ast) == "(1.0 + (2.0 * x))"


def test_power_is_right_associative_and_binds_tighter_than_minus():
    assert evaluate(parse_expression("2^3^2"), 0, 0) == 512.0
    assert evaluate(parse_expression("-2^2"), 0, 0) == -4.0
    assert evaluate(parse_expression("2^-1"), 0, 0) == 0.5
    assert parse_expression("-x").ast == Neg(Var("x"))


def test_calls_constants_and_exponent_notation():
    assert evaluate(parse_expression("sin(pi/2)"), 0, 0) == pytest.approx(1.0)
    assert evaluate(parse_expression("1.5e-3*x"), 2.0, 0) == pytest.approx(3e-3)
    assert evaluate(parse_expression("max(x, y) + t"), 1.0, 4.0, 0.5) == 4.5
    ast = parse_expression("atan2(y, x)").ast
    assert ast == Call("atan2", (Var("y"), Var("x")))


@pytest.mark.parametrize(
    "source",
    ["x*x + y", "sqrt((x - 0.5)^2 + (y - 0.5)^2)", "-(x - y) / 3", "vnoise(4*x, 4*y, 7)", "2^-x^2"],
)
def test_printed_form_parses_back(source):
    ast = parse_expression(source).ast
    assert parse_expression(to_text(ast)).ast == ast


def random_ast(rng, depth: int):
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.5:
            return Var(str(rng.choice(["x", "y", "t"])))
        return Num(float(rng.uniform(0.0, 10.0)) * 10.0 ** int(rng.integers(-15, 15)))
    kind = int(rng.integers(3))
    if kind == 0:
        return Neg(random_ast(rng, depth - 1))
    if kind == 1:
        op = str(rng.choice(list("+-*/^")))
        return BinOp(op, random_ast(rng, depth - 1), random_ast(rng, depth - 1))
    name = str(rng.choice(sorted(FUNCTIONS)))
    return Call(name, tuple(random_ast(rng, depth - 1) for _ in range(FUNCTIONS[name][0])))


def test_generated_asts_print_and_parse_back():
    rng = np.random.default_rng(20)
    for _ in range(300):
        ast = random_ast(rng, 4)
        assert parse_expression(to_text(ast)).ast == ast


def test_non_finite_literals_are_rejected():
    with pytest.raises(ExpressionError) as err:
        parse_expression("1e999*x")
    assert err.value.position == 0


def test_error_offsets_count_utf8_bytes():
    with pytest.raises(ExpressionError) as err:
        parse_expression("\u00e9 + $")
    assert err.value.position == 5


@pytest.mark.parametrize(
    "source, position",
    [
        ("1 +", 3),
        ("foo(1)", 0),
        ("sin(1, 2)", 0),
        ("x $ y", 2),
        ("(x + 1", 6),
        ("x y", 2),
        ("z + 1", 0),
    ],
)
def test_parse_errors_carry_the_offset(source, position):
    with pytest.raises(ExpressionError) as err:
        parse_expression(source)
    assert err.value.position == position


def test_evaluate_array_passes_nan_through_quietly():
    prog = parse_expression("sqrt(x) + 1/y")
    with np.errstate(all="raise"):
        out = evaluate_array(prog, np.array([-1.0, 4.0, 1.0]), np.array([1.0, 1.0, 0.0]), 0.0)
    assert math.isnan(out[0])
    assert out[1] == 3.0
    assert math.isinf(out[2])


def test_constant_expression_broadcasts():
    out = evaluate_array(parse_expression("3"), np.zeros((2, 5)), np.zeros((2, 5)), 0.0)
    assert out.shape == (2, 5)
    assert (out == 3.0).all()


def test_value_noise_hits_lattice_values_at_integers():
    assert value_noise(3.0, 5.0, 7.0) == lattice_value(3, 5, 7)
    samples = value_noise(np.linspace(-4, 4, 101), np.linspace(2, 9, 101), 11.0)
    assert ((samples >= 0.0) & (samples < 1.0)).all()


def test_value_noise_is_continuous_and_seeded():
    a = value_noise(2.999999, 0.5, 1.0)
    b = value_noise(3.0, 0.5, 1.0)
    assert abs(a - b) < 1e-5
    assert value_noise(0.3, 0.7, 1.0) != value_noise(0.3, 0.7, 2.0)
    assert value_noise(0.3, 0.7, 1.0) == value_noise(0.3, 0.7, 1.0)


def test_gradient_by_central_differences():
    gx, gy = gradient(parse_expression("x^2 + 3*y"), 1.0, 2.0, 0.0, 1e-4)
    assert gx == pytest.approx(2.0, abs=1e-6)
    assert gy == pytest.approx(3.0, abs=1e-6)


def test_compensated_density():
    assert compensated_density(parse_expression("2*x"), 0.3, 0.3, 0.0, 0.25) == pytest.approx(2.0)
    flat = compensated_density(parse_expression("1"), 0.3, 0.3, 0.0, 0.5)
    assert flat == pytest.approx(1 / (0.5 * 1e-6))


def test_read_pgm_8_and_16_bit(tmp_path):
    img = read_pgm(write_pgm(tmp_path / "a.pgm", [[0, 255], [255, 0]]))
    assert img.tolist() == [[0.0, 1.0], [1.0, 0.0]]
    img = read_pgm(write_pgm(tmp_path / "b.pgm", [[0, 65535, 32768]], maxval=65535))
    assert img.shape == (1, 3)
    assert img[0, 1] == 1.0


def test_read_pgm_rejects_other_formats(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P2\n1 1\n255\n0\n")
    with pytest.raises(BandError):
        read_pgm(path)


def test_image_field_samples_texel_centers_bilinearly(tmp_path):
    path = write_pgm(tmp_path / "a.pgm", [[0, 255], [255, 0]])
    f = load_image_field(path, ViewRect(), lo=2.0, hi=4.0)
    assert f(np.array([0.25]), np.array([0.25]))[0] == 2.0
    assert f(np.array([0.75]), np.array([0.25]))[0] == 4.0
    assert f(np.array([0.5]), np.array([0.5]))[0] == pytest.approx(3.0)
    # clamped at the edges
    assert f(np.array([0.0]), np.array([0.0]))[0] == 2.0


def test_field_sampler_kinds(tmp_path):
    view = ViewRect()
    x = np.array([0.2, 0.4])
    y = np.array([0.1, 0.1])
    const = field_sampler(FieldSpec(kind=FieldKind.const, value=3.0), view)
    assert const(x, y, 0.0).tolist() == [3.0, 3.0]

    u = field_sampler(FieldSpec(kind=FieldKind.expr, expr="4*x"), view)
    stretch = field_sampler(FieldSpec(kind=FieldKind.stretch, value=0.125), view, u=u)
    np.testing.assert_allclose(stretch(x, y, 0.0), [2.0, 2.0], rtol=1e-6)

    with pytest.raises(BandError):
        field_sampler(FieldSpec(kind=FieldKind.stretch, value=0.125), view)

    write_pgm(tmp_path / "d.pgm", [[0, 255]])
    image = field_sampler(FieldSpec(kind=FieldKind.image, path="d.pgm", lo=1.0, hi=2.0),
                          view, base_dir=tmp_path)
    assert image(np.array([0.75]), np.array([0.5]), 0.0)[0] == 2.0


def test_single_texel_image_is_constant(tmp_path):
    path = write_pgm(tmp_path / "half.pgm", [[1]], maxval=2)
    f = load_image_field(path, ViewRect(), lo=1.0, hi=3.0)
    x = np.array([0.5, 0.0, 0.99, -3.0, 7.0])
    y = np.array([0.5, 1.0, 0.01, 0.5, -2.0])
    assert sample_image_field(f, x, y).tolist() == [2.0] * 5

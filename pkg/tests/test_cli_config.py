import pytest
from hypothesis import given, settings, strategies as st

from relasym.cli.config import (
    RunConfig,
    dump_config,
    format_weight,
    load_config,
    parse_config,
    parse_weight,
)
from relasym.errors import ParseError, ValidationError
from relasym.weights import AbsPolyFactor, Constant, ExpPoly, Interval, JacobiEdge, RationalPositive

MINIMAL = """\
format_version: 1
system:
  sigma1: {interval: [-1, 1]}
  sigma2: {interval: [2, 3]}
"""


def test_minimal_defaults():
    cfg = parse_config(MINIMAL)
    assert isinstance(cfg, RunConfig)
    assert cfg.system.delta1 == Interval(-1, 1) and cfg.system.rho1 is None
    assert cfg.ray.kind == "diag" and cfg.precision.escalate
    assert cfg.fixed_point.tol == 1e-10 and cfg.outputs.figures


def test_weight_grammar():
    assert parse_weight("const(2)").factors == (Constant(2.0),)
    w = parse_weight("jacobi(0.5, -0.5) * abs(x)^2 * exp(0.5*x) * rational(2 + x, 4 + x^2)")
    kinds = [type(f) for f in w.factors]
    assert kinds == [JacobiEdge, AbsPolyFactor, ExpPoly, RationalPositive]
    assert w.factors[2].p == (0.0, 0.5)
    assert w.factors[3].den == (4.0, 0.0, 1.0)


@pytest.mark.parametrize("text,col", [("const(2", 7), ("cosh(x)", 0), ("exp(2*y)", 6)])
def test_weight_parse_error_column(text, col):
    with pytest.raises(ParseError) as ei:
        parse_weight(text)
    assert ei.value.column == col


def test_overlapping_supports():
    bad = MINIMAL.replace("[2, 3]", "[0.5, 3]")
    with pytest.raises(ValidationError, match="overlap"):
        parse_config(bad)


def test_yaml_error_position():
    text = MINIMAL + '  rho1: "const(2"\n'
    with pytest.raises(ParseError) as ei:
        parse_config(text)
    assert ei.value.line == 5


def test_unknown_key_and_bad_bits():
    with pytest.raises(ValidationError, match="line"):
        parse_config(MINIMAL + "colour: blue\n")
    with pytest.raises(ValidationError):
        parse_config(MINIMAL + "precision: {mantissa_bits: 80}\n")
    with pytest.raises(ValidationError):
        parse_config(MINIMAL).with_overrides(precision_bits=64)


def test_round_trip(tmp_path):
    for name in ("generic", "constant", "absx", "unperturbed"):
        cfg = load_config(f"configs/{name}.yaml")
        again = parse_config(dump_config(cfg))
        assert again == cfg
        p = tmp_path / f"{name}.yaml"
        p.write_text(dump_config(cfg))
        assert load_config(p) == cfg


def test_overrides():
    cfg = parse_config(MINIMAL).with_overrides(out="x", precision_bits=192, max_index=4, figures=False)
    assert cfg.outputs.dir == "x" and not cfg.outputs.figures
    assert cfg.precision.mantissa_bits == 192 and not cfg.precision.escalate
    assert max(n.size for n in cfg.indices()) <= 4


_coef = st.floats(-5, 5, allow_nan=False).map(lambda v: round(v, 3))
_factor = st.one_of(
    st.floats(0.1, 10).map(lambda v: f"const({v!r})"),
    st.tuples(st.floats(0, 3), st.floats(0, 3)).map(lambda t: f"jacobi({t[0]!r}, {t[1]!r})"),
    st.tuples(_coef, _coef).map(lambda t: f"exp({t[0]!r} {'-' if t[1] < 0 else '+'} {abs(t[1])!r}*x^2)"),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(_factor, min_size=1, max_size=4))
def test_format_parse_round_trip(parts):
    w = parse_weight(" * ".join(parts))
    assert parse_weight(format_weight(w)) == w

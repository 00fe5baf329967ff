"""Run configuration: YAML document, weight mini-grammar, canonical text.

Weight grammar (version 1), factors joined by ``*``::

    const(c)              positive constant
    jacobi(alpha, beta)   (b - x)^alpha (x - a)^beta on the host interval
    abs(p)^g              |p(x)|^g, p monic, g > 0 (``^g`` optional, default 1)
    exp(p)                exp(p(x))
    rational(p[, q])      p(x) / q(x), positive on the host interval

Polynomials are sums of terms ``c``, ``c*x``, ``c*x^k``, ``x``, ``x^k``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import yaml

from ..asymptotics import QUANTITIES, RayFamily
from ..errors import InvalidWeight, ParseError, ValidationError
from ..nikishin import NikishinPair
from ..precision import DOUBLE_BITS, EXTENDED_MIN_BITS, PrecisionConfig
from ..weights import (
    AbsPolyFactor,
    Constant,
    ExpPoly,
    Interval,
    JacobiEdge,
    MeasureSpec,
    RationalPositive,
    WeightExpr,
)

FORMAT_VERSION = 1
WEIGHT_GRAMMAR = 1

# ---------------------------------------------------------------------------
# weight grammar

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[()*^,+-]))"
)


def _tokenize(text: str):
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", None, start)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _WeightParser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            got = tok[1] or "end of text"
            raise ParseError(f"expected {want!r}, found {got!r}", None, tok[2])
        self.i += 1
        return tok

    def number(self) -> float:
        sign = 1.0
        if self.peek()[0] == "op" and self.peek()[1] in "+-":
            sign = -1.0 if self.take()[1] == "-" else 1.0
        return sign * float(self.take("num")[1])

    def monomial(self):
        """Returns (coefficient, power) of one unsigned term."""
        coef = 1.0
        tok = self.peek()
        if tok[0] == "num":
            coef = float(self.take()[1])
            if not (self.peek()[0] == "op" and self.peek()[1] == "*"):
                return coef, 0
            self.take("op", "*")
        name = self.take("name")
        if name[1] != "x":
            raise ParseError(f"unknown variable {name[1]!r}", None, name[2])
        power = 1
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            p = self.take("num")
            if not re.fullmatch(r"\d+", p[1]):
                raise ParseError("polynomial powers must be non-negative integers", None, p[2])
            power = int(p[1])
        return coef, power

    def poly(self) -> Tuple[float, ...]:
        coeffs: List[float] = []
        sign = 1.0
        first = True
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                sign = -1.0 if tok[1] == "-" else 1.0
            elif not first:
                break
            c, k = self.monomial()
            while len(coeffs) <= k:
                coeffs.append(0.0)
            coeffs[k] += sign * c
            sign = 1.0
            first = False
        return tuple(coeffs)

    def factor(self):
        name = self.take("name")
        self.take("op", "(")
        kind = name[1]
        try:
            if kind == "const":
                f = Constant(self.number())
            elif kind == "jacobi":
                a = self.number()
                self.take("op", ",")
                f = JacobiEdge(a, self.number())
            elif kind == "abs":
                p = self.poly()
                self.take("op", ")")
                g = 1.0
                if self.peek()[0] == "op" and self.peek()[1] == "^":
                    self.take()
                    g = self.number()
                return AbsPolyFactor(p, g)
            elif kind == "exp":
                f = ExpPoly(self.poly())
            elif kind == "rational":
                num = self.poly()
                den = (1.0,)
                if self.peek()[0] == "op" and self.peek()[1] == ",":
                    self.take()
                    den = self.poly()
                f = RationalPositive(num, den)
            else:
                raise ParseError(f"unknown factor {kind!r}", None, name[2])
        except InvalidWeight as err:
            raise ValidationError(f"invalid factor {kind}(...): {err}") from err
        self.take("op", ")")
        return f

    def weight(self) -> WeightExpr:
        factors = [self.factor()]
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            self.take()
            factors.append(self.factor())
        self.take("end")
        return WeightExpr(tuple(factors))


def parse_weight(text: str) -> WeightExpr:
    """Parse one weight expression; ParseError columns are 0-based offsets into ``text``."""
    return _WeightParser(str(text)).weight()


def format_poly(p) -> str:
    parts = []
    for k, c in enumerate(p):
        if c == 0.0 and len(p) > 1:
            continue
        mag = repr(abs(float(c)))
        term = mag if k == 0 else (f"{mag}*x" if k == 1 else f"{mag}*x^{k}")
        if not parts:
            parts.append(("-" if c < 0 else "") + term)
        else:
            parts.append(("- " if c < 0 else "+ ") + term)
    return " ".join(parts)


def format_factor(f) -> str:
    if isinstance(f, Constant):
        return f"const({f.c!r})"
    if isinstance(f, JacobiEdge):
        return f"jacobi({f.alpha!r}, {f.beta!r})"
    if isinstance(f, AbsPolyFactor):
        return f"abs({format_poly(f.p)})^{f.gamma!r}"
    if isinstance(f, ExpPoly):
        return f"exp({format_poly(f.p)})"
    if isinstance(f, RationalPositive):
        return f"rational({format_poly(f.num)}, {format_poly(f.den)})"
    raise TypeError(f"unknown factor {f!r}")


def format_weight(w: WeightExpr) -> str:
    """Canonical text; ``parse_weight(format_weight(w)) == w``."""
    if not w.factors:
        return "const(1.0)"
    return " * ".join(format_factor(f) for f in w.factors)


# ---------------------------------------------------------------------------
# run configuration


@dataclass(frozen=True)
class PrecisionSettings:
    """``mantissa_bits`` None means the automatic ladder with escalation."""

    mantissa_bits: Optional[int] = None
    quad_order: Optional[int] = None

    def config_for(self, degree: int) -> PrecisionConfig:
        cfg = PrecisionConfig.for_degree(degree, self.mantissa_bits)
        if self.quad_order is not None:
            cfg = replace(cfg, quad_order=max(self.quad_order, cfg.quad_order))
        return cfg

    @property
    def escalate(self) -> bool:
        return self.mantissa_bits is None


@dataclass(frozen=True)
class FixedPointSettings:
    tol: float = 1e-10
    M: int = 64
    max_iter: int = 200


@dataclass(frozen=True)
class AsymptoticsSettings:
    quantities: Tuple[str, ...] = QUANTITIES
    contour_points: int = 16


@dataclass(frozen=True)
class BaselineSettings:
    n_lo: int = 4
    n_hi: int = 40
    point: float = 2.0
    constant: float = 3.0
    mnt_weight: WeightExpr = field(default_factory=lambda: parse_weight("abs(x)"))


@dataclass(frozen=True)
class OutputSettings:
    dir: str = "out"
    figures: bool = True


@dataclass(frozen=True)
class RunConfig:
    system: NikishinPair
    ray: RayFamily = RayFamily("diag", 1, 6)
    max_index: Optional[int] = None
    precision: PrecisionSettings = PrecisionSettings()
    fixed_point: FixedPointSettings = FixedPointSettings()
    asymptotics: AsymptoticsSettings = AsymptoticsSettings()
    baseline: BaselineSettings = BaselineSettings()
    outputs: OutputSettings = OutputSettings()
    cache_dir: Optional[str] = None

    def with_overrides(self, out=None, precision_bits=None, max_index=None, figures=None) -> "RunConfig":
        cfg = self
        if out is not None:
            cfg = replace(cfg, outputs=replace(cfg.outputs, dir=str(out)))
        if figures is not None:
            cfg = replace(cfg, outputs=replace(cfg.outputs, figures=bool(figures)))
        if precision_bits is not None:
            _check_bits(precision_bits, "--precision-bits")
            cfg = replace(cfg, precision=replace(cfg.precision, mantissa_bits=int(precision_bits)))
        if max_index is not None:
            if max_index < 0:
                raise ValidationError("--max-index must be non-negative")
            cfg = replace(cfg, max_index=int(max_index))
        return cfg

    def indices(self):
        return self.ray.indices(self.max_index)


def _check_bits(bits, where):
    if not isinstance(bits, int) or isinstance(bits, bool) or not (
        bits == DOUBLE_BITS or bits >= EXTENDED_MIN_BITS
    ):
        raise ValidationError(f"{where}: mantissa bits must be {DOUBLE_BITS} or >= {EXTENDED_MIN_BITS}, got {bits!r}")


# -- YAML walking with positions ----------------------------------------------


class _Doc:
    def __init__(self, text: str):
        self.loader = yaml.SafeLoader(text)
        try:
            self.root = self.loader.get_single_node()
        except yaml.MarkedYAMLError as err:
            mark = err.problem_mark or err.context_mark
            raise ParseError(err.problem or str(err), mark.line + 1, mark.column + 1) from err
        except yaml.YAMLError as err:
            raise ParseError(str(err)) from err

    @staticmethod
    def where(node) -> str:
        return f"line {node.start_mark.line + 1}, column {node.start_mark.column + 1}"

    def mapping(self, node, path: str, allowed) -> dict:
        if not isinstance(node, yaml.MappingNode):
            raise ValidationError(f"{path} must be a mapping ({self.where(node)})")
        out = {}
        for k, v in node.value:
            key = self.loader.construct_object(k, deep=True)
            if key not in allowed:
                raise ValidationError(f"unknown key {path}.{key} ({self.where(k)})")
            if key in out:
                raise ValidationError(f"duplicate key {path}.{key} ({self.where(k)})")
            out[key] = v
        return out

    def value(self, node):
        return self.loader.construct_object(node, deep=True)

    def number(self, node, path, kind=float, positive=False):
        v = self.value(node)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or (kind is int and not isinstance(v, int)):
            raise ValidationError(f"{path} must be {'an integer' if kind is int else 'a number'} ({self.where(node)})")
        if positive and not v > 0:
            raise ValidationError(f"{path} must be positive ({self.where(node)})")
        return kind(v)

    def weight(self, node, path) -> WeightExpr:
        text = self.value(node)
        if not isinstance(text, str):
            raise ValidationError(f"{path} must be a weight expression string ({self.where(node)})")
        try:
            return parse_weight(text)
        except ParseError as err:
            quote = 1 if node.style in ("'", '"') else 0
            col = node.start_mark.column + 1 + quote + (err.column or 0)
            raise ParseError(f"{path}: {err.message}", node.start_mark.line + 1, col) from err


def _measure(doc: _Doc, node, path) -> MeasureSpec:
    m = doc.mapping(node, path, ("interval", "weight"))
    if "interval" not in m:
        raise ValidationError(f"{path}.interval is required")
    iv = doc.value(m["interval"])
    if not (isinstance(iv, list) and len(iv) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in iv)):
        raise ValidationError(f"{path}.interval must be [a, b] ({doc.where(m['interval'])})")
    if not iv[0] < iv[1]:
        raise ValidationError(f"{path}.interval needs a < b ({doc.where(m['interval'])})")
    interval = Interval(float(iv[0]), float(iv[1]))
    w = doc.weight(m["weight"], f"{path}.weight") if "weight" in m else MeasureSpec(interval).weight
    return MeasureSpec(interval, w)


def _range(doc: _Doc, node, path):
    v = doc.value(node)
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(t, int) and not isinstance(t, bool) for t in v)):
        raise ValidationError(f"{path} must be [lo, hi] integers ({doc.where(node)})")
    if not 0 <= v[0] <= v[1]:
        raise ValidationError(f"{path} needs 0 <= lo <= hi ({doc.where(node)})")
    return v[0], v[1]


def parse_config(text: str) -> RunConfig:
    doc = _Doc(text)
    if doc.root is None:
        raise ValidationError("empty configuration")
    top = doc.mapping(doc.root, "config", (
        "format_version", "weight_grammar", "system", "ray", "precision", "fixed_point",
        "asymptotics", "baseline", "outputs", "cache_dir",
    ))
    for key, want in (("format_version", FORMAT_VERSION), ("weight_grammar", WEIGHT_GRAMMAR)):
        if key in top and doc.value(top[key]) != want:
            raise ValidationError(f"{key} must be {want} ({doc.where(top[key])})")
    if "system" not in top:
        raise ValidationError("config.system is required")
    s = doc.mapping(top["system"], "system", ("sigma1", "sigma2", "rho1", "rho2"))
    for key in ("sigma1", "sigma2"):
        if key not in s:
            raise ValidationError(f"system.{key} is required")
    sigma1 = _measure(doc, s["sigma1"], "system.sigma1")
    sigma2 = _measure(doc, s["sigma2"], "system.sigma2")
    if sigma1.interval.intersects(sigma2.interval):
        raise ValidationError(f"supports overlap: {sigma1.interval} and {sigma2.interval}")
    rho1 = doc.weight(s["rho1"], "system.rho1") if "rho1" in s else None
    rho2 = doc.weight(s["rho2"], "system.rho2") if "rho2" in s else None
    system = NikishinPair(sigma1, sigma2, rho1, rho2)
    try:
        system.validate()
    except InvalidWeight as err:
        raise ValidationError(f"invalid weight: {err}") from err

    kw = {"system": system}
    if "ray" in top:
        r = doc.mapping(top["ray"], "ray", ("kind", "m", "max_index"))
        kind = doc.value(r["kind"]) if "kind" in r else "diag"
        if kind not in ("diag", "step"):
            raise ValidationError(f"ray.kind must be 'diag' or 'step' ({doc.where(r['kind'])})")
        lo, hi = _range(doc, r["m"], "ray.m") if "m" in r else (1, 6)
        kw["ray"] = RayFamily(kind, lo, hi)
        if "max_index" in r and doc.value(r["max_index"]) is not None:
            kw["max_index"] = doc.number(r["max_index"], "ray.max_index", int)
    if "precision" in top:
        p = doc.mapping(top["precision"], "precision", ("mantissa_bits", "quad_order"))
        bits = doc.value(p["mantissa_bits"]) if "mantissa_bits" in p else None
        if bits is not None:
            _check_bits(bits, "precision.mantissa_bits")
        order = doc.value(p["quad_order"]) if "quad_order" in p else None
        if order is not None:
            order = doc.number(p["quad_order"], "precision.quad_order", int, positive=True)
        kw["precision"] = PrecisionSettings(bits, order)
    if "fixed_point" in top:
        f = doc.mapping(top["fixed_point"], "fixed_point", ("tol", "M", "max_iter"))
        d = FixedPointSettings()
        kw["fixed_point"] = FixedPointSettings(
            doc.number(f["tol"], "fixed_point.tol", float, True) if "tol" in f else d.tol,
            doc.number(f["M"], "fixed_point.M", int, True) if "M" in f else d.M,
            doc.number(f["max_iter"], "fixed_point.max_iter", int, True) if "max_iter" in f else d.max_iter,
        )
    if "asymptotics" in top:
        a = doc.mapping(top["asymptotics"], "asymptotics", ("quantities", "contour_points"))
        d = AsymptoticsSettings()
        qs = d.quantities
        if "quantities" in a:
            qs = doc.value(a["quantities"])
            if not (isinstance(qs, list) and qs and all(q in QUANTITIES for q in qs)):
                raise ValidationError(f"asymptotics.quantities must list tags from {QUANTITIES} ({doc.where(a['quantities'])})")
            qs = tuple(qs)
        cp = doc.number(a["contour_points"], "asymptotics.contour_points", int, True) if "contour_points" in a else d.contour_points
        kw["asymptotics"] = AsymptoticsSettings(qs, cp)
    if "baseline" in top:
        b = doc.mapping(top["baseline"], "baseline", ("n", "point", "constant", "mnt_weight"))
        d = BaselineSettings()
        lo, hi = _range(doc, b["n"], "baseline.n") if "n" in b else (d.n_lo, d.n_hi)
        point = doc.number(b["point"], "baseline.point") if "point" in b else d.point
        if abs(point) <= 1:
            raise ValidationError("baseline.point must lie off [-1, 1]")
        const = doc.number(b["constant"], "baseline.constant", float, True) if "constant" in b else d.constant
        g = doc.weight(b["mnt_weight"], "baseline.mnt_weight") if "mnt_weight" in b else d.mnt_weight
        kw["baseline"] = BaselineSettings(lo, hi, point, const, g)
    if "outputs" in top:
        o = doc.mapping(top["outputs"], "outputs", ("dir", "figures"))
        d = OutputSettings()
        figs = doc.value(o["figures"]) if "figures" in o else d.figures
        if not isinstance(figs, bool):
            raise ValidationError("outputs.figures must be true or false")
        kw["outputs"] = OutputSettings(str(doc.value(o["dir"])) if "dir" in o else d.dir, figs)
    if "cache_dir" in top:
        v = doc.value(top["cache_dir"])
        kw["cache_dir"] = None if v is None else str(v)
    return RunConfig(**kw)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _measure_dict(m: MeasureSpec) -> dict:
    return {"interval": [m.interval.a, m.interval.b], "weight": format_weight(m.weight)}


def config_dict(cfg: RunConfig) -> dict:
    sys = cfg.system
    system = {"sigma1": _measure_dict(sys.sigma1), "sigma2": _measure_dict(sys.sigma2)}
    if sys.rho1 is not None:
        system["rho1"] = format_weight(sys.rho1)
    if sys.rho2 is not None:
        system["rho2"] = format_weight(sys.rho2)
    return {
        "format_version": FORMAT_VERSION,
        "weight_grammar": WEIGHT_GRAMMAR,
        "system": system,
        "ray": {"kind": cfg.ray.kind, "m": [cfg.ray.m_lo, cfg.ray.m_hi], "max_index": cfg.max_index},
        "precision": {"mantissa_bits": cfg.precision.mantissa_bits, "quad_order": cfg.precision.quad_order},
        "fixed_point": {"tol": cfg.fixed_point.tol, "M": cfg.fixed_point.M, "max_iter": cfg.fixed_point.max_iter},
        "asymptotics": {"quantities": list(cfg.asymptotics.quantities),
                        "contour_points": cfg.asymptotics.contour_points},
        "baseline": {"n": [cfg.baseline.n_lo, cfg.baseline.n_hi], "point": cfg.baseline.point,
                     "constant": cfg.baseline.constant, "mnt_weight": format_weight(cfg.baseline.mnt_weight)},
        "outputs": {"dir": cfg.outputs.dir, "figures": cfg.outputs.figures},
        "cache_dir": cfg.cache_dir,
    }


def dump_config(cfg: RunConfig) -> str:
    """Canonical YAML text; ``parse_config(dump_config(c)) == c``."""
    return yaml.safe_dump(config_dict(cfg), sort_keys=False, default_flow_style=None, width=1000)

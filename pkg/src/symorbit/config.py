"""Experiment configuration: a flat ``key=value`` grammar with ``#`` comments.

Every key is declared in :data:`SCHEMA`; unknown keys, duplicates and
malformed values are rejected with a line- or field-precise
:class:`~symorbit.errors.ConfigError`. The resolved configuration (user
values plus defaults) serialises back into the same grammar, which is what
the CLI writes into artifact headers.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

from .beta import BetaSpec, build_beta_shift
from .errors import ConfigError, SymorbitError
from .metric import Potential
from .shifts import GapSet, SftSpec, SubshiftSpec, build_full_shift, build_s_gap, build_sft

COMMANDS = (
    "entropy", "pressure", "dimension", "gapcheck", "cover", "construct",
    "subsystem", "beta", "orbit", "furstenberg",
)
SHIFT_KINDS = ("full", "sft", "beta", "sgap")
BETA_OPS = ("expand1", "admissible", "full", "digits")


# --- value parsers ----------------------------------------------------------------------------


def _int(lo: int) -> Callable[[str], int]:
    def parse(text: str) -> int:
        v = int(text)
        if v < lo:
            raise ValueError(f"must be at least {lo}")
        return v

    return parse


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise ValueError("must be positive")
    return v


def _choice(options) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return text

    return parse


def _text(text: str) -> str:
    if not text:
        raise ValueError("must be nonempty")
    return text


def _digits_list(text: str) -> str:
    for part in text.split(","):
        if not part or not part.isdigit():
            raise ValueError("expected comma-separated digit words")
    return text


def _beta(text: str) -> str:
    BetaSpec.parse(text)
    return text


def _gaps(text: str) -> str:
    GapSet.parse(text)
    return text


_FACTOR = re.compile(r"^(?:log\((?P<q>[0-9/]+)\)|log(?P<k>[0-9]+)|(?P<sym>logbeta|logm|top|htop)|(?P<num>[0-9.eE+-]+))$")


def _real_expr(text: str) -> str:
    """Products like ``0.5*log2``, ``log(3/2)``, ``0.75*top`` or plain decimals."""
    for part in text.split("*"):
        mt = _FACTOR.match(part.strip())
        if not mt:
            raise ValueError(f"cannot read {part!r} as a number, logK, log(p/q), logbeta, logm or top")
        if mt.group("num") is not None:
            float(mt.group("num"))
    return text


def _rational(text: str) -> str:
    if text.startswith("champernowne:"):
        base, _, k = text.split(":", 1)[1].partition(":")
        int(base), int(k)
        return text
    q = Fraction(text)
    if not 0 <= q < 1:
        raise ValueError("x must lie in [0, 1)")
    return text


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], object]
    default: Optional[str] = None
    help: str = ""


SCHEMA: dict[str, Key] = {
    "cmd": Key(_choice(COMMANDS), None, "command to run"),
    "shift.kind": Key(_choice(SHIFT_KINDS), None, "full | sft | beta | sgap"),
    "shift.m": Key(_int(1), None, "alphabet size (full, sft)"),
    "shift.forbid": Key(_digits_list, None, "forbidden words, comma separated (sft)"),
    "shift.beta": Key(_beta, None, "golden | integer:K | quadratic:a,b,c,d | rational:p/q | decimal:s@digits"),
    "shift.gaps": Key(_gaps, None, "allowed gap set such as 0,2,4+ (sgap)"),
    "potential.const": Key(_real_expr, "logm", "constant potential value"),
    "potential.table": Key(_text, None, "file with 'word value' lines (depth-k table)"),
    "nmax": Key(_int(1), "20", "largest word length"),
    "tol": Key(_positive_float, "0.0001", "bisection tolerance"),
    "gamma": Key(_positive_float, "1", "weight gamma in -gamma*phi"),
    "rho": Key(_positive_float, None, "cover scale in (0, 1)"),
    "h": Key(_real_expr, None, "target entropy (number, 0.5*log2, top, 0.5*top)"),
    "l1": Key(_int(1), None, "brick length hint"),
    "length": Key(_int(1), None, "prefix length"),
    "depth": Key(_int(1), "12", "complexity table depth / digit depth"),
    "seed": Key(_int(0), "0", "64-bit seed"),
    "alpha": Key(_real_expr, None, "target dimension"),
    "epsilon": Key(_positive_float, None, "dimension tolerance"),
    "n1": Key(_real_expr, None, "diameter scale n_1 (e.g. 10*log2)"),
    "beta.op": Key(_choice(BETA_OPS), None, "expand1 | admissible | full | digits"),
    "word": Key(_digits_list, None, "digit word(s) for beta admissible/full"),
    "x": Key(_rational, None, "point NUM/DEN or champernowne:BASE:K"),
    "base": Key(_int(2), None, "digit base"),
    "p": Key(_int(2), None, "first base"),
    "q": Key(_int(2), None, "second base"),
    "out": Key(_text, None, "output path (stdout when absent)"),
}

REQUIRED: dict[str, tuple] = {
    "entropy": ("shift.kind",),
    "pressure": ("shift.kind",),
    "dimension": ("shift.kind",),
    "gapcheck": ("shift.kind",),
    "cover": ("shift.kind", "rho"),
    "construct": ("shift.kind", "h", "length"),
    "subsystem": ("shift.kind", "alpha", "epsilon", "n1"),
    "beta": ("shift.beta", "beta.op"),
    "orbit": ("x", "base"),
    "furstenberg": ("x", "p", "q"),
}


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=dict)  # raw strings, validated

    def get(self, key: str, default=None):
        if key in self.values:
            return self.values[key]
        spec = SCHEMA[key]
        return spec.default if spec.default is not None else default

    def resolved(self) -> dict:
        """User values plus every default, as strings."""
        out = {k: s.default for k, s in SCHEMA.items() if s.default is not None}
        out.update(self.values)
        return dict(sorted(out.items()))

    def dump(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.resolved().items())

    # typed accessors
    def int(self, key: str) -> Optional[int]:
        v = self.get(key)
        return None if v is None else int(v)

    def float(self, key: str) -> Optional[float]:
        v = self.get(key)
        return None if v is None else float(v)

    @property
    def cmd(self) -> str:
        return self.values["cmd"]


def _parse_lines(text: str) -> list[tuple[int, str, str]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {line!r}", line=lineno)
        key, _, value = line.partition("=")
        out.append((lineno, key.strip(), value.strip()))
    return out


def merge(base: dict, text: str) -> dict:
    """Apply ``key=value`` lines on top of ``base`` (later values win within a layer only once)."""
    seen = set()
    merged = dict(base)
    for lineno, key, value in _parse_lines(text):
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", line=lineno, field=key)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r}", line=lineno, field=key)
        seen.add(key)
        try:
            SCHEMA[key].parse(value)
        except (ValueError, ZeroDivisionError, SymorbitError) as exc:
            raise ConfigError(str(exc), line=lineno, field=key) from None
        merged[key] = value
    return merged


def validate(values: dict) -> ExperimentConfig:
    """Cross-field checks; returns the config or raises with the offending field."""
    for key, value in values.items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", field=key)
        try:
            SCHEMA[key].parse(value)
        except (ValueError, ZeroDivisionError, SymorbitError) as exc:
            raise ConfigError(str(exc), field=key) from None
    if "shift.beta" in values and values.get("shift.kind", "beta") != "beta":
        raise ConfigError("shift.beta is only valid with shift.kind=beta", field="shift.beta")
    cmd = values.get("cmd")
    if cmd is not None:
        for key in REQUIRED[cmd]:
            if key not in values:
                if key == "shift.beta" and values.get("shift.kind") == "beta":
                    continue
                raise ConfigError(f"command {cmd} needs {key}", field=key)
    kind = values.get("shift.kind")
    needs = {"full": ("shift.m",), "sft": ("shift.forbid",), "beta": ("shift.beta",), "sgap": ("shift.gaps",)}
    for key in needs.get(kind, ()):
        if key not in values:
            raise ConfigError(f"shift.kind={kind} needs {key}", field=key)
    if "rho" in values and not 0 < float(values["rho"]) < 1:
        raise ConfigError("rho must lie in (0, 1)", field="rho")
    return ExperimentConfig(dict(values))


def parse_config(text: str) -> ExperimentConfig:
    return validate(merge({}, text))


# --- building objects -------------------------------------------------------------------------------


def compact_shift(text: str) -> dict:
    """``full:3``, ``sft:11,101`` (optionally ``@m``), ``beta:golden``, ``sgap:0,2+`` to config keys."""
    kind, _, arg = text.partition(":")
    if kind == "full":
        return {"shift.kind": "full", "shift.m": arg or "2"}
    if kind == "sft":
        words, _, m = arg.partition("@")
        out = {"shift.kind": "sft", "shift.forbid": words}
        if m:
            out["shift.m"] = m
        return out
    if kind == "beta":
        return {"shift.kind": "beta", "shift.beta": arg}
    if kind == "sgap":
        return {"shift.kind": "sgap", "shift.gaps": arg}
    raise ConfigError(f"unrecognised shift {text!r}", field="shift")


def build_shift(cfg: ExperimentConfig) -> SubshiftSpec:
    kind = cfg.get("shift.kind")
    try:
        if kind == "full":
            return build_full_shift(cfg.int("shift.m"))
        if kind == "sft":
            words = tuple(tuple(int(c) for c in w) for w in cfg.get("shift.forbid").split(","))
            m = cfg.int("shift.m") or max(2, max(max(w) for w in words) + 1)
            return build_sft(SftSpec(m, forbidden=words))
        if kind == "beta":
            return build_beta_shift(beta_spec(cfg))
        if kind == "sgap":
            return build_s_gap(GapSet.parse(cfg.get("shift.gaps")))
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        if isinstance(exc, SymorbitError) and exc.exit_class != "config":
            raise
        raise ConfigError(str(exc), field="shift") from None
    raise ConfigError("no shift configured", field="shift.kind")


def beta_spec(cfg: ExperimentConfig) -> BetaSpec:
    try:
        return BetaSpec.parse(cfg.get("shift.beta"))
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc), field="shift.beta") from None


def _factor_value(part: str, shift: Optional[SubshiftSpec], top: Optional[float]):
    """``(float, exact multiplier or None, is_log)`` for one factor."""
    mt = _FACTOR.match(part.strip())
    if mt.group("num") is not None:
        return float(mt.group("num")), None, False
    if mt.group("k") is not None:
        k = int(mt.group("k"))
        return math.log(k), Fraction(k), True
    if mt.group("q") is not None:
        q = Fraction(mt.group("q"))
        return math.log(q), q, True
    sym = mt.group("sym")
    if sym == "logm":
        if shift is None:
            raise ConfigError("logm needs a shift", field="potential.const")
        if "beta" in shift.params:
            beta = shift.params["beta"]
            return math.log(float(beta)), _exact_beta(beta), True
        return math.log(shift.m), Fraction(shift.m), True
    if sym == "logbeta":
        if shift is None or "beta" not in shift.params:
            raise ConfigError("logbeta needs a beta shift", field="potential.const")
        beta = shift.params["beta"]
        return math.log(float(beta)), _exact_beta(beta), True
    if top is None:
        raise ConfigError("'top' is only meaningful for a target entropy", field="h")
    return top, None, False


def _exact_beta(beta: BetaSpec):
    from .exact import RationalInterval

    return None if isinstance(beta.value, RationalInterval) else beta.value


def real_value(text: str, shift: Optional[SubshiftSpec] = None, top: Optional[float] = None) -> float:
    value = 1.0
    for part in text.split("*"):
        value *= _factor_value(part, shift, top)[0]
    return value


def build_potential(cfg: ExperimentConfig, shift: SubshiftSpec) -> Potential:
    table = cfg.get("potential.table")
    if table is not None and "potential.const" in cfg.values:
        raise ConfigError("give potential.const or potential.table, not both", field="potential.table")
    if table is not None:
        return load_potential_table(Path(table), shift.m)
    text = cfg.get("potential.const")
    parts = text.split("*")
    if len(parts) == 1:
        value, mult, is_log = _factor_value(parts[0], shift, None)
        if is_log and mult is not None:
            if not mult > 1:
                raise ConfigError("potential must be strictly positive", field="potential.const")
            return Potential.constant(shift.m, multiplier=mult, label=text)
    else:
        value = real_value(text, shift)
    if not value > 0:
        raise ConfigError("potential must be strictly positive", field="potential.const")
    return Potential.constant(shift.m, value, label=text)


def load_potential_table(path: Path, m: int) -> Potential:
    """Lines ``word value``; values are ``logK``, ``log(p/q)`` or decimals."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read potential table: {exc}", field="potential.table") from None
    floats, mults = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            word, value = line.split()
            w = tuple(int(c) for c in word)
            f, mult, is_log = _factor_value(value, None, None)
        except (ValueError, AttributeError):
            raise ConfigError(f"expected 'word value', got {line!r}", line=lineno, field="potential.table") from None
        if any(c >= m for c in w):
            raise ConfigError(f"symbol outside alphabet in {word}", line=lineno, field="potential.table")
        floats[w] = f
        mults[w] = mult if is_log else None
    if not floats:
        raise ConfigError("potential table is empty", field="potential.table")
    try:
        if all(v is not None for v in mults.values()):
            return Potential.from_multipliers(m, mults, label=str(path))
        return Potential.from_values(m, floats, label=str(path))
    except ValueError as exc:
        raise ConfigError(str(exc), field="potential.table") from None

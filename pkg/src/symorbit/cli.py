"""Command-line front end.

Each command resolves an :class:`~symorbit.config.ExperimentConfig` from an
optional config file, ``--set key=value`` pairs and flags (flags win), runs
one experiment and writes a CSV whose ``#`` header block carries the tool
version, the seed and the full resolved config. Errors exit with the code of
their class and print one JSON record on stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import __version__
from .beta import expansion_of_one, full_word_verdict, is_admissible_beta
from .config import (
    COMMANDS,
    ExperimentConfig,
    beta_spec,
    build_potential,
    build_shift,
    compact_shift,
    merge,
    real_value,
    validate,
)
from .errors import ConfigError, SymorbitError
from .forge import (
    construct_dense_point,
    construct_subsystem_step1,
    generate_prefix,
    plan_intermediate_entropy,
)
from .metric import build_cover
from .probe import champernowne_stream, furstenberg_profile, orbit_closure_profile
from .thermo import entropy_estimate, family_counts, log_z_table, pressure_gap_check, solve_dimension_gamma
from .words import complexity_table, word_str

# flag name -> config key
FLAGS = {
    "nmax": "nmax", "tol": "tol", "gamma": "gamma", "rho": "rho", "h": "h", "l1": "l1",
    "length": "length", "depth": "depth", "seed": "seed", "alpha": "alpha", "epsilon": "epsilon",
    "n1": "n1", "word": "word", "x": "x", "base": "base", "p": "p", "q": "q", "out": "out",
    "potential": "potential.const", "potential-table": "potential.table", "beta": "shift.beta",
}


def fmt(x) -> str:
    """12 significant digits for floats, exact text for integers and rationals."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return f"{x:.12g}"
    return str(x)


class Artifact:
    """A CSV table plus trailing summary comment lines."""

    def __init__(self, columns):
        self.columns = list(columns)
        self.rows: list = []
        self.summary: dict = {}

    def add(self, *row):
        self.rows.append(row)

    def render(self, cfg: ExperimentConfig) -> str:
        buf = io.StringIO()
        buf.write(header_block(cfg))
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([fmt(v) for v in row])
        if self.summary:
            buf.write("# summary " + " ".join(f"{k}={fmt(v)}" for k, v in self.summary.items()) + "\n")
        return buf.getvalue()


def header_block(cfg: ExperimentConfig) -> str:
    lines = [f"symorbit {__version__}", f"seed={cfg.get('seed')}", "config:"]
    lines += cfg.dump().splitlines()
    return "".join(f"# {line}\n" for line in lines)


def config_from_header(text: str) -> ExperimentConfig:
    """Re-parse the resolved config embedded in an artifact header."""
    body, inside = [], False
    for line in text.splitlines():
        if not line.startswith("# "):
            break
        line = line[2:]
        if line == "config:":
            inside = True
        elif inside:
            body.append(line)
    return validate(merge({}, "\n".join(body)))


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- commands ---------------------------------------------------------------------------------------


def cmd_entropy(cfg: ExperimentConfig) -> Artifact:
    shift = build_shift(cfg)
    n_max = cfg.int("nmax")
    est = entropy_estimate(shift, n_max)
    g = None
    if shift.has_structure:
        g = [r[1] for r in est.table] if shift.params.get("core_is_language") else family_counts(shift, "G", n_max)
    art = Artifact(["n", "count", "rate", "lower", "upper"])
    lower, upper = -math.inf, math.inf
    for n, count, rate in est.table:
        upper = min(upper, rate)
        if g is not None and g[n - 1] > 0:
            lower = max(lower, math.log(g[n - 1]) / (n + shift.tau))
        art.add(n, count, rate, lower, upper)
    art.summary = {"rate": est.rate, "lower": est.lower, "upper": est.upper, "method": est.method}
    return art


def cmd_pressure(cfg: ExperimentConfig) -> Artifact:
    shift = build_shift(cfg)
    phi = build_potential(cfg, shift)
    gamma = cfg.float("gamma")
    n_max = cfg.int("nmax")
    table = log_z_table(shift, None, phi, -gamma, n_max)
    glued = log_z_table(shift, "G", phi, -gamma, n_max, sup=False) if shift.has_structure else None
    tau = shift.tau or 0
    span = tau * max(abs(phi.max_value), abs(phi.min_value)) * gamma
    art = Artifact(["n", "value", "rate", "lower", "upper"])
    lower, upper = -math.inf, math.inf
    for n in range(1, n_max + 1):
        value = float(table[n - 1])
        rate = value / n
        upper = min(upper, rate)
        if glued is not None and math.isfinite(glued[n - 1]):
            lower = max(lower, (float(glued[n - 1]) - span) / (n + tau))
        art.add(n, value, rate, lower, upper)
    art.summary = {"gamma": gamma, "pressure": art.rows[-1][2], "lower": lower, "upper": upper}
    return art


def cmd_dimension(cfg: ExperimentConfig) -> Artifact:
    shift = build_shift(cfg)
    phi = build_potential(cfg, shift)
    root = solve_dimension_gamma(shift, phi, cfg.int("nmax"), cfg.float("tol"))
    art = Artifact(["n", "gamma", "correction", "lower", "upper"])
    art.add(root.n_max, root.gamma, root.correction, root.lower, root.upper)
    art.summary = {"gamma": root.gamma, "iterations": root.iterations}
    return art


def cmd_gapcheck(cfg: ExperimentConfig) -> Artifact:
    shift = build_shift(cfg)
    phi = build_potential(cfg, shift)
    rep = pressure_gap_check(shift, phi, cfg.float("gamma"), cfg.int("nmax"))
    art = Artifact(["n", "z_n", "partial_sum", "ratio"])
    for n, (z, s) in enumerate(zip(rep.values, rep.partial_sums), start=1):
        ratio = rep.ratios[n - 2] if n >= 2 and n - 2 < len(rep.ratios) else float("nan")
        art.add(n, z, s, ratio)
    art.summary = {"total": rep.total, "verdict": rep.verdict}
    return art


def cmd_cover(cfg: ExperimentConfig) -> Artifact:
    shift = build_shift(cfg)
    phi = build_potential(cfg, shift)
    cover = build_cover(shift, phi, Fraction(cfg.get("rho")))
    cover.check()
    art = Artifact(["member", "length", "diameter"])
    for w in cover.members:
        art.add(word_str(w) or "-", len(w), float(cover.diameters[w]))
    art.summary = {"members": len(cover), "c_rho": cover.c_rho}
    return art


def _target_entropy(cfg: ExperimentConfig, shift) -> tuple[float, bool]:
    text = cfg.get("h")
    top = None
    if "top" in text:
        top = entropy_estimate(shift, 16).rate
        if "beta" in shift.params:
            top = math.log(float(shift.params["beta"]))
        elif shift.params.get("core_is_language") and shift.kind == "full":
            top = math.log(shift.m)
    return real_value(text, shift, top), text in ("top", "htop")


def cmd_construct(cfg: ExperimentConfig):
    shift = build_shift(cfg)
    h, is_top = _target_entropy(cfg, shift)
    length = cfg.int("length")
    depth = cfg.int("depth")
    summary: dict = {"h": h}
    if is_top:
        word = construct_dense_point(shift, length)
        summary["mode"] = "dense"
    else:
        plan = plan_intermediate_entropy(shift, h, cfg.int("l1"), seed=cfg.int("seed"))
        word = generate_prefix(plan, shift, length)
        lo, hi = plan.bracket()
        summary.update(mode="tower", l1=plan.l1, n1=plan.n1, tau=plan.tau, lower=lo, upper=hi)
    art = Artifact(["n", "p_w"])
    for n, c in enumerate(complexity_table(word, min(depth, len(word)), m=shift.m), start=1):
        art.add(n, c)
    art.summary = summary
    return art, word_str(word) + "\n"


def cmd_subsystem(cfg: ExperimentConfig) -> Artifact:
    shift = build_shift(cfg)
    phi = build_potential(cfg, shift)
    alpha = real_value(cfg.get("alpha"), shift)
    n1 = real_value(cfg.get("n1"), shift)
    plan = construct_subsystem_step1(shift, phi, alpha, cfg.float("epsilon"), n1)
    art = Artifact(["index", "word"])
    for i, w in enumerate(plan.A1):
        art.add(i, word_str(w))
    art.summary = {
        "count": plan.count, "stratum": plan.stratum, "rate": plan.rate, "lower": plan.lower,
        "upper": plan.upper, "C": plan.C, "C_prime": plan.C_prime, "tau": plan.tau,
    }
    return art


def cmd_beta(cfg: ExperimentConfig) -> Artifact:
    beta = beta_spec(cfg)
    op = cfg.get("beta.op")
    depth = cfg.int("depth")
    if op in ("expand1", "digits"):
        if op == "expand1":
            exp = expansion_of_one(beta, depth)
            digits = exp.digits
            summary = {"expansion": str(exp), "finite": exp.finite}
        else:
            from .beta import beta_digits_of_real

            if cfg.get("x") is None:
                raise ConfigError("beta digits needs x", field="x")
            digits = beta_digits_of_real(Fraction(cfg.get("x")), beta, depth)
            summary = {"digits": word_str(digits)}
        art = Artifact(["k", "digit"])
        for k, d in enumerate(digits, start=1):
            art.add(k, int(d))
        art.summary = summary
        return art
    words = cfg.get("word")
    if words is None:
        raise ConfigError(f"beta {op} needs word", field="word")
    if op == "admissible":
        art = Artifact(["word", "admissible"])
        for w in words.split(","):
            art.add(w, is_admissible_beta(beta, tuple(int(c) for c in w)))
        return art
    art = Artifact(["word", "full", "certain"])
    for w in words.split(","):
        word = tuple(int(c) for c in w)
        if not is_admissible_beta(beta, word):
            raise ConfigError(f"{w} is not admissible", field="word")
        full, certain = full_word_verdict(beta, word)
        art.add(w, full, certain)
    return art


def _point(cfg: ExperimentConfig, base: int):
    text = cfg.get("x")
    if text.startswith("champernowne:"):
        b, _, k = text.split(":", 1)[1].partition(":")
        stream = champernowne_stream(int(b), int(k))
        if stream.base != base:
            raise ConfigError(f"stream is in base {stream.base}, not {base}", field="x")
        return stream
    return Fraction(text)


def _profile_rows(art: Artifact, prof, base=None):
    for n, c, d in prof.table:
        art.add(*(((base,) if base is not None else ()) + (n, c, d)))


def cmd_orbit(cfg: ExperimentConfig) -> Artifact:
    base = cfg.int("base")
    prof = orbit_closure_profile(_point(cfg, base), base, cfg.int("nmax"))
    art = Artifact(["n", "p_x", "dim_estimate"])
    _profile_rows(art, prof)
    art.summary = {"dim": prof.dim, "exact": prof.exact, "periodic": prof.periodic}
    if prof.periodic:
        art.summary.update(preperiod=prof.preperiod, period=prof.period)
    return art


def cmd_furstenberg(cfg: ExperimentConfig) -> Artifact:
    p, q = cfg.int("p"), cfg.int("q")
    x = _point(cfg, p)
    rep = furstenberg_profile(x, p, q, cfg.int("nmax"))
    art = Artifact(["base", "n", "p_x", "dim_estimate"])
    _profile_rows(art, rep.profile_p, p)
    if rep.profile_q is not None:
        _profile_rows(art, rep.profile_q, q)
    dim_q = rep.profile_q.dim if rep.profile_q is not None else float("nan")
    exact = rep.profile_p.exact and (rep.profile_q is not None and rep.profile_q.exact)
    if rep.s is None:
        verdict = "incomplete"
    elif exact:
        verdict = "exact"
    else:
        verdict = "estimate"
    art.summary = {
        "dim_p": rep.profile_p.dim, "dim_q": dim_q, "s": rep.s if rep.s is not None else float("nan"),
        "verdict": verdict, "dependence": "dependent" if rep.dependence.dependent else "independent",
    }
    return art


RUNNERS = {
    "entropy": cmd_entropy, "pressure": cmd_pressure, "dimension": cmd_dimension,
    "gapcheck": cmd_gapcheck, "cover": cmd_cover, "construct": cmd_construct,
    "subsystem": cmd_subsystem, "beta": cmd_beta, "orbit": cmd_orbit, "furstenberg": cmd_furstenberg,
}


def run(cfg: ExperimentConfig, stdout=None) -> int:
    """Execute one validated config; returns the exit code (errors propagate)."""
    stdout = stdout or sys.stdout
    result = RUNNERS[cfg.cmd](cfg)
    stream = None
    if isinstance(result, tuple):
        result, stream = result
    text = result.render(cfg)
    out = cfg.get("out")
    if cfg.cmd == "construct":
        if out is None:
            stdout.write(stream)
            return 0
        # the stream file is the primary artifact, the CSV is its sidecar
        atomic_write(Path(out + ".csv"), text)
        atomic_write(Path(out), stream)
        return 0
    if out is None:
        stdout.write(text)
    else:
        atomic_write(Path(out), text)
        if result.summary:
            stdout.write(text.splitlines()[-1] + "\n")
    return 0


# --- argument handling -----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symorbit", description="Symbolic dynamics experiments.")
    parser.add_argument("--version", action="version", version=f"symorbit {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "beta":
            p.add_argument("op", choices=["expand1", "admissible", "full", "digits"])
        p.add_argument("--config", help="config file with key=value lines")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")
        p.add_argument("--shift", help="full:M | sft:W1,W2[@M] | beta:SPEC | sgap:S")
        for flag in FLAGS:
            p.add_argument(f"--{flag}", dest=flag.replace("-", "_"))
    return parser


def resolve(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        values = merge(values, text)
    layer = {"cmd": args.cmd}
    if args.cmd == "beta":
        layer["beta.op"] = args.op
    if args.shift:
        layer.update(compact_shift(args.shift))
    for flag, key in FLAGS.items():
        v = getattr(args, flag.replace("-", "_"))
        if v is not None:
            layer[key] = v
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        layer[key.strip()] = value.strip()
    if args.cmd == "beta" and "shift.beta" in layer:
        layer.setdefault("shift.kind", "beta")
    if args.shift and layer.get("shift.kind") != values.get("shift.kind"):
        # a new shift on the command line replaces every shift key from the file
        values = {k: v for k, v in values.items() if not k.startswith("shift.")}
    # flags win over the file; they carry a field name but no line number
    merged = {k: v for k, v in values.items() if k not in layer}
    merged.update(layer)
    return validate(merged)


def error_record(exc: BaseException) -> dict:
    rec = {
        "error": type(exc).__name__,
        "class": getattr(exc, "exit_class", "internal"),
        "code": getattr(exc, "exit_code", 1),
        "message": str(exc),
    }
    if isinstance(exc, ConfigError):
        rec["line"], rec["field"] = exc.line, exc.field
    return rec


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        return run(cfg)
    except SymorbitError as exc:
        sys.stderr.write(json.dumps(error_record(exc)) + "\n")
        return exc.exit_code
    except (ValueError, ArithmeticError) as exc:
        # domain errors raised by constructors are configuration problems
        rec = error_record(exc)
        rec.update({"class": "config", "code": 2})
        sys.stderr.write(json.dumps(rec) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

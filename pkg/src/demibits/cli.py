"""Batch experiment runner.

Config files are line oriented::

    seed 7
    cap 24
    format report          # or csv
    output results.txt     # relative to the config file; stdout when absent
    input circuits.net
    task demi_break generator=par adversary=D
    task reduce:stretch_reduction generator=dup N=2 c=1/2 adversary=D

Adversaries are named ``<circuit>[:<mode>]``; the mode defaults to ``func``
for two-output circuits, ``nondet`` when the circuit has witnesses and
``det`` otherwise.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import learner, reduction, sweeps
from .circuit import (Circuit, EvalMode, cap_limit, enumeration_cap, format_circuit, output_table,
                      parse_circuits, truth_table)
from .errors import (CapExceeded, ContractViolation, FormatError, NetlistError, WorkbenchError)
from .generator import Generator, StretchParams, Table, format_generator, image, parse_tables, stretch
from .measure import (Adversary, BreakReport, demi_break, hsg_check, hsg_report, predictor_success,
                      super_core_terms, super_report)

EXIT_OK, EXIT_CONTRACT, EXIT_PRECONDITION, EXIT_CAP = 0, 1, 2, 3
_SEVERITY = {EXIT_OK: 0, EXIT_PRECONDITION: 1, EXIT_CAP: 2, EXIT_CONTRACT: 3}

TASK_KINDS = ("advantage", "demi_break", "hsg", "predict", "supercore_terms", "stretch", "learn")
REDUCTIONS = (
    "stretch_reduction", "io_reduction", "cap_predictor_to_distinguisher",
    "distinguisher_to_cup_predictors", "cap_to_both", "supercore_attack_from_distinguisher",
    "distinguisher_from_supercore_attack", "distinguisher_from_hardbit_predictor",
    "injective_attack", "supercore_implies_hardcore_check",
)


def worse(a: int, b: int) -> int:
    return a if _SEVERITY[a] >= _SEVERITY[b] else b


def rat(x: Fraction | int) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def show(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (Fraction, int)) and not isinstance(value, bool):
        return rat(value)
    return str(value)


# ---------------------------------------------------------------- config

@dataclass(frozen=True)
class TaskSpec:
    kind: str
    params: dict[str, str]
    line: int

    def describe(self) -> str:
        return " ".join([self.kind] + [f"{k}={v}" for k, v in self.params.items()])


@dataclass
class ExperimentConfig:
    inputs: list[Path] = field(default_factory=list)
    tasks: list[TaskSpec] = field(default_factory=list)
    cap: int | None = None
    output: Path | None = None
    seed: int = 0
    format: str = "report"


def parse_config(text: str, base: Path = Path(".")) -> ExperimentConfig:
    cfg = ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if key == "seed":
                cfg.seed = int(rest)
                if cfg.seed < 0 or cfg.seed >= 1 << 64:
                    raise ValueError("seed must fit in 64 unsigned bits")
            elif key == "cap":
                cfg.cap = int(rest)
            elif key == "output":
                cfg.output = base / rest
            elif key == "format":
                if rest not in ("report", "csv"):
                    raise ValueError(f"unknown format {rest!r}")
                cfg.format = rest
            elif key == "input":
                cfg.inputs.append(base / rest)
            elif key == "task":
                cfg.tasks.append(_parse_task(rest, lineno))
            else:
                raise ValueError(f"unknown directive {key!r}")
        except ValueError as exc:
            raise FormatError(f"config line {lineno}: {exc}") from None
    return cfg


def _parse_task(rest: str, lineno: int) -> TaskSpec:
    parts = rest.split()
    if not parts:
        raise ValueError("task needs a kind")
    kind = parts[0]
    if kind.startswith("reduce:"):
        if kind[7:] not in REDUCTIONS:
            raise ValueError(f"unknown reduction {kind[7:]!r}")
    elif kind not in TASK_KINDS:
        raise ValueError(f"unknown task kind {kind!r}")
    params = {}
    for item in parts[1:]:
        k, eq, v = item.partition("=")
        if not eq or not k:
            raise ValueError(f"expected key=value, got {item!r}")
        params[k] = v
    return TaskSpec(kind, params, lineno)


_TABLE_HEADER = re.compile(r"(generator|function)\s")
_CIRCUIT_HEADER = re.compile(r"circuit\s+\S+\s+in=")


@dataclass
class Workspace:
    circuits: dict[str, Circuit] = field(default_factory=dict)
    generators: dict[str, Generator] = field(default_factory=dict)
    functions: dict[str, Table] = field(default_factory=dict)

    def load(self, text: str, source: str = "<text>") -> None:
        """Split a file into circuit blocks and table blocks, parse circuits first."""
        lines = text.splitlines()
        starts: list[tuple[int, str]] = []
        for k, raw in enumerate(lines):
            line = raw.split("#", 1)[0].strip()
            if _CIRCUIT_HEADER.match(line):
                starts.append((k, "circuit"))
            elif _TABLE_HEADER.match(line):
                starts.append((k, "table"))
            elif line and not starts:
                raise FormatError(f"{source} line {k + 1}: expected a circuit or generator header")
        spans = [(k, kind, starts[j + 1][0] if j + 1 < len(starts) else len(lines))
                 for j, (k, kind) in enumerate(starts)]
        for k, kind, end in spans:
            if kind == "circuit":
                for c in parse_circuits("\n".join(lines[k:end]), first_line=k + 1):
                    self._add(self.circuits, c.name, c, source)
        for k, kind, end in spans:
            if kind == "table":
                for t in parse_tables("\n".join(lines[k:end]), self.circuits, first_line=k + 1):
                    if isinstance(t, Table):
                        self._add(self.functions, t.label, t, source)
                    else:
                        self._add(self.generators, t.label, t, source)

    @staticmethod
    def _add(store: dict, name: str, value, source: str) -> None:
        if name in store:
            raise FormatError(f"{source}: {name!r} defined twice")
        store[name] = value

    def circuit(self, name: str) -> Circuit:
        if name not in self.circuits:
            raise FormatError(f"unknown circuit {name!r}")
        return self.circuits[name]

    def adversary(self, ref: str) -> Adversary:
        name, _, mode = ref.partition(":")
        c = self.circuit(name)
        if not mode:
            mode = "func" if c.n_out == 2 else ("nondet" if c.n_wit else "det")
        return Adversary(c, EvalMode(mode))

    def generator(self, name: str) -> Generator:
        if name in self.generators:
            return self.generators[name]
        if name in self.circuits:
            c = self.circuits[name]
            return Generator(c.n_std, c.n_out, circuit=c, label=name)
        raise FormatError(f"unknown generator {name!r}")

    def table(self, name: str) -> Table:
        if name in self.functions:
            return self.functions[name]
        if name in self.circuits:
            c = self.circuits[name]
            return Table(c.n_std, c.n_out, output_table(c), name)
        if name in self.generators:
            return self.generators[name].table
        raise FormatError(f"unknown function {name!r}")


# ---------------------------------------------------------------- task execution

class Section:
    """Ordered (field, value) pairs for one task, rendered as report text or CSV rows."""

    def __init__(self, index: int, spec: TaskSpec) -> None:
        self.index = index
        self.spec = spec
        self.items: list[tuple[str, str]] = []
        self.status = EXIT_OK
        self.blocks: list[str] = []

    def add(self, key: str, value) -> None:
        self.items.append((key, show(value)))

    def block(self, text: str) -> None:
        self.blocks.append(text.rstrip("\n"))

    def render(self) -> str:
        out = [f"[task {self.index}] {self.spec.describe()}"]
        out += [f"{k}: {v}" for k, v in self.items]
        out += self.blocks
        return "\n".join(out) + "\n"

    def csv_rows(self) -> list[list[str]]:
        return [[str(self.index), self.spec.kind, k, v] for k, v in self.items]


def _need(params: dict[str, str], *keys: str) -> list[str]:
    missing = [k for k in keys if k not in params]
    if missing:
        raise FormatError(f"missing parameter(s): {', '.join(missing)}")
    return [params[k] for k in keys]


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"not a rational number: {text!r}") from None


def _report_break(sec: Section, rep: BreakReport) -> None:
    sec.add("kind", rep.kind.value)
    sec.add("generator", rep.generator)
    sec.add("adversary", rep.adversary)
    sec.add("advantage", rep.advantage)
    sec.add("p_random", rep.p_random)
    sec.add("p_image", rep.p_image)
    sec.add("zero_on_image", rep.zero_on_image)
    sec.add("is_break", rep.is_break)
    sec.add("s_witness", "-" if rep.s_witness is None else str(rep.s_witness))
    sec.add("adversary_size", str(rep.adversary_size))
    sec.add("size_ok", "-" if rep.size_ok is None else rep.size_ok)


def cross_check(cert: reduction.ReductionCertificate) -> bool:
    """Reparse every emitted netlist and compare its truth table with the in-memory circuit."""
    for _, adv in cert.outputs:
        (again,) = parse_circuits(format_circuit(adv.circuit))
        if not np.array_equal(truth_table(again, adv.mode), adv.table()):
            return False
    return True


def _report_cert(sec: Section, cert: reduction.ReductionCertificate) -> None:
    sec.add("construction", cert.construction)
    for k, c in enumerate(cert.clauses, start=1):
        sec.add(f"contract_{k}", c.contract)
        sec.add(f"lhs_{k}", c.lhs)
        sec.add(f"relation_{k}", c.relation)
        sec.add(f"rhs_{k}", c.rhs)
        sec.add(f"holds_{k}", c.holds)
    if cert.trace is not None:
        t = cert.trace
        sec.add("i_star", str(t.i_star))
        sec.add("gaps", " ".join(rat(g) for g in t.gaps))
        sec.add("threshold", t.threshold)
        sec.add("telescopes", t.telescopes)
    for key in sorted(cert.extras):
        sec.add(key, cert.extras[key])
    sec.add("recheck", cross_check(cert))
    sec.add("holds", cert.holds)
    for label, adv in cert.outputs:
        sec.block(f"adversary {label} mode={adv.mode.value}\n{format_circuit(adv.circuit)}")
    if not cert.holds:
        sec.status = EXIT_CONTRACT


def _task_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1, np.uint64)[0])


def run_task(ws: Workspace, sec: Section, seed: int) -> None:
    p = sec.spec.params
    kind = sec.spec.kind
    if kind == "advantage":
        D, g = ws.adversary(_need(p, "adversary")[0]), ws.generator(_need(p, "generator")[0])
        _report_break(sec, super_report(D, g))
    elif kind == "demi_break":
        D, g = ws.adversary(_need(p, "adversary")[0]), ws.generator(_need(p, "generator")[0])
        _report_break(sec, demi_break(D, g))
    elif kind == "hsg":
        D, g = ws.adversary(_need(p, "adversary")[0]), ws.generator(_need(p, "generator")[0])
        threshold = _frac(p.get("threshold", f"1/{g.l}"))
        sec.add("verdict", hsg_check(g, D, threshold).value)
        sec.add("threshold", threshold)
        _report_break(sec, hsg_report(g, D, threshold))
    elif kind == "predict":
        A, g = ws.adversary(_need(p, "adversary")[0]), ws.generator(_need(p, "generator")[0])
        i = int(_need(p, "i")[0])
        sec.add("mode", A.mode.value)
        sec.add("success", predictor_success(A, g, i))
    elif kind == "supercore_terms":
        f, b = ws.table(_need(p, "f")[0]), ws.table(_need(p, "b")[0])
        A1, A2 = ws.adversary(_need(p, "a1")[0]), ws.adversary(_need(p, "a2")[0])
        inv_p = _frac(p["inv_p"]) if "inv_p" in p else None
        t = super_core_terms(A1, A2, f, b, inv_p)
        for name in ("t1", "t2", "t3", "t4"):
            sec.add(name, getattr(t, name))
        sec.add("total", t.total)
        if inv_p is not None:
            sec.add("star", t.star)
            sec.add("diamond", t.diamond)
    elif kind == "stretch":
        b = ws.generator(_need(p, "generator")[0])
        params = StretchParams(int(_need(p, "N")[0]), _frac(_need(p, "c")[0]))
        g = stretch(b, params)
        for key in ("m", "n", "rem", "out_len"):
            sec.add(key, str(getattr(params, key)))
        sec.add("image_size", str(len(image(g))))
        sec.block(format_generator(Generator(g.n, g.l, table=g.values, label=g.label)))
    elif kind == "learn":
        _run_learn(ws, sec, seed)
    else:
        _run_reduction(ws, sec, kind[len("reduce:"):], seed)


def _run_learn(ws: Workspace, sec: Section, seed: int) -> None:
    p = sec.spec.params
    D, C = ws.adversary(_need(p, "adversary")[0]), ws.circuit(_need(p, "target")[0])
    m = int(_need(p, "m")[0])
    s = int(p["s"]) if "s" in p else None
    mode = p.get("mode", "exhaustive")
    samples = int(p.get("samples", "0"))
    out = learner.verify_learning_bound(D, C, m, s, mode, samples, seed=seed)
    trace = learner.hybrid_gap_scan(D, C, m)
    for run in out.runs:
        sec.add(f"run i={run.i} r={run.r} x={'.'.join(run.x_blocks) or '-'}", run.accuracy)
    sec.add("mode", out.mode.value)
    sec.add("advantage", out.advantage)
    sec.add("s", str(out.s))
    sec.add("accuracy_threshold", out.accuracy_threshold)
    sec.add("confidence", out.confidence)
    sec.add("statement_bound", out.statement_bound)
    sec.add("meets_statement_bound", out.meets_bound)
    sec.add("proof_bound", out.proof_bound)
    sec.add("meets_proof_bound", out.meets_proof_bound)
    sec.add("gaps", " ".join(rat(g) for g in trace.gaps))
    sec.add("telescopes", trace.telescopes)
    if out.is_estimate:
        sec.add("note", out.notes[0])
    if not (out.meets_bound and trace.telescopes):
        sec.status = EXIT_CONTRACT


def _run_reduction(ws: Workspace, sec: Section, name: str, seed: int) -> None:
    p = sec.spec.params
    R = reduction
    if name == "stretch_reduction" and "sweep" in p:
        rows: list[str] = []
        summary = sweeps.run_stretch_sweep(
            seed, rows,
            n_values=tuple(range(1, int(p.get("nmax", "2")) + 1)),
            N_max=int(p.get("Nmax", "4")),
            exhaustive_len=int(p.get("exhaustive_len", "4")),
            random_subsets=int(p.get("random_subsets", "2")),
            random_circuits=int(p.get("random", "120")),
        )
        sec.add("cases", str(summary.cases))
        for fam in sorted(summary.by_family):
            sec.add(f"cases_{fam}", str(summary.by_family[fam]))
        sec.add("failures", str(summary.failures))
        sec.add("telescopes", summary.telescoping_ok)
        sec.add("padding_ignored", summary.padding_ok)
        sec.add("holds", summary.passed)
        sec.block("\n".join([sweeps.SWEEP_HEADER] + rows))
        if not summary.passed:
            sec.status = EXIT_CONTRACT
        return
    if name == "stretch_reduction":
        D, b = ws.adversary(_need(p, "adversary")[0]), ws.generator(_need(p, "generator")[0])
        params = StretchParams(int(_need(p, "N")[0]), _frac(_need(p, "c")[0]))
        _, cert = R.stretch_reduction(D, b, params)
    elif name == "io_reduction":
        D = ws.adversary(_need(p, "adversary")[0])
        family = [ws.generator(x) for x in _need(p, "family")[0].split(",")]
        _, cert = R.io_reduction(D, family, int(_need(p, "n")[0]), int(p["s"]) if "s" in p else None)
    elif name in ("cap_predictor_to_distinguisher", "cap_to_both"):
        A, g = ws.adversary(_need(p, "adversary")[0]), ws.generator(_need(p, "generator")[0])
        i = int(_need(p, "i")[0])
        cert = getattr(R, name)(A, g, i)[-1]
    elif name == "distinguisher_to_cup_predictors":
        D, g = ws.adversary(_need(p, "adversary")[0]), ws.generator(_need(p, "generator")[0])
        cert = R.distinguisher_to_cup_predictors(D, g)[-1]
    elif name == "injective_attack":
        f, b = ws.table(_need(p, "f")[0]), ws.table(_need(p, "b")[0])
        cert = R.injective_attack(f, b, _frac(p["inv_p"]) if "inv_p" in p else None)[-1]
    else:
        f, b = ws.table(_need(p, "f")[0]), ws.table(_need(p, "b")[0])
        A = ws.adversary(_need(p, "adversary")[0])
        if name == "supercore_implies_hardcore_check":
            cert = R.supercore_implies_hardcore_check(f, b, A)
        elif name == "distinguisher_from_supercore_attack":
            cert = R.distinguisher_from_supercore_attack(A, f, b, p.get("side", "star"))[-1]
        else:
            cert = getattr(R, name)(A, f, b)[-1]
    _report_cert(sec, cert)


def _classify(exc: Exception) -> tuple[int, str]:
    if isinstance(exc, ContractViolation):
        return EXIT_CONTRACT, "contract-violation"
    if isinstance(exc, CapExceeded):
        return EXIT_CAP, "cap-exceeded"
    if isinstance(exc, (WorkbenchError, ValueError, IndexError)):
        return EXIT_PRECONDITION, "error"
    raise exc


@dataclass
class RunResult:
    status: int
    text: str


def execute(cfg: ExperimentConfig, *, timestamp: str | None = None) -> RunResult:
    """Load inputs, run every task in order, and assemble the report text."""
    ws = Workspace()
    for path in cfg.inputs:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise FormatError(f"cannot read {path}: {exc.strerror}") from None
        ws.load(text, str(path))
    stamp = timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    status = EXIT_OK
    sections = []
    cap = cfg.cap if cfg.cap is not None else enumeration_cap()
    with cap_limit(cap):
        for index, spec in enumerate(cfg.tasks, start=1):
            sec = Section(index, spec)
            try:
                run_task(ws, sec, _task_seed(cfg.seed, index))
            except Exception as exc:  # noqa: BLE001 - classified or re-raised
                code, label = _classify(exc)
                sec.status = worse(sec.status, code)
                sec.add("status", f"{label}: {type(exc).__name__}: {exc}")
            else:
                sec.add("status", "ok" if sec.status == EXIT_OK else "contract-violation")
            status = worse(status, sec.status)
            sections.append(sec)
    out = io.StringIO()
    out.write(f"# generated {stamp}\n")
    if cfg.format == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["task", "kind", "field", "value"])
        for sec in sections:
            writer.writerows(sec.csv_rows())
    else:
        out.write(f"seed: {cfg.seed}\ncap: {cap}\ntasks: {len(sections)}\n")
        for sec in sections:
            out.write("\n" + sec.render())
    return RunResult(status, out.getvalue())


def strip_timestamp(text: str) -> str:
    """Report text without its first (timestamp) line."""
    return text.split("\n", 1)[1] if text.startswith("# generated") else text


# ---------------------------------------------------------------- entry points

def _cmd_run(args: argparse.Namespace) -> int:
    path = Path(args.config)
    try:
        cfg = parse_config(path.read_text(encoding="utf-8"), path.parent)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.cap is not None:
            cfg.cap = args.cap
        if args.format is not None:
            cfg.format = args.format
        if args.output is not None:
            cfg.output = Path(args.output)
        result = execute(cfg)
    except (OSError, FormatError, NetlistError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    if cfg.output is None:
        sys.stdout.write(result.text)
    else:
        cfg.output.write_text(result.text, encoding="utf-8")
    return result.status


def _cmd_selftest(args: argparse.Namespace) -> int:
    from .selftest import run_selftest
    with cap_limit(args.cap if args.cap is not None else enumeration_cap()):
        return run_selftest(mutant=args.mutant, seed=args.seed or 0, out=sys.stdout)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cap", type=int, help="enumeration cap in bits (default 24)")
    common.add_argument("--seed", type=int, help="RNG seed, overrides the config")
    parser = argparse.ArgumentParser(prog="demibits", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--format", choices=("report", "csv"))
    run.add_argument("-o", "--output", help="report path, overrides the config")
    run.set_defaults(func=_cmd_run)
    st = sub.add_parser("selftest", parents=[common], help="run the built-in invariant suite")
    st.add_argument("--mutant", choices=("miswired-stretch",),
                    help="substitute a deliberately mis-wired reduction; the suite must catch it")
    st.set_defaults(func=_cmd_selftest)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())

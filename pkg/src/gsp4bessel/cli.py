"""Command-line interface.

Subcommands
-----------
chartab   build the character table and report its shape
table     multiplicity tables: --model N (one row per irreducible) or
          --model R (sweep over the torus characters of one datum)
verify    run a verification suite; exit 1 with a minimal counterexample
          on failure
bench     compare the compiled and numpy kernel backends

Every flag has an environment override with the GSP4B_ prefix
(GSP4B_Q, GSP4B_FORMAT, GSP4B_OUT, GSP4B_CACHE, GSP4B_THREADS,
GSP4B_SEED, GSP4B_MEM_BUDGET); command-line values win.  The kernel
backend is chosen by GSP4B_KERNELS (auto/py/c).

Reports are deterministic: running a command twice writes byte-identical
output (bench is the exception, it reports wall-clock timings).  JSON is
emitted with sorted keys; CSV with a header row, UTF-8, LF line ends.
Field elements appear in JSON both as their index and as a polynomial
rendering.  Exit codes: 0 success, 1 verification failure, 2 usage error
or refusal (unsupported q, degenerate datum, memory budget exceeded).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import bessel
from .chartab import build_character_table
from .conj import (
    canonical_form_2x2,
    conjugacy_classes,
    orbit_partition_exhaustive,
    tn_type,
)
from .ffield import Field, FieldError, make_field
from .gsp4 import (
    DEFAULT_MEM_BUDGET,
    DegenerateDatumError,
    classify_datum,
    group_order,
    n_matrix,
    subgroup_T,
)
from . import kernels

SUITES = ("lemmas", "canonical-forms", "types", "table-n", "table-r", "corollary")


class CliError(Exception):
    """Usage error or refusal; maps to exit code 2."""


def _env(name: str, default):
    raw = os.environ.get("GSP4B_" + name)
    return default if raw is None or raw == "" else raw


def _parse_q(q: int) -> tuple:
    for p in (2, 3, 5, 7, 11, 13):
        if q % p == 0:
            n = 0
            v = q
            while v % p == 0:
                v //= p
                n += 1
            if v != 1:
                break
            return p, n
    raise CliError(f"q={q} is not a supported prime power")


@dataclass
class RunConfig:
    """Resolved invocation parameters shared by all subcommands."""

    p: int
    n: int
    command: str
    out: str | None
    format: str
    cache: str | None
    threads: int
    mem_budget: int
    seed: int

    @property
    def q(self) -> int:
        return self.p**self.n

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        if args.q is not None:
            p, n = _parse_q(args.q)
        else:
            p, n = args.p, args.n
        threads = int(args.threads)
        if threads < 1:
            raise CliError("--threads must be at least 1")
        return cls(
            p=p,
            n=n,
            command=args.command,
            out=args.out,
            format=args.format,
            cache=args.cache,
            threads=threads,
            mem_budget=int(args.mem_budget),
            seed=int(args.seed),
        )


def element_json(field: Field, v) -> dict:
    """Both renderings of a field element, for JSON reports."""
    return {"index": int(v), "poly": field.poly_str(v)}


def field_record_hash(field: Field) -> str:
    """Content hash of the field presentation; cache files embed it so a
    changed presentation can never be confused with a cached table."""
    record = json.dumps(
        {
            "p": field.p,
            "n": field.n,
            "modulus": list(int(c) for c in field.modulus),
            "generator": int(field.generator),
            "xi": int(field.xi),
        },
        sort_keys=True,
    )
    return hashlib.sha256(record.encode()).hexdigest()[:16]


def cache_path_for(field: Field, kind: str, cache_dir: str) -> str:
    name = f"chartab-{kind}-q{field.q}-{field_record_hash(field)}.json"
    return os.path.join(cache_dir, name)


def _build_table(cfg: RunConfig, field: Field):
    order = group_order(field.q, "gsp")
    cache = None
    if cfg.cache:
        os.makedirs(cfg.cache, exist_ok=True)
        cache = cache_path_for(field, "gsp", cfg.cache)
    try:
        return build_character_table(field, "gsp", cache_path=cache)
    except MemoryError as exc:
        raise CliError(
            f"group of order {order} at q={field.q} does not fit the memory "
            f"budget ({cfg.mem_budget} bytes): {exc}"
        )


# ------------------------------------------------------------------ formatting


def _emit(cfg: RunConfig, text: str) -> None:
    data = text if text.endswith("\n") else text + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data)


def render_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def render_csv(rows: list, columns: list) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in columns})
    return buf.getvalue()


def read_report(text: str, fmt: str):
    """Parse a report produced by this CLI: the round-trip companion of the
    json and csv writers."""
    if fmt == "json":
        return json.loads(text)
    if fmt == "csv":
        rows = list(csv.DictReader(io.StringIO(text)))
        out = []
        for row in rows:
            typed = {}
            for k, v in row.items():
                try:
                    typed[k] = int(v)
                except (TypeError, ValueError):
                    typed[k] = v
            out.append(typed)
        return out
    raise CliError(f"no parser for format {fmt!r}")


# ----------------------------------------------------------------- subcommands


def cmd_chartab(cfg: RunConfig) -> int:
    field = make_field(cfg.p, cfg.n)
    table = _build_table(cfg, field)
    degrees = [int(d) for d in table.degrees]
    report = {
        "q": field.q,
        "p": field.p,
        "n": field.n,
        "modulus": field.modulus_str(),
        "kind": table.kind,
        "group_order": table.group_order,
        "n_classes": int(table.values.shape[1]),
        "n_characters": table.n_chars,
        "conductor": table.e,
        "working_prime": table.ell,
        "degrees": degrees,
    }
    if cfg.format == "json":
        _emit(cfg, render_json(report))
    elif cfg.format == "csv":
        rows = [{"row": i, "degree": d} for i, d in enumerate(degrees)]
        _emit(cfg, render_csv(rows, ["row", "degree"]))
    else:
        lines = [
            f"character table of GSp(4,{field.q})  (order {report['group_order']})",
            f"classes: {report['n_classes']}  characters: {report['n_characters']}",
            f"conductor: {report['conductor']}  working prime: {report['working_prime']}",
            "degrees: " + " ".join(str(d) for d in degrees),
        ]
        _emit(cfg, "\n".join(lines))
    return 0


def _table_n_rows(engine: bessel.HomEngine) -> tuple:
    report = bessel.match_table_n(engine)
    cols = list(report.columns)
    rows = []
    for r in report.rows:
        row = {"q": report.q, "row": r.index, "degree": r.degree}
        for c in cols:
            row[c] = r.dims[c]
        row["generic"] = int(r.generic)
        row["cuspidal"] = int(r.cuspidal)
        row["matches"] = "|".join(r.matches)
        rows.append(row)
    return report, cols, rows


def cmd_table(cfg: RunConfig, args) -> int:
    field = make_field(cfg.p, cfg.n)
    table = _build_table(cfg, field)
    engine = bessel.HomEngine(table)
    if args.model == "N":
        report, cols, rows = _table_n_rows(engine)
        columns = ["q", "row", "degree", *cols, "generic", "cuspidal", "matches"]
        if cfg.format == "json":
            _emit(cfg, render_json(report.to_dict()))
        elif cfg.format == "csv":
            _emit(cfg, render_csv(rows, columns))
        else:
            head = f"{'row':>4} {'degree':>7} " + " ".join(f"{c:>18}" for c in cols)
            lines = [head + "  gen cusp  matches"]
            for r in rows:
                line = f"{r['row']:>4} {r['degree']:>7} " + " ".join(
                    f"{r[c]:>18}" for c in cols
                )
                line += f"  {r['generic']:>3} {r['cuspidal']:>4}  {r['matches']}"
                lines.append(line)
            _emit(cfg, "\n".join(lines))
        return 0

    # model R
    a, b, c = args.a, args.b, args.c
    for name, v in (("a", a), ("b", b), ("c", c)):
        if not 0 <= v < field.q:
            raise CliError(f"--{name}={v} is not an element index of F_{field.q}")
    try:
        res = engine.hom_dim_R_all(a, b, c)
    except DegenerateDatumError as exc:
        raise CliError(str(exc))
    ctx = res.context
    chis = ctx.charset.chis
    chosen = range(len(chis))
    if args.chi is not None:
        if not 0 <= args.chi < len(chis):
            raise CliError(
                f"--chi={args.chi} out of range, torus has {len(chis)} characters"
            )
        chosen = [args.chi]
    rows = []
    for ci in chosen:
        for t in range(engine.table.n_chars):
            rows.append(
                {
                    "q": field.q,
                    "a": a,
                    "b": b,
                    "c": c,
                    "torus": "split" if ctx.datum.split else "nonsplit",
                    "chi_index": ci,
                    "chi_label": chis[ci].label,
                    "row": t,
                    "degree": int(engine.table.degrees[t]),
                    "dim": int(res.dims[ci, t]),
                }
            )
    if cfg.format == "json":
        payload = {
            "q": field.q,
            "datum": {
                "a": element_json(field, a),
                "b": element_json(field, b),
                "c": element_json(field, c),
            },
            "rank_class": ctx.datum.rank_class,
            "torus": "split" if ctx.datum.split else "nonsplit",
            "torus_order": ctx.torus.order,
            "characters": [
                {"index": i, "kind": ch.kind, "params": list(ch.params)}
                for i, ch in enumerate(chis)
            ],
            "rows": rows,
        }
        _emit(cfg, render_json(payload))
    elif cfg.format == "csv":
        columns = [
            "q", "a", "b", "c", "torus",
            "chi_index", "chi_label", "row", "degree", "dim",
        ]
        _emit(cfg, render_csv(rows, columns))
    else:
        lines = [
            f"datum (a,b,c)=({a},{b},{c})  class {ctx.datum.rank_class}  "
            f"torus {'split' if ctx.datum.split else 'nonsplit'} of order {ctx.torus.order}"
        ]
        for ci in chosen:
            nonzero = [
                f"row {t} (deg {int(engine.table.degrees[t])}): {int(res.dims[ci, t])}"
                for t in range(engine.table.n_chars)
                if res.dims[ci, t]
            ]
            lines.append(f"chi[{ci}] = ({chis[ci].label}): " + "; ".join(nonzero))
        _emit(cfg, "\n".join(lines))
    return 0


# ------------------------------------------------------------- verify suites


def _suite_lemmas(cfg: RunConfig, field: Field):
    """Closed locus sums against brute force, all q^3 data; no group needed."""
    q = field.q
    for a in range(q):
        for b in range(q):
            for c in range(q):
                br = bessel.brute_locus_sums(field, a, b, c)
                want = {"cone": bessel.cone_sum(field, a, b, c)}
                if field.p != 2:
                    want["square"] = bessel.square_locus_sum(field, a, b, c)
                    want["nonsquare"] = bessel.nonsquare_locus_sum(field, a, b, c)
                else:
                    ax, off = bessel.even_locus_sums(field, a, b, c)
                    want["axis"] = ax
                    want["off_axis"] = off
                for name in want:
                    if br[name] != want[name]:
                        return False, {"checked": q**3}, {
                            "datum": [a, b, c],
                            "locus": name,
                            "brute": br[name],
                            "closed": want[name],
                        }
    return True, {"checked": q**3}, None


def _suite_canonical_forms(cfg: RunConfig, field: Field):
    """Exhaustive orbit partition against the constructive classifier."""
    q = field.q
    ids = orbit_partition_exhaustive(field)
    labels = []
    for x in range(q):
        for y in range(q):
            for z in range(q):
                labels.append(canonical_form_2x2(field, x, y, z))
    by_label: dict = {}
    for flat, (oid, lab) in enumerate(zip(ids, labels)):
        by_label.setdefault(lab, set()).add(int(oid))
    # the classifier must name orbits: one orbit per label, all disjoint
    seen: dict = {}
    for lab, oids in sorted(by_label.items()):
        if len(oids) != 1:
            return False, {"labels": sorted(by_label)}, {
                "label": lab,
                "orbits": sorted(oids),
            }
        oid = next(iter(oids))
        if oid in seen:
            return False, {"labels": sorted(by_label)}, {
                "labels": sorted((lab, seen[oid])),
                "orbit": oid,
            }
        seen[oid] = lab
    n_orbits = len(set(int(i) for i in ids))
    if n_orbits != len(by_label):
        return False, {"labels": sorted(by_label)}, {"orbits": n_orbits}
    return True, {"orbits": n_orbits, "labels": sorted(by_label)}, None


def _suite_types(cfg: RunConfig, field: Field):
    """Class-type labels of torus-unipotent products: equal labels must land
    in one conjugacy class, distinct label families in disjoint ones."""
    cd = conjugacy_classes(field, "gsp")
    tbl = kernels.tables_for(field)
    q = field.q
    label_to_class: dict = {}
    family_classes: dict = {}
    for abc in bessel.nondegenerate_data(field):
        datum = classify_datum(field, *abc)
        torus = subgroup_T(field, datum)
        nmats = np.stack(
            [
                n_matrix(field, x, y, z)
                for x in range(q)
                for y in range(q)
                for z in range(q)
            ]
        )
        prods = kernels.mat_mul_cross(torus.mats, nmats, tbl)
        cls = cd.lookup_class(prods).reshape(torus.order, q**3)
        flat = 0
        for x in range(q):
            for y in range(q):
                for z in range(q):
                    for row in range(torus.order):
                        lab = tn_type(torus, row, x, y, z)
                        k = int(cls[row, flat])
                        prev = label_to_class.get(lab)
                        if prev is None:
                            label_to_class[lab] = k
                            family_classes.setdefault(lab.family, set()).add(k)
                        elif prev != k:
                            return False, {}, {
                                "datum": list(abc),
                                "label": [lab.family, repr(lab.parameter)],
                                "classes": [prev, k],
                            }
                    flat += 1
    fams = sorted(family_classes)
    for i, fa in enumerate(fams):
        for fb in fams[i + 1 :]:
            inter = family_classes[fa] & family_classes[fb]
            if inter:
                return False, {}, {
                    "families": [fa, fb],
                    "shared_class": sorted(inter)[0],
                }
    return True, {
        "labels": len(label_to_class),
        "families": {f: len(s) for f, s in sorted(family_classes.items())},
    }, None


def _suite_table_n(cfg: RunConfig, field: Field):
    engine = bessel.HomEngine(_build_table(cfg, field))
    report = bessel.match_table_n(engine)
    detail = {
        "rows": len(report.rows),
        "match_multiset": sorted(
            ("|".join(r.matches), r.degree) for r in report.rows
        ),
        "ambiguous": report.ambiguous,
        "sum_rule": report.sum_rule,
    }
    if not report.ok:
        bad = report.unmatched[0] if report.unmatched else {
            "sum_rule": report.sum_rule
        }
        return False, detail, bad
    return True, detail, None


def _suite_table_r(cfg: RunConfig, field: Field):
    engine = bessel.HomEngine(_build_table(cfg, field))
    report = bessel.verify_table_r(engine)
    detail = {
        "data_checked": len(report.data),
        "rows_at_two": sum(d.rows_at_two for d in report.data),
        "nongeneric_two_chi": sum(d.nongeneric_two_chi for d in report.data),
    }
    for d in report.data:
        if d.violations:
            return False, detail, d.violations[0]
    return report.ok, detail, None


def _suite_corollary(cfg: RunConfig, field: Field):
    engine = bessel.HomEngine(_build_table(cfg, field))
    report = bessel.verify_corollary(engine)
    detail = report.to_dict()
    if not report.ok:
        bad = {
            k: v
            for k, v in detail.items()
            if k.endswith("_ok") and v is False
        }
        return False, detail, bad
    return True, detail, None


_SUITE_FNS = {
    "lemmas": _suite_lemmas,
    "canonical-forms": _suite_canonical_forms,
    "types": _suite_types,
    "table-n": _suite_table_n,
    "table-r": _suite_table_r,
    "corollary": _suite_corollary,
}


def cmd_verify(cfg: RunConfig, args) -> int:
    field = make_field(cfg.p, cfg.n)
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = {}
    failure = None
    for name in names:
        ok, detail, counter = _SUITE_FNS[name](cfg, field)
        results[name] = {"ok": ok, "detail": detail}
        if not ok and failure is None:
            failure = {"suite": name, "counterexample": counter}
            break
    if failure is not None:
        _emit(cfg, render_json({"q": field.q, "ok": False, "failure": failure}))
        return 1
    payload = {"q": field.q, "ok": True, "suites": results}
    if cfg.format == "json":
        _emit(cfg, render_json(payload))
    elif cfg.format == "csv":
        rows = [{"suite": s, "ok": int(r["ok"])} for s, r in results.items()]
        _emit(cfg, render_csv(rows, ["suite", "ok"]))
    else:
        lines = [f"q={field.q}"]
        for s in names:
            lines.append(f"  {s}: ok")
        _emit(cfg, "\n".join(lines))
    return 0


def cmd_bench(cfg: RunConfig) -> int:
    field = make_field(cfg.p, cfg.n)
    tbl = kernels.tables_for(field)
    from .gsp4 import gsp_generators

    gens = gsp_generators(field)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for name in kernels.available_backends():
        backend = kernels.get_backend(name)
        t0 = time.perf_counter()
        mats, packed = backend.closure(gens, tbl, limit=group_order(field.q, "gsp"))
        t1 = time.perf_counter()
        sel = rng.integers(0, len(mats), size=min(len(mats), 400))
        batch = mats[sel]
        t2 = time.perf_counter()
        backend.mat_mul_cross(batch, batch, tbl)
        t3 = time.perf_counter()
        rows.append(
            {
                "backend": name,
                "closure_s": round(t1 - t0, 4),
                "matmul_cross_s": round(t3 - t2, 4),
                "elements": len(mats),
            }
        )
    if cfg.format == "json":
        _emit(cfg, render_json({"q": field.q, "runs": rows}))
    elif cfg.format == "csv":
        _emit(cfg, render_csv(rows, ["backend", "closure_s", "matmul_cross_s", "elements"]))
    else:
        lines = [f"q={field.q}  (timings vary run to run)"]
        for r in rows:
            lines.append(
                f"  {r['backend']}: closure {r['closure_s']}s  "
                f"matmul_cross {r['matmul_cross_s']}s  ({r['elements']} elements)"
            )
        _emit(cfg, "\n".join(lines))
    return 0


# ----------------------------------------------------------- argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsp4bessel",
        description="Exact multiplicity tables for GSp(4,q) Bessel subgroups.",
        epilog="Environment overrides use the GSP4B_ prefix, e.g. GSP4B_FORMAT=json.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--q", type=int, default=None,
                       help="field size, a prime power (or use --p/--n)")
        p.add_argument("--p", type=int, default=int(_env("P", 3)),
                       help="field characteristic")
        p.add_argument("--n", type=int, default=int(_env("N", 1)),
                       help="extension degree over the prime field")
        p.add_argument("--format", choices=("json", "csv", "text"),
                       default=_env("FORMAT", "text"))
        p.add_argument("--out", default=_env("OUT", None),
                       help="output file (default: stdout)")
        p.add_argument("--cache", default=_env("CACHE", None),
                       help="directory for character-table caches")
        p.add_argument("--threads", type=int, default=int(_env("THREADS", 1)),
                       help="accepted for interface stability; kernels are "
                            "single-threaded and results never depend on it")
        p.add_argument("--seed", type=int, default=int(_env("SEED", 0)),
                       help="seed for sampled work (bench batches)")
        p.add_argument("--mem-budget", type=int,
                       default=int(_env("MEM_BUDGET", DEFAULT_MEM_BUDGET)),
                       help="group-enumeration memory budget in bytes")
        if _env("Q", None) is not None:
            p.set_defaults(q=int(_env("Q", None)))

    p_chartab = sub.add_parser("chartab", help="build and summarize the character table")
    common(p_chartab)

    p_table = sub.add_parser("table", help="multiplicity tables")
    common(p_table)
    p_table.add_argument("--model", choices=("N", "R"), required=True)
    p_table.add_argument("--a", type=int, default=0, help="datum coefficient a (element index)")
    p_table.add_argument("--b", type=int, default=0, help="datum coefficient b (element index)")
    p_table.add_argument("--c", type=int, default=0, help="datum coefficient c (element index)")
    p_table.add_argument("--chi", type=int, default=None,
                         help="restrict model R output to one torus character index")

    p_verify = sub.add_parser("verify", help="run verification suites")
    common(p_verify)
    p_verify.add_argument("--suite", choices=SUITES + ("all",), default="all")

    p_bench = sub.add_parser("bench", help="compare kernel backends")
    common(p_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
        field_check = make_field(cfg.p, cfg.n)  # fail fast on unsupported q
        order = group_order(field_check.q, "gsp")
        needs_group = args.command in ("chartab", "bench") or (
            args.command == "table"
        ) or (
            args.command == "verify"
            and args.suite in ("types", "table-n", "table-r", "corollary", "all")
        )
        if needs_group and order * 64 > cfg.mem_budget:
            raise CliError(
                f"q={cfg.q}: the group has order {order}; enumerating it needs "
                f"about {order * 64} bytes, over the budget of {cfg.mem_budget}. "
                "Raise --mem-budget only if the machine really has the memory."
            )
        if args.command == "chartab":
            return cmd_chartab(cfg)
        if args.command == "table":
            return cmd_table(cfg, args)
        if args.command == "verify":
            return cmd_verify(cfg, args)
        if args.command == "bench":
            return cmd_bench(cfg)
        raise CliError(f"unknown command {args.command!r}")
    except (CliError, FieldError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

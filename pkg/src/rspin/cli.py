"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 bad arguments or key,
3 cap exceeded, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import correlators as C
from .errors import CapExceededError, MalformedKeyError, RSpinError, TwoMinusOneInsertionsError
from .scalar import format_rational
from .hierarchy import build_L0, build_L_dispersive, dispersive_text
from .verify import SUITES, corrupt_jet, run_suites

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP, EXIT_IO = 0, 1, 2, 3, 4
SCHEMA_VERSION = 1
SECTOR_ALIASES = {
    "closed": "closed", "c": "closed",
    "extended": "extended", "ext": "extended", "e": "extended",
    "open": "open", "o": "open",
}
DEFAULTS = {
    "r": 3,
    "max_n": 6,
    "max_d": 2,
    "genus_max": 1,
    "format": "json",
    "output": None,
    "suite": None,
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    r: int = DEFAULTS["r"]
    max_n: int = DEFAULTS["max_n"]
    max_d: int = DEFAULTS["max_d"]
    genus_max: int = DEFAULTS["genus_max"]
    suites: list[str] = field(default_factory=lambda: list(SUITES))
    format: str = DEFAULTS["format"]
    output: str | None = None

    def validate(self) -> None:
        if self.r < 2:
            raise UsageError(f"r must be at least 2, got {self.r}")
        if self.max_n < 1 or self.max_d < 0 or self.genus_max < 0:
            raise UsageError("caps must be positive")
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise UsageError(f"unknown suite(s) {', '.join(unknown)}; choose from {', '.join(SUITES)}")
        if self.format not in ("json", "csv", "text"):
            raise UsageError(f"unknown format {self.format!r}")


def read_config_file(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    """Flags override the config file, which overrides the defaults."""
    file_values = read_config_file(args.config) if getattr(args, "config", None) else {}
    merged = dict(DEFAULTS)
    for key, value in file_values.items():
        if key not in DEFAULTS:
            raise UsageError(f"unknown config key {key!r}")
        merged[key] = value
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v
    try:
        suites = merged["suite"]
        if isinstance(suites, str):
            suites = [s.strip() for s in suites.split(",") if s.strip()]
        elif suites:
            suites = [s for group in suites for s in group.split(",") if s]
        cfg = RunConfig(
            r=int(merged["r"]),
            max_n=int(merged["max_n"]),
            max_d=int(merged["max_d"]),
            genus_max=int(merged["genus_max"]),
            suites=list(suites) if suites else list(SUITES),
            format=str(merged["format"]),
            output=merged["output"],
        )
    except ValueError as exc:
        raise UsageError(f"bad config value: {exc}") from None
    cfg.validate()
    return cfg


def parse_insertions(text: str) -> list[tuple[int, int]]:
    """``"1:0,2:0"`` -> ``[(1, 0), (2, 0)]``; a bare twist means descendent 0."""
    out = []
    if not text.strip():
        return out
    for item in text.split(","):
        item = item.strip()
        parts = item.split(":")
        if len(parts) > 2 or not item:
            raise UsageError(f"bad insertion {item!r}, expected twist:desc")
        try:
            a = int(parts[0])
            d = int(parts[1]) if len(parts) == 2 else 0
        except ValueError:
            raise UsageError(f"bad insertion {item!r}, expected integers") from None
        out.append((a, d))
    return out


def value_json(v: Fraction) -> dict[str, str]:
    v = Fraction(v)
    return {"num": str(v.numerator), "den": str(v.denominator)}


def key_json(ins: Sequence[tuple[int, int]], boundary: int | None = None) -> dict:
    out: dict = {"insertions": [{"twist": a, "desc": d} for a, d in ins]}
    if boundary is not None:
        out["boundary"] = boundary
    return out


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# -- commands -------------------------------------------------------------------


def cmd_correlator(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    sector = SECTOR_ALIASES.get(args.sector)
    if sector is None:
        raise UsageError(f"unknown sector {args.sector!r}")
    ins = parse_insertions(args.ins)
    boundary = args.boundary or 0
    key = C.CorrelatorKey(cfg.r, sector, tuple(ins), boundary)
    n_needed = key.n + boundary
    if n_needed > cfg.max_n:
        raise CapExceededError(f"{key.text()} has {n_needed} points; raise --max-n to {n_needed}", needed=n_needed)
    if key.total_descendent > cfg.max_d:
        raise CapExceededError(
            f"{key.text()} has total descendent {key.total_descendent}; raise --max-d to {key.total_descendent}",
            needed=key.total_descendent,
        )
    engine = C.Engine(cfg.r, max(n_needed, 3), key.total_descendent)
    if sector == "extended":
        values = {}
        if args.pipeline in ("recursion", "both"):
            values["recursion"] = engine.reconstruct(key.insertions)
        if args.pipeline in ("hierarchy", "both"):
            values["hierarchy"] = engine.hierarchy_extended(key.insertions)
        distinct = set(values.values())
        if len(distinct) > 1:
            provenance = "mismatch"
        elif len(values) == 2:
            provenance = "both-agree"
        else:
            provenance = next(iter(values))
        value = values.get("hierarchy", values.get("recursion"))
    elif sector == "closed":
        value, provenance = engine.closed(key.insertions), "hierarchy"
    else:
        value, provenance = engine.open(key.insertions, boundary), "hierarchy"
    if cfg.format == "text":
        _emit(f"{format_rational(value)}\n", cfg.output)
    else:
        payload = {"schema_version": SCHEMA_VERSION, "r": cfg.r, "sector": sector}
        payload.update(key_json(key.insertions, boundary if sector == "open" else None))
        payload["value"] = value_json(value)
        payload["provenance"] = provenance
        if provenance == "mismatch":
            payload["values"] = {k: value_json(v) for k, v in values.items()}
        _emit(json.dumps(payload) + "\n", cfg.output)
    return EXIT_FAIL if provenance == "mismatch" else EXIT_OK


def table_entries(engine: C.Engine, sector: str) -> list[dict]:
    r = engine.r
    entries = []
    if sector == "extended":
        for ins in engine.extended_keys():
            rec = engine.reconstruct(ins)
            hie = engine.hierarchy_extended(ins)
            if not rec and not hie:
                continue
            prov = "both-agree" if rec == hie else "mismatch"
            entries.append((len(ins), ins, None, hie, prov))
    elif sector == "closed":
        for ins in C.multisets(r, engine.max_n, engine.max_d, 3):
            v = engine.closed(ins)
            if v:
                entries.append((len(ins), ins, None, v, "hierarchy"))
    else:
        for ins in C.multisets(r, engine.max_n, engine.max_d):
            for m in range(engine.max_n - len(ins) + 1):
                v = engine.open(ins, m)
                if v:
                    entries.append((len(ins) + m, ins, m, v, "hierarchy"))
    entries.sort(key=lambda e: (e[0], e[1], e[2] or 0))
    out = []
    for _, ins, m, v, prov in entries:
        item = key_json(ins, m)
        item["value"] = value_json(v)
        item["provenance"] = prov
        out.append(item)
    return out


def render_table(r: int, sector: str, entries: list[dict], fmt: str) -> str:
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "r": r, "sector": sector, "entries": entries}
        return json.dumps(doc, indent=1) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["schema_version", "r", "sector", "insertions", "boundary", "num", "den", "provenance"])
        for e in entries:
            ins = " ".join(f"{x['twist']}:{x['desc']}" for x in e["insertions"])
            w.writerow([SCHEMA_VERSION, r, sector, ins, e.get("boundary", ""), e["value"]["num"], e["value"]["den"], e["provenance"]])
        return buf.getvalue()
    lines = []
    for e in entries:
        ins = [(x["twist"], x["desc"]) for x in e["insertions"]]
        key = C.CorrelatorKey(r, sector, tuple(ins), e.get("boundary", 0))
        v = Fraction(int(e["value"]["num"]), int(e["value"]["den"]))
        lines.append(f"{key.text()} = {format_rational(v)}")
    return "\n".join(lines) + ("\n" if lines else "")


def cmd_table(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    sector = SECTOR_ALIASES.get(args.sector)
    if sector is None:
        raise UsageError(f"unknown sector {args.sector!r}")
    engine = C.Engine(cfg.r, cfg.max_n, cfg.max_d)
    entries = table_entries(engine, sector)
    _emit(render_table(cfg.r, sector, entries, cfg.format), cfg.output)
    return EXIT_FAIL if any(e["provenance"] == "mismatch" for e in entries) else EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    engine = C.Engine(cfg.r, cfg.max_n, cfg.max_d)
    if args.corrupt_jet:
        var = corrupt_jet(engine)
        print(f"test mode: perturbed the T1*T{var} coefficient of f_0")
    results = run_suites(cfg.suites, engine)
    lines = [res.line() for res in results]
    ok = all(res.passed for res in results)
    lines.append(f"{'PASS' if ok else 'FAIL'}: {sum(r.passed for r in results)}/{len(results)} suites (r={cfg.r}, max_n={cfg.max_n}, max_d={cfg.max_d})")
    if cfg.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "r": cfg.r,
            "passed": ok,
            "suites": [
                {"name": res.name, "passed": res.passed, "first_failure": res.first_failure, "seconds": round(res.seconds, 3)}
                for res in results
            ],
        }
        if cfg.output:
            _emit(json.dumps(doc, indent=1) + "\n", cfg.output)
    print("\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def restrict_to_slice(jet, keep: int = 1):
    """The jet with ``T_(keep+1), ...`` set to zero."""
    drop = range(keep, jet.N)
    return jet.symbol.map_series(lambda c: c.set_to_zero(drop))


def cmd_lax(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    r = cfg.r
    degree = args.degree if args.degree is not None else (1 if args.slice else 3)
    N = args.N if args.N is not None else r * (cfg.max_d + 1)
    if degree < 1:
        raise UsageError("degree must be at least 1")
    if args.dispersive:
        jet = build_L_dispersive(r, degree, N, cfg.genus_max)
        if args.slice:
            jet.symbol = restrict_to_slice(jet)
        text = dispersive_text(jet)
    else:
        jet = build_L0(r, degree, N)
        sym = restrict_to_slice(jet) if args.slice else jet.symbol
        text = sym.to_text()
    _emit(text + "\n", cfg.output)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--r", type=int, help="spin parameter r >= 2 (default 3)")
    p.add_argument("--max-n", dest="max_n", type=int, help="largest number of ordinary insertions (default 6)")
    p.add_argument("--max-d", dest="max_d", type=int, help="largest total descendent depth (default 2)")
    p.add_argument("--genus-max", dest="genus_max", type=int, help="dispersive layers to keep (default 1)")
    p.add_argument("--format", choices=["json", "csv", "text"])
    p.add_argument("--output", "-o", help="output file (default stdout)")
    p.add_argument("--config", help="key=value file; flags take precedence")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rspin", description="Genus-zero r-spin correlators.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("correlator", help="compute one correlator")
    _common(p)
    p.add_argument("--sector", default="extended", help="closed, extended (ext) or open")
    p.add_argument("--ins", default="", help="insertions twist:desc, comma separated")
    p.add_argument("--boundary", type=int, default=0, help="boundary points (open sector)")
    p.add_argument("--pipeline", choices=["recursion", "hierarchy", "both"], default="both")
    p.set_defaults(func=cmd_correlator)

    p = sub.add_parser("table", help="write all nonzero in-cap correlators of a sector")
    _common(p)
    p.add_argument("--sector", default="extended")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("verify", help="run property suites")
    _common(p)
    p.add_argument("--suite", action="append", help=f"suite name(s): {', '.join(SUITES)}")
    p.add_argument("--corrupt-jet", action="store_true", help="test mode: perturb the L0 jet first")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lax", help="print the Lax operator jet")
    _common(p)
    p.add_argument("--degree", type=int, help="total degree of the jet")
    p.add_argument("--N", type=int, help="number of times T_1..T_N")
    p.add_argument("--slice", action="store_true", help="set T_2, T_3, ... to zero")
    p.add_argument("--dispersive", action="store_true", help="dispersive operator in d/dx form")
    p.set_defaults(func=cmd_lax)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceededError as exc:
        needed = f" (needed: {exc.needed})" if exc.needed is not None else ""
        print(f"cap exceeded: {exc}{needed}", file=sys.stderr)
        return EXIT_CAP
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (MalformedKeyError, TwoMinusOneInsertionsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RSpinError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

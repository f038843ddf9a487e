"""Command-line surface: reproduction scans, the qutrit counterexample,
frame potentials, bound calculators and the verification suite.

Exit codes: 0 success, 1 internal error, 2 partial results, 64 usage error.
All floating-point output uses 17 significant digits so reruns are
byte-identical and values round-trip.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from fractions import Fraction

import numpy as np

from . import oracle, spectra, verify
from .moments import (Geometry, SectorTuple, brickwork_step, sector_tuples,
                      spectral_classes, step_channel, rep_bundle)
from .partitions import Partition, dim_irrep, multiplicity, partitions
from .spectra import (FRAME_HEADER, GAP_SCAN_HEADER, ScanRow,
                      all_to_all_gap_scan, bulk_gap_scan, detectability_bound,
                      spectral_gap, unit_eigenspace_dim)
from .yor import build_irrep, to_json as rep_to_json

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARTIAL = 2
EXIT_USAGE = 64

WORKERS_ENV = "SNMOMENTS_WORKERS"

GEOMETRY_TAGS = {"open": "open_chain", "periodic": "periodic_chain",
                 "all-to-all": "all_to_all", "brickwork": "brickwork"}
ENSEMBLE_TAGS = {"swap": "swap_only", "cqa": "cqa"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(x) -> str:
    return f"{float(x):.17g}"


def parse_range(text: str) -> list[int]:
    """'2..6' -> [2,3,4,5,6]; '4' -> [4]; '2,4,7' -> [2,4,7]."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..")
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise UsageError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    if "," in text:
        return [int(t) for t in text.split(",")]
    return [int(text)]


def parse_shape(text: str) -> Partition:
    return Partition.of(int(t) for t in text.replace("(", "").replace(")", "").split(","))


def parse_sector_tuple(text: str) -> SectorTuple:
    """Format as printed by SectorTuple: '(3,1),(2,2);(3,1),(2,2)'."""
    ket_part, bra_part = text.split(";")
    grab = lambda side: tuple(parse_shape(m) for m in re.findall(r"\(([\d,]+)\)", side))
    return SectorTuple(grab(ket_part), grab(bra_part))


def load_config(path: str | None) -> dict:
    """Flat key=value file; '#' starts a comment."""
    if not path:
        return {}
    cfg = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"bad config line: {line!r}")
            key, val = line.split("=", 1)
            cfg[key.strip()] = val.strip()
    return cfg


def resolve(flag_value, cfg: dict, key: str, default, cast=lambda x: x):
    """Precedence: command-line flag > config file > default."""
    if flag_value is not None:
        return flag_value
    if key in cfg:
        return cast(cfg[key])
    return default


def resolve_threads(flag_value, cfg: dict) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get(WORKERS_ENV)
    if env:
        return int(env)
    return int(cfg.get("threads", 1))


class OutputWriter:
    """Row-at-a-time writer with checkpointed resume support."""

    def __init__(self, path: str | None, header: str, resume: bool):
        self.path = path
        self.done_keys: set[str] = set()
        if path and resume and os.path.exists(path):
            with open(path) as fh:
                for line in fh:
                    line = line.strip()
                    if line and not line.startswith(header.split(",")[0] + ","):
                        if line != header:
                            self.done_keys.add(line.split(",", 1)[0])
        mode = "a" if (path and resume and os.path.exists(path)) else "w"
        self.fh = open(path, mode) if path else sys.stdout
        self._owns = path is not None
        if mode == "w":
            self.fh.write(header + "\n")
            self.fh.flush()

    def skip(self, key) -> bool:
        return str(key) in self.done_keys

    def row(self, line: str):
        self.fh.write(line + "\n")
        self.fh.flush()

    def close(self):
        if self._owns:
            self.fh.close()


def emit_json(doc: dict, path: str | None):
    text = json.dumps(doc, indent=2, default=_json_default)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _json_default(obj):
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, (Partition, SectorTuple)):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"cannot serialize {type(obj)}")


# ---------------------------------------------------------------------------
# subcommands

def cmd_partitions(args, cfg) -> int:
    n_values = parse_range(args.n)
    d = resolve(args.d, cfg, "d", 2, int)
    lines = ["n,partition,dim,multiplicity"]
    for n in n_values:
        for p in partitions(n, d):
            lines.append(f"{n},\"{p}\",{dim_irrep(p)},{multiplicity(p, d)}")
    _write_lines(lines, args.out)
    return EXIT_OK


def cmd_rep(args, cfg) -> int:
    shape = parse_shape(args.shape)
    rep = build_irrep(shape, shape.n)
    text = rep_to_json(rep)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _scan_to_writer(rows, writer: OutputWriter) -> int:
    partial = False
    for row in rows:
        if writer.skip(row.key):
            continue
        writer.row(row.csv())
        if row.gap is None or row.skipped:
            partial = True
    return EXIT_PARTIAL if partial else EXIT_OK


def _row_doc(row: ScanRow) -> dict:
    return {"m_or_n": row.key,
            "tuple": None if row.sector is None else str(row.sector),
            "dim": row.dim, "gap": row.gap, "second_eig": row.second_eig,
            "unit_dim": row.unit_dim, "threshold": row.threshold,
            "bound": row.bound, "valid": row.valid, "skipped": row.skipped}


def _emit_scan(rows, args) -> int:
    """CSV (checkpointed, resumable) or JSON (whole document) per --format."""
    if getattr(args, "format", "csv") == "json":
        emit_json({"rows": [_row_doc(r) for r in rows]}, args.out)
        return EXIT_PARTIAL if any(r.gap is None or r.skipped for r in rows) \
            else EXIT_OK
    writer = OutputWriter(args.out, GAP_SCAN_HEADER, args.resume)
    code = _scan_to_writer(rows, writer)
    writer.close()
    return code


def cmd_gap_scan(args, cfg) -> int:
    m_values = parse_range(resolve(args.m, cfg, "m", None) or _usage("--m required"))
    d = resolve(args.d, cfg, "d", 2, int)
    dim_cap = resolve(args.dim_cap, cfg, "dim_cap", None, int)
    tol = resolve(args.tol, cfg, "tol", 1e-6, float)
    seed = resolve(args.seed, cfg, "seed", 0, int)
    threads = resolve_threads(args.threads, cfg)
    tuples = _tuple_list(args.tuples)
    if args.format == "json":
        rows = bulk_gap_scan(m_values, d=d, tuples=tuples, dim_cap=dim_cap,
                             tol=tol, seed=seed, threads=threads)
        return _emit_scan(rows, args)
    writer = OutputWriter(args.out, GAP_SCAN_HEADER, args.resume)
    todo = [m for m in m_values if not writer.skip(m)]
    rows = bulk_gap_scan(todo, d=d, tuples=tuples, dim_cap=dim_cap, tol=tol,
                         seed=seed, threads=threads)
    code = _scan_to_writer(rows, writer)
    writer.close()
    return code


def cmd_all_to_all(args, cfg) -> int:
    n_values = parse_range(resolve(args.n, cfg, "n", None) or _usage("--n required"))
    d = resolve(args.d, cfg, "d", 2, int)
    dim_cap = resolve(args.dim_cap, cfg, "dim_cap", None, int)
    tol = resolve(args.tol, cfg, "tol", 1e-6, float)
    seed = resolve(args.seed, cfg, "seed", 0, int)
    threads = resolve_threads(args.threads, cfg)
    if args.format == "json":
        rows = all_to_all_gap_scan(n_values, d=d, dim_cap=dim_cap, tol=tol,
                                   seed=seed, threads=threads)
        return _emit_scan(rows, args)
    writer = OutputWriter(args.out, GAP_SCAN_HEADER, args.resume)
    todo = [n for n in n_values if not writer.skip(n)]
    rows = all_to_all_gap_scan(todo, d=d, dim_cap=dim_cap, tol=tol, seed=seed,
                               threads=threads)
    code = _scan_to_writer(rows, writer)
    writer.close()
    return code


def cmd_brickwork(args, cfg) -> int:
    n_values = parse_range(resolve(args.n, cfg, "n", None) or _usage("--n required"))
    d = resolve(args.d, cfg, "d", 2, int)
    dim_cap = resolve(args.dim_cap, cfg, "dim_cap", None, int)
    tol = resolve(args.tol, cfg, "tol", 1e-6, float)
    seed = resolve(args.seed, cfg, "seed", 0, int)
    writer = OutputWriter(args.out, GAP_SCAN_HEADER, args.resume)
    partial = False
    for n in n_values:
        if writer.skip(n):
            continue
        worst = None          # largest sub-unit singular value over tuples
        skipped = 0
        for rep_tuple, _size in spectral_classes(sector_tuples(n, d, 2)):
            if dim_cap is not None and rep_tuple.block_dim() > dim_cap:
                skipped += 1
                continue
            block = brickwork_step(rep_tuple)
            report = spectral_gap(block, tol=tol, seed=seed)
            if report.second_eigenvalue is None:
                continue
            if worst is None or report.second_eigenvalue > worst[1].second_eigenvalue:
                worst = (rep_tuple, report)
        if worst is None:
            partial = True
            continue
        # detectability: the layered step contracts at least as fast as the
        # chain-gap bound 1/(gap/4 + 1)
        chain_rows = bulk_gap_scan([n - 1], d=d, dim_cap=dim_cap, tol=tol, seed=seed)
        delta = chain_rows[0].gap
        bound = detectability_bound(delta).value if delta is not None else None
        t, rep = worst
        s2 = rep.second_eigenvalue
        row = ScanRow(n, t, t.block_dim(), rep.gap, s2, rep.unit_dim,
                      delta, bound, None if bound is None else s2 <= bound, skipped)
        writer.row(row.csv())
        partial |= bool(skipped)
    writer.close()
    return EXIT_PARTIAL if partial else EXIT_OK


def cmd_counterexample(args, cfg) -> int:
    d = resolve(args.d, cfg, "d", 3, int)
    shape = parse_shape(args.shape) if args.shape else Partition((3, 2, 1))
    tol = resolve(args.tol, cfg, "tol", 1e-6, float)
    seed = resolve(args.seed, cfg, "seed", 0, int)
    if multiplicity(shape, d) == 0:
        raise UsageError(f"sector {shape} does not occur for d={d}")
    n = shape.n
    t = SectorTuple((shape, shape), (shape, shape))
    reps = rep_bundle(t)
    geo = Geometry("open_chain", n)
    swap_block = step_channel(t, geo, "swap_only", reps=reps)
    cqa_block = step_channel(t, geo, "cqa", reps=reps)
    unit_swap = unit_eigenspace_dim(swap_block, tol=tol, seed=seed)
    unit_cqa = unit_eigenspace_dim(cqa_block, tol=tol, seed=seed)
    haar = 2 if dim_irrep(shape) >= 2 else 1
    doc = {
        "d": d,
        "sector": str(shape),
        "self_conjugate": shape.conjugate() == shape,
        "block_dim": t.block_dim(),
        "unit_dim_swap_only": unit_swap,
        "unit_dim_cqa": unit_cqa,
        "haar_commutant_dim": haar,
        "verdict_swap_only": "matches Haar" if unit_swap == haar
                             else "exceeds Haar: not a 2-design generator",
        "verdict_cqa": "matches Haar" if unit_cqa == haar else "exceeds Haar",
    }
    emit_json(doc, args.out)
    return EXIT_OK if unit_cqa == haar else EXIT_ERROR


def cmd_frame_potential(args, cfg) -> int:
    n_values = parse_range(resolve(args.n, cfg, "n", None) or _usage("--n required"))
    samples = resolve(args.samples, cfg, "samples", 0, int)
    seed = resolve(args.seed, cfg, "seed", 0, int)
    writer = OutputWriter(args.out, FRAME_HEADER, args.resume)
    partial = False
    for n in n_values:
        if writer.skip(n):
            continue
        exact = spectra.frame_potential_exact_k2(n)
        paper = spectra.frame_potential_paper_k2(n)
        mc = err = ""
        if samples:
            if n > 8:
                partial = True    # Haar sampling capped at n = 8
            else:
                est, sde = oracle.frame_potential_mc(n, 2, samples, seed)
                mc, err = fmt(est), fmt(sde)
        writer.row(f"{n},{exact},{paper},{mc},{err}")
    writer.close()
    return EXIT_PARTIAL if partial else EXIT_OK


def cmd_bounds(args, cfg) -> int:
    name = args.name
    if name == "knabe":
        report = spectra.knabe_bound(_req(args.m, "--m"), _req(args.gap, "--gap"))
    elif name == "all_to_all":
        report = spectra.all_to_all_bound(_req(args.n, "--n"), _req(args.m, "--m"),
                                          _req(args.gap, "--gap"))
    elif name == "detectability":
        report = spectra.detectability_bound(_req(args.delta, "--delta"))
    elif name == "convergence_steps":
        steps = spectra.convergence_steps(_req(args.k, "--k"), _req(args.n, "--n"),
                                          _req(args.d, "--d"),
                                          _req(args.epsilon, "--epsilon"),
                                          _req(args.delta, "--delta"))
        report = spectra.BoundReport("convergence_steps",
                                     {"k": args.k, "n": args.n, "d": args.d,
                                      "epsilon": args.epsilon, "delta": args.delta},
                                     steps, True)
    elif name == "one_design_steps":
        steps = spectra.one_design_steps(_req(args.n, "--n"), _req(args.d, "--d"),
                                         _req(args.epsilon, "--epsilon"))
        report = spectra.BoundReport("one_design_steps",
                                     {"n": args.n, "d": args.d,
                                      "epsilon": args.epsilon}, steps, True)
    else:
        raise UsageError(f"unknown bound {name!r}")
    emit_json({"name": report.name, "inputs": report.inputs,
               "value": report.value, "valid": report.valid}, args.out)
    return EXIT_OK


def cmd_convergence(args, cfg) -> int:
    k = resolve(args.k, cfg, "k", 2, int)
    n = _req(args.n, "--n")
    d = resolve(args.d, cfg, "d", 2, int)
    epsilon = resolve(args.epsilon, cfg, "epsilon", 0.01, float)
    delta = _req(args.delta, "--delta")
    doc = {
        "walk_steps": spectra.convergence_steps(k, n, d, epsilon, delta),
        "inputs": {"k": k, "n": n, "d": d, "epsilon": epsilon, "delta": delta},
    }
    if n >= 2 and d >= 2 and 0 < epsilon < 1:
        doc["one_design_steps"] = spectra.one_design_steps(n, d, epsilon)
    emit_json(doc, args.out)
    return EXIT_OK


def cmd_verify(args, cfg) -> int:
    ok = verify.run_all(quick=args.quick)
    return EXIT_OK if ok else EXIT_ERROR


def _req(value, flag):
    if value is None:
        raise UsageError(f"{flag} is required")
    return value


def _usage(msg):
    raise UsageError(msg)


def _tuple_list(arg: str | None):
    if arg in (None, "all"):
        return None
    with open(arg) as fh:
        return [parse_sector_tuple(line.strip()) for line in fh
                if line.strip() and not line.startswith("#")]


def _write_lines(lines, path):
    if path:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        print("\n".join(lines))


# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    top = _Parser(prog="snmoments", description=__doc__)
    top.add_argument("--config", help="flat key=value config file")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, *, seeded=True):
        p.add_argument("--d", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--dim-cap", dest="dim_cap", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--out")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--resume", action="store_true")
        if seeded:
            p.add_argument("--seed", type=int)

    p = sub.add_parser("partitions", help="list charge sectors with dims")
    p.add_argument("--n", required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_partitions)

    p = sub.add_parser("rep", help="export one irrep action as JSON")
    p.add_argument("--shape", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_rep)

    p = sub.add_parser("gap-scan", help="window-Hamiltonian gaps vs thresholds")
    p.add_argument("--m", help="projection counts, e.g. 2..6")
    p.add_argument("--tuples", help="file of sector tuples, or 'all'")
    common(p)
    p.set_defaults(fn=cmd_gap_scan)

    p = sub.add_parser("all-to-all", help="complete-graph Hamiltonian gaps")
    p.add_argument("--n")
    common(p)
    p.set_defaults(fn=cmd_all_to_all)

    p = sub.add_parser("brickwork", help="layered-step singular values")
    p.add_argument("--n")
    common(p)
    p.set_defaults(fn=cmd_brickwork)

    p = sub.add_parser("counterexample", help="qutrit sector unit-space counts")
    p.add_argument("--shape")
    p.add_argument("--ensemble", choices=sorted(ENSEMBLE_TAGS))
    common(p)
    p.set_defaults(fn=cmd_counterexample)

    p = sub.add_parser("frame-potential", help="exact, closed-form and MC values")
    p.add_argument("--n")
    p.add_argument("--samples", type=int)
    common(p)
    p.set_defaults(fn=cmd_frame_potential)

    p = sub.add_parser("bounds", help="evaluate one named bound")
    p.add_argument("name", choices=["knabe", "all_to_all", "detectability",
                                    "convergence_steps", "one_design_steps"])
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--gap", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("convergence", help="walk-step estimates")
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_convergence)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--quick", action="store_true")
    p.set_defaults(fn=cmd_verify)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(getattr(args, "config", None))
        return args.fn(args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, IndexError, FileNotFoundError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MemoryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # pragma: no cover - genuine internal failure
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

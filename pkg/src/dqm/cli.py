"""``dqm`` command line.

Reports go to stdout (or ``--out``) as JSON; diagnostics go to stderr.
Exit codes: 0 success, 2 input error, 3 numeric degeneracy.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import MEASURES, baselines
from .dataset import MeasureConfig, load_dataset, write_csv, write_raw
from .degrade import DegradeSpec, degrade
from .exceptions import DatasetError, NumericalDegeneracyError
from .quality import DEFAULT_MAX_FEATURES, measure, measure_exact
from .stats import PairedSeries, correlate

SCHEMA = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3
# fields that legitimately differ between otherwise identical runs
VOLATILE_KEYS = ("elapsed_s",)

log = logging.getLogger("dqm")


class _Degenerate(Exception):
    """Report was produced but carries a degenerate value."""


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def envelope(**sections) -> dict:
    return {"schema": SCHEMA, **sections}


def strip_volatile(obj):
    if isinstance(obj, dict):
        return {k: strip_volatile(v) for k, v in obj.items() if k not in VOLATILE_KEYS}
    if isinstance(obj, list):
        return [strip_volatile(v) for v in obj]
    return obj


def _input_files(args) -> list[str]:
    files = [args.input]
    if getattr(args, "labels", None):
        files.append(args.labels)
    if getattr(args, "format", None) == "raw" or str(args.input).endswith((".f64", ".bin")):
        side = Path(args.input)
        side = side if side.suffix == ".json" else side.with_name(side.name + ".json")
        if side.is_file():
            files.append(str(side))
    return files


def _load(args):
    return load_dataset(args.input, args.format, _label_column(args.label_column), args.labels)


def _label_column(value):
    if value is None:
        return -1
    try:
        return int(value)
    except ValueError:
        return value


def _emit(args, payload: dict, argv, config=None):
    text = json.dumps(payload, indent=2) + "\n"
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)
    manifest_path = args.manifest or (f"{out}.manifest.json" if out else None)
    if manifest_path:
        write_manifest(manifest_path, argv, args, config)


def write_manifest(path, argv, args, config=None):
    inputs = {}
    for f in _input_files(args):
        if Path(f).is_file():
            inputs[str(Path(f).resolve())] = sha256_file(f)
    manifest = {
        "schema": SCHEMA,
        "tool": "dqm",
        "version": __version__,
        "argv": list(argv),
        "cwd": os.getcwd(),
        "config": config,
        "seed": getattr(args, "seed", None),
        "inputs": inputs,
        "started": args._started,
        "finished": datetime.now(timezone.utc).isoformat(),
    }
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_measure(args, argv):
    ds = _load(args)
    cfg = MeasureConfig(
        n_bootstrap=args.n_bootstrap,
        sample_ratio=args.sample_ratio,
        n_vectors=args.n_vectors,
        seed=args.seed,
        standardize=args.standardize,
    )
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    report = measure(ds, cfg, n_jobs=threads)
    _emit(args, envelope(quality=report.to_dict()), argv, cfg.to_dict())
    if report.degenerate:
        log.warning("%d bootstrap iterations had zero within-class scatter", report.n_degenerate_iterations)
    if not np.isfinite(report.m_sep):
        raise _Degenerate("separability is unbounded (zero within-class scatter)")


def cmd_exact(args, argv):
    ds = _load(args)
    report = measure_exact(ds, standardize=args.standardize, max_features=args.cap, ridge=args.ridge)
    if report.regularized:
        log.warning("within-class scatter regularized with ridge %.3g", report.ridge)
    _emit(args, envelope(exact=report.to_dict()), argv,
          {"standardize": args.standardize, "cap": args.cap, "ridge": args.ridge})


def cmd_baseline(args, argv):
    ds = _load(args)
    measures = [m.strip() for m in args.measures.split(",") if m.strip()]
    report = baselines(ds, measures, standardize=args.standardize)
    _emit(args, envelope(baselines=report.to_dict()), argv,
          {"measures": measures, "standardize": args.standardize})


def _class_id(ds, value: str) -> int:
    names = [str(n) for n in ds.class_names]
    if value in names:
        return names.index(value)
    try:
        cid = int(value)
    except ValueError:
        raise DatasetError(f"unknown class {value!r}; known: {names}") from None
    if not 0 <= cid < ds.c:
        raise DatasetError(f"class id {cid} out of range [0, {ds.c})")
    return cid


def cmd_degrade(args, argv):
    ds = _load(args)
    spec = DegradeSpec(
        target_class=_class_id(ds, args.target_class),
        num_exemplars=args.k,
        output_count=args.count,
        noise_sigma=args.sigma,
        seed=args.seed,
    )
    out = degrade(ds, spec)
    out_path = Path(args.out)
    fmt = args.out_format or ("csv" if out_path.suffix.lower() == ".csv" else "raw")
    if fmt == "csv":
        write_csv(out, out_path, label_column=ds.metadata.get("label_column", "label"))
    else:
        write_raw(out, out_path)
    sidecar = {
        "schema": SCHEMA,
        "degrade": spec.to_dict(),
        "source": str(args.input),
        "source_sha256": sha256_file(args.input),
        "output": str(out_path),
        "format": fmt,
        "m": out.m,
        "n": out.n,
        "c": out.c,
    }
    Path(f"{out_path}.degrade.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    sys.stdout.write(json.dumps(envelope(degrade=sidecar), indent=2) + "\n")
    write_manifest(args.manifest or f"{out_path}.manifest.json", argv, args, spec.to_dict())


def cmd_correlate(args, argv):
    path = Path(args.input)
    if not path.is_file():
        raise DatasetError(f"no such file: {path}")
    xs, ys, labels = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        xcol = args.x or (fields[0] if fields else None)
        ycol = args.y or (fields[1] if len(fields) > 1 else None)
        for col in (xcol, ycol, args.label_column):
            if col is not None and col not in fields:
                raise DatasetError(f"{path}: column {col!r} not in header {fields}")
        for lineno, row in enumerate(reader, start=2):
            try:
                xs.append(float(row[xcol]))
                ys.append(float(row[ycol]))
            except (TypeError, ValueError):
                raise DatasetError(f"{path}: row {lineno}: non-numeric pair") from None
            if args.label_column:
                labels.append(row[args.label_column])
    result = correlate(PairedSeries(xs, ys, tuple(labels)))
    if "diagnostic" in result:
        log.warning("%s", result["diagnostic"])
    _emit(args, envelope(correlation=result), argv, {"x": xcol, "y": ycol})


def cmd_replay(args, argv):
    manifest = json.loads(Path(args.input).read_text())
    for f, digest in manifest["inputs"].items():
        if not Path(f).is_file() or sha256_file(f) != digest:
            raise DatasetError(f"input {f} is missing or changed since the manifest was written")
    old = manifest["argv"]
    if old and old[0] == "replay":
        raise DatasetError("refusing to replay a replay")
    prev_out = None
    new = []
    skip = False
    for i, a in enumerate(old):
        if skip:
            skip = False
            continue
        if a in ("--out", "--manifest") and old[0] != "degrade":
            if a == "--out":
                prev_out = Path(manifest["cwd"]) / old[i + 1]
            skip = True
            continue
        new.append(a)
    cwd = os.getcwd()
    os.chdir(manifest["cwd"])
    try:
        if prev_out is None or not prev_out.is_file():
            return main(new)
        import io
        from contextlib import redirect_stdout

        buf = io.StringIO()
        with redirect_stdout(buf):
            code = main(new)
        same = strip_volatile(json.loads(buf.getvalue())) == strip_volatile(json.loads(prev_out.read_text()))
        sys.stdout.write(buf.getvalue())
        log.info("replay %s recorded output %s", "matches" if same else "DIFFERS FROM", prev_out)
        return code if same else 1
    finally:
        os.chdir(cwd)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_input(p, labels=True):
    p.add_argument("input", help="dataset file (CSV, IDX images, or raw float64 matrix)")
    p.add_argument("--format", choices=("csv", "idx", "raw"), help="input format (default: from suffix)")
    p.add_argument("--label-column", help="CSV label column name or index (default: last)")
    if labels:
        p.add_argument("--labels", help="IDX labels file (required for --format idx)")


def _add_output(p, required=False):
    p.add_argument("--out", required=required, help="write the result here instead of stdout")
    p.add_argument("--manifest", help="run manifest path (default: <out>.manifest.json)")


def _add_standardize(p, default):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--standardize", dest="standardize", action="store_true", default=default)
    g.add_argument("--no-standardize", dest="standardize", action="store_false")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dqm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"dqm {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="more diagnostics on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="bootstrap / random-projection separability and variability")
    _add_input(p)
    p.add_argument("-B", "--n-bootstrap", type=int, default=100)
    p.add_argument("-R", "--sample-ratio", type=float, default=0.25)
    p.add_argument("--nv", "--n-vectors", dest="n_vectors", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    _add_standardize(p, True)
    _add_output(p)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("exact", help="exact eigenvalue measures (moderate n only)")
    _add_input(p)
    p.add_argument("--cap", type=int, default=DEFAULT_MAX_FEATURES, help="maximum feature count")
    p.add_argument("--ridge", type=float, help="fixed diagonal ridge for the within-class scatter")
    _add_standardize(p, True)
    _add_output(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("baseline", help="F1 / N1 / N3 complexity measures")
    _add_input(p)
    p.add_argument("--measures", default=",".join(MEASURES), help="comma-separated subset of f1,n1,n3")
    _add_standardize(p, False)
    _add_output(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("degrade", help="collapse one class onto noisy similar exemplars")
    _add_input(p)
    p.add_argument("--class", dest="target_class", required=True, help="class label (or dense id)")
    p.add_argument("-k", type=int, default=10, help="number of exemplars")
    p.add_argument("--count", type=int, default=1000, help="rows synthesized")
    p.add_argument("--sigma", type=float, default=1.0, help="Gaussian noise standard deviation")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-format", choices=("csv", "raw"))
    _add_output(p, required=True)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("correlate", help="Pearson / Spearman correlation of a paired CSV")
    p.add_argument("input", help="CSV with a header row")
    p.add_argument("--x", help="x column (default: first)")
    p.add_argument("--y", help="y column (default: second)")
    p.add_argument("--label-column", help="optional point-name column")
    _add_output(p)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("replay", help="re-run a manifest and compare with its recorded output")
    p.add_argument("input", help="manifest JSON")
    p.set_defaults(func=cmd_replay, manifest=None)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="dqm: %(message)s", stream=sys.stderr)
    args._started = datetime.now(timezone.utc).isoformat()
    try:
        code = args.func(args, argv)
    except (DatasetError, FileNotFoundError, ValueError) as exc:
        print(f"dqm: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (_Degenerate, NumericalDegeneracyError) as exc:
        print(f"dqm: numeric degeneracy: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return code or 0


if __name__ == "__main__":
    sys.exit(main())

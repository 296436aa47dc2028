"""``cvtele`` command line: teleport, verify, sweep, frontier.

Exit codes: 0 pass, 1 failed check or module error, 2 usage / parse error.
Errors are printed to stderr as one JSON object with module, check, defect
and tolerance keys.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import yaml

from . import oracle as orc
from . import suite
from . import teleport as tp
from .errors import CVTeleError, SpecParseError
from .states import build, frontier_point, parse_spec, sample_pure_resources

DEFAULTS = {
    "input": None,
    "resource": None,
    "trunc": None,
    "grid": "6:0.1",
    "mlattice": "6:0.1",
    "out": None,
    "format": None,
    "seed": 42,
    "gain": "sqrt2",
    "path": "auto",
    "oracle": False,
    "r_range": "0:1:0.1",
    "count": 200,
}

# per-command cutoffs used when --trunc is not given
TRUNC_DEFAULT = {"teleport": 20, "verify": 12, "sweep": 20, "frontier": 20}
SWEEP_COLUMNS = ("r", "delta_epr", "added_noise", "f_coh", "det_cm", "min_eig")
FRONTIER_COLUMNS = ("entropy", "delta_epr", "kind")
SVS_SELF_R = (0.2, 0.4, 0.8)
SVS_SELF_TOL = 1e-8


class UsageError(Exception):
    pass


def _pair(text, name):
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = str(text).split(":")
    try:
        a, b = (float(x) for x in parts)
    except ValueError:
        raise UsageError(f"--{name} expects two numbers as A:B, got {text!r}") from None
    if not (a > 0 and 0 < b <= a):
        raise UsageError(f"--{name} needs 0 < step <= half-width, got {text!r}")
    return a, b


def _r_values(text):
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = str(text).split(":")
    try:
        start, stop, step = (float(x) for x in parts)
    except ValueError:
        raise UsageError(f"--r-range expects start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start or start < 0:
        raise UsageError(f"invalid --r-range {text!r}")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 12) for i in range(n + 1)]


def _load_config(path):
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise UsageError("config file must hold a mapping")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return data


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", help="JSON or YAML file with default flag values")
    common.add_argument("--input", action="append", default=S, help="input state spec")
    common.add_argument("--resource", action="append", default=S, help="resource state spec")
    common.add_argument("--trunc", type=int, default=S, help="Fock cutoff N_c")
    common.add_argument("--grid", default=S, metavar="L:h", help="CF lattice half-width and step")
    common.add_argument("--mlattice", default=S, metavar="L:d", help="oracle outcome lattice")
    common.add_argument("--out", default=S, help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=S)
    common.add_argument("--seed", type=int, default=S)
    common.add_argument("--gain", choices=orc.GAINS, default=S,
                        help="Bob's displacement convention")
    common.add_argument("--path", choices=("auto", "fock", "gaussian"), default=S,
                        help="CF evaluation path")

    parser = argparse.ArgumentParser(prog="cvtele", description="CV teleportation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("teleport", parents=[common], help="single protocol run")
    p.add_argument("--oracle", action="store_true", default=S,
                   help="also run the brute-force protocol and report its fidelity")
    sub.add_parser("verify", parents=[common], help="invariant and oracle check matrix")
    p = sub.add_parser("sweep", parents=[common], help="SVS metrics over a range of r")
    p.add_argument("--r-range", dest="r_range", default=S, metavar="START:STOP:STEP")
    p = sub.add_parser("frontier", parents=[common], help="random pure resources vs the SVS bound")
    p.add_argument("--count", type=int, default=S)
    return parser


def resolve(args):
    """Merge CLI flags over config values over defaults."""
    cfg = dict(DEFAULTS)
    cli = vars(args).copy()
    command = cli.pop("command")
    path = cli.pop("config", None)
    if path:
        cfg.update(_load_config(path))
    cfg.update(cli)
    if cfg["trunc"] is None:
        cfg["trunc"] = TRUNC_DEFAULT[command]
    if cfg["trunc"] < 2:
        raise UsageError("--trunc must be >= 2")
    for key in ("input", "resource"):
        if isinstance(cfg[key], str):
            cfg[key] = [cfg[key]]
    cfg["grid"] = _pair(cfg["grid"], "grid")
    cfg["mlattice"] = _pair(cfg["mlattice"], "mlattice")
    cfg["command"] = command
    return cfg


def _numerics(cfg):
    (L, h), (L_m, d_m) = cfg["grid"], cfg["mlattice"]
    try:
        return tp.Numerics(trunc=cfg["trunc"], L=L, h=h, L_m=L_m, d_m=d_m)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _fmt(v):
    return "" if v is None else (repr(float(v)) if isinstance(v, float) else v)


def _csv(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _emit(cfg, text):
    if cfg["out"]:
        Path(cfg["out"]).write_text(text)
    else:
        sys.stdout.write(text)


def _single(cfg, key, default):
    vals = cfg[key] or [default]
    if len(vals) != 1:
        raise UsageError(f"{cfg['command']} takes a single --{key}")
    return vals[0]


def cmd_teleport(cfg):
    num = _numerics(cfg)
    in_spec = _single(cfg, "input", "vacuum")
    res_spec = _single(cfg, "resource", "svs:r=0.4")
    inp, res = build(in_spec, num.trunc), build(res_spec, num.trunc)
    job = tp.TeleportJob(inp, res, num, in_spec, res_spec)
    report = tp.run_protocol(job, cfg["path"])
    if cfg["oracle"]:
        out = orc.oracle_teleport_full(inp, res, num.L_m, num.d_m, cfg["gain"], num.L_eta, num.d_eta)
        report.oracle_fidelity = tp.fidelity(out.rho, tp.teleport_cf(job, cfg["path"]).rho)
        report.probability_deficit = out.probability_deficit
    text = report.to_csv() if cfg["format"] == "csv" else report.to_json() + "\n"
    _emit(cfg, text)
    return 0


def cmd_verify(cfg):
    (L, h), (L_m, d_m) = cfg["grid"], cfg["mlattice"]
    lines = []
    checks = suite.run_suite(
        inputs=tuple(cfg["input"] or suite.DEFAULT_INPUTS),
        resources=tuple(cfg["resource"] or suite.DEFAULT_RESOURCES),
        trunc=cfg["trunc"], L=L, h=h, L_m=L_m, d_m=d_m, gain=cfg["gain"],
        log=None if cfg["format"] else lines.append,
    )
    failed = [c for c in checks if not c.passed]
    if cfg["format"] == "json":
        rows = [{k: v for k, v in c.to_dict().items() if k != "seconds"} for c in checks]
        text = json.dumps({"checks": rows, "failed": len(failed)}, indent=2) + "\n"
    elif cfg["format"] == "csv":
        cols = ("module", "check", "subject", "defect", "tolerance", "passed")
        text = _csv(cols, [c.to_dict() for c in checks])
    else:
        lines.append(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
        text = "\n".join(lines) + "\n"
    _emit(cfg, text)
    for c in failed:
        print(json.dumps({"module": c.module, "check": c.check, "subject": c.subject,
                          "defect": c.defect, "tolerance": c.tolerance}), file=sys.stderr)
    return 1 if failed else 0


def _svs_dim(r, trunc, tail=1e-9):
    """Cutoff that keeps an SVS population tail below ``tail``."""
    t = math.tanh(r)
    if t < 1e-12:
        return trunc
    return max(trunc, int(math.ceil(math.log(tail) / (2 * math.log(t)))) + 1)


def sweep_rows(r_values, numerics, path="gaussian"):
    rows = []
    for r in r_values:
        res = build(f"svs:r={r!r}", _svs_dim(r, numerics.trunc))
        cm = tp.cm_from_resource(res, path)
        rows.append({
            "r": r,
            "delta_epr": tp.epr_uncertainty(res, path),
            "added_noise": tp.added_noise(res, numerics, path),
            "f_coh": tp.fidelity_coherent(res, numerics, path),
            "det_cm": cm.det,
            "min_eig": cm.min_eig_minus_half(),
        })
    return rows


def cmd_sweep(cfg):
    path = "gaussian" if cfg["path"] == "auto" else cfg["path"]
    rows = sweep_rows(_r_values(cfg["r_range"]), _numerics(cfg), path)
    if cfg["format"] == "json":
        _emit(cfg, json.dumps(rows, indent=2) + "\n")
    else:
        _emit(cfg, _csv(SWEEP_COLUMNS, rows))
    return 0


def frontier_run(count, seed, dim, extra=()):
    """Points for ``count`` seeded samples plus any extra specs, and a summary dict."""
    specs = list(sample_pure_resources(count, seed, dim)) if count > 0 else []
    for text in extra:
        spec = parse_spec(text, dim)
        if spec.modes != 2:
            raise UsageError(f"frontier needs two-mode resources, got {text!r}")
        specs.append(spec)
    points = [frontier_point(s, dim) for s in specs]
    self_defect = 0.0
    for r in SVS_SELF_R:
        p = frontier_point(f"svs:r={r}", _svs_dim(r, dim, tail=1e-16))
        self_defect = max(self_defect, abs(p.delta_epr - p.frontier))
    bad = [p for p in points if p.violation]
    summary = {
        "samples": len(points),
        "seed": seed,
        "trunc": dim,
        "violations": len(bad),
        "offending": [p.spec for p in bad],
        "svs_self_max_defect": self_defect,
        "svs_self_ok": self_defect <= SVS_SELF_TOL,
    }
    return points, summary


def cmd_frontier(cfg):
    if cfg["count"] < 0 or (cfg["count"] == 0 and not cfg["resource"]):
        raise UsageError("--count must be >= 1")
    points, summary = frontier_run(cfg["count"], cfg["seed"], cfg["trunc"], cfg["resource"] or ())
    rows = [{"entropy": p.entropy, "delta_epr": p.delta_epr, "kind": p.kind, "spec": p.spec,
             "violation": p.violation} for p in points]
    if cfg["format"] == "json":
        _emit(cfg, json.dumps({"points": rows, "summary": summary}, indent=2) + "\n")
    else:
        _emit(cfg, _csv(FRONTIER_COLUMNS, rows))
        print(json.dumps(summary), file=sys.stderr)
    if summary["violations"]:
        err = {"module": "states", "check": "frontier", "defect": summary["violations"],
               "tolerance": 0, "offending": summary["offending"]}
        print(json.dumps(err), file=sys.stderr)
        return 1
    return 0


COMMANDS = {"teleport": cmd_teleport, "verify": cmd_verify, "sweep": cmd_sweep,
            "frontier": cmd_frontier}


def _error(payload, code):
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve(args)
        return COMMANDS[cfg["command"]](cfg)
    except UsageError as exc:
        return _error({"module": "cli", "check": "usage", "defect": None, "tolerance": None,
                       "message": str(exc)}, 2)
    except SpecParseError as exc:
        return _error(exc.to_dict(), 2)
    except CVTeleError as exc:
        return _error(exc.to_dict(), 1)
    except Exception as exc:  # noqa: BLE001  keep the JSON error contract for crashes too
        return _error({"module": "cvtele", "check": type(exc).__name__, "defect": None,
                       "tolerance": None, "message": str(exc)}, 1)


if __name__ == "__main__":
    sys.exit(main())

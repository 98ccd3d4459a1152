"""Command-line interface: generate, solve, train, evaluate, bench.

Every command writes one JSON run record (stdout, or ``--record PATH``).
Tables additionally go to ``--csv PATH`` when given.

Exit status: 0 success, 2 invalid input, 3 file errors, 4 oracle refused.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .fourier import OracleLimitError
from .instances import (
    MatchingInstance,
    build_channels,
    load_instance,
    load_landmarks,
    make_offset_suite,
    make_shear_suite,
    parse_channel_spec,
    random_landmarks,
)
from .learning import (
    BoundCache,
    TrainConfig,
    WeightVector,
    accuracy_rows,
    cross_validate,
    evaluate,
    hinge_loss,
    instance_cache,
    instance_problem,
    solve_instance,
    train,
    vertex_accuracy,
    weights_document,
    weights_from_document,
)
from .solver import CosetNode, branch_and_bound, child_bounds, greedy_descent
from .validation import check_instances, check_weights

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_ORACLE = 4

ACCURACY_FIELDS = ["offset", "mode", "mean_acc", "std_acc", "n_instances"]
BENCH_FIELDS = ["n", "mode", "median_node_seconds", "median_greedy_seconds", "median_nodes_visited", "proof", "repeats"]

logger = logging.getLogger(__name__)


class CLIError(Exception):
    def __init__(self, message: str, code: int = EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


# --- helpers ----------------------------------------------------------------


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise CLIError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise CLIError(f"expected comma-separated integers, got {text!r}") from None


def _sub_seed(seed: int, stream: str) -> list[int]:
    """Seed sequence for a named sub-stream of the run seed."""
    return [seed, sum(ord(c) << (8 * k) for k, c in enumerate(stream)) % (2**32)]


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_text(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def _instance_files(paths: list[str]) -> list[Path]:
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(q for q in p.glob("*.json") if q.name != "manifest.json"))
        elif p.exists():
            out.append(p)
        else:
            raise CLIError(f"no such instance file or directory: {p}", EXIT_IO)
    if not out:
        raise CLIError("no instance files given")
    return out


def _load_instances(paths: list[str]) -> list[MatchingInstance]:
    out = []
    for p in _instance_files(paths):
        try:
            out.append(load_instance(p))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CLIError(f"{p}: not a valid instance document ({exc})") from None
    return out


def _load_weights(path: str | None, D: int) -> WeightVector:
    if path is None:
        return WeightVector.uniform(D)
    p = Path(path)
    if not p.exists():
        raise CLIError(f"weights file not found: {p}", EXIT_IO)
    try:
        wv = weights_from_document(json.loads(p.read_text()))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise CLIError(f"{p}: not a valid weights document ({exc})") from None
    check_weights(wv.omega, D)
    return wv


def _weights_mode(omega: np.ndarray) -> str:
    return "uniform" if np.all(omega == omega[0]) else "learned"


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        nu=args.nu,
        eta0=args.eta0,
        decay=args.decay,
        epochs=args.epochs,
        margin=args.margin,
        seed=int(np.random.default_rng(_sub_seed(args.seed, "training")).integers(2**31)),
    )


def _by_offset(instances: list[MatchingInstance]) -> dict:
    groups: dict = {}
    for inst in instances:
        groups.setdefault(inst.metadata.get("offset"), []).append(inst)
    return dict(sorted(groups.items(), key=lambda kv: (kv[0] is None, kv[0] if kv[0] is not None else 0)))


# --- commands ---------------------------------------------------------------


def cmd_generate(args) -> dict:
    parse_channel_spec(args.channels)
    out_dir = Path(args.out)
    seed = _sub_seed(args.seed, "generation")
    t0 = time.perf_counter()
    if args.landmarks:
        try:
            frames = load_landmarks(args.landmarks)
        except FileNotFoundError:
            raise CLIError(f"landmark file not found: {args.landmarks}", EXIT_IO) from None
        groups = {args.offset: make_offset_suite(frames, args.offset, args.channels, seed[1])}
    else:
        if args.n is None:
            raise CLIError("--synthetic needs --n")
        if args.n < 3:
            raise CLIError("--n must be at least 3")
        if args.count < 1:
            raise CLIError("--count must be positive")
        groups = make_shear_suite(args.n, _floats(args.offsets), args.count, args.channels, args.noise, seed[1])
    t_build = time.perf_counter() - t0
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = []
    k = 0
    for offset, insts in groups.items():
        for inst in insts:
            name = f"instance_{k:04d}.json"
            _write_atomic(out_dir / name, json.dumps(inst.to_dict()))
            manifest.append(
                {"file": name, "offset": offset, "n": inst.n, "D": inst.D, "has_sigma_star": inst.ground_truth is not None}
            )
            k += 1
    _write_atomic(out_dir / "manifest.json", json.dumps(manifest, indent=1))
    return {
        "results": {"out": str(out_dir), "count": len(manifest), "manifest": manifest},
        "seeds": {"run": args.seed, "generation": seed},
        "timing": {"build_seconds": t_build, "total_seconds": time.perf_counter() - t0},
    }


def cmd_solve(args) -> dict:
    instances = _load_instances(args.instances)
    check_instances(instances)
    w = _load_weights(args.weights, instances[0].D)
    t0 = time.perf_counter()
    results = []
    for path, inst in zip(_instance_files(args.instances), instances):
        t = time.perf_counter()
        res = solve_instance(inst, w.omega, args.mode, args.node_limit, args.oracle_limit)
        rec = {"instance": str(path), **res.to_dict(), "seconds": time.perf_counter() - t}
        if inst.ground_truth is not None:
            rec["accuracy"] = vertex_accuracy(res.permutation, inst.ground_truth)
        results.append(rec)
    return {
        "results": {"mode": args.mode, "weights_mode": _weights_mode(w.omega), "instances": results},
        "seeds": {"run": args.seed},
        "timing": {"solve_seconds": time.perf_counter() - t0},
    }


def _weights_table(labels, omega) -> str:
    width = max(8, *(len(s) for s in labels))
    lines = [f"{'channel':<{width}}  weight"]
    lines += [f"{lab:<{width}}  {w:.6g}" for lab, w in zip(labels, omega)]
    return "\n".join(lines)


def cmd_train(args) -> dict:
    instances = check_instances(_load_instances(args.instances), require_ground_truth=True)
    cfg = _train_config(args)
    t0 = time.perf_counter()
    cache = BoundCache([instance_cache(inst) for inst in instances])
    t_cache = time.perf_counter() - t0
    result = train(cache, cfg, instances[0].labels)
    t_train = time.perf_counter() - t0 - t_cache
    doc = weights_document(result, instances[0].labels)
    _write_atomic(Path(args.out), json.dumps(doc, indent=1))
    final = hinge_loss(result.weights.omega, cache, cfg.margin)
    print(_weights_table(doc["labels"], doc["omega"]), file=sys.stderr)
    print(f"final hinge loss {final:.6g}", file=sys.stderr)
    return {
        "results": {"weights_file": str(args.out), "labels": doc["labels"], "omega": doc["omega"], "final_hinge": final},
        "seeds": {"run": args.seed, "training": cfg.seed},
        "timing": {"cache_seconds": t_cache, "train_seconds": t_train},
    }


def cmd_evaluate(args) -> dict:
    instances = check_instances(_load_instances(args.instances), require_ground_truth=True)
    t0 = time.perf_counter()
    rows, weights_summary = [], {}
    groups = _by_offset(instances)
    if args.folds:
        cfg = _train_config(args)
        for offset, insts in groups.items():
            if args.folds > len(insts):
                raise CLIError(f"{args.folds} folds but only {len(insts)} instances at offset {offset}")
            cv = cross_validate(insts, args.folds, cfg, args.mode, offset)
            rows.extend(accuracy_rows([cv]))
            weights_summary[str(offset)] = cv.mean_weights()
        seeds = {"run": args.seed, "training": cfg.seed}
    else:
        w = _load_weights(None if args.uniform else args.weights, instances[0].D)
        mode = _weights_mode(w.omega)
        for offset, insts in groups.items():
            ev = evaluate(w.omega, insts, args.mode)
            rows.append({"offset": offset, "mode": mode, "mean_acc": ev.mean, "std_acc": ev.std, "n_instances": len(insts)})
        seeds = {"run": args.seed}
    text = _csv_text(rows, ACCURACY_FIELDS)
    if args.csv:
        _write_atomic(Path(args.csv), text)
    return {
        "results": {"rows": rows, "csv": text, "mean_weights": weights_summary},
        "seeds": seeds,
        "timing": {"evaluate_seconds": time.perf_counter() - t0},
    }


def _bench_instance(n: int, seed) -> MatchingInstance:
    rng = np.random.default_rng(seed)
    L = random_landmarks(n, rng)
    Lp = random_landmarks(n, rng)
    return MatchingInstance(build_channels(L, "delaunay,dist2", rng), build_channels(Lp, "delaunay,dist2", rng))


def cmd_bench(args) -> dict:
    sizes = _ints(args.sizes)
    if any(n < 3 for n in sizes):
        raise CLIError("bench sizes must be at least 3")
    rows = []
    t0 = time.perf_counter()
    for n in sizes:
        node_t, total_t, nodes, proofs = [], [], [], []
        for r in range(args.repeats):
            inst = _bench_instance(n, _sub_seed(args.seed, f"bench{n}.{r}"))
            t = time.perf_counter()
            problem = instance_problem(inst)
            root = problem.root_transform()
            if args.mode == "greedy":
                res = greedy_descent(problem, root)
            else:
                res = branch_and_bound(problem, root, node_limit=args.node_limit)
            total_t.append(time.perf_counter() - t)
            nodes.append(res.nodes_visited)
            proofs.append(res.proof)
            t = time.perf_counter()
            child_bounds(CosetNode.root(root))
            node_t.append(time.perf_counter() - t)
        rows.append(
            {
                "n": n,
                "mode": args.mode,
                "median_node_seconds": float(np.median(node_t)),
                "median_greedy_seconds": float(np.median(total_t)),
                "median_nodes_visited": float(np.median(nodes)),
                "proof": "exact" if all(p == "exact" for p in proofs) else "heuristic",
                "repeats": args.repeats,
            }
        )
    by_n = {r["n"]: r["median_node_seconds"] for r in rows}
    ratio = by_n[20] / by_n[10] if 10 in by_n and 20 in by_n else None
    text = _csv_text(rows, BENCH_FIELDS)
    if args.csv:
        _write_atomic(Path(args.csv), text)
    return {
        "results": {"rows": rows, "csv": text, "node_time_ratio_20_10": ratio},
        "seeds": {"run": args.seed},
        "timing": {"bench_seconds": time.perf_counter() - t0},
    }


# --- parser -----------------------------------------------------------------


def _add_train_options(p) -> None:
    p.add_argument("--nu", type=float, default=1e-3, help="regulariser strength")
    p.add_argument("--eta0", type=float, default=0.1, help="initial step length")
    p.add_argument("--decay", type=float, default=0.95, help="per-epoch step decay")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--margin", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="harmonic-match", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="run seed; all randomness derives from it")
    common.add_argument("--record", help="write the run record here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write matching instance files")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--synthetic", action="store_true", help="random landmarks under shear")
    src.add_argument("--landmarks", help="landmark file; pairs frame t with frame t + offset")
    g.add_argument("--n", type=int, help="vertices per graph (synthetic)")
    g.add_argument("--count", type=int, default=10, help="instances per offset (synthetic)")
    g.add_argument("--offsets", default="0.0", help="comma-separated shear offsets (synthetic)")
    g.add_argument("--noise", type=float, default=0.02, help="noise std as a fraction of the diameter")
    g.add_argument("--offset", type=int, default=1, help="frame offset (landmark files)")
    g.add_argument("--channels", default="delaunay,dist5", help="e.g. delaunay,dist5,shape,uninf3")
    g.add_argument("--out", required=True, help="output directory (created if missing)")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", parents=[common], help="match graph pairs")
    s.add_argument("instances", nargs="+", help="instance files or directories")
    s.add_argument("--mode", choices=["greedy", "exact", "brute"], default="greedy")
    s.add_argument("--weights", help="weights file from 'train'; uniform when omitted")
    s.add_argument("--node-limit", type=int, help="cap on expanded nodes in exact mode")
    s.add_argument("--oracle-limit", type=int, default=None, help="largest n accepted by brute mode")
    s.set_defaults(func=cmd_solve)

    t = sub.add_parser("train", parents=[common], help="learn channel weights")
    t.add_argument("instances", nargs="+")
    t.add_argument("--out", required=True, help="weights file to write")
    _add_train_options(t)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", parents=[common], help="accuracy table per offset")
    e.add_argument("instances", nargs="+")
    how = e.add_mutually_exclusive_group(required=True)
    how.add_argument("--weights", help="weights file from 'train'")
    how.add_argument("--uniform", action="store_true", help="all channel weights equal")
    how.add_argument("--folds", type=int, help="cross-validate learned against uniform weights")
    e.add_argument("--mode", choices=["greedy", "exact"], default="greedy")
    e.add_argument("--csv", help="write the table here")
    _add_train_options(e)
    e.set_defaults(func=cmd_evaluate)

    b = sub.add_parser("bench", parents=[common], help="timing table over graph sizes")
    b.add_argument("--sizes", default="8,12,16,20")
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--mode", choices=["greedy", "exact"], default="greedy")
    b.add_argument("--node-limit", type=int)
    b.add_argument("--csv", help="write the table here")
    b.set_defaults(func=cmd_bench)
    return parser


def _config_echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "record", "verbose")}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        payload = args.func(args)
        record = {"command": args.command, "config": _config_echo(args), "version": __version__, **payload}
        text = json.dumps(record, indent=1, default=str)
        if args.record:
            _write_atomic(Path(args.record), text + "\n")
        else:
            print(text)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OracleLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: ``asx <command> ...``.

Every command writes CSV or a model file to ``--out`` (stdout when omitted).
Exit status is 0 on success, 1 for bad data or files, 2 for bad usage.
"""
from __future__ import annotations

import argparse
import datetime
import logging
import os
import sys

import numpy as np

from . import __version__
from .applications import (CameraMatrix, ClassModel, classify, estimate_pose, fit_model_dirichlet,
                           stack_snippets, synthesize, top_k)
from .datasets import GENERATOR, SHAPES, arcs, arm_poses, generate
from .errors import AsxError, UsageError
from .geometry import apply_like, from_sphere, to_sphere
from .io import format_csv, format_table, read_csv, write_text
from .learning import TrainConfig, train
from .model import load_model, save_model
from .simplices import (PruneConfig, boundary_simplices, greedy_path, model_from_training, prune)
from .solver import error_table, project_onto_model

log = logging.getLogger("asx")

NORMS = ("unit", "center-unit", "stereographic")
EXTRA_SHAPES = ("arcs", "arm", "arm-swing")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _threads(args):
    if args.threads is not None:
        n = args.threads
    else:
        env = os.environ.get("ASX_THREADS", "1")
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"ASX_THREADS must be an integer, got {env!r}") from None
    if n < 1:
        raise UsageError("thread count must be >= 1")
    return n


def _emit(args, text):
    write_text(text, args.out, sys.stdout)


def _train_config(args, p=None, radius=None):
    try:
        return TrainConfig(p=args.bases if p is None else p,
                           radius=args.radius if radius is None else radius,
                           epochs=args.epochs, batch_size=args.batch_size, seed=args.seed,
                           tol=args.tol, forget=args.forget, threads=_threads(args))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _fit(data, cfg, args, extra_meta=None):
    res = train(data, cfg)
    meta = dict(data.meta)
    meta.update({"generator": GENERATOR, "package_version": __version__,
                 "train": {"p": cfg.p, "radius": cfg.radius, "epochs": cfg.epochs,
                           "batch_size": cfg.batch_size, "seed": cfg.seed, "tol": cfg.tol,
                           "forget": cfg.forget}})
    meta.update(extra_meta or {})
    if not args.no_timestamp:
        meta["created"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return model_from_training(res.basis, res.activations, res.trace, meta)


def _load_data_like(path, model, has_labels=False):
    pts, labels = read_csv(path, has_labels)
    if pts.shape[1] != model.basis.d - (1 if model.meta.get("norm") == "stereographic" else 0):
        raise UsageError(f"{path}: data has {pts.shape[1]} columns, which does not match "
                         f"the model (d={model.basis.d}, norm={model.meta.get('norm', 'unit')})")
    return apply_like(pts, model.meta, labels)


# -- commands ------------------------------------------------------------------

def cmd_gen(args):
    if args.shape == "arcs":
        pts, labels = arcs(args.n, args.seed, args.noise)
        _emit(args, format_csv(pts, labels))
        return
    if args.shape in ("arm", "arm-swing"):
        pts = arm_poses(args.n, args.seed, swing=args.shape == "arm-swing")
        if args.noise > 0:
            pts = pts + args.noise * np.random.default_rng(args.seed + 1).standard_normal(pts.shape)
        _emit(args, format_csv(pts))
        return
    _emit(args, format_csv(generate(args.shape, args.n, args.noise, args.seed, args.dim)))


def cmd_train(args):
    pts, labels = read_csv(args.data, args.labels)
    data = to_sphere(pts, args.norm, labels)
    model = _fit(data, _train_config(args), args)
    save_model(model, args.model)
    log.info("trained %d bases, %d simplices, final objective %.6g",
             model.basis.p, len(model.simplices), model.trace[-1] if model.trace else float("nan"))


def cmd_prune(args):
    model = load_model(args.model)
    data = _load_data_like(args.data, model)
    pruned = prune(model.simplices, data, model.basis, PruneConfig(args.lambda1, args.lambda2))
    meta = dict(model.meta)
    meta.update(pruned.meta)
    save_model(type(model)(model.basis, pruned.simplices, True, model.trace, meta), args.pruned)


def cmd_project(args):
    model = load_model(args.model)
    data = _load_data_like(args.data, model)
    rows = []
    for j, y in enumerate(data.points):
        k, _, err = project_onto_model(model, y)
        rows.append((j, k, float(err)))
    _emit(args, format_table(["point", "simplex", "error"], rows))


def _snippets(points, labels, window):
    """Stack consecutive rows within each run of equal labels."""
    out, out_labels = [], []
    start = 0
    for i in range(1, len(points) + 1):
        if i == len(points) or labels[i] != labels[start]:
            s = stack_snippets(points[start:i], window)
            out.append(s)
            out_labels.extend([labels[start]] * s.shape[0])
            start = i
    return np.vstack(out), out_labels


def cmd_classify(args):
    train_pts, train_labels = read_csv(args.train, True)
    test_pts, test_labels = read_csv(args.test, not args.unlabeled)
    if test_pts.shape[1] != train_pts.shape[1]:
        raise UsageError("training and test data have different numbers of columns")
    if args.snippet > 1:
        train_pts, train_labels = _snippets(train_pts, train_labels, args.snippet)
        if test_labels is None:
            test_pts = stack_snippets(test_pts, args.snippet)
        else:
            test_pts, test_labels = _snippets(test_pts, test_labels, args.snippet)
    # one normalization for all classes so their errors are comparable
    data = to_sphere(train_pts, args.norm, train_labels)
    test = apply_like(test_pts, data.meta)
    cfg = _train_config(args)
    models = {}
    for label in sorted(set(train_labels)):
        idx = [i for i, lab in enumerate(train_labels) if lab == label]
        models[label] = _fit(type(data)(data.points[idx], None, data.meta), cfg, args)
    cm = ClassModel(models)
    header = ["point", "predicted"] + (["label"] if test_labels is not None else []) \
        + [f"top{i + 1}" for i in range(args.top_k)]
    rows, hits = [], 0
    for j, y in enumerate(test.points):
        label, errors = classify(cm, y)
        row = [j, label]
        if test_labels is not None:
            row.append(test_labels[j])
            hits += label == test_labels[j]
        row += top_k(errors, args.top_k)
        rows.append(row)
    _emit(args, format_table(header, rows))
    if test_labels is not None and rows:
        print(f"accuracy,{hits / len(rows):.6f}", file=sys.stderr)


def cmd_fit_dirichlet(args):
    model = load_model(args.model)
    data = _load_data_like(args.data, model)
    fitted = fit_model_dirichlet(model, data, min_samples=args.min_samples)
    save_model(fitted, args.fitted)


def cmd_synthesize(args):
    model = load_model(args.model)
    pts, which = synthesize(model, args.count, args.seed, return_index=True)
    if args.original_frame:
        pts = from_sphere(pts, model.meta)
    _emit(args, format_csv(pts, [str(k) for k in which] if args.with_simplex else None))


def cmd_pose_estimate(args):
    model = load_model(args.model)
    cam_rows, _ = read_csv(args.camera)
    camera = CameraMatrix(cam_rows)
    obs, _ = read_csv(args.observations)
    n = model.basis.d // 3
    if obs.shape[1] != 2 * n:
        raise UsageError(f"{args.observations}: expected {2 * n} columns (x1,y1,...,x{n},y{n}), "
                         f"found {obs.shape[1]}")
    header = ["point", "simplex", "residual"] + [f"{c}{i + 1}" for i in range(n) for c in "xyz"]
    rows = []
    for j, o in enumerate(obs):
        est = estimate_pose(model, camera, o)
        rows.append([j, est.simplex, est.residual] + [float(v) for v in est.pose])
    _emit(args, format_table(header, rows))


def cmd_boundary(args):
    model = load_model(args.model)
    faces = boundary_simplices(model)
    _emit(args, "".join(" ".join(str(v) for v in f) + "\n" for f in faces))


def cmd_eval(args):
    pts, _ = read_csv(args.data)
    data = to_sphere(pts, args.norm)
    test = apply_like(read_csv(args.test)[0], data.meta) if args.test else data
    rows = []
    for p in args.bases:
        for r in args.radius:
            model = _fit(data, _train_config(args, p, r), args)
            if args.prune:
                model = prune(model.simplices, data, model.basis)
            err = error_table(model.simplices, model.basis, test.points).min(axis=1)
            dims = [s.dim for s in model.simplices]
            rows.append([p, float(r), float(err.mean()), len(dims), float(np.mean(dims))])
    _emit(args, format_table(["p", "r", "meanError", "simplexCount", "meanDim"], rows))


def cmd_prune_curve(args):
    model = load_model(args.model)
    data = _load_data_like(args.data, model)
    cands = model.simplices
    l1, l2 = PruneConfig(args.lambda1, args.lambda2).resolve(len(cands))
    E = error_table(cands, model.basis, data.points)
    steps = greedy_path(E, [s.dim for s in cands], l1, l2,
                        np.linalg.norm(data.points, axis=1), stop=False)
    rows = [[i + 1, s.candidate, cands[s.candidate].dim, s.loss, s.objective]
            for i, s in enumerate(steps)]
    _emit(args, format_table(["count", "candidate", "dim", "loss", "objective"], rows))


# -- parser --------------------------------------------------------------------

def _common(p, out=True):
    if out:
        p.add_argument("--out", "-o", help="output file (default: stdout)")
    p.add_argument("--threads", type=int, help="worker threads (default: $ASX_THREADS or 1)")
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the creation time from model metadata")


def _training(p, multi=False):
    if multi:
        p.add_argument("--bases", "-p", type=_ints, default=[8], help="basis counts, e.g. 8,16")
        p.add_argument("--radius", "-r", type=_floats, default=[1.0], help="radii, e.g. 0.2,0.6,1")
    else:
        p.add_argument("--bases", "-p", type=int, default=8, help="number of bases")
        p.add_argument("--radius", "-r", type=float, default=1.0, help="hull radius in (0, 1]")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6,
                   help="stop when the relative objective change per epoch is below this")
    p.add_argument("--forget", action="store_true",
                   help="accumulate statistics with 1 - 1/t forgetting instead of replacement")
    p.add_argument("--norm", choices=NORMS, default="center-unit")


def _penalties(p):
    p.add_argument("--lambda1", type=float, help="penalty per simplex (default 0.001/T)")
    p.add_argument("--lambda2", type=float, help="penalty per dimension (default 0.01/T)")


def build_parser():
    parser = _Parser(prog="asx", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="sample a synthetic data set as CSV")
    p.add_argument("shape", choices=sorted(SHAPES) + list(EXTRA_SHAPES))
    p.add_argument("n", type=int, help="number of points (per class for arcs)")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, help="embed in this many dimensions")
    _common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="learn bases and activated simplices")
    p.add_argument("data")
    p.add_argument("model")
    p.add_argument("--labels", action="store_true", help="the last CSV column holds labels")
    _training(p)
    _common(p, out=False)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("prune", help="greedy selection of a compact simplex subset")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("pruned", help="output model file")
    _penalties(p)
    _common(p, out=False)
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("project", help="nearest simplex and distance for every point")
    p.add_argument("model")
    p.add_argument("data")
    _common(p)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("classify", help="train one model per class and label test points")
    p.add_argument("train", help="labeled CSV (label in the last column)")
    p.add_argument("test")
    p.add_argument("--unlabeled", action="store_true", help="the test CSV has no label column")
    p.add_argument("--top-k", type=int, default=1)
    p.add_argument("--snippet", type=int, default=1,
                   help="stack each row with the following rows of the same label")
    _training(p)
    _common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("fit-dirichlet", help="fit per-simplex Dirichlet parameters")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("fitted", help="output model file")
    p.add_argument("--min-samples", type=int, default=5)
    _common(p, out=False)
    p.set_defaults(func=cmd_fit_dirichlet)

    p = sub.add_parser("synthesize", help="sample new points from a fitted model")
    p.add_argument("model")
    p.add_argument("count", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--original-frame", action="store_true",
                   help="undo the normalization recorded in the model")
    p.add_argument("--with-simplex", action="store_true",
                   help="append the index of the source simplex to each row")
    _common(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("pose-estimate", help="lift 2D joint observations to 3D poses")
    p.add_argument("model")
    p.add_argument("camera", help="CSV with the two rows of a 2 x 3 camera")
    p.add_argument("observations", help="CSV rows x1,y1,x2,y2,...")
    _common(p)
    p.set_defaults(func=cmd_pose_estimate)

    p = sub.add_parser("boundary", help="boundary faces of the maximal simplices")
    p.add_argument("model")
    _common(p)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("eval", help="reconstruction error over a grid of p and r")
    p.add_argument("data")
    p.add_argument("--test", help="evaluate on this CSV instead of the training data")
    p.add_argument("--prune", action="store_true", help="prune each model before evaluating")
    _training(p, multi=True)
    _common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("prune-curve", help="loss and objective along the full greedy path")
    p.add_argument("model")
    p.add_argument("data")
    _penalties(p)
    _common(p)
    p.set_defaults(func=cmd_prune_curve)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"{exc}\n(run 'asx --help' for usage)", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="asx: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"asx {args.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except AsxError as exc:
        print(f"asx {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

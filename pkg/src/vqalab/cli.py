"""Single command-line entry point wiring all modules.

Every run writes outputs atomically (temp file + rename) with a header
comment carrying the config hash; any stochastic command requires --seed.
Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import tempfile

import numpy as np

from . import errors
from .errors import SchemaError, VqaLabError
from .media import ClipMeta, parse_y4m, subsample_frames, validate_clip


def _config_hash(args: dict) -> str:
    blob = json.dumps({k: str(v) for k, v in sorted(args.items())}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _atomic_write(path: str, text: str, config: dict):
    header = f"# vqalab config={_config_hash(config)}\n"
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".vqalab-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(header)
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _env_default(name, fallback=None):
    return os.environ.get(f"VQALAB_{name.upper()}", fallback)


def _read_manifest(path):
    """CSV manifest: id,path[,width,height,duration]."""
    with open(path, newline="") as fh:
        rows = [r for r in fh if not r.startswith("#")]
    entries = list(csv.DictReader(rows))
    if not entries or "id" not in entries[0] or "path" not in entries[0]:
        raise SchemaError(f"manifest {path} needs id,path columns")
    return entries


def _load_seq(path):
    with open(path, "rb") as fh:
        return parse_y4m(fh.read())


# --- subcommand handlers -------------------------------------------------

def _cmd_features_diversity(args):
    from .diversity import diversity_profile

    rows = []
    for entry in _read_manifest(args.input):
        seq = _load_seq(entry["path"])
        p = diversity_profile(seq, stride=args.stride)
        rows.append([entry["id"], p.brightness, p.contrast, p.sharpness, p.si, p.ti, p.ci])
    out = "id,brightness,contrast,sharpness,si,ti,ci\n"
    out += "\n".join(",".join(f"{v:.9g}" if isinstance(v, float) else v for v in r) for r in rows) + "\n"
    _atomic_write(args.out, out, vars(args))
    return 0


def _cmd_features_nss(args):
    from .nss import load_pristine_model, niqe_score, s_nss_video

    model = load_pristine_model(args.pristine) if args.pristine else None
    lines = []
    for entry in _read_manifest(args.input):
        seq = _load_seq(entry["path"])
        feats = s_nss_video(seq, stride=args.stride)
        row = [entry["id"]] + [f"{v:.9g}" for v in feats]
        if model is not None:
            row.append(f"{niqe_score(seq, model):.9g}")
        lines.append(",".join(row))
    header = "id," + ",".join(f"f{i}" for i in range(36)) + (",niqe" if model else "")
    _atomic_write(args.out, header + "\n" + "\n".join(lines) + "\n", vars(args))
    return 0


def _cmd_validate(args):
    reports = []
    for entry in _read_manifest(args.input):
        meta = ClipMeta(
            id=entry["id"],
            width=int(entry["width"]),
            height=int(entry["height"]),
            duration=float(entry["duration"]),
        )
        rep = validate_clip(meta)
        reports.append(f"{meta.id},{'accept' if rep.accepted else 'reject'},{';'.join(rep.violations)}")
    _atomic_write(args.out, "id,verdict,violations\n" + "\n".join(reports) + "\n", vars(args))
    return 0


def _cmd_sureal_recover(args):
    from .sureal import (
        OpinionMatrix,
        compute_mos,
        flag_outlier_subjects,
        normalize_zscores,
        rescale_scores,
        solve_sureal,
    )

    matrix = OpinionMatrix.from_csv(args.input)
    z = rescale_scores(normalize_zscores(matrix))
    videos, mos, std, n = compute_mos(z)
    from .sureal import OpinionEntry

    zmat = OpinionMatrix(entries=[OpinionEntry(e.subject, e.video, e.session, e.score) for e in z.entries])
    params = solve_sureal(zmat)
    flags = set(flag_outlier_subjects(params))

    mos_rows = ["video_id,mos,std,n,sureal_quality"]
    x_by_video = dict(zip(params.videos, params.x_e))
    for v, m_, s_, n_ in zip(videos, mos, std, n):
        mos_rows.append(f"{v},{m_:.6g},{s_:.6g},{n_},{x_by_video[v]:.6g}")
    _atomic_write(args.out, "\n".join(mos_rows) + "\n", vars(args))

    subj_rows = ["subject_id,bias,inconsistency,flag"]
    for s_, b_, v_ in zip(params.subjects, params.b_s, params.v_s):
        subj_rows.append(f"{s_},{b_:.6g},{v_:.6g},{int(s_ in flags)}")
    _atomic_write(args.subjects_out, "\n".join(subj_rows) + "\n", vars(args))
    return 0


def _cmd_bench_run(args):
    from .evaluation import SplitPlan, report_to_json, run_benchmark

    mos_by_id = {}
    with open(args.mos, newline="") as fh:
        rows = [r for r in fh if not r.startswith("#")]
    for rec in csv.DictReader(rows):
        mos_by_id[rec["video_id"]] = float(rec["mos"])
    ids = sorted(mos_by_id)
    mos = np.array([mos_by_id[i] for i in ids])

    features_by_model = {}
    for path in args.features.split(","):
        name = os.path.splitext(os.path.basename(path))[0]
        with open(path, newline="") as fh:
            rows = [r for r in fh if not r.startswith("#")]
        table = {rec["id"]: rec for rec in csv.DictReader(rows)}
        missing = [i for i in ids if i not in table]
        if missing:
            raise SchemaError(f"{path} missing features for {missing[:3]}...")
        cols = [k for k in next(iter(table.values())) if k != "id"]
        features_by_model[name] = np.array([[float(table[i][c]) for c in cols] for i in ids])

    plan = SplitPlan(n_splits=args.splits, seed=args.seed)
    results = run_benchmark(features_by_model, mos, plan,
                            regressor_kind=args.regressor, grid=_small_grid())
    _atomic_write(args.out, report_to_json(results) + "\n", vars(args))
    return 0


def _small_grid():
    return {"C": (1.0, 32.0), "epsilon": (0.5,), "gamma": (0.01, 0.1, 1.0),
            "lambda": (1e-3, 1e-1, 1.0)}


def _cmd_moeva_pretrain(args):
    from .media import to_rgb
    from .moeva.pretrain import PretrainConfig, pretrain, save_encoder

    frames = []
    for entry in _read_manifest(args.corpus):
        seq = subsample_frames(_load_seq(entry["path"]), args.frame_stride)
        frames.extend(to_rgb(f) for f in seq.frames)
    config = PretrainConfig(steps=args.steps, seed=args.seed, frame_stride=args.frame_stride)
    result = pretrain(frames, config)
    save_encoder(result.pair.online, args.out)
    trace = "step,loss\n" + "\n".join(f"{i},{v:.9g}" for i, v in enumerate(result.loss_trace)) + "\n"
    _atomic_write(args.trace, trace, vars(args))
    return 0


def _cmd_moeva_extract(args):
    from .moeva.features import moeva_features
    from .moeva.pretrain import load_encoder

    params = load_encoder(args.encoder)
    lines = []
    for entry in _read_manifest(args.input):
        feats = moeva_features(_load_seq(entry["path"]), params)
        lines.append(",".join([entry["id"]] + [f"{v:.9g}" for v in feats]))
    header = "id," + ",".join(f"f{i}" for i in range(len(lines[0].split(",")) - 1))
    _atomic_write(args.out, header + "\n" + "\n".join(lines) + "\n", vars(args))
    return 0


def _cmd_study_serve(args):
    import uvicorn

    from .study import StudyConfig, StudyService, assign_subjects, build_playlists
    from .study_api import create_app

    video_ids = [e["id"] for e in _read_manifest(args.manifest)]
    config = StudyConfig(
        playlist_count=args.playlists,
        playlist_size=len(video_ids) // args.playlists,
        training_video_ids=args.training.split(",") if args.training else [],
    )
    playlists = build_playlists(video_ids, config, seed=args.seed)
    subjects = [f"subj{i:02d}" for i in range(args.subjects)]
    assignment = assign_subjects(subjects, config)
    service = StudyService(config, playlists, assignment, log_path=args.log, seed=args.seed)
    app = create_app(service, media_dir=args.media_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _cmd_report_diversity(args):
    from .report import FIG7_PAIRS, diversity_pair_points, hull_csv, render_scatter_hull_svg

    with open(args.profiles, newline="") as fh:
        rows = [r for r in fh if not r.startswith("#")]
    profiles = list(csv.DictReader(rows))
    if not profiles:
        raise SchemaError("empty profiles file")
    base, _ = os.path.splitext(args.profiles)
    for pair in FIG7_PAIRS:
        points = diversity_pair_points(profiles, pair)
        name = f"{pair[0]}_x_{pair[1]}"
        _atomic_write(f"{base}.hull.{name}.csv", hull_csv(points), vars(args))
        render_scatter_hull_svg(points, f"{base}.{name}.svg", title=name)
    return 0


def _cmd_report_mos(args):
    from .report import mos_histogram, render_histogram_svg

    with open(args.mos, newline="") as fh:
        rows = [r for r in fh if not r.startswith("#")]
    recs = list(csv.DictReader(rows))
    if not recs:
        raise SchemaError("empty MOS file")
    mos = np.array([float(r["mos"]) for r in recs])
    edges, counts = mos_histogram(mos, bin_width=args.bin_width)
    hist = "bin_lo,bin_hi,count\n" + "\n".join(
        f"{edges[i]:g},{edges[i + 1]:g},{counts[i]}" for i in range(len(counts))
    ) + "\n"
    base, _ = os.path.splitext(args.mos)
    _atomic_write(f"{base}.hist.csv", hist, vars(args))
    render_histogram_svg(mos, f"{base}.hist.svg", bin_width=args.bin_width)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vqalab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    feat = sub.add_parser("features", help="feature extraction").add_subparsers(dest="sub", required=True)
    d = feat.add_parser("diversity")
    d.add_argument("--input", required=True)
    d.add_argument("--stride", type=int, default=10)
    d.add_argument("--out", required=True)
    d.set_defaults(fn=_cmd_features_diversity)
    n = feat.add_parser("nss")
    n.add_argument("--input", required=True)
    n.add_argument("--pristine", default=None)
    n.add_argument("--stride", type=int, default=10)
    n.add_argument("--out", required=True)
    n.set_defaults(fn=_cmd_features_nss)

    v = sub.add_parser("validate", help="clip admission checks")
    v.add_argument("--input", required=True)
    v.add_argument("--out", required=True)
    v.set_defaults(fn=_cmd_validate)

    sur = sub.add_parser("sureal", help="score recovery").add_subparsers(dest="sub", required=True)
    r = sur.add_parser("recover")
    r.add_argument("--in", dest="input", required=True)
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--subjects-out", default=None)
    r.set_defaults(fn=_cmd_sureal_recover)

    ben = sub.add_parser("bench", help="benchmark harness").add_subparsers(dest="sub", required=True)
    b = ben.add_parser("run")
    b.add_argument("--features", required=True, help="comma-separated feature CSVs")
    b.add_argument("--mos", required=True)
    b.add_argument("--splits", type=int, default=1000)
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--regressor", default="svr-rbf", choices=["svr-rbf", "kernel-ridge"])
    b.add_argument("--out", required=True)
    b.set_defaults(fn=_cmd_bench_run)

    moe = sub.add_parser("moeva", help="mixture-of-experts model").add_subparsers(dest="sub", required=True)
    mp = moe.add_parser("pretrain")
    mp.add_argument("--corpus", required=True)
    mp.add_argument("--steps", type=int, default=200)
    mp.add_argument("--frame-stride", type=int, default=15)
    mp.add_argument("--seed", type=int, required=True)
    mp.add_argument("--out", required=True)
    mp.add_argument("--trace", required=True)
    mp.set_defaults(fn=_cmd_moeva_pretrain)
    me = moe.add_parser("extract")
    me.add_argument("--encoder", required=True)
    me.add_argument("--input", required=True)
    me.add_argument("--out", required=True)
    me.set_defaults(fn=_cmd_moeva_extract)

    st = sub.add_parser("study", help="study service").add_subparsers(dest="sub", required=True)
    ss = st.add_parser("serve")
    ss.add_argument("--manifest", required=True)
    ss.add_argument("--media-dir", default=None)
    ss.add_argument("--playlists", type=int, default=4)
    ss.add_argument("--subjects", type=int, default=48)
    ss.add_argument("--training", default="")
    ss.add_argument("--log", default=None)
    ss.add_argument("--seed", type=int, required=True)
    ss.add_argument("--host", default="127.0.0.1")
    ss.add_argument("--port", type=int, default=int(_env_default("port", "8642")))
    ss.set_defaults(fn=_cmd_study_serve)

    rep = sub.add_parser("report", help="plot-data emission").add_subparsers(dest="sub", required=True)
    rd = rep.add_parser("diversity")
    rd.add_argument("--profiles", required=True)
    rd.set_defaults(fn=_cmd_report_diversity)
    rm = rep.add_parser("mos")
    rm.add_argument("--mos", required=True)
    rm.add_argument("--bin-width", type=float, default=1.0)
    rm.set_defaults(fn=_cmd_report_mos)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if getattr(args, "subjects_out", "") is None:
        args.subjects_out = os.path.splitext(args.out)[0] + ".subjects.csv"
    try:
        return args.fn(args)
    except VqaLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

import numpy as np
import pytest

from conftest import gray444, simulate_panel, textured_luma
from vqalab.cli import main
from vqalab.media import serialize_y4m


def _write_clip(path, seed=0, frames=8, size=48):
    rng = np.random.default_rng(seed)
    seq = gray444(np.stack([textured_luma(rng, size, size) for _ in range(frames)]))
    path.write_bytes(serialize_y4m(seq))


def _write_manifest(tmp_path, clips):
    manifest = tmp_path / "manifest.csv"
    manifest.write_text("id,path\n" + "\n".join(f"{cid},{p}" for cid, p in clips) + "\n")
    return manifest


def test_features_diversity_command(tmp_path):
    clip = tmp_path / "a.y4m"
    _write_clip(clip)
    manifest = _write_manifest(tmp_path, [("clipA", clip)])
    out = tmp_path / "div.csv"
    code = main(["features", "diversity", "--input", str(manifest),
                 "--stride", "1", "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0].startswith("# vqalab config=")
    assert lines[1] == "id,brightness,contrast,sharpness,si,ti,ci"
    fields = lines[2].split(",")
    assert fields[0] == "clipA"
    assert all(np.isfinite(float(v)) for v in fields[1:])


def test_features_nss_command(tmp_path):
    clip = tmp_path / "a.y4m"
    _write_clip(clip)
    manifest = _write_manifest(tmp_path, [("clipA", clip)])
    out = tmp_path / "nss.csv"
    assert main(["features", "nss", "--input", str(manifest),
                 "--stride", "1", "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert len(lines[2].split(",")) == 37  # id + 36 features


def test_validate_command(tmp_path):
    manifest = tmp_path / "meta.csv"
    manifest.write_text(
        "id,path,width,height,duration\n"
        "ok,-,720,1280,30\n"
        "bad,-,1280,720,5\n"
    )
    out = tmp_path / "verdicts.csv"
    assert main(["validate", "--input", str(manifest), "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert "ok,accept," in lines[2]
    assert lines[3].startswith("bad,reject,")


def test_sureal_recover_command(tmp_path):
    rng = np.random.default_rng(0)
    matrix, _ = simulate_panel(rng, n_videos=10, n_subjects=6)
    csv_in = tmp_path / "opinions.csv"
    csv_in.write_text("subject_id,video_id,session,score\n" + "\n".join(
        f"{e.subject},{e.video},{e.session},{e.score}" for e in matrix.entries) + "\n")
    out = tmp_path / "mos.csv"
    assert main(["sureal", "recover", "--in", str(csv_in), "--seed", "0",
                 "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[1] == "video_id,mos,std,n,sureal_quality"
    assert len(lines) == 2 + 10
    subjects = (tmp_path / "mos.subjects.csv").read_text().strip().split("\n")
    assert subjects[1] == "subject_id,bias,inconsistency,flag"
    assert len(subjects) == 2 + 6


def test_report_mos_command(tmp_path):
    mos_csv = tmp_path / "mos.csv"
    rng = np.random.default_rng(1)
    mos_csv.write_text("video_id,mos\n" + "\n".join(
        f"v{i},{rng.uniform(0, 100):.2f}" for i in range(30)) + "\n")
    assert main(["report", "mos", "--mos", str(mos_csv)]) == 0
    assert (tmp_path / "mos.hist.csv").exists()
    assert (tmp_path / "mos.hist.svg").exists()
    hist = (tmp_path / "mos.hist.csv").read_text().strip().split("\n")
    assert hist[1] == "bin_lo,bin_hi,count"


def test_report_diversity_command(tmp_path):
    profiles = tmp_path / "profiles.csv"
    rng = np.random.default_rng(2)
    cols = "id,brightness,contrast,sharpness,si,ti,ci"
    rows = [f"v{i}," + ",".join(f"{rng.uniform(1, 50):.3f}" for _ in range(6))
            for i in range(20)]
    profiles.write_text(cols + "\n" + "\n".join(rows) + "\n")
    assert main(["report", "diversity", "--profiles", str(profiles)]) == 0
    assert (tmp_path / "profiles.hull.si_x_ti.csv").exists()
    assert (tmp_path / "profiles.si_x_ti.svg").exists()
    assert (tmp_path / "profiles.hull.brightness_x_contrast.csv").exists()


def test_domain_error_exit_code_1(tmp_path):
    manifest = tmp_path / "bad.csv"
    manifest.write_text("name,location\nfoo,bar\n")
    code = main(["features", "diversity", "--input", str(manifest),
                 "--out", str(tmp_path / "o.csv")])
    assert code == 1


def test_usage_error_exit_code_2():
    assert main(["no-such-command"]) == 2
    assert main(["features", "diversity"]) == 2  # missing required args


def test_no_stray_temp_files_after_write(tmp_path):
    clip = tmp_path / "a.y4m"
    _write_clip(clip)
    manifest = _write_manifest(tmp_path, [("c", clip)])
    main(["features", "diversity", "--input", str(manifest),
          "--stride", "1", "--out", str(tmp_path / "out.csv")])
    stray = [p for p in tmp_path.iterdir() if p.name.startswith(".vqalab-")]
    assert stray == []

import json

import numpy as np
import pytest

from ganfinder import codec
from ganfinder.cli import main
from ganfinder.metrics import EvalReport


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli") / "data"
    assert main(["gen-data", "--family", "rect", "--density", "0.2", "--size", "16",
                 "--count", "20", "--seed", "7", "--out", str(d)]) == 0
    return d


def test_gen_data_splits_and_repeatability(dataset, tmp_path, capsys):
    m = json.loads((dataset / "manifest.json").read_text())
    assert len(m["instances"]) == 20
    tags = [r["split"] for r in m["instances"]]
    assert (tags.count("train"), tags.count("test"), tags.count("validation")) == (15, 3, 2)
    again = tmp_path / "again"
    assert main(["gen-data", "--family", "rect", "--density", "0.2", "--size", "16",
                 "--count", "20", "--seed", "7", "--out", str(again)]) == 0
    assert (again / "manifest.json").read_bytes() == (dataset / "manifest.json").read_bytes()


def test_gen_data_conflicting_flags(tmp_path, capsys):
    assert main(["gen-data", "--family", "rect", "--density-range", "0.1", "0.3", "--out", str(tmp_path)]) == 1
    assert main(["gen-data", "--family", "random", "--density", "0.2", "--out", str(tmp_path)]) == 1
    assert main(["gen-data", "--family", "rect", "--density", "0", "--out", str(tmp_path)]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["gen-data", "--family", "hexagons", "--out", str(tmp_path)])
    assert exc.value.code == 1


def test_train_eval_infer_render(dataset, tmp_path, capsys):
    out = tmp_path / "run"
    cfg = tmp_path / "train.cfg"
    cfg.write_text(f"data = {dataset}\nout = {out}\nepochs = 1\nbatch_size = 8\nbase_features = 8\n")
    assert main(["train", "--config", str(cfg), "--ablation", "pix2pix-baseline"]) == 0
    ckpt = out / "final.pt"
    assert ckpt.exists() and (out / "train.csv").exists()

    assert main(["eval", "--checkpoint", str(ckpt), "--data", str(dataset), "--split", "test",
                 "--out", str(tmp_path / "ev")]) == 0
    rep = EvalReport.read(tmp_path / "ev")
    assert len(rep.instances) == 3
    assert "Success" in capsys.readouterr().out

    rec = json.loads((dataset / "manifest.json").read_text())["instances"][0]
    png_out = tmp_path / "gen.png"
    assert main(["infer", "--checkpoint", str(ckpt), "--input", str(dataset / rec["input_path"]),
                 "--out", str(png_out)]) == 0
    for p in (png_out, tmp_path / "gen_post.png"):
        codec.decode_classes(codec.load_png(p), strict=True)

    panel = tmp_path / "panel.png"
    assert main(["render", "--data", str(dataset), "--instance", rec["id"], "--checkpoint", str(ckpt),
                 "--scale", "8", "--out", str(panel)]) == 0
    img = codec.load_png(panel)
    assert img.shape == (16 * 8, 4 * 16 * 8 + 3 * 2)


def test_render_scale(dataset, tmp_path):
    rec = json.loads((dataset / "manifest.json").read_text())["instances"][1]
    panel = tmp_path / "p.png"
    assert main(["render", "--data", str(dataset), "--instance", rec["id"], "--scale", "8", "--out", str(panel)]) == 0
    img = codec.load_png(panel)
    inp = codec.load_png(dataset / rec["input_path"])
    assert np.array_equal(img[:, :128][::8, ::8], inp)
    assert (img[:8, :8] == inp[0, 0]).all()


def test_eval_oracle_parses_back(dataset, tmp_path):
    assert main(["eval", "--oracle", "--data", str(dataset), "--split", "train", "--out", str(tmp_path)]) == 0
    rep = EvalReport.read(tmp_path / "report.json")
    assert rep.success_rate == 100.0 and rep.mean_gaps == 0.0 and rep.mean_mse == 0.0


def test_infer_rejects_off_palette(dataset, tmp_path, capsys):
    bad = np.full((16, 16), 255, np.uint8)
    bad[3, 5] = 77
    p = tmp_path / "bad.png"
    codec.save_png(bad, p)
    assert main(["infer", "--checkpoint", "missing.pt", "--input", str(p), "--out", str(tmp_path / "o.png")]) == 1
    assert "row=3, col=5" in capsys.readouterr().err


def test_missing_dataset_is_runtime_error(tmp_path):
    assert main(["train", "--data", str(tmp_path / "nope"), "--out", str(tmp_path / "o")]) == 2

"""CLI pipeline: determinism, exit codes, report shapes."""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import random_image
from coabench.cli import main
from coabench.images import load_ppm, save_ppm, save_stl10


def _write_dataset(tmp_path, rng, n=12, size=16):
    data = tmp_path / "data"
    data.mkdir()
    for i in range(n):
        (data / f"{i:03d}.ppm").write_bytes(save_ppm(random_image(rng, size, size)))
    return data


def _config(tmp_path, **kw):
    cfg = {
        "dataset": {"kind": "ppm-dir", "path": str(tmp_path / "data")},
        "desk": {"image_size": None, "train_count": 8, "test_count": 4},
        "scheme": {"kind": "pixelwise", "policy": "same"},
        "attack": {"kind": "none"},
        "seeds": {"cipher": 1, "split": 2, "training": 3},
    }
    cfg.update(kw)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def _tree_bytes(root: Path, skip=("report.json",)):
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file() and p.name not in skip:
            out[str(p.relative_to(root))] = p.read_bytes()
    return out


def test_encrypt_deterministic(tmp_path, rng):
    _write_dataset(tmp_path, rng)
    cfg = _config(tmp_path)
    assert main(["encrypt", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["encrypt", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    assert _tree_bytes(tmp_path / "a") == _tree_bytes(tmp_path / "b")


def test_blockwise_dimension_error_exit_code(tmp_path, rng):
    data = tmp_path / "data"
    data.mkdir()
    for i in range(12):
        (data / f"{i:03d}.ppm").write_bytes(save_ppm(random_image(rng, 15, 15)))
    cfg = _config(tmp_path, scheme={"kind": "blockwise"})
    assert main(["encrypt", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dataset": {"kind": "nope", "path": "x"}}))
    assert main(["encrypt", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert main(["encrypt", "--config", str(tmp_path / "missing.json")]) == 1


def test_different_keys_policy_writes_per_image_records(tmp_path, rng):
    _write_dataset(tmp_path, rng)
    cfg = _config(tmp_path, scheme={"kind": "pixelwise", "policy": "different"})
    out = tmp_path / "o"
    assert main(["encrypt", "--config", str(cfg), "--out", str(out)]) == 0
    keys = json.loads((out / "keys.json").read_text())
    assert len(keys["derived"]["train"]) == 8
    assert len(keys["derived"]["test"]) == 4
    assert keys["derived"]["train"][0] != keys["derived"]["train"][1]


def test_itn_without_pairs_is_missing_pairs(tmp_path, rng):
    _write_dataset(tmp_path, rng)
    cfg = _config(tmp_path, attack={"kind": "itn", "solver": "closed"})
    out = tmp_path / "o"
    assert main(["encrypt", "--config", str(cfg), "--out", str(out)]) == 0
    for f in (out / "plain_train").glob("*.ppm"):
        f.unlink()
    assert main(["attack", "--config", str(cfg), "--out", str(out)]) == 2


def test_full_report_itn_and_reproducibility(tmp_path, rng):
    _write_dataset(tmp_path, rng, n=20)
    cfg = _config(
        tmp_path,
        desk={"image_size": None, "train_count": 12, "test_count": 6},
        attack={"kind": "itn", "solver": "closed"},
    )
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(["report", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["report", "--config", str(cfg), "--out", str(out2)]) == 0
    assert _tree_bytes(out1) == _tree_bytes(out2)
    report = json.loads((out1 / "report.json").read_text())
    # closed-form same-key recovery is exact
    assert report["aggregate"]["ssim_mean"] == 1.0
    assert report["aggregate"]["mse_mean"] == 0.0
    assert len(report["rows"]) == 6
    csv_lines = (out1 / "report.csv").read_text().strip().split("\n")
    assert csv_lines[0] == "scheme,key_policy,attack,image_id,ssim,mse"
    assert csv_lines[-1].split(",")[3] == "AGG"
    # reconstructions equal the plaintexts on disk
    for i in range(6):
        rec = load_ppm((out1 / "recon_test" / f"{i:04d}.ppm").read_bytes())
        ref = load_ppm((out1 / "plain_test" / f"{i:04d}.ppm").read_bytes())
        assert np.array_equal(rec, ref)


def test_evaluate_ciphertext_against_itself(tmp_path, rng):
    _write_dataset(tmp_path, rng)
    cfg = _config(tmp_path, evaluate={"reference": "ciphertext"})
    out = tmp_path / "o"
    assert main(["encrypt", "--config", str(cfg), "--out", str(out)]) == 0
    assert main(["evaluate", "--config", str(cfg), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert all(row["ssim"] == 1.0 for row in report["rows"])


def test_fr_attack_deterministic_and_best_of_b(tmp_path, rng):
    _write_dataset(tmp_path, rng)
    cfg = _config(tmp_path, attack={"kind": "fr", "bits": 8, "leading_bit": "both"})
    out = tmp_path / "o"
    assert main(["report", "--config", str(cfg), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert all("fr_leading_bit" in row for row in report["rows"])
    a = _tree_bytes(out)
    assert main(["report", "--config", str(cfg), "--out", str(out)]) == 0
    assert _tree_bytes(out) == a


def test_seed_override_changes_outputs(tmp_path, rng):
    _write_dataset(tmp_path, rng)
    cfg = _config(tmp_path)
    o1, o2 = tmp_path / "s1", tmp_path / "s2"
    assert main(["encrypt", "--config", str(cfg), "--out", str(o1)]) == 0
    assert (
        main(
            [
                "encrypt",
                "--config",
                str(cfg),
                "--out",
                str(o2),
                "--seed-override",
                "cipher=999",
            ]
        )
        == 0
    )
    enc1 = (o1 / "enc_test" / "0000.ppm").read_bytes()
    enc2 = (o2 / "enc_test" / "0000.ppm").read_bytes()
    assert enc1 != enc2
    assert main(["encrypt", "--config", str(cfg), "--seed-override", "bogus=1"]) == 1


def test_stl10_source_and_desk_prepare(tmp_path, rng):
    imgs = [random_image(rng, 96, 96) for _ in range(6)]
    binfile = tmp_path / "train_X.bin"
    binfile.write_bytes(save_stl10(imgs))
    cfg = _config(
        tmp_path,
        dataset={"kind": "stl10", "path": str(binfile), "count": 6},
        desk={"image_size": 32, "train_count": 4, "test_count": 2},
    )
    out = tmp_path / "o"
    assert main(["encrypt", "--config", str(cfg), "--out", str(out)]) == 0
    img = load_ppm((out / "plain_train" / "0000.ppm").read_bytes())
    assert img.shape == (32, 32, 3)


def test_gan_attack_cli_smoke(tmp_path, rng):
    _write_dataset(tmp_path, rng, n=20)
    cfg = _config(
        tmp_path,
        desk={"image_size": None, "train_count": 16, "test_count": 4},
        attack={"kind": "gan", "epochs": 2, "batch_size": 4},
    )
    out = tmp_path / "o"
    assert main(["report", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "gan_losses.csv").is_file()
    assert (out / "model.ckpt").is_file()
    report = json.loads((out / "report.json").read_text())
    assert report["attack_meta"]["model_sha256"]


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "coabench.cli", "keyspace", "--scheme", "blockwise"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "594.2772" in proc.stdout
    assert "106.4067" in proc.stdout

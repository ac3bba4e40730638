import json

import numpy as np
import pytest

from main import run
from networks import build_toy_net
from storages import LocalTensorStorage
from storages.checkpoints import load_network
from storages.scenes import load_dataset


def _json(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_dict_writes_container_and_metadata(tmp_path):
    assert run(["dict", "--out", str(tmp_path)]) == 0
    metadata = _json(tmp_path / "dictionary.json")
    assert metadata["retained_count"] == 4
    assert metadata["energy_ratio"] >= 0.999
    grids = LocalTensorStorage(tmp_path).read_tensor("dictionary.ftns")
    assert grids.shape == (4, 7, 7)


def test_even_kernel_size_is_a_usage_error(tmp_path, capsys):
    assert run(["dict", "--k", "8", "--out", str(tmp_path)]) == 2
    assert "--k" in capsys.readouterr().err
    assert not (tmp_path / "dictionary.json").exists()


def test_config_file_and_flags(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"dictionary": {"kernel_size": 9}}))
    out = tmp_path / "out"
    assert run(["dict", "--config", str(config), "--out", str(out)]) == 0
    assert _json(out / "dictionary.json")["kernel_size"] == 9

    assert run(
        ["dict", "--config", str(config), "--k", "5", "--out", str(out)]
    ) == 0
    assert _json(out / "dictionary.json")["kernel_size"] == 5


def test_config_errors(tmp_path):
    assert run(["dict", "--config", str(tmp_path / "absent.json")]) == 3
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"unknown_section": {}}))
    assert run(["dict", "--config", str(config), "--out", str(tmp_path)]) == 2


def test_unknown_subcommand_exits_with_usage():
    with pytest.raises(SystemExit) as info:
        run(["teleport"])
    assert info.value.code == 2


def test_eval_of_identical_counts(tmp_path):
    code = run(
        ["eval", "--pred", "3", "5", "--gt", "3", "5", "--out", str(tmp_path)]
    )
    assert code == 0
    report = _json(tmp_path / "eval.json")
    assert report["mae"] == 0.0
    assert report["mse"] == 0.0
    assert report["count"] == 2


def test_eval_rejects_unpaired_counts(tmp_path):
    args = ["eval", "--pred", "1", "2", "--gt", "1", "--out", str(tmp_path)]
    assert run(args) == 2


def test_zero_blur_filter_reproduces_the_input(tmp_path, rng):
    storage = LocalTensorStorage(tmp_path)
    storage.write_tensor("x.ftns", rng.standard_normal((3, 12, 10)))
    storage.write_tensor("blur.ftns", np.zeros((12, 10)))
    out = tmp_path / "out"
    for mode in ("approx", "exact"):
        code = run(
            [
                "filter",
                "--input", str(tmp_path / "x.ftns"),
                "--blur", str(tmp_path / "blur.ftns"),
                "--mode", mode,
                "--out", str(out),
            ]
        )
        assert code == 0
        assert (out / "filtered.ftns").read_bytes() == (
            tmp_path / "x.ftns"
        ).read_bytes()


def test_filter_with_perspective_csv(tmp_path, rng):
    storage = LocalTensorStorage(tmp_path)
    storage.write_tensor("x.ftns", rng.standard_normal((2, 8, 8)))
    rows = "\n".join(",".join(["2.0"] * 8) for _ in range(8))
    (tmp_path / "p.csv").write_text(rows + "\n")
    code = run(
        [
            "filter",
            "--input", str(tmp_path / "x.ftns"),
            "--perspective", str(tmp_path / "p.csv"),
            "--alpha", "1.0",
            "--beta", "1.0",
            "--out", str(tmp_path / "out"),
        ]
    )
    assert code == 0
    smoothed = LocalTensorStorage(tmp_path / "out").read_tensor(
        "filtered.ftns"
    )
    assert smoothed.shape == (2, 8, 8)


def test_filter_errors(tmp_path, rng):
    storage = LocalTensorStorage(tmp_path)
    storage.write_tensor("x.ftns", rng.standard_normal((2, 6, 6)))
    storage.write_tensor("blur.ftns", np.ones((5, 6)))
    base = ["filter", "--input", str(tmp_path / "x.ftns"), "--out",
            str(tmp_path)]
    assert run(base + ["--blur", str(tmp_path / "absent.ftns")]) == 3
    assert run(base + ["--blur", str(tmp_path / "blur.ftns")]) == 3
    storage.write_tensor("negative.ftns", -np.ones((6, 6)))
    assert run(base + ["--blur", str(tmp_path / "negative.ftns")]) == 2


def test_bench_writes_report_and_timings(tmp_path):
    code = run(
        ["bench", "--shape", "2", "12", "12", "--reps", "3", "--out",
         str(tmp_path)]
    )
    assert code == 0
    report = _json(tmp_path / "bench.json")
    assert report["shape"] == [2, 12, 12]
    assert report["min_speedup"] == 5.0
    assert report["passed"] == (report["speedup"] >= 5.0)
    rows = LocalTensorStorage(tmp_path).read_csv("bench_timings.csv")
    assert len(rows) == 3


def test_synth_train_eval(tmp_path):
    out = str(tmp_path)
    code = run(["synth", "--num-scenes", "2", "--count", "4", "--out", out])
    assert code == 0
    assert (tmp_path / "scenes" / "scene_0001" / "image.pgm").exists()

    scenes = str(tmp_path / "scenes")
    code = run(
        ["train", "--scenes", scenes, "--blocks", "1", "--epochs", "1",
         "--out", out]
    )
    assert code == 0
    report = _json(tmp_path / "train_report.json")
    assert len(report["loss_curve"]) == 1
    assert (tmp_path / "checkpoint" / "manifest.json").exists()

    code = run(
        ["eval", "--checkpoint", str(tmp_path / "checkpoint"), "--scenes",
         scenes, "--out", out]
    )
    assert code == 0
    assert _json(tmp_path / "eval.json")["count"] == 2


def test_gradcheck_command(tmp_path):
    code = run(
        ["gradcheck", "--blocks", "1", "--max-checks", "120", "--out",
         str(tmp_path)]
    )
    assert code == 0
    report = _json(tmp_path / "gradcheck.json")
    assert report["passed"] is True
    assert report["checked"] > 0


def test_penet_phases_need_a_decoder(tmp_path):
    code = run(
        ["penet", "--phases", "2", "--num-scenes", "2", "--out",
         str(tmp_path)]
    )
    assert code == 2


def test_zero_epochs_checkpoint_is_the_initialization(tmp_path):
    out = str(tmp_path)
    assert run(["synth", "--num-scenes", "2", "--count", "3", "--out",
                out]) == 0
    scenes = str(tmp_path / "scenes")
    code = run(
        ["train", "--scenes", scenes, "--blocks", "1", "--epochs", "0",
         "--seed", "5", "--out", out]
    )
    assert code == 0
    loaded, manifest = load_network(
        LocalTensorStorage(tmp_path / "checkpoint")
    )
    assert manifest.epoch == 0
    maps = [
        scene.gt_perspective
        for scene in load_dataset(LocalTensorStorage(scenes))
    ]
    initial = build_toy_net(loaded.config, seed=5, perspective_maps=maps)
    for name, value in initial.state_dict().items():
        np.testing.assert_array_equal(loaded.state_dict()[name], value)

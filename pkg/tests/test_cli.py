import json
from pathlib import Path

import numpy as np
import pytest

from repsim import fileio
from repsim.cli import build_parser, full_help, main, spec_from_args

GOLDEN = Path(__file__).parent / "golden" / "help.txt"


def test_help_matches_golden_file():
    assert full_help() == GOLDEN.read_text()


def test_every_command_is_listed():
    text = full_help()
    for name in ("compare", "pairwise", "snr-sweep", "rnn-toy", "train-group", "convergence",
                 "stability", "cluster", "run"):
        assert f"==> repsim {name} --help" in text


@pytest.fixture
def layer_files(tmp_path, rng):
    x = rng.standard_normal((4, 60))
    a = fileio.save_activations(tmp_path / "a.npy", x)
    b = fileio.save_activations(tmp_path / "b.npy", 2 * x + 1)
    c = fileio.save_activations(tmp_path / "c.npy", rng.standard_normal((4, 60)))
    return a, b, c


def test_compare_prints_distance(layer_files, tmp_path, capsys):
    a, b, _ = layer_files
    assert main(["compare", str(a), str(b), "--output-dir", str(tmp_path / "out")]) == 0
    assert float(capsys.readouterr().out.strip()) < 1e-8
    report, prov = fileio.load_report(tmp_path / "out" / "report.json")
    assert report.metric == "pwcca"
    assert prov["spec"]["parameters"]["files"] == [str(a), str(b)]


def test_usage_errors_exit_2(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"recipe": "nope"}))
    assert main(["run", str(cfg)]) == 2
    assert main(["snr-sweep", "--param", "bogus=1", "--output-dir", str(tmp_path)]) == 2


def test_runtime_errors_exit_1(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["compare", str(tmp_path / "x.npy"), str(tmp_path / "y.npy"), "--output-dir", str(out)]) == 1
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"] == "IoFailure"
    assert json.loads((out / "error.json").read_text())["error"] == "IoFailure"


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"parameters": {"noise_std": 0.5, "total_dims": 30}, "seeds": [4]}))
    args = build_parser().parse_args(["snr-sweep", "--config", str(cfg), "--noise-std", "0.2"])
    spec = spec_from_args(args).resolved()
    assert spec.parameters["noise_std"] == 0.2
    assert spec.parameters["total_dims"] == 30
    assert spec.parameters["datapoints"] == 2000
    assert spec.seeds == [4]


def test_pairwise_then_cluster(layer_files, tmp_path):
    out = tmp_path / "pw"
    assert main(["pairwise", *map(str, layer_files), "--cluster", "--k", "2", "--output-dir", str(out)]) == 0
    clusters = json.loads((out / "clusters.json").read_text())
    assert clusters["assignments"]["a"] == clusters["assignments"]["b"] != clusters["assignments"]["c"]
    assert main(["cluster", str(out / "matrix.json"), "--k", "2", "--output-dir", str(tmp_path / "cl")]) == 0
    again = json.loads((tmp_path / "cl" / "clusters.json").read_text())
    assert again["assignments"] == clusters["assignments"]


def test_run_is_deterministic(tmp_path):
    outputs = []
    for i in range(2):
        cfg = tmp_path / f"cfg{i}.json"
        out = tmp_path / f"run{i}"
        cfg.write_text(json.dumps({"recipe": "snr_sweep", "seeds": [0, 1], "output_dir": str(out),
                                   "parameters": {"k_values": [3, 6], "total_dims": 8, "datapoints": 100}}))
        assert main(["run", str(cfg)]) == 0
        outputs.append((out / "records.csv").read_text().splitlines()[1:])
    assert outputs[0] == outputs[1]


def test_rnn_toy_and_stability(tmp_path):
    out = tmp_path / "rnn"
    assert main(["rnn-toy", "--hidden-dim", "4", "--steps", "5", "--runs", "20", "--output-dir", str(out)]) == 0
    lines = (out / "plot.csv").read_text().splitlines()
    assert lines[1].startswith("timestep,") and len(lines) == 7
    out = tmp_path / "stab"
    assert main(["stability", "--param", "widths=4,6,2", "--param", "classes=2", "--param", "per_class=10",
                 "--param", "probe_per_class=10", "--param", "epochs=5", "--param", "batch_size=5",
                 "--output-dir", str(out)]) == 0
    assert (out / "stability_seed_0.csv").exists()


def test_convergence_from_checkpoint_dir(tmp_path):
    from repsim.toy_nets import MlpSpec, TrainConfig, make_dataset, train_mlp
    data = make_dataset(4, 2, 10, 0.5, 0)
    cks = train_mlp(MlpSpec((4, 6, 2)), data, TrainConfig(epochs=4, batch_size=5), data.inputs)
    fileio.save_checkpoints(tmp_path / "ck", cks)
    out = tmp_path / "conv"
    assert main(["convergence", "--checkpoint-dir", str(tmp_path / "ck"), "--metrics", "pwcca,cosine",
                 "--output-dir", str(out)]) == 0
    crossings = json.loads((out / "crossings.json").read_text())["crossings"]
    assert set(crossings) == {"layer0", "layer1"}

"""Declarative experiment recipes that write plot-ready artifacts.

Every recipe takes a resolved :class:`ExperimentSpec`, is deterministic given
its seeds, and writes JSON (per seed and aggregated) plus CSV tables ready
for plotting. Each output embeds the resolved experiment configuration.
"""
from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import fileio
from .analysis import agglomerative_cluster, group_distance_stats, pairwise_distance_matrix, pearson_correlation
from .dynamics import (
    CheckpointSeries,
    convergence_curve,
    first_crossing,
    split_stable_unstable,
    stability_curves,
)
from .errors import InvalidArgument
from .similarity import distance
from .synthetic import SNR_K_GRID, SnrSpec, ToyRnnSpec, run_snr_sweep, simulate_blended_rnn, summarize_sweep, timestep_distance_profile
from .toy_nets import (
    GroupMember,
    MlpSpec,
    TrainConfig,
    class_centers,
    make_dataset,
    run_group_experiment,
    train_mlp,
)


@dataclass
class ExperimentSpec:
    recipe: str
    parameters: dict = field(default_factory=dict)
    seeds: list[int] = field(default_factory=lambda: [0])
    output_dir: str = "repsim_out"

    def resolved(self) -> "ExperimentSpec":
        """Copy with recipe defaults filled in and parameters type-checked."""
        if self.recipe not in RECIPES:
            raise InvalidArgument(f"unknown recipe {self.recipe!r}; expected one of {sorted(RECIPES)}")
        if not self.seeds:
            raise InvalidArgument("seeds must be nonempty")
        defaults = RECIPES[self.recipe].defaults
        unknown = set(self.parameters) - set(defaults)
        if unknown:
            raise InvalidArgument(f"unknown parameters for {self.recipe}: {sorted(unknown)}")
        params = copy.deepcopy(defaults)
        for key, value in self.parameters.items():
            params[key] = _coerce(key, value, defaults[key])
        missing = [k for k, v in params.items() if v is REQUIRED]
        if missing:
            raise InvalidArgument(f"{self.recipe} requires parameters {missing}")
        return ExperimentSpec(self.recipe, params, [int(s) for s in self.seeds], str(self.output_dir))

    def to_dict(self) -> dict:
        return asdict(self)


class _Required:
    def __repr__(self):
        return "REQUIRED"


REQUIRED = _Required()


def _coerce(key, value, default):
    if default is REQUIRED or default is None or value is None:
        return value
    try:
        if isinstance(default, bool):
            if isinstance(value, str):
                return value.lower() in ("1", "true", "yes")
            return bool(value)
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
        if isinstance(default, list):
            if isinstance(value, str):
                value = [v for v in value.split(",") if v]
            kind = type(default[0]) if default else str
            return [kind(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise InvalidArgument(f"parameter {key!r}: cannot interpret {value!r}") from exc
    return value


@dataclass
class RecipeOutcome:
    exit_code: int
    artifacts: list[Path]
    result: dict


@dataclass
class Recipe:
    run: Callable[[ExperimentSpec, Path], tuple[list[Path], dict]]
    defaults: dict
    help: str


RECIPES: dict[str, Recipe] = {}


def recipe(name: str, help: str, **defaults):
    def wrap(fn):
        RECIPES[name] = Recipe(fn, defaults, help)
        return fn
    return wrap


def run_recipe(spec: ExperimentSpec) -> RecipeOutcome:
    """Resolve ``spec``, run its recipe, and return the written artifacts."""
    spec = spec.resolved()
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts, result = RECIPES[spec.recipe].run(spec, out)
    artifacts.append(fileio.write_json(out / "spec.json", {"spec": spec.to_dict()}))
    return RecipeOutcome(0, artifacts, result)


def _prov(spec: ExperimentSpec, **extra) -> dict:
    return {"spec": spec.to_dict(), **extra}


def _mean_std_rows(x_values, series: dict[str, np.ndarray]):
    header = ["x"]
    for name in series:
        header += [f"{name}_mean", f"{name}_std"]
    rows = []
    for i, x in enumerate(x_values):
        row = [x]
        for arr in series.values():
            col = np.asarray(arr, dtype=float)[:, i]
            row += [float(np.nanmean(col)), float(np.nanstd(col))]
        rows.append(row)
    return header, rows


# --- recipes -------------------------------------------------------------------

@recipe("compare", "distance between two activation files",
        files=REQUIRED, metric="pwcca", transpose=False)
def _compare(spec, out):
    p = spec.parameters
    if len(p["files"]) != 2:
        raise InvalidArgument("compare needs exactly two files")
    l1, l2 = (fileio.load_activations(f, p["transpose"]) for f in p["files"])
    rep = distance(l1, l2, p["metric"])
    path = fileio.save_report(rep, out / "report.json", _prov(spec))
    return [path], {"distance": rep.distance, "report": rep}


@recipe("pairwise", "pairwise distance matrix over activation files",
        files=REQUIRED, metric="pwcca", transpose=False, cluster=False, k=None)
def _pairwise(spec, out):
    p = spec.parameters
    layers = [fileio.load_activations(f, p["transpose"]) for f in p["files"]]
    labels = [Path(f).stem for f in p["files"]]
    dm = pairwise_distance_matrix(layers, p["metric"], labels=labels)
    arts = [fileio.save_matrix(dm, out / "matrix.json", out / "matrix.csv", _prov(spec))]
    result = {"matrix": dm}
    if p["cluster"]:
        c = agglomerative_cluster(dm, None if p["k"] is None else int(p["k"]))
        arts.append(fileio.save_clusters(c, out / "clusters.json", _prov(spec)))
        result["clusters"] = c
    return arts, result


@recipe("cluster", "average-linkage clustering of a saved distance matrix",
        matrix=REQUIRED, k=None)
def _cluster(spec, out):
    p = spec.parameters
    dm = fileio.load_matrix(p["matrix"])
    c = agglomerative_cluster(dm, None if p["k"] is None else int(p["k"]))
    return [fileio.save_clusters(c, out / "clusters.json", _prov(spec))], {"clusters": c}


@recipe("snr_sweep", "planted signal/noise sweep comparing mean, projection-weighted and SVCCA distances",
        k_values=list(SNR_K_GRID), total_dims=200, datapoints=2000, noise_std=0.1)
def _snr_sweep(spec, out):
    p = spec.parameters
    template = SnrSpec(signal_dims=1, total_dims=p["total_dims"], datapoints=p["datapoints"], noise_std=p["noise_std"])
    records = run_snr_sweep(p["k_values"], template, spec.seeds)
    arts = [fileio.write_csv(out / "records.csv", ["k", "seed", "metric", "distance"],
                             [[r.k, r.seed, r.metric, r.distance] for r in records], _prov(spec))]
    summary = summarize_sweep(records)
    arts.append(fileio.write_json(out / "summary.json", {"summary": summary, "provenance": _prov(spec)}))
    metrics = sorted({r["metric"] for r in summary})
    table = {(r["k"], r["metric"]): r for r in summary}
    header = ["k"] + [f"{m}_{s}" for m in metrics for s in ("mean", "std")]
    rows = [[k] + [table[(k, m)][s] for m in metrics for s in ("mean", "std")] for k in p["k_values"]]
    arts.append(fileio.write_csv(out / "plot.csv", header, rows, _prov(spec)))
    return arts, {"summary": summary, "rows": rows}


@recipe("rnn_toy", "rotation / blended toy RNN: distance of each timestep to the final state",
        hidden_dim=64, steps=50, runs=1000, alpha=0.0, metrics=["pwcca", "cosine", "euclidean"])
def _rnn_toy(spec, out):
    p = spec.parameters
    profiles = {m: [] for m in p["metrics"]}
    arts = []
    for seed in spec.seeds:
        states = simulate_blended_rnn(ToyRnnSpec(p["hidden_dim"], p["steps"], p["runs"], p["alpha"], None, seed))
        per_seed = {m: timestep_distance_profile(states, m) for m in p["metrics"]}
        for m, v in per_seed.items():
            profiles[m].append(v)
        arts.append(fileio.write_json(out / f"seed_{seed}.json", {"seed": seed, "profiles": per_seed,
                                                                   "provenance": _prov(spec, seed=seed)}))
    header, rows = _mean_std_rows(list(range(p["steps"])), {m: np.array(v) for m, v in profiles.items()})
    header[0] = "timestep"
    arts.append(fileio.write_csv(out / "plot.csv", header, rows, _prov(spec)))
    return arts, {"profiles": {m: np.array(v) for m, v in profiles.items()}}


def _toy_data(p, seed):
    centers = class_centers(p["widths"][0], p["classes"], seed)
    data = make_dataset(p["widths"][0], p["classes"], p["per_class"], p["spread"], seed)
    probe = test = None
    if p["probe_per_class"] > 0:
        probe = make_dataset(p["widths"][0], p["classes"], p["probe_per_class"], p["spread"], seed + 7919, centers)
    if p["test_per_class"] > 0:
        test = make_dataset(p["widths"][0], p["classes"], p["test_per_class"], p["spread"], seed + 104729, centers)
    return data, probe, test


_TOY_DEFAULTS = dict(widths=[20, 64, 64, 4], classes=4, per_class=50, spread=1.0, probe_per_class=0,
                     test_per_class=250, activation="relu", learning_rate=0.05, epochs=3000,
                     batch_size=32, target_loss=0.01, group_size=5, metric="pwcca")


def _probe(p, data, probe):
    # probe_per_class = 0 means "compare on the training inputs"
    return data.inputs if p["probe_per_class"] == 0 else probe.inputs


@recipe("gen_mem", "groups trained on true vs identically shuffled labels; per-layer pairwise distances",
        **_TOY_DEFAULTS)
def _gen_mem(spec, out):
    p = spec.parameters
    per_layer = {}
    arts = []
    for seed in spec.seeds:
        data, probe, test = _toy_data(p, seed)
        cfg = dict(learning_rate=p["learning_rate"], epochs=p["epochs"], batch_size=p["batch_size"],
                   target_loss=p["target_loss"])
        members = []
        for i in range(p["group_size"]):
            members.append(GroupMember(f"gen{i}", "gen", MlpSpec(tuple(p["widths"]), p["activation"], 1000 * seed + i),
                                       TrainConfig(**cfg)))
        for i in range(p["group_size"]):
            members.append(GroupMember(f"mem{i}", "mem", MlpSpec(tuple(p["widths"]), p["activation"], 1000 * seed + 500 + i),
                                       TrainConfig(**cfg, label_mode="shuffled_labels", shuffle_seed=seed + 31337)))
        res = run_group_experiment(members, data, _probe(p, data, probe), p["metric"], test=test)
        stats = [group_distance_stats(dm, [m.group for m in members]) for dm in res.layer_matrices]
        for layer, st in enumerate(stats):
            for key, v in st.items():
                per_layer.setdefault(key, {}).setdefault(layer, []).append(v["mean"])
        arts.append(fileio.write_json(out / f"seed_{seed}.json", {
            "seed": seed, "layer_stats": stats,
            "train_loss": [c.train_loss for c in res.final_checkpoints],
            "test_accuracy": res.test_accuracy,
            "matrices": [dm.values for dm in res.layer_matrices],
            "provenance": _prov(spec, seed=seed)}))
    layers = sorted(per_layer["gen"])
    series = {k: np.array([[per_layer[k][l][s] for l in layers] for s in range(len(spec.seeds))])
              for k in ("gen", "mem", "inter")}
    header, rows = _mean_std_rows(layers, series)
    header[0] = "layer"
    arts.append(fileio.write_csv(out / "plot.csv", header, rows, _prov(spec)))
    return arts, {"series": series}


@recipe("width_sweep", "groups at scaled widths; mean pairwise distance vs width and test accuracy",
        **{**_TOY_DEFAULTS, "widths": [20, 32, 32, 4], "spread": 2.5, "probe_per_class": 250,
           "epochs": 2000, "scales": [0.5, 1.0, 2.0, 4.0], "layer": -2})
def _width_sweep(spec, out):
    p = spec.parameters
    dist_rows, acc_rows, corr = [], [], []
    arts = []
    for seed in spec.seeds:
        data, probe, test = _toy_data(p, seed)
        dists, accs = [], []
        for lam in p["scales"]:
            base = MlpSpec(tuple(p["widths"]), p["activation"], 0)
            members = [GroupMember(f"x{lam}_{i}", str(lam),
                                   MlpSpec(base.scaled(lam).layer_widths, p["activation"], 1000 * seed + i),
                                   TrainConfig(p["learning_rate"], p["epochs"], p["batch_size"], target_loss=p["target_loss"]))
                       for i in range(p["group_size"])]
            res = run_group_experiment(members, data, _probe(p, data, probe), p["metric"], test=test)
            dm = res.layer_matrices[p["layer"]]
            off = ~np.eye(len(members), dtype=bool)
            dists.append(float(dm.values[off].mean()))
            accs.append(float(np.mean(res.test_accuracy)))
        r = pearson_correlation(accs, dists)
        dist_rows.append(dists)
        acc_rows.append(accs)
        corr.append(r)
        arts.append(fileio.write_json(out / f"seed_{seed}.json", {
            "seed": seed, "scales": p["scales"], "mean_pairwise_distance": dists,
            "test_accuracy": accs, "pearson_accuracy_distance": r, "provenance": _prov(spec, seed=seed)}))
    header, rows = _mean_std_rows(p["scales"], {"distance": np.array(dist_rows), "test_accuracy": np.array(acc_rows)})
    header[0] = "scale"
    arts.append(fileio.write_csv(out / "plot.csv", header, rows, _prov(spec)))
    return arts, {"distances": np.array(dist_rows), "accuracies": np.array(acc_rows), "pearson": corr}


@recipe("lr_sweep", "networks at several learning rates; pairwise matrix at one layer and its clusters",
        **{**_TOY_DEFAULTS, "learning_rates": [0.01, 0.05, 0.2], "layer": -2, "k": None})
def _lr_sweep(spec, out):
    p = spec.parameters
    arts, results = [], []
    for seed in spec.seeds:
        data, probe, test = _toy_data(p, seed)
        members = [GroupMember(f"lr{lr}_{i}", str(lr), MlpSpec(tuple(p["widths"]), p["activation"], 1000 * seed + 10 * j + i),
                               TrainConfig(lr, p["epochs"], p["batch_size"], target_loss=p["target_loss"]))
                   for j, lr in enumerate(p["learning_rates"]) for i in range(p["group_size"])]
        res = run_group_experiment(members, data, _probe(p, data, probe), p["metric"], test=test)
        dm = res.layer_matrices[p["layer"]]
        clusters = agglomerative_cluster(dm, None if p["k"] is None else int(p["k"]))
        arts.append(fileio.save_matrix(dm, out / f"matrix_seed_{seed}.json", out / f"matrix_seed_{seed}.csv",
                                       _prov(spec, seed=seed)))
        arts.append(fileio.save_clusters(clusters, out / f"clusters_seed_{seed}.json", _prov(spec, seed=seed)))
        results.append({"matrix": dm, "clusters": clusters})
    return arts, {"runs": results}


def _series_from_params(p, seed) -> dict[str, CheckpointSeries]:
    if p["checkpoint_dir"]:
        layers = fileio.checkpoint_layers(p["checkpoint_dir"])
        return {name: fileio.load_checkpoint_series(p["checkpoint_dir"], name) for name in layers}
    data, probe, _ = _toy_data(p, seed)
    spec = MlpSpec(tuple(p["widths"]), p["activation"], seed)
    cks = train_mlp(spec, data, TrainConfig(p["learning_rate"], p["epochs"], p["batch_size"]), _probe(p, data, probe))
    steps = tuple(c.step for c in cks)
    depth = len(cks[0].per_layer_activations) - 1  # hidden layers only
    return {f"layer{l + 1}": CheckpointSeries(steps, tuple(c.per_layer_activations[l] for c in cks))
            for l in range(depth)}


_DYNAMICS_DEFAULTS = {**_TOY_DEFAULTS, "widths": [20, 32, 32, 32, 4], "activation": "tanh",
                      "learning_rate": 0.1, "epochs": 300, "spread": 2.5, "probe_per_class": 100,
                      "checkpoint_dir": ""}


@recipe("convergence", "distance of every checkpoint to the final one, per layer",
        **{**_DYNAMICS_DEFAULTS, "metrics": ["pwcca", "mean_cca", "cosine", "euclidean"], "threshold": 0.2})
def _convergence(spec, out):
    p = spec.parameters
    arts, curves, crossings = [], {}, {}
    for seed in spec.seeds:
        series = _series_from_params(p, seed)
        per_seed = {}
        for name, s in series.items():
            per_seed[name] = {m: convergence_curve(s, m) for m in p["metrics"]}
            crossings.setdefault(name, []).append(first_crossing(per_seed[name][p["metrics"][0]], s.steps, p["threshold"]))
        curves[seed] = per_seed
        steps = next(iter(series.values())).steps
        header = ["step"] + [f"{name}_{m}" for name in per_seed for m in p["metrics"]]
        rows = [[st] + [per_seed[name][m][i] for name in per_seed for m in p["metrics"]] for i, st in enumerate(steps)]
        arts.append(fileio.write_csv(out / f"curves_seed_{seed}.csv", header, rows, _prov(spec, seed=seed)))
        if p["checkpoint_dir"]:
            break  # a supplied directory is one run; seeds do not apply
    arts.append(fileio.write_json(out / "crossings.json", {"threshold": p["threshold"], "crossings": crossings,
                                                           "provenance": _prov(spec)}))
    return arts, {"curves": curves, "crossings": crossings}


@recipe("stability_split", "stable vs unstable CCA subspaces between an early and the midpoint checkpoint",
        **{**_DYNAMICS_DEFAULTS, "layer": "", "t_early_index": 1, "m": None, "side": "early", "weighted": False})
def _stability(spec, out):
    p = spec.parameters
    arts, results = [], []
    for seed in spec.seeds:
        series = _series_from_params(p, seed)
        name = p["layer"] or sorted(series)[-1]
        s = series[name]
        split = split_stable_unstable(s, s.steps[p["t_early_index"]], None if p["m"] is None else int(p["m"]), p["side"])
        curves = stability_curves(s, split, p["weighted"])
        rows = [[st, a, b] for st, a, b in zip(curves["steps"], curves["stable"], curves["unstable"])]
        arts.append(fileio.write_csv(out / f"stability_seed_{seed}.csv", ["step", "stable", "unstable"], rows,
                                     _prov(spec, seed=seed, layer=name, t_mid=split.t_mid, m=split.m)))
        results.append({"layer": name, "split": split, "curves": curves})
        if p["checkpoint_dir"]:
            break
    return arts, {"runs": results}

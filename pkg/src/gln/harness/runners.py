"""Experiment runners.

Each runner consumes an ExperimentConfig, writes a deterministic
metrics stream (plus any artifact files) under cfg.out_dir, and returns
the emitted records.  Randomness is derived exclusively from cfg.seed,
so identical configs reproduce identical outputs byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict

import numpy as np

from ..network import GlnModel, ModelConfig, base_layer, lr_schedule
from ..interpret import saliency
from ..seeds import DATA_ORDER, RUNS, SPLITS, SYNTHETIC_DATA, child_seed, make_rng
from ..tasks import AutoregressiveDensityModel, OvaClassifier
from .baselines import OnlineBernoulliBaseline
from .config import ExperimentConfig
from .data import (
    binarize,
    center_crop,
    deskew_batch,
    load_csv_dataset,
    load_idx,
    load_idx_pair,
    normalize_images,
    permute_task,
)
from .export import write_csv_matrix, write_signed_pgm
from .metrics import MetricsWriter
from .modelfile import load_models, models_digest, save_models

__all__ = [
    "run_mnist_online",
    "run_capacity",
    "run_forgetting",
    "run_density",
    "run_uci",
    "run_eval",
    "run_saliency",
]


# -- shared plumbing ----------------------------------------------------


def _run_id(cfg: ExperimentConfig) -> str:
    blob = json.dumps(asdict(cfg), sort_keys=True, default=str).encode()
    return f"{cfg.experiment}-seed{cfg.seed}-{hashlib.sha256(blob).hexdigest()[:8]}"


def _eta(cfg: ExperimentConfig, t: int) -> float:
    return lr_schedule(cfg.lr_schedule, t, c=cfg.lr_c, eta=cfg.lr_constant)


def _subset(arrays, limit: int):
    if limit and limit < arrays[0].shape[0]:
        return tuple(a[:limit] for a in arrays)
    return tuple(arrays)


def _load_split(cfg: ExperimentConfig, images_path: str, labels_path: str, limit: int):
    images, labels = load_idx_pair(images_path, labels_path)
    images, labels = _subset((images, labels), limit)
    floats = normalize_images(images)
    if cfg.deskew:
        floats = deskew_batch(floats)
    n, rows, cols = floats.shape
    return floats.reshape(n, rows * cols), labels.astype(np.int64), (rows, cols)


def _model_config(cfg: ExperimentConfig, n_features: int, layer_sizes=None, context_dim=None) -> ModelConfig:
    return ModelConfig(
        layer_sizes=tuple(layer_sizes if layer_sizes is not None else cfg.layer_sizes),
        context_dim=cfg.context_dim if context_dim is None else context_dim,
        base_dim=n_features + 1,
        side_dim=n_features,
        epsilon=cfg.epsilon,
        beta=cfg.beta,
        clip_radius=cfg.clip_radius,
    )


def _base_rows(X: np.ndarray, epsilon: float) -> np.ndarray:
    """Base predictions for unit-range features, bias slot excluded."""
    return np.clip(epsilon + X * (1.0 - 2.0 * epsilon), epsilon, 1.0 - epsilon)


def _ova_accuracy(clf: OvaClassifier, X, y, P, tables) -> float:
    hits = 0
    for i in range(X.shape[0]):
        ctx = [tab[i] for tab in tables]
        label, _ = clf.predict(X[i], P[i], contexts=ctx)
        hits += int(label == y[i])
    return hits / X.shape[0]


def _train_ova_pass(clf, X, y, P, tables, cfg, writer, t_start, order=None, emit_running=False):
    """One online pass; returns (next t, online accuracy over the pass)."""
    t = t_start
    hits = 0
    window_hits = 0
    window = 0
    order = range(X.shape[0]) if order is None else order
    for i in order:
        ctx = [tab[i] for tab in tables]
        probs = clf.update(X[i], P[i], int(y[i]), _eta(cfg, t), contexts=ctx)
        correct = int(int(np.argmax(probs)) == y[i])
        hits += correct
        window_hits += correct
        window += 1
        if emit_running and cfg.eval_every and window >= cfg.eval_every:
            writer.emit(t, "train_accuracy", window_hits / window)
            window_hits = 0
            window = 0
        t += 1
    return t, hits / X.shape[0]


# -- single-pass classification -----------------------------------------


def run_mnist_online(cfg: ExperimentConfig):
    """One-vs-all online classification: train single-pass, frozen eval."""
    Xtr, ytr, _ = _load_split(cfg, cfg.train_images, cfg.train_labels, cfg.train_subset)
    Xte, yte, _ = _load_split(cfg, cfg.test_images, cfg.test_labels, cfg.test_subset)
    n_features = Xtr.shape[1]
    clf = OvaClassifier.create(10, _model_config(cfg, n_features), cfg.seed)
    Ptr = _base_rows(Xtr, cfg.epsilon)
    Pte = _base_rows(Xte, cfg.epsilon)
    with MetricsWriter(cfg.out_dir, _run_id(cfg)) as writer:
        tables = clf.context_tables(Xtr)
        t = 1
        for epoch in range(cfg.epochs):
            order = None
            if cfg.shuffle:
                order = make_rng(child_seed(cfg.seed, DATA_ORDER, epoch)).permutation(Xtr.shape[0])
            t, online_acc = _train_ova_pass(
                clf, Xtr, ytr, Ptr, tables, cfg, writer, t, order=order, emit_running=True
            )
            writer.emit(t - 1, "train_accuracy", online_acc)
        del tables
        test_tables = clf.context_tables(Xte)
        writer.emit(t - 1, "accuracy", _ova_accuracy(clf, Xte, yte, Pte, test_tables))
        save_models(os.path.join(cfg.out_dir, "model.gln"), clf.models)
        return writer.records


def run_eval(cfg: ExperimentConfig):
    """Frozen evaluation of a saved classifier; asserts zero mutation."""
    models = load_models(cfg.model_path)
    clf = OvaClassifier(models)
    Xte, yte, _ = _load_split(cfg, cfg.test_images, cfg.test_labels, cfg.test_subset)
    Pte = _base_rows(Xte, cfg.epsilon)
    digest_before = models_digest(models)
    with MetricsWriter(cfg.out_dir, _run_id(cfg)) as writer:
        tables = clf.context_tables(Xte)
        acc = _ova_accuracy(clf, Xte, yte, Pte, tables)
        if models_digest(models) != digest_before:
            raise RuntimeError("evaluation mutated model weights")
        writer.emit(0, "accuracy", acc)
        return writer.records


# -- capacity: fitting random labels ------------------------------------


def run_capacity(cfg: ExperimentConfig):
    """Train-accuracy-vs-epochs on random-label data, swept over the
    context dimension.  Modes: real images with shuffled labels, or
    uniform-noise images of the same shape."""
    n = cfg.capacity_examples
    data_rng = make_rng(child_seed(cfg.seed, SYNTHETIC_DATA))
    if cfg.capacity_mode == "shuffled_labels":
        X, y, _ = _load_split(cfg, cfg.train_images, cfg.train_labels, n)
        y = data_rng.permutation(y)
    elif cfg.capacity_mode == "noise":
        X = data_rng.random((n, cfg.image_rows * cfg.image_cols))
        y = data_rng.integers(0, 10, n).astype(np.int64)
    else:
        raise ValueError(f"unknown capacity mode {cfg.capacity_mode!r}")
    P = _base_rows(X, cfg.epsilon)
    with MetricsWriter(cfg.out_dir, _run_id(cfg)) as writer:
        for m in cfg.capacity_context_dims:
            finals = []
            for run in range(cfg.capacity_runs):
                clf = OvaClassifier.create(
                    10, _model_config(cfg, X.shape[1], context_dim=m), child_seed(cfg.seed, RUNS, m, run)
                )
                tables = clf.context_tables(X)
                t = 1
                acc = 0.0
                for epoch in range(cfg.capacity_epochs):
                    t, _ = _train_ova_pass(clf, X, y, P, tables, cfg, writer, t)
                    acc = _ova_accuracy(clf, X, y, P, tables)
                    writer.emit(epoch + 1, f"train_accuracy[m={m},run={run}]", acc)
                finals.append(acc)
            writer.emit(cfg.capacity_epochs, f"train_accuracy_mean[m={m}]", float(np.mean(finals)))
        return writer.records


# -- continual learning on permuted pixels -------------------------------


def run_forgetting(cfg: ExperimentConfig):
    """Sequential tasks by pixel permutation, no task boundaries given.

    After each task the classifier is frozen-evaluated on every task
    seen so far; the lower-triangular retention matrix is written as
    CSV next to the metrics.
    """
    if cfg.tasks < 2:
        raise ValueError("need at least two tasks")
    Xtr, ytr, _ = _load_split(cfg, cfg.train_images, cfg.train_labels, 0)
    Xte, yte, _ = _load_split(cfg, cfg.test_images, cfg.test_labels, cfg.task_test)
    n_features = Xtr.shape[1]
    perms = [permute_task(cfg.seed, j, n_features) for j in range(cfg.tasks)]
    clf = OvaClassifier.create(10, _model_config(cfg, n_features), cfg.seed)
    Pte = _base_rows(Xte, cfg.epsilon)
    retention = np.full((cfg.tasks, cfg.tasks), np.nan)
    eval_tables = {}
    with MetricsWriter(cfg.out_dir, _run_id(cfg)) as writer:
        t = 1
        for i in range(cfg.tasks):
            rng = make_rng(child_seed(cfg.seed, DATA_ORDER, i))
            idx = rng.choice(Xtr.shape[0], size=min(cfg.task_train, Xtr.shape[0]), replace=False)
            Xi = Xtr[idx][:, perms[i]]
            Pi = _base_rows(Xi, cfg.epsilon)
            tables = clf.context_tables(Xi)
            t, _ = _train_ova_pass(clf, Xi, ytr[idx], Pi, tables, cfg, writer, t)
            del tables
            for j in range(i + 1):
                if j not in eval_tables:
                    eval_tables[j] = (Xte[:, perms[j]], clf.context_tables(Xte[:, perms[j]]))
                Xe, tabs = eval_tables[j]
                retention[i, j] = _ova_accuracy(clf, Xe, yte, Pte, tabs)
                writer.emit(i + 1, f"retention[{j}]", retention[i, j])
        write_csv_matrix(os.path.join(cfg.out_dir, "retention.csv"), retention)
        return writer.records


# -- autoregressive density modeling -------------------------------------


def _load_binary_images(cfg: ExperimentConfig, path: str, limit: int) -> np.ndarray:
    images = load_idx(path)
    images = _subset((images,), limit)[0]
    floats = normalize_images(images)
    if cfg.density_crop:
        floats = center_crop(floats, cfg.density_crop)
    bits = binarize(floats)
    n = bits.shape[0]
    return bits.reshape(n, -1).astype(np.int64)


def run_density(cfg: ExperimentConfig):
    """Online density modeling over binarized images.

    Streams the training images online, then reports test nats/image
    both online (still updating) and with weights frozen at the end of
    training; an online independent-Bernoulli baseline runs alongside.
    """
    train = _load_binary_images(cfg, cfg.train_images, cfg.density_train)
    test = _load_binary_images(cfg, cfg.test_images, cfg.density_test)
    d = train.shape[1]
    model = AutoregressiveDensityModel.create(
        d,
        tuple(cfg.density_layer_sizes),
        cfg.density_context_dim,
        cfg.seed,
        epsilon=cfg.epsilon,
        beta=cfg.beta,
        clip_radius=cfg.clip_radius,
    )
    baseline = OnlineBernoulliBaseline(d)
    with MetricsWriter(cfg.out_dir, _run_id(cfg)) as writer:
        writer.emit(0, "nats_per_image_uniform", d * math.log(2.0))
        t = 1
        for k in range(train.shape[0]):
            model.logprob(train[k], update=True, eta=_eta(cfg, t))
            baseline.logprob(train[k], update=True)
            t += 1
        frozen_model = model.copy()
        frozen_baseline = baseline.copy()
        online_total = 0.0
        online_base = 0.0
        for k in range(test.shape[0]):
            online_total -= model.logprob(test[k], update=True, eta=_eta(cfg, t))
            online_base -= baseline.logprob(test[k], update=True)
            t += 1
        step = t - 1
        writer.emit(step, "nats_per_image", online_total / test.shape[0])
        writer.emit(step, "baseline_nats_per_image", online_base / test.shape[0])
        writer.emit(step, "nats_per_image_frozen", frozen_model.nats_per_image(test, update=False))
        frozen_base = -sum(frozen_baseline.logprob(img, update=False) for img in test) / test.shape[0]
        writer.emit(step, "baseline_nats_per_image_frozen", frozen_base)
        return writer.records


# -- tabular benchmark ----------------------------------------------------


def run_uci(cfg: ExperimentConfig):
    """Repeated random splits: single online pass on the training share,
    frozen evaluation on the rest."""
    ds = load_csv_dataset(cfg.csv_path, cfg.schema_path)
    n, n_features = ds.X.shape
    n_classes = len(ds.classes)
    n_train = int(round(cfg.train_fraction * n))
    if not 0 < n_train < n:
        raise ValueError("train fraction leaves an empty split")
    accs = []
    with MetricsWriter(cfg.out_dir, _run_id(cfg)) as writer:
        for s in range(cfg.splits):
            perm = make_rng(child_seed(cfg.seed, SPLITS, s)).permutation(n)
            tr, te = perm[:n_train], perm[n_train:]
            clf = OvaClassifier.create(
                n_classes,
                _model_config(cfg, n_features),
                child_seed(cfg.seed, RUNS, s),
                feature_ranges=(ds.lo, ds.hi),
            )
            t = 1
            for i in tr:
                p = base_layer(ds.X[i], (ds.lo, ds.hi), epsilon=cfg.epsilon, beta=cfg.beta)[1:]
                clf.update(ds.X[i], p, int(ds.y[i]), _eta(cfg, t))
                t += 1
            hits = 0
            for i in te:
                p = base_layer(ds.X[i], (ds.lo, ds.hi), epsilon=cfg.epsilon, beta=cfg.beta)[1:]
                label, _ = clf.predict(ds.X[i], p)
                hits += int(label == ds.y[i])
            acc = hits / te.shape[0]
            accs.append(acc)
            writer.emit(s, f"accuracy[split={s}]", acc)
        writer.emit(cfg.splits, "accuracy_mean", float(np.mean(accs)))
        writer.emit(cfg.splits, "accuracy_stderr", float(np.std(accs, ddof=1) / math.sqrt(len(accs))) if len(accs) > 1 else 0.0)
        return writer.records


# -- saliency maps ---------------------------------------------------------


def run_saliency(cfg: ExperimentConfig):
    """Per-class collapsed-weight maps, averaged over test examples.

    Either loads a saved classifier (model_path) or trains one fresh
    with this experiment's defaults, then writes one signed PGM and one
    CSV per class.
    """
    Xte, yte, shape = _load_split(cfg, cfg.test_images, cfg.test_labels, cfg.test_subset)
    with MetricsWriter(cfg.out_dir, _run_id(cfg)) as writer:
        if cfg.model_path:
            clf = OvaClassifier(load_models(cfg.model_path))
        else:
            Xtr, ytr, _ = _load_split(cfg, cfg.train_images, cfg.train_labels, cfg.train_subset)
            clf = OvaClassifier.create(10, _model_config(cfg, Xtr.shape[1]), cfg.seed)
            Ptr = _base_rows(Xtr, cfg.epsilon)
            tables = clf.context_tables(Xtr)
            t = 1
            for _ in range(cfg.epochs):
                t, _ = _train_ova_pass(clf, Xtr, ytr, Ptr, tables, cfg, writer, t)
            save_models(os.path.join(cfg.out_dir, "model.gln"), clf.models)
        for c, model in enumerate(clf.models):
            picks = np.flatnonzero(yte == c)[: cfg.saliency_per_class]
            if picks.size == 0:
                continue
            maps = np.stack([saliency(model, Xte[i], _base_rows(Xte[i], cfg.epsilon)) for i in picks])
            mean_map = maps.mean(axis=0).reshape(shape)
            write_signed_pgm(os.path.join(cfg.out_dir, f"saliency_class{c}.pgm"), mean_map)
            write_csv_matrix(os.path.join(cfg.out_dir, f"saliency_class{c}.csv"), mean_map)
            writer.emit(c, f"saliency_norm[{c}]", float(np.linalg.norm(mean_map)))
        return writer.records

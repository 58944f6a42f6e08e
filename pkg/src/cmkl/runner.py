"""End-to-end experiment execution.

Pipeline per kernel: Gram -> center -> kernel-space discriminant fit on the
utility label -> rank-Q compression -> trace normalization (and the matching
centered/compressed test columns).  Method rows then combine releases per
strategy and score utility and privacy SVMs on the combined kernel only; raw
features never cross into the classifier stage.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import svm
from .compression import (
    CompressiveKernel,
    compress,
    compress_cross,
    normalize_compressive,
    rank_budget_check,
)
from .config import ExperimentConfig, KernelConfig
from .dataset import (
    Dataset,
    DatasetSchema,
    load_dataset,
    merge_label_spaces,
    split_indices,
    standardize,
)
from .dca import empirical_scatter, fit_kdca
from .errors import CmklError, DataError
from .kernels import center_cross, center_gram, cross_gram, gram
from .multikernel import (
    combine,
    snr_score,
    weights_alignment,
    weights_snr,
    weights_uniform,
    weights_upr_qp,
)
from .report import ExperimentReport, MethodRow


def cross_validate(
    k_train: np.ndarray,
    y: np.ndarray,
    folds: int,
    c_grid,
    seed: int,
) -> float:
    """Pick the C maximizing mean stratified-fold accuracy; ties go small.

    A single-entry grid returns immediately (nothing to select).
    """
    y = np.asarray(y)
    if folds < 2:
        raise DataError(f"need at least 2 folds, got {folds}")
    classes, counts = np.unique(y, return_counts=True)
    for cls, count in zip(classes, counts):
        if count < folds:
            raise DataError(
                f"class {cls} has {count} samples, fewer than {folds} folds"
            )
    grid = sorted(float(c) for c in c_grid)
    if len(grid) == 1:
        return grid[0]

    rng = np.random.default_rng(seed)
    fold_of = np.empty(y.size, dtype=int)
    for cls in classes:
        members = np.flatnonzero(y == cls)
        members = members[rng.permutation(members.size)]
        fold_of[members] = np.arange(members.size) % folds

    best_c, best_acc = grid[0], -1.0
    for c in grid:
        scores = []
        for f in range(folds):
            val = fold_of == f
            tr = ~val
            model = svm.fit(k_train[np.ix_(tr, tr)], y[tr], c=c)
            pred = svm.predict(model, k_train[np.ix_(tr, val)])
            scores.append(svm.accuracy(pred, y[val]))
        mean_acc = float(np.mean(scores))
        if mean_acc > best_acc:
            best_acc, best_c = mean_acc, c
    return best_c


@dataclass(frozen=True)
class TaskEval:
    accuracy_pct: float
    best_c: float


def evaluate_split(
    k_train: np.ndarray,
    k_cross: np.ndarray,
    y_train: np.ndarray,
    y_test: np.ndarray,
    c_grid,
    folds: int,
    seed: int,
) -> TaskEval:
    """Cross-validate C, fit on the released kernel, score held-out accuracy.

    This is the public-sphere boundary: it sees kernel matrices and labels
    only, never feature rows, for the utility and the adversary tasks alike.
    """
    best_c = cross_validate(k_train, y_train, folds, c_grid, seed)
    model = svm.fit(k_train, y_train, c=best_c)
    pred = svm.predict(model, k_cross, fingerprint=svm.kernel_fingerprint(k_train))
    return TaskEval(
        accuracy_pct=100.0 * svm.accuracy(pred, y_test), best_c=best_c
    )


@dataclass(frozen=True)
class KernelPipeline:
    """Per-kernel outcome of the private-sphere stage."""

    cfg: KernelConfig
    q: int
    release: CompressiveKernel | None = None  # normalized
    cross: np.ndarray | None = None  # compressed train-vs-test block
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.release is not None


@dataclass(frozen=True)
class PreparedExperiment:
    config: ExperimentConfig
    train: Dataset
    y_test_utility: np.ndarray
    y_test_privacy: np.ndarray
    pipelines: tuple[KernelPipeline, ...]
    n_test: int

    @property
    def ok_pipelines(self) -> tuple[KernelPipeline, ...]:
        return tuple(p for p in self.pipelines if p.ok)


def _load_split(config: ExperimentConfig):
    schema = DatasetSchema(
        utility_column=config.utility_column,
        privacy_column=config.privacy_column,
        feature_columns=(
            list(config.feature_columns) if config.feature_columns else None
        ),
    )
    train = load_dataset(config.train_path, schema)
    if config.test_path is not None:
        test = load_dataset(config.test_path, schema)
        train, test = merge_label_spaces(train, test)
        x_train, x_test = train.x, test.x
        y_u_tr, y_p_tr = train.y_utility, train.y_privacy
        y_u_te, y_p_te = test.y_utility, test.y_privacy
        classes = (train.utility_classes, train.privacy_classes)
    else:
        tr, te = split_indices(
            train.y_utility,
            seed=config.seed,
            test_fraction=config.test_fraction,
            test_size=config.test_size,
        )
        x_train, x_test = train.x[tr], train.x[te]
        y_u_tr, y_p_tr = train.y_utility[tr], train.y_privacy[tr]
        y_u_te, y_p_te = train.y_utility[te], train.y_privacy[te]
        classes = (train.utility_classes, train.privacy_classes)
    if config.standardize:
        x_train, x_test = standardize(x_train, x_test)
    train_ds = Dataset(
        x=x_train,
        y_utility=y_u_tr,
        y_privacy=y_p_tr,
        feature_names=train.feature_names,
        utility_classes=classes[0],
        privacy_classes=classes[1],
    )
    return train_ds, x_test, y_u_te, y_p_te


def prepare_experiment(config: ExperimentConfig) -> PreparedExperiment:
    """Run the private-sphere stage: per-kernel compression on the utility label."""
    train, x_test, y_u_te, y_p_te = _load_split(config)
    n_utility = int(train.y_utility.max()) + 1
    default_q = max(n_utility - 1, 1)
    pipelines = []
    for kc in config.kernels:
        q = kc.q if kc.q is not None else default_q
        try:
            g = center_gram(gram(kc.spec, train.x))
            emp = empirical_scatter(g, train.y_utility)
            model = fit_kdca(
                g, train.y_utility, q=q, rho=config.rho, rho_prime=config.rho_prime
            )
            release = normalize_compressive(
                compress(g, model.projection, emp.between, spec=kc.spec, name=kc.name)
            )
            cols = center_cross(cross_gram(kc.spec, train.x, x_test), g.stats)
            cross = compress_cross(release, cols)
            pipelines.append(KernelPipeline(cfg=kc, q=q, release=release, cross=cross))
        except CmklError as exc:
            pipelines.append(KernelPipeline(cfg=kc, q=q, error=str(exc)))
    return PreparedExperiment(
        config=config,
        train=train,
        y_test_utility=y_u_te,
        y_test_privacy=y_p_te,
        pipelines=tuple(pipelines),
        n_test=x_test.shape[0],
    )


def _weights_dict(pipelines, mu) -> dict:
    return {p.cfg.name: float(w) for p, w in zip(pipelines, mu)}


def compute_strategy_weights(
    prepared: PreparedExperiment, strategy: str, rho_snr: float | None = None
):
    """Weight vector of one multi-kernel strategy over the prepared releases."""
    pipes = prepared.ok_pipelines
    failed = [p for p in prepared.pipelines if not p.ok]
    if failed:
        raise CmklError(
            "kernel {name} failed: {err}".format(name=failed[0].cfg.name, err=failed[0].error)
        )
    releases = [p.release for p in pipes]
    y_u = prepared.train.y_utility
    if strategy == "uniform":
        return weights_uniform(len(releases))
    if strategy == "alignment":
        return weights_alignment(releases, y_u)
    if strategy == "snr":
        if rho_snr is None:
            raise CmklError("snr strategy needs rho_snr")
        scores = [snr_score(r, rho_snr) for r in releases]
        return weights_snr(np.array(scores), rho=rho_snr)
    if strategy == "upr_qp":
        return weights_upr_qp(releases, y_u, prepared.train.y_privacy)
    raise CmklError(f"unknown strategy {strategy!r}")


def _method_rows(prepared: PreparedExperiment) -> list[MethodRow]:
    config = prepared.config
    train = prepared.train
    feature_dim = train.m
    eval_args = dict(c_grid=config.c_grid, folds=config.cv_folds, seed=config.seed)

    def timed_row(method, weights, builder):
        start = time.perf_counter()
        try:
            k_train, k_cross, qs = builder()
            utility = evaluate_split(
                k_train, k_cross, train.y_utility, prepared.y_test_utility, **eval_args
            )
            privacy = evaluate_split(
                k_train, k_cross, train.y_privacy, prepared.y_test_privacy, **eval_args
            )
            return MethodRow(
                method=method,
                status="ok",
                utility_pct=utility.accuracy_pct,
                privacy_pct=privacy.accuracy_pct,
                best_c_utility=utility.best_c,
                best_c_privacy=privacy.best_c,
                weights=weights,
                rank_budget_ok=bool(rank_budget_check(qs, feature_dim).passed),
                wall_time_s=time.perf_counter() - start,
            )
        except CmklError as exc:
            return MethodRow(
                method=method,
                status="failed",
                error=str(exc),
                wall_time_s=time.perf_counter() - start,
            )

    rows = []
    if "single" in config.strategies:
        for pipe in prepared.pipelines:
            method = f"single:{pipe.cfg.name}"
            if not pipe.ok:
                rows.append(MethodRow(method=method, status="failed", error=pipe.error))
                continue
            rows.append(
                timed_row(
                    method,
                    None,
                    lambda p=pipe: (p.release.k_hat, p.cross, [p.q]),
                )
            )

    multi = [s for s in config.strategies if s != "single"]
    if len(config.kernels) < 2:
        multi = []
    for strategy in multi:
        rhos = config.snr_rhos if strategy == "snr" else (None,)
        for rho in rhos:
            method = f"snr(rho={rho:g})" if strategy == "snr" else strategy
            try:
                w = compute_strategy_weights(prepared, strategy, rho_snr=rho)
            except CmklError as exc:
                rows.append(MethodRow(method=method, status="failed", error=str(exc)))
                continue
            pipes = prepared.ok_pipelines

            def builder(w=w, pipes=pipes):
                mk = combine(
                    [p.release for p in pipes], w, cross_blocks=[p.cross for p in pipes]
                )
                return mk.k_mu, mk.cross_mu, [p.q for p in pipes]

            rows.append(timed_row(method, _weights_dict(pipes, w.mu), builder))
    return rows


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Execute the full protocol and assemble the report."""
    prepared = prepare_experiment(config)
    train = prepared.train
    n_utility = len(train.utility_classes)
    n_privacy = len(train.privacy_classes)

    snr_scores = {}
    if "snr" in config.strategies:
        for rho in config.snr_rhos:
            per_kernel = {}
            for pipe in prepared.pipelines:
                per_kernel[pipe.cfg.name] = (
                    float(snr_score(pipe.release, rho)) if pipe.ok else None
                )
            snr_scores[f"{rho:g}"] = per_kernel

    rows = _method_rows(prepared)
    budget = rank_budget_check([p.q for p in prepared.pipelines], train.m)
    report = ExperimentReport(
        dataset={
            "train_path": config.train_path,
            "test_path": config.test_path,
            "n_train": int(train.n),
            "n_test": int(prepared.n_test),
            "n_features": int(train.m),
            "utility_label": config.utility_column,
            "privacy_label": config.privacy_column,
            "n_utility_classes": n_utility,
            "n_privacy_classes": n_privacy,
        },
        kernels=[
            {
                "name": p.cfg.name,
                "kind": p.cfg.spec.kind,
                "gamma": p.cfg.spec.gamma,
                "degree": p.cfg.spec.degree,
                "coef0": p.cfg.spec.coef0,
                "q": p.q,
            }
            for p in prepared.pipelines
        ],
        settings={
            "rho": config.rho,
            "rho_prime": config.rho_prime,
            "strategies": list(config.strategies),
            "snr_rhos": list(config.snr_rhos),
            "upr_rho": config.upr_rho,
            "c_grid": list(config.c_grid),
            "cv_folds": config.cv_folds,
            "seed": config.seed,
            "standardize": config.standardize,
        },
        baselines={
            "utility_pct": 100.0 / n_utility,
            "privacy_pct": 100.0 / n_privacy,
        },
        rank_budget={
            "total_rank": budget.total_rank,
            "feature_dim": budget.feature_dim,
            "passed": budget.passed,
            "margin": budget.margin,
        },
        snr_scores=snr_scores,
        rows=rows,
    )
    return report

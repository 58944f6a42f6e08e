"""Experiment configuration: YAML schema, validation, defaults.

The schema is documented in the README; every experiment knob (kernel grid,
ridges, rank budgets, weighting strategies, SVM cross-validation, output
paths, seed) lives here so a config file plus a seed pins a whole run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from .errors import CmklError, ConfigError
from .kernels import KERNEL_KINDS, KernelSpec

VALID_STRATEGIES = ("single", "uniform", "alignment", "snr", "upr_qp")
DEFAULT_STRATEGIES = ("single", "uniform", "alignment", "snr")
DEFAULT_C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)
DEFAULT_SNR_RHOS = (0.0, 0.1)


@dataclass(frozen=True)
class KernelConfig:
    """One kernel in the experiment grid with its rank budget."""

    spec: KernelSpec
    name: str
    q: int | None = None  # None = utility class count - 1, resolved at run time


@dataclass(frozen=True)
class ExperimentConfig:
    train_path: str
    utility_column: str
    privacy_column: str
    kernels: tuple[KernelConfig, ...]
    test_path: str | None = None
    feature_columns: tuple[str, ...] | None = None
    standardize: bool = True
    test_fraction: float | None = None
    test_size: int | None = None
    rho: float = 10.0
    rho_prime: float = 1e-4
    strategies: tuple[str, ...] = DEFAULT_STRATEGIES
    snr_rhos: tuple[float, ...] = DEFAULT_SNR_RHOS
    snr_form: str = "congruent"  # "product" = literal non-symmetric ratio
    c_grid: tuple[float, ...] = DEFAULT_C_GRID
    cv_folds: int = 5
    output_dir: str = "results"
    figures: bool = True
    seed: int = 0

    def __post_init__(self):
        if not self.kernels:
            raise ConfigError("at least one kernel is required")
        for strat in self.strategies:
            if strat not in VALID_STRATEGIES:
                raise ConfigError(
                    f"unknown strategy {strat!r}; expected one of {VALID_STRATEGIES}"
                )
        for k in self.kernels:
            if k.q is not None and k.q < 1:
                raise ConfigError(f"kernel {k.name!r}: q must be >= 1, got {k.q}")
        names = [k.name for k in self.kernels]
        if len(set(names)) != len(names):
            raise ConfigError(f"kernel names must be unique, got {names}")
        if self.rho < 0 or self.rho_prime < 0:
            raise ConfigError("dca ridges must be non-negative")
        if any(r < 0 for r in self.snr_rhos):
            raise ConfigError("snr_rhos must be non-negative")
        if self.snr_form not in ("congruent", "product"):
            raise ConfigError(
                f"snr_form must be 'congruent' or 'product', got {self.snr_form!r}"
            )
        if not self.c_grid or any(c <= 0 for c in self.c_grid):
            raise ConfigError("svm c_grid must be non-empty and positive")
        if self.cv_folds < 2:
            raise ConfigError(f"cv_folds must be >= 2, got {self.cv_folds}")
        if self.test_path is None and self.test_fraction is None and self.test_size is None:
            raise ConfigError(
                "provide dataset.test, split.test_fraction, or split.test_size"
            )


def parse_kernel_params(kind: str, params: dict) -> KernelSpec:
    """Build a KernelSpec from loosely typed config values."""
    if kind not in KERNEL_KINDS:
        raise ConfigError(f"unknown kernel kind {kind!r}; expected one of {KERNEL_KINDS}")
    known = {"gamma", "degree", "coef0"}
    extra = set(params) - known
    if extra:
        raise ConfigError(f"unknown kernel parameters {sorted(extra)} for kind {kind!r}")
    try:
        return KernelSpec(
            kind=kind,
            gamma=float(params.get("gamma", 1.0)),
            degree=int(params.get("degree", 3)),
            coef0=float(params.get("coef0", 0.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad kernel parameters for {kind!r}: {exc}") from exc
    except CmklError as exc:
        raise ConfigError(str(exc)) from exc


def parse_kernel_string(text: str) -> KernelSpec:
    """Parse a CLI kernel description like ``rbf:gamma=0.01`` or ``linear``."""
    kind, _, rest = text.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise ConfigError(f"bad kernel parameter {item!r} (expected key=value)")
            params[key.strip()] = value.strip()
    return parse_kernel_params(kind.strip(), params)


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ConfigError(f"missing required field {context}.{key}")
    return mapping[key]


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be a mapping, got {type(raw).__name__}")
    known_top = {"dataset", "split", "kernels", "dca", "strategies", "snr_rhos",
                 "snr_form", "svm", "output", "seed"}
    extra = set(raw) - known_top
    if extra:
        raise ConfigError(f"unknown top-level config fields {sorted(extra)}")

    dataset = _require(raw, "dataset", "<root>")
    if not isinstance(dataset, dict):
        raise ConfigError("dataset must be a mapping")
    train_path = _require(dataset, "train", "dataset")
    utility_column = _require(dataset, "utility_label", "dataset")
    privacy_column = _require(dataset, "privacy_label", "dataset")
    features = dataset.get("features")
    if features is not None and (
        not isinstance(features, list) or not all(isinstance(f, str) for f in features)
    ):
        raise ConfigError("dataset.features must be a list of column names")

    split = raw.get("split", {}) or {}
    kernels_raw = _require(raw, "kernels", "<root>")
    if not isinstance(kernels_raw, list) or not kernels_raw:
        raise ConfigError("kernels must be a non-empty list")
    kernels = []
    for pos, item in enumerate(kernels_raw):
        if not isinstance(item, dict):
            raise ConfigError(f"kernels[{pos}] must be a mapping")
        item = dict(item)
        kind = _require(item, "kind", f"kernels[{pos}]")
        name = item.pop("name", None)
        q = item.pop("q", None)
        if q is not None:
            try:
                q = int(q)
            except (TypeError, ValueError):
                raise ConfigError(f"kernels[{pos}].q must be an integer") from None
        item.pop("kind")
        spec = parse_kernel_params(kind, item)
        kernels.append(KernelConfig(spec=spec, name=name or spec.label(), q=q))

    dca = raw.get("dca", {}) or {}
    svm = raw.get("svm", {}) or {}
    output = raw.get("output", {}) or {}

    try:
        return ExperimentConfig(
            train_path=str(train_path),
            test_path=str(dataset["test"]) if dataset.get("test") else None,
            utility_column=str(utility_column),
            privacy_column=str(privacy_column),
            feature_columns=tuple(features) if features else None,
            standardize=bool(dataset.get("standardize", True)),
            test_fraction=(
                float(split["test_fraction"]) if "test_fraction" in split else None
            ),
            test_size=int(split["test_size"]) if "test_size" in split else None,
            kernels=tuple(kernels),
            rho=float(dca.get("rho", 10.0)),
            rho_prime=float(dca.get("rho_prime", 1e-4)),
            strategies=tuple(raw.get("strategies", DEFAULT_STRATEGIES)),
            snr_rhos=tuple(float(r) for r in raw.get("snr_rhos", DEFAULT_SNR_RHOS)),
            snr_form=str(raw.get("snr_form", "congruent")),
            c_grid=tuple(float(c) for c in svm.get("c_grid", DEFAULT_C_GRID)),
            cv_folds=int(svm.get("folds", 5)),
            output_dir=str(output.get("dir", "results")),
            figures=bool(output.get("figures", True)),
            seed=int(raw.get("seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc


def load_config(path: str) -> ExperimentConfig:
    """Read and validate a YAML experiment config."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot open config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if raw is None:
        raise ConfigError(f"config {path} is empty")
    return config_from_dict(raw)

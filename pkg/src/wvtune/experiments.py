"""Experiment drivers behind the command line.

Each ``run_*`` function takes a validated :class:`ExperimentConfig` and returns
a :class:`Table`; :func:`write_table` serializes it byte-deterministically.
"""
from __future__ import annotations

import hashlib
import io
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .alpha_core import (
    ExactErrorObjective,
    alpha_grid,
    alpha_mmse,
    parameterize,
    select_alpha,
)
from .classifiers import (
    LinearDiscriminant,
    RpLdaConfig,
    fit_lda,
    fit_linear_svm,
    fit_logistic,
    fit_nearest_centroid,
    fit_rlda,
    fit_rplda,
    rplda_max_dim,
)
from .core_stats import (
    GaussianClassModel,
    benchmark_common_model,
    benchmark_distinct_model,
    benchmark_mean,
    compute_sample_statistics,
    read_csv_dataset,
    sample_dataset,
)
from .errors import ConfigError, DegenerateError, ParameterError, WVTuneError
from .exact_error import constant_rule_error, empirical_error, expected_error_exact
from .rmt import de_moments, ge_moments

SCENARIOS = ("known-means-sweep", "synthetic-sweep", "de-validate", "ge-validate", "tune-csv")
MODELS = ("common", "distinct", "identity")
CLASSIFIERS = ("lda", "rlda", "rplda", "svm", "logistic", "nearest-centroid")

SVM_PENALTIES = tuple(10.0**k for k in range(-4, 4))
RLDA_GAMMAS = tuple(np.round(np.arange(1e-4, 2.0 + 1e-12, 0.1), 6))

# scenario -> (alpha_min, alpha_max, alpha_step)
GRID_DEFAULTS = {
    "known-means-sweep": (-0.5, 2.0, 0.005),
    "synthetic-sweep": (-0.5, 2.0, 0.005),
    "de-validate": (0.0, 1.0, 0.25),
    "ge-validate": (0.0, 1.0, 0.25),
    "tune-csv": (-0.5, 2.0, 0.005),
}


@dataclass
class ExperimentConfig:
    scenario: str
    model: str = "common"
    p: int = 200
    n: int = 400
    classifier: str = "lda"
    gamma: float = 0.1
    penalty: float = 1.0
    rp_dim: int = 10
    rp_members: int = 100
    tune_native: bool = False
    orientation: str = "positive"  # known-means sweep: sign of w^T mu
    p_values: list = field(default_factory=lambda: [50, 100, 200])
    ratio: float = 0.5  # p / n in the validation scenarios
    alpha_min: float | None = None
    alpha_max: float | None = None
    alpha_step: float | None = None
    reps: int = 20
    seed: int = 0
    assume_common_cov: bool = False
    train_csv: str | None = None
    test_csv: str | None = None
    out: str | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        lo, hi, step = GRID_DEFAULTS[self.scenario]
        self.alpha_min = lo if self.alpha_min is None else float(self.alpha_min)
        self.alpha_max = hi if self.alpha_max is None else float(self.alpha_max)
        self.alpha_step = step if self.alpha_step is None else float(self.alpha_step)
        self.validate()

    def validate(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.classifier not in CLASSIFIERS:
            raise ConfigError(f"unknown classifier {self.classifier!r}; choose from {CLASSIFIERS}")
        if self.orientation not in ("positive", "negative", "any"):
            raise ConfigError("orientation must be positive, negative or any")
        if int(self.reps) < 1:
            raise ConfigError("reps must be >= 1")
        try:
            alpha_grid(self.alpha_min, self.alpha_max, self.alpha_step)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from None
        if self.scenario == "known-means-sweep" and self.model == "distinct":
            raise ConfigError("known-means sweep needs a common-covariance model")
        if self.scenario == "synthetic-sweep":
            n = int(self.n)
            if n < 4:
                raise ConfigError("n must be at least 4")
            if self.classifier == "lda" and not self.p < n - 2:
                raise ConfigError(f"LDA needs p < n - 2 (p={self.p}, n={n}); use rlda or rplda")
        if self.scenario in ("de-validate", "ge-validate"):
            if not 0 < self.ratio < 1:
                raise ConfigError("ratio p/n must lie in (0, 1)")
            for p in self.p_values:
                n = validation_n(p, self.ratio)
                if not p < n - 2:
                    raise ConfigError(f"p={p} with n={n} violates p < n - 2")
        if self.scenario == "de-validate" and self.assume_common_cov and self.model == "distinct":
            raise ConfigError("assume_common_cov contradicts the distinct-covariance model")
        if self.scenario == "tune-csv" and not self.train_csv:
            raise ConfigError("tune needs train_csv")

    @property
    def grid(self):
        return alpha_grid(self.alpha_min, self.alpha_max, self.alpha_step)

    def digest(self):
        """Hash of every field that can change the numbers (the output path cannot)."""
        d = asdict(self)
        d.pop("out")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @classmethod
    def from_mapping(cls, scenario, mapping):
        known = {f.name for f in fields(cls)}
        extra = set(mapping) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        kw = dict(mapping)
        kw["scenario"] = scenario
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def validation_n(p, ratio):
    return int(round(p / ratio))


def replication_seeds(seed, reps):
    """Per-replication seeds; the first k are the same for any reps >= k."""
    return [int(s) for s in np.random.SeedSequence(int(seed)).generate_state(int(reps))]


def build_model(name, p):
    if name == "common":
        return benchmark_common_model(p)
    if name == "distinct":
        return benchmark_distinct_model(p)
    return GaussianClassModel.common(benchmark_mean(p), np.zeros(p), np.eye(p))


def split_n(n):
    return n // 2, n - n // 2


@dataclass
class Table:
    columns: list
    rows: list
    notes: list = field(default_factory=list)  # ("key", value) pairs for the header


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if np.isnan(x):
        return "nan"
    return f"{x:.10g}"


def render_table(table, cfg):
    buf = io.StringIO()
    buf.write(f"# wvtune {__version__}\n")
    buf.write(f"# scenario: {cfg.scenario}\n")
    buf.write(f"# config_hash: {cfg.digest()}\n")
    buf.write(f"# seed: {cfg.seed}\n")
    for key, value in table.notes:
        if isinstance(value, (list, tuple)):
            value = " ".join(_fmt(v) for v in value)
        buf.write(f"# {key}: {_fmt(value)}\n")
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_table(table, cfg, out=None):
    text = render_table(table, cfg)
    out = out if out is not None else cfg.out
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    return text


# --- known-means sweep -------------------------------------------------------

def random_unit_vector(p, rng):
    """Uniform on the unit sphere: normalized standard Gaussian."""
    w = rng.standard_normal(p)
    return w / np.linalg.norm(w)


def known_means_curve(w, model, grid):
    """Exact error of ``(c mu + alpha P w, -w'^T (mu0 + mu1)/2)`` along the grid."""
    mu = model.mu
    coef = float(w @ mu) / float(mu @ mu)
    a, b = coef * mu, w - coef * mu
    out = np.empty(len(grid))
    for k, alpha in enumerate(grid):
        wa = a + alpha * b
        disc = LinearDiscriminant(wa, -0.5 * float(wa @ (model.mu0 + model.mu1)))
        out[k] = expected_error_exact(disc, model) if not disc.is_constant else constant_rule_error(disc, model)
    return out


def run_known_means_sweep(cfg):
    model = build_model(cfg.model, cfg.p)
    rng = np.random.default_rng(int(cfg.seed))
    w = random_unit_vector(cfg.p, rng)
    wmu = float(w @ model.mu)
    if (cfg.orientation == "positive" and wmu < 0) or (cfg.orientation == "negative" and wmu > 0):
        w, wmu = -w, -wmu
    grid = cfg.grid
    a_mmse = alpha_mmse(w, model)
    curve = known_means_curve(w, model, grid)
    rows = [(a, e, a_mmse) for a, e in zip(grid, curve)]
    notes = [
        ("w_dot_mu", wmu),
        ("alpha_mmse", a_mmse),
        ("grid_argmin", float(grid[int(np.argmin(curve))])),
        ("grid_argmax", float(grid[int(np.argmax(curve))])),
    ]
    return Table(["alpha", "exact_error", "alpha_mmse"], rows, notes)


# --- synthetic sweep -----------------------------------------------------------

def _fit_base(cfg, data, stats, model, rep_seed):
    """Base weight vector, with native hyperparameters optionally tuned by exact error."""
    kind = cfg.classifier
    if kind == "lda":
        return fit_lda(stats).w
    if kind == "nearest-centroid":
        return fit_nearest_centroid(stats).w
    if kind == "logistic":
        return fit_logistic(data).w

    def score(disc):
        return expected_error_exact(disc, model) if not disc.is_constant else constant_rule_error(disc, model)

    if kind == "svm":
        if not cfg.tune_native:
            return fit_linear_svm(data, cfg.penalty).w
        fits = [fit_linear_svm(data, c) for c in SVM_PENALTIES]
    elif kind == "rlda":
        if not cfg.tune_native:
            return fit_rlda(stats, cfg.gamma).w
        fits = [fit_rlda(stats, g) for g in RLDA_GAMMAS]
    else:
        if not cfg.tune_native:
            return fit_rplda(data, RpLdaConfig(cfg.rp_dim, cfg.rp_members, rep_seed), stats).w
        dims = range(2, rplda_max_dim(stats) + 1, 2)
        fits = [fit_rplda(data, RpLdaConfig(d, cfg.rp_members, rep_seed), stats) for d in dims]
    errs = [score(f) for f in fits]
    return fits[int(np.argmin(errs))].w


def run_synthetic_sweep(cfg):
    model = build_model(cfg.model, cfg.p)
    n0, n1 = split_n(int(cfg.n))
    grid = cfg.grid
    objective = ExactErrorObjective(model)
    seeds = replication_seeds(cfg.seed, cfg.reps)
    curves = {}
    failures = []
    for k, s in enumerate(seeds):
        data = sample_dataset(model, n0, n1, s)
        stats = compute_sample_statistics(data)
        try:
            w = _fit_base(cfg, data, stats, model, s)
            curves[k] = objective.curve(w, stats, grid)
        except WVTuneError as exc:
            failures.append(f"{k}:{type(exc).__name__}")
    if not curves:
        raise DegenerateError(f"every replication failed ({', '.join(failures)})")
    mat = np.array([curves[k] for k in sorted(curves)])
    mean = mat.mean(axis=0)
    se = mat.std(axis=0, ddof=1) / np.sqrt(len(mat)) if len(mat) > 1 else np.zeros_like(mean)
    best = select_alpha(grid, mean)
    at_one = np.flatnonzero(np.isclose(grid, 1.0))
    notes = [("rep_seeds", seeds), ("best_alpha", best), ("best_error", float(mean.min()))]
    if at_one.size:
        e1 = float(mean[at_one[0]])
        notes += [("error_at_alpha_1", e1), ("relative_decrease", (e1 - float(mean.min())) / e1)]
    if failures:
        notes.append(("failed_reps", failures))
    rows = [(a, m, e, len(mat), len(failures)) for a, m, e in zip(grid, mean, se)]
    return Table(["alpha", "mean_exact_error", "std_error", "n_ok", "n_failed"], rows, notes)


# --- DE / GE validation ---------------------------------------------------------

def _exact_curve_lda(stats, model, grid):
    return ExactErrorObjective(model).curve(fit_lda(stats).w, stats, grid)


def run_de_validate(cfg):
    grid = cfg.grid
    seeds = replication_seeds(cfg.seed, cfg.reps)
    rows = []
    for p in cfg.p_values:
        model = build_model(cfg.model, p)
        n0, n1 = split_n(validation_n(p, cfg.ratio))
        de = de_moments(model, n0, n1, assume_common=cfg.assume_common_cov).error_curve(grid)
        gaps = np.array([
            np.abs(_exact_curve_lda(compute_sample_statistics(sample_dataset(model, n0, n1, s)), model, grid) - de)
            for s in seeds
        ])
        for k, a in enumerate(grid):
            rows.append((p, n0 + n1, a, de[k], gaps[:, k].mean(), gaps[:, k].max()))
        rows.append((p, n0 + n1, "all", "", gaps.mean(), gaps.max()))
    return Table(["p", "n", "alpha", "de_error", "mean_gap", "max_gap"], rows, [("rep_seeds", seeds)])


def run_ge_validate(cfg):
    grid = cfg.grid
    seeds = replication_seeds(cfg.seed, cfg.reps)
    rows = []
    for p in cfg.p_values:
        model = build_model(cfg.model, p)
        n0, n1 = split_n(validation_n(p, cfg.ratio))
        gc, gd = [], []
        for s in seeds:
            stats = compute_sample_statistics(sample_dataset(model, n0, n1, s))
            exact = _exact_curve_lda(stats, model, grid)
            gc.append(np.abs(ge_moments(stats, True).error_curve(grid) - exact))
            gd.append(np.abs(ge_moments(stats, False).error_curve(grid) - exact))
        gc, gd = np.array(gc), np.array(gd)
        for k, a in enumerate(grid):
            rows.append((p, n0 + n1, a, gc[:, k].mean(), gc[:, k].max(), gd[:, k].mean(), gd[:, k].max()))
        rows.append((p, n0 + n1, "all", gc.mean(), gc.max(), gd.mean(), gd.max()))
    cols = ["p", "n", "alpha", "mean_gap_common", "max_gap_common", "mean_gap_distinct", "max_gap_distinct"]
    return Table(cols, rows, [("rep_seeds", seeds)])


# --- tuning on user data --------------------------------------------------------

def run_tune_csv(cfg):
    train = read_csv_dataset(cfg.train_csv)
    test = read_csv_dataset(cfg.test_csv) if cfg.test_csv else None
    if not train.p < train.n - 2:
        raise ParameterError(
            f"p={train.p} >= n - 2 = {train.n - 2}: the pooled covariance is singular; "
            "collect more training data"
        )
    if test is not None and test.p != train.p:
        raise ParameterError(f"test CSV has p={test.p}, train has p={train.p}")
    stats = compute_sample_statistics(train)
    grid = cfg.grid
    w = fit_lda(stats).w
    ge = ge_moments(stats, cfg.assume_common_cov).error_curve(grid)
    a_ge = select_alpha(grid, ge)
    notes = [("p", train.p), ("n_train", train.n), ("alpha_star_ge", a_ge)]
    test_curve = None
    if test is not None:
        test_curve = np.array([empirical_error(parameterize(w, stats, a).realized, test) for a in grid])
        a_emp = select_alpha(grid, test_curve)
        e_ge = float(test_curve[int(np.flatnonzero(grid == a_ge)[0])])
        notes += [
            ("n_test", test.n),
            ("alpha_star_empirical", a_emp),
            ("test_error_at_alpha_star_empirical", float(test_curve.min())),
            ("test_error_at_alpha_star_ge", e_ge),
            ("ge_vs_empirical_gap", e_ge - float(test_curve.min())),
        ]
        at_one = np.flatnonzero(np.isclose(grid, 1.0))
        if at_one.size:
            notes.append(("test_error_lda", float(test_curve[at_one[0]])))
    rows = [
        (a, ge[k], "" if test_curve is None else test_curve[k]) for k, a in enumerate(grid)
    ]
    return Table(["alpha", "ge_error", "test_error"], rows, notes)


RUNNERS = {
    "known-means-sweep": run_known_means_sweep,
    "synthetic-sweep": run_synthetic_sweep,
    "de-validate": run_de_validate,
    "ge-validate": run_ge_validate,
    "tune-csv": run_tune_csv,
}


def run(cfg):
    return RUNNERS[cfg.scenario](cfg)

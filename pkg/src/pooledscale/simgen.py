"""Synthetic clustered data and the factorial scaler-comparison study.

Clusters are spherical unit-variance normals.  Their degree of separation
is controlled by a separation index J in [0, 1): along the line joining two
centers, J = (L2 - U1) / (U2 - L1) where [L, U] are the 2.5% / 97.5%
quantiles of each projected cluster.  For unit-variance normals at distance
d this gives d(J) = 2 z_{0.975} (1 + J) / (1 - J), and all centers are
placed at mutual distance d(J) (vertices of a regular simplex under a random
rotation).  This is a closed-form calibration of the usual "separated" (0.21)
and "well-separated" (0.34) levels, not a port of any particular generator.
"""

from __future__ import annotations

import itertools
import math
import time
import warnings
from dataclasses import asdict, dataclass
from statistics import NormalDist

import numpy as np
import pandas as pd

from .engines import Partition
from .errors import InvalidArgumentError
from .evaluation import ENGINES, best_ari_over_k
from .gap import DEFAULT_B, DEFAULT_C, DEFAULT_KMAX, cached_reference
from .rng import substream
from .scaling import METHODS, POOLED_CRITERION, effective_kmax, scale_dataset

SEPARATION = {"separated": 0.21, "well_separated": 0.34}
LEVELS = {
    "clean_vars": (2, 4, 6, 8, 10),
    "clusters": (2, 3, 4, 5),
    "separation": tuple(SEPARATION),
    "noise_pct": (0, 50, 100, 150, 200, 500, 1000, 2000),
    "noise_type": ("gaussian", "uniform"),
    "outlier_pct": (0, 5),
}

# sd of the jitter added to uniform noise grids, as a fraction of the clean range
GRID_JITTER = 0.01


@dataclass(frozen=True)
class SimConfig:
    clean_vars: int = 4
    clusters: int = 2
    separation: str = "well_separated"
    noise_pct: int = 0
    noise_type: str = "gaussian"
    outlier_pct: int = 0
    cluster_size: int = 100
    seed: int = 0
    free_form: bool = False
    # only used in free-form mode: overrides the level's J
    separation_index: float | None = None

    def __post_init__(self):
        if self.free_form:
            if self.clean_vars < 1 or self.clusters < 1 or self.cluster_size < 1:
                raise InvalidArgumentError("sizes must be positive")
            if self.noise_pct < 0 or self.outlier_pct not in (0, 5):
                raise InvalidArgumentError("bad noise or outlier level")
            if self.noise_type not in LEVELS["noise_type"]:
                raise InvalidArgumentError(f"unknown noise type {self.noise_type!r}")
            if self.separation_index is None and self.separation not in SEPARATION:
                raise InvalidArgumentError(f"unknown separation {self.separation!r}")
            return
        for name, levels in LEVELS.items():
            if getattr(self, name) not in levels:
                raise InvalidArgumentError(f"{name}={getattr(self, name)!r} is not one of {levels}")
        if self.cluster_size < 1:
            raise InvalidArgumentError("cluster_size must be positive")

    @property
    def J(self) -> float:
        if self.separation_index is not None:
            return self.separation_index
        return SEPARATION[self.separation]

    @property
    def n(self) -> int:
        return self.clusters * self.cluster_size

    @property
    def noise_vars(self) -> int:
        return int(round(self.noise_pct / 100 * self.clean_vars))

    def cell(self) -> dict:
        d = asdict(self)
        for key in ("seed", "free_form", "separation_index"):
            d.pop(key)
        return d


@dataclass
class LabeledDataset:
    matrix: np.ndarray
    truth: Partition
    clean_mask: np.ndarray


def center_distance(J: float) -> float:
    """Distance between two unit-variance normal centers with separation index J."""
    if not 0 <= J < 1:
        raise InvalidArgumentError("separation index must be in [0, 1)")
    return 2 * NormalDist().inv_cdf(0.975) * (1 + J) / (1 - J)


def simplex_vertices(k: int) -> np.ndarray:
    """k points in R^(k-1) at unit mutual distance, centered at the origin."""
    E = np.eye(k) / math.sqrt(2)
    E -= E.mean(axis=0)
    # orthonormal basis of the centered subspace
    U, _, _ = np.linalg.svd(E.T)
    return E @ U[:, : k - 1] if k > 1 else np.zeros((1, 0))


def _random_orthonormal(rng, rows: int, dim: int) -> np.ndarray:
    """``rows`` orthonormal vectors in R^dim (rows <= dim)."""
    Q, R = np.linalg.qr(rng.standard_normal((dim, rows)))
    return (Q * np.sign(np.diag(R))).T


def cluster_centers(k: int, dim: int, J: float, rng) -> np.ndarray:
    d = center_distance(J)
    if k == 1:
        return np.zeros((1, dim))
    if dim >= k - 1:
        return d * simplex_vertices(k) @ _random_orthonormal(rng, k - 1, dim)
    warnings.warn(f"{k} clusters need {k - 1} dimensions for equidistant centers; "
                  f"using a line layout in {dim}", stacklevel=3)
    u = _random_orthonormal(rng, 1, dim)[0]
    steps = np.arange(k) - (k - 1) / 2
    return d * steps[:, None] * u[None, :]


def generate_clusters(config: SimConfig, rng=None) -> LabeledDataset:
    """Clean variables only: ``clusters`` groups of ``cluster_size`` rows."""
    rng = rng if rng is not None else substream(config.seed, "clusters")
    centers = cluster_centers(config.clusters, config.clean_vars, config.J, rng)
    labels = np.repeat(np.arange(1, config.clusters + 1), config.cluster_size)
    X = centers[labels - 1] + rng.standard_normal((config.n, config.clean_vars))
    return LabeledDataset(
        matrix=X,
        truth=Partition(labels=labels, k=config.clusters),
        clean_mask=np.ones(config.clean_vars, dtype=bool),
    )


def add_noise_variables(dataset: LabeledDataset, config: SimConfig, rng=None) -> LabeledDataset:
    """Append round(noise_pct/100 * clean_vars) uninformative columns.

    Gaussian noise is standard normal.  Uniform noise is an equally spaced
    grid over [min, max] of the clean columns, shuffled across rows, plus a
    small normal jitter.
    """
    count = config.noise_vars
    if count == 0:
        return dataset
    rng = rng if rng is not None else substream(config.seed, "noise")
    X = dataset.matrix
    n = X.shape[0]
    clean = X[:, dataset.clean_mask]
    if config.noise_type == "gaussian":
        noise = rng.standard_normal((n, count))
    else:
        lo, hi = float(clean.min()), float(clean.max())
        grid = np.linspace(lo, hi, n)
        noise = np.empty((n, count))
        for j in range(count):
            noise[:, j] = rng.permutation(grid)
        noise += rng.normal(0.0, GRID_JITTER * (hi - lo), size=noise.shape)
    return LabeledDataset(
        matrix=np.hstack([X, noise]),
        truth=dataset.truth,
        clean_mask=np.concatenate([dataset.clean_mask, np.zeros(count, dtype=bool)]),
    )


def contaminate(dataset: LabeledDataset, outlier_pct: int, rng=None, seed=0) -> LabeledDataset:
    """Replace floor(pct% of n) entries of every clean column by outliers drawn
    from Uniform[mean - 4 sd, mean + 4 sd] of that column."""
    if outlier_pct not in (0, 5):
        raise InvalidArgumentError("outlier_pct must be 0 or 5")
    if outlier_pct == 0:
        return dataset
    rng = rng if rng is not None else substream(seed, "outliers")
    X = dataset.matrix.copy()
    n = X.shape[0]
    m = (outlier_pct * n) // 100
    for j in np.flatnonzero(dataset.clean_mask):
        mu, sd = X[:, j].mean(), X[:, j].std(ddof=1)
        rows = rng.choice(n, size=m, replace=False)
        X[rows, j] = rng.uniform(mu - 4 * sd, mu + 4 * sd, size=m)
    return LabeledDataset(matrix=X, truth=dataset.truth, clean_mask=dataset.clean_mask.copy())


def make_dataset(config: SimConfig, seed, cell: int, rep: int) -> LabeledDataset:
    """generate -> contaminate -> add noise, each step on its own stream."""
    ds = generate_clusters(config, substream(seed, "clusters", cell, rep))
    ds = contaminate(ds, config.outlier_pct, substream(seed, "outliers", cell, rep))
    return add_noise_variables(ds, config, substream(seed, "noise", cell, rep))


def full_grid(cluster_size: int = 100) -> list:
    keys = list(LEVELS)
    return [SimConfig(**dict(zip(keys, combo)), cluster_size=cluster_size)
            for combo in itertools.product(*(LEVELS[k] for k in keys))]


def preset(name: str) -> list:
    """Named grids.  ``figure2`` is a desk-scale slice along the noise axis."""
    noise_axis = (0, 100, 500, 1000, 2000)
    if name in ("figure2", "figure2-outliers"):
        outliers = 5 if name == "figure2-outliers" else 0
        return [SimConfig(clean_vars=4, clusters=2, separation="well_separated",
                          noise_pct=pct, noise_type=kind, outlier_pct=outliers)
                for kind in LEVELS["noise_type"] for pct in noise_axis]
    if name == "full":
        return full_grid()
    raise InvalidArgumentError(f"unknown preset {name!r}")


PRESETS = ("figure2", "figure2-outliers", "full")

RESULT_COLUMNS = ["cell", "replicate", *SimConfig().cell().keys(), "scaler", "engine",
                  "best_ari", "best_k", "error"]


class ResultsTable:
    """One row per (cell, scaler, engine, replicate)."""

    def __init__(self, rows=None):
        self.frame = pd.DataFrame(rows or [], columns=RESULT_COLUMNS)

    def __len__(self):
        return len(self.frame)

    def summary(self, by=("noise_pct", "scaler", "engine")) -> pd.DataFrame:
        g = self.frame.groupby(list(by), sort=True)["best_ari"]
        return g.agg(mean="mean", sd="std", count="count").reset_index()

    def mean_ari(self, **where) -> float:
        f = self.frame
        for col, val in where.items():
            if callable(val):
                f = f[val(f[col])]
            else:
                f = f[f[col] == val]
        return float(f["best_ari"].mean())

    def to_csv(self, path=None, float_format="%.12g"):
        return self.frame.to_csv(path, index=False, float_format=float_format)

    @classmethod
    def read_csv(cls, path) -> "ResultsTable":
        t = cls()
        t.frame = pd.read_csv(path, keep_default_na=True)
        return t


def run_design(grid, scalers=METHODS, engines=("kmeans", "hc-ward"), reps: int = 20, seed=0, *,
               kmax: int = DEFAULT_KMAX, B: int = DEFAULT_B, c: float = DEFAULT_C,
               starts: int = 100, max_iters: int = 100, cache_dir=None, progress=None) -> ResultsTable:
    """Run every (cell, replicate) of the design and score each scaler/engine pair.

    A failure in one cell is recorded in that row's ``error`` column and the
    run continues.  Cell ``i`` replicate ``r`` always uses the same random
    streams, so results do not depend on which other cells are run.
    """
    grid = list(grid)
    if not grid or not scalers or not engines:
        raise InvalidArgumentError("grid, scalers and engines must be non-empty")
    for s in scalers:
        if s not in METHODS:
            raise InvalidArgumentError(f"unknown scaler {s!r}")
    for e in engines:
        if e not in ENGINES:
            raise InvalidArgumentError(f"unknown engine {e!r}")
    refs = {}
    rows = []
    t0 = time.perf_counter()
    for ci, config in enumerate(grid):
        for rep in range(reps):
            base = {"cell": ci, "replicate": rep, **config.cell()}
            try:
                ds = make_dataset(config, seed, ci, rep)
            except Exception as exc:  # noqa: BLE001 - recorded per row
                for scaler in scalers:
                    for engine in engines:
                        rows.append({**base, "scaler": scaler, "engine": engine,
                                     "best_ari": np.nan, "best_k": None, "error": repr(exc)})
                continue
            n = ds.matrix.shape[0]
            for scaler in scalers:
                try:
                    ref = None
                    if scaler in POOLED_CRITERION:
                        key = (n, POOLED_CRITERION[scaler])
                        if key not in refs:
                            refs[key] = cached_reference(n, effective_kmax(n, kmax), B, key[1],
                                                         seed, cache_dir=cache_dir)
                        ref = refs[key]
                    scaled, _ = scale_dataset(ds.matrix, scaler, kmax=kmax, B=B, c=c,
                                              seed=seed, reference=ref)
                    scale_err = None
                except Exception as exc:  # noqa: BLE001
                    scaled, scale_err = None, repr(exc)
                for engine in engines:
                    row = {**base, "scaler": scaler, "engine": engine}
                    if scale_err is not None:
                        rows.append({**row, "best_ari": np.nan, "best_k": None, "error": scale_err})
                        continue
                    try:
                        ari, k = best_ari_over_k(scaled, ds.truth, engine,
                                                 seed=_engine_seed(seed, ci, rep),
                                                 starts=starts, max_iters=max_iters)
                        rows.append({**row, "best_ari": ari, "best_k": k, "error": None})
                    except Exception as exc:  # noqa: BLE001
                        rows.append({**row, "best_ari": np.nan, "best_k": None, "error": repr(exc)})
            if progress is not None:
                progress(ci, rep, time.perf_counter() - t0)
    return ResultsTable(rows)


def _engine_seed(seed, cell: int, rep: int) -> int:
    # fold (cell, rep) into a 64-bit seed for the engines' own substreams
    return int(substream(seed, "engine", cell, rep).integers(0, 2**63))

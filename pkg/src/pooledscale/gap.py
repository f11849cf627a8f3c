"""Choosing the per-variable number of clusters.

The gap statistic compares log W_k of a variable (rescaled to range one)
with its distribution under Uniform[0, 1] samples of the same size.  Because
the univariate solutions are affine equivariant, one bootstrap reference per
(n, kmax, B, criterion) serves every variable of a dataset; see
:func:`build_reference`.

The jump statistic is provided as a bootstrap-free alternative.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError
from .rng import normalize_seed, substream
from .univariate import CRITERIA, batch_within

DEFAULT_B = 1000
DEFAULT_C = 1.0
DEFAULT_KMAX = 10

CACHE_FORMAT = "pooledscale.gap_reference/1"


@dataclass(frozen=True)
class GapReference:
    """Bootstrap summary of log W*_k under the uniform reference.

    ``m[k-1]`` is the mean and ``sd[k-1]`` the (1/B) standard deviation of
    log W*_k over the replicates; ``s = sqrt(1 + 1/B) * sd``.
    """

    n: int
    kmax: int
    B: int
    criterion: str
    seed: int
    m: np.ndarray
    sd: np.ndarray
    s: np.ndarray

    @property
    def key(self) -> tuple:
        return (self.n, self.kmax, self.B, self.criterion, self.seed)

    def to_dict(self) -> dict:
        return {
            "format": CACHE_FORMAT,
            "n": self.n,
            "kmax": self.kmax,
            "B": self.B,
            "criterion": self.criterion,
            "seed": self.seed,
            # repr round-trips float64 exactly
            "m": [float(v) for v in self.m],
            "sd": [float(v) for v in self.sd],
            "s": [float(v) for v in self.s],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GapReference":
        if d.get("format") != CACHE_FORMAT:
            raise ValueError(f"not a gap reference record: format={d.get('format')!r}")
        return cls(
            n=int(d["n"]),
            kmax=int(d["kmax"]),
            B=int(d["B"]),
            criterion=str(d["criterion"]),
            seed=int(d["seed"]),
            m=np.array(d["m"], dtype=float),
            sd=np.array(d["sd"], dtype=float),
            s=np.array(d["s"], dtype=float),
        )


@dataclass(frozen=True)
class GapCurve:
    gap: np.ndarray
    logW: np.ndarray
    criterion: str

    @property
    def kmax(self) -> int:
        return self.gap.size


def reference_samples(n: int, B: int, seed: int) -> np.ndarray:
    """The B sorted Uniform[0, 1] samples of size n (replicate b = stream b)."""
    out = np.empty((B, n))
    for b in range(B):
        out[b] = np.sort(substream(seed, "gap-reference", b).random(n))
    return out


def build_reference(n: int, kmax: int = DEFAULT_KMAX, B: int = DEFAULT_B,
                    criterion: str = "squared", seed: int = 0) -> GapReference:
    """Bootstrap E*[log W_k] and its spread for Uniform[0, 1] samples of size n."""
    n, kmax, B = int(n), int(kmax), int(B)
    if criterion not in CRITERIA:
        raise InvalidArgumentError(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    if n < 1:
        raise InvalidArgumentError("n must be positive")
    if kmax < 1 or kmax > n:
        raise InvalidArgumentError(f"kmax must be in 1..n={n}, got {kmax}")
    if B < 2:
        raise InvalidArgumentError("B must be at least 2")
    seed = normalize_seed(seed)
    W = batch_within(reference_samples(n, B, seed), kmax, criterion == "absolute")
    with np.errstate(divide="ignore"):
        logW = np.log(W)
    # replicate-order reduction keeps the result bit-reproducible
    m = logW.mean(axis=0)
    sd = np.sqrt(((logW - m) ** 2).mean(axis=0))
    s = math.sqrt(1.0 + 1.0 / B) * sd
    return GapReference(n=n, kmax=kmax, B=B, criterion=criterion, seed=seed, m=m, sd=sd, s=s)


def default_cache_dir() -> Path:
    env = os.environ.get("POOLEDSCALE_CACHE_DIR")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "pooledscale"


def _cache_path(cache_dir, n, kmax, B, criterion, seed) -> Path:
    return Path(cache_dir) / f"gapref-n{n}-k{kmax}-B{B}-{criterion}-s{seed}.json"


def save_reference(ref: GapReference, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_text(json.dumps(ref.to_dict(), indent=1) + "\n")
    os.replace(tmp, path)


def load_reference(path) -> GapReference:
    return GapReference.from_dict(json.loads(Path(path).read_text()))


def cached_reference(n: int, kmax: int = DEFAULT_KMAX, B: int = DEFAULT_B,
                     criterion: str = "squared", seed: int = 0, cache_dir=None) -> GapReference:
    """Load the reference for this key from ``cache_dir``, building it on a miss.

    ``cache_dir=False`` disables the cache entirely.
    """
    if cache_dir is False:
        return build_reference(n, kmax, B, criterion, seed)
    if cache_dir is None:
        cache_dir = default_cache_dir()
    seed = normalize_seed(seed)
    path = _cache_path(cache_dir, n, kmax, B, criterion, seed)
    if path.exists():
        try:
            ref = load_reference(path)
        except (ValueError, KeyError, json.JSONDecodeError):
            ref = None
        if ref is not None and ref.key == (n, kmax, B, criterion, seed):
            return ref
    ref = build_reference(n, kmax, B, criterion, seed)
    try:
        save_reference(ref, path)
    except OSError:
        pass  # read-only cache location: still return the fresh reference
    return ref


def gap_curve(solutions, reference: GapReference) -> GapCurve:
    """Gap(k) = m_k - log W_k for the solutions of one range-rescaled variable.

    Zero dispersion (W_k = 0, only possible with tied values) yields a gap of
    +inf, which the selection rule treats as decisive for that k.
    """
    if not solutions:
        raise InvalidArgumentError("need at least one solution")
    criterion = solutions[0].criterion
    if criterion != reference.criterion:
        raise InvalidArgumentError(
            f"solutions use {criterion!r} but the reference was built for {reference.criterion!r}")
    if len(solutions) > reference.kmax:
        raise InvalidArgumentError("more solutions than the reference covers")
    W = np.array([sol.within for sol in solutions])
    with np.errstate(divide="ignore"):
        logW = np.log(W)
    gap = np.where(W > 0, reference.m[: W.size] - logW, np.inf)
    return GapCurve(gap=gap, logW=logW, criterion=criterion)


def select_k_gap(curve: GapCurve, reference: GapReference, c: float = DEFAULT_C):
    """Smallest k with Gap(k) >= Gap(k+1) - c*s_{k+1}.

    Returns ``(k_star, saturated)``; when no k qualifies the answer is the
    largest k evaluated and ``saturated`` is True.
    """
    if c < 0:
        raise InvalidArgumentError("c must be nonnegative")
    gap = np.asarray(curve.gap, dtype=float)
    s = np.asarray(reference.s, dtype=float)
    K = gap.size
    for k in range(K - 1):
        if gap[k] == np.inf or gap[k] >= gap[k + 1] - c * s[k + 1]:
            return k + 1, False
    if K >= 1 and gap[K - 1] == np.inf:
        return K, False
    return K, True


def jump_statistic(distortions) -> np.ndarray:
    """J_k = d_k^(-1/2) - d_(k-1)^(-1/2) for k = 1..K, with d_0^(-1/2) taken as 0.

    Zero distortions give an infinite jump.
    """
    d = np.asarray(distortions, dtype=float)
    with np.errstate(divide="ignore"):
        inv = np.where(d > 0, d ** -0.5, np.inf)
    with np.errstate(invalid="ignore"):
        jumps = np.diff(np.concatenate(([0.0], inv)))
    # inf - inf after the first zero distortion: keep only the first as decisive
    return np.where(np.isnan(jumps), -np.inf, jumps)


def select_k_jump(solutions) -> int:
    """k maximizing the jump statistic of the squared-loss distortions S_k^2.

    Ties go to the smallest k; a zero distortion wins outright.
    """
    if not solutions:
        raise InvalidArgumentError("need at least one solution")
    if any(sol.criterion != "squared" for sol in solutions):
        raise InvalidArgumentError("the jump statistic uses squared-loss distortions")
    jumps = jump_statistic([sol.objective**2 for sol in solutions])
    return int(np.argmax(jumps)) + 1

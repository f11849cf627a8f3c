"""Variable scaling before cluster analysis.

Classic scalers divide every column by its standard deviation, range or
mean absolute deviation.  The pooled scalers (``psd``/``pmad``) divide by
the within-cluster spread of an optimal univariate clustering whose number
of clusters is picked per column by the gap statistic, so a column with
visible group structure is not shrunk by the distance between its groups.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, InvalidDataError
from .gap import (
    DEFAULT_B,
    DEFAULT_C,
    DEFAULT_KMAX,
    GapReference,
    cached_reference,
    gap_curve,
    select_k_gap,
)
from .univariate import solve_path

METHODS = ("none", "sd", "range", "mad", "psd", "pmad")
CLASSIC = ("sd", "range", "mad")
POOLED_CRITERION = {"psd": "squared", "pmad": "absolute"}

# substitute divisor when every pooled scale on the path is zero
ZERO_COST_FLOOR = 1e-12


@dataclass
class ScaleDecision:
    variable_id: object
    method: str
    scale: float
    k_star: int | None = None
    ratio: float | None = None
    flags: frozenset = field(default_factory=frozenset)

    def to_dict(self) -> dict:
        return {
            "variable": self.variable_id,
            "method": self.method,
            "scale": self.scale,
            "k_star": self.k_star,
            "ratio": self.ratio,
            "flags": sorted(self.flags),
        }


@dataclass
class ScaleReport:
    decisions: list
    method: str
    config: dict

    @property
    def scales(self) -> np.ndarray:
        return np.array([d.scale for d in self.decisions])

    def to_json(self) -> str:
        doc = {
            "method": self.method,
            "config": self.config,
            "variables": [d.to_dict() for d in self.decisions],
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ScaleReport":
        doc = json.loads(text)
        decisions = [
            ScaleDecision(
                variable_id=v["variable"],
                method=v["method"],
                scale=float(v["scale"]),
                k_star=v["k_star"],
                ratio=v["ratio"],
                flags=frozenset(v["flags"]),
            )
            for v in doc["variables"]
        ]
        return cls(decisions=decisions, method=doc["method"], config=doc["config"])

    def to_csv(self, delimiter: str = ",") -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
        w.writerow(["variable", "method", "scale", "k_star", "ratio", "flags"])
        for d in self.decisions:
            w.writerow([
                d.variable_id,
                d.method,
                _fmt(d.scale),
                "" if d.k_star is None else d.k_star,
                "" if d.ratio is None else _fmt(d.ratio),
                ";".join(sorted(d.flags)),
            ])
        return buf.getvalue()


def _fmt(v: float) -> str:
    return format(v, ".12g")


def _column(values) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise InvalidDataError("expected a single column of values")
    if not np.all(np.isfinite(x)):
        raise InvalidDataError("column contains NaN or infinite values")
    return x


def classic_scale(values, method: str) -> float:
    """Standard deviation (n-1), range, or mean absolute deviation from the median.

    The mad uses the 1/(n-1) normalization.  Constant input returns 0.
    """
    x = _column(values)
    if x.size < 2:
        raise InvalidDataError("need at least two values")
    if method == "sd":
        return float(np.std(x, ddof=1))
    if method == "range":
        return float(x.max() - x.min())
    if method == "mad":
        return float(np.sum(np.abs(x - np.median(x))) / (x.size - 1))
    raise InvalidArgumentError(f"unknown classic scale {method!r}")


def pooled_scale_variable(values, reference: GapReference, c: float = DEFAULT_C,
                          criterion: str = "squared", variable_id=None) -> ScaleDecision:
    """Pooled scale of one column using a shared uniform reference.

    The column is divided by its range, clustered for k = 1..kmax, k* is
    picked by the gap rule and the k* objective is mapped back to input
    units.  ``ratio`` is the k = 1 scale (population sd or mean absolute
    deviation from the median) divided by the pooled scale.
    """
    x = _column(values)
    method = "psd" if criterion == "squared" else "pmad"
    if criterion != reference.criterion:
        raise InvalidArgumentError("criterion does not match the reference")
    if x.size != reference.n:
        raise InvalidArgumentError(f"reference built for n={reference.n}, column has {x.size} values")
    r = float(x.max() - x.min())
    if r == 0.0:
        return ScaleDecision(variable_id, method, 1.0, k_star=1, ratio=1.0,
                             flags=frozenset({"constant"}))
    kmax = min(reference.kmax, x.size)
    path = solve_path(x / r, kmax, criterion)
    k_star, saturated = select_k_gap(gap_curve(path, reference), reference, c)
    flags = {"saturated"} if saturated else set()
    pooled = path[k_star - 1].objective
    if pooled == 0.0:
        nonzero = [sol.objective for sol in path if sol.objective > 0.0]
        pooled = min(nonzero) if nonzero else ZERO_COST_FLOOR
        flags.add("zero_cost")
    scale = r * pooled
    ratio = path[0].objective / pooled if path[0].objective > 0 else 1.0
    return ScaleDecision(variable_id, method, scale, k_star=k_star, ratio=ratio,
                         flags=frozenset(flags))


def effective_kmax(n: int, kmax: int) -> int:
    """kmax capped so the uniform reference never contains W*_k = 0."""
    return max(1, min(int(kmax), n - 1))


def scale_dataset(data, method: str = "psd", *, columns=None, kmax: int = DEFAULT_KMAX,
                  B: int = DEFAULT_B, c: float = DEFAULT_C, seed: int = 0,
                  reference: GapReference | None = None, cache_dir=None):
    """Scale every column of ``data`` (n x p) by the chosen method.

    Returns ``(scaled, report)``.  For the pooled methods exactly one gap
    reference is used for all columns; pass ``reference`` to reuse one,
    otherwise it is loaded from (or written to) the reference cache.
    """
    if method not in METHODS:
        raise InvalidArgumentError(f"method must be one of {METHODS}, got {method!r}")
    X = np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise InvalidDataError("data must be a 2-D matrix")
    n, p = X.shape
    if n < 2 or p < 1:
        raise InvalidDataError(f"need at least 2 rows and 1 column, got {n}x{p}")
    if not np.all(np.isfinite(X)):
        raise InvalidDataError("data contain NaN or infinite values")
    if columns is None:
        columns = [f"v{j + 1}" for j in range(p)]
    if len(columns) != p:
        raise InvalidArgumentError("one column name per column required")

    config = {"kmax": int(kmax), "B": int(B), "c": float(c), "seed": int(seed), "criterion": None}
    decisions = []
    if method == "none":
        decisions = [ScaleDecision(name, "none", 1.0) for name in columns]
    elif method in CLASSIC:
        for j, name in enumerate(columns):
            s = classic_scale(X[:, j], method)
            if s > 0:
                decisions.append(ScaleDecision(name, method, s))
            else:
                decisions.append(ScaleDecision(name, method, 1.0, flags=frozenset({"constant"})))
    else:
        criterion = POOLED_CRITERION[method]
        config["criterion"] = criterion
        if reference is None:
            reference = cached_reference(n, effective_kmax(n, kmax), B, criterion, seed,
                                         cache_dir=cache_dir)
        elif reference.n != n or reference.criterion != criterion:
            raise InvalidArgumentError("supplied reference does not match the data")
        for j, name in enumerate(columns):
            decisions.append(pooled_scale_variable(X[:, j], reference, c, criterion, name))

    scales = np.array([d.scale for d in decisions])
    scaled = X / scales if method != "none" else X.copy()
    return scaled, ScaleReport(decisions=decisions, method=method, config=config)


def scale_ratios(report: ScaleReport) -> list:
    """(variable, ratio) pairs, largest ratio first; ties keep column order."""
    if report.method not in POOLED_CRITERION:
        raise InvalidArgumentError("scale ratios need a psd or pmad report")
    rows = [(d.variable_id, d.ratio) for d in report.decisions]
    return sorted(rows, key=lambda r: -r[1])

"""Estimators for the lambda, alpha, chi and I measures on ``A^N``.

``lambda_profile`` reports the decreasing profile ``n -> sup_{x in E} ||(I - P_n) x||``
whose limit is the measure ``lambda``.  In the truncated model the profile
necessarily drops to zero at ``n = N``, so the reported estimate is the profile
value at a horizon ``n_max < N``; it is an upper estimate of the limit for the
set's natural infinite extension.

Semi-norm measures (Kuratowski, Hausdorff, Istratescu) are bracketed from a
finite point cloud: a greedy covering gives a Hausdorff upper bound, a greedy
farthest-point packing gives an Istratescu lower bound, and the chain
``chi <= I <= alpha <= 2 chi`` moves those bounds between the three measures.
Kuratowski's measure is never computed directly.  Because removing the first
``n`` coordinates does not change these measures, clouds are projected onto
the tail beyond the horizon before measuring.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .module import ModuleOperator
from .seminorm import SemiNorm, random_seminorm
from .sets import DEFAULT_SAMPLES, Interval, OperatorImage, SetExpr, _concat, tail_intervals

MEASURES = ("alpha", "chi", "istratescu")
CERTIFIED = "certified"
SAMPLED = "sampled"

LAMBDA_CAVEAT = ("the estimate is the profile value at the horizon n_max; "
                 "it is an upper estimate of the limit over an infinite extension")


@dataclass(frozen=True)
class TailProfile:
    n_max: int
    values: tuple[Interval, ...]
    note: str = LAMBDA_CAVEAT

    @property
    def estimate(self) -> Interval:
        return self.values[self.n_max]

    @property
    def lo(self) -> np.ndarray:
        return np.array([v.lo for v in self.values])

    @property
    def hi(self) -> np.ndarray:
        return np.array([v.hi for v in self.values])

    def to_dict(self) -> dict:
        return {"n_max": self.n_max, "profile": [v.to_list() for v in self.values],
                "estimate": self.estimate.to_list(), "note": self.note}


def lambda_profile(expr: SetExpr, n_max: int | None = None,
                   samples: int = DEFAULT_SAMPLES, seed: int = 0) -> TailProfile:
    """Tail-norm intervals for ``n = 0..n_max`` (default ``N - 1``)."""
    n_max = expr.N - 1 if n_max is None else int(n_max)
    if not 0 <= n_max <= expr.N:
        raise IndexError(f"n_max={n_max} out of range 0..{expr.N}")
    return TailProfile(n_max, tuple(tail_intervals(expr, samples, seed)[:n_max + 1]))


@dataclass(frozen=True)
class MncParams:
    """Knobs for the point-cloud estimators.

    ``horizon`` defaults to ``N // 2``: clouds are projected beyond it and the
    lambda caps are read there.  ``min_pack`` defaults to ``max_centers + 1``,
    which makes the packing and covering bounds consistent by pigeonhole.
    """

    samples: int = 256
    max_centers: int = 3
    min_pack: int | None = None
    horizon: int | None = None
    grid_lo: float = 1e-3
    grid_hi: float = 2.0
    grid_ratio: float = 1.1
    seminorms: int = 16
    seed: int = 0

    def resolved_horizon(self, N: int) -> int:
        h = N // 2 if self.horizon is None else int(self.horizon)
        if not 0 <= h < N:
            raise ValueError(f"horizon {h} out of range 0..{N - 1}")
        return h

    @property
    def pack_size(self) -> int:
        return self.max_centers + 1 if self.min_pack is None else int(self.min_pack)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class MncEstimate:
    kind: str
    lower: float
    upper: float
    lower_validity: str
    upper_validity: str
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in MEASURES:
            raise ValueError(f"unknown measure {self.kind!r}")
        if self.lower > self.upper + 1e-9:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")

    @property
    def validity(self) -> str:
        both = self.lower_validity == CERTIFIED and self.upper_validity == CERTIFIED
        return CERTIFIED if both else SAMPLED

    def to_dict(self) -> dict:
        return {"measure": self.kind, "lower": self.lower, "upper": self.upper,
                "lower_validity": self.lower_validity, "upper_validity": self.upper_validity,
                "validity": self.validity, **({"details": self.details} if self.details else {})}


def epsilon_grid(scale: float, params: MncParams) -> np.ndarray:
    """Geometric grid from ``grid_lo * scale`` to ``grid_hi * scale``."""
    if scale <= 0:
        return np.zeros(0)
    count = int(np.floor(np.log(params.grid_hi / params.grid_lo) / np.log(params.grid_ratio))) + 1
    return scale * params.grid_lo * params.grid_ratio ** np.arange(count)


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    sq = np.sum(np.abs(points) ** 2, axis=1)
    gram = points @ points.conj().T
    return np.sqrt(np.clip(sq[:, None] + sq[None, :] - 2 * gram.real, 0.0, None))


def greedy_cover(points: np.ndarray, eps: float, max_centers: int,
                 dist: np.ndarray | None = None) -> list[int] | None:
    """Greedy closed ``eps``-cover of a feature cloud; ``None`` if it needs too many centers.

    The uncovered point of largest norm becomes the next center.
    """
    norms = np.linalg.norm(points, axis=1)
    uncovered = np.ones(len(points), dtype=bool)
    centers: list[int] = []
    while uncovered.any():
        if len(centers) == max_centers:
            return None
        idx = np.nonzero(uncovered)[0]
        c = int(idx[np.argmax(norms[idx])])
        centers.append(c)
        row = np.linalg.norm(points - points[c], axis=1) if dist is None else dist[c]
        uncovered &= row > eps
    return centers


def greedy_packing(points: np.ndarray, count: int) -> tuple[list[int], float]:
    """Farthest-point insertion seeded by the largest-norm point.

    Returns the chosen indices and their minimal pairwise distance (0 when the
    cloud has fewer than ``count`` points).
    """
    if len(points) < count or count < 1:
        return [], 0.0
    chosen = [int(np.argmax(np.linalg.norm(points, axis=1)))]
    dist = np.linalg.norm(points - points[chosen[0]], axis=1)
    sep = np.inf
    while len(chosen) < count:
        nxt = int(np.argmax(dist))
        sep = min(sep, float(dist[nxt]))
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(points - points[nxt], axis=1))
    return chosen, (0.0 if sep == np.inf else sep)


def packing_succeeds(points: np.ndarray, eps: float, count: int) -> bool:
    _, sep = greedy_packing(points, count)
    return sep >= eps


def tail_cloud(expr: SetExpr, params: MncParams, rng: np.random.Generator):
    """Members of ``expr`` (structural maximizers beyond the horizon plus samples), tails only."""
    h = params.resolved_horizon(expr.N)
    parts = [expr.maximizers(n) for n in range(h, expr.N)]
    if params.samples > 0:
        parts.append(expr.sample_batch(rng, params.samples))
    cloud = _concat(parts)
    for a in cloud:
        a[:, :h] = 0
    return cloud


def _zero_estimates(reason: str) -> dict[str, MncEstimate]:
    return {m: MncEstimate(m, 0.0, 0.0, CERTIFIED, CERTIFIED, {"reason": reason}) for m in MEASURES}


def _set_scale(expr: SetExpr) -> float:
    return tail_intervals(expr, samples=0)[0].hi


def _bracket(pack: float, cover: float, details: dict) -> dict[str, MncEstimate]:
    return {
        "chi": MncEstimate("chi", pack / 2, cover, SAMPLED, SAMPLED, details),
        "istratescu": MncEstimate("istratescu", pack, 2 * cover, SAMPLED, SAMPLED, details),
        "alpha": MncEstimate("alpha", pack, 2 * cover, SAMPLED, SAMPLED, details),
    }


def _cloud_bounds(features: np.ndarray, grid: np.ndarray, params: MncParams) -> tuple[float, float]:
    _, sep = greedy_packing(features, params.pack_size)
    below = grid[grid <= sep]
    pack = float(below[-1]) if len(below) else 0.0
    cover = float(np.linalg.norm(features, axis=1).max()) if len(features) else 0.0
    dist = pairwise_distances(features)
    # pack_size > max_centers points at mutual distance sep force 2 eps >= sep
    for eps in grid[grid >= sep / 2 * (1 - 1e-12)] if params.pack_size > params.max_centers else grid:
        if eps >= cover:
            break
        if greedy_cover(features, eps, params.max_centers, dist) is not None:
            cover = float(eps)
            break
    return pack, cover


def seminorm_mnc_all(expr: SetExpr, p: SemiNorm, params: MncParams = MncParams(),
                     cloud=None, scale: float | None = None) -> dict[str, MncEstimate]:
    """All three per-semi-norm brackets from one cloud (``scale`` is ``||E||``, for the grid)."""
    if expr.is_finite:
        return _zero_estimates("finite sets are totally bounded")
    scale = _set_scale(expr) if scale is None else scale
    if scale == 0:
        return _zero_estimates("the set is {0}")
    grid = epsilon_grid(scale, params)
    if len(grid) == 0:
        raise ValueError("empty epsilon grid")
    if cloud is None:
        cloud = tail_cloud(expr, params, np.random.default_rng([params.seed, 0]))
    if cloud[0].shape[0] == 0:
        raise ValueError("empty sample")
    pack, cover = _cloud_bounds(p.features(cloud), grid, params)
    return _bracket(pack, cover, {"horizon": params.resolved_horizon(expr.N), "cloud": int(cloud[0].shape[0])})


def seminorm_mnc_bounds(expr: SetExpr, p: SemiNorm, which: str,
                        params: MncParams = MncParams()) -> MncEstimate:
    if which not in MEASURES:
        raise ValueError(f"unknown measure {which!r}")
    return seminorm_mnc_all(expr, p, params)[which]


def seminorm_stream(expr: SetExpr, params: MncParams, count: int | None = None) -> list[SemiNorm]:
    """The ``i``-th semi-norm depends only on ``(seed, i)``, so prefixes agree across counts.

    The first one always has constant weights, which sees every coordinate.
    """
    count = params.seminorms if count is None else count
    return [random_seminorm(expr.desc, expr.N, np.random.default_rng([params.seed, 1, i]),
                            "constant" if i == 0 else None)
            for i in range(count)]


def star_aggregate_all(expr: SetExpr, params: MncParams = MncParams(),
                       seminorms: list[SemiNorm] | None = None,
                       lambda_seed: int = 0) -> dict[str, MncEstimate]:
    """Brackets for ``sup_p [mu(E)](p)``, all three measures from one cloud.

    The lower bound is the best per-semi-norm lower bound over the sampled
    semi-norms.  The upper bound is the lambda cap at the horizon: the Hausdorff
    measure never exceeds it, the other two never exceed twice it.
    """
    if params.seminorms < 1 and seminorms is None:
        raise ValueError("need at least one semi-norm")
    if expr.is_finite:
        return _zero_estimates("finite sets are totally bounded")
    h = params.resolved_horizon(expr.N)
    ts = tail_intervals(expr, DEFAULT_SAMPLES, lambda_seed)
    cap = ts[h].hi
    seminorms = seminorm_stream(expr, params) if seminorms is None else seminorms
    if ts[0].hi == 0:
        return _zero_estimates("the set is {0}")
    cloud = tail_cloud(expr, params, np.random.default_rng([params.seed, 0]))
    per = [seminorm_mnc_all(expr, p, params, cloud=cloud, scale=ts[0].hi) for p in seminorms]
    out = {}
    for m in MEASURES:
        lowers = [e[m].lower for e in per]
        best = int(np.argmax(lowers)) if lowers else -1
        out[m] = MncEstimate(m, float(lowers[best]) if lowers else 0.0, cap if m == "chi" else 2 * cap,
                             SAMPLED, CERTIFIED,
                             {"horizon": h, "lambda_cap": cap, "seminorms": len(seminorms),
                              "best_seminorm": best, "per_seminorm_lower": [float(v) for v in lowers]})
    return out


def star_aggregate(expr: SetExpr, which: str, params: MncParams = MncParams(),
                   seminorms: list[SemiNorm] | None = None, lambda_seed: int = 0) -> MncEstimate:
    """Bracket one star measure; see :func:`star_aggregate_all`."""
    if which not in MEASURES:
        raise ValueError(f"unknown measure {which!r}")
    return star_aggregate_all(expr, params, seminorms, lambda_seed)[which]


OPERATOR_MEASURES = {"lambda0": "lambda", "alpha0": "alpha", "chi0": "chi", "i0": "istratescu"}


def op_mnc(T: ModuleOperator, which: str, params: MncParams = MncParams(), n_max: int | None = None):
    """Measures of an operator: the corresponding measure of ``T(B_1)``."""
    if which not in OPERATOR_MEASURES:
        raise ValueError(f"unknown operator measure {which!r}")
    image = OperatorImage(T)
    if which == "lambda0":
        return lambda_profile(image, n_max)
    return star_aggregate(image, OPERATOR_MEASURES[which], params)


def with_horizon(params: MncParams, horizon: int) -> MncParams:
    return replace(params, horizon=horizon)

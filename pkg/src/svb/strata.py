"""Stratifications as named point clouds with a declared closure order.

Closure relations between strata cannot be recovered from finite
samples, so they are declared up front and then audited numerically:
``check_frontier`` flags stratum pairs that look like frontier pairs in
the samples but are not declared (or whose declared covering fails at
the requested resolution).  ``local_finiteness_report`` counts how many
strata crowd each sample point, the finite surrogate for local
finiteness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .config import MAX_LOCAL_STRATA, TOL_RANK
from .grassmann import span

__all__ = [
    "Stratum",
    "Stratification",
    "FrontierViolation",
    "FrontierReport",
    "LocalFinitenessReport",
    "check_frontier",
    "filtration",
    "local_finiteness_report",
    "estimate_cloud_dim",
    "single_linkage_components",
]


@dataclass(frozen=True)
class Stratum:
    """A named stratum sampled by a nonempty point cloud in R^m."""

    name: str
    dim: int
    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            raise ValueError(f"stratum {self.name!r} has an empty point cloud")
        if self.dim < 0:
            raise ValueError(f"stratum {self.name!r} has negative dimension")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]


class Stratification:
    """Finite strata in a common R^m plus a declared closure order.

    ``closure_order`` holds pairs ``(S, R)`` asserting that stratum S
    lies inside the closure of stratum R.  The declared pairs must form
    a strict partial order (irreflexive, acyclic); queries go through
    the transitive closure since closure containment is transitive.
    """

    def __init__(self, strata: Sequence[Stratum],
                 closure_order: Iterable[tuple[str, str]] = ()):
        strata = list(strata)
        if not strata:
            raise ValueError("a stratification needs at least one stratum")
        ambient = strata[0].ambient_dim
        names = [s.name for s in strata]
        if len(set(names)) != len(names):
            raise ValueError("stratum names must be unique")
        for s in strata:
            if s.ambient_dim != ambient:
                raise ValueError(
                    f"stratum {s.name!r} lives in R^{s.ambient_dim}, "
                    f"expected R^{ambient}")
        self.ambient_dim = ambient
        self.strata = strata
        self._by_name = {s.name: s for s in strata}
        order = {(str(a), str(b)) for a, b in closure_order}
        for a, b in order:
            for end in (a, b):
                if end not in self._by_name:
                    raise ValueError(f"closure order names unknown stratum {end!r}")
            if a == b:
                raise ValueError(f"closure order contains reflexive pair ({a},{a})")
        self.closure_order = frozenset(order)
        self._closure_reachable = _transitive_closure(names, order)
        for name in names:
            if (name, name) in self._closure_reachable:
                raise ValueError("closure order contains a cycle")
        self._check_disjoint()

    def _check_disjoint(self):
        for i, s in enumerate(self.strata):
            for r in self.strata[i + 1:]:
                d = _cloud_min_distance(s.points, r.points)
                if d <= 0.0:
                    raise ValueError(
                        f"strata {s.name!r} and {r.name!r} share a sample point")

    def stratum(self, name: str) -> Stratum:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"no stratum named {name!r}") from None

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.strata]

    def in_closure(self, s: str, r: str) -> bool:
        """Declared (transitively) that s lies in the closure of r."""
        return (s, r) in self._closure_reachable

    def diameter(self) -> float:
        cloud = np.concatenate([s.points for s in self.strata], axis=0)
        spread = cloud.max(axis=0) - cloud.min(axis=0)
        return float(np.linalg.norm(spread))

    def iter_points(self):
        for s in self.strata:
            for i, p in enumerate(s.points):
                yield s.name, i, p

    def __repr__(self):
        return (f"Stratification(ambient={self.ambient_dim}, "
                f"strata={self.names})")


def _transitive_closure(names, pairs) -> frozenset:
    reach = {n: set() for n in names}
    for a, b in pairs:
        reach[a].add(b)
    changed = True
    while changed:
        changed = False
        for a in names:
            extra = set()
            for b in reach[a]:
                extra |= reach[b] - reach[a]
            if extra:
                reach[a] |= extra
                changed = True
    return frozenset((a, b) for a, bs in reach.items() for b in bs)


def _cloud_min_distance(a: np.ndarray, b: np.ndarray) -> float:
    diff = a[:, None, :] - b[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=2)).min())


def _distances_to_cloud(points: np.ndarray, cloud: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - cloud[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=2)).min(axis=1)


def single_linkage_components(points: np.ndarray,
                              radius: float) -> list[list[int]]:
    """Split a cloud into connected components of the radius graph
    (single linkage).  Components come out sorted by their smallest
    member index, members sorted ascending."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    if radius <= 0:
        raise ValueError("radius must be positive")
    diff = pts[:, None, :] - pts[None, :, :]
    adjacent = np.sqrt((diff ** 2).sum(axis=2)) <= radius
    seen = np.zeros(n, dtype=bool)
    components = []
    for start in range(n):
        if seen[start]:
            continue
        frontier = [start]
        seen[start] = True
        members = []
        while frontier:
            i = frontier.pop()
            members.append(i)
            for j in np.nonzero(adjacent[i])[0]:
                if not seen[j]:
                    seen[j] = True
                    frontier.append(int(j))
        components.append(sorted(members))
    return components


def estimate_cloud_dim(points: np.ndarray, tol_rank: float = TOL_RANK) -> int:
    """Affine dimension of a cloud from the singular values of the
    centered sample matrix.  Adequate for the near-affine strata used in
    fixtures; curved strata would need local estimates."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 1:
        return 0
    centered = pts - pts.mean(axis=0)
    scale = float(np.abs(pts).max())
    return span(centered, pts.shape[1], tol_rank=tol_rank,
                tol_abs=1e-9 * max(scale, 1.0)).dim


@dataclass(frozen=True)
class FrontierViolation:
    s: str
    r: str
    reason: str  # "undeclared" or "not_covered"
    witness: tuple[float, ...]
    distance: float


@dataclass(frozen=True)
class FrontierReport:
    passed: bool
    eps_touch: float
    delta_cover: float
    violations: tuple[FrontierViolation, ...]
    touching_pairs: tuple[tuple[str, str], ...]

    def __bool__(self):
        return self.passed


def check_frontier(s: Stratification, eps_touch: Optional[float] = None,
                   delta_cover: Optional[float] = None) -> FrontierReport:
    """Audit the declared closure order against the samples.

    A pair (S, R), S != R, is treated as a frontier pair once every
    sample of S lies within ``eps_touch`` of R's cloud (at sampled scale
    "S meets the closure of R" is only distinguishable from "S lies in
    the closure of R" through the declared order, so the conservative
    all-points trigger is used).  Every frontier pair must be declared
    and covered within ``delta_cover``; both thresholds default to 1e-2
    times the cloud diameter.
    """
    scale = s.diameter()
    if eps_touch is None:
        eps_touch = 1e-2 * scale if scale > 0 else 1e-2
    if delta_cover is None:
        delta_cover = 1e-2 * scale if scale > 0 else 1e-2
    if eps_touch <= 0 or delta_cover <= 0:
        raise ValueError("eps_touch and delta_cover must be positive")

    violations = []
    touching = []
    for source in s.strata:
        for target in s.strata:
            if source.name == target.name:
                continue
            dists = _distances_to_cloud(source.points, target.points)
            if float(dists.max()) > eps_touch:
                continue
            touching.append((source.name, target.name))
            worst = int(np.argmax(dists))
            witness = tuple(float(x) for x in source.points[worst])
            if not s.in_closure(source.name, target.name):
                violations.append(FrontierViolation(
                    source.name, target.name, "undeclared",
                    witness, float(dists.max())))
            elif float(dists.max()) > delta_cover:
                violations.append(FrontierViolation(
                    source.name, target.name, "not_covered",
                    witness, float(dists.max())))
    violations.sort(key=lambda v: (v.s, v.r))
    touching.sort()
    return FrontierReport(passed=not violations, eps_touch=eps_touch,
                          delta_cover=delta_cover,
                          violations=tuple(violations),
                          touching_pairs=tuple(touching))


def filtration(s: Stratification) -> list[set[str]]:
    """Skeleta by dimension: entry i is the set of strata of dim <= i."""
    top = max(st.dim for st in s.strata)
    return [{st.name for st in s.strata if st.dim <= i}
            for i in range(top + 1)]


@dataclass(frozen=True)
class LocalFinitenessReport:
    passed: bool
    radius: float
    max_count: int
    threshold: int
    counts: tuple[tuple[str, int, int], ...] = field(repr=False)
    flagged: tuple[tuple[str, int, int], ...] = ()

    def __bool__(self):
        return self.passed


def local_finiteness_report(s: Stratification, radius: float,
                            threshold: int = MAX_LOCAL_STRATA
                            ) -> LocalFinitenessReport:
    """Count, for every sample point, the strata meeting the radius ball
    around it (the point's own stratum included); flag points whose
    count exceeds ``threshold``."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    counts = []
    flagged = []
    for home in s.strata:
        near = np.zeros(len(home), dtype=int)
        for other in s.strata:
            dists = _distances_to_cloud(home.points, other.points)
            near += (dists <= radius).astype(int)
        for i, c in enumerate(near):
            counts.append((home.name, i, int(c)))
            if c > threshold:
                flagged.append((home.name, i, int(c)))
    max_count = max(c for _, _, c in counts)
    return LocalFinitenessReport(passed=not flagged, radius=radius,
                                 max_count=max_count, threshold=threshold,
                                 counts=tuple(counts), flagged=tuple(flagged))

"""Tangent distributions of polynomial vector fields and the bundles
they induce.

The distribution at a point is the span of the generating fields there;
the base is stratified by distribution rank (split into connected
components), and the resulting bundle uses the generating fields as
global sections, which is what makes its Whitney A checks succeed.
Leaves are never integrated; only the tangent data is built.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bundle import SampledStratifiedBundle
from .config import R_CC, TOL_RANK
from .grassmann import Subspace, span
from .strata import (
    Stratification,
    Stratum,
    estimate_cloud_dim,
    single_linkage_components,
)

__all__ = [
    "PolynomialVectorField",
    "VectorFieldSet",
    "distribution_at",
    "stratify_by_rank",
    "foliation_bundle",
    "fields_as_sections",
]


class PolynomialVectorField:
    """A vector field with polynomial coefficients, stored as a list of
    terms: exponent multi-index over the coordinates plus a coefficient
    vector."""

    def __init__(self, ambient_dim: int, terms):
        self.ambient_dim = int(ambient_dim)
        parsed = []
        for term in terms:
            powers = tuple(int(p) for p in term["powers"])
            vector = np.asarray(term["vector"], dtype=float)
            if len(powers) != self.ambient_dim:
                raise ValueError(
                    f"term powers {powers} need {self.ambient_dim} exponents")
            if any(p < 0 for p in powers):
                raise ValueError("negative exponents are not allowed")
            if vector.shape != (self.ambient_dim,):
                raise ValueError("term vector has the wrong length")
            parsed.append((powers, vector))
        self.terms = parsed

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(self.ambient_dim)
        for powers, vector in self.terms:
            monomial = 1.0
            for xi, p in zip(x, powers):
                if p:
                    monomial *= xi ** p
            out += monomial * vector
        return out

    def to_json(self) -> dict:
        return {"coeffs": [{"powers": list(p), "vector": v.tolist()}
                           for p, v in self.terms]}


class VectorFieldSet:
    """Generating vector fields plus the sample points they are read at."""

    def __init__(self, ambient_dim: int,
                 fields: Sequence[PolynomialVectorField], sample_points):
        self.ambient_dim = int(ambient_dim)
        fields = list(fields)
        if not fields:
            raise ValueError("need at least one vector field")
        for f in fields:
            if f.ambient_dim != self.ambient_dim:
                raise ValueError("field ambient dimension mismatch")
        self.fields = fields
        pts = np.atleast_2d(np.asarray(sample_points, dtype=float))
        if pts.shape[1] != self.ambient_dim:
            raise ValueError("sample points have the wrong ambient dimension")
        if pts.shape[0] == 0:
            raise ValueError("need at least one sample point")
        self.sample_points = pts

    def to_json(self) -> dict:
        return {"ambient": self.ambient_dim,
                "fields": [f.to_json() for f in self.fields],
                "samples": self.sample_points.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "VectorFieldSet":
        ambient = int(obj["ambient"])
        fields = [PolynomialVectorField(ambient, f["coeffs"])
                  for f in obj["fields"]]
        return cls(ambient, fields, obj["samples"])


def distribution_at(vfs: VectorFieldSet, x,
                    tol_rank: float = TOL_RANK) -> Subspace:
    """Span of the generating fields at x."""
    return span([f.evaluate(x) for f in vfs.fields], vfs.ambient_dim,
                tol_rank=tol_rank)


@dataclass(frozen=True)
class _RankPartition:
    stratification: Stratification
    point_to_key: dict = field(repr=False)
    rank_of_stratum: dict = field(repr=False)


def _rank_partition(vfs: VectorFieldSet, r_cc: float,
                    eps_adjacent: Optional[float],
                    tol_rank: float) -> _RankPartition:
    if eps_adjacent is None:
        eps_adjacent = r_cc
    pts = vfs.sample_points
    ranks = [distribution_at(vfs, p, tol_rank=tol_rank).dim for p in pts]
    strata = []
    point_to_key: dict[int, tuple[str, int]] = {}
    rank_of_stratum: dict[str, int] = {}
    for r in sorted(set(ranks)):
        member_idx = [i for i, rr in enumerate(ranks) if rr == r]
        cloud = pts[member_idx]
        for c, component in enumerate(single_linkage_components(cloud, r_cc)):
            name = f"rank{r}_c{c}"
            local = [member_idx[i] for i in component]
            strata.append(Stratum(name, estimate_cloud_dim(pts[local]),
                                  pts[local]))
            rank_of_stratum[name] = r
            for j, global_index in enumerate(local):
                point_to_key[global_index] = (name, j)

    closure = []
    for low in strata:
        for high in strata:
            if rank_of_stratum[low.name] >= rank_of_stratum[high.name]:
                continue
            diff = low.points[:, None, :] - high.points[None, :, :]
            gap = float(np.sqrt((diff ** 2).sum(axis=2)).min())
            if gap <= eps_adjacent:
                closure.append((low.name, high.name))
    stratification = Stratification(strata, closure_order=closure)
    return _RankPartition(stratification, point_to_key, rank_of_stratum)


def stratify_by_rank(vfs: VectorFieldSet, r_cc: float = R_CC,
                     eps_adjacent: Optional[float] = None,
                     tol_rank: float = TOL_RANK) -> Stratification:
    """Group the samples by distribution rank and split each rank class
    into single-linkage components.

    Closure pairs are declared from the rank ordering of clouds within
    ``eps_adjacent`` of each other (default: the clustering radius);
    audit with ``check_frontier``.
    """
    return _rank_partition(vfs, r_cc, eps_adjacent, tol_rank).stratification


def foliation_bundle(vfs: VectorFieldSet, r_cc: float = R_CC,
                     eps_adjacent: Optional[float] = None,
                     tol_rank: float = TOL_RANK) -> SampledStratifiedBundle:
    """Bundle over the rank stratification whose fiber at x is the
    distribution there; per-stratum rank constancy holds by construction
    and is re-verified."""
    part = _rank_partition(vfs, r_cc, eps_adjacent, tol_rank)
    fibers = {}
    for i, p in enumerate(vfs.sample_points):
        fibers[part.point_to_key[i]] = distribution_at(vfs, p,
                                                       tol_rank=tol_rank)
    for stratum in part.stratification.strata:
        dims = {fibers[(stratum.name, j)].dim for j in range(len(stratum))}
        if dims != {part.rank_of_stratum[stratum.name]}:
            raise ValueError(
                f"component {stratum.name!r} has non-constant distribution "
                f"rank {sorted(dims)}")
    ranks = dict(part.rank_of_stratum)
    return SampledStratifiedBundle(part.stratification, vfs.ambient_dim,
                                   fibers, ranks)


def fields_as_sections(vfs: VectorFieldSet,
                       bundle: SampledStratifiedBundle):
    """The generating fields read off at the bundle's base points, as
    sections for the section-based Whitney A oracle."""
    sections = []
    for f in vfs.fields:
        sections.append({key: f.evaluate(bundle.point(key))
                         for key in bundle.point_keys()})
    return sections

"""Sampled stratified vector bundles inside one ambient trivialization.

A bundle assigns to every base sample point (addressed as
``(stratum_name, index)``) a fiber subspace of a shared R^k, with a
declared constant rank per base stratum.  The Whitney A condition is
checked along user-declared convergence scenarios: the limit of the
fibers over the sequence, when the projection tail is Cauchy, must
contain the fiber at the limit point.  Covariant orthogonalizable
functors act fibrewise on bundles and pointwise on morphism matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .config import TAIL_LEN, TOL_CHECK, TOL_ORTHO, TOL_RANK
from .functors import LinearFunctor, apply_to_map, dim_map
from .functors import apply_to_subspace as _functor_on_subspace
from .grassmann import (
    Subspace,
    SubspaceSequence,
    apply_linear_map,
    containment_residual,
    sequence_limit,
    span,
)
from .strata import Stratification

__all__ = [
    "PointKey",
    "SampledStratifiedBundle",
    "ConvergenceScenario",
    "BundleMorphism",
    "BundleValidation",
    "WhitneyVerdict",
    "MorphismValidation",
    "validate_bundle",
    "whitney_a_check",
    "whitney_a_from_sections",
    "apply_functor_to_bundle",
    "apply_functor_to_morphism",
    "compose_morphisms",
    "trivial_bundle",
]

PointKey = tuple[str, int]

PASS = "PASS"
FAIL = "FAIL"
INCONCLUSIVE = "INCONCLUSIVE"


class SampledStratifiedBundle:
    """Fibers over every sample point of a stratified base."""

    def __init__(self, base: Stratification, fiber_ambient: int,
                 fibers: Mapping[PointKey, Subspace],
                 stratum_rank: Mapping[str, int]):
        if fiber_ambient < 0:
            raise ValueError("fiber_ambient must be nonnegative")
        self.base = base
        self.fiber_ambient = int(fiber_ambient)
        self.fibers = {(str(s), int(i)): f for (s, i), f in fibers.items()}
        self.stratum_rank = {str(k): int(v) for k, v in stratum_rank.items()}

    def point_keys(self) -> list[PointKey]:
        return [(s.name, i) for s in self.base.strata for i in range(len(s))]

    def point(self, key: PointKey) -> np.ndarray:
        name, i = key
        stratum = self.base.stratum(name)
        if not 0 <= i < len(stratum):
            raise KeyError(f"point index {i} out of range for stratum {name!r}")
        return stratum.points[i]

    def fiber(self, key: PointKey) -> Subspace:
        name, i = key
        self.point(key)  # range check
        try:
            return self.fibers[(name, i)]
        except KeyError:
            raise KeyError(f"missing fiber over point {key}") from None

    def __repr__(self):
        return (f"SampledStratifiedBundle(base={self.base.names}, "
                f"fiber_ambient={self.fiber_ambient})")


def trivial_bundle(base: Stratification, fiber_dim: int) -> SampledStratifiedBundle:
    """The product bundle base x R^fiber_dim."""
    full = Subspace.full(fiber_dim)
    fibers = {(s.name, i): full for s in base.strata for i in range(len(s))}
    ranks = {s.name: fiber_dim for s in base.strata}
    return SampledStratifiedBundle(base, fiber_dim, fibers, ranks)


@dataclass(frozen=True)
class ConvergenceScenario:
    """A declared sequence in stratum R converging to a point of stratum S."""

    target_stratum: str
    source_stratum: str
    x0_index: int
    sequence_indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sequence_indices",
                           tuple(int(i) for i in self.sequence_indices))
        if not self.sequence_indices:
            raise ValueError("scenario needs a nonempty sequence")

    def to_json(self) -> dict:
        return {"S": self.target_stratum, "R": self.source_stratum,
                "x0_index": self.x0_index,
                "sequence_indices": list(self.sequence_indices)}

    @classmethod
    def from_json(cls, obj: dict) -> "ConvergenceScenario":
        return cls(obj["S"], obj["R"], int(obj["x0_index"]),
                   tuple(obj["sequence_indices"]))


@dataclass(frozen=True)
class BundleValidation:
    passed: bool
    problems: tuple[str, ...]
    scaling_checked: bool = True

    def __bool__(self):
        return self.passed


def validate_bundle(b: SampledStratifiedBundle,
                    tol_ortho: float = TOL_ORTHO) -> BundleValidation:
    """Audit fiber shape, per-stratum rank constancy and the subspace
    invariants; raises KeyError if a base point has no fiber at all."""
    problems: list[str] = []
    for key in b.point_keys():
        fiber = b.fiber(key)  # raises on missing fiber
        name, _ = key
        if fiber.ambient_dim != b.fiber_ambient:
            problems.append(
                f"fiber over {key} has ambient {fiber.ambient_dim}, "
                f"bundle declares {b.fiber_ambient}")
            continue
        expected = b.stratum_rank.get(name)
        if expected is None:
            problems.append(f"stratum {name!r} has no declared rank")
        elif fiber.dim != expected:
            problems.append(
                f"fiber over {key} has rank {fiber.dim}, "
                f"stratum {name!r} declares {expected}")
        p = fiber.projection
        if p.size:
            defects = (np.linalg.norm(p - p.T, 2),
                       np.linalg.norm(p @ p - p, 2),
                       abs(np.trace(p) - fiber.dim))
            if max(defects) > max(tol_ortho, 1e-12):
                problems.append(f"fiber over {key} fails projection invariants")
        # Scalar stability is a tautology for linear fibers; exercised on
        # one vector anyway so the report documents the axiom.
        if fiber.dim:
            v = fiber.basis[0]
            for lam in (0.5, -2.0):
                if np.linalg.norm(fiber.project(lam * v) - lam * v) > 1e-9:
                    problems.append(f"fiber over {key} not scale stable")
                    break
    return BundleValidation(passed=not problems, problems=tuple(problems))


@dataclass(frozen=True)
class WhitneyVerdict:
    status: str
    residual: Optional[float] = None
    limit: Optional[Subspace] = field(default=None, repr=False)
    section_residuals: tuple[float, ...] = ()

    def __bool__(self):
        return self.status == PASS


def _scenario_data(b: SampledStratifiedBundle, sc: ConvergenceScenario,
                   tail_len: int):
    x0_key = (sc.target_stratum, sc.x0_index)
    x0 = b.point(x0_key)
    seq_keys = [(sc.source_stratum, i) for i in sc.sequence_indices]
    seq_points = [b.point(k) for k in seq_keys]
    dists = [float(np.linalg.norm(p - x0)) for p in seq_points]
    tail = dists[-tail_len:]
    if any(a < bb - 1e-12 for a, bb in zip(tail, tail[1:])):
        raise ValueError(
            "scenario tail does not approach the limit point monotonically")
    return x0_key, seq_keys


def whitney_a_check(b: SampledStratifiedBundle, sc: ConvergenceScenario,
                    tol: float = TOL_CHECK,
                    tail_len: int = TAIL_LEN) -> WhitneyVerdict:
    """Limit-of-fibers containment test along one declared scenario.

    PASS when the fiber sequence has a Cauchy-tail limit W containing
    the fiber over the limit point, FAIL with the containment residual
    otherwise, INCONCLUSIVE when no limit is detected.
    """
    x0_key, seq_keys = _scenario_data(b, sc, tail_len)
    seq = SubspaceSequence([b.fiber(k) for k in seq_keys])
    limit = sequence_limit(seq, tol=tol, tail_len=tail_len)
    if limit is None:
        return WhitneyVerdict(INCONCLUSIVE)
    ok, residual = containment_residual(b.fiber(x0_key), limit, tol)
    return WhitneyVerdict(PASS if ok else FAIL, residual=residual, limit=limit)


def whitney_a_from_sections(b: SampledStratifiedBundle,
                            sections: Sequence[Mapping[PointKey, np.ndarray]],
                            sc: ConvergenceScenario,
                            tol: float = TOL_CHECK,
                            tail_len: int = TAIL_LEN) -> WhitneyVerdict:
    """Section-based Whitney A oracle.

    Requires sections that take values in the fibers and span the fiber
    over the limit point.  Along the scenario tail the sections must
    stay asymptotically inside the limit subspace; the verdict is the
    containment test of ``whitney_a_check`` with the per-section tail
    residuals attached.
    """
    x0_key, seq_keys = _scenario_data(b, sc, tail_len)
    all_keys = b.point_keys()
    for j, section in enumerate(sections):
        for key in all_keys:
            if key not in section:
                raise ValueError(f"section {j} undefined at point {key}")
            v = np.asarray(section[key], dtype=float)
            fiber = b.fiber(key)
            if np.linalg.norm(v - fiber.project(v)) > tol:
                raise ValueError(
                    f"section {j} leaves the fiber at point {key}")
    x0_fiber = b.fiber(x0_key)
    spanned = span([np.asarray(sec[x0_key], dtype=float) for sec in sections],
                   b.fiber_ambient)
    if spanned.dim != x0_fiber.dim:
        raise ValueError(
            "section values at the limit point do not span its fiber")

    seq = SubspaceSequence([b.fiber(k) for k in seq_keys])
    limit = sequence_limit(seq, tol=tol, tail_len=tail_len)
    if limit is None:
        return WhitneyVerdict(INCONCLUSIVE)
    final_key = seq_keys[-1]
    section_residuals = tuple(
        float(np.linalg.norm(np.asarray(sec[final_key], dtype=float)
                             - limit.project(np.asarray(sec[final_key],
                                                        dtype=float))))
        for sec in sections)
    ok, residual = containment_residual(x0_fiber, limit, tol)
    status = PASS if ok and all(r <= tol for r in section_residuals) else FAIL
    return WhitneyVerdict(status, residual=residual, limit=limit,
                          section_residuals=section_residuals)


def apply_functor_to_bundle(f: LinearFunctor, b: SampledStratifiedBundle,
                            tol_rank: float = TOL_RANK
                            ) -> SampledStratifiedBundle:
    """Apply a functor fibrewise: same base, fibers F(A_x), ranks F(rank)."""
    validation = validate_bundle(b)
    if not validation.passed:
        raise ValueError("bundle fails validation: " + "; ".join(validation.problems))
    new_fibers = {key: _functor_on_subspace(f, fiber, tol_rank=tol_rank)
                  for key, fiber in b.fibers.items()}
    new_ranks = {name: dim_map(f, r) for name, r in b.stratum_rank.items()}
    out = SampledStratifiedBundle(b.base, dim_map(f, b.fiber_ambient),
                                  new_fibers, new_ranks)
    for key, fiber in out.fibers.items():
        if fiber.dim != new_ranks[key[0]]:
            raise RuntimeError(
                f"functor image over {key} has rank {fiber.dim}, "
                f"expected {new_ranks[key[0]]}")
    return out


class BundleMorphism:
    """A stratum-respecting map of bundles: a base-point map plus one
    fiber matrix per source point, carrying fibers into fibers."""

    def __init__(self, source: SampledStratifiedBundle,
                 target: SampledStratifiedBundle,
                 base_map: Mapping[PointKey, PointKey],
                 fiber_maps: Mapping[PointKey, np.ndarray]):
        self.source = source
        self.target = target
        self.base_map = {(str(s), int(i)): (str(t), int(j))
                         for (s, i), (t, j) in base_map.items()}
        self.fiber_maps = {}
        for key, m in fiber_maps.items():
            m = np.atleast_2d(np.asarray(m, dtype=float))
            expected = (target.fiber_ambient, source.fiber_ambient)
            if m.shape != expected:
                raise ValueError(
                    f"fiber map at {key} has shape {m.shape}, expected {expected}")
            self.fiber_maps[(str(key[0]), int(key[1]))] = m


@dataclass(frozen=True)
class MorphismValidation:
    passed: bool
    problems: tuple[str, ...]

    def __bool__(self):
        return self.passed


def validate_morphism(m: BundleMorphism,
                      tol: float = TOL_CHECK) -> MorphismValidation:
    problems: list[str] = []
    stratum_image: dict[str, str] = {}
    for key in m.source.point_keys():
        if key not in m.base_map:
            problems.append(f"base map undefined at {key}")
            continue
        if key not in m.fiber_maps:
            problems.append(f"fiber map undefined at {key}")
            continue
        image = m.base_map[key]
        try:
            m.target.point(image)
        except KeyError:
            problems.append(f"base map sends {key} to unknown point {image}")
            continue
        seen = stratum_image.setdefault(key[0], image[0])
        if seen != image[0]:
            problems.append(
                f"stratum {key[0]!r} maps into both {seen!r} and {image[0]!r}")
        pushed = apply_linear_map(m.fiber_maps[key], m.source.fiber(key))
        ok, residual = containment_residual(pushed, m.target.fiber(image), tol)
        if not ok:
            problems.append(
                f"fiber image at {key} leaves the target fiber "
                f"(residual {residual:.3e})")
    return MorphismValidation(passed=not problems, problems=tuple(problems))


def apply_functor_to_morphism(f: LinearFunctor, m: BundleMorphism,
                              tol: float = TOL_CHECK) -> BundleMorphism:
    """Apply a functor to a morphism pointwise; the result must validate
    against the functor images of the two bundles (anything else is an
    internal error, not a data error)."""
    new_source = apply_functor_to_bundle(f, m.source)
    new_target = apply_functor_to_bundle(f, m.target)
    new_maps = {key: apply_to_map(f, mat) for key, mat in m.fiber_maps.items()}
    out = BundleMorphism(new_source, new_target, m.base_map, new_maps)
    validation = validate_morphism(out, tol=tol)
    if not validation.passed:
        raise RuntimeError(
            "functor image of a valid morphism failed validation: "
            + "; ".join(validation.problems))
    return out


def compose_morphisms(outer: BundleMorphism,
                      inner: BundleMorphism) -> BundleMorphism:
    if (inner.target.base is not outer.source.base
            or inner.target.fiber_ambient != outer.source.fiber_ambient):
        raise ValueError("morphisms are not composable")
    base = {key: outer.base_map[inner.base_map[key]]
            for key in inner.base_map}
    fibers = {key: outer.fiber_maps[inner.base_map[key]] @ inner.fiber_maps[key]
              for key in inner.fiber_maps}
    return BundleMorphism(inner.source, outer.target, base, fibers)

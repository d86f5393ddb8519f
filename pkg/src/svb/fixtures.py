"""Canonical desk-scale fixtures used by the test-suite, the CLI docs
and the committed JSON corpus (scripts/make_fixtures.py).

Everything here is exact: points sit on grids or dyadic sequences so
that declared strata, fibers and group orbits match to machine
precision.
"""

from __future__ import annotations

import numpy as np

from .bundle import ConvergenceScenario, SampledStratifiedBundle, trivial_bundle
from .equivariant import FiniteGroupAction
from .foliation import PolynomialVectorField, VectorFieldSet
from .grassmann import Subspace, span
from .monoid import MonoidActionSample
from .strata import Stratification, Stratum

__all__ = [
    "line_stratification",
    "local_line_stratification",
    "cone_stratification",
    "cantor_stratification",
    "dyadic_line_stratification",
    "cone_bundle",
    "cone_scenario",
    "cone_sections",
    "step_rank_bundle",
    "trivial_bundle",
    "bundle_scalar_action",
    "sign_flip_group",
    "axis_reflection_group",
    "dihedral_square_group",
    "rotation_group",
    "sign_flip_tangent_bundle",
    "ring_tangent_bundle",
    "line_scaling_fields",
    "constant_field_plane",
    "axis_scaling_fields_plane",
    "line_foliation_scenario",
]


def line_stratification(spacing: float = 0.05) -> Stratification:
    """The interval [-1, 1] split into {0}, the positive and the negative
    open half, sampled on a grid reaching ``spacing`` from the origin."""
    pos = np.arange(spacing, 1.0 + spacing / 2, spacing).reshape(-1, 1)
    return Stratification(
        [
            Stratum("S0", 0, np.array([[0.0]])),
            Stratum("S+", 1, pos),
            Stratum("S-", 1, -pos),
        ],
        closure_order=[("S0", "S+"), ("S0", "S-")],
    )


def local_line_stratification() -> Stratification:
    """Line fixture with asymmetric sampling: the negative half stays
    0.15 away from the origin, so a 0.1 ball around any sample meets at
    most two strata."""
    pos = np.arange(0.05, 1.0001, 0.05).reshape(-1, 1)
    neg = -np.arange(0.15, 1.0001, 0.05).reshape(-1, 1)
    return Stratification(
        [
            Stratum("S0", 0, np.array([[0.0]])),
            Stratum("S+", 1, pos),
            Stratum("S-", 1, neg),
        ],
        closure_order=[("S0", "S+"), ("S0", "S-")],
    )


def dyadic_line_stratification(depth: int = 40) -> Stratification:
    """Line fixture whose halves are sampled on the dyadic sequence
    2^0, 2^-1, ..., 2^-depth; the deep tail makes limit fibers sharp."""
    pts = (2.0 ** -np.arange(0, depth + 1)).reshape(-1, 1)
    return Stratification(
        [
            Stratum("S0", 0, np.array([[0.0]])),
            Stratum("S+", 1, pts),
            Stratum("S-", 1, -pts),
        ],
        closure_order=[("S0", "S+"), ("S0", "S-")],
    )


def cone_stratification(spacing: float = 0.05) -> Stratification:
    """A vertex and the two open branches of y = |x| in the plane."""
    xs = np.arange(spacing, 1.0 + spacing / 2, spacing)
    plus = np.column_stack([xs, xs])
    minus = np.column_stack([-xs, xs])
    return Stratification(
        [
            Stratum("vertex", 0, np.array([[0.0, 0.0]])),
            Stratum("arc+", 1, plus),
            Stratum("arc-", 1, minus),
        ],
        closure_order=[("vertex", "arc+"), ("vertex", "arc-")],
    )


def _cantor_intervals(level: int) -> list[tuple[float, float]]:
    intervals = [(0.0, 1.0)]
    for _ in range(level):
        nxt = []
        for a, b in intervals:
            third = (b - a) / 3.0
            nxt.append((a, a + third))
            nxt.append((b - third, b))
        intervals = nxt
    return intervals


def cantor_stratification(level: int) -> Stratification:
    """Finite approximation of the middle-thirds construction on [0, 1]:
    the 2^(level+1) interval endpoints as singleton strata plus every gap
    removed up to ``level``, each sampled at three interior points."""
    if level < 1:
        raise ValueError("level must be at least 1")
    strata: list[Stratum] = []
    endpoints = sorted({e for a, b in _cantor_intervals(level) for e in (a, b)})
    for i, e in enumerate(endpoints):
        strata.append(Stratum(f"pt{i:03d}", 0, np.array([[e]])))
    point_index = {e: f"pt{i:03d}" for i, e in enumerate(endpoints)}

    closure = []
    intervals = [(0.0, 1.0)]
    gap_id = 0
    for stage in range(1, level + 1):
        nxt = []
        for a, b in intervals:
            third = (b - a) / 3.0
            left, right = a + third, b - third
            samples = left + (right - left) * np.array([0.25, 0.5, 0.75])
            name = f"gap{stage}_{gap_id:02d}"
            gap_id += 1
            strata.append(Stratum(name, 1, samples.reshape(-1, 1)))
            for endpoint in (left, right):
                closure.append((point_index[endpoint], name))
            nxt.append((a, left))
            nxt.append((right, b))
        intervals = nxt
    return Stratification(strata, closure_order=closure)


# ---------------------------------------------------------------------------
# Bundle fixtures.

def cone_bundle(variant: str = "pass", depth: int = 40) -> SampledStratifiedBundle:
    """Line field A_x = span{(1, x)} over the dyadic line base.

    The fiber over the origin depends on the variant: the limit plane
    span{(1,0)} ("pass"), its orthogonal complement span{(0,1)} ("fail"),
    or the zero fiber ("rank0").
    """
    base = dyadic_line_stratification(depth)
    fibers = {}
    for name in ("S+", "S-"):
        stratum = base.stratum(name)
        for i, (x,) in enumerate(stratum.points):
            fibers[(name, i)] = span([(1.0, float(x))], 2)
    if variant == "pass":
        origin = span([(1.0, 0.0)], 2)
        rank0 = 1
    elif variant == "fail":
        origin = span([(0.0, 1.0)], 2)
        rank0 = 1
    elif variant == "rank0":
        origin = Subspace.zero(2)
        rank0 = 0
    else:
        raise ValueError(f"unknown cone_bundle variant {variant!r}")
    fibers[("S0", 0)] = origin
    ranks = {"S0": rank0, "S+": 1, "S-": 1}
    return SampledStratifiedBundle(base, 2, fibers, ranks)


def cone_scenario(depth: int = 40) -> ConvergenceScenario:
    """The dyadic sequence 1, 1/2, ..., 2^-depth in S+ converging to 0."""
    return ConvergenceScenario("S0", "S+", 0, tuple(range(depth + 1)))


def cone_sections(b: SampledStratifiedBundle):
    """One spanning section of a cone bundle: x -> (1, x) away from the
    origin and the origin fiber's own basis vector at the origin.  For
    the rank-0 variant this degenerates to the zero section."""
    if b.stratum_rank["S0"] == 0:
        return [{key: np.zeros(2) for key in b.point_keys()}]
    section = {}
    for key in b.point_keys():
        if key[0] == "S0":
            section[key] = b.fiber(key).basis[0].copy()
        else:
            (x,) = b.point(key)
            section[key] = np.array([1.0, float(x)])
    return [section]


def step_rank_bundle() -> SampledStratifiedBundle:
    """Ranks (2, 1, 2) over the coarse line base inside R^3: the halves
    carry tilted planes, the origin the single line they share."""
    base = line_stratification()
    fibers = {}
    for name in ("S+", "S-"):
        stratum = base.stratum(name)
        for i, (x,) in enumerate(stratum.points):
            fibers[(name, i)] = span([(1.0, 0.0, 0.0), (0.0, 1.0, float(x))], 3)
    fibers[("S0", 0)] = span([(1.0, 0.0, 0.0)], 3)
    ranks = {"S0": 1, "S+": 2, "S-": 2}
    return SampledStratifiedBundle(base, 3, fibers, ranks)


def bundle_scalar_action(b: SampledStratifiedBundle):
    """Scalar multiplication of a bundle as a polynomial monoid action on
    total-space samples (x, v) in R^(m+k).

    Returns (action, base_points, expected_fibers): the zero-section
    points and, for each, the embedded fiber {0} x A_x that fiber
    reconstruction should recover.
    """
    m = b.base.ambient_dim
    k = b.fiber_ambient
    total = m + k
    coeffs = []
    for c in range(total):
        powers = [0] * (total + 1)
        powers[1 + c] = 1
        if c >= m:
            powers[0] = 1  # fiber coordinates scale with t
        coeffs.append([{"powers": powers, "coef": 1.0}])

    samples = []
    base_points = []
    expected = []
    for key in b.point_keys():
        x = b.point(key)
        fiber = b.fiber(key)
        zero_section = np.concatenate([x, np.zeros(k)])
        samples.append(zero_section)
        base_points.append(zero_section)
        for v in fiber.basis:
            samples.append(np.concatenate([x, v]))
        if fiber.dim:
            embedded = np.hstack([np.zeros((fiber.dim, m)), fiber.basis])
            expected.append(span(embedded, total))
        else:
            expected.append(Subspace.zero(total))
    action = MonoidActionSample.polynomial(coeffs, total, np.array(samples))
    return action, np.array(base_points), expected


# ---------------------------------------------------------------------------
# Finite orthogonal groups.

def sign_flip_group() -> FiniteGroupAction:
    """x -> -x on the line, with the tangent action v -> -v."""
    return FiniteGroupAction(1, [[[1.0]], [[-1.0]]],
                             fiber_elements=[[[1.0]], [[-1.0]]])


def axis_reflection_group() -> FiniteGroupAction:
    """(x, y) -> (x, -y) of order two."""
    return FiniteGroupAction(2, [np.eye(2), np.diag([1.0, -1.0])])


def dihedral_square_group(with_tangent_action: bool = False
                          ) -> FiniteGroupAction:
    """Symmetries of the square: four rotations and four reflections."""
    def rot(k):
        c, s = np.cos(k * np.pi / 2), np.sin(k * np.pi / 2)
        return np.round(np.array([[c, -s], [s, c]]))

    reflections = [np.diag([1.0, -1.0]), np.diag([-1.0, 1.0]),
                   np.array([[0.0, 1.0], [1.0, 0.0]]),
                   np.array([[0.0, -1.0], [-1.0, 0.0]])]
    mats = [rot(k) for k in range(4)] + reflections
    fiber = [m.copy() for m in mats] if with_tangent_action else None
    return FiniteGroupAction(2, mats, fiber_elements=fiber)


def rotation_group(n: int, with_tangent_action: bool = True
                   ) -> FiniteGroupAction:
    """The n evenly spaced plane rotations, optionally acting on tangent
    vectors by the same matrices."""
    mats = []
    for k in range(n):
        theta = 2.0 * np.pi * k / n
        mats.append(np.array([[np.cos(theta), -np.sin(theta)],
                              [np.sin(theta), np.cos(theta)]]))
    fiber = [m.copy() for m in mats] if with_tangent_action else None
    return FiniteGroupAction(2, mats, fiber_elements=fiber, tol=1e-9)


def sign_flip_tangent_bundle() -> SampledStratifiedBundle:
    """Tangent bundle of the line fixture, acted on by x -> -x."""
    return trivial_bundle(line_stratification(), 1)


def ring_tangent_bundle(n: int = 8,
                        radii=(0.5, 1.0)) -> SampledStratifiedBundle:
    """Tangent bundle of the plane sampled on the origin plus n-point
    rings, saturated under the n rotations."""
    ring_points = []
    for r in radii:
        for k in range(n):
            theta = 2.0 * np.pi * k / n
            ring_points.append([r * np.cos(theta), r * np.sin(theta)])
    base = Stratification([
        Stratum("origin", 0, np.array([[0.0, 0.0]])),
        Stratum("bulk", 2, np.array(ring_points)),
    ], closure_order=[("origin", "bulk")])
    return trivial_bundle(base, 2)


# ---------------------------------------------------------------------------
# Polynomial vector fields.

def line_scaling_fields(power: int = 1,
                        n_samples: int = 201) -> VectorFieldSet:
    """The field x^power d/dx on an odd uniform grid over [-1, 1]; any
    power induces the same sign stratification of the line."""
    field = PolynomialVectorField(1, [{"powers": [power], "vector": [1.0]}])
    samples = np.linspace(-1.0, 1.0, n_samples).reshape(-1, 1)
    return VectorFieldSet(1, [field], samples)


def constant_field_plane(step: float = 0.25) -> VectorFieldSet:
    """The constant field d/dx on a plane grid: one rank-1 stratum."""
    field = PolynomialVectorField(2, [{"powers": [0, 0],
                                       "vector": [1.0, 0.0]}])
    axis = np.arange(-1.0, 1.0 + step / 2, step)
    samples = np.array([[x, y] for x in axis for y in axis])
    return VectorFieldSet(2, [field], samples)


def axis_scaling_fields_plane(step: float = 0.25) -> VectorFieldSet:
    """{x d/dx, y d/dy} on a plane grid: rank 0 at the origin, rank 1 on
    the punctured axes, rank 2 elsewhere."""
    fx = PolynomialVectorField(2, [{"powers": [1, 0], "vector": [1.0, 0.0]}])
    fy = PolynomialVectorField(2, [{"powers": [0, 1], "vector": [0.0, 1.0]}])
    axis = np.arange(-1.0, 1.0 + step / 2, step)
    samples = np.array([[x, y] for x in axis for y in axis])
    return VectorFieldSet(2, [fx, fy], samples)


def line_foliation_scenario(bundle: SampledStratifiedBundle
                            ) -> ConvergenceScenario:
    """Dyadic-style approach to the origin inside the positive rank-1
    component of the line foliation bundle."""
    target = next(s.name for s in bundle.base.strata
                  if bundle.stratum_rank[s.name] == 0)
    source = None
    for s in bundle.base.strata:
        if bundle.stratum_rank[s.name] == 1 and s.points.min() > 0:
            source = s
            break
    if source is None:
        raise ValueError("bundle has no positive rank-1 component")
    order = np.argsort(source.points[:, 0])
    picks = []
    step = len(order)
    while step > 1:
        step //= 2
        picks.append(int(order[step - 1]))
    x0_index = int(np.argmin(
        np.linalg.norm(bundle.base.stratum(target).points, axis=1)))
    return ConvergenceScenario(target, source.name, x0_index, tuple(picks))

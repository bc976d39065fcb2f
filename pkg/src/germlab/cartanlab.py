"""The non-Hausdorff worked example as an executable fixture.

The reduced algebra of the three-element-semigroup bundle over [-1, 1] is
modeled as the continuous functions on the doubled-ray space

    X' = ([-1, 1] x {0}) u ((0, 1] x {1}),

sampled on a rational grid.  The value at the doubled point (0, 1) is the
limit of upper-level values as x -> 0+ and is therefore not an independent
sample: keeping it would make every admissible conditional expectation
(p(0) = 1 is forced) non-faithful at its indicator, with no way left to
distinguish a good weight from p = 1.  The non-Hausdorff locus x = 0 itself
stays an exact lower-level sample.

Weight functions p enter the expectation through the cancellation-free form

    E(g)(x) = g(x, 1) + p(x) (g(x, 0) - g(x, 1))   for x >= 0,

which makes idempotence bit-exact in floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as F

import numpy as np

from germlab.fellbundle import FellBundle, FiberElement
from germlab.fixtures import worked_example_bundle
from germlab.germgpd import build_germ_groupoid


class ShapeMismatch(ValueError):
    pass


@dataclass
class GridModel:
    """Samples of X': lower level over [-1, 1], upper level over (0, 1]."""

    n: int = 101

    lower_x: tuple = field(init=False)
    upper_x: tuple = field(init=False)

    pos_index: tuple = field(init=False)  # lower indices with x > 0, upper-aligned

    def __post_init__(self):
        if self.n < 3 or self.n % 2 == 0:
            raise ValueError("grid resolution must be odd and >= 3 so that 0 is a sample")
        step = F(2, self.n - 1)
        self.lower_x = tuple(F(-1) + step * k for k in range(self.n))
        self.upper_x = tuple(x for x in self.lower_x if x > 0)
        self.pos_index = tuple(i for i, x in enumerate(self.lower_x) if x > 0)

    def zero(self) -> "GridFunction":
        return GridFunction(
            np.zeros(len(self.lower_x), complex), np.zeros(len(self.upper_x), complex)
        )

    def basis(self):
        out = []
        for i in range(len(self.lower_x)):
            g = self.zero()
            g.lower[i] = 1.0
            out.append(g)
        for i in range(len(self.upper_x)):
            g = self.zero()
            g.upper[i] = 1.0
            out.append(g)
        return out

    def random_function(self, rng) -> "GridFunction":
        low = np.array([complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
                        for _ in self.lower_x])
        up = np.array([complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
                       for _ in self.upper_x])
        return GridFunction(low, up)


@dataclass
class GridFunction:
    lower: np.ndarray
    upper: np.ndarray

    def conj(self) -> "GridFunction":
        return GridFunction(self.lower.conj(), self.upper.conj())

    def __mul__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.lower * other.lower, self.upper * other.upper)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.lower + other.lower, self.upper + other.upper)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.lower - other.lower, self.upper - other.upper)

    def sup_norm(self) -> float:
        vals = [np.max(np.abs(self.lower)) if self.lower.size else 0.0,
                np.max(np.abs(self.upper)) if self.upper.size else 0.0]
        return float(max(vals))

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.lower) <= tol) and np.all(np.abs(self.upper) <= tol))

    def y_independent(self, gm: GridModel, tol: float = 0.0) -> bool:
        pos = [i for i, x in enumerate(gm.lower_x) if x > 0]
        return bool(np.all(np.abs(self.lower[pos] - self.upper) <= tol))


@dataclass
class WeightFunction:
    """Samples of p on {0} u upper grid, with p(0) = 1 pinned."""

    gm: GridModel
    samples: np.ndarray  # real values over upper_x

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.shape != (len(self.gm.upper_x),):
            raise ShapeMismatch("weight samples must match the upper grid")
        if np.any(self.samples < 0) or np.any(self.samples > 1):
            raise ValueError("weight values must lie in [0, 1]")

    @staticmethod
    def from_callable(gm: GridModel, p) -> "WeightFunction":
        vals = [float(p(x)) for x in gm.upper_x]
        w = WeightFunction(gm, np.array(vals))
        if abs(float(p(F(0))) - 1.0) > 0:
            raise ValueError("p(0) must equal 1")
        return w

    def at(self, x) -> float:
        if x == 0:
            return 1.0
        return float(self.samples[self.gm.upper_x.index(x)])

    def interior_open(self) -> bool:
        return bool(np.all((self.samples > 0) & (self.samples < 1)))


# ---------------------------------------------------------------------------
# The example bundle
# ---------------------------------------------------------------------------


def build_worked_example(grid_resolution: int = 101):
    """The exact semigroup table, interval action, bundle and germ groupoid."""
    bundle = worked_example_bundle(grid_resolution=grid_resolution)
    groupoid = build_germ_groupoid(bundle.action)
    return bundle.semigroup, bundle.action, bundle, groupoid


def embed_fibers(gm: GridModel, a: FiberElement) -> GridFunction:
    """The identification of a fiber element with a function on X'."""
    out = gm.zero()
    if a.s == "e":
        for i, x in enumerate(gm.lower_x):
            out.lower[i] = a.value(x) if x < 0 else 0.0
    elif a.s == "1":
        for i, x in enumerate(gm.lower_x):
            out.lower[i] = a.value(x)
        for i, x in enumerate(gm.upper_x):
            out.upper[i] = a.value(x)
    elif a.s == "s":
        for i, x in enumerate(gm.lower_x):
            out.lower[i] = a.value(x)
        for i, x in enumerate(gm.upper_x):
            out.upper[i] = -a.value(x)
    else:
        raise ShapeMismatch(f"unknown fiber {a.s!r}")
    return out


def expectation_E(gm: GridModel, g: GridFunction, p: WeightFunction) -> GridFunction:
    """E(g)(x, .) = g(x,0) for x < 0, else the p-weighted combination of the
    two levels, written so that equal levels pass through bit-exactly."""
    if g.lower.shape != (len(gm.lower_x),) or g.upper.shape != (len(gm.upper_x),):
        raise ShapeMismatch("grid function does not match the model")
    out = GridFunction(g.lower.copy(), g.upper.copy())
    pos = list(gm.pos_index)
    v = g.upper + p.samples * (g.lower[pos] - g.upper)
    out.lower[pos] = v
    out.upper[:] = v
    return out


@dataclass
class ExpectationReport:
    idempotent: bool
    contractive: bool
    positive: bool
    bimodular: bool
    faithful: bool
    faithfulness_witness: GridFunction | None
    image_y_independent: bool
    fixes_embedded_units: bool

    @property
    def ok(self):
        return all([self.idempotent, self.contractive, self.positive,
                    self.bimodular, self.faithful, self.image_y_independent,
                    self.fixes_embedded_units])


def verify_conditional_expectation(gm: GridModel, p: WeightFunction,
                                   n_random: int = 100, seed: int = 0,
                                   bundle: FellBundle | None = None) -> ExpectationReport:
    import random

    rng = random.Random(seed)
    basis = gm.basis()
    randoms = [gm.random_function(rng) for _ in range(n_random)]

    idempotent = True
    contractive = True
    positive = True
    image_y_independent = True
    for g in basis + randoms:
        e = expectation_E(gm, g, p)
        ee = expectation_E(gm, e, p)
        if not (np.array_equal(ee.lower, e.lower) and np.array_equal(ee.upper, e.upper)):
            idempotent = False
        if e.sup_norm() > g.sup_norm() + 1e-15:
            contractive = False
        pos = expectation_E(gm, g.conj() * g, p)
        if np.any(pos.lower.real < -1e-15) or np.any(np.abs(pos.lower.imag) > 1e-15):
            positive = False
        if not e.y_independent(gm):
            image_y_independent = False

    bimodular = True
    for _ in range(24):
        g = gm.random_function(rng)
        f = _y_independent(gm, rng)
        h = _y_independent(gm, rng)
        lhs = expectation_E(gm, f * g * h, p)
        rhs = f * expectation_E(gm, g, p) * h
        if (np.max(np.abs(lhs.lower - rhs.lower)) > 1e-12
                or np.max(np.abs(lhs.upper - rhs.upper)) > 1e-12):
            bimodular = False

    faithful = True
    witness = None
    for g in basis + randoms:
        if g.is_zero():
            continue
        pos = expectation_E(gm, g.conj() * g, p)
        if pos.is_zero(tol=0.0):
            faithful = False
            witness = g
            break

    fixes_units = True
    if bundle is not None:
        for a in bundle.fiber_basis("1"):
            g = embed_fibers(gm, a)
            e = expectation_E(gm, g, p)
            if np.max(np.abs(e.lower - g.lower)) > 1e-15 or np.max(np.abs(e.upper - g.upper)) > 1e-15:
                fixes_units = False

    return ExpectationReport(
        idempotent=idempotent,
        contractive=contractive,
        positive=positive,
        bimodular=bimodular,
        faithful=faithful,
        faithfulness_witness=witness,
        image_y_independent=image_y_independent,
        fixes_embedded_units=fixes_units,
    )


def norm_candidates(gm: GridModel, bundle: FellBundle, terms: dict) -> dict:
    """The two grid-model norm candidates for a sum of fiber terms: the
    reduced-model sup norm of the embedded image in C(X'), and the
    C_c-decomposition upper estimate (sum of per-fiber sup norms), which
    dominates every representation.  Their equality on this non-Hausdorff
    example is not asserted; both are reported.
    """
    image = gm.zero()
    bound = 0.0
    for s, a in terms.items():
        g = embed_fibers(gm, a)
        image = image + g
        bound += g.sup_norm()
    return {"grid_sup": image.sup_norm(), "decomposition_bound": bound}


def _y_independent(gm: GridModel, rng) -> GridFunction:
    g = gm.zero()
    upper_index = {x: i for i, x in enumerate(gm.upper_x)}
    for i, x in enumerate(gm.lower_x):
        v = complex(rng.uniform(-1, 1), 0.0)
        g.lower[i] = v
        if x > 0:
            g.upper[upper_index[x]] = v
    return g

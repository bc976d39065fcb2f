"""Convolution *-algebras of sections and the regular representations.

Everything here is finite-dimensional and refers to the discrete model: the
section algebra C_c(L) in reference coordinates, the bundle algebra C_c(A)
spanned by a*delta_s, the map Psi between them, the per-unit regular
representations pi_x on l2(G_x) and the GNS data of the evaluation states.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from germlab.fellbundle import FellBundle, FiberElement
from germlab.germgpd import Germ, is_hausdorff
from germlab.linebundle import (
    LineBundle,
    convolve_coeffs,
    gelfand,
    star_coeffs,
)


class NotHausdorff(ValueError):
    def __init__(self, witness):
        super().__init__(f"groupoid is not Hausdorff: witness {witness}")
        self.witness = witness


# ---------------------------------------------------------------------------
# Sections of L
# ---------------------------------------------------------------------------


@dataclass
class Section:
    """A finitely supported coefficient function germ -> C, with an optional
    decomposition certificate (list of bissections covering the support).

    In the discrete model every subset is an open Hausdorff bissection-union,
    so certificates default to singletons and are metadata only.
    """

    coeffs: dict
    certificates: tuple = ()

    def __post_init__(self):
        self.coeffs = {g: v for g, v in self.coeffs.items() if v != 0}
        if not self.certificates:
            self.certificates = tuple(frozenset([g]) for g in self.coeffs)

    def support(self) -> frozenset:
        return frozenset(self.coeffs)

    def covered(self) -> bool:
        union = set().union(*self.certificates) if self.certificates else set()
        return self.support() <= union


def delta_section(l: LineBundle, germ: Germ, lam: complex = 1.0) -> Section:
    return Section({germ: complex(lam)})


def unit_section(l: LineBundle) -> Section:
    """The sum of unit-germ deltas (the algebra unit when X is finite)."""
    return Section({g: 1.0 + 0j for g in l.groupoid.units})


def convolve(xi: Section, eta: Section, l: LineBundle) -> Section:
    coeffs = convolve_coeffs(l, xi.coeffs, eta.coeffs)
    g = l.groupoid
    certs = []
    for u in xi.certificates:
        for v in eta.certificates:
            prod = frozenset(
                g.compose(g1, g2) for g1 in u for g2 in v if g.composable(g1, g2)
            )
            if prod:
                certs.append(prod)
    return Section(coeffs, tuple(certs))


def star_section(xi: Section, l: LineBundle) -> Section:
    g = l.groupoid
    return Section(
        star_coeffs(l, xi.coeffs),
        tuple(frozenset(g.inv(x) for x in u) for u in xi.certificates),
    )


def add_sections(xi: Section, eta: Section) -> Section:
    out = dict(xi.coeffs)
    for k, v in eta.coeffs.items():
        out[k] = out.get(k, 0j) + v
    return Section(out, xi.certificates + eta.certificates)


def scale_section(lam: complex, xi: Section) -> Section:
    return Section({k: lam * v for k, v in xi.coeffs.items()}, xi.certificates)


# ---------------------------------------------------------------------------
# The bundle algebra C_c(A)
# ---------------------------------------------------------------------------


@dataclass
class BundleAlgebraElement:
    """A finitely supported sum of a_s delta_s with a_s in the fiber over s."""

    terms: dict  # s -> FiberElement

    def __post_init__(self):
        self.terms = dict(self.terms)


def alg_add(b: FellBundle, x: BundleAlgebraElement, y: BundleAlgebraElement):
    out = dict(x.terms)
    for s, a in y.terms.items():
        out[s] = b.add(out[s], a) if s in out else a
    return BundleAlgebraElement(out)


def alg_scale(b: FellBundle, lam: complex, x: BundleAlgebraElement):
    return BundleAlgebraElement({s: b.scale(lam, a) for s, a in x.terms.items()})


def alg_mul(b: FellBundle, x: BundleAlgebraElement, y: BundleAlgebraElement):
    out: dict = {}
    for s, a in x.terms.items():
        for t, c in y.terms.items():
            st = b.semigroup.mul(s, t)
            prod = b.mul(a, c)
            out[st] = b.add(out[st], prod) if st in out else prod
    return BundleAlgebraElement(out)


def alg_star(b: FellBundle, x: BundleAlgebraElement):
    return BundleAlgebraElement({b.semigroup.star(s): b.star(a) for s, a in x.terms.items()})


def algebra_basis(b: FellBundle) -> list[tuple[str, FiberElement]]:
    """The coordinate basis of C_c(A): one entry (s, a) per fiber basis vector."""
    out = []
    for s in b.semigroup.elements:
        for a in b.fiber_basis(s):
            out.append((s, a))
    return out


def algebra_coords(b: FellBundle, x: BundleAlgebraElement) -> np.ndarray:
    """Coordinates over (element, point) slots."""
    pts = list(b.space.points)
    vec = np.zeros(len(b.semigroup.elements) * len(pts), dtype=complex)
    for i, s in enumerate(b.semigroup.elements):
        if s in x.terms:
            vec[i * len(pts) : (i + 1) * len(pts)] = b.coords(x.terms[s])
    return vec


# ---------------------------------------------------------------------------
# Psi and its kernel
# ---------------------------------------------------------------------------


def psi_map(el: BundleAlgebraElement, b: FellBundle, l: LineBundle) -> Section:
    """Psi(sum a_s delta_s) = sum of the Gelfand sections."""
    coeffs: dict = {}
    for s, a in el.terms.items():
        for germ, v in gelfand(b, l, a).items():
            coeffs[germ] = coeffs.get(germ, 0j) + v
    return Section(coeffs)


@dataclass
class KernelReport:
    ok: bool
    dim_kernel: int
    dim_ideal: int
    details: list = field(default_factory=list)


def kernel_equals_ideal(b: FellBundle, l: LineBundle, tol: float = 1e-10) -> KernelReport:
    """ker(Psi) versus span{a delta_s - j_{t,s}(a) delta_t : s < t}, by rank
    and double containment."""
    S = b.semigroup
    basis = algebra_basis(b)
    germs = list(l.groupoid.germs)
    gindex = {g: i for i, g in enumerate(germs)}

    # Psi matrix: rows germs, columns C_c(A) basis
    cols = []
    for s, a in basis:
        col = np.zeros(len(germs), dtype=complex)
        for germ, v in gelfand(b, l, a).items():
            col[gindex[germ]] = v
        cols.append(col)
    psi = np.array(cols).T if cols else np.zeros((len(germs), 0), dtype=complex)

    if psi.size:
        u, sv, vh = np.linalg.svd(psi)
        rank = int(np.sum(sv > tol))
        kernel = vh[rank:].conj()  # rows span ker(Psi) in basis coordinates
    else:
        kernel = np.zeros((0, len(basis)), dtype=complex)

    # ideal generators in the same coordinates
    bindex = {}
    for i, (s, a) in enumerate(basis):
        bindex.setdefault(s, []).append((i, a))
    gens = []
    for s in S.elements:
        for t in S.elements:
            if s == t or not S.leq(s, t):
                continue
            for i, a in bindex.get(s, []):
                vec = np.zeros(len(basis), dtype=complex)
                vec[i] = 1.0
                ja = b.incl(t, a)
                # expand j(a) in the fiber basis over t
                coords_t = [(j, b.coords(c)) for j, c in bindex.get(t, [])]
                target = b.coords(ja)
                if coords_t:
                    mat = np.array([c for _, c in coords_t]).T
                    sol, *_ = np.linalg.lstsq(mat, target, rcond=None)
                    if np.linalg.norm(mat @ sol - target) > 1e-9:
                        return KernelReport(False, -1, -1, [("inclusion_outside_fiber", (s, t))])
                    for (j, _), coef in zip(coords_t, sol):
                        vec[j] -= coef
                gens.append(vec)
    ideal = np.array(gens) if gens else np.zeros((0, len(basis)), dtype=complex)

    def rk(m):
        return int(np.linalg.matrix_rank(m, tol)) if m.size else 0

    dim_ker, dim_ideal = rk(kernel), rk(ideal)
    both = np.vstack([m for m in (kernel, ideal) if m.size]) if (kernel.size or ideal.size) else np.zeros((0, len(basis)))
    ok = dim_ker == dim_ideal == rk(both)
    details = [] if ok else [("rank_mismatch", (dim_ker, dim_ideal, rk(both)))]
    return KernelReport(ok, dim_ker, dim_ideal, details)


# ---------------------------------------------------------------------------
# Regular representations
# ---------------------------------------------------------------------------


@dataclass
class Representation:
    """pi_x on l2(G_x), in the orthonormal basis of normalized references."""

    line: LineBundle
    unit_point: object
    basis: list  # germs with source x, deterministic order
    index: dict

    def matrix(self, xi: Section) -> np.ndarray:
        l = self.line
        g = l.groupoid
        n = len(self.basis)
        m = np.zeros((n, n), dtype=complex)
        for g2 in self.basis:
            j = self.index[g2]
            for g1, v in xi.coeffs.items():
                if not g.composable(g1, g2):
                    continue
                tgt = g.compose(g1, g2)
                # f(g1).v_{g2} = f_{g1} mulc n(tgt)/n(g2) . v_{tgt}
                amp = v * l.mulc[(g1, g2)] * l.ref_norms[tgt] / l.ref_norms[g2]
                m[self.index[tgt], j] += amp
        return m


def regular_rep(l: LineBundle, x) -> Representation:
    g = l.groupoid
    order = {s: i for i, s in enumerate(l.bundle.semigroup.elements)}
    basis = sorted(g.germs_with_source(x), key=lambda germ: order[germ.s])
    return Representation(l, x, basis, {germ: i for i, germ in enumerate(basis)})


def state_phi_x(l: LineBundle, x, xi: Section) -> complex:
    """<pi_x(xi) delta_x, delta_x>, asserted equal to the unit-germ coefficient."""
    rep = regular_rep(l, x)
    ux = l.groupoid.unit_of(x)
    i = rep.index[ux]
    val = rep.matrix(xi)[i, i]
    direct = xi.coeffs.get(ux, 0j)
    if abs(val - direct) > 1e-12 * max(1.0, abs(val)):
        raise AssertionError("state evaluation paths disagree")
    return val


def reduced_norm(l: LineBundle, xi: Section) -> float:
    """sup over units of the operator norm of pi_x(xi)."""
    best = 0.0
    for u in l.groupoid.units:
        rep = regular_rep(l, l.groupoid.source(u))
        m = rep.matrix(xi)
        if m.size:
            best = max(best, float(np.linalg.norm(m, 2)))
    return best


def pi_norm_bound(l: LineBundle, xi: Section) -> float:
    """The decomposition estimate: any *-representation is bounded by the sum
    over certificate pieces of the piece sup-norms."""
    total = 0.0
    for piece in xi.certificates:
        total += max(
            (abs(xi.coeffs[g]) * l.ref_norms[g] for g in piece if g in xi.coeffs),
            default=0.0,
        )
    return total


def state_phitilde(b: FellBundle, l: LineBundle, x0, el: BundleAlgebraElement) -> complex:
    """phitilde(sum a_s delta_s) = sum of Gelfand sections evaluated at the
    unit germ over x0 (zero for terms whose germ at x0 is not that unit)."""
    g = l.groupoid
    ux = g.unit_of(x0)
    total = 0j
    for s, a in el.terms.items():
        if x0 not in b.fiber_domain(s):
            continue
        germ = g.germ(s, x0)
        if germ != ux:
            continue
        total += l.coefficient(a, germ)
    return total


# ---------------------------------------------------------------------------
# The reduced isomorphism
# ---------------------------------------------------------------------------


@dataclass
class ReducedIsoReport:
    ok: bool
    failures: list = field(default_factory=list)
    norm_discrepancy: float = 0.0
    algebra_dim: int | None = None
    center_dim: int | None = None


def _gns_data(b: FellBundle, l: LineBundle, x0, basis, tol=1e-10):
    """Gram matrix of phitilde(b_j* b_k) and the quotient isometry T.

    phitilde of the single product term (a*c) delta_{s*t} is the Gelfand
    coefficient at the unit germ over x0, nonzero only when [s*t, x0] is that
    unit germ; the coefficient is the plain value ratio.
    """
    S = b.semigroup
    g = l.groupoid
    ux = g.unit_of(x0)
    n = len(basis)
    gram = np.zeros((n, n), dtype=complex)
    for j, (s, a) in enumerate(basis):
        for k, (t, c) in enumerate(basis):
            st = S.mul(S.star(s), t)
            if x0 not in b.fiber_domain(st) or g.germ(st, x0) != ux:
                continue
            gram[j, k] = b.pair_value(a, c, x0) / l.refs[ux].value(x0)
    w, u = np.linalg.eigh((gram + gram.conj().T) / 2)
    keep = w > tol
    t_iso = np.diag(np.sqrt(w[keep])) @ u[:, keep].conj().T  # k x n
    lift = u[:, keep] @ np.diag(1.0 / np.sqrt(w[keep]))  # n x k
    return gram, t_iso, lift


def verify_reduced_iso(
    b: FellBundle,
    l: LineBundle,
    rng: random.Random | None = None,
    n_random: int = 200,
    coeff_tol: float = 1e-10,
    norm_tol: float = 1e-9,
) -> ReducedIsoReport:
    """Unitary equivalence of GNS(phitilde_x0) with pi_x0 after Psi at every
    unit, then equality of the two reduced norms on random elements."""
    rng = rng or random.Random(0)
    basis = algebra_basis(b)
    failures: list = []

    # left-multiplication matrices on C_c(A), shared by every unit
    lmul = {}
    for idx, (s, a) in enumerate(basis):
        cols = []
        gen = BundleAlgebraElement({s: a})
        for t, c in basis:
            prod = alg_mul(b, gen, BundleAlgebraElement({t: c}))
            cols.append(_expand(b, basis, prod))
        lmul[idx] = np.array(cols).T

    gns = {}
    for u in l.groupoid.units:
        x0 = l.groupoid.source(u)
        rep = regular_rep(l, x0)
        d = len(rep.basis)
        p_cols = []
        for s, a in basis:
            m = rep.matrix(psi_map(BundleAlgebraElement({s: a}), b, l))
            p_cols.append(m[:, rep.index[l.groupoid.unit_of(x0)]])
        p = np.array(p_cols).T if p_cols else np.zeros((d, 0), dtype=complex)
        gram, t_iso, lift = _gns_data(b, l, x0, basis)
        # matrix coefficients against the cyclic vectors must match the Gram
        if p.size and np.max(np.abs(p.conj().T @ p - gram)) > coeff_tol:
            failures.append(("matrix_coefficients", x0))
        # cyclicity: the orbit of delta_x spans l2(G_x)
        if np.linalg.matrix_rank(p, 1e-9) != d:
            failures.append(("cyclicity", x0))
        # GNS dimension equals the fiber count
        if t_iso.shape[0] != d:
            failures.append(("gns_dimension", x0))
        w_iso = p @ lift  # quotient -> l2(G_x)
        if w_iso.size and np.max(np.abs(w_iso.conj().T @ w_iso - np.eye(t_iso.shape[0]))) > coeff_tol:
            failures.append(("isometry", x0))
        # intertwining on generators
        for idx, (s, a) in enumerate(basis):
            rho = t_iso @ lmul[idx] @ lift
            m = rep.matrix(psi_map(BundleAlgebraElement({s: a}), b, l))
            if w_iso.size and np.max(np.abs(w_iso @ rho - m @ w_iso)) > coeff_tol:
                failures.append(("intertwiner", (x0, s)))
                break
        gns[x0] = (t_iso, lift)

    # reduced-norm agreement on random elements, via the two distinct routes
    lten = np.array([lmul[j] for j in range(len(basis))]) if basis else None
    rho_gens = {}
    for x0, (t_iso, lift) in gns.items():
        if lten is not None and t_iso.size:
            rho_gens[x0] = np.einsum("kn,jnm,mp->jkp", t_iso, lten, lift)
    worst = 0.0
    for _ in range(n_random):
        el = _random_element(b, basis, rng)
        vec = _expand(b, basis, el)
        norm_a = 0.0
        for x0, gens_t in rho_gens.items():
            rho = np.tensordot(vec, gens_t, axes=1)
            if rho.size:
                norm_a = max(norm_a, float(np.linalg.norm(rho, 2)))
        norm_psi = reduced_norm(l, psi_map(el, b, l))
        worst = max(worst, abs(norm_a - norm_psi))
    if worst > norm_tol:
        failures.append(("reduced_norm", worst))

    dim, center = algebra_dimensions(b, l)
    return ReducedIsoReport(
        ok=not failures,
        failures=failures,
        norm_discrepancy=worst,
        algebra_dim=dim,
        center_dim=center,
    )


def _expand(b: FellBundle, basis, el: BundleAlgebraElement) -> np.ndarray:
    """Coordinates of el in the algebra basis.  Indicator bases expand by a
    direct coordinate read; truncated bases fall back to least squares."""
    vec = np.zeros(len(basis), dtype=complex)
    slots: dict = {}
    for j, (t, c) in enumerate(basis):
        if c.coeffs is not None and len(c.coeffs) == 1:
            (pt, amp), = c.coeffs.items()
            if amp == 1:
                slots[(t, pt)] = j
                continue
        slots = None
        break
    for s, a in el.terms.items():
        if slots is not None:
            for pt, v in a.coeffs.items():
                vec[slots[(s, pt)]] = v
            continue
        idxs = [j for j, (t, _) in enumerate(basis) if t == s]
        mat = np.array([b.coords(basis[j][1]) for j in idxs]).T
        target = b.coords(a)
        sol, *_ = np.linalg.lstsq(mat, target, rcond=None)
        for j, coef in zip(idxs, sol):
            vec[j] = coef
    return vec


def _random_element(b: FellBundle, basis, rng: random.Random) -> BundleAlgebraElement:
    terms: dict = {}
    for s, a in basis:
        lam = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        contrib = b.scale(lam, a)
        terms[s] = b.add(terms[s], contrib) if s in terms else contrib
    return BundleAlgebraElement(terms)


def algebra_dimensions(b: FellBundle, l: LineBundle, tol=1e-9):
    """(dim, center dim) of the image of C_c(A) under the sum of all regular
    representations (a simultaneous block decomposition oracle)."""
    units = sorted(l.groupoid.units, key=repr)
    reps = [regular_rep(l, l.groupoid.source(u)) for u in units]
    sizes = [len(r.basis) for r in reps]
    if not sizes or sum(sizes) == 0:
        return 0, 0
    blocks = []
    for s, a in algebra_basis(b):
        xi = psi_map(BundleAlgebraElement({s: a}), b, l)
        blocks.append([r.matrix(xi) for r in reps])
    flat = np.array([np.concatenate([m.ravel() for m in row]) for row in blocks])
    dim = int(np.linalg.matrix_rank(flat, tol)) if flat.size else 0
    # center: solve [Z, M_k] = 0 for Z in the span of the image
    if not flat.size:
        return dim, 0
    u, sv, vh = np.linalg.svd(flat)
    span = vh[: int(np.sum(sv > tol))]
    k = span.shape[0]
    rows = []
    for gen_row in blocks:
        for j in range(k):
            z_blocks = _unflatten(span[j], sizes)
            comm = [z @ m - m @ z for z, m in zip(z_blocks, gen_row)]
            rows.append(np.concatenate([c.ravel() for c in comm]))
    commutator = np.array(rows).reshape(len(blocks), k, -1)
    # coefficient vector c with sum_j c_j [Z_j, M_i] = 0 for all i
    system = np.concatenate([commutator[i].T for i in range(len(blocks))], axis=0)
    ns_rank = int(np.linalg.matrix_rank(system, tol)) if system.size else 0
    center = k - ns_rank
    return dim, center


def _unflatten(vec: np.ndarray, sizes):
    out, pos = [], 0
    for n in sizes:
        out.append(vec[pos : pos + n * n].reshape(n, n))
        pos += n * n
    return out


# ---------------------------------------------------------------------------
# Conditional expectation onto the units (Hausdorff case)
# ---------------------------------------------------------------------------


def expectation_onto_units(l: LineBundle, xi: Section) -> Section:
    ok, witnesses = is_hausdorff(l.groupoid)
    if not ok:
        raise NotHausdorff(witnesses[0])
    units = l.groupoid.units
    return Section({g: v for g, v in xi.coeffs.items() if g in units})

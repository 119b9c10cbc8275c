"""Persistence modules on a finite grid and the standard ways to build them.

A persistence module here is a functor from the grid poset to GF(p) vector
spaces: a dimension for every degree v on [0, bound] and a matrix for every
unit step v -> v+e_j, with all squares commuting (asserted at construction).
Degrees past the bound are clamped: every constructor below only ever builds
modules that have stabilized at their bound (all further steps are identity
in the stored bases), so clamped reads agree with the true module and the
grid stays finite.

Coordinates: M_v is k^dims[v] with a fixed ordered basis; step matrices act
on column vectors.  Constructors that build quotients (homology, cokernels)
record their bases as rows in the ambient coordinates (`bases`) plus the
subspace that was modded out (`reduce_by`), so class representatives and
projections stay available downstream.
"""

from __future__ import annotations

import numpy as np

from torpers import InternalCheckError, ValidationError
from torpers import exactla as la
from torpers import grading as gr


class PersistenceModule:
    """Graded vector spaces M_v with commuting unit-step maps on [0, bound].

    Parameters
    ----------
    n : ambient grading dimension
    bound : top grid corner (degrees are clamped beyond it)
    dims : dict degree -> dimension, defined on the whole grid
    steps : dict (degree, axis) -> matrix M_v -> M_{v+e_axis}, for every
        in-grid step
    p : field characteristic
    labels : optional dict degree -> list of basis labels
    """

    def __init__(self, n, bound, dims, steps, p, labels=None, check=True):
        self.n = int(n)
        self.bound = gr.as_degree(bound)
        self.dims = dict(dims)
        self.steps = dict(steps)
        self.p = p
        self.labels = labels
        self.bases = None  # rows in ambient coords, set by quotient builders
        self.reduce_by = None  # RREF of the modded-out subspace per degree
        if check:
            self._check()

    def _check(self):
        for v in gr.grid(self.bound):
            if v not in self.dims:
                raise ValueError("missing dimension at %s" % (v,))
            for j in range(self.n):
                if v[j] >= self.bound[j]:
                    continue
                s = self.steps.get((v, j))
                if s is None:
                    raise ValueError("missing step at %s axis %d" % (v, j))
                if s.shape != (self.dims[gr.step(v, j)], self.dims[v]):
                    raise ValueError(
                        "step at %s axis %d has shape %s, expected %s"
                        % (v, j, s.shape, (self.dims[gr.step(v, j)], self.dims[v]))
                    )
        for v in gr.grid(self.bound):
            for i in range(self.n):
                for j in range(i + 1, self.n):
                    if v[i] >= self.bound[i] or v[j] >= self.bound[j]:
                        continue
                    a = la.matmul(self.step(gr.step(v, i), j), self.step(v, i), self.p)
                    b = la.matmul(self.step(gr.step(v, j), i), self.step(v, j), self.p)
                    if (a != b).any():
                        raise InternalCheckError(
                            "steps fail to commute on the square at %s, axes %d,%d"
                            % (v, i, j)
                        )

    def _clamp(self, v):
        return tuple(min(a, b) for a, b in zip(v, self.bound))

    def dim(self, v):
        if any(x < 0 for x in v):
            return 0
        return self.dims[self._clamp(v)]

    def step(self, v, j):
        """Matrix of M_v -> M_{v+e_j}, clamped outside the grid."""
        if any(x < 0 for x in v):
            return la.zeros(self.dim(gr.step(v, j)), 0)
        c = self._clamp(v)
        if c[j] >= self.bound[j]:
            # stabilized along this axis: the step is the identity
            return la.eye(self.dim(v))
        # other axes may clamp; the step matrix is the stored one there
        return self.steps[(c, j)]

    def phi(self, u, v):
        """Composite map M_u -> M_v for u <= v (staircase along axis order)."""
        if any(x < 0 for x in u):
            return la.zeros(self.dim(v), 0)
        if not gr.leq(u, v):
            raise ValueError("phi needs u <= v, got %s, %s" % (u, v))
        mat = la.eye(self.dim(u))
        cur = u
        for j in range(self.n):
            while cur[j] < v[j]:
                mat = la.matmul(self.step(cur, j), mat, self.p)
                cur = gr.step(cur, j)
        return mat

    def dim_grid(self):
        """dims as a dict over the grid (copy), for reports."""
        return {v: self.dims[v] for v in gr.grid(self.bound)}

    def is_zero(self):
        return all(d == 0 for d in self.dims.values())


class GradedModuleMap:
    """Degreewise linear map between two modules on the same grid; natural."""

    def __init__(self, source, target, mats, check=True):
        if source.n != target.n or source.bound != target.bound:
            raise ValueError("source and target live on different grids")
        self.source = source
        self.target = target
        self.p = source.p
        self.mats = dict(mats)
        if check:
            self._check()

    def _check(self):
        for v in gr.grid(self.source.bound):
            m = self.mats.get(v)
            if m is None or m.shape != (self.target.dim(v), self.source.dim(v)):
                raise ValueError("bad or missing matrix at %s" % (v,))
            for j in range(self.source.n):
                if v[j] >= self.source.bound[j]:
                    continue
                w = gr.step(v, j)
                lhs = la.matmul(self.mats[w], self.source.step(v, j), self.p)
                rhs = la.matmul(self.target.step(v, j), m, self.p)
                if (lhs != rhs).any():
                    raise InternalCheckError(
                        "map is not natural at %s along axis %d" % (v, j)
                    )

    def at(self, v):
        if any(x < 0 for x in v):
            return la.zeros(self.target.dim(v), self.source.dim(v))
        return self.mats[self.target._clamp(v)]

    def compose(self, other):
        """self after other."""
        mats = {
            v: la.matmul(self.at(v), other.at(v), self.p)
            for v in gr.grid(self.source.bound)
        }
        return GradedModuleMap(other.source, self.target, mats, check=False)

    def is_zero(self):
        return all(not m.any() for m in self.mats.values())


def rebound(module, new_bound):
    """The same module presented on a larger grid (clamped reads made real).

    Correct because every module built here has stabilized at its bound; the
    quotient bookkeeping (bases, reduce_by) is not carried over.
    """
    new_bound = gr.as_degree(new_bound)
    if not gr.leq(module.bound, new_bound):
        raise ValueError("new bound must dominate the old one")
    dims = {v: module.dim(v) for v in gr.grid(new_bound)}
    steps = {}
    for v in gr.grid(new_bound):
        for j in range(module.n):
            if v[j] < new_bound[j]:
                steps[(v, j)] = module.step(v, j)
    return PersistenceModule(
        module.n, new_bound, dims, steps, module.p, check=False
    )


# -- chain modules of a multifiltered complex -------------------------------


def _present_ids(cx, i, v):
    return [c.id for c in cx.cells_of_dim(i) if c.present_at(v)]


def chains_module(cx, i, p, bound=None):
    """The module of i-chains: basis = i-cells present at v, ordered by id."""
    from torpers.complexes import check_field

    check_field(p)
    bound = cx.natural_bound() if bound is None else gr.as_degree(bound)
    dims, steps, labels = {}, {}, {}
    for v in gr.grid(bound):
        ids = _present_ids(cx, i, v)
        dims[v] = len(ids)
        labels[v] = ids
    for v in gr.grid(bound):
        for j in range(cx.n):
            if v[j] >= bound[j]:
                continue
            w = gr.step(v, j)
            src, tgt = labels[v], labels[w]
            pos = {cid: k for k, cid in enumerate(tgt)}
            m = la.zeros(len(tgt), len(src))
            for col, cid in enumerate(src):
                m[pos[cid], col] = 1
            steps[(v, j)] = m
    return PersistenceModule(cx.n, bound, dims, steps, p, labels=labels)


def boundary_map(cx, i, p, bound=None):
    """The cellular boundary C_i -> C_{i-1} as a graded map (zero target for i=0)."""
    source = chains_module(cx, i, p, bound=bound)
    target = chains_module(cx, i - 1, p, bound=source.bound) if i > 0 else _zero_like(source)
    mats = {}
    for v in gr.grid(source.bound):
        src = source.labels[v]
        tgt = target.labels[v] if i > 0 else []
        pos = {cid: k for k, cid in enumerate(tgt)}
        m = la.zeros(len(tgt), len(src))
        for col, cid in enumerate(src):
            for fid, coeff in cx.cells[cid].boundary:
                m[pos[fid], col] = (m[pos[fid], col] + coeff) % p
        mats[v] = m
    return GradedModuleMap(source, target, mats)


def _zero_like(module):
    dims = {v: 0 for v in gr.grid(module.bound)}
    steps = {}
    for v in gr.grid(module.bound):
        for j in range(module.n):
            if v[j] < module.bound[j]:
                steps[(v, j)] = la.zeros(0, 0)
    return PersistenceModule(
        module.n, module.bound, dims, steps, module.p, check=False
    )


def submodule_from_rows(ambient, rows_by_degree, p):
    """Package a family of row spaces (closed under steps) as a module.

    rows_by_degree[v] must be in RREF; coordinates of the new module at v are
    with respect to those rows.
    """
    dims = {v: rows_by_degree[v].shape[0] for v in gr.grid(ambient.bound)}
    steps = {}
    for v in gr.grid(ambient.bound):
        for j in range(ambient.n):
            if v[j] >= ambient.bound[j]:
                continue
            w = gr.step(v, j)
            s = ambient.step(v, j)
            cols = []
            for row in rows_by_degree[v]:
                pushed = la.matmul(s, row, p)
                c = la.coords_in(pushed, rows_by_degree[w], p)
                if c is None:
                    raise InternalCheckError(
                        "row family is not closed under the step at %s axis %d"
                        % (v, j)
                    )
                cols.append(c)
            steps[(v, j)] = (
                np.array(cols, dtype=np.int64).T if cols else la.zeros(dims[w], 0)
            )
    mod = PersistenceModule(ambient.n, ambient.bound, dims, steps, p)
    mod.bases = dict(rows_by_degree)
    return mod


def _quotient_module(ambient, sub_rref, whole_rows, p):
    """Module of quotients whole/sub with RREF-complement bases.

    sub_rref[v] (RREF rows) must sit inside whole_rows[v]; both families must
    be closed under the ambient steps.
    """
    bases = {}
    for v in gr.grid(ambient.bound):
        bases[v] = la.complement_basis(sub_rref[v], whole_rows[v], p)
    dims = {v: bases[v].shape[0] for v in gr.grid(ambient.bound)}
    steps = {}
    for v in gr.grid(ambient.bound):
        for j in range(ambient.n):
            if v[j] >= ambient.bound[j]:
                continue
            w = gr.step(v, j)
            s = ambient.step(v, j)
            cols = []
            for row in bases[v]:
                pushed = la.matmul(s, row, p)
                red = la.reduce_mod_rows(pushed, sub_rref[w], p)
                c = la.coords_in(red, bases[w], p)
                if c is None:
                    raise InternalCheckError(
                        "quotient basis not closed under the step at %s axis %d"
                        % (v, j)
                    )
                cols.append(c)
            steps[(v, j)] = (
                np.array(cols, dtype=np.int64).T if cols else la.zeros(dims[w], 0)
            )
    mod = PersistenceModule(ambient.n, ambient.bound, dims, steps, p)
    mod.bases = bases
    mod.reduce_by = dict(sub_rref)
    return mod


def class_coords(quotient, v, ambient_vec, p):
    """Coordinates of an ambient vector's class in a quotient module's basis."""
    red = la.reduce_mod_rows(ambient_vec, quotient.reduce_by[v], p)
    c = la.coords_in(red, quotient.bases[v], p)
    if c is None:
        raise InternalCheckError("vector does not lie in the quotiented space")
    return c


def homology_module(cx, q, p, bound=None):
    """(H, Z, B) at homological degree q: cycles, boundaries, their quotient.

    All three are persistence modules; Z and B carry their chain-coordinate
    RREF bases in .bases, and H carries class representatives (.bases) plus
    the boundary space (.reduce_by) so classes can be projected later.
    """
    d_q = boundary_map(cx, q, p, bound=bound)
    chains = d_q.source
    d_up = boundary_map(cx, q + 1, p, bound=chains.bound)
    z_rows, b_rows = {}, {}
    for v in gr.grid(chains.bound):
        z_rows[v] = la.kernel_basis(d_q.at(v), p)
        b_rows[v] = la.row_space(d_up.at(v).T, p)
    Z = submodule_from_rows(chains, z_rows, p)
    B = submodule_from_rows(chains, b_rows, p)
    H = _quotient_module(chains, b_rows, z_rows, p)
    return H, Z, B


# -- cokernels of presentations ---------------------------------------------


def presentation_bound(pres):
    return gr.join(list(pres.gens) + [d for d, _ in pres.relations], n=pres.n)


def present_cokernel(pres, p, bound=None):
    """Evaluate a presentation to its cokernel module on the grid.

    Bases are RREF complements of the relation row space inside the free
    module on the generators present at each degree; .gen_index[v] maps the
    local free coordinates back to generator indices.
    """
    from torpers.complexes import check_field

    check_field(p)
    bound = presentation_bound(pres) if bound is None else gr.as_degree(bound)
    gen_index, rel_rref, free_mod = {}, {}, {}
    for v in gr.grid(bound):
        idx = [k for k, g in enumerate(pres.gens) if gr.leq(g, v)]
        gen_index[v] = idx
        pos = {k: c for c, k in enumerate(idx)}
        rows = []
        for d, coeffs in pres.relations:
            if not gr.leq(d, v):
                continue
            row = np.zeros(len(idx), dtype=np.int64)
            for k, c in coeffs.items():
                row[pos[k]] = c % p
            rows.append(row)
        rel_rref[v] = la.row_space(
            np.array(rows, dtype=np.int64) if rows else la.zeros(0, len(idx)), p
        )
        free_mod[v] = la.eye(len(idx))

    # ambient free module F(xi0) with inclusion steps
    dims = {v: len(gen_index[v]) for v in gr.grid(bound)}
    steps = {}
    for v in gr.grid(bound):
        for j in range(pres.n):
            if v[j] >= bound[j]:
                continue
            w = gr.step(v, j)
            pos = {k: c for c, k in enumerate(gen_index[w])}
            m = la.zeros(len(gen_index[w]), len(gen_index[v]))
            for col, k in enumerate(gen_index[v]):
                m[pos[k], col] = 1
            steps[(v, j)] = m
    free = PersistenceModule(pres.n, bound, dims, steps, p)

    mod = _quotient_module(free, rel_rref, free_mod, p)
    mod.gen_index = gen_index
    return mod


def free_module(ms, p, bound=None, n=None):
    """F(xi): the free module on a degree multiset (cokernel of no relations)."""
    from torpers.complexes import Presentation

    gens = [d for d, mult in gr.multiset_to_sorted_pairs(ms) for _ in range(mult)]
    if n is None:
        if not gens:
            raise ValueError("empty multiset needs an explicit n")
        n = len(gens[0])
    pres = Presentation(n, gens, [])
    return present_cokernel(pres, p, bound=bound)


# -- the one-at-a-time hypothesis --------------------------------------------


def single_step_check(cx, bound=None):
    """Do cells enter the filtration at most one at a time?

    Walks every unit step of the grid and compares total cell counts.
    Returns (True, None) or (False, violation) with the lexicographically
    first violation as a dict {from, to, before, after}.
    """
    bound = cx.natural_bound() if bound is None else gr.as_degree(bound)
    counts = {v: cx.cell_count_at(v) for v in gr.grid(bound)}
    for v in gr.grid(bound):
        for j in range(cx.n):
            if v[j] >= bound[j]:
                continue
            w = gr.step(v, j)
            if counts[w] - counts[v] > 1:
                return False, {
                    "from": v,
                    "to": w,
                    "before": counts[v],
                    "after": counts[w],
                }
    return True, None


def total_betti(cx, p):
    """Betti numbers of the total (fully entered) complex by direct ranks.

    Independent of all the persistence machinery: plain boundary matrices of
    the whole cell set, rank-nullity per dimension.
    """
    from torpers.complexes import check_field

    check_field(p)
    top = cx.max_dim()
    betti = []
    ranks = {}
    for i in range(top + 2):
        cells_i = cx.cells_of_dim(i)
        cells_lo = cx.cells_of_dim(i - 1)
        pos = {c.id: k for k, c in enumerate(cells_lo)}
        m = la.zeros(len(cells_lo), len(cells_i))
        for col, c in enumerate(cells_i):
            for fid, coeff in c.boundary:
                m[pos[fid], col] = (m[pos[fid], col] + coeff) % p
        ranks[i] = la.rank(m, p)
    for i in range(top + 1):
        dim_i = len(cx.cells_of_dim(i))
        betti.append(dim_i - ranks[i] - ranks[i + 1])
    return tuple(betti)

"""Tor of a persistence module against k, two independent ways.

Route one is homological: tensor the Koszul complex on x_1..x_n with M and
take homology per degree.  The block at v for the subset S of axes is
M_{v-e_S}, and the differential drops one axis at a time with alternating
signs.  Route two is constructive: build a minimal free resolution by
repeatedly choosing RREF-canonical generators of kernels.  Tor_j appears in
route one as Koszul homology and in route two as the generator degrees of
F_j; xi() runs both and insists on exact agreement.

Degrees are searched on [0, bound + (1,..,1)].  The outer layer must carry
zero Tor (the module has stabilized, so every axis acts invertibly there);
that assertion substitutes for an a-priori degree bound and fires only on an
internal bug or an unstabilized module.
"""

from __future__ import annotations

import itertools

import numpy as np

from torpers import InternalCheckError
from torpers import exactla as la
from torpers import grading as gr
from torpers import modules as md


def _minus_e(v, S):
    return tuple(a - (1 if i in S else 0) for i, a in enumerate(v))


def koszul_blocks(M, v, j):
    """Ordered blocks of K_j(v): list of (S, dim, offset), S ascending tuples."""
    blocks = []
    offset = 0
    for S in itertools.combinations(range(M.n), j):
        d = M.dim(_minus_e(v, S))
        blocks.append((S, d, offset))
        offset += d
    return blocks


def koszul_dim(M, v, j):
    return sum(d for _, d, _ in koszul_blocks(M, v, j))


def koszul_delta(M, v, j):
    """The differential K_j(v) -> K_{j-1}(v).

    On the summand for S, the axis t in S (position i among S ascending)
    contributes (-1)^i times the step map M_{v-e_S} -> M_{v-e_(S-t)}.
    """
    p = M.p
    src = koszul_blocks(M, v, j)
    tgt = koszul_blocks(M, v, j - 1)
    tgt_off = {S: off for S, _, off in tgt}
    m = la.zeros(sum(d for _, d, _ in tgt), sum(d for _, d, _ in src))
    for S, d, off in src:
        if d == 0:
            continue
        u = _minus_e(v, S)
        for i, t in enumerate(S):
            S2 = tuple(a for a in S if a != t)
            block = M.step(u, t)
            sign = 1 if i % 2 == 0 else p - 1
            r0 = tgt_off[S2]
            m[r0 : r0 + block.shape[0], off : off + d] = (sign * block) % p
    return m


class KoszulTor:
    """Tor_j via Koszul homology: a degree multiset plus canonical cycles."""

    def __init__(self, j, dims, reps):
        self.j = j
        self.dims = dims  # multiset dict degree -> dim, zeros dropped
        self.reps = reps  # degree -> rows in K_j(v) coordinates

    def multiset(self):
        return dict(self.dims)


def koszul_tor(M, j, bound=None):
    """Tor_j(M, k) per degree, with RREF-canonical representative cycles.

    Scans [0, bound+(1,..,1)] and asserts the outer layer is zero.
    """
    if not 0 <= j <= M.n:
        raise ValueError("homological index %d out of range 0..%d" % (j, M.n))
    bound = M.bound if bound is None else gr.as_degree(bound)
    wide = tuple(b + 1 for b in bound)
    p = M.p
    dims, reps = {}, {}
    for v in gr.grid(wide):
        d_j = koszul_delta(M, v, j) if j > 0 else la.zeros(0, M.dim(v))
        d_up = koszul_delta(M, v, j + 1) if j < M.n else la.zeros(d_j.shape[1], 0)
        if j > 0 and d_up.size:
            if la.matmul(d_j, d_up, p).any():
                raise InternalCheckError(
                    "Koszul differential fails to square to zero at %s" % (v,)
                )
        cycles = la.kernel_basis(d_j, p)
        bdries = la.row_space(d_up.T, p)
        cls = la.complement_basis(bdries, cycles, p)
        if cls.shape[0]:
            if any(v[i] > bound[i] for i in range(M.n)):
                raise InternalCheckError(
                    "Tor_%d nonzero at %s outside the stabilized grid; widen "
                    "the bound" % (j, v)
                )
            dims[v] = cls.shape[0]
            reps[v] = cls
    return KoszulTor(j, dims, reps)


# -- minimal free resolutions -------------------------------------------------


def module_generators(M):
    """Minimal generators: per degree, an RREF complement of the step images.

    Returns a list of (degree, row vector in M's local coordinates at that
    degree), in grid order.  Realizes M / (sum of the images of all steps).
    """
    gens = []
    for v in gr.grid(M.bound):
        if M.dim(v) == 0:
            continue
        imgs = []
        for t in range(M.n):
            if v[t] == 0:
                continue
            prev = tuple(a - (1 if i == t else 0) for i, a in enumerate(v))
            imgs.append(M.step(prev, t).T)
        sub = la.row_space(la.stack_rows(imgs, M.dim(v)), M.p)
        comp = la.complement_basis(sub, la.eye(M.dim(v)), M.p)
        for row in comp:
            gens.append((v, row))
    return gens


class MinimalResolution:
    """A chain of free modules F_L -> ... -> F_0 -> M, minimal and exact.

    gen_degrees[j] lists the generator degrees of F_j in grid order.  d[j]
    (for j >= 1) is the global scalar matrix of F_j -> F_{j-1}: the entry
    from column generator l (degree u_l) to row generator k (degree u_k) is a
    scalar standing for scalar * x^(u_l - u_k); it can be nonzero only when
    u_k <= u_l (homogeneity) and never when u_k = u_l (minimality).
    augmentation lists, per F_0 generator, its image vector in M's local
    coordinates at the generator's degree.
    """

    def __init__(self, module, gen_degrees, d, augmentation, bound):
        self.module = module
        self.gen_degrees = gen_degrees
        self.d = d
        self.augmentation = augmentation
        self.bound = bound
        self.p = module.p

    @property
    def length(self):
        return len(self.gen_degrees) - 1

    def xi(self, j):
        if j >= len(self.gen_degrees):
            return {}
        return gr.multiset_from_list(self.gen_degrees[j])

    def present_at(self, j, v):
        """Indices of F_j generators present at v."""
        return [k for k, u in enumerate(self.gen_degrees[j]) if gr.leq(u, v)]

    def evaluate(self, j, v):
        """Matrix of d_j at degree v in the local (present-generator) bases."""
        rows = self.present_at(j - 1, v)
        cols = self.present_at(j, v)
        return self.d[j][np.ix_(rows, cols)] if rows and cols else la.zeros(
            len(rows), len(cols)
        )

    def evaluate_augmentation(self, v):
        """Matrix of F_0 -> M at degree v (columns = generator images)."""
        M = self.module
        cols = []
        for k in self.present_at(0, v):
            u, vec = self.gen_degrees[0][k], self.augmentation[k]
            cols.append(la.matmul(M.phi(u, v), vec, M.p))
        m = np.array(cols, dtype=np.int64).T if cols else la.zeros(M.dim(v), 0)
        return m

    def restricted_image(self, j, v):
        """Image of the F_j generators born exactly at v, inside F_{j-1} at v.

        Returned as canonical RREF rows in the local coordinates of F_{j-1}
        at v; the Grassmannian point attached to (v) in xi_j.
        """
        cols = [
            c
            for c, k in enumerate(self.present_at(j, v))
            if self.gen_degrees[j][k] == v
        ]
        m = self.evaluate(j, v)
        return la.row_space(m[:, cols].T, self.p)

    def check(self):
        """Independent verification: homogeneity, minimality, exactness."""
        p = self.p
        for j in range(1, len(self.gen_degrees)):
            mat = self.d[j]
            for k, uk in enumerate(self.gen_degrees[j - 1]):
                for l, ul in enumerate(self.gen_degrees[j]):
                    if mat[k, l] % p == 0:
                        continue
                    if not gr.leq(uk, ul):
                        raise InternalCheckError(
                            "resolution d_%d not homogeneous at (%d,%d)" % (j, k, l)
                        )
                    if uk == ul:
                        raise InternalCheckError(
                            "resolution d_%d not minimal at (%d,%d)" % (j, k, l)
                        )
        for v in gr.grid(self.bound):
            eps = self.evaluate_augmentation(v)
            if la.rank(eps, p) != self.module.dim(v):
                raise InternalCheckError("augmentation not surjective at %s" % (v,))
            want = la.kernel_basis(eps, p)
            for j in range(1, len(self.gen_degrees)):
                have = la.row_space(self.evaluate(j, v).T, p)
                if want.shape != have.shape or (want != have).any():
                    raise InternalCheckError(
                        "resolution not exact at F_%d, degree %s" % (j - 1, v)
                    )
                want = la.kernel_basis(self.evaluate(j, v), p)
            if want.shape[0]:
                raise InternalCheckError(
                    "resolution too short: kernel left at F_%d, degree %s"
                    % (self.length, v)
                )
        return True


def minimal_resolution(M, bound=None):
    """Build the minimal free resolution of M by iterated kernel generation."""
    bound = M.bound if bound is None else gr.as_degree(bound)
    if bound != M.bound:
        M = md.rebound(M, bound)
    p = M.p
    gen_degrees, mats = [], {}
    gens = module_generators(M)
    gen_degrees.append([u for u, _ in gens])
    augmentation = [vec for _, vec in gens]

    current = M  # module the next F surjects onto
    cur_gens = gens
    j = 0
    while True:
        # free module on the current generators and its map to `current`
        ms = gr.multiset_from_list([u for u, _ in cur_gens])
        F = md.free_module(ms, p, bound=bound, n=M.n)
        eps_mats = {}
        for v in gr.grid(bound):
            cols = [
                la.matmul(current.phi(u, v), vec, p)
                for u, vec in cur_gens
                if gr.leq(u, v)
            ]
            eps_mats[v] = (
                np.array(cols, dtype=np.int64).T
                if cols
                else la.zeros(current.dim(v), 0)
            )
        eps = md.GradedModuleMap(F, current, eps_mats)  # asserts naturality
        kernel_rows = {v: la.kernel_basis(eps.at(v), p) for v in gr.grid(bound)}
        if all(rows.shape[0] == 0 for rows in kernel_rows.values()):
            break
        if j == M.n:
            raise InternalCheckError(
                "resolution exceeds length %d; this contradicts the syzygy "
                "theorem and signals a bug" % M.n
            )
        K = md.submodule_from_rows(F, kernel_rows, p)
        next_gens = module_generators(K)
        # syzygy columns, written in F_j's local generator coordinates
        d = la.zeros(len(cur_gens), len(next_gens))
        glob = {v: F.gen_index[v] for v in gr.grid(bound)}
        for l, (u, row) in enumerate(next_gens):
            ambient = la.matmul(row, K.bases[u], p)  # row in F_j coords at u
            for c, k in enumerate(glob[u]):
                d[k, l] = ambient[c]
        mats[j + 1] = d
        gen_degrees.append([u for u, _ in next_gens])
        # next level resolves K; its generator vectors are already K-local
        current = K
        cur_gens = next_gens
        j += 1

    res = MinimalResolution(M, gen_degrees, mats, augmentation, bound)
    res.check()
    return res


# -- the invariant tables ------------------------------------------------------


class TorTable:
    """xi_0..xi_n of a module, cross-checked between the two routes."""

    def __init__(self, n, tables, reps, resolution):
        self.n = n
        self.tables = tables  # j -> multiset dict
        self.reps = reps  # j -> degree -> representative rows (Koszul coords)
        self.resolution = resolution

    def to_json(self):
        return {
            "xi": [
                [j, gr.multiset_to_json(self.tables.get(j, {}))]
                for j in range(self.n + 1)
            ]
        }


def xi(M, widen=0):
    """All xi_j of M by Koszul homology, cross-checked against the resolution.

    widen enlarges the search grid by that many steps in every axis before
    computing (the answer must not change; useful as a stability check).
    """
    bound = tuple(b + widen for b in M.bound)
    resolution = minimal_resolution(M, bound=bound)
    tables, reps = {}, {}
    for j in range(M.n + 1):
        kt = koszul_tor(M, j, bound=bound)
        res_ms = resolution.xi(j)
        if kt.multiset() != res_ms:
            raise InternalCheckError(
                "Tor_%d mismatch: Koszul homology gives %s, the minimal "
                "resolution gives %s" % (j, kt.multiset(), res_ms)
            )
        tables[j] = kt.multiset()
        reps[j] = kt.reps
    return TorTable(M.n, tables, reps, resolution)

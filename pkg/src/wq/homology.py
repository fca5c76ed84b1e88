"""Exact homology of snapshots, equivariant splittings, and the stable
(hbar-inverted) rank computation along weight-shift maps.

Everything here is matrix-level; the algebra-to-matrix bridge lives in
wq.models.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ActionNotChainMap, NoSolution, WQError
from .linalg import (LinearSystem, SparseMatrix, _Eliminator, express_in_span,
                     nullspace, rank, solve, vec_scale, vec_sub)
from .models import (ComplexSnapshot, hbar_shift_matrices,
                     hochschild_weight_snapshot, lie_matrices)
from .scalars import ONE, Scalar
from .weyl import WEYL, sp_basis


@dataclass
class HomologyResult:
    key: tuple
    ranks: dict
    reps: dict
    advisory: bool
    kernel_dims: dict = field(default_factory=dict)
    image_ranks: dict = field(default_factory=dict)


def compute_homology(snap: ComplexSnapshot, with_reps=True) -> HomologyResult:
    """Exact per-degree homology ranks and representative cycles (kernel
    vectors completing the boundary space)."""
    ranks, reps, kdims, iranks = {}, {}, {}, {}
    for q in snap.degrees:
        dq = snap.diff(q) if (q - 1) in snap.index else \
            SparseMatrix(0, snap.dim(q))
        kernel = nullspace(dq)
        kdims[q] = len(kernel)
        if (q + 1) in snap.index:
            dnext = snap.diff(q + 1)
            bnd_cols = [dnext.column(c) for c in range(dnext.ncols)
                        if dnext.column(c)]
        else:
            bnd_cols = []
        # independent columns: pivots of [boundaries | kernel]
        n = snap.dim(q)
        rows = {}
        cols = bnd_cols + kernel
        for j, col in enumerate(cols):
            for r, s in col.items():
                rows.setdefault(r, {})[j] = s
        e = _Eliminator(rows, len(cols)).run()
        nb = len(bnd_cols)
        b_rank = sum(1 for c in e.pivots if c < nb)
        h_reps = [kernel[c - nb] for c in sorted(e.pivots) if c >= nb]
        iranks[q] = b_rank
        ranks[q] = len(h_reps)
        if with_reps:
            reps[q] = h_reps
    return HomologyResult(snap.key, ranks, reps, not snap.complete,
                          kdims, iranks)


def is_boundary(snap: ComplexSnapshot, q, vec):
    """(True, preimage) when vec = d(preimage) inside the block; the
    certificate re-verifies by one multiplication."""
    if (q + 1) not in snap.index:
        return (not vec), None
    dnext = snap.diff(q + 1)
    x = solve(dnext, vec)
    if x is None:
        return False, None
    if vec_sub(dnext.mul_vec(x), vec):
        raise WQError("boundary certificate failed to verify")
    return True, x


def class_coordinates(snap, hres: HomologyResult, q, vec):
    """Coordinates of a cycle's class against the stored representatives
    (modulo boundaries); None if vec is not in the cycle space."""
    reps = hres.reps[q]
    if (q + 1) in snap.index:
        dnext = snap.diff(q + 1)
        bnd = [dnext.column(c) for c in range(dnext.ncols) if dnext.column(c)]
    else:
        bnd = []
    coords = express_in_span(reps + bnd, vec, snap.dim(q))
    if coords is None:
        return None
    return {j: s for j, s in coords.items() if j < len(reps)}


def induced_map_on_homology(F: SparseMatrix, src, src_h, tgt, tgt_h, q,
                            qt=None):
    """Matrix of the induced map on homology of a chain map F at degree q."""
    qt = q if qt is None else qt
    out = SparseMatrix(len(tgt_h.reps[qt]), len(src_h.reps[q]))
    for j, rep in enumerate(src_h.reps[q]):
        img = F.mul_vec(rep)
        coords = class_coordinates(tgt, tgt_h, qt, img)
        if coords is None:
            raise WQError("chain map image is not a cycle class")
        out.set_column(j, coords)
    return out


@dataclass
class InvertedHomology:
    parity: int
    weights: list
    block_ranks: dict       # (w, q) -> rank
    stable_ranks: dict      # q -> rank of the stable (colimit) block
    stable: bool            # consecutive composite ranks agreed
    consecutive: dict       # q -> list of composite ranks per starting weight
    advisory: bool
    generator_class: dict = field(default_factory=dict)


def inverted_hochschild(trunc, parity, max_weight, degrees=None,
                        phi_vector=None):
    """Stable homology ranks of the hbar-inverted Hochschild complex at one
    weight parity: the filtered colimit of weight blocks along multiplication
    by hbar, computed block by block."""
    weights = list(range(parity, max_weight + 1, 2))
    snaps = [hochschild_weight_snapshot(trunc, w, WEYL) for w in weights]
    hs = [compute_homology(s) for s in snaps]
    degrees = degrees if degrees is not None else \
        list(range(min(max_weight, snaps[-1].degrees[-1]) + 1))
    block_ranks = {(w, q): hs[i].ranks.get(q, 0)
                   for i, w in enumerate(weights) for q in degrees}
    # induced maps H(w) -> H(w+2) along multiplication by hbar
    induced = []
    for i in range(len(weights) - 1):
        shift = hbar_shift_matrices(snaps[i], snaps[i + 1])
        induced.append({
            q: induced_map_on_homology(
                shift.get(q, SparseMatrix(snaps[i + 1].dim(q),
                                          snaps[i].dim(q))),
                snaps[i], hs[i], snaps[i + 1], hs[i + 1], q)
            for q in degrees if q in hs[i].reps and q in hs[i + 1].reps})
    # colimit rank: images im(H(w_j) -> H(w_last)) increase with j, so the
    # certificate is the rank of the last composite, with stability read off
    # the agreement of the two last tail values
    stable_ranks, consecutive, stable = {}, {}, True
    for q in degrees:
        comp_ranks = []
        for start in range(len(weights) - 1):
            M = None
            broken = False
            for i in range(start, len(weights) - 1):
                step = induced[i].get(q)
                if step is None:
                    broken = True
                    break
                M = step if M is None else step.matmul(M)
            comp_ranks.append(0 if broken or M is None else rank(M))
        consecutive[q] = comp_ranks
        if comp_ranks:
            stable_ranks[q] = comp_ranks[-1]
            if len(comp_ranks) < 2 or comp_ranks[-2] != comp_ranks[-1]:
                stable = False
        else:
            stable_ranks[q] = hs[0].ranks.get(q, 0)
            stable = False
    advisory = any(not s.complete for s in snaps) or not stable
    out = InvertedHomology(parity, weights, block_ranks, stable_ranks,
                           stable, consecutive, advisory)
    if phi_vector is not None:
        q = 2 * trunc.d
        w0 = weights.index(q) if q in weights else None
        if w0 is not None:
            vec = phi_vector
            coords = class_coordinates(snaps[w0], hs[w0], q, vec)
            for i in range(w0, len(weights) - 1):
                coords = induced[i][q].mul_vec(coords)
            out.generator_class = coords or {}
    return out


@dataclass
class IsotypicDecomposition:
    cartan_blocks: dict   # q -> dict cartan tuple -> list of indices
    invariants: dict      # q -> list of vectors spanning the h-invariants


def isotypic_project(snap: ComplexSnapshot, actions) -> IsotypicDecomposition:
    """actions: list of (name, dict q -> SparseMatrix), degree-preserving and
    commuting with the differential (checked)."""
    for name, mats in actions:
        for q in snap.degrees:
            if (q - 1) not in snap.index or q not in mats:
                continue
            lhs = snap.diff(q).matmul(mats[q])
            rhs = mats[q - 1].matmul(snap.diff(q)) if (q - 1) in mats else \
                SparseMatrix(snap.dim(q - 1), snap.dim(q))
            if lhs != rhs:
                raise ActionNotChainMap("action %r fails at degree %d"
                                        % (name, q))
    blocks = {}
    for q in snap.degrees:
        per = {}
        for i, cw in enumerate(snap.cartan[q]):
            per.setdefault(cw, []).append(i)
        blocks[q] = per
    invariants = {}
    for q in snap.degrees:
        n = snap.dim(q)
        stacked = SparseMatrix(0, n)
        offset = 0
        for name, mats in actions:
            M = mats.get(q)
            if M is None:
                continue
            for c, col in M.cols.items():
                for r, s in col.items():
                    stacked.add_entry(offset + r, c, s)
            offset += M.nrows
        stacked.nrows = offset
        invariants[q] = nullspace(stacked)
    return IsotypicDecomposition(blocks, invariants)


def solve_splitting(forms, chains, J, actions, section_cols=None,
                    chainmap_cols=None):
    """Exact h-equivariant splitting M of the inclusion J: forms -> chains:
    M J = id on the section domain, M a chain map on the constrained columns,
    M commuting with every listed action; unknowns restricted to
    Cartan-matched (row, column) pairs.

    actions: list of (name, form_mats, chain_mats).
    Returns (M: dict q -> SparseMatrix, report dict).  Raises NoSolution
    (which must not happen on complete blocks).
    """
    mdeg = [q for q in forms.degrees if q in chains.index]
    sys = LinearSystem()

    def mvar(q, fr, c):
        return ("M", q, fr, c)

    def matched(q, fr, c):
        return forms.cartan[q][fr] == chains.cartan[q][c]

    # declare unknowns
    for q in mdeg:
        for fr in range(forms.dim(q)):
            for c in range(chains.dim(q)):
                if matched(q, fr, c):
                    sys.var(mvar(q, fr, c))

    # section: M J = id
    for q in mdeg:
        Jq = J.get(q)
        if Jq is None:
            continue
        cols = section_cols.get(q, range(forms.dim(q))) if section_cols \
            else range(forms.dim(q))
        for fc in cols:
            jcol = Jq.column(fc)
            for fr in range(forms.dim(q)):
                coeffs = {}
                for c, s in jcol.items():
                    if matched(q, fr, c):
                        coeffs[mvar(q, fr, c)] = s
                rhs = ONE if fr == fc else Scalar(0)
                sys.add_equation(coeffs, rhs, ("section", q, fr, fc))

    # chain map: M_{q-1} dC_q = dF_q M_q   (dF is the forms differential)
    for q in chains.degrees:
        if (q - 1) not in forms.index:
            continue
        dC = chains.diff(q)
        dF = forms.diff(q) if q in forms.index else None
        cols = chainmap_cols.get(q, range(chains.dim(q))) if chainmap_cols \
            else range(chains.dim(q))
        for c in cols:
            dcol = dC.column(c)
            for fr in range(forms.dim(q - 1)):
                coeffs = {}
                if (q - 1) in mdeg:
                    for c2, s in dcol.items():
                        if matched(q - 1, fr, c2):
                            key = mvar(q - 1, fr, c2)
                            coeffs[key] = coeffs.get(key, Scalar(0)) + s
                if q in mdeg and dF is not None:
                    for fr2 in range(forms.dim(q)):
                        s = dF.get(fr, fr2)
                        if s and matched(q, fr2, c):
                            key = mvar(q, fr2, c)
                            coeffs[key] = coeffs.get(key, Scalar(0)) - s
                sys.add_equation(coeffs, Scalar(0), ("chainmap", q, fr, c))

    # equivariance: M L^C = L^F M for each listed action
    for name, fmats, cmats in actions:
        for q in mdeg:
            LC = cmats.get(q)
            LF = fmats.get(q)
            for c in range(chains.dim(q)):
                lc_col = LC.column(c) if LC is not None else {}
                for fr in range(forms.dim(q)):
                    coeffs = {}
                    for c2, s in lc_col.items():
                        if matched(q, fr, c2):
                            key = mvar(q, fr, c2)
                            coeffs[key] = coeffs.get(key, Scalar(0)) + s
                    if LF is not None:
                        for fr2 in range(forms.dim(q)):
                            s = LF.get(fr, fr2)
                            if s and matched(q, fr2, c):
                                key = mvar(q, fr2, c)
                                coeffs[key] = coeffs.get(key, Scalar(0)) - s
                    sys.add_equation(coeffs, Scalar(0),
                                     ("equivariance", name, q, fr, c))

    sol = sys.solve()
    M = {}
    for q in mdeg:
        Mq = SparseMatrix(forms.dim(q), chains.dim(q))
        for c in range(chains.dim(q)):
            for fr in range(forms.dim(q)):
                v = sol.get(mvar(q, fr, c))
                if v:
                    Mq.add_entry(fr, c, v)
        M[q] = Mq
    report = {"unknowns": sys.num_vars, "equations": sys.num_eqs}
    return M, report

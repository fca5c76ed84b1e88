import random

import pytest

from wq.errors import ActionNotChainMap, NoSolution
from wq.homology import (class_coordinates, compute_homology,
                         induced_map_on_homology, inverted_hochschild,
                         is_boundary, isotypic_project, solve_splitting)
from wq.koszul import fundamental_cycle
from wq.linalg import SparseMatrix, rank, vec_sub
from wq.models import (B_matrices, ComplexSnapshot, assemble_cyclic,
                       chain_keys, forms_stable_snapshot,
                       forms_weight_snapshot, hochschild_stable_snapshot,
                       hochschild_weight_snapshot, hbar_shift_matrices,
                       iota_matrices, j_matrices, koszul_comparison_matrices,
                       koszul_weight_snapshot, lie_matrices, object_to_vector,
                       sigma_matrices, snapshot)
from wq.scalars import Scalar, Truncation
from wq.weyl import Derivation, Monomial, SYMBOL, WEYL, WeylElement, sp_basis

from oracles import count_monomials

T6 = Truncation(1, 6, (0, 6))


class TestSnapshots:
    def test_weight_zero_block(self):
        s = hochschild_weight_snapshot(T6, 0)
        assert s.dim(0) == 1 and s.labels[0][0] == ((Monomial((0, 0)),), 0)
        assert s.complete

    def test_weight_two_block_contains_phi(self):
        s = hochschild_weight_snapshot(T6, 2)
        phi = fundamental_cycle(T6)
        vec, dropped = object_to_vector(s, 2, phi)
        assert vec and not dropped

    def test_block_dims_match_combinatorics(self):
        # q=0 weight-w block: monomials of degree w-2k per admissible k
        for w in (2, 4):
            s = hochschild_weight_snapshot(T6, w)
            want = sum(count_monomials(2, w - 2 * k)
                       for k in range(w // 2 + 1))
            assert s.dim(0) == want

    def test_koszul_dims_match_combinatorics(self):
        t = Truncation(2, 4, (0, 4))
        s = koszul_weight_snapshot(t, 3)
        for q in s.degrees:
            from math import comb
            want = sum(comb(4, q) * count_monomials(4, 3 - q - 2 * k)
                       for k in range(0, (3 - q) // 2 + 1) if 3 - q - 2 * k >= 0)
            assert s.dim(q) == want

    def test_stable_block_closed_under_B(self):
        s = hochschild_stable_snapshot(T6, 0, 4)
        B = B_matrices(s)  # raises if B overflows the top degree
        for q in range(3):
            comp = B[q + 1].matmul(B[q])
            assert comp.is_zero()

    def test_cyclic_assembly(self):
        s = assemble_cyclic(T6, "negative", 0, (0, 2), 2)
        assert s.degrees == [0, 2]
        qs0 = {q for (q, lab) in s.labels[0]}
        assert qs0 == {0, 2}
        qs2 = {q for (q, lab) in s.labels[2]}
        assert qs2 == {2}
        s.validate()

    def test_cyclic_negative_vs_periodic(self):
        sneg = assemble_cyclic(T6, "negative", 0, (-2, 2), 2)
        sper = assemble_cyclic(T6, "periodic", 0, (-2, 2), 2)
        # at positive total degree the negative variant drops low q's
        assert sper.dim(2) > sneg.dim(2)
        assert sper.dim(-2) == sneg.dim(-2)

    def test_snapshot_front_door(self):
        s = snapshot("hochschild", 2, T6)
        assert s.kind == "hochschild-weyl"


class TestHomology:
    def test_weight0(self):
        h = compute_homology(hochschild_weight_snapshot(T6, 0))
        assert h.ranks[0] == 1

    def test_zero_complex(self):
        s = hochschild_weight_snapshot(Truncation(1, 2, (0, 2)), 1, SYMBOL,
                                       qmax=0)
        # odd weight symbol block in degree 0 only
        h = compute_homology(s)
        assert all(r >= 0 for r in h.ranks.values())

    def test_reps_are_cycles(self):
        s = hochschild_weight_snapshot(T6, 4)
        h = compute_homology(s)
        for q, reps in h.reps.items():
            for v in reps:
                if (q - 1) in s.index:
                    assert s.diff(q).mul_vec(v) == {}

    def test_determinism_under_relabeling(self):
        s = hochschild_weight_snapshot(T6, 3)
        rng = random.Random(5)
        labels = {q: list(s.labels[q]) for q in s.degrees}
        for q in labels:
            rng.shuffle(labels[q])
        shuffled = ComplexSnapshot(s.kind, s.key + ("shuffled",), s.trunc,
                                   s.degrees, labels, {}, s.cartan, s.complete)
        from wq.models import build_map
        from wq.chains import hochschild_b
        diffs, _ = build_map(shuffled, shuffled, lambda q: q - 1,
                             lambda obj, q: hochschild_b(obj) if q else None)
        shuffled.diffs = {q: m for q, m in diffs.items() if q >= 1}
        h1 = compute_homology(s)
        h2 = compute_homology(shuffled)
        assert h1.ranks == h2.ranks

    def test_boundary_certificate(self):
        s = hochschild_weight_snapshot(T6, 2)
        d2 = s.diff(2)
        col = d2.column(0)
        ok, pre = is_boundary(s, 1, col)
        assert ok and vec_sub(d2.mul_vec(pre), col) == {}


class TestInverted:
    def test_concentration_d1(self):
        t = Truncation(1, 6, (0, 4))
        phi = fundamental_cycle(t)
        s2 = hochschild_weight_snapshot(t, 2)
        vec, _ = object_to_vector(s2, 2, phi)
        inv = inverted_hochschild(t, 0, 6, degrees=[0, 1, 2, 3, 4],
                                  phi_vector=vec)
        assert inv.stable
        assert not inv.advisory
        assert [inv.stable_ranks[q] for q in range(5)] == [0, 0, 1, 0, 0]
        assert inv.generator_class  # Phi survives to the colimit

    def test_odd_parity_vanishes(self):
        t = Truncation(1, 5, (0, 4))
        inv = inverted_hochschild(t, 1, 5, degrees=[0, 1, 2, 3])
        assert inv.stable
        assert all(r == 0 for r in inv.stable_ranks.values())

    def test_koszul_comparison_quasi_iso(self):
        t = Truncation(1, 6, (0, 6))
        for w in (2, 3):
            kz = koszul_weight_snapshot(t, w)
            ch = hochschild_weight_snapshot(t, w)
            to_ch, to_fm = koszul_comparison_matrices(
                kz, ch, forms_weight_snapshot(t, w - 2 * t.d))
            hk, hc = compute_homology(kz), compute_homology(ch)
            for q in kz.degrees:
                if q not in hc.reps:
                    continue
                ind = induced_map_on_homology(to_ch[q], kz, hk, ch, hc, q)
                assert rank(ind) == hk.ranks[q] == hc.ranks.get(q, 0)

    def test_koszul_to_forms_blockwise_iso(self):
        t = Truncation(1, 6, (0, 6))
        for w in (2, 3):
            kz = koszul_weight_snapshot(t, w)
            fw = forms_weight_snapshot(t, w - 2 * t.d)
            _, to_fm = koszul_comparison_matrices(
                kz, hochschild_weight_snapshot(t, w), fw)
            for q in kz.degrees:
                M = to_fm[q]
                assert kz.dim(q) == fw.dim(q)
                assert rank(M) == kz.dim(q)


class TestIsotypic:
    def test_phi_invariant(self):
        t = Truncation(1, 4, (0, 4))
        s = hochschild_weight_snapshot(t, 2)
        actions = [(repr(D), lie_matrices(s, D)) for D in sp_basis(t)]
        dec = isotypic_project(s, actions)
        phi, _ = object_to_vector(s, 2, fundamental_cycle(t))
        from wq.linalg import express_in_span
        assert express_in_span(dec.invariants[2], phi, s.dim(2)) is not None

    def test_x_not_invariant(self):
        t = Truncation(1, 4, (0, 4))
        s = hochschild_weight_snapshot(t, 1)
        actions = [(repr(D), lie_matrices(s, D)) for D in sp_basis(t)]
        dec = isotypic_project(s, actions)
        xvec, _ = object_to_vector(
            s, 0, TensorChainFromElement(WeylElement.x(1, t)))
        from wq.linalg import express_in_span
        assert express_in_span(dec.invariants[0], xvec, s.dim(0)) is None
        assert dec.cartan_blocks[0][(1,)]  # cartan weight +1 space

    def test_action_not_chain_map(self):
        t = Truncation(1, 4, (0, 4))
        s = hochschild_weight_snapshot(t, 2)
        bad = {q: SparseMatrix.identity(s.dim(q)) for q in s.degrees}
        bad[1].add_entry(0, 0, Scalar(5))
        with pytest.raises(ActionNotChainMap):
            isotypic_project(s, [("bad", bad)])


def TensorChainFromElement(w):
    from wq.chains import TensorChain
    return TensorChain.elementary([w])


def splitting_setup(dcap=4, deg_cap=6):
    t = Truncation(1, deg_cap, (0, 8))
    chains = hochschild_stable_snapshot(t, 0, dcap)
    forms = forms_stable_snapshot(t, 0, dcap)
    J = j_matrices(forms, chains, coeff_cap=dcap - 2 * t.d)
    actions = []
    for D in sp_basis(t):
        actions.append((repr(D), lie_matrices(forms, D),
                        lie_matrices(chains, D)))
    section_cols = {q: [i for i, (m, S) in enumerate(forms.labels[q])
                        if m.degree() <= dcap - 2 * t.d]
                    for q in forms.degrees}
    return t, chains, forms, J, actions, section_cols


class TestSplitting:
    def test_splitting_exists_and_is_exact(self):
        t, chains, forms, J, actions, section_cols = splitting_setup()
        M, report = solve_splitting(forms, chains, J, actions,
                                    section_cols=section_cols)
        # section property on the domain
        for q in forms.degrees:
            P = M[q].matmul(J[q])
            for fc in section_cols[q]:
                col = P.column(fc)
                assert col == {fc: Scalar(1)}
        # chain map on all capped columns
        for q in chains.degrees:
            if (q - 1) not in forms.index:
                continue
            lhs = M[q - 1].matmul(chains.diff(q))
            rhs = forms.diff(q).matmul(M[q]) if q in M else \
                SparseMatrix(forms.dim(q - 1), chains.dim(q))
            assert lhs == rhs
        # equivariance residual is exactly zero
        for name, fmats, cmats in actions:
            for q in forms.degrees:
                assert M[q].matmul(cmats[q]) == fmats[q].matmul(M[q])

    def test_splitting_sends_phi_to_one(self):
        t, chains, forms, J, actions, section_cols = splitting_setup()
        M, _ = solve_splitting(forms, chains, J, actions,
                               section_cols=section_cols)
        phi, _ = object_to_vector(chains, 2, fundamental_cycle(t))
        img = M[2].mul_vec(phi)
        one_idx = forms.index[2][(Monomial((0, 0)), ())]
        assert img == {one_idx: Scalar(1)}

import itertools
import random

import pytest
import sympy as sp

from wq import conventions as conv
from wq.errors import ContextMismatch, NegativeHbarPower, ZeroElement
from wq.scalars import HBarSeries, Scalar, Truncation
from wq.weyl import (Derivation, Monomial, SYMBOL, WEYL, WeylElement, bracket,
                     commutator, count_monomials, derivation_apply,
                     filtration_degree, monomials_of_degree, monomials_upto,
                     moyal_product, poisson_bracket, sp_basis, symbol)

from oracles import count_monomials as oracle_count, sympy_moyal, weyl_to_sympy

T1 = Truncation(1, 6, (0, 6))
T2 = Truncation(2, 4, (0, 4))


def x(i, t=T1):
    return WeylElement.x(i, t)


def xi(i, t=T1):
    return WeylElement.xi(i, t)


def rand_element(trunc, rng, context=WEYL, max_deg=3, nterms=3):
    monos = list(monomials_upto(trunc.nvars, max_deg))
    terms = {}
    for _ in range(nterms):
        m = rng.choice(monos)
        c = Scalar(rng.randint(-4, 4), rng.randint(-2, 2))
        terms[m] = HBarSeries({0: c}, trunc.hbar_window)
    return WeylElement(terms, trunc, context)


class TestMonomials:
    def test_counts_match_stars_and_bars(self):
        for nvars in (2, 4):
            for deg in range(6):
                got = len(list(monomials_of_degree(nvars, deg)))
                assert got == oracle_count(nvars, deg) == count_monomials(nvars, deg)

    def test_str(self):
        m = Monomial((2, 0, 1, 0))
        assert str(m) == "x1^2*xi1"


class TestMoyal:
    def test_unit_law(self):
        one = WeylElement.one(T1)
        f = x(1) * xi(1) + WeylElement.from_scalar(Scalar(3), T1)
        assert moyal_product(one, f) == f
        assert moyal_product(f, one) == f

    def test_no_xi_dependence(self):
        assert moyal_product(x(1), x(1)) == WeylElement.monomial(
            Monomial((2, 0)), T1)

    def test_first_order_oracle(self):
        # hand expansion of the exponential operator at order 1
        got = moyal_product(x(1), xi(1))
        from gmpy2 import mpq
        expected = WeylElement({
            Monomial((1, 1)): T1.one_series(),
            Monomial((0, 0)): HBarSeries(
                {1: Scalar(0, mpq(-1, 2))}, T1.hbar_window),
        }, T1)
        assert got == expected

    def test_against_sympy_oracle_d1(self):
        xs, xis = sp.symbols("x1"), sp.symbols("xi1")
        cases = [
            (x(1), xi(1)),
            (x(1) * x(1), xi(1) * xi(1)),
            ((x(1) + xi(1)) * x(1), xi(1) * xi(1) * x(1)),
        ]
        for f, g in cases:
            want = sympy_moyal(weyl_to_sympy(f), weyl_to_sympy(g), 1)
            got = weyl_to_sympy(moyal_product(f, g))
            assert sp.expand(want - got) == 0

    def test_against_sympy_oracle_d2_random(self):
        rng = random.Random(7)
        for _ in range(5):
            f = rand_element(T2, rng, max_deg=2)
            g = rand_element(T2, rng, max_deg=2)
            want = sympy_moyal(weyl_to_sympy(f), weyl_to_sympy(g), 2)
            got = weyl_to_sympy(moyal_product(f, g))
            assert sp.expand(want - got) == 0

    def test_context_mismatch(self):
        with pytest.raises(ContextMismatch):
            moyal_product(x(1), WeylElement.x(1, T1, context=SYMBOL))

    def test_associativity_small(self):
        gens = [x(1), xi(1), x(1) * xi(1)]
        for f, g, h in itertools.product(gens, repeat=3):
            assert moyal_product(moyal_product(f, g), h) == \
                moyal_product(f, moyal_product(g, h))

    def test_weight_homogeneity(self):
        f = x(1) * xi(1)  # weight 2, two homogeneous pieces
        comps = f.weight_components()
        assert set(comps) == {2}
        g = moyal_product(f, f)
        assert set(g.weight_components()) == {4}


class TestCommutator:
    def test_commuting_generators(self):
        t = T2
        assert commutator(WeylElement.x(1, t), WeylElement.x(2, t)).is_zero()

    def test_x_xi(self):
        got = commutator(x(1), xi(1))
        want = WeylElement.from_series(
            HBarSeries({1: conv.COMMUTATOR_X_XI}, T1.hbar_window), T1)
        assert got == want

    def test_self(self):
        f = x(1) * xi(1) + x(1)
        assert commutator(f, f).is_zero()

    def test_hbar_divisibility(self):
        rng = random.Random(1)
        for _ in range(20):
            f, g = rand_element(T1, rng), rand_element(T1, rng)
            c = commutator(f, g)
            for s in c.terms.values():
                assert s.vmin_order() >= 1

    def test_centrality_of_constants(self):
        c = WeylElement.from_series(
            HBarSeries({0: Scalar(2), 1: Scalar(0, 1)}, T1.hbar_window), T1)
        rng = random.Random(2)
        for _ in range(10):
            f = rand_element(T1, rng)
            assert commutator(c, f).is_zero()


class TestPoisson:
    def test_zero_on_same(self):
        a = WeylElement.x(1, T1, SYMBOL)
        assert poisson_bracket(a, a).is_zero()

    def test_convention_constant(self):
        a = WeylElement.x(1, T1, SYMBOL)
        b = WeylElement.xi(1, T1, SYMBOL)
        got = poisson_bracket(a, b)
        assert got == WeylElement.from_scalar(conv.POISSON_CONSTANT, T1, SYMBOL)

    def test_leibniz_instance(self):
        a = WeylElement.x(1, T1, SYMBOL)
        sq = a * a
        b = WeylElement.xi(1, T1, SYMBOL)
        got = poisson_bracket(sq, b)
        want = a.scale(conv.POISSON_CONSTANT * Scalar(2))
        assert got == want

    def test_compatible_with_commutator(self):
        rng = random.Random(3)
        for _ in range(25):
            f, g = rand_element(T1, rng), rand_element(T1, rng)
            lhs = symbol(commutator(f, g).shift_hbar(-1))
            rhs = poisson_bracket(symbol(f), symbol(g)).scale(
                conv.POISSON_VS_COMMUTATOR)
            assert lhs == rhs


class TestSymbol:
    def test_drops_hbar(self):
        f = x(1) + WeylElement.xi(1, T1).shift_hbar(1)
        assert symbol(f) == WeylElement.x(1, T1, SYMBOL)

    def test_on_product(self):
        assert symbol(moyal_product(x(1), xi(1))) == \
            WeylElement.monomial(Monomial((1, 1)), T1, SYMBOL)

    def test_one(self):
        assert symbol(WeylElement.one(T1)) == WeylElement.one(T1, SYMBOL)

    def test_negative_power_error(self):
        t = Truncation(1, 4, (-1, 2))
        f = WeylElement.x(1, t).shift_hbar(-1)
        with pytest.raises(NegativeHbarPower):
            symbol(f)


class TestFiltration:
    def test_basic_degrees(self):
        assert filtration_degree(x(1)) == -1
        assert filtration_degree(WeylElement.one(T1)) == 0
        assert filtration_degree(
            WeylElement.one(T1).shift_hbar(1)) == -2

    def test_zero_raises(self):
        with pytest.raises(ZeroElement):
            filtration_degree(WeylElement.zero(T1))

    def test_subadditive_on_samples(self):
        rng = random.Random(4)
        for _ in range(20):
            f, g = rand_element(T1, rng), rand_element(T1, rng)
            fg = moyal_product(f, g)
            if fg.is_zero():
                continue
            assert filtration_degree(fg) <= \
                filtration_degree(f) + filtration_degree(g)


class TestDerivations:
    def test_ham_x_kills_x(self):
        D = Derivation(x(1))
        assert derivation_apply(D, x(1)).is_zero()

    def test_ham_x_on_xi(self):
        D = Derivation(x(1))
        got = derivation_apply(D, xi(1))
        # (1/i hbar)[x, xi] = (1/i hbar)(-i hbar) = -1: modulus-1 constant
        assert got == WeylElement.from_scalar(Scalar(-1), T1)

    def test_quadratic_acts_linearly(self):
        D = Derivation(x(1) * xi(1))
        got = derivation_apply(D, x(1))
        # direct expansion: (1/i hbar)[x xi, x] = x
        assert got == x(1)

    def test_central_equality(self):
        f = x(1) * xi(1)
        g = f + WeylElement.from_scalar(Scalar(5), T1)
        assert Derivation(f) == Derivation(g)

    def test_jacobi_on_randoms(self):
        rng = random.Random(5)
        for _ in range(10):
            a, b, c = (rand_element(T1, rng, max_deg=2) for _ in range(3))
            Da, Db = Derivation(a), Derivation(b)
            lhs = derivation_apply(bracket(Da, Db), c)
            rhs = derivation_apply(Da, derivation_apply(Db, c)) - \
                derivation_apply(Db, derivation_apply(Da, c))
            assert lhs == rhs


class TestSpBasis:
    def test_dimension(self):
        assert len(sp_basis(T1)) == 3
        assert len(sp_basis(T2)) == 10

    def test_cartan_first(self):
        basis = sp_basis(T2)
        for i in range(T2.d):
            ham = basis[i].hamiltonian
            [(m, _)] = ham.terms.items()
            assert m.cartan_weight(T2.d) == 0 and m.degree() == 2

    def test_closure_under_bracket(self):
        basis = sp_basis(T1)
        span = {}
        for D in basis:
            [(m, _)] = D.hamiltonian.terms.items()
            span[m] = True
        for D1, D2 in itertools.product(basis, repeat=2):
            B = bracket(D1, D2)
            for m, s in B.hamiltonian.terms.items():
                assert m in span and set(s.coeffs) <= {0}

    def test_pro_nilpotence_depth(self):
        # brackets of F_{-1} derivations strictly decrease filtration degree
        cubic = Derivation(WeylElement.monomial(Monomial((3, 0)), T1))
        quartic = Derivation(WeylElement.monomial(Monomial((2, 2)), T1))
        assert cubic.filtration_degree() == -1
        b = bracket(cubic, quartic)
        assert b.filtration_degree() < -1


def test_filtration_respected_by_derivations():
    rng = random.Random(6)
    for _ in range(10):
        f = rand_element(T1, rng, max_deg=3)
        g = rand_element(T1, rng, max_deg=2)
        if f.is_zero() or g.is_zero():
            continue
        D = Derivation(f)
        if D.hamiltonian.is_zero():
            continue
        out = derivation_apply(D, g)
        if out.is_zero():
            continue
        assert filtration_degree(out) <= \
            D.filtration_degree() + filtration_degree(g)

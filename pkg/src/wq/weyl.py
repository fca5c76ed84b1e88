"""The Weyl algebra W(V) for V = C^2d at truncation: Moyal-Weyl product,
filtration, symbol map, and the derivation Lie algebra with its sp(2d)
subalgebra.

Variables are indexed 0..2d-1: indices 0..d-1 are the x's, d..2d-1 the xi's.
A Monomial is a flat exponent tuple of length 2d.
"""

from __future__ import annotations

import itertools
from gmpy2 import mpq

from . import conventions as conv
from .errors import ContextMismatch, NegativeHbarPower, WQError, ZeroElement
from .scalars import HBarSeries, ONE, Scalar, Truncation, ZERO

WEYL = "weyl"
SYMBOL = "symbol"


class Monomial(tuple):
    """Exponent vector (alpha | beta) as a flat tuple; hashable, sortable."""

    @classmethod
    def unit(cls, nvars):
        return cls((0,) * nvars)

    @classmethod
    def gen(cls, i, nvars):
        e = [0] * nvars
        e[i] = 1
        return cls(e)

    def degree(self):
        return sum(self)

    def mul(self, other):
        return Monomial(a + b for a, b in zip(self, other))

    def diff(self, i):
        """d/dvar_i: returns (exponent, lowered monomial) or None."""
        if self[i] == 0:
            return None
        e = list(self)
        e[i] -= 1
        return self[i], Monomial(e)

    def alpha(self, d):
        return self[:d]

    def beta(self, d):
        return self[d:]

    def cartan_weight(self, d):
        """Eigenvalue under the Cartan derivations Ham(x_i xi_i): x counts +1,
        xi counts -1, summed over all pairs."""
        return sum(self[:d]) - sum(self[d:])

    def var_name(self, i, d):
        return "x%d" % (i + 1) if i < d else "xi%d" % (i - d + 1)

    def __str__(self):
        d = len(self) // 2
        parts = []
        for i, e in enumerate(self):
            if e == 1:
                parts.append(self.var_name(i, d))
            elif e > 1:
                parts.append("%s^%d" % (self.var_name(i, d), e))
        return "*".join(parts) if parts else "1"

    def to_json(self):
        d = len(self) // 2
        return {"alpha": list(self[:d]), "beta": list(self[d:])}

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(obj["alpha"]) + tuple(obj["beta"]))


def monomials_of_degree(nvars, deg):
    """All exponent tuples of total degree deg, lexicographically sorted."""
    if nvars == 1:
        yield Monomial((deg,))
        return
    for first in range(deg, -1, -1):
        for rest in monomials_of_degree(nvars - 1, deg - first):
            yield Monomial((first,) + tuple(rest))


def monomials_upto(nvars, max_deg):
    for deg in range(max_deg + 1):
        yield from monomials_of_degree(nvars, deg)


def count_monomials(nvars, deg):
    """Stars and bars: C(deg + nvars - 1, nvars - 1)."""
    import math

    return math.comb(deg + nvars - 1, nvars - 1)


# -- Moyal product on monomials, cached --------------------------------------

_MOYAL_CACHE = {}


def _falling(a, k):
    out = 1
    for j in range(k):
        out *= a - j
    return out


def _fact(k):
    out = 1
    for j in range(2, k + 1):
        out *= j
    return out


def _multi_indices_upto(bounds):
    ranges = [range(b + 1) for b in bounds]
    return itertools.product(*ranges)


def moyal_mono(m1: Monomial, m2: Monomial):
    """Moyal product of two monomials.

    Returns a list of (monomial, hbar_order, Scalar) triples; the sum
    terminates because each order differentiates both factors.
    """
    key = (m1, m2)
    hit = _MOYAL_CACHE.get(key)
    if hit is not None:
        return hit
    nvars = len(m1)
    d = nvars // 2
    a, b = m1[:d], m1[d:]
    c, e = m2[:d], m2[d:]
    out = []
    # mu differentiates xi of f and x of g; nu differentiates x of f, xi of g.
    for mu in _multi_indices_upto([min(bi, ci) for bi, ci in zip(b, c)]):
        for nu in _multi_indices_upto([min(ai, ei) for ai, ei in zip(a, e)]):
            n = sum(mu) + sum(nu)
            num = 1
            for i in range(d):
                num *= (_falling(a[i], nu[i]) * _falling(b[i], mu[i])
                        * _falling(c[i], mu[i]) * _falling(e[i], nu[i]))
                if num == 0:
                    break
            if num == 0:
                continue
            den = 1
            for i in range(d):
                den *= _fact(mu[i]) * _fact(nu[i])
            coeff = Scalar(mpq(num, den * (2 ** n)))
            if sum(nu) % 2:
                coeff = -coeff
            unit = conv.MOYAL_UNIT
            for _ in range(n):
                coeff = coeff * unit
            mono = Monomial(
                tuple(a[i] - nu[i] + c[i] - mu[i] for i in range(d))
                + tuple(b[i] - mu[i] + e[i] - nu[i] for i in range(d)))
            out.append((mono, n, coeff))
    _MOYAL_CACHE[key] = out
    return out


class WeylElement:
    """Finite monomial expansion with HBarSeries coefficients.

    ``context`` is 'weyl' (Moyal multiplication) or 'symbol' (commutative);
    values are immutable and truncation-canonical.
    """

    __slots__ = ("terms", "trunc", "context", "lossy")

    def __init__(self, terms, trunc: Truncation, context=WEYL, lossy=False):
        clean = {}
        for m, s in terms.items():
            if not s:
                continue
            if m.degree() > trunc.deg_cap:
                lossy = True
                continue
            lossy = lossy or s.lossy
            clean[m] = s
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "trunc", trunc)
        object.__setattr__(self, "context", context)
        object.__setattr__(self, "lossy", lossy)

    def __setattr__(self, *a):
        raise AttributeError("WeylElement is immutable")

    # -- constructors ---------------------------------------------------------
    @classmethod
    def zero(cls, trunc, context=WEYL):
        return cls({}, trunc, context)

    @classmethod
    def one(cls, trunc, context=WEYL):
        return cls({Monomial.unit(trunc.nvars): trunc.one_series()},
                   trunc, context)

    @classmethod
    def from_scalar(cls, c, trunc, context=WEYL):
        return cls({Monomial.unit(trunc.nvars):
                    HBarSeries.const(c, trunc.hbar_window)}, trunc, context)

    @classmethod
    def from_series(cls, s, trunc, context=WEYL):
        return cls({Monomial.unit(trunc.nvars): s}, trunc, context)

    @classmethod
    def x(cls, i, trunc, context=WEYL):
        if not 1 <= i <= trunc.d:
            raise WQError("x index out of range")
        return cls({Monomial.gen(i - 1, trunc.nvars): trunc.one_series()},
                   trunc, context)

    @classmethod
    def xi(cls, i, trunc, context=WEYL):
        if not 1 <= i <= trunc.d:
            raise WQError("xi index out of range")
        return cls({Monomial.gen(trunc.d + i - 1, trunc.nvars):
                    trunc.one_series()}, trunc, context)

    @classmethod
    def monomial(cls, m, trunc, context=WEYL, series=None):
        s = trunc.one_series() if series is None else series
        return cls({m: s}, trunc, context)

    # -- linear structure -----------------------------------------------------
    def _check(self, other):
        if self.context != other.context:
            raise ContextMismatch(
                "contexts differ: %s vs %s" % (self.context, other.context))
        if self.trunc != other.trunc:
            raise WQError("truncations differ")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for m, s in other.terms.items():
            out[m] = out[m] + s if m in out else s
        return WeylElement(out, self.trunc, self.context,
                           self.lossy or other.lossy)

    def __neg__(self):
        return WeylElement({m: -s for m, s in self.terms.items()},
                           self.trunc, self.context, self.lossy)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        if isinstance(c, Scalar):
            return WeylElement({m: s.scale(c) for m, s in self.terms.items()},
                               self.trunc, self.context, self.lossy)
        return WeylElement({m: s * c for m, s in self.terms.items()},
                           self.trunc, self.context, self.lossy)

    def shift_hbar(self, k):
        return WeylElement({m: s.shift(k) for m, s in self.terms.items()},
                           self.trunc, self.context, self.lossy)

    # -- multiplication -------------------------------------------------------
    def __mul__(self, other):
        self._check(other)
        if self.context == WEYL:
            return moyal_product(self, other)
        out = {}
        for m1, s1 in self.terms.items():
            for m2, s2 in other.terms.items():
                m = m1.mul(m2)
                s = s1 * s2
                out[m] = out[m] + s if m in out else s
        return WeylElement(out, self.trunc, self.context,
                           self.lossy or other.lossy)

    # -- queries ---------------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, WeylElement):
            return NotImplemented
        return (self.context == other.context and self.trunc == other.trunc
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.context,
                     tuple(sorted(self.terms.items(),
                                  key=lambda t: (t[0],)))))

    def coeff(self, m) -> HBarSeries:
        return self.terms.get(m, self.trunc.zero_series())

    def constant_series(self) -> HBarSeries:
        return self.coeff(Monomial.unit(self.trunc.nvars))

    def weight_components(self):
        """Split into weight-homogeneous parts: weight = degree + 2*hbar order."""
        out = {}
        for m, s in self.terms.items():
            for k, c in s.coeffs.items():
                w = m.degree() + conv.HBAR_WEIGHT * k
                blk = out.setdefault(w, {})
                blk.setdefault(m, {})[k] = c
        return {
            w: WeylElement({m: HBarSeries(ks, self.trunc.hbar_window)
                            for m, ks in blk.items()},
                           self.trunc, self.context)
            for w, blk in sorted(out.items())
        }

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (t[0].degree(), t[0]))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, s in self.sorted_terms():
            coeff = str(s)
            if m.degree() == 0:
                parts.append(coeff)
            elif s == self.trunc.one_series():
                parts.append(str(m))
            else:
                if ("+" in coeff[1:]) or ("-" in coeff[1:]) or "*" in coeff:
                    coeff = "(%s)" % coeff
                parts.append("%s*%s" % (coeff, m))
        return " + ".join(parts)

    __repr__ = __str__

    def to_json(self):
        return {
            "context": self.context,
            "terms": [{"monomial": m.to_json(), "coeff": s.to_json()}
                      for m, s in self.sorted_terms()],
        }


def moyal_product(f: WeylElement, g: WeylElement) -> WeylElement:
    """The Moyal-Weyl product; requires weyl context on both operands."""
    if f.context != WEYL or g.context != WEYL:
        raise ContextMismatch("moyal_product needs weyl-context operands")
    if f.trunc != g.trunc:
        raise WQError("truncations differ")
    out = {}
    for m1, s1 in f.terms.items():
        for m2, s2 in g.terms.items():
            s12 = s1 * s2
            for mono, n, c in moyal_mono(m1, m2):
                s = s12.shift(n).scale(c)
                if mono in out:
                    out[mono] = out[mono] + s
                else:
                    out[mono] = s
    return WeylElement(out, f.trunc, WEYL, f.lossy or g.lossy)


def commutator(f: WeylElement, g: WeylElement) -> WeylElement:
    """f*g - g*f; always divisible by hbar."""
    return moyal_product(f, g) - moyal_product(g, f)


def poisson_bracket(f: WeylElement, g: WeylElement) -> WeylElement:
    """Symbol-context Poisson bracket, normalized so that it equals
    sigma((1/hbar) commutator(f~, g~)) on the nose (constant c0 included)."""
    if f.context != SYMBOL or g.context != SYMBOL:
        raise ContextMismatch("poisson_bracket needs symbol-context operands")
    trunc = f.trunc
    d = trunc.d
    out = {}

    def accumulate(mono, s):
        if mono in out:
            out[mono] = out[mono] + s
        else:
            out[mono] = s

    for m1, s1 in f.terms.items():
        for m2, s2 in g.terms.items():
            s12 = (s1 * s2).scale(conv.POISSON_CONSTANT)
            for i in range(d):
                dx1 = m1.diff(i)
                dxi2 = m2.diff(d + i)
                if dx1 and dxi2:
                    c = Scalar(dx1[0] * dxi2[0])
                    accumulate(dx1[1].mul(dxi2[1]), s12.scale(c))
                dxi1 = m1.diff(d + i)
                dx2 = m2.diff(i)
                if dxi1 and dx2:
                    c = Scalar(-dxi1[0] * dx2[0])
                    accumulate(dxi1[1].mul(dx2[1]), s12.scale(c))
    return WeylElement(out, trunc, SYMBOL, f.lossy or g.lossy)


def symbol(f: WeylElement) -> WeylElement:
    """Set hbar = 0: keep hbar^0 coefficients, switch to symbol context."""
    bad = [m for m, s in f.terms.items()
           if any(k < 0 for k in s.coeffs)]
    if bad:
        raise NegativeHbarPower(
            "element has negative hbar powers on %s" % (str(bad[0]),))
    window = f.trunc.hbar_window
    out = {}
    for m, s in f.terms.items():
        c = s.coeff(0)
        if c:
            out[m] = HBarSeries.const(c, window)
    return WeylElement(out, f.trunc, SYMBOL, f.lossy)


def filtration_degree(f: WeylElement) -> int:
    """Least p with f in F_p W = Ihat^{-p}; linear generators sit in Ihat,
    hbar in Ihat^2."""
    if f.is_zero():
        raise ZeroElement("filtration degree of 0 is undefined")
    m = min(mono.degree() + conv.HBAR_WEIGHT * k
            for mono, s in f.terms.items() for k in s.coeffs)
    return -m


class Derivation:
    """A continuous C[[hbar]]-linear derivation of W, stored by a hamiltonian
    representative of (1/sqrt(-1) hbar) W with the constant (central) term
    dropped; equality is equality of normalized hamiltonians."""

    __slots__ = ("hamiltonian", "normalized")

    def __init__(self, hamiltonian: WeylElement):
        if hamiltonian.context != WEYL:
            raise ContextMismatch("hamiltonian must be weyl-context")
        unit = Monomial.unit(hamiltonian.trunc.nvars)
        terms = {m: s for m, s in hamiltonian.terms.items() if m != unit}
        object.__setattr__(self, "hamiltonian",
                           WeylElement(terms, hamiltonian.trunc, WEYL,
                                       hamiltonian.lossy))
        object.__setattr__(self, "normalized", True)

    def __setattr__(self, *a):
        raise AttributeError("Derivation is immutable")

    def __eq__(self, other):
        if not isinstance(other, Derivation):
            return NotImplemented
        return self.hamiltonian == other.hamiltonian

    def __hash__(self):
        return hash(self.hamiltonian)

    def __call__(self, g: WeylElement) -> WeylElement:
        return derivation_apply(self, g)

    def filtration_degree(self):
        # Ham of degree-k monomial acts with filtration degree k - 2.
        return filtration_degree(self.hamiltonian) + conv.HBAR_WEIGHT

    def __repr__(self):
        return "Ham(%s)" % self.hamiltonian


def derivation_apply(D: Derivation, g: WeylElement) -> WeylElement:
    """(1/sqrt(-1) hbar)[f, g]; exact because commutators are divisible by
    hbar.  Loss at the top of the window propagates via the lossy flag."""
    c = commutator(D.hamiltonian, g)
    return c.shift_hbar(-1).scale(Scalar(0, -1))  # 1/i = -i


def bracket(D1: Derivation, D2: Derivation) -> Derivation:
    """Lie bracket of derivations via hamiltonians: (1/i hbar)[f1, f2]."""
    c = commutator(D1.hamiltonian, D2.hamiltonian)
    return Derivation(c.shift_hbar(-1).scale(Scalar(0, -1)))


def sp_basis(trunc: Truncation):
    """The d(2d+1) quadratic-hamiltonian derivations spanning h = sp(2d),
    with the Cartan sub-list Ham(x_i xi_i) first."""
    nvars = trunc.nvars
    cartan, rest = [], []
    for m in monomials_of_degree(nvars, 2):
        D = Derivation(WeylElement.monomial(m, trunc))
        d = trunc.d
        is_cartan = any(
            m[i] == 1 and m[d + i] == 1 for i in range(d)) and m.degree() == 2 \
            and sum(1 for e in m if e) == 2 and m.cartan_weight(d) == 0 \
            and all((m[i] == m[d + i]) for i in range(d))
        (cartan if is_cartan else rest).append(D)
    return cartan + rest


def cartan_count(trunc):
    return trunc.d

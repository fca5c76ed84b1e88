"""Hochschild chains over W or its symbol algebra, the differentials b and B,
the Lie-derivative action of derivations, and the idempotent Euler class /
Chern character.

Chains are *normalized*: an elementary tensor with a constant factor in any
position past the zeroth is zero.  On the normalized complex the cyclic
shuffle formula for B satisfies B^2 = 0 and bB + Bb = 0 exactly, which is
the graded-commutator reading adopted for [B,b] = 0.
"""

from __future__ import annotations

import itertools
from gmpy2 import mpq

from . import conventions as conv
from .errors import (ContextMismatch, DegreeCapExceeded, NotIdempotent,
                     WQError)
from .scalars import HBarSeries, Scalar, Truncation
from .weyl import (Derivation, Monomial, SYMBOL, WEYL, WeylElement,
                   moyal_mono)


def _mono_product_terms(m1, m2, context):
    """Product of two monomials as (monomial, hbar_order, Scalar) triples."""
    if context == WEYL:
        return moyal_mono(m1, m2)
    return [(m1.mul(m2), 0, Scalar(1))]


class TensorChain:
    """Linear combination of elementary tensors (w_0, ..., w_p) of monomials
    with a single HBarSeries coefficient per tuple; degree p chains."""

    __slots__ = ("degree", "terms", "trunc", "context", "lossy")

    def __init__(self, degree, terms, trunc: Truncation, context=WEYL,
                 lossy=False):
        clean = {}
        for key, s in terms.items():
            if len(key) != degree + 1:
                raise WQError("tensor length does not match degree")
            if not s:
                continue
            if any(m.degree() == 0 for m in key[1:]):
                continue  # normalized complex
            if any(m.degree() > trunc.deg_cap for m in key):
                lossy = True
                continue
            lossy = lossy or s.lossy
            clean[key] = s
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "trunc", trunc)
        object.__setattr__(self, "context", context)
        object.__setattr__(self, "lossy", lossy)

    def __setattr__(self, *a):
        raise AttributeError("TensorChain is immutable")

    # -- constructors ---------------------------------------------------------
    @classmethod
    def zero(cls, degree, trunc, context=WEYL):
        return cls(degree, {}, trunc, context)

    @classmethod
    def elementary(cls, factors, context=None):
        """Chain from a tuple of WeylElements, expanded to monomial tuples."""
        if not factors:
            raise WQError("need at least one factor")
        trunc = factors[0].trunc
        ctx = context or factors[0].context
        for w in factors:
            if w.context != ctx:
                raise ContextMismatch("mixed factor contexts")
        terms = {(): trunc.one_series()}
        for w in factors:
            new = {}
            for key, s in terms.items():
                for m, ms in w.terms.items():
                    k2 = key + (m,)
                    s2 = s * ms
                    new[k2] = new[k2] + s2 if k2 in new else s2
            terms = new
        lossy = any(w.lossy for w in factors)
        return cls(len(factors) - 1, terms, trunc, ctx, lossy)

    # -- linear structure -----------------------------------------------------
    def _check(self, other):
        if (self.context != other.context or self.trunc != other.trunc
                or self.degree != other.degree):
            raise WQError("incompatible chains")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for k, s in other.terms.items():
            out[k] = out[k] + s if k in out else s
        return TensorChain(self.degree, out, self.trunc, self.context,
                           self.lossy or other.lossy)

    def __neg__(self):
        return TensorChain(self.degree,
                           {k: -s for k, s in self.terms.items()},
                           self.trunc, self.context, self.lossy)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        if isinstance(c, Scalar):
            return TensorChain(self.degree,
                               {k: s.scale(c) for k, s in self.terms.items()},
                               self.trunc, self.context, self.lossy)
        return TensorChain(self.degree,
                           {k: s * c for k, s in self.terms.items()},
                           self.trunc, self.context, self.lossy)

    def shift_hbar(self, k):
        return TensorChain(self.degree,
                           {key: s.shift(k) for key, s in self.terms.items()},
                           self.trunc, self.context, self.lossy)

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, TensorChain):
            return NotImplemented
        return (self.degree == other.degree and self.context == other.context
                and self.terms == other.terms)

    def map_factors(self, fn):
        """Apply fn: Monomial -> WeylElement to one factor at a time (Leibniz);
        returns the summed chain."""
        out = TensorChain.zero(self.degree, self.trunc, self.context)
        for key, s in self.terms.items():
            for j, m in enumerate(key):
                img = fn(m)
                if img is None or img.is_zero():
                    continue
                terms = {}
                for m2, ms in img.terms.items():
                    k2 = key[:j] + (m2,) + key[j + 1:]
                    s2 = s * ms
                    terms[k2] = terms[k2] + s2 if k2 in terms else s2
                out = out + TensorChain(self.degree, terms, self.trunc,
                                        self.context, img.lossy)
        return out

    def weight_of_key(self, key, k):
        return sum(m.degree() for m in key) + conv.HBAR_WEIGHT * k

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: t[0])

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for key, s in self.sorted_terms():
            coeff = str(s)
            if ("+" in coeff[1:]) or ("-" in coeff[1:]) or "*" in coeff:
                coeff = "(%s)" % coeff
            tensor = " (x) ".join(str(m) for m in key)
            parts.append("%s * [%s]" % (coeff, tensor))
        return " + ".join(parts)

    __repr__ = __str__

    def to_json(self):
        return {
            "context": self.context,
            "degree": self.degree,
            "terms": [{"coeff": s.to_json(),
                       "factors": [m.to_json() for m in key]}
                      for key, s in self.sorted_terms()],
        }

    @classmethod
    def from_json(cls, obj, trunc):
        terms = {}
        for t in obj["terms"]:
            key = tuple(Monomial.from_json(m) for m in t["factors"])
            terms[key] = HBarSeries.from_json(t["coeff"])
        return cls(obj["degree"], terms, trunc, obj["context"])


def hochschild_b(c: TensorChain) -> TensorChain:
    """The standard Hochschild boundary; degree 0 maps to 0."""
    p = c.degree
    if p == 0:
        return TensorChain.zero(0, c.trunc, c.context)
    out = {}

    def accumulate(key, s):
        if any(m.degree() == 0 for m in key[1:]):
            return
        out[key] = out[key] + s if key in out else s

    for key, s in c.terms.items():
        for i in range(p):
            sign = Scalar(1 if i % 2 == 0 else -1)
            for mono, n, cc in _mono_product_terms(key[i], key[i + 1],
                                                   c.context):
                k2 = key[:i] + (mono,) + key[i + 2:]
                accumulate(k2, s.shift(n).scale(cc * sign))
        sign = Scalar(1 if p % 2 == 0 else -1)
        for mono, n, cc in _mono_product_terms(key[p], key[0], c.context):
            k2 = (mono,) + key[1:p]
            accumulate(k2, s.shift(n).scale(cc * sign))
    return TensorChain(p - 1, out, c.trunc, c.context, c.lossy)


def connes_B(c: TensorChain, degree_cap=None) -> TensorChain:
    """Connes' B via the cyclic shuffle formula with signs (-1)^{pi}."""
    p = c.degree
    if degree_cap is not None and p + 1 > degree_cap:
        raise DegreeCapExceeded("B would leave the chain-degree window")
    unit = Monomial.unit(c.trunc.nvars)
    out = {}
    for key, s in c.terms.items():
        for i in range(p + 1):
            sign = Scalar(1 if (p * i) % 2 == 0 else -1)
            k2 = (unit,) + key[i:] + key[:i]
            if any(m.degree() == 0 for m in k2[1:]):
                continue
            s2 = s.scale(sign)
            out[k2] = out[k2] + s2 if k2 in out else s2
    return TensorChain(p + 1, out, c.trunc, c.context, c.lossy)


def chain_lie_derivative(D: Derivation, c: TensorChain) -> TensorChain:
    """Leibniz action sum_i w_0 (x) ... (x) D(w_i) (x) ... (x) w_p."""
    if c.context != WEYL:
        raise ContextMismatch("lie derivative acts on weyl-context chains")
    trunc = c.trunc

    def fn(m):
        from .weyl import derivation_apply
        return derivation_apply(D, WeylElement.monomial(m, trunc))

    return c.map_factors(fn)


def symbol_lie_derivative(D: Derivation, c: TensorChain) -> TensorChain:
    """Transported g-action on symbol chains: factors move by the symbol of
    the derivation (the classical hamiltonian vector field)."""
    if c.context != SYMBOL:
        raise ContextMismatch("symbol lie derivative needs symbol context")
    trunc = c.trunc

    def fn(m):
        from .weyl import derivation_apply, symbol
        return symbol(derivation_apply(D, WeylElement.monomial(m, trunc)))

    return c.map_factors(fn)


def symbol_chain(c: TensorChain) -> TensorChain:
    """Apply the symbol map factorwise: keep hbar^0-coefficient tuples."""
    out = {}
    for key, s in c.terms.items():
        c0 = s.coeff(0)
        if c0:
            out[key] = HBarSeries.const(c0, c.trunc.hbar_window)
    return TensorChain(c.degree, out, c.trunc, SYMBOL, c.lossy)


class CyclicChain:
    """A finite-window inhomogeneous chain in the (b,B)-totalization;
    components indexed by Hochschild degree, all of one parity."""

    __slots__ = ("components", "variant", "window", "trunc", "context")

    def __init__(self, components, variant, window, trunc, context=WEYL):
        if variant not in ("negative", "periodic"):
            raise WQError("variant must be negative or periodic")
        comp = {q: ch for q, ch in components.items() if not ch.is_zero()}
        parities = {q % 2 for q in comp}
        if len(parities) > 1:
            raise WQError("components must share parity")
        for q, ch in comp.items():
            if not window[0] <= q <= window[1]:
                raise DegreeCapExceeded("component degree outside window")
            if ch.degree != q:
                raise WQError("component degree mismatch")
        object.__setattr__(self, "components", comp)
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "window", window)
        object.__setattr__(self, "trunc", trunc)
        object.__setattr__(self, "context", context)

    def __setattr__(self, *a):
        raise AttributeError("CyclicChain is immutable")

    def component(self, q) -> TensorChain:
        return self.components.get(
            q, TensorChain.zero(q, self.trunc, self.context))

    def is_zero(self):
        return not self.components

    def b_plus_B(self, drop_overflow=False) -> "CyclicChain":
        """Total differential; B out of the top of the window raises unless
        drop_overflow (checks are then per-window statements)."""
        acc = {}

        def add(q, ch):
            if ch.is_zero():
                return
            acc[q] = acc[q] + ch if q in acc else ch

        for q, ch in self.components.items():
            if q >= 1:
                add(q - 1, hochschild_b(ch))
            try:
                add(q + 1, connes_B(ch, degree_cap=self.window[1]))
            except DegreeCapExceeded:
                if not drop_overflow:
                    raise
                if not connes_B(ch).is_zero():
                    # overflow dropped; per-window check semantics
                    pass
        return CyclicChain(acc, self.variant, self.window, self.trunc,
                           self.context)


class IdempotentMatrix:
    """n x n matrix of WeylElements with e*e = e checked exactly."""

    __slots__ = ("n", "entries", "trunc", "context")

    def __init__(self, entries):
        n = len(entries)
        if any(len(row) != n for row in entries):
            raise WQError("matrix must be square")
        if n == 0:
            raise WQError("empty matrix")
        trunc = entries[0][0].trunc
        context = entries[0][0].context
        for row in entries:
            for w in row:
                if w.trunc != trunc or w.context != context:
                    raise WQError("mixed entries")
        square = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                acc = WeylElement.zero(trunc, context)
                for k in range(n):
                    acc = acc + entries[i][k] * entries[k][j]
                square[i][j] = acc
        for i in range(n):
            for j in range(n):
                if square[i][j] != entries[i][j]:
                    raise NotIdempotent("e*e differs from e at (%d,%d)"
                                        % (i, j))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "trunc", trunc)
        object.__setattr__(self, "context", context)

    def __setattr__(self, *a):
        raise AttributeError("IdempotentMatrix is immutable")

    def shifted(self):
        """e - 1/2 (entrywise on the diagonal)."""
        half = WeylElement.from_scalar(Scalar(conv.CHERN_SHIFT),
                                       self.trunc, self.context)
        out = []
        for i, row in enumerate(self.entries):
            out.append([w - half if i == j else w
                        for j, w in enumerate(row)])
        return out


def _generalized_trace(matrices, trunc, context) -> TensorChain:
    """tr(M_0 (x) ... (x) M_p): sum over index cycles of entry tensors."""
    p = len(matrices) - 1
    n = len(matrices[0])
    out = TensorChain.zero(p, trunc, context)
    for idx in itertools.product(range(n), repeat=p + 1):
        factors = [matrices[j][idx[j]][idx[(j + 1) % (p + 1)]]
                   for j in range(p + 1)]
        if any(w.is_zero() for w in factors):
            continue
        out = out + TensorChain.elementary(factors, context)
    return out


def euler_class_idempotent(e: IdempotentMatrix) -> TensorChain:
    """Degree-0 component of the Dennis trace: the chain trace(e)."""
    return _generalized_trace([e.entries], e.trunc, e.context)


def chern_character_idempotent(e: IdempotentMatrix,
                               degree_window) -> CyclicChain:
    """Negative cyclic Chern character of an idempotent, standard
    normalization from the conventions record; validated by the (b+B)-cycle
    condition rather than trusted."""
    lo, hi = degree_window
    comps = {}
    if lo <= 0:
        comps[0] = _generalized_trace([e.entries], e.trunc, e.context)
    shifted = e.shifted()
    k = 1
    while 2 * k <= hi:
        mats = [shifted] + [e.entries] * (2 * k)
        ch = _generalized_trace(mats, e.trunc, e.context).scale(
            conv.CHERN_COEFF(k))
        comps[2 * k] = ch
        k += 1
    return CyclicChain(comps, "negative", degree_window, e.trunc, e.context)

"""The Koszul complex of W, its comparison maps into Hochschild chains and
formal de Rham forms, the fundamental cycle, and the HKR map.

Wedge subsets are sorted tuples of variable indices (0..d-1 the x's, d..2d-1
the xi's).  All sign conventions live in wq.conventions.
"""

from __future__ import annotations

import itertools
from gmpy2 import mpq

from . import conventions as conv
from .errors import ContextMismatch, DegreeCapExceeded, WQError
from .scalars import HBarSeries, Scalar, Truncation
from .weyl import Monomial, SYMBOL, WEYL, WeylElement, moyal_mono

SYMBOL_COEFF = "symbol"
WEYL_COEFF = "weyl-coefficient"


def wedge_sign(S, T):
    """Sign and merged subset for e_S ^ e_T (None if they intersect)."""
    if set(S) & set(T):
        return None
    inv = 0
    for t in T:
        inv += sum(1 for s in S if s > t)
    merged = tuple(sorted(S + T))
    return (1 if inv % 2 == 0 else -1), merged


def _perm_sign(perm):
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


class _GradedTerms:
    """Shared implementation for KoszulElement / FormalForm: terms keyed by
    (monomial, sorted index subset) with HBarSeries coefficients."""

    __slots__ = ("degree", "terms", "trunc", "lossy")

    def __init__(self, degree, terms, trunc, lossy=False):
        clean = {}
        for (m, S), s in terms.items():
            if len(S) != degree:
                raise WQError("subset size does not match degree")
            if tuple(sorted(S)) != tuple(S):
                raise WQError("subset not sorted")
            if not s:
                continue
            if m.degree() > trunc.deg_cap:
                lossy = True
                continue
            lossy = lossy or s.lossy
            clean[(m, S)] = s
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "trunc", trunc)
        object.__setattr__(self, "lossy", lossy)

    def __setattr__(self, *a):
        raise AttributeError("immutable")

    def _like(self, degree, terms, lossy=False):
        return type(self)(degree, terms, self.trunc, self.lossy or lossy)

    def __add__(self, other):
        if self.degree != other.degree or self.trunc != other.trunc:
            raise WQError("incompatible degrees")
        out = dict(self.terms)
        for k, s in other.terms.items():
            out[k] = out[k] + s if k in out else s
        return self._like(self.degree, out, other.lossy)

    def __neg__(self):
        return self._like(self.degree,
                          {k: -s for k, s in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        if isinstance(c, Scalar):
            return self._like(self.degree,
                              {k: s.scale(c) for k, s in self.terms.items()})
        return self._like(self.degree,
                          {k: s * c for k, s in self.terms.items()})

    def shift_hbar(self, k):
        return self._like(self.degree,
                          {key: s.shift(k) for key, s in self.terms.items()})

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.degree == other.degree and self.terms == other.terms

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (t[0][1], t[0][0]))

    def __str__(self):
        if not self.terms:
            return "0"
        d = self.trunc.d
        parts = []
        for (m, S), s in self.sorted_terms():
            coeff = str(s)
            if ("+" in coeff[1:]) or ("-" in coeff[1:]) or "*" in coeff:
                coeff = "(%s)" % coeff
            wedge = "^".join(("dx%d" % (i + 1)) if i < d else
                             ("dxi%d" % (i - d + 1)) for i in S)
            body = str(m) if not wedge else "%s %s" % (m, wedge)
            parts.append("%s*[%s]" % (coeff, body))
        return " + ".join(parts)

    __repr__ = __str__

    def to_json(self):
        return {
            "degree": self.degree,
            "terms": [{"coeff": s.to_json(),
                       "monomial": m.to_json(), "indices": list(S)}
                      for (m, S), s in self.sorted_terms()],
        }


class KoszulElement(_GradedTerms):
    """Element of W (x) Lambda^q V*; degree q in [0, 2d]."""

    @classmethod
    def zero(cls, degree, trunc):
        return cls(degree, {}, trunc)

    @classmethod
    def basis(cls, m, S, trunc, series=None):
        s = trunc.one_series() if series is None else series
        return cls(len(S), {(m, tuple(S)): s}, trunc)

    def weight_of_key(self, key, k):
        m, S = key
        return m.degree() + len(S) + conv.HBAR_WEIGHT * k


class FormalForm(_GradedTerms):
    """Formal de Rham form: polynomial (or hbar-series) coefficients times
    a wedge of the coordinate 1-forms."""

    context = SYMBOL_COEFF  # class-level default; coefficients may carry hbar

    @classmethod
    def zero(cls, degree, trunc):
        return cls(degree, {}, trunc)

    @classmethod
    def basis(cls, m, S, trunc, series=None):
        s = trunc.one_series() if series is None else series
        return cls(len(S), {(m, tuple(S)): s}, trunc)

    def weight_of_key(self, key, k):
        m, S = key
        return m.degree() - len(S) + conv.HBAR_WEIGHT * k

    def contract_vector(self, j):
        """Interior product with the coordinate vector of index j."""
        out = {}
        for (m, S), s in self.terms.items():
            if j not in S:
                continue
            pos = S.index(j)
            sign = Scalar(1 if pos % 2 == 0 else -1)
            key = (m, S[:pos] + S[pos + 1:])
            s2 = s.scale(sign)
            out[key] = out[key] + s2 if key in out else s2
        return FormalForm(self.degree - 1, out, self.trunc, self.lossy)

    def contract_covector(self, v):
        """iota-hat: contraction by the sharp of the covector of index v,
        scaled per the conventions record."""
        d = self.trunc.d
        if v < d:
            j, sgn = v + d, conv.SHARP_X_SIGN
        else:
            j, sgn = v - d, conv.SHARP_XI_SIGN
        c = conv.CONTRACTION_SCALE * Scalar(sgn)
        return self.contract_vector(j).scale(c)

    def wedge(self, other: "FormalForm") -> "FormalForm":
        if self.trunc != other.trunc:
            raise WQError("truncations differ")
        out = {}
        for (m1, S1), s1 in self.terms.items():
            for (m2, S2), s2 in other.terms.items():
                ws = wedge_sign(S1, S2)
                if ws is None:
                    continue
                sign, S = ws
                key = (m1.mul(m2), S)
                s = (s1 * s2).scale(Scalar(sign))
                out[key] = out[key] + s if key in out else s
        return FormalForm(self.degree + other.degree, out, self.trunc,
                          self.lossy or other.lossy)


def omega_form(trunc: Truncation) -> FormalForm:
    """The symplectic form sum_i dx_i ^ dxi_i."""
    unit = Monomial.unit(trunc.nvars)
    terms = {(unit, (i, trunc.d + i)): trunc.one_series()
             for i in range(trunc.d)}
    return FormalForm(2, terms, trunc)


def omega_power(trunc: Truncation) -> FormalForm:
    """omega^d, the top form (d! times the full wedge, with the sort sign)."""
    out = omega_form(trunc)
    for _ in range(trunc.d - 1):
        out = out.wedge(omega_form(trunc))
    return out


def koszul_differential(k: KoszulElement) -> KoszulElement:
    """d(f (x) v_1^...^v_q) = sum_i KOSZUL_SIGN(i) [f, v_i] (x) (drop i)."""
    if k.degree < 1:
        raise WQError("koszul differential needs degree >= 1")
    nvars = k.trunc.nvars
    out = {}
    for (f, S), s in k.terms.items():
        for i, v in enumerate(S):
            sign = Scalar(conv.KOSZUL_SIGN(i + 1))
            vm = Monomial.gen(v, nvars)
            S2 = S[:i] + S[i + 1:]
            for mono, n, c in moyal_mono(f, vm):
                key = (mono, S2)
                s2 = s.shift(n).scale(c * sign)
                out[key] = out[key] + s2 if key in out else s2
            for mono, n, c in moyal_mono(vm, f):
                key = (mono, S2)
                s2 = s.shift(n).scale(-c * sign)
                out[key] = out[key] + s2 if key in out else s2
    return KoszulElement(k.degree - 1, out, k.trunc, k.lossy)


def koszul_to_hochschild(k: KoszulElement):
    """f (x) v_1^...^v_q -> f (x) Alt(v_1 (x) ... (x) v_q), Alt unnormalized."""
    from .chains import TensorChain

    nvars = k.trunc.nvars
    out = {}
    for (f, S), s in k.terms.items():
        gens = [Monomial.gen(v, nvars) for v in S]
        for perm in itertools.permutations(range(len(S))):
            sign = Scalar(_perm_sign(perm))
            key = (f,) + tuple(gens[i] for i in perm)
            s2 = s.scale(sign)
            out[key] = out[key] + s2 if key in out else s2
    return TensorChain(k.degree, out, k.trunc, WEYL, k.lossy)


def koszul_to_forms(k: KoszulElement) -> FormalForm:
    """f (x) v_1^...^v_q -> f * iota-hat_{v_1}...iota-hat_{v_q}(omega^d);
    intertwines the Koszul differential with hbar*d exactly."""
    trunc = k.trunc
    top = omega_power(trunc)
    out = FormalForm.zero(2 * trunc.d - k.degree, trunc)
    for (f, S), s in k.terms.items():
        form = top
        for v in reversed(S):  # listed order outermost first
            form = form.contract_covector(v)
        piece = {}
        for (m, T), fs in form.terms.items():
            key = (f.mul(m), T)
            s2 = fs * s
            piece[key] = piece[key] + s2 if key in piece else s2
        out = out + FormalForm(out.degree, piece, trunc)
    return out


def forms_to_koszul(w: FormalForm) -> KoszulElement:
    """Inverse of koszul_to_forms (basis-to-basis bijection)."""
    trunc = w.trunc
    d = trunc.d
    full = tuple(range(2 * d))
    out = {}
    for (m, T), s in w.terms.items():
        S = tuple(sorted((j + d) % (2 * d) for j in full if j not in T))
        probe = koszul_to_forms(KoszulElement.basis(Monomial.unit(2 * d),
                                                    S, trunc))
        [(key, ps)] = probe.terms.items()
        pm, pT = key
        if pT != T or pm.degree() != 0:
            raise WQError("contraction bookkeeping broke")
        _, c = ps.single_power()
        key2 = (m, S)
        s2 = s.scale(c.inv())
        out[key2] = out[key2] + s2 if key2 in out else s2
    return KoszulElement(2 * d - w.degree, out, trunc, w.lossy)


def exterior_derivative(w: FormalForm) -> FormalForm:
    """Standard formal exterior derivative; d(d(w)) = 0."""
    nvars = w.trunc.nvars
    out = {}
    for (m, S), s in w.terms.items():
        for v in range(nvars):
            dm = m.diff(v)
            if dm is None or v in S:
                continue
            e, m2 = dm
            before = sum(1 for t in S if t < v)
            sign = Scalar(e if before % 2 == 0 else -e)
            key = (m2, tuple(sorted(S + (v,))))
            s2 = s.scale(sign)
            out[key] = out[key] + s2 if key in out else s2
    return FormalForm(w.degree + 1, out, w.trunc, w.lossy)


def hkr_map(c) -> FormalForm:
    """a_0 (x) ... (x) a_p -> (1/p!) a_0 da_1 ^ ... ^ da_p over the symbol
    algebra; kills Hochschild boundaries and intertwines B with d."""
    if c.context != SYMBOL:
        raise ContextMismatch("hkr_map needs a symbol-context chain")
    trunc = c.trunc
    nvars = trunc.nvars
    p = c.degree
    fact = 1
    for j in range(2, p + 1):
        fact *= j
    norm = Scalar(mpq(1, fact))
    out = FormalForm.zero(p, trunc)
    for key, s in c.terms.items():
        form = FormalForm.basis(key[0], (), trunc, s.scale(norm))
        for m in key[1:]:
            one_form_terms = {}
            for v in range(nvars):
                dm = m.diff(v)
                if dm is None:
                    continue
                e, m2 = dm
                one_form_terms[(m2, (v,))] = HBarSeries.const(
                    Scalar(e), trunc.hbar_window)
            form = form.wedge(FormalForm(1, one_form_terms, trunc))
        if form.degree == p and not form.is_zero():
            out = out + form
    return out


def hamiltonian_field(D) -> list:
    """Components of the hamiltonian vector field of a derivation on the
    symbol algebra: entry j is the polynomial v(coord_j).  For monomial
    hamiltonians this is exact (brackets with linear elements have a single
    Moyal order)."""
    from .weyl import derivation_apply, symbol

    trunc = D.hamiltonian.trunc
    nvars = trunc.nvars
    out = []
    for j in range(nvars):
        coord = WeylElement.monomial(Monomial.gen(j, nvars), trunc)
        out.append(symbol(derivation_apply(D, coord)))
    return out


def form_contract_field(w: FormalForm, field) -> FormalForm:
    """Interior product with a polynomial vector field (list of symbol
    elements indexed by variable)."""
    trunc = w.trunc
    out = {}
    for (m, S), s in w.terms.items():
        for pos, j in enumerate(S):
            comp = field[j]
            if comp.is_zero():
                continue
            sign = Scalar(1 if pos % 2 == 0 else -1)
            S2 = S[:pos] + S[pos + 1:]
            for fm, fs in comp.terms.items():
                key = (m.mul(fm), S2)
                s2 = (s * fs).scale(sign)
                out[key] = out[key] + s2 if key in out else s2
    return FormalForm(w.degree - 1, out, trunc, w.lossy)


def form_lie_derivative(D, w: FormalForm) -> FormalForm:
    """Lie derivative along the hamiltonian vector field, via Cartan's magic
    formula L = iota d + d iota; commutes with d by construction."""
    field = hamiltonian_field(D)
    a = form_contract_field(exterior_derivative(w), field)
    if w.degree >= 1:
        b = exterior_derivative(form_contract_field(w, field))
        return a + b
    return a


def fundamental_cycle(trunc: Truncation, degree_cap=None):
    """Alt(1 (x) x_1 (x) ... (x) x_d (x) xi_1 (x) ... (x) xi_d), the canonical
    degree-2d cycle."""
    from .chains import TensorChain

    if degree_cap is not None and 2 * trunc.d > degree_cap:
        raise DegreeCapExceeded("fundamental cycle needs degree window >= 2d")
    nvars = trunc.nvars
    unit = Monomial.unit(nvars)
    gens = [Monomial.gen(i, nvars) for i in range(nvars)]
    out = {}
    for perm in itertools.permutations(range(nvars)):
        sign = Scalar(_perm_sign(perm))
        key = (unit,) + tuple(gens[i] for i in perm)
        out[key] = HBarSeries.const(sign, trunc.hbar_window)
    return TensorChain(2 * trunc.d, out, trunc, WEYL)


def fundamental_koszul_preimage(trunc: Truncation) -> KoszulElement:
    """The Koszul element mapping to the fundamental cycle under
    koszul_to_hochschild: the full sorted wedge with coefficient 1."""
    full = tuple(range(2 * trunc.d))
    return KoszulElement.basis(Monomial.unit(2 * trunc.d), full, trunc)

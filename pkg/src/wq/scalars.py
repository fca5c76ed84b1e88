"""Exact Gaussian-rational arithmetic and truncated Laurent series in hbar.

Everything downstream computes over Q(i); there is no floating point anywhere
in the package.  HBarSeries is a finite window [v_min, v_max] of hbar
exponents; arithmetic truncates to the window and records coefficient loss in
a sticky ``lossy`` flag instead of raising.
"""

from __future__ import annotations

import re as _re
from dataclasses import dataclass

from gmpy2 import mpq

from .errors import WQError

_ZERO_Q = mpq(0)


def _q(x) -> mpq:
    if isinstance(x, mpq.__class__ if not isinstance(mpq, type) else mpq):
        return x
    return mpq(x)


class Scalar:
    """An element a + b*i of Q(i), stored as two reduced rationals."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = mpq(re)
        self.im = mpq(im)

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        return Scalar(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        return Scalar(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return Scalar(-self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, Scalar):
            return Scalar(
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        return Scalar(self.re * mpq(other), self.im * mpq(other))

    __rmul__ = __mul__

    def inv(self):
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise ZeroDivisionError("inverse of zero Scalar")
        return Scalar(self.re / n, -self.im / n)

    def __truediv__(self, other):
        if isinstance(other, Scalar):
            return self * other.inv()
        return Scalar(self.re / mpq(other), self.im / mpq(other))

    def conj(self):
        return Scalar(self.re, -self.im)

    # -- structure ----------------------------------------------------------
    def is_zero(self):
        return self.re == 0 and self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def sort_key(self):
        return (self.re, self.im)

    # -- io -----------------------------------------------------------------
    def __repr__(self):
        return "Scalar(%s)" % self

    def __str__(self):
        if self.im == 0:
            return _fmt_q(self.re)
        if self.re == 0:
            return _fmt_qi(self.im)
        sign = "+" if self.im > 0 else "-"
        return "%s%s%s" % (_fmt_q(self.re), sign, _fmt_qi(abs(self.im)))

    def to_json(self):
        return {"re": _fmt_q(self.re), "im": _fmt_q(self.im)}

    @classmethod
    def from_json(cls, obj):
        return cls(mpq(obj["re"]), mpq(obj["im"]))


def _fmt_q(q):
    return str(q)


def _fmt_qi(q):
    return "i" if q == 1 else "%si" % q


ZERO = Scalar(0)
ONE = Scalar(1)
I = Scalar(0, 1)
MINUS_I = Scalar(0, -1)
HALF = Scalar(mpq(1, 2))


class HBarSeries:
    """Truncated Laurent polynomial in hbar with Scalar coefficients.

    ``coeffs`` maps exponent -> nonzero Scalar, all exponents inside
    ``window = (v_min, v_max)``.  Values are immutable; ``lossy`` records that
    nonzero coefficients were dropped somewhere in this value's history.
    """

    __slots__ = ("window", "coeffs", "lossy")

    def __init__(self, coeffs, window, lossy=False):
        vmin, vmax = window
        if vmin > vmax:
            raise WQError("empty hbar window %r" % (window,))
        clean = {}
        for k, c in coeffs.items():
            if c.is_zero():
                continue
            if k < vmin or k > vmax:
                lossy = True
                continue
            clean[k] = c
        object.__setattr__(self, "window", (vmin, vmax))
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "lossy", lossy)

    def __setattr__(self, *a):
        raise AttributeError("HBarSeries is immutable")

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, window):
        return cls({}, window)

    @classmethod
    def const(cls, c, window):
        if not isinstance(c, Scalar):
            c = Scalar(c)
        return cls({0: c}, window)

    @classmethod
    def hbar(cls, window, k=1, c=ONE):
        return cls({k: c}, window)

    # -- ring operations (result window = intersection) ----------------------
    def _join(self, other):
        w = (max(self.window[0], other.window[0]),
             min(self.window[1], other.window[1]))
        if w[0] > w[1]:
            raise WQError("incompatible hbar windows %r, %r"
                          % (self.window, other.window))
        return w

    def __add__(self, other):
        w = self._join(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, ZERO) + c
        return HBarSeries(out, w, self.lossy or other.lossy)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return HBarSeries({k: -c for k, c in self.coeffs.items()},
                          self.window, self.lossy)

    def __mul__(self, other):
        if isinstance(other, Scalar):
            return self.scale(other)
        w = self._join(other)
        out = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                k = k1 + k2
                out[k] = out.get(k, ZERO) + c1 * c2
        return HBarSeries(out, w, self.lossy or other.lossy)

    def scale(self, c: Scalar):
        return HBarSeries({k: v * c for k, v in self.coeffs.items()},
                          self.window, self.lossy)

    def shift(self, k: int):
        """Multiplication by hbar**k; exponents leaving the window are dropped
        (recorded in the result's lossy flag)."""
        return HBarSeries({kk + k: c for kk, c in self.coeffs.items()},
                          self.window, self.lossy)

    def truncate(self, window):
        return HBarSeries(self.coeffs, window, self.lossy)

    # -- queries -------------------------------------------------------------
    def is_zero(self):
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, HBarSeries):
            return NotImplemented
        return self.window == other.window and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.window, tuple(sorted(self.coeffs.items(),
                                               key=lambda t: t[0]))))

    def vmin_order(self):
        """Least exponent carrying a nonzero coefficient (None if zero)."""
        return min(self.coeffs) if self.coeffs else None

    def coeff(self, k) -> Scalar:
        return self.coeffs.get(k, ZERO)

    def single_power(self):
        """(k, scalar) if the series is c*hbar**k, else raise."""
        if len(self.coeffs) != 1:
            raise WQError("series is not a single hbar power: %s" % self)
        [(k, c)] = self.coeffs.items()
        return k, c

    def collapse(self) -> Scalar:
        """Evaluate at hbar = 1 (used only on single-power values by callers
        that track the implied weight)."""
        out = ZERO
        for c in self.coeffs.values():
            out = out + c
        return out

    # -- io -------------------------------------------------------------------
    def __repr__(self):
        return "HBarSeries(%s)" % self

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k in sorted(self.coeffs):
            c = self.coeffs[k]
            parts.append(_fmt_term(c, k))
        s = parts[0]
        for p in parts[1:]:
            s += " - " + p[1:] if p.startswith("-") else " + " + p
        return s

    def to_json(self):
        return {
            "window": [self.window[0], self.window[1]],
            "coeffs": {str(k): c.to_json()
                       for k, c in sorted(self.coeffs.items())},
        }

    @classmethod
    def from_json(cls, obj):
        return cls({int(k): Scalar.from_json(v)
                    for k, v in obj["coeffs"].items()},
                   tuple(obj["window"]))


def _fmt_term(c: Scalar, k: int) -> str:
    if k == 0:
        s = str(c)
        return "(%s)" % s if (c.re != 0 and c.im != 0) else s
    h = "h" if k == 1 else "h^%d" % k
    if c == ONE:
        return h
    if c == Scalar(-1):
        return "-" + h
    s = str(c)
    if c.re != 0 and c.im != 0:
        s = "(%s)" % s
    return "%s*%s" % (s, h)


# -- text form parser ---------------------------------------------------------

_TOKEN = _re.compile(r"\s*(\d+/\d+|\d+|[ih^*+\-()])")


def _tokenize(text):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise WQError("bad series syntax at %r" % text[pos:])
        out.append(m.group(1))
        pos = m.end()
    return out


def parse_series(text: str, window) -> HBarSeries:
    """Parse the CLI text form, e.g. ``3/2*h^-1 + (1+2i) + 5*h^2``."""
    toks = _tokenize(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take():
        nonlocal pos
        t = toks[pos]
        pos += 1
        return t

    def parse_int(allow_sign=False):
        sign = 1
        if allow_sign and peek() in ("+", "-"):
            sign = -1 if take() == "-" else 1
        t = take()
        if not _re.fullmatch(r"\d+/\d+|\d+", t):
            raise WQError("expected number, got %r" % t)
        return sign * mpq(t)

    def parse_complex_body():
        # inside parens: a, a+bi, a-bi, bi
        first = parse_int(allow_sign=True)
        if peek() == "i":
            take()
            return Scalar(0, first)
        if peek() in ("+", "-"):
            sgn = -1 if take() == "-" else 1
            mag = mpq(1)
            if _re.fullmatch(r"\d+/\d+|\d+", peek() or ""):
                mag = mpq(take())
            if take() != "i":
                raise WQError("expected i in complex literal")
            return Scalar(first, sgn * mag)
        return Scalar(first)

    def parse_term(sign):
        coeff = Scalar(sign)
        k = 0
        seen = False
        while True:
            t = peek()
            if t == "(":
                take()
                coeff = coeff * parse_complex_body()
                if take() != ")":
                    raise WQError("unbalanced parens")
                seen = True
            elif t is not None and _re.fullmatch(r"\d+/\d+|\d+", t):
                q = mpq(take())
                if peek() == "i":
                    take()
                    coeff = coeff * Scalar(0, q)
                else:
                    coeff = coeff * Scalar(q)
                seen = True
            elif t == "i":
                take()
                coeff = coeff * I
                seen = True
            elif t == "h":
                take()
                e = 1
                if peek() == "^":
                    take()
                    neg = False
                    if peek() == "-":
                        take()
                        neg = True
                    e = int(parse_int())
                    if neg:
                        e = -e
                k += e
                seen = True
            elif t == "*":
                take()
            else:
                break
        if not seen:
            raise WQError("empty term in series")
        return k, coeff

    out = {}
    sign = 1
    if peek() in ("+", "-"):
        sign = -1 if take() == "-" else 1
    while True:
        k, c = parse_term(sign)
        out[k] = out.get(k, ZERO) + c
        if peek() is None:
            break
        t = take()
        if t == "+":
            sign = 1
        elif t == "-":
            sign = -1
        else:
            raise WQError("expected + or - between terms, got %r" % t)
    return HBarSeries(out, window)


@dataclass(frozen=True)
class Truncation:
    """Global caps: half-dimension d, max total polynomial degree, hbar window."""

    d: int
    deg_cap: int
    hbar_window: tuple

    def __post_init__(self):
        if self.d < 1:
            raise WQError("d must be >= 1")
        if self.deg_cap < 0:
            raise WQError("deg_cap must be >= 0")
        vmin, vmax = self.hbar_window
        if vmin > vmax:
            raise WQError("empty hbar window")

    @property
    def nvars(self):
        return 2 * self.d

    def zero_series(self):
        return HBarSeries.zero(self.hbar_window)

    def one_series(self):
        return HBarSeries.const(ONE, self.hbar_window)

    def series(self, coeffs):
        return HBarSeries(coeffs, self.hbar_window)

    def key(self):
        return (self.d, self.deg_cap, self.hbar_window)

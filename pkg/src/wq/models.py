"""Materialized finite complexes and the sparse maps between them.

Two presentations are used, both decomposing every complex by the weight
grading (polynomial degree + 2 * hbar order):

* weight blocks: honest finite pieces of the uninverted complexes; a basis
  label carries its hbar exponent;
* stable (tuple-class) blocks: the hbar-inverted complexes at a parity.
  Since C[hbar^-1, hbar]] is a field and every map in sight is weight
  homogeneous, multiplication by hbar identifies consecutive weight blocks
  and the inverted block is faithfully presented by tuple classes with the
  hbar power implied by weight; matrices live over Q(i).

Snapshots follow the chain convention: diffs[q] maps degree q to q-1.  For
form complexes the degree index is q = 2d - (form degree), so hbar*d lowers
it like every other differential.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
from dataclasses import dataclass, field

from . import conventions as conv
from .chains import (TensorChain, chain_lie_derivative, connes_B,
                     hochschild_b, symbol_chain, symbol_lie_derivative)
from .errors import WQError
from .koszul import (FormalForm, KoszulElement, exterior_derivative,
                     form_lie_derivative, forms_to_koszul, hkr_map,
                     koszul_differential, koszul_to_forms,
                     koszul_to_hochschild)
from .linalg import SparseMatrix
from .scalars import HBarSeries, ONE, Scalar, Truncation
from .weyl import Derivation, Monomial, SYMBOL, WEYL, WeylElement, \
    monomials_of_degree

HW, HS, HSTABLE = "hochschild-weyl", "hochschild-symbol", "hochschild-stable"
KZ, FW, FSTABLE = "koszul", "forms-weight", "forms-stable"
CYC = "cyclic-total"


@dataclass
class ComplexSnapshot:
    kind: str
    key: tuple
    trunc: Truncation
    degrees: list
    labels: dict
    diffs: dict
    cartan: dict
    complete: bool
    notes: str = ""
    index: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {q: {lab: i for i, lab in enumerate(self.labels[q])}
                          for q in self.degrees}

    def dim(self, q):
        return len(self.labels.get(q, ()))

    def diff(self, q) -> SparseMatrix:
        m = self.diffs.get(q)
        if m is None:
            lower = self.dim(q - 1) if (q - 1) in self.labels else 0
            m = SparseMatrix(lower, self.dim(q))
        return m

    def validate(self):
        for q in self.degrees:
            if (q - 1) in self.diffs or q in self.diffs:
                if (q + 1) in self.diffs and q in self.diffs:
                    comp = self.diffs[q].matmul(self.diffs[q + 1])
                    if not comp.is_zero():
                        raise WQError("d o d != 0 at degree %d of %r"
                                      % (q + 1, self.key))
        return self

    def to_json(self):
        return {
            "kind": self.kind,
            "key": repr(self.key),
            "degrees": self.degrees,
            "dims": {str(q): self.dim(q) for q in self.degrees},
            "diffs": {str(q): m.to_json() for q, m in self.diffs.items()},
            "complete": self.complete,
        }


# -- basis enumeration --------------------------------------------------------

_TUPLE_CACHE = {}


def chain_keys(nvars, q, total_deg):
    """Monomial tuples (m_0..m_q), interior factors nonconstant, total degree
    exactly total_deg; deterministic order."""
    ck = (nvars, q, total_deg)
    hit = _TUPLE_CACHE.get(ck)
    if hit is not None:
        return hit
    out = []
    if q == 0:
        out = [(m,) for m in monomials_of_degree(nvars, total_deg)]
    elif total_deg >= q:
        for e0 in range(total_deg - q + 1):
            for rest in _compositions(total_deg - e0, q):
                slots = [list(monomials_of_degree(nvars, e0))] + [
                    list(monomials_of_degree(nvars, e)) for e in rest]
                out.extend(itertools.product(*slots))
    _TUPLE_CACHE[ck] = out
    return out


def _compositions(total, parts):
    """Compositions of total into `parts` positive integers, lexicographic."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _chain_cartan(key, d):
    return tuple(sum(m[i] - m[d + i] for m in key) for i in range(d))


def _wedge_cartan(m, S, d):
    out = []
    for i in range(d):
        c = m[i] - m[d + i]
        if i in S:
            c += 1
        if (d + i) in S:
            c -= 1
        out.append(c)
    return tuple(out)


# -- object <-> vector codecs ---------------------------------------------------


def label_to_object(snap, q, label):
    t = snap.trunc
    if snap.kind in (HW, HS):
        ctx = WEYL if snap.kind == HW else SYMBOL
        key, k = (label if snap.kind == HW else (label, 0))
        return TensorChain(q, {key: HBarSeries.hbar(t.hbar_window, k=k)},
                           t, ctx)
    if snap.kind == HSTABLE:
        ctx = snap.key[-1]
        return TensorChain(q, {label: t.one_series()}, t, ctx)
    if snap.kind == KZ:
        m, S, k = label
        return KoszulElement.basis(m, S, t,
                                   HBarSeries.hbar(t.hbar_window, k=k))
    if snap.kind == FW:
        m, S, k = label
        return FormalForm.basis(m, S, t, HBarSeries.hbar(t.hbar_window, k=k))
    if snap.kind == FSTABLE:
        m, S = label
        return FormalForm.basis(m, S, t)
    raise WQError("no codec for %s" % snap.kind)


def object_to_vector(snap, q, obj, strict=True):
    """Decompose an algebra object in the snapshot basis at degree q.
    Returns (vector, dropped) where dropped lists out-of-basis labels."""
    idx = snap.index.get(q, {})
    vec, dropped = {}, []

    def put(label, c):
        if not c:
            return
        i = idx.get(label)
        if i is None:
            dropped.append(label)
            return
        vec[i] = vec.get(i, Scalar(0)) + c
        if not vec[i]:
            del vec[i]

    if snap.kind in (HW, HS, HSTABLE):
        for key, s in obj.terms.items():
            if snap.kind == HW:
                for k, c in s.coeffs.items():
                    put((key, k), c)
            elif snap.kind == HS:
                for k, c in s.coeffs.items():
                    if k != 0:
                        raise WQError("symbol chain with hbar power")
                    put(key, c)
            else:
                put(key, s.collapse())
    elif snap.kind in (KZ, FW):
        for (m, S), s in obj.terms.items():
            for k, c in s.coeffs.items():
                put((m, S, k), c)
    elif snap.kind == FSTABLE:
        for (m, S), s in obj.terms.items():
            put((m, S), s.collapse())
    else:
        raise WQError("no codec for %s" % snap.kind)
    if strict and dropped and snap.complete:
        raise WQError("complete block %r dropped labels %r"
                      % (snap.key, dropped[:3]))
    return vec, dropped


def build_map(src, tgt, qmap, fn, strict=True, col_filter=None):
    """Matrices of label |-> fn(object) between snapshots; returns
    (dict q -> SparseMatrix, dropped_any).  col_filter(q, label) restricts
    the domain (out-of-domain columns are zero)."""
    out = {}
    dropped_any = False
    for q in src.degrees:
        q2 = qmap(q)
        if q2 not in tgt.index:
            # target degree absent: map must vanish there
            for lab in src.labels[q]:
                if col_filter and not col_filter(q, lab):
                    continue
                img = fn(label_to_object(src, q, lab), q)
                if img is not None and not img.is_zero():
                    vec, dropped = object_to_vector(
                        tgt, q2, img, strict=False)
                    if vec:
                        raise WQError("map leaves target degrees at q=%d" % q)
            continue
        M = SparseMatrix(tgt.dim(q2), src.dim(q))
        for j, lab in enumerate(src.labels[q]):
            if col_filter and not col_filter(q, lab):
                continue
            img = fn(label_to_object(src, q, lab), q)
            if img is None or img.is_zero():
                continue
            vec, dropped = object_to_vector(tgt, q2, img, strict=strict)
            dropped_any = dropped_any or bool(dropped)
            M.set_column(j, vec)
        out[q] = M
    return out, dropped_any


# -- snapshot builders ----------------------------------------------------------


def hochschild_weight_snapshot(trunc, weight, context=WEYL, qmax=None):
    """Weight block of the (normalized) Hochschild complex of W (or of the
    symbol algebra, where the block sits at hbar order 0)."""
    d = trunc.d
    nvars = trunc.nvars
    vmin, vmax = trunc.hbar_window
    if qmax is None:
        qmax = weight
    degrees = list(range(qmax + 1))
    labels, cartan = {}, {}
    complete = (trunc.deg_cap >= weight and qmax >= weight)
    if context == WEYL:
        complete = complete and vmin <= 0 and vmax >= weight // 2
    for q in degrees:
        labs = []
        if context == WEYL:
            for D in range(q, weight + 1):
                if (weight - D) % 2:
                    continue
                k = (weight - D) // 2
                if k < max(0, vmin) or k > vmax or D > trunc.deg_cap:
                    continue
                labs.extend((key, k) for key in chain_keys(nvars, q, D))
        else:
            if weight >= q and weight <= trunc.deg_cap:
                labs.extend(chain_keys(nvars, q, weight))
        labels[q] = labs
        cartan[q] = [_chain_cartan(lab[0] if context == WEYL else lab, d)
                     for lab in labs]
    snap = ComplexSnapshot(
        HW if context == WEYL else HS,
        ("hochschild", context, weight, trunc.key(), qmax),
        trunc, degrees, labels, {}, cartan, complete)
    diffs, _ = build_map(snap, snap, lambda q: q - 1,
                         lambda obj, q: hochschild_b(obj) if q else None)
    snap.diffs = {q: m for q, m in diffs.items() if q >= 1}
    return snap.validate()


def hochschild_stable_snapshot(trunc, parity, dcap, context=WEYL):
    """Tuple-class block of the hbar-inverted Hochschild complex at a parity
    (hbar = 1 with the power implied by weight); closed under b and B because
    top-degree tuples are all-linear with unit leading factor."""
    nvars, d = trunc.nvars, trunc.d
    degrees = list(range(dcap + 1))
    labels, cartan = {}, {}
    for q in degrees:
        labs = []
        for D in range(q, dcap + 1):
            if (D - parity) % 2:
                continue
            labs.extend(chain_keys(nvars, q, D))
        labels[q] = labs
        cartan[q] = [_chain_cartan(lab, d) for lab in labs]
    complete = trunc.deg_cap >= dcap and trunc.hbar_window[1] >= dcap // 2
    snap = ComplexSnapshot(
        HSTABLE, ("hochschild-stable", context, parity, dcap, trunc.key(),
                  context),
        trunc, degrees, labels, {}, cartan, complete)
    diffs, _ = build_map(snap, snap, lambda q: q - 1,
                         lambda obj, q: hochschild_b(obj) if q else None)
    snap.diffs = {q: m for q, m in diffs.items() if q >= 1}
    return snap.validate()


def koszul_weight_snapshot(trunc, weight):
    nvars, d = trunc.nvars, trunc.d
    vmin, vmax = trunc.hbar_window
    degrees = list(range(2 * d + 1))
    labels, cartan = {}, {}
    for q in degrees:
        labs = []
        for S in itertools.combinations(range(nvars), q):
            D = weight - q
            for k in range(max(0, vmin), vmax + 1):
                dm = D - 2 * k
                if dm < 0 or dm > trunc.deg_cap:
                    continue
                labs.extend((m, S, k) for m in monomials_of_degree(nvars, dm))
        labels[q] = labs
        cartan[q] = [_wedge_cartan(m, S, d) for (m, S, k) in labs]
    complete = trunc.deg_cap >= weight and vmin <= 0 and \
        vmax >= max(0, weight // 2)
    snap = ComplexSnapshot(
        KZ, ("koszul", weight, trunc.key()), trunc, degrees, labels, {},
        cartan, complete)
    diffs, _ = build_map(snap, snap, lambda q: q - 1,
                         lambda obj, q: koszul_differential(obj) if q else None)
    snap.diffs = {q: m for q, m in diffs.items() if q >= 1}
    return snap.validate()


def forms_weight_snapshot(trunc, fw):
    """Weight block of (Omega^[[hbar]], hbar d) in chain orientation
    q = 2d - form degree; form weight = coeff degree - form degree + 2k."""
    nvars, d = trunc.nvars, trunc.d
    vmin, vmax = trunc.hbar_window
    degrees = list(range(2 * d + 1))
    labels, cartan = {}, {}
    for q in degrees:
        phi = 2 * d - q
        labs = []
        for S in itertools.combinations(range(nvars), phi):
            for k in range(max(0, vmin), vmax + 1):
                dm = fw + phi - 2 * k
                if dm < 0 or dm > trunc.deg_cap:
                    continue
                labs.extend((m, S, k) for m in monomials_of_degree(nvars, dm))
        labels[q] = labs
        cartan[q] = [_wedge_cartan(m, S, d) for (m, S, k) in labs]
    complete = trunc.deg_cap >= fw + 2 * d and vmin <= 0 and \
        vmax >= max(0, (fw + 2 * d + 1) // 2 + 1)
    snap = ComplexSnapshot(
        FW, ("forms", fw, trunc.key()), trunc, degrees, labels, {},
        cartan, complete)

    def hbar_d(obj, q):
        if q == 0:
            return None
        return exterior_derivative(obj).shift_hbar(1)

    diffs, _ = build_map(snap, snap, lambda q: q - 1, hbar_d)
    snap.diffs = {q: m for q, m in diffs.items() if q >= 1}
    return snap.validate()


def forms_stable_snapshot(trunc, parity, coeff_cap):
    """Tuple-class block of the Laurent-coefficient de Rham complex at a
    parity of (coeff degree + form degree); differential is d (hbar = 1)."""
    nvars, d = trunc.nvars, trunc.d
    degrees = list(range(2 * d + 1))
    labels, cartan = {}, {}
    for q in degrees:
        phi = 2 * d - q
        labs = []
        for S in itertools.combinations(range(nvars), phi):
            for dm in range(coeff_cap + 1):
                if (dm + phi - parity) % 2:
                    continue
                labs.extend((m, S) for m in monomials_of_degree(nvars, dm))
        labels[q] = labs
        cartan[q] = [_wedge_cartan(m, S, d) for (m, S) in labs]
    complete = trunc.deg_cap >= coeff_cap
    snap = ComplexSnapshot(
        FSTABLE, ("forms-stable", parity, coeff_cap, trunc.key()),
        trunc, degrees, labels, {}, cartan, complete)
    diffs, _ = build_map(snap, snap, lambda q: q - 1,
                         lambda obj, q: exterior_derivative(obj) if q else None)
    snap.diffs = {q: m for q, m in diffs.items() if q >= 1}
    return snap.validate()


def assemble_cyclic(trunc, variant, total_parity, degree_window, weight,
                    context=WEYL):
    """Materialize the windowed (b+B)-totalization of the negative or
    periodic cyclic complex on one weight block.  Total degree n collects the
    Hochschild degrees q = n (mod 2) admitted by the variant; basis labels
    are (q, chain label)."""
    if variant not in ("negative", "periodic"):
        raise WQError("variant must be negative or periodic")
    nlo, nhi = degree_window
    qmax = weight if context == WEYL else weight
    base = hochschild_weight_snapshot(trunc, weight, context, qmax=qmax)
    Bmats = B_matrices(base)
    degrees = [n for n in range(nlo, nhi + 1) if (n - total_parity) % 2 == 0]
    labels, cartan = {}, {}
    for n in degrees:
        qlo = max(0, n) if variant == "negative" else 0
        labs, carts = [], []
        for q in range(qlo, base.degrees[-1] + 1):
            if (q - n) % 2:
                continue
            labs.extend((q, lab) for lab in base.labels[q])
            carts.extend(base.cartan[q])
        labels[n] = labs
        cartan[n] = carts
    snap = ComplexSnapshot(
        CYC, ("cyclic", variant, total_parity, degree_window, weight,
              trunc.key(), context),
        trunc, degrees, labels, {}, cartan, base.complete)
    diffs = {}
    for n in degrees:
        if (n - 1) not in snap.index:
            continue
        M = SparseMatrix(snap.dim(n - 1), snap.dim(n))
        tgt_idx = snap.index[n - 1]
        for j, (q, lab) in enumerate(snap.labels[n]):
            i0 = base.index[q][lab]
            if q >= 1 and (q - 1, ) != ():
                bcol = base.diff(q).column(i0)
                for r, s in bcol.items():
                    tl = (q - 1, base.labels[q - 1][r])
                    if tl in tgt_idx:
                        M.add_entry(tgt_idx[tl], j, s)
            Bcol = Bmats[q].column(i0) if q in Bmats else {}
            for r, s in Bcol.items():
                tl = (q + 1, base.labels[q + 1][r])
                if tl in tgt_idx:
                    M.add_entry(tgt_idx[tl], j, s)
        diffs[n] = M
    snap.diffs = diffs
    return snap.validate()


# -- map builders ---------------------------------------------------------------


def B_matrices(snap):
    """Connes' B within one snapshot (degree q -> q+1)."""
    out = {}
    top = snap.degrees[-1]
    for q in snap.degrees:
        if q + 1 > top:
            # closed at the top: B vanishes there (unit leading factor);
            # assert rather than silently drop
            for lab in snap.labels[q]:
                obj = label_to_object(snap, q, lab)
                if not connes_B(obj).is_zero():
                    raise WQError("B overflows snapshot %r at q=%d"
                                  % (snap.key, q))
            continue
        M = SparseMatrix(snap.dim(q + 1), snap.dim(q))
        for j, lab in enumerate(snap.labels[q]):
            img = connes_B(label_to_object(snap, q, lab))
            if img.is_zero():
                continue
            vec, _ = object_to_vector(snap, q + 1, img)
            M.set_column(j, vec)
        out[q] = M
    return out


def lie_matrices(src, D: Derivation, tgt=None):
    """Matrices of the Lie-derivative action of a derivation; tgt defaults to
    src (weight-preserving actions); for weight models with weight-shifting
    hamiltonians pass the shifted-weight snapshot."""
    tgt = tgt or src
    if src.kind in (HW, HSTABLE):
        fn = lambda obj, q: chain_lie_derivative(D, obj)
    elif src.kind == HS:
        fn = lambda obj, q: symbol_lie_derivative(D, obj)
    elif src.kind in (FW, FSTABLE):
        fn = lambda obj, q: form_lie_derivative(D, obj)
    elif src.kind == KZ:
        raise WQError("no general g-action on the Koszul model")
    else:
        raise WQError("no action on %s" % src.kind)
    mats, _ = build_map(src, tgt, lambda q: q, fn)
    return mats


def hbar_shift_matrices(src, tgt):
    """Multiplication by hbar: weight-w block into the weight-(w+2) block."""
    def fn(obj, q):
        return obj.shift_hbar(1)

    mats, _ = build_map(src, tgt, lambda q: q, fn)
    return mats


def iota_matrices(weight_snap, stable_snap):
    """Localization: a weight block of CC(W) into the stable (inverted)
    block, i.e. hbar = 1 relabeling."""
    mats, _ = build_map(weight_snap, stable_snap, lambda q: q,
                        lambda obj, q: obj)
    return mats


def sigma_matrices(weyl_snap, symbol_snap):
    """Factorwise symbol map from a weyl weight block onto the symbol block
    of the same weight (the hbar-order-0 part)."""
    mats, _ = build_map(weyl_snap, symbol_snap, lambda q: q,
                        lambda obj, q: symbol_chain(obj))
    return mats


def j_matrices(forms_snap, chain_snap, coeff_cap=None):
    """The quasi-isomorphism J = koszul_to_hochschild o koszul_to_forms^{-1}
    from the forms model into the chains model.  coeff_cap restricts the
    domain to form labels whose Koszul preimage stays inside the chain cap
    (coefficient degree + 2d <= chain degree cap)."""
    def fn(obj, q):
        return koszul_to_hochschild(forms_to_koszul(obj))

    col_filter = None
    if coeff_cap is not None:
        def col_filter(q, lab):
            return lab[0].degree() <= coeff_cap

    mats, _ = build_map(forms_snap, chain_snap, lambda q: q, fn,
                        col_filter=col_filter)
    return mats


def hkr_matrices(symbol_snap, forms_snap):
    """HKR from symbol chains to forms: chain degree q lands in form degree
    q, i.e. snapshot degree 2d - q on the forms side."""
    d = symbol_snap.trunc.d

    def fn(obj, q):
        return hkr_map(obj)

    mats, _ = build_map(symbol_snap, forms_snap, lambda q: 2 * d - q, fn)
    return mats


def koszul_comparison_matrices(kz_snap, chain_snap, forms_snap):
    """Both comparison maps out of a Koszul weight block: to Hochschild
    chains (same degree) and to forms (Koszul q sits at form degree 2d-q,
    snapshot degree q on the forms side)."""
    to_ch, _ = build_map(kz_snap, chain_snap, lambda q: q,
                         lambda obj, q: koszul_to_hochschild(obj))
    to_fm, _ = build_map(kz_snap, forms_snap, lambda q: q,
                         lambda obj, q: koszul_to_forms(obj))
    return to_ch, to_fm


# -- snapshot construction front door + cache ------------------------------------


def snapshot(complex_spec, weight, trunc, **kw):
    """Front door used by the CLI and the cache: complex_spec in
    {'hochschild', 'hochschild-symbol', 'koszul', 'forms', 'cyclic-',
    'cyclic-per'}."""
    if complex_spec == "hochschild":
        return hochschild_weight_snapshot(trunc, weight, WEYL, **kw)
    if complex_spec == "hochschild-symbol":
        return hochschild_weight_snapshot(trunc, weight, SYMBOL, **kw)
    if complex_spec == "koszul":
        return koszul_weight_snapshot(trunc, weight)
    if complex_spec == "forms":
        return forms_weight_snapshot(trunc, weight)
    if complex_spec in ("cyclic-", "cyclic-per"):
        variant = "negative" if complex_spec == "cyclic-" else "periodic"
        window = kw.pop("degree_window", (0, weight))
        parity = kw.pop("total_parity", weight % 2)
        return assemble_cyclic(trunc, variant, parity, window, weight, **kw)
    raise WQError("unknown complex spec %r" % complex_spec)


def cached_snapshot(cache_dir, complex_spec, weight, trunc, **kw):
    """Disk cache for snapshots; advisory and regenerable."""
    if not cache_dir:
        return snapshot(complex_spec, weight, trunc, **kw)
    tag = hashlib.sha256(repr((complex_spec, weight, trunc.key(),
                               sorted(kw.items()))).encode()).hexdigest()[:24]
    path = os.path.join(cache_dir, "snap-%s.json" % tag)
    snap = snapshot(complex_spec, weight, trunc, **kw)
    try:
        if os.path.exists(path):
            with open(path) as fh:
                stored = json.load(fh)
            if stored.get("key") == repr(snap.key):
                for q, mj in stored["diffs"].items():
                    if SparseMatrix.from_json(mj) != snap.diff(int(q)):
                        raise WQError("stale cache %s" % path)
        else:
            os.makedirs(cache_dir, exist_ok=True)
            with open(path, "w") as fh:
                json.dump(snap.to_json(), fh)
    except (OSError, ValueError):
        pass
    return snap

"""Exact sparse linear algebra over Q(i).

Column-major sparse matrices (column dict of row dicts) because block maps
are built one basis vector at a time.  Elimination is exact over the field,
with sparsity-guided deterministic pivoting: pivot rows are chosen by
(fill, row id), pivot columns in natural order, so identical inputs always
produce identical echelon forms, kernels and particular solutions.
"""

from __future__ import annotations

from .errors import NoSolution, WQError
from .scalars import ONE, Scalar, ZERO


class SparseMatrix:
    __slots__ = ("nrows", "ncols", "cols")

    def __init__(self, nrows, ncols, cols=None):
        self.nrows = nrows
        self.ncols = ncols
        self.cols = {} if cols is None else cols

    @classmethod
    def identity(cls, n):
        return cls(n, n, {j: {j: ONE} for j in range(n)})

    @classmethod
    def zero(cls, nrows, ncols):
        return cls(nrows, ncols)

    def copy(self):
        return SparseMatrix(self.nrows, self.ncols,
                            {c: dict(col) for c, col in self.cols.items()})

    # -- entry access ---------------------------------------------------------
    def add_entry(self, r, c, s: Scalar):
        if not s:
            return
        col = self.cols.setdefault(c, {})
        v = col.get(r)
        v = s if v is None else v + s
        if v:
            col[r] = v
        else:
            del col[r]
            if not col:
                del self.cols[c]

    def set_column(self, c, vec):
        vec = {r: s for r, s in vec.items() if s}
        if vec:
            self.cols[c] = vec
        elif c in self.cols:
            del self.cols[c]

    def column(self, c):
        return self.cols.get(c, {})

    def get(self, r, c) -> Scalar:
        return self.cols.get(c, {}).get(r, ZERO)

    def nnz(self):
        return sum(len(col) for col in self.cols.values())

    def is_zero(self):
        return not self.cols

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (self.nrows == other.nrows and self.ncols == other.ncols
                and self.cols == other.cols)

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise WQError("shape mismatch")
        out = self.copy()
        for c, col in other.cols.items():
            for r, s in col.items():
                out.add_entry(r, c, s)
        return out

    def __sub__(self, other):
        return self + other.scale(Scalar(-1))

    def scale(self, s: Scalar):
        if not s:
            return SparseMatrix(self.nrows, self.ncols)
        return SparseMatrix(self.nrows, self.ncols,
                            {c: {r: v * s for r, v in col.items()}
                             for c, col in self.cols.items()})

    def mul_vec(self, v: dict) -> dict:
        out = {}
        for c, s in v.items():
            col = self.cols.get(c)
            if not col or not s:
                continue
            for r, a in col.items():
                acc = out.get(r, ZERO) + a * s
                if acc:
                    out[r] = acc
                elif r in out:
                    del out[r]
        return out

    def matmul(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise WQError("shape mismatch in matmul")
        out = SparseMatrix(self.nrows, other.ncols)
        for c, col in other.cols.items():
            vec = self.mul_vec(col)
            if vec:
                out.cols[c] = vec
        return out

    def to_rows(self):
        rows = {}
        for c, col in self.cols.items():
            for r, s in col.items():
                rows.setdefault(r, {})[c] = s
        return rows

    def transpose(self):
        out = SparseMatrix(self.ncols, self.nrows)
        for c, col in self.cols.items():
            for r, s in col.items():
                out.cols.setdefault(r, {})[c] = s
        return out

    def __repr__(self):
        return "SparseMatrix(%dx%d, nnz=%d)" % (self.nrows, self.ncols,
                                                self.nnz())

    # -- io (snapshot cache format) -------------------------------------------
    def to_json(self):
        entries = []
        for c in sorted(self.cols):
            for r in sorted(self.cols[c]):
                s = self.cols[c][r]
                entries.append([r, c, s.to_json()])
        return {"rows": self.nrows, "cols": self.ncols, "entries": entries}

    @classmethod
    def from_json(cls, obj):
        out = cls(obj["rows"], obj["cols"])
        for r, c, s in obj["entries"]:
            out.add_entry(r, c, Scalar.from_json(s))
        return out


class _Eliminator:
    """Row-echelon machine with full reduction and an index from columns to
    live rows; rhs columns ride along."""

    def __init__(self, rows, ncols, rhs=None):
        # rows: dict rowid -> dict col -> Scalar; empty rows are kept, they
        # may carry a nonzero rhs (inconsistency witnesses)
        self.rows = {r: dict(row) for r, row in rows.items()}
        self.ncols = ncols
        self.rhs = {} if rhs is None else {r: dict(v) for r, v in rhs.items()}
        self.col_rows = {}
        for r, row in self.rows.items():
            for c in row:
                self.col_rows.setdefault(c, set()).add(r)
        self.pivots = {}   # col -> rowid
        self.pivot_of_row = {}

    def _plain_rhs(self, r):
        return self.rhs.get(r, {})

    def _axpy(self, target, source, factor):
        """rows[target] -= factor * rows[source]; updates the column index."""
        trow = self.rows[target]
        for c, v in self.rows[source].items():
            cur = trow.get(c, ZERO) - factor * v
            if cur:
                if c not in trow:
                    self.col_rows.setdefault(c, set()).add(target)
                trow[c] = cur
            elif c in trow:
                del trow[c]
                self.col_rows[c].discard(target)
        srhs = self.rhs.get(source)
        if srhs:
            trhs = self.rhs.setdefault(target, {})
            for c, v in srhs.items():
                cur = trhs.get(c, ZERO) - factor * v
                if cur:
                    trhs[c] = cur
                elif c in trhs:
                    del trhs[c]

    def run(self):
        for col in range(self.ncols):
            live = self.col_rows.get(col)
            if not live:
                continue
            cands = [r for r in live
                     if r not in self.pivot_of_row and self.rows[r].get(col)]
            if not cands:
                continue
            piv = min(cands, key=lambda r: (len(self.rows[r]), r))
            inv = self.rows[piv][col].inv()
            self.rows[piv] = {c: v * inv for c, v in self.rows[piv].items()}
            if piv in self.rhs:
                self.rhs[piv] = {c: v * inv for c, v in self.rhs[piv].items()}
            others = [r for r in live if r != piv and self.rows[r].get(col)]
            for r in others:
                self._axpy(r, piv, self.rows[r][col])
            self.pivots[col] = piv
            self.pivot_of_row[piv] = col
        return self


def rank(A: SparseMatrix) -> int:
    e = _Eliminator(A.to_rows(), A.ncols).run()
    return len(e.pivots)


def nullspace(A: SparseMatrix):
    """Deterministic kernel basis: one vector per free column, free variable
    set to 1, expressed against the reduced echelon form."""
    e = _Eliminator(A.to_rows(), A.ncols).run()
    free = [c for c in range(A.ncols) if c not in e.pivots]
    basis = []
    for f in free:
        vec = {f: ONE}
        for c, r in e.pivots.items():
            v = e.rows[r].get(f)
            if v:
                vec[c] = -v
        basis.append(vec)
    return basis


def solve(A: SparseMatrix, b: dict):
    """One exact solution of A x = b with free variables set to zero, or None
    if inconsistent."""
    rows = A.to_rows()
    rhs = {}
    for r, s in b.items():
        if s:
            rhs[r] = {0: s}
    all_rows = set(rows) | set(rhs)
    rows = {r: rows.get(r, {}) for r in all_rows}
    e = _Eliminator(rows, A.ncols, rhs).run()
    x = {}
    for r, row in e.rows.items():
        rv = e.rhs.get(r, {}).get(0)
        if r in e.pivot_of_row:
            if rv:
                x[e.pivot_of_row[r]] = rv
        elif not row and rv:
            return None
        elif row and rv:
            # row with entries but no pivot cannot happen after full sweep
            return None
    return x


class LinearSystem:
    """Incrementally assembled sparse system over named unknowns, solved
    exactly; reports the first inconsistent equation tag on failure."""

    def __init__(self):
        self.var_ids = {}
        self.var_names = []
        self.eq_rows = []
        self.eq_rhs = []
        self.eq_tags = []

    def var(self, name):
        vid = self.var_ids.get(name)
        if vid is None:
            vid = len(self.var_names)
            self.var_ids[name] = vid
            self.var_names.append(name)
        return vid

    def has_var(self, name):
        return name in self.var_ids

    def add_equation(self, coeffs: dict, rhs: Scalar, tag=None):
        """coeffs: var name -> Scalar."""
        row = {}
        for name, s in coeffs.items():
            if s:
                row[self.var(name)] = row.get(self.var(name), ZERO) + s
        row = {c: v for c, v in row.items() if v}
        if not row:
            if rhs:
                raise NoSolution("inconsistent trivial equation %r" % (tag,))
            return
        self.eq_rows.append(row)
        self.eq_rhs.append(rhs)
        self.eq_tags.append(tag)

    @property
    def num_vars(self):
        return len(self.var_names)

    @property
    def num_eqs(self):
        return len(self.eq_rows)

    def solve(self):
        """Returns dict var-name -> Scalar (zeros omitted); raises NoSolution
        with the offending equation tag when inconsistent."""
        rows = {i: row for i, row in enumerate(self.eq_rows)}
        rhs = {i: {0: s} for i, s in enumerate(self.eq_rhs) if s}
        all_rows = set(rows) | set(rhs)
        rows = {r: rows.get(r, {}) for r in all_rows}
        e = _Eliminator(rows, self.num_vars, rhs).run()
        out = {}
        for r, row in e.rows.items():
            rv = e.rhs.get(r, {}).get(0)
            if r in e.pivot_of_row:
                if rv:
                    out[self.var_names[e.pivot_of_row[r]]] = rv
            elif not row and rv:
                raise NoSolution("inconsistent equation %r"
                                 % (self.eq_tags[r],))
        return out


def express_in_span(vectors, target, nrows):
    """Coordinates of target in the span of vectors (list of dict-vectors),
    or None.  Deterministic (natural column order)."""
    A = SparseMatrix(nrows, len(vectors))
    for j, v in enumerate(vectors):
        A.set_column(j, v)
    return solve(A, target)


def vec_add(a, b):
    out = dict(a)
    for k, s in b.items():
        v = out.get(k, ZERO) + s
        if v:
            out[k] = v
        elif k in out:
            del out[k]
    return out


def vec_scale(a, s: Scalar):
    if not s:
        return {}
    return {k: v * s for k, v in a.items()}


def vec_sub(a, b):
    return vec_add(a, vec_scale(b, Scalar(-1)))

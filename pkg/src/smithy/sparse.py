"""Column-major sparse matrices over GF(p) with exact nonzero bookkeeping.

A column is a Python list of packed entries (see gfp.FieldSpec.pack),
strictly increasing in row index, never storing zeros.  The matrix keeps
per-row and per-column nonzero counts plus, per row, the set of columns
holding an entry of that row; all three are maintained by every mutation so
pivot searches never rescan the matrix.  Values live only in the columns;
the row pattern holds indices alone.

Row operations walk the row's column set and edit each column in place.
Batched row operations are cheaper on the transpose: transpose, apply the
ops as column operations, transpose back.
"""

from __future__ import annotations

from bisect import bisect_left

from .gfp import FieldSpec


class ShapeError(ValueError):
    """Operand dimensions do not match."""


class MatrixFormatError(ValueError):
    """Malformed matrix text; carries the offending 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__("line %d: %s" % (line_no, message))
        self.line_no = line_no


def axpy(dst: list[int], src: list[int], s: int, spec: FieldSpec) -> list[int]:
    """Return dst + s*src as a new packed list (single merge pass).

    Entries present in both vectors may cancel; an entry scaled by a nonzero
    s never vanishes on its own since GF(p) has no zero divisors.
    """
    p = spec.p
    k = spec.k
    mask = spec.mask
    s %= p
    if s == 0 or not src:
        return list(dst)
    if not dst:
        return [(e >> k) << k | (e & mask) * s % p for e in src]
    out: list[int] = []
    append = out.append
    na, nb = len(dst), len(src)
    ap = bp = 0
    ea, eb = dst[0], src[0]
    while True:
        ra, rb = ea >> k, eb >> k
        if ra < rb:
            append(ea)
            ap += 1
            if ap == na:
                break
            ea = dst[ap]
        elif ra > rb:
            append(rb << k | (eb & mask) * s % p)
            bp += 1
            if bp == nb:
                break
            eb = src[bp]
        else:
            v = ((ea & mask) + (eb & mask) * s) % p
            if v:
                append(ra << k | v)
            ap += 1
            bp += 1
            if ap == na or bp == nb:
                break
            ea, eb = dst[ap], src[bp]
    if ap < na:
        out.extend(dst[ap:])
    else:
        while bp < nb:
            eb = src[bp]
            append((eb >> k) << k | (eb & mask) * s % p)
            bp += 1
    return out


def vec_from_pairs(pairs, spec: FieldSpec) -> list[int]:
    """Packed vector from (index, value) pairs; values reduced mod p."""
    out = []
    for i, v in pairs:
        v %= spec.p
        if v:
            out.append(spec.pack(i, v))
    out.sort()
    for a, b in zip(out, out[1:]):
        if a >> spec.k == b >> spec.k:
            raise ValueError("duplicate index %d" % (a >> spec.k))
    return out


def vec_to_pairs(vec: list[int], spec: FieldSpec) -> list[tuple[int, int]]:
    return [(e >> spec.k, e & spec.mask) for e in vec]


class SparseMatrix:
    """m x n matrix over GF(p), columns stored as sorted packed lists."""

    __slots__ = ("m", "n", "spec", "cols", "row_counts", "col_counts", "rows_pat", "nnz")

    def __init__(self, m: int, n: int, spec: FieldSpec):
        if m < 0 or n < 0:
            raise ShapeError("negative dimension")
        self.m = m
        self.n = n
        self.spec = spec
        self.cols: list[list[int]] = [[] for _ in range(n)]
        self.row_counts: list[int] = [0] * m
        self.col_counts: list[int] = [0] * n
        self.rows_pat: list[set[int]] = [set() for _ in range(m)]
        self.nnz = 0

    # -- construction -------------------------------------------------------

    @classmethod
    def from_pairs(cls, m: int, n: int, spec: FieldSpec, pairs) -> "SparseMatrix":
        a = cls(m, n, spec)
        for i, j, v in pairs:
            if a.get(i, j) != 0:
                raise ValueError("duplicate entry (%d, %d)" % (i, j))
            a.set(i, j, v)
        return a

    @classmethod
    def from_dense(cls, rows, spec: FieldSpec) -> "SparseMatrix":
        m = len(rows)
        n = len(rows[0]) if m else 0
        a = cls(m, n, spec)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise ShapeError("ragged rows")
            for j, v in enumerate(row):
                v %= spec.p
                if v:
                    a.set(i, j, v)
        return a

    @classmethod
    def identity(cls, n: int, spec: FieldSpec) -> "SparseMatrix":
        a = cls(n, n, spec)
        for i in range(n):
            a.set(i, i, 1)
        return a

    def copy(self) -> "SparseMatrix":
        a = SparseMatrix(self.m, self.n, self.spec)
        a.cols = [list(c) for c in self.cols]
        a.row_counts = list(self.row_counts)
        a.col_counts = list(self.col_counts)
        a.rows_pat = [set(s) for s in self.rows_pat]
        a.nnz = self.nnz
        return a

    # -- element access ------------------------------------------------------

    def _check_index(self, i: int, j: int) -> None:
        if not (0 <= i < self.m and 0 <= j < self.n):
            raise IndexError("index (%d, %d) outside %dx%d" % (i, j, self.m, self.n))

    def get(self, i: int, j: int) -> int:
        self._check_index(i, j)
        col = self.cols[j]
        k = self.spec.k
        idx = bisect_left(col, i << k)
        if idx < len(col) and col[idx] >> k == i:
            return col[idx] & self.spec.mask
        return 0

    def set(self, i: int, j: int, v: int) -> None:
        """Write entry (i, j); v == 0 deletes."""
        self._check_index(i, j)
        v %= self.spec.p
        col = self.cols[j]
        k = self.spec.k
        idx = bisect_left(col, i << k)
        present = idx < len(col) and col[idx] >> k == i
        if v:
            if present:
                col[idx] = i << k | v
            else:
                col.insert(idx, i << k | v)
                self.row_counts[i] += 1
                self.col_counts[j] += 1
                self.rows_pat[i].add(j)
                self.nnz += 1
        elif present:
            del col[idx]
            self.row_counts[i] -= 1
            self.col_counts[j] -= 1
            self.rows_pat[i].discard(j)
            self.nnz -= 1

    def set_col(self, j: int, new: list[int]) -> None:
        """Replace column j with a packed list, syncing all counts."""
        old = self.cols[j]
        k = self.spec.k
        # two-pointer diff over sorted packed lists
        a = b = 0
        na, nb = len(old), len(new)
        while a < na and b < nb:
            ra, rb = old[a] >> k, new[b] >> k
            if ra < rb:
                self.row_counts[ra] -= 1
                self.rows_pat[ra].discard(j)
                a += 1
            elif ra > rb:
                self.row_counts[rb] += 1
                self.rows_pat[rb].add(j)
                b += 1
            else:
                a += 1
                b += 1
        while a < na:
            ra = old[a] >> k
            self.row_counts[ra] -= 1
            self.rows_pat[ra].discard(j)
            a += 1
        while b < nb:
            rb = new[b] >> k
            self.row_counts[rb] += 1
            self.rows_pat[rb].add(j)
            b += 1
        self.nnz += nb - na
        self.col_counts[j] = nb
        self.cols[j] = new

    def col_pairs(self, j: int) -> list[tuple[int, int]]:
        return vec_to_pairs(self.cols[j], self.spec)

    def entries(self):
        """Yield (i, j, v) column-major, rows ascending within a column."""
        k = self.spec.k
        mask = self.spec.mask
        for j, col in enumerate(self.cols):
            for e in col:
                yield e >> k, j, e & mask

    # -- elementary operations ------------------------------------------------

    def swap_cols(self, a: int, b: int) -> None:
        if a == b:
            raise ValueError("swap needs distinct columns")
        if not (0 <= a < self.n and 0 <= b < self.n):
            raise IndexError("column swap (%d, %d) outside %d columns" % (a, b, self.n))
        k = self.spec.k
        rows_a = [e >> k for e in self.cols[a]]
        rows_b = [e >> k for e in self.cols[b]]
        for r in rows_a:
            self.rows_pat[r].discard(a)
        for r in rows_b:
            self.rows_pat[r].discard(b)
        for r in rows_a:
            self.rows_pat[r].add(b)
        for r in rows_b:
            self.rows_pat[r].add(a)
        self.cols[a], self.cols[b] = self.cols[b], self.cols[a]
        self.col_counts[a], self.col_counts[b] = self.col_counts[b], self.col_counts[a]

    def add_col_multiple(self, src: int, dst: int, s: int) -> None:
        """col[dst] += s * col[src]."""
        if src == dst:
            raise ValueError("transvection needs distinct columns")
        self.set_col(dst, axpy(self.cols[dst], self.cols[src], s, self.spec))

    def scale_col(self, j: int, u: int) -> None:
        u %= self.spec.p
        if u == 0:
            raise ValueError("dilation scalar must be nonzero")
        k = self.spec.k
        mask = self.spec.mask
        p = self.spec.p
        self.cols[j] = [(e >> k) << k | (e & mask) * u % p for e in self.cols[j]]

    def swap_rows(self, a: int, b: int) -> None:
        if a == b:
            raise ValueError("swap needs distinct rows")
        if not (0 <= a < self.m and 0 <= b < self.m):
            raise IndexError("row swap (%d, %d) outside %d rows" % (a, b, self.m))
        k = self.spec.k
        for j in self.rows_pat[a] | self.rows_pat[b]:
            col = self.cols[j]
            ia = bisect_left(col, a << k)
            va = col[ia] & self.spec.mask if ia < len(col) and col[ia] >> k == a else 0
            ib = bisect_left(col, b << k)
            vb = col[ib] & self.spec.mask if ib < len(col) and col[ib] >> k == b else 0
            if va:
                del col[ia]
            ib = bisect_left(col, b << k)
            if vb:
                del col[ib]
            if vb:
                col.insert(bisect_left(col, a << k), a << k | vb)
            if va:
                col.insert(bisect_left(col, b << k), b << k | va)
        self.rows_pat[a], self.rows_pat[b] = self.rows_pat[b], self.rows_pat[a]
        self.row_counts[a], self.row_counts[b] = self.row_counts[b], self.row_counts[a]

    def add_row_multiple(self, src: int, dst: int, s: int) -> None:
        """row[dst] += s * row[src]."""
        if src == dst:
            raise ValueError("transvection needs distinct rows")
        s %= self.spec.p
        if s == 0:
            return
        spec = self.spec
        for j in sorted(self.rows_pat[src]):
            va = self.get(src, j)
            self.set(dst, j, (self.get(dst, j) + s * va) % spec.p)

    def scale_row(self, i: int, u: int) -> None:
        u %= self.spec.p
        if u == 0:
            raise ValueError("dilation scalar must be nonzero")
        k = self.spec.k
        mask = self.spec.mask
        p = self.spec.p
        for j in self.rows_pat[i]:
            col = self.cols[j]
            idx = bisect_left(col, i << k)
            col[idx] = i << k | (col[idx] & mask) * u % p

    # -- whole-matrix operations ----------------------------------------------

    def transpose(self) -> "SparseMatrix":
        t = SparseMatrix(self.n, self.m, self.spec)
        k = self.spec.k
        mask = self.spec.mask
        tcols = t.cols
        for j, col in enumerate(self.cols):
            jk = j << k
            for e in col:
                tcols[e >> k].append(jk | (e & mask))
        # source columns ascend in j, so each target column is already sorted
        for i, col in enumerate(tcols):
            t.col_counts[i] = len(col)
            for e in col:
                r = e >> k
                t.row_counts[r] += 1
                t.rows_pat[r].add(i)
        t.nnz = self.nnz
        return t

    def nnz_active(self, c: int) -> int:
        """Nonzeros in the region with row >= c and column >= c."""
        if not 0 <= c <= min(self.m, self.n):
            raise ValueError("active index %d outside [0, %d]" % (c, min(self.m, self.n)))
        k = self.spec.k
        total = 0
        for j in range(c, self.n):
            col = self.cols[j]
            total += len(col) - bisect_left(col, c << k)
        return total

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.n for _ in range(self.m)]
        for i, j, v in self.entries():
            out[i][j] = v
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (self.m, self.n, self.spec.p) == (other.m, other.n, other.spec.p) and self.cols == other.cols

    def check(self) -> None:
        """Validate every structural invariant; cheap insurance in tests."""
        assert len(self.cols) == self.n
        k = self.spec.k
        mask = self.spec.mask
        rc = [0] * self.m
        cc = [0] * self.n
        pat: list[set[int]] = [set() for _ in range(self.m)]
        total = 0
        for j, col in enumerate(self.cols):
            prev = -1
            for e in col:
                i, v = e >> k, e & mask
                assert prev < i, "rows not strictly increasing in column %d" % j
                assert 0 < v < self.spec.p, "stored zero or out-of-range value"
                assert i < self.m
                prev = i
                rc[i] += 1
                cc[j] += 1
                pat[i].add(j)
                total += 1
        assert rc == self.row_counts, "row counts drifted"
        assert cc == self.col_counts, "column counts drifted"
        assert pat == self.rows_pat, "row pattern drifted"
        assert total == self.nnz


# -- text interchange format ----------------------------------------------
#
# header line:  m n p
# entry lines:  i j v      (1-based indices, 0 < v < p, any order)
# terminator:   0 0 0


def write_matrix(a: SparseMatrix, path_or_file) -> None:
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "w") if own else path_or_file
    try:
        f.write("%d %d %d\n" % (a.m, a.n, a.spec.p))
        for i, j, v in a.entries():
            f.write("%d %d %d\n" % (i + 1, j + 1, v))
        f.write("0 0 0\n")
    finally:
        if own:
            f.close()


def read_matrix(path_or_file, spec: FieldSpec | None = None) -> SparseMatrix:
    """Parse the text format; raises MatrixFormatError with a line number.

    When spec is given the file's modulus must match it.
    """
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file) if own else path_or_file
    try:
        return _read_matrix_stream(f, spec)
    finally:
        if own:
            f.close()


def _read_matrix_stream(f, spec: FieldSpec | None) -> SparseMatrix:
    line_no = 0
    header = None
    while header is None:
        line = f.readline()
        line_no += 1
        if not line:
            raise MatrixFormatError(line_no, "missing header")
        if line.strip():
            header = line.split()
    if len(header) != 3:
        raise MatrixFormatError(line_no, "header must be 'm n p'")
    try:
        m, n, p = (int(t) for t in header)
    except ValueError:
        raise MatrixFormatError(line_no, "non-integer header field") from None
    try:
        file_spec = FieldSpec(p)
    except ValueError as exc:
        raise MatrixFormatError(line_no, str(exc)) from None
    if spec is not None:
        if spec.p != p:
            raise MatrixFormatError(line_no, "modulus %d does not match expected %d" % (p, spec.p))
        file_spec = spec
    a = SparseMatrix(m, n, file_spec)
    terminated = False
    while True:
        line = f.readline()
        line_no += 1
        if not line:
            break
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 3:
            raise MatrixFormatError(line_no, "entry must be 'i j v'")
        try:
            i, j, v = (int(t) for t in parts)
        except ValueError:
            raise MatrixFormatError(line_no, "non-integer entry field") from None
        if (i, j, v) == (0, 0, 0):
            terminated = True
            break
        if not (1 <= i <= m and 1 <= j <= n):
            raise MatrixFormatError(line_no, "index (%d, %d) outside %dx%d" % (i, j, m, n))
        if not 0 < v < p:
            raise MatrixFormatError(line_no, "value %d outside [1, %d)" % (v, p))
        if a.get(i - 1, j - 1) != 0:
            raise MatrixFormatError(line_no, "duplicate entry (%d, %d)" % (i, j))
        a.set(i - 1, j - 1, v)
    if not terminated:
        raise MatrixFormatError(line_no, "missing '0 0 0' terminator")
    return a

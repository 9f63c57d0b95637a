"""Streamed change-of-basis transcripts: elementary operations on disk.

A transcript is an append-only text file holding one header line

    SIDE dim p        (SIDE is ROW or COL)

followed by one record per elementary operation, 0-based indices:

    S a b             swap lines a and b
    T a b v           add v times line a to line b   (0 < v < p)
    D a u             scale line a by u              (0 < u < p)

"Line" means row for a ROW transcript and column for a COL transcript.
Each record stands for the elementary matrix performing that operation on
its side; for a record with matrix E, a ROW transcript represents the
product E0 E1 E2 ... in file order, while a COL transcript represents
... E2 E1 E0 with the first record rightmost.  These are exactly the
accumulation orders produced by a reduction that repeatedly rewrites
A <- E_row^-1 A and A <- A E_col^-1, so replaying a ROW transcript against
the reduced matrix on the left and a COL transcript on the right restores
the original matrix.

Records are never materialized in memory as a whole; application streams
the file in whichever direction the requested product needs, using a byte
offset index built in one forward pass.  Every application opens its own
file handle, so concurrent readers are safe; a finalized transcript is
immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .gfp import FieldSpec
from .sparse import ShapeError, SparseMatrix

ROW = "ROW"
COL = "COL"


class TranscriptError(ValueError):
    """Malformed transcript file or record."""


@dataclass(frozen=True)
class ElementaryOp:
    kind: str  # "S", "T", or "D"
    a: int
    b: int | None = None
    v: int | None = None

    def __post_init__(self) -> None:
        if self.a < 0:
            raise ValueError("negative line index")
        if self.kind == "S":
            if self.b is None or self.b < 0 or self.b == self.a or self.v is not None:
                raise ValueError("swap needs two distinct lines and no scalar")
        elif self.kind == "T":
            if self.b is None or self.b < 0 or self.b == self.a:
                raise ValueError("transvection needs two distinct lines")
            if not self.v:
                raise ValueError("transvection scalar must be nonzero")
        elif self.kind == "D":
            if self.b is not None:
                raise ValueError("dilation takes a single line")
            if not self.v:
                raise ValueError("dilation scalar must be nonzero")
        else:
            raise ValueError("unknown op kind %r" % (self.kind,))

    @classmethod
    def swap(cls, a: int, b: int) -> "ElementaryOp":
        return cls("S", a, b)

    @classmethod
    def transvection(cls, a: int, b: int, v: int) -> "ElementaryOp":
        return cls("T", a, b, v)

    @classmethod
    def dilation(cls, a: int, u: int) -> "ElementaryOp":
        return cls("D", a, None, u)

    def inverse(self, spec: FieldSpec) -> "ElementaryOp":
        if self.kind == "S":
            return self
        if self.kind == "T":
            return ElementaryOp("T", self.a, self.b, spec.neg(self.v))
        return ElementaryOp("D", self.a, None, spec.inv(self.v))

    def encode(self) -> str:
        if self.kind == "S":
            return "S %d %d\n" % (self.a, self.b)
        if self.kind == "T":
            return "T %d %d %d\n" % (self.a, self.b, self.v)
        return "D %d %d\n" % (self.a, self.v)


def _parse_record(text: str, line_no: int) -> ElementaryOp:
    parts = text.split()
    try:
        if parts and parts[0] == "S" and len(parts) == 3:
            return ElementaryOp("S", int(parts[1]), int(parts[2]))
        if parts and parts[0] == "T" and len(parts) == 4:
            return ElementaryOp("T", int(parts[1]), int(parts[2]), int(parts[3]))
        if parts and parts[0] == "D" and len(parts) == 3:
            return ElementaryOp("D", int(parts[1]), None, int(parts[2]))
    except ValueError as exc:
        raise TranscriptError("record %d: %s" % (line_no, exc)) from None
    raise TranscriptError("record %d: unrecognized %r" % (line_no, text.strip()))


class Transcript:
    """One side of a change of basis, as a file of elementary ops."""

    def __init__(self, path, side: str, dim: int, spec: FieldSpec, _writer=None, _offsets=None):
        if side not in (ROW, COL):
            raise ValueError("side must be ROW or COL")
        self.path = str(path)
        self.side = side
        self.dim = dim
        self.spec = spec
        self._writer = _writer
        self._offsets = _offsets if _offsets is not None else []

    # -- lifecycle ---------------------------------------------------------

    @classmethod
    def create(cls, path, side: str, dim: int, spec: FieldSpec) -> "Transcript":
        f = open(path, "w", newline="\n")
        header = "%s %d %d\n" % (side, dim, spec.p)
        f.write(header)
        t = cls(path, side, dim, spec, _writer=f)
        t._pos = len(header)
        return t

    @classmethod
    def open(cls, path, spec: FieldSpec | None = None) -> "Transcript":
        offsets = []
        with open(path, "rb") as f:
            header = f.readline()
            parts = header.split()
            if len(parts) != 3 or parts[0] not in (b"ROW", b"COL"):
                raise TranscriptError("bad header %r" % header)
            side = parts[0].decode()
            try:
                dim, p = int(parts[1]), int(parts[2])
            except ValueError:
                raise TranscriptError("bad header %r" % header) from None
            file_spec = FieldSpec(p)
            if spec is not None and spec.p != p:
                raise TranscriptError("modulus %d does not match expected %d" % (p, spec.p))
            pos = len(header)
            for raw in f:
                if raw.strip():
                    offsets.append(pos)
                pos += len(raw)
        return cls(path, side, dim, file_spec, _offsets=offsets)

    def append(self, op: ElementaryOp) -> None:
        if self._writer is None:
            raise TranscriptError("transcript is finalized")
        if op.a >= self.dim or (op.b is not None and op.b >= self.dim):
            raise TranscriptError("line index outside dimension %d" % self.dim)
        if op.v is not None and not 0 < op.v < self.spec.p:
            raise TranscriptError("scalar %d outside [1, %d)" % (op.v, self.spec.p))
        text = op.encode()
        self._writer.write(text)
        self._offsets.append(self._pos)
        self._pos += len(text)

    def finalize(self) -> "Transcript":
        if self._writer is not None:
            self._writer.close()
            self._writer = None
        return self

    def __len__(self) -> int:
        return len(self._offsets)

    # -- streaming ---------------------------------------------------------

    def records(self):
        """Yield ops in file order."""
        self._require_final()
        with open(self.path, "rb") as f:
            f.readline()
            no = 0
            for raw in f:
                if not raw.strip():
                    continue
                no += 1
                yield _parse_record(raw.decode("ascii"), no)

    def records_reversed(self):
        self._require_final()
        with open(self.path, "rb") as f:
            for idx in range(len(self._offsets) - 1, -1, -1):
                f.seek(self._offsets[idx])
                yield _parse_record(f.readline().decode("ascii"), idx + 1)

    def _require_final(self) -> None:
        if self._writer is not None:
            raise TranscriptError("transcript is still being written")

    def _stream(self, forward: bool, inverse: bool):
        src = self.records() if forward else self.records_reversed()
        if inverse:
            spec = self.spec
            return (op.inverse(spec) for op in src)
        return src

    # -- application --------------------------------------------------------
    #
    # Every elementary matrix acts on a concrete target as a column
    # operation; only the (source, destination) roles of a transvection
    # depend on which side the record lives on and which side of the
    # operand the product places it.  "direct" keeps T a b v as
    # col[b] += v*col[a]; "flip" exchanges the roles.

    def apply_vec(self, x: list[int], inverse: bool = False) -> list[int]:
        """x <- M x (or M^-1 x), mutating and returning the list x."""
        if len(x) != self.dim:
            raise ShapeError("vector length %d, transcript dimension %d" % (len(x), self.dim))
        p = self.spec.p
        flip = self.side == COL
        forward = (self.side == COL) != inverse
        for op in self._stream(forward, inverse):
            if op.kind == "T":
                if flip:
                    x[op.a] = (x[op.a] + op.v * x[op.b]) % p
                else:
                    x[op.b] = (x[op.b] + op.v * x[op.a]) % p
            elif op.kind == "S":
                x[op.a], x[op.b] = x[op.b], x[op.a]
            else:
                x[op.a] = x[op.a] * op.v % p
        return x

    def apply_mat_left(self, a: SparseMatrix, inverse: bool = False) -> SparseMatrix:
        """Return M a (or M^-1 a); the input matrix is left untouched.

        Works on the transpose so each record touches at most two columns.
        """
        if a.m != self.dim:
            raise ShapeError("matrix has %d rows, transcript dimension %d" % (a.m, self.dim))
        w = a.transpose()
        forward = (self.side == COL) != inverse
        self._run_col_ops(w, forward, inverse, flip=(self.side == COL))
        return w.transpose()

    def apply_mat_right(self, a: SparseMatrix, inverse: bool = False) -> SparseMatrix:
        """a <- a M (or a M^-1), mutating and returning the given matrix."""
        if a.n != self.dim:
            raise ShapeError("matrix has %d columns, transcript dimension %d" % (a.n, self.dim))
        forward = (self.side == ROW) != inverse
        self._run_col_ops(a, forward, inverse, flip=(self.side == ROW))
        return a

    def _run_col_ops(self, target: SparseMatrix, forward: bool, inverse: bool, flip: bool) -> None:
        for op in self._stream(forward, inverse):
            if op.kind == "T":
                if flip:
                    target.add_col_multiple(op.b, op.a, op.v)
                else:
                    target.add_col_multiple(op.a, op.b, op.v)
            elif op.kind == "S":
                target.swap_cols(op.a, op.b)
            else:
                target.scale_col(op.a, op.v)

    def materialize(self, bound: int = 4096) -> SparseMatrix:
        """The represented matrix, for dimensions small enough to afford."""
        if self.dim > bound:
            raise ValueError("dimension %d exceeds materialize bound %d" % (self.dim, bound))
        return self.apply_mat_left(SparseMatrix.identity(self.dim, self.spec))

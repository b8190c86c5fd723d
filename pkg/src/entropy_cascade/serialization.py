"""File formats for schedules, vectors, factored and dense distributions, reports.

JSON artifacts carry ``kind`` and ``version`` fields. Reals are written either
as 17-significant-digit decimals or as exact hexadecimal strings
(``float.hex``); both round-trip 8-byte floats exactly.

Dense tensors also export to two plain formats:

* ``indexed_csv``: header ``i1,...,ik,probability`` then one row per entry in
  row-major order (first index slowest).
* ``flat_binary``: 16-byte little-endian header (magic ``ECJT``, uint32 version,
  uint32 order, uint32 n_symbols) followed by N^k little-endian float64.
"""

from __future__ import annotations

import csv
import io
import json
import os
import struct
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import IO, Any, Union

import numpy as np

from .entropy_core import (
    DenseJointTensor,
    EntropySchedule,
    FactoredJointDistribution,
    ProbabilityVector,
    SolverMethod,
    SolverReport,
)
from .errors import InvariantViolation, ParseError

FORMAT_VERSION = "1"
BINARY_MAGIC = b"ECJT"
BINARY_VERSION = 1
BINARY_HEADER = struct.Struct("<4sIII")

PathOrStream = Union[str, os.PathLike, IO]


class ArtifactKind(str, Enum):
    SCHEDULE = "schedule"
    VECTOR = "vector"
    FACTORED = "factored"
    DENSE = "dense"
    REPORT = "report"


class DenseFormat(str, Enum):
    INDEXED_CSV = "indexed_csv"
    FLAT_BINARY = "flat_binary"


class UnsupportedVersion(ParseError):
    pass


@contextmanager
def _opened(target: PathOrStream, mode: str):
    if isinstance(target, (str, os.PathLike)):
        try:
            with open(target, mode, **({} if "b" in mode else {"newline": "", "encoding": "utf-8"})) as fh:
                yield fh
        except OSError as err:
            raise OSError(f"{target}: {err.strerror or err}") from err
    else:
        yield target


# -- JSON artifacts -------------------------------------------------------


def _render_real(x: float, float_format: str) -> str:
    x = float(x)
    if float_format == "hex":
        return json.dumps(x.hex())
    if float_format == "decimal":
        return format(x, ".17g")
    raise ValueError(f"unknown float_format {float_format!r}")


def _render_reals(values, float_format: str) -> str:
    return "[" + ", ".join(_render_real(x, float_format) for x in values) + "]"


def _render(kind: ArtifactKind, float_format: str, fields: list[tuple[str, str]]) -> str:
    head = [
        ("kind", json.dumps(kind.value)),
        ("version", json.dumps(FORMAT_VERSION)),
        ("float_format", json.dumps(float_format)),
    ]
    body = ",\n".join(f"  {json.dumps(k)}: {v}" for k, v in head + fields)
    return "{\n" + body + "\n}\n"


def encode(obj, float_format: str = "decimal") -> str:
    """Serialize any artifact object to JSON text."""
    r = lambda x: _render_real(x, float_format)  # noqa: E731
    rs = lambda xs: _render_reals(xs, float_format)  # noqa: E731
    if isinstance(obj, EntropySchedule):
        return _render(ArtifactKind.SCHEDULE, float_format, [
            ("n_symbols", str(obj.n_symbols)), ("targets", rs(obj.targets)),
        ])
    if isinstance(obj, ProbabilityVector):
        return _render(ArtifactKind.VECTOR, float_format, [
            ("n_symbols", str(obj.n_symbols)), ("probs", rs(obj.probs)),
        ])
    if isinstance(obj, FactoredJointDistribution):
        factors = "[\n" + ",\n".join("    " + rs(v.probs) for v in obj.factors) + "\n  ]"
        return _render(ArtifactKind.FACTORED, float_format, [
            ("n_symbols", str(obj.n_symbols)), ("order", str(obj.order)), ("factors", factors),
        ])
    if isinstance(obj, DenseJointTensor):
        return _render(ArtifactKind.DENSE, float_format, [
            ("n_symbols", str(obj.n_symbols)), ("order", str(obj.order)),
            ("entries", rs(obj.entries)),
        ])
    if isinstance(obj, SolverReport):
        return _render(ArtifactKind.REPORT, float_format, [
            ("achieved_entropy", r(obj.achieved_entropy)), ("residual", r(obj.residual)),
            ("iterations", str(obj.iterations)), ("method", json.dumps(obj.method.value)),
        ])
    raise TypeError(f"cannot serialize {type(obj).__name__}")


class _Fields:
    """Typed field access over a decoded JSON object with located errors."""

    def __init__(self, doc: dict, float_format: str):
        self.doc = doc
        self.float_format = float_format

    def raw(self, name: str):
        if name not in self.doc:
            raise ParseError("missing field", location=f"field {name!r}")
        return self.doc[name]

    def real(self, value, where: str) -> float:
        if self.float_format == "hex":
            if not isinstance(value, str):
                raise ParseError("expected a hex-float string", location=where)
            try:
                return float.fromhex(value)
            except ValueError:
                raise ParseError(f"bad hex float {value!r}", location=where) from None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"expected a number, got {value!r}", location=where)
        return float(value)

    def integer(self, name: str) -> int:
        value = self.raw(name)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"expected an integer, got {value!r}", location=f"field {name!r}")
        return value

    def reals(self, value, where: str) -> list[float]:
        if not isinstance(value, list):
            raise ParseError("expected a list", location=where)
        return [self.real(x, f"{where}[{i}]") for i, x in enumerate(value)]


def decode(text: str):
    """Parse JSON artifact text into the matching domain object."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(err.msg, location=f"line {err.lineno} column {err.colno}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", location="line 1")
    for name in ("kind", "version"):
        if name not in doc:
            raise ParseError("missing field", location=f"field {name!r}")
    if doc["version"] != FORMAT_VERSION:
        raise UnsupportedVersion(
            f"format version {doc['version']!r} is not supported (expected {FORMAT_VERSION!r})",
            location="field 'version'",
        )
    try:
        kind = ArtifactKind(doc["kind"])
    except ValueError:
        raise ParseError(f"unknown kind {doc['kind']!r}", location="field 'kind'") from None
    float_format = doc.get("float_format", "decimal")
    if float_format not in ("decimal", "hex"):
        raise ParseError(f"unknown float_format {float_format!r}", location="field 'float_format'")
    f = _Fields(doc, float_format)

    if kind is ArtifactKind.SCHEDULE:
        return EntropySchedule(f.integer("n_symbols"), tuple(f.reals(f.raw("targets"), "field 'targets'")))
    if kind is ArtifactKind.VECTOR:
        n = f.integer("n_symbols")
        probs = f.reals(f.raw("probs"), "field 'probs'")
        if len(probs) != n:
            raise InvariantViolation(f"n_symbols is {n} but {len(probs)} probabilities given")
        return ProbabilityVector(probs)
    if kind is ArtifactKind.FACTORED:
        n = f.integer("n_symbols")
        raw = f.raw("factors")
        if not isinstance(raw, list) or not raw:
            raise ParseError("factor list must be a nonempty list", location="field 'factors'")
        factors = []
        for m, vals in enumerate(raw):
            probs = f.reals(vals, f"field 'factors'[{m}]")
            if len(probs) != n:
                raise InvariantViolation(f"factor {m} has {len(probs)} entries, n_symbols is {n}")
            factors.append(ProbabilityVector(probs))
        order = f.integer("order")
        if order != len(factors):
            raise InvariantViolation(f"order is {order} but {len(factors)} factors given")
        return FactoredJointDistribution(tuple(factors))
    if kind is ArtifactKind.DENSE:
        entries = f.reals(f.raw("entries"), "field 'entries'")
        return DenseJointTensor(f.integer("order"), f.integer("n_symbols"), np.array(entries))
    method = f.raw("method")
    try:
        method = SolverMethod(method)
    except ValueError:
        raise ParseError(f"unknown method {method!r}", location="field 'method'") from None
    return SolverReport(
        f.real(f.raw("achieved_entropy"), "field 'achieved_entropy'"),
        f.real(f.raw("residual"), "field 'residual'"),
        f.integer("iterations"),
        method,
    )


def write_artifact(obj, target: PathOrStream, float_format: str = "decimal") -> None:
    text = encode(obj, float_format)
    with _opened(target, "w") as fh:
        fh.write(text)


def read_artifact(source: PathOrStream, expect: type | None = None):
    with _opened(source, "r") as fh:
        obj = decode(fh.read())
    if expect is not None and not isinstance(obj, expect):
        raise ParseError(f"expected a {expect.__name__} artifact, found {type(obj).__name__}")
    return obj


def write_vector(v: ProbabilityVector, target: PathOrStream, float_format: str = "decimal") -> None:
    write_artifact(v, target, float_format)


def read_vector(source: PathOrStream) -> ProbabilityVector:
    return read_artifact(source, ProbabilityVector)


def write_factored(f: FactoredJointDistribution, target: PathOrStream, float_format: str = "decimal") -> None:
    write_artifact(f, target, float_format)


def read_factored(source: PathOrStream) -> FactoredJointDistribution:
    """Read a factored distribution; a lone vector file reads as order 1."""
    obj = read_artifact(source)
    if isinstance(obj, ProbabilityVector):
        return FactoredJointDistribution((obj,))
    if not isinstance(obj, FactoredJointDistribution):
        raise ParseError(f"expected a factored distribution, found {type(obj).__name__}")
    return obj


def write_schedule(s: EntropySchedule, target: PathOrStream, float_format: str = "decimal") -> None:
    write_artifact(s, target, float_format)


def read_schedule(source: PathOrStream) -> EntropySchedule:
    return read_artifact(source, EntropySchedule)


def write_report(r: SolverReport, target: PathOrStream, float_format: str = "decimal") -> None:
    write_artifact(r, target, float_format)


def read_report(source: PathOrStream) -> SolverReport:
    return read_artifact(source, SolverReport)


# -- dense exports --------------------------------------------------------


def _csv_text(t: DenseJointTensor) -> str:
    k, n = t.order, t.n_symbols
    buf = io.StringIO()
    buf.write(",".join([f"i{m}" for m in range(1, k + 1)] + ["probability"]) + "\n")
    idx = np.indices((n,) * k).reshape(k, -1).T
    for row, p in zip(idx.tolist(), t.entries.tolist()):
        buf.write(",".join(map(str, row)) + "," + format(p, ".17g") + "\n")
    return buf.getvalue()


def _binary_bytes(t: DenseJointTensor) -> bytes:
    header = BINARY_HEADER.pack(BINARY_MAGIC, BINARY_VERSION, t.order, t.n_symbols)
    return header + t.entries.astype("<f8").tobytes()


def write_dense(
    t: DenseJointTensor, target: PathOrStream, format: DenseFormat | str = DenseFormat.INDEXED_CSV
) -> None:
    fmt = DenseFormat(format)
    if fmt is DenseFormat.INDEXED_CSV:
        with _opened(target, "w") as fh:
            fh.write(_csv_text(t))
    else:
        with _opened(target, "wb") as fh:
            fh.write(_binary_bytes(t))


def decode_dense_binary(data: bytes) -> DenseJointTensor:
    if len(data) < BINARY_HEADER.size:
        raise ParseError(f"file is {len(data)} bytes, shorter than the header", location="byte 0")
    magic, version, k, n = BINARY_HEADER.unpack_from(data)
    if magic != BINARY_MAGIC:
        raise ParseError(f"bad magic {magic!r}", location="byte 0")
    if version != BINARY_VERSION:
        raise UnsupportedVersion(f"binary version {version} is not supported", location="byte 4")
    if k < 1 or n < 2:
        raise ParseError(f"bad shape order={k} n_symbols={n}", location="byte 8")
    expected = BINARY_HEADER.size + 8 * n**k
    if len(data) != expected:
        raise ParseError(f"expected {expected} bytes for order {k}, N={n}; got {len(data)}")
    entries = np.frombuffer(data, dtype="<f8", offset=BINARY_HEADER.size).astype(np.float64)
    return DenseJointTensor(k, n, entries)


def decode_dense_csv(text: str) -> DenseJointTensor:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ParseError("empty file", location="line 1")
    header = rows[0]
    k = len(header) - 1
    if k < 1 or header[-1] != "probability" or header[:-1] != [f"i{m}" for m in range(1, k + 1)]:
        raise ParseError(f"bad header {','.join(header)!r}", location="line 1")
    body = rows[1:]
    n = round(len(body) ** (1.0 / k)) if body else 0
    if n < 2 or n**k != len(body):
        raise ParseError(f"{len(body)} data rows is not N^{k} for any N >= 2")
    expected = np.indices((n,) * k).reshape(k, -1).T.tolist()
    entries = np.empty(len(body))
    for r, (row, want) in enumerate(zip(body, expected)):
        line = r + 2
        if len(row) != k + 1:
            raise ParseError(f"expected {k + 1} fields, got {len(row)}", location=f"line {line}")
        try:
            idx = [int(x) for x in row[:-1]]
        except ValueError:
            raise ParseError("index fields must be integers", location=f"line {line}") from None
        if idx != want:
            raise ParseError(f"index {tuple(idx)} out of row-major order, expected {tuple(want)}",
                             location=f"line {line}")
        try:
            entries[r] = float(row[-1])
        except ValueError:
            raise ParseError(f"bad probability {row[-1]!r}", location=f"line {line} field {k + 1}") from None
    return DenseJointTensor(k, n, entries)


def read_dense(source: PathOrStream, format: DenseFormat | str | None = None) -> DenseJointTensor:
    """Read a dense tensor; with ``format=None`` the format is sniffed from the content."""
    with _opened(source, "rb") as fh:
        data = fh.read()
    if isinstance(data, str):
        data = data.encode("utf-8")
    fmt = DenseFormat(format) if format is not None else sniff(data)
    if fmt is DenseFormat.FLAT_BINARY:
        return decode_dense_binary(data)
    if fmt is DenseFormat.INDEXED_CSV:
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as err:
            raise ParseError("not UTF-8 text", location=f"byte {err.start}") from None
        return decode_dense_csv(text)
    obj = decode(data.decode("utf-8"))
    if not isinstance(obj, DenseJointTensor):
        raise ParseError(f"expected a dense tensor, found {type(obj).__name__}")
    return obj


def sniff(data: bytes) -> DenseFormat | ArtifactKind:
    """Guess a file's format from its leading bytes."""
    if data[:4] == BINARY_MAGIC:
        return DenseFormat.FLAT_BINARY
    if data.lstrip()[:1] == b"{":
        return ArtifactKind.DENSE
    return DenseFormat.INDEXED_CSV


def load_any(source: PathOrStream) -> Any:
    """Load a JSON artifact of any kind or a dense binary/CSV export."""
    if isinstance(source, (str, os.PathLike)):
        data = Path(source).read_bytes()
    else:
        data = source.read()
        if isinstance(data, str):
            data = data.encode("utf-8")
    fmt = sniff(data)
    if fmt is ArtifactKind.DENSE:
        try:
            return decode(data.decode("utf-8"))
        except UnicodeDecodeError as err:
            raise ParseError("not UTF-8 text", location=f"byte {err.start}") from None
    return read_dense(io.BytesIO(data), fmt)

"""File formats for jobs and reports.

One JSON-compatible input grammar covers every job input, selected by the
top-level "kind" field:

* ``complex`` -- trace context, ambient dimensions per degree, dense
  differentials; complex numbers are written as ``[re, im]`` pairs.
* ``cw``      -- a representation, cells per degree as label lists, and
  incidence records ``{"from": .., "to": .., "word": [[elem, coeff], ..]}``.
* ``gluing``  -- embedded lower/upper ``cw`` objects plus coupling records
  in the same incidence shape.
* ``ses``     -- three embedded ``complex`` objects (sub, middle, quotient)
  and the per-degree matrices of the inclusion and projection.
* ``laurent`` -- a matrix of Laurent polynomials; each entry is the list of
  its ``[exponent, re, im]`` triples.

Reports are emitted in a canonical JSON form: object keys sorted, two-space
indentation, floats written with 15 significant digits after being
quantized to exactly the value those digits denote — so parsing an emitted
report and re-emitting it reproduces the same bytes.
"""

from __future__ import annotations

import json
import math
from typing import Mapping

import numpy as np

from .cells import (
    GluingSpec,
    InfiniteCyclic,
    RegularRepresentation,
    TwistedCellComplex,
    UnitaryRepresentation,
)
from .complexes import CochainComplex, ComplexMorphism
from .errors import DataValidationError, NumericalError
from .exact import ComplexSES
from .towers import LaurentMatrix, LaurentPoly
from .vn import HilbertModule, Morphism, complex_field, cyclic_group, finite_group

KINDS = ("complex", "cw", "gluing", "ses", "laurent")


# ---------------------------------------------------------------------------
# reading


def load_input(path: str) -> dict:
    """Read a job-input file and check its kind tag."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise DataValidationError(f"cannot read input: {exc}", location=path) from None
    except json.JSONDecodeError as exc:
        raise DataValidationError(f"not valid JSON: {exc}", location=path) from None
    if not isinstance(data, dict):
        raise DataValidationError("input must be a JSON object", location=path)
    kind = data.get("kind")
    if kind not in KINDS:
        raise DataValidationError(
            f"unknown kind {kind!r}, expected one of {', '.join(KINDS)}",
            location=path)
    return data


def parse_scalar(value, where: str) -> complex:
    """A complex number: ``[re, im]`` pair, or a bare real number."""
    if isinstance(value, (int, float)):
        return complex(value)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(x, (int, float)) for x in value)):
        return complex(value[0], value[1])
    raise DataValidationError(
        f"expected a number or [re, im] pair, got {value!r}", location=where)


def parse_matrix(value, where: str) -> np.ndarray:
    """A dense matrix: nested rows of ``[re, im]`` entries."""
    if not isinstance(value, list) or any(not isinstance(r, list) for r in value):
        raise DataValidationError("matrix must be a list of rows", location=where)
    rows = []
    width = None
    for i, row in enumerate(value):
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DataValidationError("matrix rows have unequal lengths",
                                      location=where)
        rows.append([parse_scalar(x, f"{where} row {i}") for x in row])
    if width is None:
        raise DataValidationError("matrix has no rows", location=where)
    return np.asarray(rows, dtype=np.complex128).reshape(len(rows), width)


def parse_context(obj, where: str):
    if not isinstance(obj, Mapping) or "type" not in obj:
        raise DataValidationError("context needs a 'type' field", location=where)
    kind = obj["type"]
    if kind == "complex_field":
        return complex_field()
    if kind == "cyclic":
        order = obj.get("order")
        if not isinstance(order, int):
            raise DataValidationError("cyclic context needs integer 'order'",
                                      location=where)
        return cyclic_group(order)
    if kind == "finite_group":
        table = obj.get("table")
        if not isinstance(table, list):
            raise DataValidationError("finite_group context needs 'table'",
                                      location=where)
        return finite_group(np.asarray(table, dtype=int), obj.get("labels"))
    raise DataValidationError(f"unknown context type {kind!r}", location=where)


def parse_complex(obj, where: str = "complex") -> CochainComplex:
    ctx = parse_context(obj.get("context", {"type": "complex_field"}),
                        f"{where}.context")
    dims = obj.get("modules")
    if not isinstance(dims, list) or not all(isinstance(d, int) for d in dims):
        raise DataValidationError("'modules' must list ambient dimensions",
                                  location=where)
    offset = obj.get("offset", 0)
    if not isinstance(offset, int):
        raise DataValidationError("'offset' must be an integer", location=where)
    modules = [HilbertModule(ctx, d) for d in dims]
    raw_diffs = obj.get("differentials", [])
    if len(raw_diffs) != max(0, len(modules) - 1):
        raise DataValidationError(
            f"{len(modules)} modules need {max(0, len(modules) - 1)} "
            f"differentials, got {len(raw_diffs)}", location=where)
    diffs = []
    for i, raw in enumerate(raw_diffs):
        spot = f"{where}.differentials[{i}]"
        if dims[i] == 0 or dims[i + 1] == 0:
            matrix = np.zeros((dims[i + 1], dims[i]), np.complex128)
            if raw not in ([], None):
                matrix_in = parse_matrix(raw, spot) if raw else matrix
                if matrix_in.shape != matrix.shape:
                    raise DataValidationError("differential shape mismatch",
                                              location=spot)
        else:
            matrix = parse_matrix(raw, spot)
        if matrix.shape != (dims[i + 1], dims[i]):
            raise DataValidationError(
                f"differential has shape {matrix.shape}, expected "
                f"{(dims[i + 1], dims[i])}", location=spot)
        diffs.append(Morphism(modules[i], modules[i + 1], matrix))
    return CochainComplex(modules, diffs, offset)


def _parse_word_element(value, where: str):
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return value
    if (isinstance(value, list) and len(value) == 2
            and isinstance(value[0], str) and isinstance(value[1], int)):
        return (value[0], value[1])
    raise DataValidationError(
        f"word element must be a label, an integer power, or [label, power]; "
        f"got {value!r}", location=where)


def parse_word(value, where: str) -> tuple:
    if not isinstance(value, list):
        raise DataValidationError("word must be a list of [element, coeff]",
                                  location=where)
    out = []
    for i, pair in enumerate(value):
        if not isinstance(pair, list) or len(pair) != 2:
            raise DataValidationError("word entries are [element, coeff] pairs",
                                      location=f"{where}[{i}]")
        element = _parse_word_element(pair[0], f"{where}[{i}]")
        out.append((element, parse_scalar(pair[1], f"{where}[{i}]")))
    return tuple(out)


def parse_representation(obj, where: str):
    if not isinstance(obj, Mapping) or "type" not in obj:
        raise DataValidationError("representation needs a 'type' field",
                                  location=where)
    kind = obj["type"]
    if kind == "regular":
        ctx = parse_context(obj.get("context", {}), f"{where}.context")
        return RegularRepresentation(ctx, fiber_dim=obj.get("fiber_dim", 1))
    if kind == "unitary":
        gens = obj.get("generators")
        if not isinstance(gens, Mapping):
            raise DataValidationError("unitary representation needs 'generators'",
                                      location=where)
        return UnitaryRepresentation(
            {label: parse_matrix(mat, f"{where}.generators[{label}]")
             for label, mat in gens.items()})
    if kind == "infinite_cyclic":
        return InfiniteCyclic()
    raise DataValidationError(f"unknown representation type {kind!r}",
                              location=where)


def _parse_incidences(records, where: str) -> dict:
    if not isinstance(records, list):
        raise DataValidationError("'incidences' must be a list of records",
                                  location=where)
    out = {}
    for i, record in enumerate(records):
        spot = f"{where}[{i}]"
        if not isinstance(record, Mapping) or \
                not {"from", "to", "word"} <= set(record):
            raise DataValidationError(
                "incidence records need 'from', 'to' and 'word'", location=spot)
        key = (record["to"], record["from"])
        if key in out:
            raise DataValidationError(
                f"duplicate incidence {record['from']!r} -> {record['to']!r}",
                location=spot)
        out[key] = parse_word(record["word"], f"{spot}.word")
    return out


def parse_cw(obj, where: str = "cw") -> TwistedCellComplex:
    rep = parse_representation(obj.get("representation", {}),
                               f"{where}.representation")
    top = obj.get("top_degree")
    if not isinstance(top, int):
        raise DataValidationError("'top_degree' must be an integer",
                                  location=where)
    raw_cells = obj.get("cells", {})
    if not isinstance(raw_cells, Mapping):
        raise DataValidationError("'cells' must map degree to label list",
                                  location=where)
    cells = {}
    for key, labels in raw_cells.items():
        try:
            degree = int(key)
        except (TypeError, ValueError):
            raise DataValidationError(f"cell degree {key!r} is not an integer",
                                      location=f"{where}.cells") from None
        if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
            raise DataValidationError("cells are lists of string labels",
                                      location=f"{where}.cells[{key}]")
        cells[degree] = tuple(labels)
    incidences = _parse_incidences(obj.get("incidences", []),
                                   f"{where}.incidences")
    return TwistedCellComplex(representation=rep, cells=cells,
                              incidences=incidences, top_degree=top)


def parse_gluing(obj, where: str = "gluing") -> GluingSpec:
    for part in ("lower", "upper"):
        if not isinstance(obj.get(part), Mapping):
            raise DataValidationError(f"gluing needs an embedded '{part}' complex",
                                      location=where)
    lower = parse_cw(obj["lower"], f"{where}.lower")
    upper = parse_cw(obj["upper"], f"{where}.upper")
    coupling = _parse_incidences(obj.get("coupling", []), f"{where}.coupling")
    return GluingSpec(lower=lower, upper=upper, coupling=coupling)


def parse_ses(obj, where: str = "ses") -> ComplexSES:
    parts = {}
    for part in ("sub", "middle", "quotient"):
        if not isinstance(obj.get(part), Mapping):
            raise DataValidationError(f"ses needs an embedded '{part}' complex",
                                      location=where)
        parts[part] = parse_complex(obj[part], f"{where}.{part}")
    sub, middle, quotient = parts["sub"], parts["middle"], parts["quotient"]

    def _morphism(source, target, key):
        raw = obj.get(key)
        if not isinstance(raw, list) or len(raw) != len(source.modules):
            raise DataValidationError(
                f"'{key}' must list one matrix per degree "
                f"({len(source.modules)} expected)", location=where)
        comps = []
        for i, entry in enumerate(raw):
            dom, cod = source.modules[i], target.modules[i]
            spot = f"{where}.{key}[{i}]"
            if dom.ambient_dim == 0 or cod.ambient_dim == 0:
                matrix = np.zeros((cod.ambient_dim, dom.ambient_dim),
                                  np.complex128)
            else:
                matrix = parse_matrix(entry, spot)
            if matrix.shape != (cod.ambient_dim, dom.ambient_dim):
                raise DataValidationError(
                    f"component has shape {matrix.shape}, expected "
                    f"{(cod.ambient_dim, dom.ambient_dim)}", location=spot)
            comps.append(Morphism(dom, cod, matrix))
        return ComplexMorphism(source, target, comps)

    include = _morphism(sub, middle, "include")
    project = _morphism(middle, quotient, "project")
    return ComplexSES(include, project)


def parse_laurent_matrix(obj, where: str = "laurent") -> LaurentMatrix:
    rows = obj.get("rows")
    if not isinstance(rows, list) or not rows:
        raise DataValidationError("'rows' must be a non-empty list",
                                  location=where)
    parsed = []
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise DataValidationError("each row is a list of entries",
                                      location=f"{where}.rows[{i}]")
        entries = []
        for j, entry in enumerate(row):
            spot = f"{where}.rows[{i}][{j}]"
            if not isinstance(entry, list):
                raise DataValidationError(
                    "each entry is a list of [exponent, re, im] triples",
                    location=spot)
            terms = []
            for triple in entry:
                if (not isinstance(triple, list) or len(triple) != 3
                        or not isinstance(triple[0], int)
                        or not all(isinstance(x, (int, float)) for x in triple[1:])):
                    raise DataValidationError(
                        f"expected [exponent, re, im], got {triple!r}",
                        location=spot)
                terms.append((triple[0], complex(triple[1], triple[2])))
            entries.append(LaurentPoly(tuple(terms)))
        parsed.append(entries)
    return LaurentMatrix.from_lists(parsed)


# ---------------------------------------------------------------------------
# canonical emission


def quantize(value: float) -> float:
    """The float denoted by the 15-significant-digit decimal of ``value``."""
    if not math.isfinite(value):
        raise NumericalError("report contains a non-finite number")
    return float(format(value, ".15g"))


def _coerce(value):
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        raise NumericalError("reports carry log-scale reals, not complex values")
    return value


def _emit(value, depth: int) -> str:
    value = _coerce(value)
    pad = "  " * (depth + 1)
    close = "  " * depth
    if isinstance(value, dict):
        if not value:
            return "{}"
        keys = sorted(str(k) for k in value)
        if len(keys) != len(value):
            raise NumericalError("report keys collide after string coercion")
        items = {str(k): v for k, v in value.items()}
        body = ",\n".join(f"{pad}{json.dumps(k)}: {_emit(items[k], depth + 1)}"
                          for k in keys)
        return "{\n" + body + "\n" + close + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        body = ",\n".join(f"{pad}{_emit(x, depth + 1)}" for x in value)
        return "[\n" + body + "\n" + close + "]"
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(quantize(value), ".15g")
    if isinstance(value, str):
        return json.dumps(value)
    raise NumericalError(f"cannot serialize {type(value).__name__} in a report")


def canonical_json(report) -> str:
    """Serialize a report so that parse-then-emit is byte-identical."""
    return _emit(report, 0) + "\n"


def _format_value(value):
    value = _coerce(value)
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, float):
        return format(quantize(value), ".15g")
    return str(value)


def _text_lines(value, indent: int, lines: list) -> None:
    value = _coerce(value)
    pad = "  " * indent
    if isinstance(value, dict):
        for key in sorted(str(k) for k in value):
            item = {str(k): v for k, v in value.items()}[key]
            item = _coerce(item)
            if isinstance(item, (dict, list, tuple)) and item:
                lines.append(f"{pad}{key}:")
                _text_lines(item, indent + 1, lines)
            else:
                shown = "[]" if isinstance(item, (list, tuple)) else \
                    "{}" if isinstance(item, dict) else _format_value(item)
                lines.append(f"{pad}{key}: {shown}")
    elif isinstance(value, (list, tuple)):
        for item in value:
            item = _coerce(item)
            if isinstance(item, dict) and item and \
                    all(not isinstance(_coerce(v), (dict, list, tuple))
                        for v in item.values()):
                row = "  ".join(f"{k}={_format_value(v)}"
                                for k, v in sorted(item.items(),
                                                   key=lambda kv: str(kv[0])))
                lines.append(f"{pad}- {row}")
            elif isinstance(item, (dict, list, tuple)):
                lines.append(f"{pad}-")
                _text_lines(item, indent + 1, lines)
            else:
                lines.append(f"{pad}- {_format_value(item)}")
    else:
        lines.append(f"{pad}{_format_value(value)}")


def report_text(report) -> str:
    """Human-oriented rendering: one aligned key/value line per entry."""
    lines: list = []
    _text_lines(report, 0, lines)
    return "\n".join(lines) + "\n"

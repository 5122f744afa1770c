"""JSON documents for complexes, covers, functions, decorations and reports.

Every document is ``{"kind": ..., "version": "1", "payload": ...}``.  Rationals
are integers or strings ``"p/q"``; floats are rejected.  Nested complexes may
be inlined as full documents or referenced with ``{"ref": "relative/path"}``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import jsonschema

from .complex import CombinatorialDivisor, ConicalFace, Embedding, PLComplex, PLFunction, pl_function_from_values
from .covers import BalanceReport, ComplexCover
from .errors import ZPLError
from .monoids import AffineMonoid, KatoFan, MarkedFanPoint
from .subdivision import SubdivisionMap
from .tropical import TropicalComplex, TropicalCover

VERSION = "1"
KINDS = (
    "complex",
    "cover",
    "pl-function",
    "tropical-decoration",
    "divisor",
    "subdivision",
    "report",
    "fan",
)

_RAT_RE = re.compile(r"^-?[0-9]+(/[0-9]*[1-9][0-9]*)?$")

# ---------------------------------------------------------------------------
# schema

_int = {"type": "integer"}
_rat = {"oneOf": [{"type": "integer"}, {"type": "string", "pattern": _RAT_RE.pattern}]}
_vec = {"type": "array", "items": _int}
_mat = {"type": "array", "items": _vec}
_ratvec = {"type": "array", "items": _rat}
_id = {"type": "string", "minLength": 1}
_ref = {
    "oneOf": [
        {"type": "object", "required": ["ref"], "properties": {"ref": {"type": "string"}}, "additionalProperties": False},
        {"type": "object", "required": ["kind", "version", "payload"]},
    ]
}

PAYLOAD_SCHEMAS: dict[str, dict] = {
    "complex": {
        "type": "object",
        "required": ["faces"],
        "additionalProperties": False,
        "properties": {
            "faces": {
                "type": "object",
                "additionalProperties": {
                    "type": "object",
                    "required": ["rays", "varpi"],
                    "additionalProperties": False,
                    "properties": {"rays": _mat, "varpi": _vec},
                },
            },
            "embeddings": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["sub", "sup", "matrix"],
                    "additionalProperties": False,
                    "properties": {"sub": _id, "sup": _id, "matrix": _mat},
                },
            },
            "multi_adjacency": {"type": "boolean"},
            "pure": {"type": "boolean"},
        },
    },
    "cover": {
        "type": "object",
        "required": ["source", "target", "face_map", "lattice_maps"],
        "additionalProperties": False,
        "properties": {
            "source": _ref,
            "target": _ref,
            "face_map": {"type": "object", "additionalProperties": _id},
            "lattice_maps": {"type": "object", "additionalProperties": _mat},
            "residue_degrees": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 1}},
        },
    },
    "pl-function": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "covectors": {"type": "object", "additionalProperties": _ratvec},
            "values": {"type": "object", "additionalProperties": _rat},
        },
        "oneOf": [{"required": ["covectors"]}, {"required": ["values"]}],
    },
    "tropical-decoration": {
        "type": "object",
        "required": ["complex", "alpha"],
        "additionalProperties": False,
        "properties": {
            "complex": _ref,
            "alpha": {"type": "object", "additionalProperties": _ratvec},
            "vertical": {"type": "object", "additionalProperties": {"type": "boolean"}},
            "genus": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 0}},
        },
    },
    "divisor": {
        "type": "object",
        "required": ["coefficients"],
        "additionalProperties": False,
        "properties": {"coefficients": {"type": "object", "additionalProperties": _rat}},
    },
    "subdivision": {
        "type": "object",
        "required": ["source", "target", "face_map", "lattice_maps"],
        "additionalProperties": False,
        "properties": {
            "source": _ref,
            "target": _ref,
            "face_map": {"type": "object", "additionalProperties": _id},
            "lattice_maps": {"type": "object", "additionalProperties": _mat},
        },
    },
    "report": {
        "type": "object",
        "required": ["type", "data"],
        "properties": {"type": {"type": "string"}},
    },
    "fan": {
        "type": "object",
        "required": ["points"],
        "additionalProperties": False,
        "properties": {
            "points": {
                "type": "object",
                "additionalProperties": {
                    "type": "object",
                    "required": ["rank", "generators", "varpi"],
                    "additionalProperties": False,
                    "properties": {
                        "rank": {"type": "integer", "minimum": 0},
                        "generators": _mat,
                        "varpi": _vec,
                        "cospecializations": {"type": "object", "additionalProperties": _mat},
                    },
                },
            }
        },
    },
}

DOCUMENT_SCHEMA = {
    "type": "object",
    "required": ["kind", "version", "payload"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": list(KINDS)},
        "version": {"type": "string"},
        "payload": {},
    },
}


@dataclass(frozen=True)
class Document:
    kind: str
    version: str
    payload: Any
    origin: Path | None = field(default=None, compare=False)

    def to_json(self) -> dict:
        return {"kind": self.kind, "version": self.version, "payload": self.payload}


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ZPLError("schema-error", f"duplicate key {k!r}", path=k)
        out[k] = v
    return out


def _reject_float(text: str):
    raise ZPLError("schema-error", f"floating point value {text} is not allowed")


def _path(parts) -> str:
    out = "payload" if parts and parts[0] == "payload" else "$"
    for p in list(parts)[1 if out == "payload" else 0 :]:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _check(schema: dict, value: Any, prefix: tuple = ()) -> None:
    v = jsonschema.Draft202012Validator(schema)
    errors = sorted(v.iter_errors(value), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        where = _path(prefix + tuple(err.absolute_path))
        raise ZPLError("schema-error", f"{where}: {err.message}", path=where)


def _validate_json(data: Any) -> None:
    _check(DOCUMENT_SCHEMA, data)
    if data["version"] != VERSION:
        raise ZPLError("version-unsupported", f"version {data['version']!r}; supported: {VERSION}")
    _check(PAYLOAD_SCHEMAS[data["kind"]], data["payload"], ("payload",))


def parse_document(text: bytes | str, origin: str | Path | None = None) -> Document:
    """Structural parse of one document; semantic checks are left to validators."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ZPLError("schema-error", f"not UTF-8: {exc}") from None
    try:
        data = json.loads(text, object_pairs_hook=_no_duplicates, parse_float=_reject_float, parse_constant=_reject_float)
    except json.JSONDecodeError as exc:
        raise ZPLError("schema-error", f"line {exc.lineno} column {exc.colno}: {exc.msg}", line=exc.lineno) from None
    _validate_json(data)
    return Document(data["kind"], data["version"], data["payload"], Path(origin) if origin else None)


def load_document(path: str | Path) -> Document:
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise ZPLError("io-error", f"{p}: {exc.strerror}") from None
    return parse_document(raw, p)


def serialize_document(doc: Document) -> str:
    return json.dumps(doc.to_json(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# value encoding


def rat(x: Any) -> Fraction:
    if isinstance(x, bool):
        raise ZPLError("schema-error", "boolean where a rational was expected")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str) and _RAT_RE.match(x):
        return Fraction(x)
    raise ZPLError("schema-error", f"not a rational: {x!r}")


def rat_str(x: Fraction | int) -> str | int:
    x = Fraction(x)
    return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _mat_out(m) -> list[list[int]]:
    return [list(r) for r in m]


def _resolve(ref: dict, origin: Path | None, kind: str | tuple[str, ...]) -> Document:
    kinds = (kind,) if isinstance(kind, str) else kind
    if "ref" in ref:
        base = origin.parent if origin else Path.cwd()
        doc = load_document(base / ref["ref"])
    else:
        _validate_json(ref)
        doc = Document(ref["kind"], ref["version"], ref["payload"], origin)
    if doc.kind not in kinds:
        raise ZPLError("schema-error", f"expected {' or '.join(kinds)}, got {doc.kind}")
    return doc


def _guard(build: Callable, *args):
    try:
        return build(*args)
    except (TypeError, IndexError, KeyError) as exc:
        raise ZPLError("schema-error", f"malformed payload: {exc}") from None


def complex_to_payload(c: PLComplex) -> dict:
    out: dict = {
        "faces": {k: {"rays": _mat_out(f.rays), "varpi": list(f.varpi)} for k, f in c.faces.items()},
        "embeddings": [{"sub": e.sub, "sup": e.sup, "matrix": _mat_out(e.matrix)} for e in c.embeddings],
    }
    if c.multi_adjacency:
        out["multi_adjacency"] = True
    if not c.pure:
        out["pure"] = False
    return out


def complex_from_payload(p: dict) -> PLComplex:
    def build():
        faces = {k: ConicalFace(tuple(tuple(r) for r in f["rays"]), tuple(f["varpi"])) for k, f in p["faces"].items()}
        embs = tuple(Embedding(e["sub"], e["sup"], e["matrix"]) for e in p.get("embeddings", []))
        return PLComplex(faces, embs, p.get("multi_adjacency", False), p.get("pure", True))

    return _guard(build)


def function_to_payload(f: PLFunction) -> dict:
    return {"covectors": {k: [rat_str(x) for x in v] for k, v in f.covectors.items()}}


def function_from_payload(p: dict, c: PLComplex | None = None) -> PLFunction:
    if "covectors" in p:
        return PLFunction({k: tuple(rat(x) for x in v) for k, v in p["covectors"].items()})
    if c is None:
        raise ZPLError("schema-error", "a function given by ray values needs its complex")
    return pl_function_from_values(c, {k: rat(v) for k, v in p["values"].items()})


def divisor_to_payload(d: CombinatorialDivisor) -> dict:
    return {"coefficients": {k: rat_str(v) for k, v in d.coefficients.items()}}


def divisor_from_payload(p: dict) -> CombinatorialDivisor:
    return CombinatorialDivisor({k: rat(v) for k, v in p["coefficients"].items()})


def tropical_to_payload(t: TropicalComplex) -> dict:
    out: dict = {
        "complex": Document("complex", VERSION, complex_to_payload(t.base)).to_json(),
        "alpha": {k: [rat_str(x) for x in v] for k, v in t.alpha.items()},
    }
    if t.vertical:
        out["vertical"] = dict(t.vertical)
    if t.genus is not None:
        out["genus"] = dict(t.genus)
    return out


def tropical_from_payload(p: dict, origin: Path | None = None) -> TropicalComplex:
    base = complex_from_payload(_resolve(p["complex"], origin, "complex").payload)
    alpha = {k: tuple(rat(x) for x in v) for k, v in p["alpha"].items()}
    return TropicalComplex(base, alpha, p.get("vertical", {}), p.get("genus"))


def _side(doc: Document):
    if doc.kind == "complex":
        return complex_from_payload(doc.payload)
    return tropical_from_payload(doc.payload, doc.origin)


def cover_to_payload(phi: ComplexCover | TropicalCover) -> dict:
    if isinstance(phi, TropicalCover):
        src = Document("tropical-decoration", VERSION, tropical_to_payload(phi.source))
        tgt = Document("tropical-decoration", VERSION, tropical_to_payload(phi.target))
        phi = phi.cover
    else:
        src = Document("complex", VERSION, complex_to_payload(phi.source))
        tgt = Document("complex", VERSION, complex_to_payload(phi.target))
    out = {
        "source": src.to_json(),
        "target": tgt.to_json(),
        "face_map": dict(phi.face_map),
        "lattice_maps": {k: _mat_out(v) for k, v in phi.lattice_maps.items()},
    }
    if phi.residue_degrees:
        out["residue_degrees"] = dict(phi.residue_degrees)
    return out


def cover_from_payload(p: dict, origin: Path | None = None) -> ComplexCover | TropicalCover:
    kinds = ("complex", "tropical-decoration")
    src = _side(_resolve(p["source"], origin, kinds))
    tgt = _side(_resolve(p["target"], origin, kinds))
    if isinstance(src, TropicalComplex) != isinstance(tgt, TropicalComplex):
        raise ZPLError("schema-error", "source and target must both be complexes or both be decorated")
    s_base = src.base if isinstance(src, TropicalComplex) else src
    t_base = tgt.base if isinstance(tgt, TropicalComplex) else tgt
    phi = ComplexCover(s_base, t_base, p["face_map"], p["lattice_maps"], p.get("residue_degrees", {}))
    if isinstance(src, TropicalComplex):
        return TropicalCover(phi, src, tgt)
    return phi


def subdivision_to_payload(s: SubdivisionMap) -> dict:
    return {
        "source": Document("complex", VERSION, complex_to_payload(s.source)).to_json(),
        "target": Document("complex", VERSION, complex_to_payload(s.target)).to_json(),
        "face_map": dict(s.face_map),
        "lattice_maps": {k: _mat_out(v) for k, v in s.lattice_maps.items()},
    }


def subdivision_from_payload(p: dict, origin: Path | None = None) -> SubdivisionMap:
    src = complex_from_payload(_resolve(p["source"], origin, "complex").payload)
    tgt = complex_from_payload(_resolve(p["target"], origin, "complex").payload)
    return SubdivisionMap(src, tgt, p["face_map"], p["lattice_maps"])


def fan_to_payload(fan: KatoFan) -> dict:
    return {
        "points": {
            k: {
                "rank": p.rank,
                "generators": _mat_out(p.monoid.generators),
                "varpi": list(p.varpi),
                "cospecializations": {y: _mat_out(q) for y, q in p.cospecializations.items()},
            }
            for k, p in fan.points.items()
        }
    }


def fan_from_payload(p: dict) -> KatoFan:
    def build():
        pts = {}
        for k, q in p["points"].items():
            mon = AffineMonoid.of(q["generators"], q["rank"])
            pts[k] = MarkedFanPoint(k, mon, q["varpi"], q.get("cospecializations", {}))
        return KatoFan(pts)

    return _guard(build)


def to_document(obj: Any) -> Document:
    """Wrap an in-memory value as a document."""
    if isinstance(obj, PLComplex):
        return Document("complex", VERSION, complex_to_payload(obj))
    if isinstance(obj, (ComplexCover, TropicalCover)):
        return Document("cover", VERSION, cover_to_payload(obj))
    if isinstance(obj, PLFunction):
        return Document("pl-function", VERSION, function_to_payload(obj))
    if isinstance(obj, TropicalComplex):
        return Document("tropical-decoration", VERSION, tropical_to_payload(obj))
    if isinstance(obj, CombinatorialDivisor):
        return Document("divisor", VERSION, divisor_to_payload(obj))
    if isinstance(obj, SubdivisionMap):
        return Document("subdivision", VERSION, subdivision_to_payload(obj))
    if isinstance(obj, KatoFan):
        return Document("fan", VERSION, fan_to_payload(obj))
    if isinstance(obj, BalanceReport):
        return Document("report", VERSION, {"type": "balance", "data": obj.to_payload()})
    raise ZPLError("unsupported", f"no document kind for {type(obj).__name__}")


def from_document(doc: Document, context: PLComplex | None = None) -> Any:
    """Decode a document into its in-memory value."""
    k, p = doc.kind, doc.payload
    if k == "complex":
        return complex_from_payload(p)
    if k == "cover":
        return cover_from_payload(p, doc.origin)
    if k == "pl-function":
        return function_from_payload(p, context)
    if k == "tropical-decoration":
        return tropical_from_payload(p, doc.origin)
    if k == "divisor":
        return divisor_from_payload(p)
    if k == "subdivision":
        return subdivision_from_payload(p, doc.origin)
    if k == "fan":
        return fan_from_payload(p)
    if k == "report" and p.get("type") == "balance":
        return _guard(BalanceReport.from_payload, p["data"])
    return p


def dumps(obj: Any) -> str:
    return serialize_document(to_document(obj))


def loads(text: bytes | str, context: PLComplex | None = None) -> Any:
    return from_document(parse_document(text), context)


__all__ = [
    "DOCUMENT_SCHEMA",
    "Document",
    "KINDS",
    "PAYLOAD_SCHEMAS",
    "VERSION",
    "dumps",
    "from_document",
    "load_document",
    "loads",
    "parse_document",
    "rat",
    "rat_str",
    "serialize_document",
    "to_document",
]

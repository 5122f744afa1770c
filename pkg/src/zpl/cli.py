"""Command line front end: ``zpl <command> DOCUMENT [options]``.

Exit codes: 0 when every check passes, 1 on a semantic failure, 2 on bad
input.  ``ZPL_WORKERS`` sets how many processes per-face work may use.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

from . import __version__
from .complex import CombinatorialDivisor, ConicalFace, PLComplex, validate_complex, validate_pl_function
from .covers import (
    ComplexCover,
    balance_report,
    dilation_cover,
    pullback_cycle,
    pullback_function,
    pullback_subdivision,
    validate_cover,
)
from .errors import Report, ZPLError
from .io import Document, from_document, load_document, rat_str, serialize_document, to_document
from .measure import conformal_volume, simplicial_face_volume, truncation_volume
from .monoids import check_fan, dual_complex_from_fan, face_monoid, hilbert_basis
from .subdivision import check_proper_subdivision, hj_resolve_2d, stellar_subdivide
from .tropical import (
    TropicalComplex,
    TropicalCover,
    adjunction_residual,
    canonical_divisor,
    classify_function,
    dilate_tropical,
    laplacian,
    mult_b,
    mult_u,
    relative_canonical,
    rh_check,
    specialize,
    validate_tropical,
    validate_tropical_cover,
)

INPUT_CODES = {"schema-error", "version-unsupported", "io-error", "wrong-kind", "bad-argument"}


class Outcome:
    """Result of one command: exit status, structured data and text lines."""

    def __init__(self, status: int, data: Any, lines: list[str], document: Document | None = None):
        self.status = status
        self.data = data
        self.lines = lines
        self.document = document


# ---------------------------------------------------------------------------
# helpers


def workers() -> int:
    raw = os.environ.get("ZPL_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ZPLError("bad-argument", f"ZPL_WORKERS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ZPLError("bad-argument", f"ZPL_WORKERS must be a positive integer, got {raw!r}")
    return n


def pmap(fn: Callable, items: Sequence) -> list:
    """Ordered map, spread over processes when ZPL_WORKERS > 1."""
    n = workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _q(x) -> Any:
    if x is None:
        return None
    if isinstance(x, Fraction):
        return rat_str(x)
    return x


def _qs(x) -> str:
    return str(rat_str(x)) if x is not None else "-"


def format_divisor(d: CombinatorialDivisor, label: str | None = None) -> str:
    terms = []
    for k, v in d.coefficients.items():
        mag = str(rat_str(abs(v)))
        if not terms:
            terms.append(f"{'-' if v < 0 else ''}{mag}·[{k}]")
        else:
            terms.append(f"{'-' if v < 0 else '+'} {mag}·[{k}]")
    body = " ".join(terms) if terms else "0"
    return f"{label} = {body}" if label else body


def _divisor_data(d: CombinatorialDivisor) -> dict:
    return {k: rat_str(v) for k, v in d.coefficients.items()}


def _report_lines(rep: Report) -> list[str]:
    lines = [f"violation: {i}" for i in rep.violations]
    lines += [f"warning: {i}" for i in rep.warnings]
    return lines or ["ok"]


def _report_data(rep: Report) -> dict:
    as_dict = lambda i: {"code": i.code, "where": i.where, "detail": i.detail}  # noqa: E731
    return {
        "ok": rep.ok,
        "violations": [as_dict(i) for i in rep.violations],
        "warnings": [as_dict(i) for i in rep.warnings],
    }


def _load(path: str, kinds: tuple[str, ...]) -> tuple[Document, Any]:
    doc = load_document(path)
    if doc.kind not in kinds:
        raise ZPLError("wrong-kind", f"{path}: expected {' or '.join(kinds)}, got {doc.kind}")
    return doc, from_document(doc)


def _load_function(path: str, c: PLComplex):
    doc = load_document(path)
    if doc.kind != "pl-function":
        raise ZPLError("wrong-kind", f"{path}: expected pl-function, got {doc.kind}")
    f = from_document(doc, c)
    rep = validate_pl_function(c, f)
    if not rep.ok:
        raise ZPLError("invalid-function", "; ".join(str(i) for i in rep.violations))
    return f


def _require(rep: Report, what: str) -> Outcome | None:
    if rep.ok:
        return None
    return Outcome(1, {"valid": False, **_report_data(rep)}, [f"{what} is invalid"] + _report_lines(rep))


def _complex_of(obj) -> PLComplex:
    return obj.base if isinstance(obj, TropicalComplex) else obj


def _tropical(path: str) -> tuple[TropicalComplex, Outcome | None]:
    _, t = _load(path, ("tropical-decoration",))
    return t, _require(validate_tropical(t), "tropical complex")


def _vec(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x != "")
    except ValueError:
        raise ZPLError("bad-argument", f"not an integer vector: {text!r}") from None


# ---------------------------------------------------------------------------
# per-face workers (top level so they can be pickled)


def _face_info(item: tuple[str, ConicalFace]) -> dict:
    k, f = item
    return {
        "face": k,
        "rank": f.rank,
        "dim": f.dim,
        "rays": len(f.rays),
        "multiplicities": list(f.multiplicities),
        "root_index": f.root_index,
        "determinant": f.determinant,
        "bounded": f.is_bounded,
        "simplicial": f.is_simplicial,
    }


def _face_volume(item: tuple[str, ConicalFace]) -> dict:
    k, f = item
    out: dict = {"face": k, "volume": None, "truncated_volume": None, "determinant_formula": None}
    if f.is_bounded:
        out["volume"] = rat_str(conformal_volume(f).volume)
    if f.is_simplicial:
        out["truncated_volume"] = rat_str(truncation_volume(f))
        out["determinant_formula"] = rat_str(simplicial_face_volume(f))
    return out


def _face_hilbert(item: tuple[str, ConicalFace, bool]) -> dict:
    k, f, dual = item
    basis = face_monoid(f).generators if dual else hilbert_basis(f.rays)
    return {"face": k, "hilbert_basis": [list(v) for v in basis]}


# ---------------------------------------------------------------------------
# commands


def cmd_validate(a) -> Outcome:
    doc = load_document(a.document)
    obj = from_document(doc)
    kind = doc.kind
    data: dict = {"kind": kind}
    if kind == "complex":
        rep = validate_complex(obj)
    elif kind == "cover":
        rep = validate_tropical_cover(obj) if isinstance(obj, TropicalCover) else validate_cover(obj)
    elif kind == "tropical-decoration":
        rep = validate_tropical(obj)
        if rep.ok:
            data["mult_b"] = {t: rat_str(mult_b(obj, t)) for t in obj.base.ridges}
            data["mult_u"] = {t: rat_str(mult_u(obj, t)) for t in obj.base.ridges}
    elif kind == "subdivision":
        rep = check_proper_subdivision(obj)
    elif kind == "fan":
        rep = Report()
        try:
            check_fan(obj)
        except ZPLError as exc:
            rep.add(exc.code, "fan", str(exc))
    elif kind == "pl-function":
        if not a.complex:
            raise ZPLError("bad-argument", "validating a function needs --complex")
        _, c = _load(a.complex, ("complex", "tropical-decoration"))
        c = _complex_of(c)
        obj = from_document(doc, c)
        rep = validate_pl_function(c, obj)
    else:
        rep = Report()
    data.update(_report_data(rep))
    lines = [f"{kind}: {'valid' if rep.ok else 'invalid'}"] + (_report_lines(rep) if not rep.ok or rep.warnings else [])
    if "mult_b" in data:
        for t in data["mult_b"]:
            lines.append(f"  {t}: mult_b = {data['mult_b'][t]}, mult_u = {data['mult_u'][t]}")
    return Outcome(0 if rep.ok else 1, data, lines)


def cmd_info(a) -> Outcome:
    _, obj = _load(a.document, ("complex", "tropical-decoration"))
    c = _complex_of(obj)
    bad = _require(validate_complex(c), "complex")
    if bad:
        return bad
    rows = pmap(_face_info, list(c.faces.items()))
    lines = [f"dimension {c.dim}, {len(c.faces)} faces"]
    for r in rows:
        det = r["determinant"] if r["determinant"] is not None else "-"
        lines.append(
            f"{r['face']}: rank {r['rank']}, {r['rays']} rays, multiplicities {tuple(r['multiplicities'])}, "
            f"root index {r['root_index']}, det {det}, {'bounded' if r['bounded'] else 'unbounded'}, "
            f"{'simplicial' if r['simplicial'] else 'non-simplicial'}"
        )
    return Outcome(0, {"dim": c.dim, "faces": rows}, lines)


def cmd_volume(a) -> Outcome:
    _, obj = _load(a.document, ("complex", "tropical-decoration"))
    c = _complex_of(obj)
    bad = _require(validate_complex(c), "complex")
    if bad:
        return bad
    items = list(c.faces.items()) if not a.face else [(a.face, c.faces[a.face])] if a.face in c.faces else None
    if items is None:
        raise ZPLError("bad-argument", f"unknown face {a.face}")
    rows = pmap(_face_volume, items)
    lines = []
    for r in rows:
        parts = [f"{r['face']}: {_qs(r['volume'])}"]
        if r["truncated_volume"] is not None:
            parts.append(f"truncated {r['truncated_volume']}")
            parts.append(f"det/prod(m) {r['determinant_formula']}")
        lines.append(", ".join(parts))
    return Outcome(0, {"faces": rows}, lines)


def cmd_hilbert(a) -> Outcome:
    _, obj = _load(a.document, ("complex", "tropical-decoration"))
    c = _complex_of(obj)
    rows = pmap(_face_hilbert, [(k, f, a.dual) for k, f in c.faces.items()])
    lines = [f"{r['face']}: " + " ".join("(" + ",".join(map(str, v)) + ")" for v in r["hilbert_basis"]) for r in rows]
    return Outcome(0, {"faces": rows}, lines)


def cmd_hj(a) -> Outcome:
    res = hj_resolve_2d([_vec(a.ray1), _vec(a.ray2)])
    data = {"rays": [list(r) for r in res.rays], "inserted": [list(r) for r in res.inserted]}
    fmt = lambda v: "(" + ",".join(map(str, v)) + ")"  # noqa: E731
    lines = ["inserted: " + (" ".join(fmt(r) for r in res.inserted) or "none"), "rays: " + " ".join(fmt(r) for r in res.rays)]
    return Outcome(0, data, lines)


def cmd_subdivide(a) -> Outcome:
    _, c = _load(a.document, ("complex",))
    bad = _require(validate_complex(c), "complex")
    if bad:
        return bad
    s = stellar_subdivide(c, a.stellar, _vec(a.point))
    rep = check_proper_subdivision(s)
    doc = to_document(s)
    lines = [f"{len(s.source.faces)} faces after subdivision", "proper" if rep.ok else "not proper"]
    if not rep.ok:
        lines += _report_lines(rep)
    return Outcome(0 if rep.ok else 1, {"proper": rep.ok, **_report_data(rep)}, lines, doc)


def _cover(path: str) -> tuple[ComplexCover | TropicalCover, Outcome | None]:
    _, phi = _load(path, ("cover",))
    base = phi.cover if isinstance(phi, TropicalCover) else phi
    return phi, _require(validate_cover(base), "cover")


def cmd_balance(a) -> Outcome:
    phi, bad = _cover(a.document)
    if bad:
        return bad
    base = phi.cover if isinstance(phi, TropicalCover) else phi
    br = balance_report(base)
    lines = []
    for r, d in br.local_degrees.items():
        lines.append(f"{r}: local degree {d}")
    for r, vals in br.offending.items():
        detail = ", ".join(f"{k}={v}" for k, v in vals.items())
        lines.append(f"unbalanced-at-ridge {r}: {detail}")
    if br.balanced:
        lines.append(f"balanced, degree {br.global_degree if br.global_degree is not None else br.component_degrees}")
    else:
        lines.append("unbalanced")
    return Outcome(0 if br.balanced else 1, br.to_payload(), lines, to_document(br))


def cmd_pullback(a) -> Outcome:
    phi, bad = _cover(a.document)
    if bad:
        return bad
    base = phi.cover if isinstance(phi, TropicalCover) else phi
    chosen = [x for x in (a.cycle, a.function, a.subdivision) if x]
    if len(chosen) != 1:
        raise ZPLError("bad-argument", "give exactly one of --cycle, --function, --subdivision")
    if a.cycle:
        _, d = _load(a.cycle, ("divisor",))
        out = pullback_cycle(base, d)
        return Outcome(0, _divisor_data(out), [format_divisor(out, "pullback")], to_document(out))
    if a.function:
        f = _load_function(a.function, base.target)
        g = pullback_function(base, f)
        lines = [f"{k}: (" + ", ".join(str(rat_str(x)) for x in v) + ")" for k, v in g.covectors.items()]
        return Outcome(0, {k: [rat_str(x) for x in v] for k, v in g.covectors.items()}, lines, to_document(g))
    _, s = _load(a.subdivision, ("subdivision",))
    s_src, lifted = pullback_subdivision(base, s)
    rep = validate_cover(lifted)
    lines = [f"{len(s_src.source.faces)} faces upstairs", "cover valid" if rep.ok else "cover invalid"]
    return Outcome(0 if rep.ok else 1, _report_data(rep), lines + ([] if rep.ok else _report_lines(rep)), to_document(lifted))


def cmd_dilate(a) -> Outcome:
    _, obj = _load(a.document, ("complex", "tropical-decoration"))
    if isinstance(obj, TropicalComplex):
        bad = _require(validate_tropical(obj), "tropical complex")
        if bad:
            return bad
        tc = dilate_tropical(obj, a.e)
        phi = tc.cover
        rep = validate_tropical_cover(tc)
        doc = to_document(tc)
    else:
        bad = _require(validate_complex(obj), "complex")
        if bad:
            return bad
        phi = dilation_cover(obj, a.e)
        rep = validate_cover(phi)
        doc = to_document(phi)
    br = balance_report(phi)
    ok = rep.ok and br.balanced
    lines = [f"degree {a.e} dilation: {'valid' if rep.ok else 'invalid'}, {'balanced' if br.balanced else 'unbalanced'}"]
    for k in phi.source.faces:
        lines.append(f"{k}: index {phi.index(k)}, residue degree {phi.residue_degree(k)}")
    return Outcome(0 if ok else 1, {"valid": rep.ok, "balance": br.to_payload()}, lines, doc)


def _divisor_command(a, fn: Callable, label: str) -> Outcome:
    t, bad = _tropical(a.document)
    if bad:
        return bad
    f = _load_function(a.function, t.base)
    d = fn(t, f)
    return Outcome(0, _divisor_data(d), [format_divisor(d, label)], to_document(d))


def cmd_laplacian(a) -> Outcome:
    return _divisor_command(a, laplacian, "Δ(F)")


def cmd_specialize(a) -> Outcome:
    return _divisor_command(a, specialize, "sp(F)")


def cmd_classify(a) -> Outcome:
    t, bad = _tropical(a.document)
    if bad:
        return bad
    f = _load_function(a.function, t.base)
    kind = classify_function(t, f)
    return Outcome(0, {"class": kind}, [kind])


def cmd_canonical(a) -> Outcome:
    t, bad = _tropical(a.document)
    if bad:
        return bad
    k = canonical_divisor(t)
    return Outcome(0, _divisor_data(k), [format_divisor(k, "K")], to_document(k))


def cmd_rh(a) -> Outcome:
    _, tc = _load(a.document, ("cover",))
    if not isinstance(tc, TropicalCover):
        raise ZPLError("wrong-kind", "rh needs a cover between tropical decorations")
    bad = _require(validate_tropical_cover(tc), "tropical cover")
    if bad:
        return bad
    delta = _load_function(a.different, tc.source.base)
    rh = rh_check(tc, delta)
    adj = adjunction_residual(tc)
    lines = [
        format_divisor(rh.laplacian, "Δ(δ)"),
        format_divisor(rh.relative_canonical, "K_rel"),
        format_divisor(rh.residual, "residual"),
        f"different nonnegative: {'yes' if rh.nonnegative else 'no'}",
        f"adjunction: {'holds' if adj.is_zero() else 'fails'}",
        "pass" if rh.passed else "fail",
    ]
    data = {
        "passed": rh.passed,
        "nonnegative": rh.nonnegative,
        "laplacian": _divisor_data(rh.laplacian),
        "relative_canonical": _divisor_data(rh.relative_canonical),
        "residual": _divisor_data(rh.residual),
        "adjunction_residual": _divisor_data(adj),
    }
    return Outcome(0 if rh.passed and adj.is_zero() else 1, data, lines)


def cmd_relative_canonical(a) -> Outcome:
    _, tc = _load(a.document, ("cover",))
    if not isinstance(tc, TropicalCover):
        raise ZPLError("wrong-kind", "needs a cover between tropical decorations")
    bad = _require(validate_tropical_cover(tc), "tropical cover")
    if bad:
        return bad
    k = relative_canonical(tc)
    return Outcome(0, _divisor_data(k), [format_divisor(k, "K_rel")], to_document(k))


def cmd_dual_complex(a) -> Outcome:
    _, fan = _load(a.document, ("fan",))
    c = dual_complex_from_fan(fan)
    rep = validate_complex(c)
    lines = [f"{len(c.faces)} faces, dimension {c.dim}", "valid" if rep.ok else "invalid"]
    return Outcome(0 if rep.ok else 1, _report_data(rep), lines + ([] if rep.ok else _report_lines(rep)), to_document(c))


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("-o", "--output", help="write the produced document here")

    p = argparse.ArgumentParser(prog="zpl", description="Exact computations on Z-PL complexes.")
    p.add_argument("--version", action="version", version=f"zpl {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable, help_: str, doc: bool = True) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, parents=[common], help=help_)
        if doc:
            sp.add_argument("document")
        sp.set_defaults(run=fn)
        return sp

    sp = add("validate", cmd_validate, "validate any document")
    sp.add_argument("--complex", help="complex for a pl-function document")
    add("info", cmd_info, "per-face ranks, multiplicities, root indices, determinants")
    sp = add("volume", cmd_volume, "conformal volumes of faces and truncations")
    sp.add_argument("--face")
    sp = add("hilbert-basis", cmd_hilbert, "Hilbert bases of face cones")
    sp.add_argument("--dual", action="store_true", help="use the monoid of nonnegative functions instead")
    sp = add("hj-resolve", cmd_hj, "resolve a two-dimensional cone", doc=False)
    sp.add_argument("ray1")
    sp.add_argument("ray2")
    sp = add("subdivide", cmd_subdivide, "stellar subdivision")
    sp.add_argument("--stellar", required=True, metavar="FACE")
    sp.add_argument("--point", required=True)
    add("balance", cmd_balance, "balancing report of a cover")
    sp = add("pullback", cmd_pullback, "pull back along a cover")
    sp.add_argument("--cycle")
    sp.add_argument("--function")
    sp.add_argument("--subdivision")
    sp = add("dilate", cmd_dilate, "degree-e dilation cover")
    sp.add_argument("-e", type=int, required=True)
    for name, fn, help_ in (
        ("laplacian", cmd_laplacian, "Laplacian of a PL function"),
        ("specialize", cmd_specialize, "specialization divisor of a PL function"),
        ("classify", cmd_classify, "harmonic / convex / strongly-convex / none"),
    ):
        sp = add(name, fn, help_)
        sp.add_argument("-f", "--function", required=True)
    add("canonical", cmd_canonical, "tropical canonical divisor")
    add("relative-canonical", cmd_relative_canonical, "relative canonical divisor of a cover")
    sp = add("rh", cmd_rh, "Riemann-Hurwitz check")
    sp.add_argument("--different", required=True)
    add("dual-complex", cmd_dual_complex, "dual complex of a fan")
    return p


def _emit(outcome: Outcome, a, out) -> None:
    if a.output and outcome.document is not None:
        Path(a.output).write_text(serialize_document(outcome.document), encoding="utf-8")
    if a.format == "json":
        payload = {"command": a.command, "status": outcome.status, "result": outcome.data}
        if outcome.document is not None and not a.output:
            payload["document"] = outcome.document.to_json()
        out.write(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        out.write("\n".join(outcome.lines) + "\n")


def run_command(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        outcome = a.run(a)
    except ZPLError as exc:
        status = 2 if exc.code in INPUT_CODES else 1
        if a.format == "json":
            out.write(json.dumps({"command": a.command, "status": status, "error": {"code": exc.code, "message": str(exc)}}, sort_keys=True) + "\n")
        else:
            err.write(f"error: {exc}\n")
            if status == 1:
                out.write(f"{exc.code}\n")
        return status
    except (KeyError, IndexError, TypeError, ValueError, ArithmeticError, RecursionError) as exc:
        err.write(f"error: malformed input ({type(exc).__name__}: {exc})\n")
        return 2
    _emit(outcome, a, out)
    return outcome.status


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()

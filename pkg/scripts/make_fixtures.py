"""Regenerate fixtures/examples from the catalog.

Expected outputs are written only when missing; delete a file to refresh it
after checking the new output by hand.
"""

from __future__ import annotations

import io
import json
import shlex
import sys
from pathlib import Path

from zpl import catalog
from zpl.cli import run_command
from zpl.complex import PLFunction
from zpl.io import Document, VERSION, serialize_document, to_document
from zpl.monoids import AffineMonoid, KatoFan, MarkedFanPoint

ROOT = Path(__file__).resolve().parent.parent / "fixtures" / "examples"


def five_ray_fan() -> KatoFan:
    mon = catalog.five_ray_monoid()
    return KatoFan(
        {
            "x": MarkedFanPoint("x", mon, catalog.FIVE_RAY_MONOID_VARPI, {"y1": ((2, -1),), "y2": ((2, 1),)}),
            "y1": MarkedFanPoint("y1", AffineMonoid.of([[1]]), (2,)),
            "y2": MarkedFanPoint("y2", AffineMonoid.of([[1]]), (2,)),
        }
    )


def values(v: dict) -> Document:
    return Document("pl-function", VERSION, {"values": v})


def documents() -> dict[str, Document]:
    path = catalog.path_tropical(3, vertical={"v0": False, "v2": False})
    return {
        "segments.json": to_document(catalog.segments_complex()),
        "five_ray_face.json": to_document(catalog.five_ray_complex()),
        "five_ray_fan.json": to_document(five_ray_fan()),
        "rectangle.json": to_document(catalog.rectangle_complex()),
        "path.json": to_document(path),
        "path_bump.json": values({"v0": 0, "v1": 1, "v2": 0}),
        "path_dip.json": values({"v0": 0, "v1": -1, "v2": 0}),
        "path_linear.json": values({"v0": 0, "v1": 1, "v2": 2}),
        "folded_path_cover.json": to_document(catalog.folded_path_cover()),
        "folded_delta.json": values(catalog.FOLDED_DIFFERENT),
        "folded_zero.json": values({"w0": 0, "w1": 0, "w2": 0}),
        "cycle_double_cover.json": to_document(catalog.cycle_double_cover()),
        "cycle_zero.json": values({k: 0 for k in ("a0", "a1", "b0", "b1")}),
        "mixed_index_cover.json": to_document(catalog.mixed_index_cover()),
    }


# (name, argv relative to the fixture directory, expected exit status)
COMMANDS = [
    ("segments-volume", "volume segments.json", 0),
    ("segments-validate", "validate segments.json", 0),
    ("monoid-volume", "volume five_ray_face.json", 0),
    ("monoid-info", "info five_ray_face.json", 0),
    ("monoid-dual-complex", "dual-complex five_ray_fan.json", 0),
    ("rectangle-info", "info rectangle.json", 0),
    ("path-validate", "validate path.json", 0),
    ("path-laplacian", "laplacian path.json -f path_bump.json", 0),
    ("path-specialize", "specialize path.json -f path_bump.json", 0),
    ("path-classify-bump", "classify path.json -f path_bump.json", 0),
    ("path-classify-dip", "classify path.json -f path_dip.json", 0),
    ("path-classify-linear", "classify path.json -f path_linear.json", 0),
    ("path-canonical", "canonical path.json", 0),
    ("folded-rh", "rh folded_path_cover.json --different folded_delta.json", 0),
    ("folded-rh-zero", "rh folded_path_cover.json --different folded_zero.json", 1),
    ("folded-balance", "balance folded_path_cover.json", 0),
    ("cycle-rh", "rh cycle_double_cover.json --different cycle_zero.json", 0),
    ("mixed-balance", "balance mixed_index_cover.json", 1),
    ("hj-3-7", "hj-resolve 1,0 3,7", 0),
]


def run(argv: str) -> tuple[int, str]:
    out, err = io.StringIO(), io.StringIO()
    status = run_command(shlex.split(argv), out, err)
    return status, out.getvalue()


def main() -> int:
    import os

    ROOT.mkdir(parents=True, exist_ok=True)
    for name, doc in documents().items():
        (ROOT / name).write_text(serialize_document(doc), encoding="utf-8")
    os.chdir(ROOT)
    manifest = []
    failed = False
    for name, argv, status in COMMANDS:
        got, text = run(argv)
        exp = ROOT / f"{name}.expected"
        if not exp.exists():
            exp.write_text(text, encoding="utf-8")
        if got != status:
            print(f"{name}: exit {got}, wanted {status}", file=sys.stderr)
            failed = True
        manifest.append({"name": name, "argv": argv, "status": status, "expected": exp.name})
    (ROOT / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

"""Bundled example geometries.

Static examples are JSON files next to this module; ``product_p`` and
``blowup_p`` are parametric and need ``param``.
"""
from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources

from ..errors import GeometryError

PARAMETRIC = ("product_p", "blowup_p")


def names() -> list[str]:
    files = resources.files(__name__)
    static = sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))
    return static + list(PARAMETRIC)


def load_document(name: str, param=None) -> dict:
    """JSON document for a bundled example."""
    if name in PARAMETRIC:
        if param is None:
            raise GeometryError("%s needs --param" % name)
        p = Fraction(str(param))
        if name == "product_p":
            verts = [[0, 0], [p, 0], [p, 1], [0, 1]]
        else:
            if not 0 < p < 1:
                raise GeometryError("blowup_p needs 0 < p < 1")
            verts = [[0, 0], [p, 0], [p, 1 - p], [0, 1]]
        return {"dim": 2, "name": "%s=%s" % (name, param), "vertices": [[str(x) for x in v] for v in verts]}
    path = resources.files(__name__) / (name + ".json")
    if not path.is_file():
        raise GeometryError("unknown bundled example %r (available: %s)" % (name, ", ".join(names())))
    return json.loads(path.read_text(), parse_float=Fraction)

"""JSON encoding with 17 significant digits for every float."""
from __future__ import annotations

import json
import math

import numpy as np

from .costs import CostSpec, score
from .errors import InvalidInput
from .finite_match import Matching
from .points import PointConfig, config_from_dict, config_to_dict


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    if "." not in s and "e" not in s and "n" not in s:
        s += ".0"
    return s


def _emit(obj, indent, level, out):
    pad = " " * (indent * (level + 1)) if indent else ""
    end = " " * (indent * level) if indent else ""
    nl = "\n" if indent else ""
    sep = ", " if not indent else ","
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{" + nl)
        items = list(obj.items())
        for k, (key, val) in enumerate(items):
            out.append(pad + json.dumps(str(key)) + ": ")
            _emit(val, indent, level + 1, out)
            out.append((sep if k < len(items) - 1 else "") + nl)
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        flat = all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq)
        if flat or not indent:
            out.append("[")
            for k, v in enumerate(seq):
                _emit(v, 0, 0, out)
                if k < len(seq) - 1:
                    out.append(", ")
            out.append("]")
            return
        out.append("[" + nl)
        for k, v in enumerate(seq):
            out.append(pad)
            _emit(v, indent, level + 1, out)
            out.append((sep if k < len(seq) - 1 else "") + nl)
        out.append(end + "]")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif obj is None:
        out.append("null")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    out: list[str] = []
    _emit(obj, indent, 0, out)
    return "".join(out)


def unmatched_list(config: PointConfig, m) -> list:
    if config.two_colour:
        return [["r", i] for i in m.unmatched_red] + [["b", j] for j in m.unmatched_blue]
    return list(m.unmatched_red)


def boundary_list(config: PointConfig, m) -> list:
    if config.two_colour:
        return [["r", i] for i in m.boundary_red] + [["b", j] for j in m.boundary_blue]
    return list(m.boundary_red)


def matching_to_dict(config: PointConfig, m, spec=None, include_config: bool = True) -> dict:
    d = {"edges": [list(e) for e in m.edges], "unmatched": unmatched_list(config, m)}
    if spec is not None:
        spec = CostSpec.parse(spec)
        d["gamma"] = spec.label
        d["score"] = score(spec, config, m).to_dict()
    d["tie"] = bool(getattr(m, "tie", False))
    if hasattr(m, "boundary_red"):
        d["boundary"] = boundary_list(config, m)
    if include_config:
        d["config"] = config_to_dict(config)
    return d


def _unpack_unmatched(config, items):
    ur, ub = [], []
    for it in items:
        if isinstance(it, (list, tuple)):
            (ur if it[0] == "r" else ub).append(int(it[1]))
        else:
            ur.append(int(it))
    return ur, ub


def matching_from_dict(d: dict, config: PointConfig | None = None):
    """Matching (or window matching, when "boundary" is present) and its configuration."""
    if config is None:
        if "config" not in d:
            raise InvalidInput("matching file has no embedded configuration; pass the points separately")
        config = config_from_dict(d["config"])
    edges = [tuple(int(v) for v in e) for e in d.get("edges", [])]
    if "boundary" in d:
        from .line_constructions import _make

        br, bb = _unpack_unmatched(config, d["boundary"])
        ur, ub = _unpack_unmatched(config, d.get("unmatched", []))
        return _make(config, edges, br, bb, ur, ub), config
    m = Matching.from_edges(config, edges, bool(d.get("tie", False)))
    return m, config

"""JSON model files.

A model file holds one of

* a realization: ``{"A": [[..]], "B": [[..]], "C": [[..]], "D": [[..]]}`` (D optional);
* a transfer-function grid: ``{"tf_blocks": [[block | null, ...], ...]}`` where a
  block is ``{"type": "second_order", "k", "wn", "zeta"}``,
  ``{"type": "first_order", "k", "wc"}``, ``{"type": "biquad", "num", "den"}``,
  ``{"type": "pd", "kp", "kd", "tk"}`` or ``{"type": "gain", "k"}``;
* a static gain ``{"gain": [[..]]}`` or ``{"identity": n}``;
* a block-assembled realization ``{"data": "file.json", "A": [["A_r", "A_rf"], [0, "A_f"]], ...}``
  whose string entries name matrices stored in the data file and whose zeros
  are zero blocks of inferred size;
* an interconnection recipe ``{"include": [...], "subsystems": {name: spec},
  "steps": [{"name", "op", ...}], "output": name}``.

Recipe ops: ``series`` (``chain``: names in signal order), ``feedback``
(``plant``, ``controller``, ``sign``, optional ``inputs``/``outputs``),
``select_outputs``/``select_inputs`` (``model``, ``indices``, 0-based),
``sum_at_output`` (``model``, ``disturbance``), ``append_inputs``
(``model``, ``n``), ``diagonal`` (``models``).
"""

import json
import numbers
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import ss
from .errors import CovkitError, ModelParseError


@dataclass
class ModelFile:
    path: Path
    model: ss.StateSpaceModel
    named: dict = field(default_factory=dict)  # every subsystem and step result
    loops: list = field(default_factory=list)  # (step name, det(I - sign*D_fb*D)) per feedback


def bundled_path(name=""):
    return Path(str(resources.files("covkit") / "data")) / name


def resolve_path(path):
    """Use ``path`` if it exists, else look it up among the bundled scenarios."""
    p = Path(path)
    if p.exists():
        return p
    candidate = bundled_path(str(path))
    if candidate.exists():
        return candidate
    raise ModelParseError(f"{path}: no such file (and no bundled scenario of that name)")


def _read_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelParseError(f"{path}: {exc}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}")


def load_model(path):
    """Parse a model file; returns a ``ModelFile``."""
    path = resolve_path(path)
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise ModelParseError(f"{path}: top level must be a JSON object")
    try:
        if "steps" in doc or "subsystems" in doc or "include" in doc:
            return _load_recipe(doc, path)
        return ModelFile(path, build_model(doc, path.parent))
    except ModelParseError:
        raise
    except (CovkitError, KeyError, TypeError, ValueError, IndexError) as exc:
        what = f"missing key {exc}" if isinstance(exc, KeyError) else str(exc)
        raise ModelParseError(f"{path}: {what}") from exc


def _numeric_grid(x):
    return isinstance(x, list) and all(
        isinstance(row, list) and all(isinstance(v, numbers.Real) and not isinstance(v, bool)
                                      for v in row)
        for row in x)


def _matrix(x, what):
    if isinstance(x, numbers.Real):
        return np.array([[float(x)]])
    if not _numeric_grid(x):
        raise ModelParseError(f"{what} must be a list of numeric rows")
    if x and any(len(row) != len(x[0]) for row in x):
        raise ModelParseError(f"{what} has ragged rows")
    return np.array(x, dtype=float).reshape(len(x), len(x[0]) if x else 0)


_TF_BUILDERS = {
    "second_order": lambda b: ss.second_order_siso(b["k"], b["wn"], b["zeta"]),
    "first_order": lambda b: ss.first_order_siso(b["k"], b["wc"]),
    "biquad": lambda b: ss.biquad_siso(b["num"], b["den"]),
    "pd": lambda b: ss.pd_controller(b["kp"], b["kd"], b["tk"]),
    "gain": lambda b: ss.static_gain([[b["k"]]]),
}


def _tf_block(b):
    if b is None:
        return None
    kind = b.get("type")
    if kind not in _TF_BUILDERS:
        raise ModelParseError(f"unknown tf block type {kind!r}")
    return _TF_BUILDERS[kind](b)


def build_model(spec, base_dir, context=None):
    """Build a ``StateSpaceModel`` from one model spec (see module docstring)."""
    if not isinstance(spec, dict):
        raise ModelParseError(f"model spec must be an object, got {type(spec).__name__}")
    labels = dict(input_labels=spec.get("input_labels"), output_labels=spec.get("output_labels"))
    if "file" in spec:
        return load_model(Path(base_dir) / spec["file"]).model
    if "ref" in spec:
        return context[spec["ref"]]
    if "tf_blocks" in spec:
        grid = [[_tf_block(b) for b in row] for row in spec["tf_blocks"]]
        m = ss.mimo_from_blocks(grid)
        return ss.StateSpaceModel(m.A, m.B, m.C, m.D, **labels)
    if "identity" in spec:
        return ss.identity(int(spec["identity"]))
    if "gain" in spec:
        return ss.static_gain(_matrix(spec["gain"], "gain"))
    if "A" in spec:
        if "data" in spec:
            data = _read_json(Path(base_dir) / spec["data"])
            mats = {k: _matrix(v, k) for k, v in data.items() if not k.startswith("_")}
            parts, state_split = {}, None
            for k in "ABCD":
                if k in spec:
                    # B's block rows and C's block columns follow A's partition
                    hint = {"B": ("rows", state_split), "C": ("cols", state_split)}.get(k)
                    parts[k], split = _assemble(spec[k], mats, k, hint)
                    if k == "A":
                        state_split = split[0]
        else:
            parts = {k: _matrix(spec[k], k) for k in "ABCD" if k in spec}
        return ss.StateSpaceModel(parts["A"], parts["B"], parts["C"], parts.get("D"), **labels)
    raise ModelParseError("model spec needs one of A/B/C, tf_blocks, gain, identity, file, ref")


def _assemble(grid, mats, what, hint=None):
    """Assemble a block grid; returns the matrix and its (row, column) block sizes."""
    if _numeric_grid(grid):
        m = _matrix(grid, what)
        return m, ([m.shape[0]], [m.shape[1]])
    if any(len(row) != len(grid[0]) for row in grid):
        raise ModelParseError(f"{what}: block grid has ragged rows")
    blocks = [[mats[v] if isinstance(v, str) else None for v in row] for row in grid]
    heights = [next((b.shape[0] for b in row if b is not None), None) for row in blocks]
    widths = [next((row[j].shape[1] for row in blocks if row[j] is not None), None)
              for j in range(len(blocks[0]))]
    if hint is not None and hint[1] is not None:
        known = heights if hint[0] == "rows" else widths
        if len(known) == len(hint[1]):
            known[:] = [h if k is None else k for k, h in zip(known, hint[1])]
    if None in heights or None in widths:
        raise ModelParseError(f"{what}: cannot infer the size of an all-zero block row/column")
    rows = []
    for i, row in enumerate(blocks):
        rows.append([np.zeros((heights[i], widths[j])) if b is None else b
                     for j, b in enumerate(row)])
    return np.block(rows), (heights, widths)


_OPS = {
    "series": lambda s, n: ss.chain(*[n[x] for x in s["chain"]]),
    "feedback": lambda s, n: ss.feedback(n[s["plant"]], n[s["controller"]], s.get("sign", -1),
                                         s.get("inputs"), s.get("outputs")),
    "select_outputs": lambda s, n: ss.select_outputs(n[s["model"]], s["indices"]),
    "select_inputs": lambda s, n: ss.select_inputs(n[s["model"]], s["indices"]),
    "sum_at_output": lambda s, n: ss.sum_at_output(n[s["model"]], n[s["disturbance"]]),
    "append_inputs": lambda s, n: ss.append_inputs(n[s["model"]], int(s["n"])),
    "diagonal": lambda s, n: ss.diagonal(*[n[x] for x in s["models"]]),
}


def _collect_subsystems(doc, base_dir, seen):
    specs = {}
    for inc in doc.get("include", []):
        inc_path = (Path(base_dir) / inc).resolve()
        if inc_path in seen:
            raise ModelParseError(f"include cycle through {inc_path}")
        inc_doc = _read_json(inc_path)
        specs.update(_collect_subsystems(inc_doc, inc_path.parent, seen | {inc_path}))
    for name, spec in doc.get("subsystems", {}).items():
        specs[name] = (spec, Path(base_dir))
    return specs


def _load_recipe(doc, path):
    named = {}
    specs = _collect_subsystems(doc, path.parent, {path.resolve()})
    for name, (spec, base_dir) in specs.items():
        try:
            named[name] = build_model(spec, base_dir, named)
        except KeyError as exc:
            raise ModelParseError(f"subsystem {name!r}: missing key {exc}") from exc
    loops = []
    for k, step in enumerate(doc.get("steps", [])):
        op = step.get("op")
        name = step.get("name", f"step{k}")
        if op not in _OPS:
            raise ModelParseError(f"step {name!r}: unknown op {op!r}")
        try:
            if op == "feedback":
                det = ss.feedback_determinant(named[step["plant"]], named[step["controller"]],
                                              step.get("sign", -1), step.get("inputs"),
                                              step.get("outputs"))
                loops.append((name, det))
            named[name] = _OPS[op](step, named)
        except KeyError as exc:
            raise ModelParseError(f"step {name!r}: unresolved name or missing key {exc}") from exc
    out = doc.get("output")
    if out is None:
        if not doc.get("steps"):
            raise ModelParseError("recipe needs an 'output' entry")
        out = doc["steps"][-1].get("name", f"step{len(doc['steps']) - 1}")
    if out not in named:
        raise ModelParseError(f"output {out!r} is not a subsystem or step name")
    return ModelFile(path, named[out], named, loops)


def model_to_dict(model):
    d = {k: getattr(model, k).tolist() for k in "ABCD"}
    if model.input_labels:
        d["input_labels"] = list(model.input_labels)
    if model.output_labels:
        d["output_labels"] = list(model.output_labels)
    return d


def dump_model(model, path):
    """Write the realization losslessly (floats use shortest round-trip repr)."""
    atomic_write_text(path, json.dumps(model_to_dict(model), indent=1) + "\n")


def atomic_write_text(path, text):
    path = Path(path)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    tmp.write_text(text)
    os.replace(tmp, path)

"""Structured (JSON) serialization of reports.

JSON has no literal for infinity, so non-finite floats are written as an
explicit sentinel object ``{"nonfinite": "-inf"}`` (or ``"inf"``, ``"nan"``)
and restored by :func:`loads`.  Finite floats are written with Python's
shortest round-tripping repr, so re-parsed values are bit-identical.
"""

import dataclasses
import json
import math

import numpy as np

SENTINEL_KEY = "nonfinite"


def to_jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        for name in ("reconstruction", "residual", "total", "z_bound", "separated"):
            if hasattr(type(obj), name) and isinstance(getattr(type(obj), name), property):
                out[name] = to_jsonable(getattr(obj, name))
        return out
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set)):
        return [to_jsonable(v) for v in (sorted(obj) if isinstance(obj, set) else obj)]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return {SENTINEL_KEY: "nan" if math.isnan(x) else ("-inf" if x < 0 else "inf")}
    return obj


def _restore(obj):
    if isinstance(obj, dict):
        if set(obj) == {SENTINEL_KEY}:
            return float(obj[SENTINEL_KEY])
        return {k: _restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    return obj


def dumps(obj, **kw):
    return json.dumps(to_jsonable(obj), allow_nan=False, **kw)


def loads(text):
    return _restore(json.loads(text))

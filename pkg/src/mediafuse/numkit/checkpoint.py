"""Model checkpoint files.

A checkpoint is one JSON document::

    {"format": "mediafuse-checkpoint/1",
     "header": {"model": ..., "seed": ..., "hyperparameters": {...},
                "params": [{"name": ..., "shape": [...]}, ...], ...},
     "params": [flat float64 values, concatenated in header["params"] order]}

Floats are written with ``repr`` precision, so a load/save round trip is
exact.
"""

import json

import numpy as np

from ..errors import ParseError

FORMAT = "mediafuse-checkpoint/1"


def dumps(header, named_params):
    entries = []
    flat = []
    for name, arr in named_params:
        arr = np.asarray(arr, dtype=np.float64)
        entries.append({"name": name, "shape": list(arr.shape)})
        flat.extend(float(v) for v in arr.ravel())
    doc = {"format": FORMAT, "header": dict(header, params=entries), "params": flat}
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def save(path, header, named_params):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(header, named_params))


def loads(text, path=None):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid checkpoint JSON: {exc.msg}", line=exc.lineno, path=path) from None
    if doc.get("format") != FORMAT:
        raise ParseError(f"not a {FORMAT} file", path=path)
    header = doc["header"]
    flat = np.array(doc["params"], dtype=np.float64)
    params = {}
    pos = 0
    for entry in header["params"]:
        shape = tuple(entry["shape"])
        n = int(np.prod(shape)) if shape else 1
        params[entry["name"]] = flat[pos:pos + n].reshape(shape).copy()
        pos += n
    if pos != flat.size:
        raise ParseError(f"checkpoint holds {flat.size} values, header describes {pos}", path=path)
    return header, params


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), path=path)

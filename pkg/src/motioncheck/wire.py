"""Attribute-value text codec for HTTP payloads.

A payload is a sequence of blocks separated by blank lines; each block
line is ``key: value``. Arrays travel as three keys: ``<name>.dtype``
(numpy dtype string), ``<name>.shape`` (space-separated), and
``<name>.b64`` (base64 of the raw little-endian bytes).
"""

from __future__ import annotations

import base64
from typing import Dict, List, Union

import numpy as np

Scalar = Union[str, int, float, bool]
Value = Union[Scalar, np.ndarray]


def encode_block(fields: Dict[str, Value]) -> str:
    lines = []
    for key, value in fields.items():
        if isinstance(value, np.ndarray):
            data = np.ascontiguousarray(value)
            if data.dtype.byteorder == ">":
                data = data.astype(data.dtype.newbyteorder("<"))
            lines.append(f"{key}.dtype: {data.dtype.str}")
            lines.append(f"{key}.shape: {' '.join(str(s) for s in data.shape)}")
            lines.append(f"{key}.b64: {base64.b64encode(data.tobytes()).decode()}")
        elif isinstance(value, bool):
            lines.append(f"{key}: {'true' if value else 'false'}")
        elif isinstance(value, float):
            lines.append(f"{key}: {value:.17g}")
        elif isinstance(value, str):
            # Quote strings a decoder would mistake for another type.
            if value != _parse_scalar(value) or value.startswith('"'):
                value = f'"{value}"'
            lines.append(f"{key}: {value}")
        else:
            lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"


def encode_payload(blocks: List[Dict[str, Value]]) -> str:
    return "\n".join(encode_block(b) for b in blocks)


def decode_payload(text: str) -> List[Dict[str, Value]]:
    """Inverse of encode_payload; array triplets come back as ndarrays."""
    blocks: List[Dict[str, Value]] = []
    current: Dict[str, str] = {}
    for raw in text.splitlines() + [""]:
        line = raw.rstrip("\n")
        if not line.strip():
            if current:
                blocks.append(_decode_block(current))
                current = {}
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ValueError(f"line without ':' separator: {line!r}")
        current[key.strip()] = value.strip()
    return blocks


def _decode_block(fields: Dict[str, str]) -> Dict[str, Value]:
    out: Dict[str, Value] = {}
    arrays: Dict[str, Dict[str, str]] = {}
    for key, value in fields.items():
        if "." in key and key.rsplit(".", 1)[1] in ("dtype", "shape", "b64"):
            name, part = key.rsplit(".", 1)
            arrays.setdefault(name, {})[part] = value
        else:
            out[key] = _parse_scalar(value)
    for name, parts in arrays.items():
        missing = {"dtype", "shape", "b64"} - set(parts)
        if missing:
            raise ValueError(f"array {name!r} is missing {sorted(missing)}")
        shape = tuple(int(s) for s in parts["shape"].split()) if parts["shape"] else ()
        data = np.frombuffer(base64.b64decode(parts["b64"]), dtype=np.dtype(parts["dtype"]))
        out[name] = data.reshape(shape)
    return out


def _parse_scalar(value: str) -> Scalar:
    if len(value) >= 2 and value.startswith('"') and value.endswith('"'):
        return value[1:-1]
    if value == "true":
        return True
    if value == "false":
        return False
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        pass
    return value

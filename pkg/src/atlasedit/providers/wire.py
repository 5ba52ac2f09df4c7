"""Array <-> JSON wire codec shared by the remote client and serve mode."""

from __future__ import annotations

import base64

import numpy as np

from ..atlas_core.types import ValidationError

_ALLOWED_DTYPES = {"float32", "float64", "uint8", "bool", "int64"}


def encode_array(arr: np.ndarray) -> dict:
    arr = np.ascontiguousarray(arr)
    if arr.dtype.name not in _ALLOWED_DTYPES:
        raise ValidationError(f"refusing to send dtype {arr.dtype.name}")
    return {
        "shape": list(arr.shape),
        "dtype": arr.dtype.name,
        "data": base64.b64encode(arr.tobytes()).decode("ascii"),
    }


def decode_array(payload: dict) -> np.ndarray:
    if not isinstance(payload, dict) or not {"shape", "dtype", "data"} <= payload.keys():
        raise ValidationError("array payload must carry shape, dtype, data")
    dtype = str(payload["dtype"])
    if dtype not in _ALLOWED_DTYPES:
        raise ValidationError(f"refusing to decode dtype {dtype}")
    raw = base64.b64decode(payload["data"])
    arr = np.frombuffer(raw, dtype=np.dtype(dtype))
    return arr.reshape(payload["shape"]).copy()

"""JSON descriptors for systems: explicit coefficients or preset references.

Complex numbers are [re, im] pairs everywhere so the files stay language
neutral and diff friendly.  Round-tripping an explicit descriptor through
the matrix type reproduces it value for value.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import InputError
from .lax import FinitePole, InfinityPart, LaxMatrix
from .presets import PresetSystem, make_preset


def _pair(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _matrix_to_json(m: np.ndarray) -> list:
    return [[_pair(v) for v in row] for row in m]


def _stack_to_json(stack: np.ndarray) -> list:
    return [_matrix_to_json(m) for m in stack]


def _value_from_json(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise InputError(f"complex scalar must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def _stack_from_json(data, r: int, what: str) -> np.ndarray:
    try:
        arr = np.array(
            [[[_value_from_json(v) for v in row] for row in mat] for mat in data],
            dtype=complex,
        )
    except (TypeError, ValueError, InputError) as exc:
        raise InputError(f"{what}: malformed coefficient block ({exc})") from exc
    if arr.ndim != 3 or arr.shape[1:] != (r, r):
        raise InputError(f"{what}: expected shape (*, {r}, {r}), got {arr.shape}")
    return arr


def lax_to_descriptor(lax: LaxMatrix) -> dict:
    poles = []
    for pole in lax.poles:
        poles.append({
            "c": _pair(pole.loc),
            "d": pole.d,
            "coeffs": _stack_to_json(pole.coeffs),
        })
    return {
        "r": lax.r,
        "poles": poles,
        "infinity": {
            "d": lax.infinity.d,
            "coeffs": _stack_to_json(lax.infinity.coeffs),
        },
    }


def descriptor_to_lax(data: dict) -> LaxMatrix:
    """Explicit-form descriptor to matrix.  Structural errors raise
    InputError; spectral validity is the caller's concern."""
    try:
        r = int(data["r"])
    except (KeyError, TypeError, ValueError):
        raise InputError("descriptor needs an integer field 'r'") from None
    poles = []
    for k, rec in enumerate(data.get("poles", [])):
        try:
            loc = _value_from_json(rec["c"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"pole {k}: missing/invalid 'c' ({exc})") from exc
        coeffs = _stack_from_json(rec.get("coeffs", []), r, f"pole {k}")
        if "d" in rec and int(rec["d"]) != coeffs.shape[0] - 1:
            raise InputError(
                f"pole {k}: declared d={rec['d']} but {coeffs.shape[0]} "
                f"coefficients given"
            )
        if coeffs.shape[0] == 0:
            raise InputError(f"pole {k}: empty coefficient stack")
        poles.append(FinitePole(loc, coeffs))
    inf = data.get("infinity", {"d": 0, "coeffs": []})
    icoeffs = _stack_from_json(inf.get("coeffs", []), r, "infinity") \
        if inf.get("coeffs") else np.zeros((0, r, r), dtype=complex)
    if "d" in inf and int(inf["d"]) != icoeffs.shape[0]:
        raise InputError(
            f"infinity: declared d={inf['d']} but {icoeffs.shape[0]} "
            f"coefficients given"
        )
    return LaxMatrix(poles, InfinityPart(icoeffs, r=r))


def _preset_coords_from_json(coords: dict) -> dict:
    out = {}
    for key, val in coords.items():
        if isinstance(val, (list, tuple)) and val and \
                isinstance(val[0], (list, tuple)):
            out[key] = val  # nested array (residue matrices); builder converts
        elif isinstance(val, (list, tuple)) and len(val) == 2 and \
                all(isinstance(x, (int, float)) for x in val):
            out[key] = complex(val[0], val[1])
        else:
            out[key] = val
    return out


def load_system(data: dict):
    """Descriptor dict to (LaxMatrix, PresetSystem | None)."""
    if not isinstance(data, dict):
        raise InputError("descriptor must be a JSON object")
    if "preset" in data:
        rec = data["preset"]
        try:
            name = rec["name"]
        except (KeyError, TypeError):
            raise InputError("preset descriptor needs 'name'") from None
        coords = _preset_coords_from_json(rec.get("coordinates", {}))
        preset = make_preset(name, coords)
        return preset.lax, preset
    return descriptor_to_lax(data), None


def load_system_file(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: "
            f"{exc.msg}"
        ) from exc
    return load_system(data)


def _coord_to_json(val):
    if isinstance(val, np.ndarray):
        return _matrix_to_json(val)
    if isinstance(val, (list, tuple)):
        return [_coord_to_json(v) for v in val]
    return _pair(val)


def preset_descriptor(preset: PresetSystem) -> dict:
    coords = {key: _coord_to_json(val) for key, val in preset.coords.items()}
    return {"preset": {"name": preset.name, "coordinates": coords}}

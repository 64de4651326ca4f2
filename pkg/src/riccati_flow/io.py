"""JSON inputs and CSV outputs.

Matrices are stored as ``{"rows": n, "cols": m, "re": [[...]], "im": [[...]]}``.
Plain nested lists of reals and bare scalars are accepted on input as a
convenience.  CSV files carry a header row, 17 significant digits and
optional ``#``-prefixed footer sections.
"""

from __future__ import annotations

import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .errors import SpecError, UsageError
from .hjcf import JordanSpec
from .pairs import HermitianBlock, PairClass, SymplecticPair, from_pair
from .sda import CareProblem, DareProblem, NmeProblem, cayley


# ---------------------------------------------------------------- matrices

def matrix_to_json(A) -> dict:
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    return {"rows": A.shape[0], "cols": A.shape[1],
            "re": A.real.tolist(), "im": A.imag.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    """Parse a matrix in any accepted form; raises :class:`UsageError`."""
    try:
        if isinstance(obj, dict):
            re = np.asarray(obj["re"], dtype=float)
            im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
            A = np.atleast_2d(re + 1j * im)
            shape = (int(obj.get("rows", A.shape[0])), int(obj.get("cols", A.shape[1])))
            if A.shape != shape or re.shape != im.shape:
                raise UsageError(f"matrix shape mismatch: declared {shape}, got {A.shape}")
            return A
        if isinstance(obj, (int, float)) and not isinstance(obj, bool):
            return np.array([[complex(obj)]])
        if isinstance(obj, list):
            A = np.asarray(obj, dtype=float)
            if A.ndim != 2:
                raise UsageError("nested matrix lists must be two-dimensional")
            return A.astype(complex)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed matrix: {exc}") from exc
    raise UsageError(f"cannot read a matrix from {type(obj).__name__}")


def load_json(path) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {p}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{p} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"{p}: top level must be an object")
    return data


def _field(data: dict, key: str) -> np.ndarray:
    if key not in data:
        raise UsageError(f"missing field {key!r}")
    return matrix_from_json(data[key])


# ---------------------------------------------------------------- problems

def problem_from_dict(data: dict):
    """``{"type": "dare" | "nme" | "care", ...}`` to a problem object.

    CARE problems are mapped to a DARE through the Cayley transform with
    shift ``gamma`` (default 1).
    """
    kind = str(data.get("type", "")).lower()
    try:
        if kind == "dare":
            return DareProblem(_field(data, "A"), _field(data, "G"), _field(data, "H"))
        if kind == "nme":
            return NmeProblem(_field(data, "A"), _field(data, "Q"))
        if kind == "care":
            care = CareProblem(_field(data, "A"), _field(data, "G"), _field(data, "H"))
            return cayley(care, float(data.get("gamma", 1.0)))
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(str(exc)) from exc
    raise UsageError(f"problem type must be dare, nme or care, got {data.get('type')!r}")


def problem_to_dict(problem) -> dict:
    if isinstance(problem, DareProblem):
        return {"type": "dare", "A": matrix_to_json(problem.A),
                "G": matrix_to_json(problem.G), "H": matrix_to_json(problem.H)}
    if isinstance(problem, NmeProblem):
        return {"type": "nme", "A": matrix_to_json(problem.A), "Q": matrix_to_json(problem.Q)}
    raise UsageError(f"cannot serialize {type(problem).__name__}")


# ------------------------------------------------------------------- pairs

def class_from_json(obj, n: int) -> PairClass:
    if obj is None or obj == "dare":
        return PairClass.dare(n)
    if obj == "nme":
        return PairClass.nme(n)
    if isinstance(obj, dict):
        S1, S2 = _field(obj, "S1"), _field(obj, "S2")
        if S1.shape != (2 * n, 2 * n) or S2.shape != (2 * n, 2 * n):
            raise UsageError("class matrices must be 2n x 2n")
        return PairClass(S1, S2)
    raise UsageError(f"unknown class {obj!r}")


def class_to_json(cls: PairClass):
    return cls.preset() or {"S1": matrix_to_json(cls.S1), "S2": matrix_to_json(cls.S2)}


def block_to_json(X: HermitianBlock) -> dict:
    return {k: matrix_to_json(v) for k, v in X.blocks().items()}


def pair_from_dict(data: dict) -> tuple[PairClass, HermitianBlock]:
    """Read ``{"class": ..., "X": {...}}`` or ``{"class": ..., "M": ..., "L": ...}``."""
    if "X" in data:
        X = data["X"]
        if not isinstance(X, dict):
            raise UsageError("'X' must hold the four blocks X11, X12, X21, X22")
        blocks = [_field(X, k) for k in ("X11", "X12", "X21", "X22")]
        n = blocks[0].shape[0]
        if any(b.shape != (n, n) for b in blocks):
            raise UsageError("X blocks must be square and of equal size")
        return class_from_json(data.get("class"), n), HermitianBlock(*blocks)
    if "M" in data and "L" in data:
        M, L = _field(data, "M"), _field(data, "L")
        if M.shape != L.shape or M.shape[0] != M.shape[1] or M.shape[0] % 2:
            raise UsageError("M and L must be equal 2n x 2n matrices")
        cls = class_from_json(data.get("class"), M.shape[0] // 2)
        return cls, from_pair(SymplecticPair(M, L), cls)
    raise UsageError("pair input needs 'X' or both 'M' and 'L'")


def rde_from_dict(data: dict) -> tuple[np.ndarray, np.ndarray]:
    """``{"H": ..., "W0": ...}`` for a plain Riccati flow ``W(t)``."""
    H, W0 = _field(data, "H"), _field(data, "W0")
    if H.shape != (2 * W0.shape[0], 2 * W0.shape[0]) or W0.shape[0] != W0.shape[1]:
        raise UsageError("H must be 2n x 2n and W0 n x n")
    return H, W0


def spec_from_dict(data: dict) -> JordanSpec:
    if not any(k in data for k in ("r", "e", "c", "d")):
        raise SpecError("Jordan spec needs at least one of r, e, c, d")
    return JordanSpec.from_dict(data)


# -------------------------------------------------------------- predictions

def _jsonable(v):
    if isinstance(v, np.ndarray):
        return matrix_to_json(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def prediction_to_dict(pred) -> dict:
    """Limits as matrices, scalars inline; evaluator closures are dropped."""
    from .asymptotics import ConvergenceClass, ElementaryPrediction, GeneralPrediction

    if isinstance(pred, ElementaryPrediction):
        out = {"kind": "elementary", "case": pred.case, "n": pred.n, "rate": pred.rate,
               "rate_exponent": pred.rate_exponent, "poly_degree": pred.poly_degree,
               "limit_plus": pred.limit_plus, "limit_minus": pred.limit_minus}
        if pred.orbit is not None:
            out.update(theta=pred.orbit.theta, c=pred.orbit.c, U1=pred.orbit.U1, U2=pred.orbit.U2)
    elif isinstance(pred, GeneralPrediction):
        out = {"kind": "general", "direction": pred.direction, "n": pred.n, "mu": pred.mu,
               "U1": pred.U1, "U2": pred.U2, "constant_limit": pred.constant_limit()}
    elif isinstance(pred, ConvergenceClass):
        out = {"kind": "sda_class", "verdict": pred.verdict, "rate": pred.rate,
               "low_confidence": pred.low_confidence,
               "limit_X22": pred.limit_X22, "limit_X11": pred.limit_X11}
    else:
        raise UsageError(f"cannot serialize {type(pred).__name__}")
    return {k: _jsonable(v) for k, v in out.items()}


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------- CSV

def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    x = float(v)
    if math.isnan(x):
        raise ValueError("NaN reached the CSV writer")
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def csv_text(header, rows, footer: dict | None = None, flag: str | None = None) -> str:
    """Render CSV text.

    Parameters
    ----------
    flag : str, optional
        Name of the blow-up column.  Rows holding non-finite numbers must
        set it, otherwise ``ValueError`` is raised.
    footer : dict, optional
        ``{section: {key: value} | [values] | value}`` written as
        ``# section`` lines followed by ``# key,value`` lines.
    """
    header = list(header)
    fi = header.index(flag) if flag else None
    buf = _io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        if len(row) != len(header):
            raise ValueError("row length does not match the header")
        cells = [format_value(v) for v in row]
        if any(c in ("inf", "-inf") for c in cells):
            if fi is None or not row[fi]:
                raise ValueError("non-finite value without a blow-up flag")
        buf.write(",".join(cells) + "\n")
    for section, body in (footer or {}).items():
        buf.write(f"# {section}\n")
        if isinstance(body, dict):
            for k, v in body.items():
                buf.write(f"# {k},{format_value(v)}\n")
        elif isinstance(body, (list, tuple, np.ndarray)):
            for v in body:
                buf.write(f"# {format_value(v)}\n")
        else:
            buf.write(f"# {format_value(body)}\n")
    return buf.getvalue()


def write_csv(path, header, rows, footer: dict | None = None, flag: str | None = None) -> str:
    text = csv_text(header, rows, footer, flag)
    if path is None or str(path) == "-":
        import sys

        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
    return text


def read_csv(path) -> tuple[list, np.ndarray, list]:
    """Header, numeric body and raw footer lines of a CSV written here."""
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    body = [ln for ln in lines[1:] if ln and not ln.startswith("#")]
    footer = [ln[2:] for ln in lines[1:] if ln.startswith("# ")]
    data = np.array([[float(c) for c in ln.split(",")] for ln in body]) if body else np.zeros((0, len(header)))
    return header, data, footer

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from qpvlab.errors import InputFormatError
from qpvlab.models import MatrixLiteral


def matrix_from_literal(literal: Union[MatrixLiteral, Dict[str, Any]]) -> np.ndarray:
    """Build a complex array from a ``{"rows", "cols", "entries"}`` literal."""
    if not isinstance(literal, MatrixLiteral):
        literal = MatrixLiteral.model_validate(literal)
    entries = np.array(literal.entries, dtype=float).reshape(-1, 2)
    return (entries[:, 0] + 1j * entries[:, 1]).reshape(literal.rows, literal.cols)


def matrix_to_literal(m: np.ndarray) -> Dict[str, Any]:
    m = np.asarray(m, dtype=complex)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in m.reshape(-1)],
    }


def vector_from_literal(pairs: Sequence[Sequence[float]]) -> np.ndarray:
    arr = np.array(pairs, dtype=float).reshape(-1, 2)
    return arr[:, 0] + 1j * arr[:, 1]


def vector_to_literal(v: np.ndarray) -> List[List[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).reshape(-1)]


def read_json(path: Union[str, Path]) -> Any:
    """Load a JSON file, turning decode errors into ``InputFormatError``."""
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise InputFormatError(str(path), f"invalid JSON at line {e.lineno}: {e.msg}", e) from e


def validation_problems(error: ValidationError) -> List[str]:
    """One ``key: message`` line per pydantic error, every error listed."""
    return [
        f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}"
        for err in error.errors()
    ]


def parse_model(model: type, data: Any):
    """Validate ``data`` against a pydantic model, naming the first offending key on failure."""
    try:
        return model.model_validate(data)
    except ValidationError as e:
        problems = validation_problems(e)
        first = e.errors()[0]
        key = ".".join(str(p) for p in first["loc"]) or "<root>"
        raise InputFormatError(key, "; ".join(problems), e) from e


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def dump_report(report: BaseModel, path: Optional[Union[str, Path]] = None) -> str:
    """Serialise a report with sorted keys; write it to ``path`` when given."""
    text = json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text


def canonical_payload(text: str) -> Dict[str, Any]:
    """Parsed report without the fields excluded from determinism comparisons."""
    data = json.loads(text)
    data.pop("generated_at", None)
    return data

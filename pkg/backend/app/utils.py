import hashlib
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

from app.core.exceptions import InvalidInput

logger = logging.getLogger(__name__)

CHUNK_SIZE = 1 << 20


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as stream:
        for chunk in iter(lambda: stream.read(CHUNK_SIZE), b""):
            digest.update(chunk)
    return digest.hexdigest()


def parse_sensor_counts(text: str) -> list[int]:
    """
    "a..b" is the doubling sequence a, 2a, 4a, ... up to b; otherwise a comma list.
    """
    text = text.strip()
    if ".." in text:
        start_text, stop_text = text.split("..", 1)
        try:
            start, stop = int(start_text), int(stop_text)
        except ValueError:
            raise InvalidInput(f"cannot parse sensor range {text!r}")
        if start < 1 or stop < start:
            raise InvalidInput(f"sensor range {text!r} must satisfy 1 <= a <= b")
        counts = []
        m = start
        while m <= stop:
            counts.append(m)
            m *= 2
        return counts
    return parse_int_list(text)


def parse_int_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidInput(f"cannot parse integers from {text!r}")
    if not values:
        raise InvalidInput("empty integer list")
    return values


def parse_float_list(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidInput(f"cannot parse numbers from {text!r}")
    if not values:
        raise InvalidInput("empty number list")
    return values


def parse_str_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def json_safe(value: Any) -> Any:
    """Plain JSON types; non-finite floats become null."""
    if isinstance(value, BaseModel):
        return json_safe(value.model_dump(mode="json"))
    if isinstance(value, dict):
        return {str(json_safe(k)): json_safe(v) for k, v in value.items()}
    if isinstance(value, (set, frozenset)):
        return [json_safe(v) for v in sorted(value)]
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, np.generic):
        return json_safe(value.item())
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    return value


def to_json(value: Any) -> str:
    """Shortest round-trip floats, stable key order from the input."""
    return json.dumps(json_safe(value), indent=2, allow_nan=False) + "\n"


def write_json(value: Any, path: Path) -> Path:
    path.write_text(to_json(value), encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path

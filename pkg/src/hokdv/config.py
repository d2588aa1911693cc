"""Flat key = value experiment configuration with typed schema validation.

The format is one `key = value` pair per line; `#` starts a comment.
Values parse as int, float, bool (true/false), comma-separated lists of
those, or bare strings.  Unknown and missing keys are hard usage errors
naming the offending key, so a config file plus the command line always
pins a run completely.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable


class ConfigError(ValueError):
    """Invalid, missing, or unknown configuration key."""

    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


def _parse_scalar(text: str) -> Any:
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_text(text: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, f"line {lineno} is not a key = value pair")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(raw.strip(), f"empty key on line {lineno}")
        if "," in value:
            out[key] = [_parse_scalar(v.strip()) for v in value.split(",") if v.strip()]
        else:
            out[key] = _parse_scalar(value)
    return out


def load_config(path: str | Path) -> dict[str, Any]:
    return parse_config_text(Path(path).read_text())


@dataclass(frozen=True)
class Field:
    """One schema entry: expected type, default (None means required)."""

    kind: str  # int | float | bool | str | int_list | float_list
    default: Any = None
    required: bool = False
    check: Callable[[Any], bool] | None = None
    help: str = ""


def _coerce(key: str, kind: str, value: Any) -> Any:
    def fail(msg: str):
        raise ConfigError(key, msg)

    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            fail(f"expected integer, got {value!r}")
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            fail(f"expected number, got {value!r}")
        return float(value)
    if kind == "bool":
        if not isinstance(value, bool):
            fail(f"expected true/false, got {value!r}")
        return value
    if kind == "str":
        if isinstance(value, bool):
            fail(f"expected string, got {value!r}")
        if isinstance(value, (int, float)):
            return format(value, "g")
        if not isinstance(value, str):
            fail(f"expected string, got {value!r}")
        return value
    if kind in ("int_list", "float_list"):
        items = value if isinstance(value, list) else [value]
        coerced = []
        for item in items:
            if kind == "int_list":
                if isinstance(item, bool) or not isinstance(item, int):
                    fail(f"expected list of integers, got {item!r}")
                coerced.append(item)
            else:
                if isinstance(item, bool) or not isinstance(item, (int, float)):
                    fail(f"expected list of numbers, got {item!r}")
                coerced.append(float(item))
        return coerced
    raise AssertionError(f"unknown schema kind {kind}")


def validate_config(raw: dict[str, Any], schema: dict[str, Field]) -> dict[str, Any]:
    for key in raw:
        if key not in schema:
            raise ConfigError(key, "unknown key")
    out: dict[str, Any] = {}
    for key, spec in schema.items():
        if key in raw:
            value = _coerce(key, spec.kind, raw[key])
        elif spec.required:
            raise ConfigError(key, "missing required key")
        else:
            value = spec.default
        if value is not None and spec.check is not None and not spec.check(value):
            raise ConfigError(key, f"invalid value {value!r}" + (f" ({spec.help})" if spec.help else ""))
        out[key] = value
    return out

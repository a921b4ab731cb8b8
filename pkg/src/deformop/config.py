"""Plain-text run configuration: `key = value` lines with dotted sections,
JSON-style scalars and lists, `#` comments. Every command resolves its config
against a schema of known keys (unknown keys are an error listing them) and
writes the fully-resolved config next to its outputs, so a run can be
reproduced from that file alone.
"""

from __future__ import annotations

import json


class ConfigError(ValueError):
    pass


def parse_value(raw: str):
    raw = raw.strip()
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def parse_config_text(text: str) -> dict:
    """Flat dict of dotted keys to parsed values."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = parse_value(raw)
    return out


def load_config(path) -> dict:
    with open(path, "r") as fh:
        return parse_config_text(fh.read())


def format_config(flat: dict) -> str:
    lines = []
    for key in sorted(flat):
        value = flat[key]
        lines.append(f"{key} = {json.dumps(value)}")
    return "\n".join(lines) + "\n"


def write_config(path, flat: dict) -> None:
    with open(path, "w") as fh:
        fh.write(format_config(flat))


def resolve(defaults: dict, overrides: dict, context: str = "config") -> dict:
    """Merge overrides into a flat defaults table; unknown keys are an error
    listing every offender."""
    unknown = sorted(set(overrides) - set(defaults))
    if unknown:
        raise ConfigError(f"{context}: unknown keys: {', '.join(unknown)}")
    merged = dict(defaults)
    merged.update(overrides)
    return merged

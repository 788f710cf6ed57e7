#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Configuration helpers for the TCNN matching engine.

Config files are plain `key=value` lines mirroring the command-line flags.
This module provides:
- Parsing of config files and canonical key=value blobs
- Coercion of string values onto dataclass configuration objects
- The scoring thread cap read from the TCNN_THREADS environment variable
"""

import os
import dataclasses
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Type, TypeVar

from .errors import ArgumentError, ParseError

T = TypeVar("T")

THREADS_ENV = "TCNN_THREADS"


def normalize_key(key: str) -> str:
    """Map flag-style keys (`max-epochs`) onto field names (`max_epochs`)."""
    return key.strip().lower().replace("-", "_")


def parse_lines(lines: Iterable[str]) -> Dict[str, str]:
    """
    Parse key=value lines.

    Args:
        lines: Lines of text; blank lines and lines starting with '#' are skipped

    Returns:
        Dictionary of normalized keys to raw string values

    Raises:
        ParseError: If a line has no '=' separator
    """
    values: Dict[str, str] = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value, got {line!r}", line=number)
        key, value = line.split("=", 1)
        values[normalize_key(key)] = value.strip()
    return values


def read_config_file(path: str) -> Dict[str, str]:
    """
    Read a key=value config file.

    Args:
        path: Path to the config file

    Returns:
        Dictionary of normalized keys to raw string values
    """
    with open(Path(path), 'r', encoding='utf-8') as f:
        return parse_lines(f)


def coerce(value: str, kind: Any) -> Any:
    """
    Convert a raw string to the given field type.

    Args:
        value: Raw string value
        kind: Target type (bool, int, float or str)

    Returns:
        The converted value
    """
    if isinstance(value, str):
        if kind is bool or kind == "bool":
            lowered = value.strip().lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ArgumentError(f"not a boolean: {value!r}")
        try:
            if kind is int or kind == "int":
                return int(value)
            if kind is float or kind == "float":
                return float(value)
        except ValueError:
            raise ArgumentError(f"cannot read {value!r} as {kind}")
    return value


def build_dataclass(cls: Type[T], values: Dict[str, Any], strict: bool = True) -> T:
    """
    Build a configuration dataclass from (possibly string) values.

    Args:
        cls: The dataclass type
        values: Field values keyed by (normalized) field name
        strict: Reject keys that are not fields of cls

    Returns:
        An instance of cls with defaults for missing fields
    """
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs: Dict[str, Any] = {}
    for key, value in values.items():
        name = normalize_key(key)
        if name not in fields:
            if strict:
                raise ArgumentError(f"unknown configuration key: {key}")
            continue
        kwargs[name] = coerce(value, fields[name].type)
    return cls(**kwargs)


def dataclass_lines(obj: Any) -> List[str]:
    """
    Render a configuration dataclass as canonical key=value lines.

    Args:
        obj: Dataclass instance

    Returns:
        Lines in field declaration order; floats use repr for exact round-trips
    """
    lines = []
    for f in dataclasses.fields(obj):
        value = getattr(obj, f.name)
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{f.name}={text}")
    return lines


def thread_count(override: Optional[int] = None) -> int:
    """
    Resolve the scoring thread cap.

    Args:
        override: Explicit value (e.g. from --threads), takes precedence

    Returns:
        A positive thread count, default 1
    """
    if override is not None:
        raw: Any = override
    else:
        raw = os.environ.get(THREADS_ENV, "1")
    try:
        threads = int(raw)
    except ValueError:
        raise ArgumentError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    if threads < 1:
        raise ArgumentError(f"thread count must be >= 1, got {threads}")
    return threads

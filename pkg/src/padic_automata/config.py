"""Run configuration shared by the CLI subcommands.

A config file is either JSON or ``key = value`` lines; both load into the same
:class:`RunConfig`, and :meth:`RunConfig.to_json` round-trips losslessly.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, Optional

JOBS_ENV = "PADIC_AUTOMATA_JOBS"


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class RunConfig:
    p: int = 2
    expr: Optional[str] = None
    machine: Optional[str] = None
    consts: Dict[str, int] = field(default_factory=dict)
    k: int = 24
    m: Optional[int] = None
    n: int = 2
    lmax: int = 16
    xlen: int = 2
    bound: int = 4096
    max_n: int = 12
    ks: List[int] = field(default_factory=lambda: [12, 16, 20])
    out: Optional[str] = None
    seed: int = 0
    jobs: int = field(default_factory=default_jobs)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)


def _coerce(key: str, raw: str):
    if key == "consts":
        out = {}
        for item in filter(None, (s.strip() for s in raw.split(","))):
            name, _, val = item.partition("=")
            out[name.strip()] = int(val)
        return out
    if key == "ks":
        return [int(s) for s in raw.split(",") if s.strip()]
    if key in ("expr", "machine", "out"):
        return raw
    if raw.lower() in ("none", ""):
        return None
    return int(raw)


def parse_config_text(text: str) -> RunConfig:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return RunConfig.from_dict(json.loads(text))
    data = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, raw = line.partition("=")
        if not sep:
            raise ValueError(f"config line {lineno}: expected key = value")
        key = key.strip()
        try:
            data[key] = _coerce(key, raw.strip())
        except ValueError:
            raise ValueError(f"config line {lineno}: bad value for {key!r}") from None
    return RunConfig.from_dict(data)


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config_text(fh.read())

"""Check records and their text / JSON renderings."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .matstar import AlgebraElement

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class Record:
    check: str
    ref: str
    ok: bool
    residuals: dict = field(default_factory=dict)
    witness: object = None
    info: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {"check": self.check, "ref": self.ref, "verdict": "pass" if self.ok else "fail",
               "residuals": self.residuals}
        if self.info:
            out["info"] = self.info
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class Report:
    command: str
    config_digest: str
    records: list = field(default_factory=list)

    def add(self, check, ref, ok, residuals=None, witness=None, **info) -> Record:
        rec = Record(check, ref, bool(ok), dict(residuals or {}), witness, info)
        self.records.append(rec)
        return rec

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.records)

    @property
    def exit_status(self) -> int:
        return EXIT_PASS if self.ok else EXIT_FAIL

    def as_dict(self) -> dict:
        return {"command": self.command, "config_digest": self.config_digest,
                "exit_status": self.exit_status, "records": [r.as_dict() for r in self.records]}

    def to_json(self) -> str:
        return dumps(self.as_dict()) + "\n"

    def to_text(self) -> str:
        lines = [f"command: {self.command}", f"config digest: {self.config_digest}"]
        for r in self.records:
            d = r.as_dict()
            line = f"{d['verdict'].upper():4}  {r.check}  [{r.ref}]"
            if r.residuals:
                line += "  " + " ".join(f"{k}={_num(v)}" for k, v in r.residuals.items())
            if r.info:
                line += "  " + " ".join(f"{k}={dumps(plain(v))}" for k, v in r.info.items())
            if r.witness is not None:
                line += f"  witness={dumps(plain(r.witness))}"
            lines.append(line)
        lines.append(f"exit status: {self.exit_status}")
        return "\n".join(lines) + "\n"


def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def plain(value):
    """Convert witnesses and residuals into JSON-ready values."""
    if isinstance(value, AlgebraElement):
        return [[[_cplx(v) for v in row] for row in b] for b in value.blocks]
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, complex):
        return _cplx(value)
    if value is None or isinstance(value, str):
        return value
    return str(value)


def _cplx(z):
    z = complex(z)
    return float(z.real) if z.imag == 0 else [float(z.real), float(z.imag)]


def _num(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return "%.17g" % x


def dumps(value) -> str:
    """Compact deterministic JSON with every float written to 17 significant digits."""
    value = plain(value)
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _num(value)
    if isinstance(value, str):
        return _string(value)
    if isinstance(value, list):
        return "[" + ", ".join(dumps(v) for v in value) + "]"
    return "{" + ", ".join(f"{_string(k)}: {dumps(v)}" for k, v in value.items()) + "}"


def _string(s: str) -> str:
    return json.dumps(s)

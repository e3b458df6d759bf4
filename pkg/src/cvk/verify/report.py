"""Verification report container and its JSON-schema validation"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import jsonschema

from .. import __version__

logger = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).resolve().parents[3] / "schemas" / "verification_report.schema.json"

# used when the schema file is not shipped alongside the package
FALLBACK_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["version", "config_digest", "checks", "summary"],
    "properties": {
        "version": {"type": "string"},
        "config_digest": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        "checks": {"type": "array"},
        "summary": {"type": "object", "required": ["passed", "failed", "skipped"]},
    },
}


@dataclass
class CheckResult:
    name: str
    anchor: str
    suite: str
    residual: float
    tolerance: float
    runtime_ms: int = 0
    error: Optional[str] = None
    skipped: bool = False

    @property
    def passed(self) -> bool:
        return (not self.skipped and self.error is None and self.tolerance > 0
                and self.residual <= self.tolerance)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "name": self.name,
            "anchor": self.anchor,
            "suite": self.suite,
            # JSON has no infinity; a crashed check reports null
            "residual": self.residual if math.isfinite(self.residual) else None,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "runtime_ms": int(self.runtime_ms),
        }
        if self.error is not None:
            data["error"] = self.error
        if self.skipped:
            data["skipped"] = True
        return data


@dataclass
class ValidationResult:
    is_valid: bool
    errors: List[str] = field(default_factory=list)


@dataclass
class VerificationReport:
    config_digest: str
    checks: List[CheckResult] = field(default_factory=list)
    version: str = __version__

    @property
    def summary(self) -> Dict[str, int]:
        skipped = sum(1 for c in self.checks if c.skipped)
        passed = sum(1 for c in self.checks if c.passed)
        return {"passed": passed, "failed": len(self.checks) - passed - skipped, "skipped": skipped}

    @property
    def failed(self) -> int:
        return self.summary["failed"]

    def exit_code(self) -> int:
        return min(self.failed, 125)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "version": self.version,
            "config_digest": self.config_digest,
            "checks": [c.to_dict() for c in self.checks],
            "summary": self.summary,
        }

    def validate(self, schema: Optional[Dict[str, Any]] = None) -> ValidationResult:
        schema = schema or load_schema()
        validator = jsonschema.Draft7Validator(schema)
        errors = [f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}"
                  for e in validator.iter_errors(self.to_dict())]
        return ValidationResult(is_valid=not errors, errors=errors)

    def write(self, path: Path) -> None:
        result = self.validate()
        if not result.is_valid:
            raise ValueError(f"report does not match its schema: {'; '.join(result.errors)}")
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        logger.info("report written to %s", path)


def load_schema(path: Path = SCHEMA_PATH) -> Dict[str, Any]:
    if not path.exists():
        logger.debug("report schema %s not found, using the embedded one", path)
        return FALLBACK_SCHEMA
    with open(path) as f:
        return json.load(f)

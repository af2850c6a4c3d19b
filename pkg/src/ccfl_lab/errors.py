from __future__ import annotations


class ScenarioError(ValueError):
    """Scenario file could not be parsed or failed validation."""

    def __init__(self, message: str, *, fields: list[str] | None = None):
        super().__init__(message)
        self.fields = fields or []


class InfeasibleError(ValueError):
    def __init__(self, message: str, *, constraint: str):
        super().__init__(f"{constraint}: {message}")
        self.constraint = constraint

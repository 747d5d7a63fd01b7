"""Operation budgets: term-count guards that keep every computation desk-scale.

The environment variable BGKLAB_BUDGET (an integer term count) overrides the
per-operation defaults.
"""

from __future__ import annotations

import os

ENV_VAR = "BGKLAB_BUDGET"


class BudgetError(RuntimeError):
    """Raised when a projected term count exceeds the operation budget."""

    def __init__(self, operation: str, projected: float, budget: int) -> None:
        self.operation = operation
        self.projected = projected
        self.budget = budget
        super().__init__(
            f"{operation}: projected {projected:.3g} terms exceeds budget {budget}"
        )


def get_budget(default: int) -> int:
    """The operation budget: BGKLAB_BUDGET when set, else the given default."""
    raw = os.environ.get(ENV_VAR)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise ValueError(f"{ENV_VAR} must be positive, got {value}")
    return value


def charge(operation: str, projected: float, default_budget: int) -> None:
    """Raise BudgetError when `projected` terms exceed the effective budget."""
    budget = get_budget(default_budget)
    if projected > budget:
        raise BudgetError(operation, projected, budget)

"""Package exception types, mapped onto CLI exit codes by the runner."""

from __future__ import annotations


class NumericalError(Exception):
    """A numerical routine failed to converge within its declared tolerance."""


class QuadratureError(NumericalError):
    """Quadrature did not reach its target error; carries the achieved estimate."""

    def __init__(self, message: str, value: float, error_estimate: float):
        super().__init__(f"{message} (value={value!r}, error_estimate={error_estimate!r})")
        self.value = value
        self.error_estimate = error_estimate


class EigendecompositionError(NumericalError):
    """Dense Hermitian eigendecomposition failed or left a large residual."""


class BudgetExceededError(RuntimeError):
    """An iteration budget (e.g. rejection-sampling attempts) was exhausted."""

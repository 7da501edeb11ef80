"""Exception types shared across the toolkit."""

from __future__ import annotations


class MemfractError(Exception):
    """Base class for all toolkit errors."""


class ParseError(MemfractError):
    """Malformed input file; carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(MemfractError):
    """Structurally parseable input that violates an invariant."""


class FitError(MemfractError):
    """Least-squares problem that cannot be solved as requested."""


class DivergenceError(MemfractError):
    """Evaluation requested at a point where the closed form diverges."""


class SingularityError(MemfractError):
    """Denominator below the underflow threshold at time t."""

    def __init__(self, t: float, denominator: float):
        self.t = t
        self.denominator = denominator
        super().__init__(f"denominator {denominator:.3e} below threshold at t = {t:.9g} s")


class ExcludedPointError(MemfractError):
    """Evaluation requested inside a declared exclusion window."""

    def __init__(self, t: float, reason: str):
        self.t = t
        super().__init__(f"t = {t:.9g} s excluded: {reason}")


class InfeasibleSearchError(MemfractError):
    """No admissible candidate; carries the nearest matched-zero couples."""

    def __init__(self, message: str, nearest_couples: list[tuple[float, float]] | None = None):
        self.nearest_couples = list(nearest_couples or [])
        if self.nearest_couples:
            listing = ", ".join(f"({a1:.6g}, {a2:.6g})" for a1, a2 in self.nearest_couples[:8])
            message = f"{message}; nearest matched-zero couples: {listing}"
        super().__init__(message)

class InputError(ValueError):
    """Malformed or inconsistent user input (CLI exit status 1)."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class BudgetError(RuntimeError):
    """Type enumeration larger than the configured budget."""

    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"enumeration needs {required} type evaluations, budget is {budget}; "
            "rerun with --force to override"
        )

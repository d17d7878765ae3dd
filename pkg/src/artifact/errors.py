"""Error types shared across the package."""


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed the configured cardinality budget."""


class PrecisionError(ValueError):
    """A digit at or below a Laurent precision floor was requested."""


class InvariantBreach(AssertionError):
    """An identity that must hold exactly failed."""


class InstabilityError(RuntimeError):
    """A depth-truncated computation changed when the depth was raised."""


class InstanceError(ValueError):
    """An instance description could not be parsed or is inadmissible."""


DEFAULT_BUDGET = 10**9


def check_budget(size, budget=None, what="enumeration"):
    limit = DEFAULT_BUDGET if budget is None else budget
    if size > limit:
        raise BudgetExceeded(f"{what} of size {size} exceeds budget {limit}")

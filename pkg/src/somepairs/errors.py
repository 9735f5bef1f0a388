"""Exception hierarchy. The CLI maps these onto exit codes."""


class SomePairsError(Exception):
    pass


class SizeLimitError(SomePairsError, ValueError):
    pass


class InfeasibleError(SomePairsError, ValueError):
    pass


class ParseError(SomePairsError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RangeError(SomePairsError, IndexError):
    pass


class PreconditionError(SomePairsError, ValueError):
    pass


class IncompatibleError(PreconditionError):
    """A planner or strategy cannot run on the given graph (labels, variant, q)."""


class NonProgressError(SomePairsError, RuntimeError):
    pass


class BudgetError(SomePairsError, RuntimeError):
    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"enumeration needs {required} subsets, budget is {budget} "
            "(raise SOMEPAIRS_BUDGET to allow it)"
        )


class ContradictionError(SomePairsError, ValueError):
    pass


class InvalidSchemaError(SomePairsError, ValueError):
    def __init__(self, report):
        self.report = report
        super().__init__(
            f"schema invalid: {len(report.uncovered_edges)} uncovered edges, "
            f"{len(report.offending_reducers)} reducers over capacity"
        )

"""Exception types shared across replab."""


class ReplabError(Exception):
    """Base class for every error raised by replab."""


class SchemaError(ReplabError, ValueError):
    """An example does not fit the attribute schema a tree or dataset expects."""


class ContractError(ReplabError):
    """A precondition of an operation was violated by the caller."""


class InvalidSelectionError(ReplabError, ValueError):
    pass


class TreeParseError(ReplabError, ValueError):
    """Malformed tree document. ``location`` is a JSON-path-like pointer."""

    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.location = location


class DomainError(ReplabError, ValueError):
    """Arguments outside the region where a bound or approximation is defined."""


class OracleCapExceeded(ReplabError):
    def __init__(self, leaves: int, cap: int, pruning_count: int):
        super().__init__(
            f"tree has {leaves} leaves (cap {cap}); enumeration would visit "
            f"{pruning_count} prunings"
        )
        self.leaves = leaves
        self.cap = cap
        self.pruning_count = pruning_count

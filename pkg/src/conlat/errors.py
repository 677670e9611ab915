"""Exception hierarchy shared by every conlat module."""


class ConlatError(Exception):
    """Base class for all workbench errors."""


class SemilatticeError(ConlatError):
    pass


class LatticeError(ConlatError):
    pass


class HomomorphismError(ConlatError):
    pass


class UnknownElement(ConlatError, KeyError):
    def __init__(self, element):
        super().__init__(f"unknown element {element!r}")
        self.element = element

    def __str__(self):
        return self.args[0]


class DomainMismatch(ConlatError):
    pass


class UndecidableAtScale(ConlatError):
    """Raised when a question quantifies over an infinite set and no finite
    candidate set was supplied."""


class CapExceeded(ConlatError):
    """A hard size cap was hit. Never silently approximated."""


class BudgetExceeded(ConlatError):
    pass


class ChainError(ConlatError):
    def __init__(self, message, index=None):
        super().__init__(message if index is None else f"{message} (index {index})")
        self.index = index


class TermParseError(ConlatError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UndeclaredGenerator(ConlatError):
    pass


class ConstructionError(ConlatError):
    pass


class SelectionError(ConlatError):
    pass


class NormUndefined(ConlatError):
    pass


class EmulationError(ConlatError):
    """Finite emulation parameters outside their validity window."""


class DecompositionError(ConlatError):
    pass

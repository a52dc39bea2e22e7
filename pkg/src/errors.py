from typing import Any, Optional


class SolverError(Exception):
    pass


class QuerySyntaxError(SolverError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class SignatureError(SolverError):
    pass


class InputFormatError(SolverError):
    pass


class CapExceededError(SolverError):
    def __init__(self, cap_name: str, requested: int, cap: int):
        super().__init__(f"{cap_name} exceeded: requested {requested}, cap is {cap}")
        self.cap_name = cap_name
        self.requested = requested
        self.cap = cap


class PreconditionError(SolverError):
    def __init__(self, message: str, witness: Optional[Any] = None):
        text = message if witness is None else f"{message}; witness: {witness}"
        super().__init__(text)
        self.witness = witness


class LpFailure(SolverError):
    pass


class RewriteContextError(SolverError):
    pass


class RouteError(SolverError):
    pass

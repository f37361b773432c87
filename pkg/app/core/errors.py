from typing import Any, Dict, Optional


class McgError(ValueError):
    """Base class for errors raised by the toolkit."""

    exit_code: int = 1


class HypothesisError(McgError):
    """A documented precondition of an operation does not hold."""

    exit_code = 2


class NotACurveError(HypothesisError):
    pass


class NotIndependentError(HypothesisError):
    pass


class VirtuallyAbelianError(HypothesisError):
    def __init__(self, message: str = "virtually abelian — no free subgroup"):
        super().__init__(message)


class ParseError(McgError):
    """Malformed matrix or slope text."""

    exit_code = 2

    def __init__(self, message: str, token: str):
        super().__init__(f"{message}: {token!r}")
        self.token = token


class CertificationError(McgError):
    """A certificate search exhausted its configured powers or depths."""

    exit_code = 2

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}

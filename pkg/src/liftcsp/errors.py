"""Exception types shared across the package."""


class LiftcspError(Exception):
    """Base class for all package errors."""


class FormatError(LiftcspError):
    """Malformed input text or JSON."""


class ValidationError(LiftcspError):
    """A structure, lift or family violates its invariants."""


class SignatureMismatchError(LiftcspError):
    """Two structures that must share a signature do not."""


class BudgetExceededError(LiftcspError):
    """A search ran out of its node budget; distinct from a negative answer."""

    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = nodes


class SearchBoundsError(LiftcspError):
    """A certified search exhausted its bounds without a stable answer."""


class ConstructionError(LiftcspError):
    """A constructed object failed its own verification."""


class SparsificationError(LiftcspError):
    """sparsify ran out of retries; carries per-condition diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}

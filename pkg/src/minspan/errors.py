"""Exception types shared across the package.

The CLI maps each family to an exit code: :class:`PanelError` is a data
problem (3), :class:`EstimationError` a numerical one (4).
"""


class MssError(Exception):
    """Base class for all package errors."""


class PanelError(MssError, ValueError):
    """Invalid or malformed return data."""


class EstimationError(MssError, ArithmeticError):
    """A regression or bootstrap step broke down numerically.

    ``asset`` carries the offending asset label when one is known.
    """

    def __init__(self, message, asset=None):
        if asset is not None:
            message = f"asset {asset!r}: {message}"
        super().__init__(message)
        self.asset = asset

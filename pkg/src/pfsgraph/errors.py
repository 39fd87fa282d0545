"""Exception types shared across the package.

Plain ``ValueError`` is used for ordinary argument errors (bad node index,
radius out of range, and so on); the classes here mark conditions callers may
want to handle specifically.
"""


class PfsGraphError(Exception):
    """Base class for package-specific failures."""


class DegenerateResponseError(PfsGraphError, ValueError):
    """Response column is constant or carries no usable signal."""


class DegenerateSignalError(PfsGraphError, ValueError):
    """Simulated signal has (near) zero variance, SNR scaling undefined."""


class TooFewSamplesError(PfsGraphError, ValueError):
    """Not enough samples for complementary half-sampling."""


class GenerationError(PfsGraphError, RuntimeError):
    """Simulated instance construction failed (degenerate spectrum etc.)."""


class ConvergenceError(PfsGraphError, RuntimeError):
    """Iterative solver hit its sweep limit before meeting tolerance.

    Carries the worst KKT residual observed so the caller can diagnose.
    """

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class EstimationError(PfsGraphError, RuntimeError):
    """A per-node q-value estimation failed inside a PFS run."""

    def __init__(self, node: int, cause: Exception):
        super().__init__(f"q-value estimation failed for node {node}: {cause}")
        self.node = node
        self.cause = cause


class IngestError(PfsGraphError, ValueError):
    """CSV ingestion failure, annotated with 1-based coordinates when known."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column!r}")
        suffix = f" ({', '.join(loc)})" if loc else ""
        super().__init__(message + suffix)
        self.row = row
        self.column = column

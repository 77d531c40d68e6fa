"""Exception types raised across the toolchain."""


class DpDetectError(Exception):
    """Base class for all toolchain errors."""


# -- corpus ----------------------------------------------------------------

class IngestError(DpDetectError):
    """Corpus root missing or unreadable."""


class DuplicatePathError(DpDetectError):
    """Two scanned files map to the same (project, path) identity."""


class UnknownLabelError(DpDetectError):
    """A label token is outside the closed pattern-label set."""


class MissingFileError(DpDetectError):
    """A label row references a file absent from the manifest."""


class LabelsNotFound(DpDetectError):
    """The labels CSV path does not exist."""


# -- parsing ---------------------------------------------------------------

class JavaSyntaxError(DpDetectError):
    """Unrecoverable syntax error; carries the source position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


# -- call graph ------------------------------------------------------------

class UnknownMethodError(DpDetectError):
    """Queried method is not a node of the call graph."""


# -- embedding -------------------------------------------------------------

class EmptyVocabularyError(DpDetectError):
    """No token survives the min-count threshold."""


class ZeroVectorError(DpDetectError):
    """Cosine similarity is undefined for an all-zero vector."""


# -- classifier ------------------------------------------------------------

class EmptyTrainingError(DpDetectError):
    """fit() called with no training instances."""


class DimensionError(DpDetectError):
    """Vector dimension does not match the training dimension."""


# -- evaluation ------------------------------------------------------------

class StratificationInfeasibleError(DpDetectError):
    """A class has fewer instances than the requested fold count."""


class SmoteInfeasibleError(DpDetectError):
    """A minority class is too small to interpolate neighbours."""


class DegenerateMarginals(DpDetectError):
    """Cohen's kappa undefined: chance agreement is 1 with disagreement."""


# -- persistence -----------------------------------------------------------

class BundleFormatError(DpDetectError):
    """Model bundle is missing members or has an unsupported layout."""

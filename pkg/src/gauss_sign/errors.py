class GaussSignError(Exception):
    """Base class; ``stage`` names the pipeline step that failed."""

    def __init__(self, message: str, stage: str = ""):
        super().__init__(f"[{stage}] {message}" if stage else message)
        self.stage = stage
        self.detail = message


class InvalidInput(GaussSignError, ValueError):
    pass


class UnsupportedCase(GaussSignError):
    """A well-formed input outside the supported index-2 / index-4 regimes."""


class ResolutionError(GaussSignError):
    """Internal inconsistency while resolving (classification or calibration bug)."""


class AmbiguityError(ResolutionError):
    pass

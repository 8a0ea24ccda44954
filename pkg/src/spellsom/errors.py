"""Exception types shared across the package."""


class SpellsomError(Exception):
    """Base class for all package errors."""


class ConfigError(SpellsomError):
    """Invalid pipeline configuration; message names the offending field."""


class MissingStageError(SpellsomError):
    """A required upstream artifact is absent."""

    def __init__(self, stage: str):
        self.stage = stage
        super().__init__(f"missing stage: {stage}")


class SchemaError(SpellsomError):
    """Input file does not expose a mandatory column."""


class RowError(SpellsomError):
    """A single input row violates the record contract (row-local, not fatal)."""


class ZeroVarianceError(SpellsomError):
    """A column cannot be standardized because its variance is zero."""


class MissingValueError(SpellsomError):
    """A record lacks a value that the requested operation needs."""

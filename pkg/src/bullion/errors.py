"""Exception hierarchy shared across the library."""


class BullionError(Exception):
    """Base class for all library errors."""


class UnsupportedType(BullionError):
    """No encoding scheme accepts the given value type."""


class CorruptBlock(BullionError):
    """An encoded block's payload is malformed or truncated."""


class EmptyInput(BullionError):
    """An operation that requires at least one value got none."""


class SchemaMismatch(BullionError):
    """Input data does not conform to the declared column schema."""


class BadMagic(BullionError):
    """File tail does not carry the expected magic bytes."""


class TruncatedFooter(BullionError):
    """File is too short to contain the footer it declares."""


class ColumnNotFound(BullionError):
    """Requested column name is not present in the file."""


class RowOutOfRange(BullionError):
    """Row ordinal is outside [0, num_rows)."""


class UnsupportedEncoding(BullionError):
    """Page encoding does not support the requested in-place operation."""


class ExclusiveAccessRequired(BullionError):
    """File mutation needs an exclusive lock that could not be acquired."""


class FullRewriteRequired(BullionError):
    """Level-0 deletion is a whole-file rewrite, which the caller must do."""


class DistinctOverflow(BullionError):
    """Too many distinct values for the requested code width."""


class MissingScoreColumn(BullionError):
    """Row reordering references a column absent from the batch."""


class NonNumericScore(BullionError):
    """Quality-score column contains non-numeric values."""


class UnknownColumn(BullionError):
    """Column ordering ranks a name absent from the schema."""

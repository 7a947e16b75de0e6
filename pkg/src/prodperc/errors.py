"""Shared exception types."""


class SizeLimitError(ValueError):
    """An instance exceeds a hard size budget (subset scans, vertex counts)."""


class UnsupportedOperationError(RuntimeError):
    """The operation is undefined for this graph (e.g. distance on a
    disconnected factor, layer queries on a non-star product)."""

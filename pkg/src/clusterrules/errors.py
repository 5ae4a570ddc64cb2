class DataError(ValueError):
    """Input data is malformed or inconsistent with the requested operation."""


class SchemaError(DataError):
    """A serialized explanation document does not match the expected layout."""

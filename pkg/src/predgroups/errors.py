"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage errors exit 1, DataError exits 2,
ModelError exits 3.
"""


class PredgroupsError(Exception):
    """Base class for all package errors."""


class DataError(PredgroupsError):
    """Invalid or inconsistent input data (dataset files, vectors, splits)."""


class CorpusFormatError(DataError):
    """Dataset file does not conform to the documented JSON schema."""

    def __init__(self, message, *, context=None):
        self.context = context
        if context:
            message = f"{message} (at {context})"
        super().__init__(message)


class DuplicateIdError(DataError):
    """The same identifier occurs more than once within one record family."""


class DanglingReferenceError(DataError):
    """A record references an identifier that is not defined anywhere."""


class ModelError(PredgroupsError):
    """Fitted-model persistence or compatibility problem."""


class FingerprintMismatchError(ModelError):
    """A model was fitted against a different vector space than the one given."""


class ProviderError(PredgroupsError):
    """Metadata provider failed (network or malformed response).

    Distinct from a clean not-found, which is reported as ``None``.
    """

from .encoders import DEFAULT_MODEL, HashedEncoder, ModelUnavailableError, TransformerEncoder
from .export import ExportJob, ExportResult, run_export
from .writer import write_embeddings

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_MODEL",
    "ExportJob",
    "ExportResult",
    "HashedEncoder",
    "ModelUnavailableError",
    "TransformerEncoder",
    "run_export",
    "write_embeddings",
]

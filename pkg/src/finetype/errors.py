"""Exception hierarchy shared across the toolkit."""


class FinetypeError(Exception):
    """Base class for all toolkit errors."""


class TaxonomyError(FinetypeError):
    """Malformed taxonomy file or structurally invalid taxonomy."""


class UnknownLabelError(TaxonomyError):
    """A label was referenced that is not part of the taxonomy."""


class CorpusError(FinetypeError):
    """Schema violation or invariant failure in a corpus record."""


class FeatureError(FinetypeError):
    """Invalid input to feature extraction."""


class PruningError(FinetypeError):
    """Label pruning invoked with inconsistent inputs."""


class ModelError(FinetypeError):
    """Training or prediction failure."""


class DegenerateLabelError(ModelError):
    """A binary training problem has an empty positive or negative side."""


class ModelFileError(FinetypeError):
    """Unreadable, incompatible, or mismatched model file."""


class InferenceError(FinetypeError):
    """Label-assignment failure (e.g. no valid configuration has mass)."""


class EvaluationError(FinetypeError):
    """Prediction/gold streams disagree or metrics are undefined."""


class StoreError(FinetypeError):
    """Annotation store I/O or record validation failure."""

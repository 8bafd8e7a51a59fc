"""Exception types shared across the pipeline."""


class MotionCheckError(Exception):
    """Base class for all pipeline errors."""


# --- file ingest ---

class TruncatedFile(MotionCheckError):
    """Binary file length is not a multiple of the record size."""


class NonFiniteValue(MotionCheckError):
    """A coordinate read from disk is NaN or infinite."""


class LengthMismatch(MotionCheckError):
    """A per-point layer does not match the expected point count."""


class MalformedLine(MotionCheckError):
    """A text record does not parse into the expected fields."""


class NonOrthonormalRotation(MotionCheckError):
    """A rotation block deviates from orthonormality beyond tolerance."""


class InvalidCategory(MotionCheckError):
    """A byte label lies outside the allowed value set."""


class UnknownSuperclass(MotionCheckError):
    """An anomaly box names a superclass outside the closed set."""


class DegenerateBox(MotionCheckError):
    """A 2D bounding box has zero or negative area."""


# --- label domain ---

class UnknownClassId(MotionCheckError):
    """A semantic class id has no table entry and no fallback is configured."""


class MaskLengthMismatch(MotionCheckError):
    """A ground mask does not match the cloud it applies to."""


# --- analysis ---

class EmptyCorpus(MotionCheckError):
    """Aggregation requested over zero valid points."""


class EmptyGroup(MotionCheckError):
    """Metric aggregation requested for an empty group."""


class EmptyFrustum(MotionCheckError):
    """Frustum refinement requested on an empty point selection."""


# --- pipeline orchestration ---

class MissingInput(MotionCheckError):
    """A configured input path does not exist."""


class FrameCountMismatch(MotionCheckError):
    """Input streams disagree on the number of frames."""


class ConfigError(MotionCheckError):
    """The run configuration is malformed or incomplete."""


# --- review server ---

class UnknownFrame(MotionCheckError):
    """Requested frame is not part of the served sequence."""


class UnknownCluster(MotionCheckError):
    """A verdict references a cluster absent from the manifest."""


class InvalidVerdict(MotionCheckError):
    """A verdict value lies outside the closed set."""

"""Errors for trojanrec."""


class TrojanRecError(Exception):
    """Base error for trojanrec."""


class DatasetParseError(TrojanRecError):
    """Error for when a line of an interaction file is malformed."""

    def __init__(self, line_no: int, line: str, reason: str) -> None:
        """Keep the offending line number."""
        super().__init__(f"line {line_no}: {reason}: {line!r}")
        self.line_no = line_no


class EmptyDatasetError(TrojanRecError):
    """Error for when a dataset is empty, or empty after filtering."""


class ParameterError(TrojanRecError):
    """Error for when an argument is out of its valid range."""


class SelectionError(TrojanRecError):
    """Error for when there is nothing to select from."""


class ShapeError(TrojanRecError):
    """Error for when array dimensions do not line up."""


class DivergenceError(TrojanRecError):
    """Error for when a training objective becomes non-finite."""


class SolverError(TrojanRecError):
    """Error for when a normal-equation system cannot be solved."""


class EvaluationError(TrojanRecError):
    """Error for when a metric is undefined for the given users."""


class DetectionError(TrojanRecError):
    """Error for when detection scores cannot be evaluated."""


class ConfigError(TrojanRecError):
    """Error for when a run configuration is invalid."""


class CheckpointError(TrojanRecError):
    """Error for when a checkpoint cannot be read."""


class AttackInvariantError(TrojanRecError):
    """Error for when the poison block violates a structural invariant."""

"""Exception types shared across the package."""


class DataError(Exception):
    """Malformed input data: unparseable files, invalid label values,
    shape mismatches in user-supplied matrices."""


class TrainingError(Exception):
    """Training cannot proceed, e.g. an empty per-label view."""


class TuningError(Exception):
    """Hyperparameter tuning cannot proceed (too few usable rows)."""


class InsufficientDataError(Exception):
    """A statistical test received fewer usable observations than it needs."""

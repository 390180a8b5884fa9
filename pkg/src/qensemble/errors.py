"""Exception hierarchy. ``exit_code`` is what the CLI returns for each category."""


class QEnsembleError(Exception):
    exit_code = 1


class UsageError(QEnsembleError, ValueError):
    """Invalid arguments: out-of-range qubits, mismatched dimensions, NaN scores."""

    exit_code = 2


class IngestionError(QEnsembleError):
    exit_code = 3


class ConfigError(QEnsembleError):
    exit_code = 4


class NumericError(QEnsembleError):
    exit_code = 5


class ImpossibleOutcome(NumericError):
    """A post-selected branch has (numerically) zero probability."""


class ZeroVector(NumericError):
    """A vector with ~zero norm cannot be amplitude-encoded."""


class NonNormalizedWeights(NumericError):
    pass


class DegenerateCombination(NumericError):
    """Weighted combination has a zero denominator."""


class DegenerateLabels(NumericError):
    pass


class DegenerateModel(NumericError):
    pass

"""Exception types carrying machine-readable diagnostics."""


class CVTeleError(Exception):
    """Base error; ``module``/``check``/``defect``/``tolerance`` feed the CLI error JSON."""

    def __init__(self, message, *, module="cvtele", check="", defect=None, tolerance=None):
        super().__init__(message)
        self.module = module
        self.check = check
        self.defect = defect
        self.tolerance = tolerance

    def to_dict(self):
        return {
            "module": self.module,
            "check": self.check,
            "defect": self.defect,
            "tolerance": self.tolerance,
            "message": str(self),
        }


class TruncationError(CVTeleError):
    """Population below the Fock cutoff is too small."""


class DimensionError(CVTeleError, ValueError):
    pass


class DisplacedResourceError(CVTeleError):
    """A CM/EPR formula was asked for a resource with nonzero first moments."""


class ReconstructionError(CVTeleError):
    pass


class OracleError(CVTeleError):
    pass


class SpecParseError(CVTeleError, ValueError):
    """Malformed state spec string; the CLI maps this to exit code 2."""

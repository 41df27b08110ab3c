"""Exception hierarchy.

Every domain failure raised by the library derives from :class:`CotlabError`,
which the CLI maps to exit code 1 and a JSON error object.
"""


class CotlabError(Exception):
    """Base class for domain errors."""

    code = "error"

    def to_json(self):
        return {"error": self.code, "message": str(self)}


class InvalidMeasure(CotlabError, ValueError):
    code = "invalid_measure"


class DimensionMismatch(CotlabError, ValueError):
    code = "dimension_mismatch"


class ShapeMismatch(CotlabError, ValueError):
    code = "shape_mismatch"


class MissingKernelRow(CotlabError, KeyError):
    code = "missing_kernel_row"

    def __str__(self):
        return Exception.__str__(self)


class EmptyFamily(CotlabError, ValueError):
    code = "empty_family"


class MassMismatch(CotlabError, ValueError):
    code = "mass_mismatch"


class NotRepresentable(CotlabError):
    """A quantile assignment would have to split source atoms.

    ``plan`` carries the :class:`~cotlab.monge.SplitPlan` describing which
    atoms straddle a target boundary.
    """

    code = "not_representable"

    def __init__(self, message, plan=None):
        super().__init__(message)
        self.plan = plan


class GranularityError(CotlabError):
    code = "granularity"

    def __init__(self, message, plan=None):
        super().__init__(message)
        self.plan = plan


class NullPath(CotlabError, ValueError):
    code = "null_path"


class UndefinedPrefix(CotlabError, KeyError):
    code = "undefined_prefix"

    def __str__(self):
        return Exception.__str__(self)


class NotCompatible(CotlabError):
    code = "not_compatible"


class NotRandomizedST(CotlabError):
    code = "not_randomized_stopping_time"


class InstanceTooLarge(CotlabError):
    code = "instance_too_large"


class Infeasible(CotlabError):
    code = "infeasible"


class Unbounded(CotlabError):
    code = "unbounded"

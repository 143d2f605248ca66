"""Exception types shared across the package.

The CLI maps these onto exit codes: input/schema problems exit with 2,
resource-cap violations with 4.  Non-convergence is not an exception; results
carry a ``converged`` flag and the CLI exits 3 when it is false.
"""


class CorropsError(Exception):
    """Base class for all package errors."""


class InputError(CorropsError):
    """Invalid input: schema violations, bad parameters, failed preconditions."""


class GeometryError(InputError):
    """Invalid polytope, mask, or direction data."""


class ResourceError(CorropsError):
    """A configured size cap (dense entries, grid cells) would be exceeded."""

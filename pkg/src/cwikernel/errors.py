"""Exception hierarchy shared by all cwikernel modules.

The CLI maps these onto process exit codes: DataError -> 3,
ResourceError -> 4, ConvergenceError -> 5.  Anything else is a bug.
"""


class CwiError(Exception):
    """Base class for all errors raised by this package."""


class DataError(CwiError):
    """Malformed or inconsistent task data (TSV parsing, label problems,
    degenerate inputs to numeric routines)."""


class ResourceError(CwiError):
    """A lexical resource (WordNet database, embedding table) is missing
    or cannot be loaded."""


class ConvergenceError(CwiError):
    """An iterative solver hit its iteration budget before reaching the
    requested tolerance."""

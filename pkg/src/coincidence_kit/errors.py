"""Error taxonomy shared by every engine.

The CLI maps these onto exit codes: problem-file and input errors exit 1,
consistency failures and oracle mismatches exit 2.  The unsupported-reduction
outcome is a report status, not an exception.
"""


class CoincidenceError(Exception):
    """Base class for every error this package raises on purpose."""


class ShapeError(CoincidenceError):
    """Dimension mismatch: ragged rows, non-square determinant, bad stacking."""


class ContainmentError(CoincidenceError):
    """A vector claimed to lie in a lattice does not."""


class SizeCapError(CoincidenceError):
    """A closure, tuple space, or enumeration outgrew its configured cap."""


class ConsistencyError(CoincidenceError):
    """An internal invariant failed; the computation cannot be trusted."""


class HomomorphismError(CoincidenceError):
    """Alleged homomorphism data does not preserve the relations."""


class StructureError(CoincidenceError):
    """Group data outside the supported shape (ordering convention, torsion)."""


class ProblemError(CoincidenceError):
    """A problem file failed to parse or validate; message names the field."""

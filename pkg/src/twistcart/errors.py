"""Exception hierarchy shared across the workbench.

Exit-code mapping used by the CLI: input/validation problems exit 2,
window instability exits 3, and a computation that succeeds but fails a
mathematical property exits 1.
"""


class TwistcartError(Exception):
    """Base class for all workbench errors."""


class InputError(TwistcartError):
    """Malformed or inconsistent input data (CLI exit 2)."""


class DimensionMismatch(InputError):
    pass


class NotContained(TwistcartError):
    """Claimed subspace is not contained in the ambient one."""


class InvalidComplex(InputError):
    """A differential fails d^2 = 0 or has inconsistent shapes."""


class InvalidModel(InputError):
    """A CDGA model fails one of its axioms; message names the axiom."""


class InvalidContraction(InvalidModel):
    """Prescribed contraction values violate the model axioms."""


class NotClosed(InputError):
    """A twisting element is not closed for the Cartan differential."""


class UnstableWindow(TwistcartError):
    """Windowed dimensions at polyCap D and D+2 disagree (CLI exit 3)."""


class WindowTooSmall(TwistcartError):
    """The truncation window cannot support the requested computation."""


class ZeroWeight(InputError):
    pass


class NotGC(InputError):
    """Matrix fails the generalized complex structure axioms."""


class NotIsotropic(InputError):
    pass


class NotTransverse(InputError):
    pass


class InvalidTriple(InputError):
    """Bi-Hermitian triple fails one of its conditions; message names it."""


class NotCommuting(InputError):
    pass


class NotPositive(InputError):
    pass


class NotConstantModel(InputError):
    pass


class GridTooSmall(InputError):
    pass


class NotPositiveAtCenter(InputError):
    pass


class BallOutOfRange(InputError):
    pass

"""Exception types shared across the simulation modules."""


class RotorlabError(Exception):
    pass


class StepCapExceeded(RotorlabError):
    """A walk or stabilization ran past its step budget.

    The dynamics are proven to terminate, so hitting a cap signals an
    implementation bug rather than a long computation.
    """


class CardUnderflow(RotorlabError):
    """A replayed bug found no card at an occupied site (bookkeeping bug)."""


class NonCheckeredDistribution(RotorlabError):
    """Discrepancy evolution requires all bugs on one checkerboard parity."""


class PreconditionViolated(RotorlabError):
    pass

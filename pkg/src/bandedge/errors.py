"""Exception hierarchy shared by all bandedge modules."""


class BandEdgeError(Exception):
    """Base class for every error raised by this package."""


class EmptyStack(BandEdgeError, ValueError):
    pass


class InvalidLayer(BandEdgeError, ValueError):
    pass


class PositionOutOfCell(BandEdgeError, ValueError):
    pass


class InGap(BandEdgeError, ValueError):
    """Frequency lies in a gap (or exactly on an edge) where |trace| >= 1."""


class ScanTooCoarse(BandEdgeError, RuntimeError):
    """The frequency scan skipped a band; rescan with more points."""


class DegenerateCell(BandEdgeError, ValueError):
    pass


class DegenerateGap(BandEdgeError, ValueError):
    """A zero-width gap has no distinct standing-wave edge modes."""


class NonPositiveSample(BandEdgeError, ValueError):
    pass


class DegenerateAbscissa(BandEdgeError, ValueError):
    pass


class NodeNotResolved(BandEdgeError, ValueError):
    pass


class AtEdge(BandEdgeError, ValueError):
    pass


class BranchExhausted(BandEdgeError, ValueError):
    pass


class BelowEdge(BandEdgeError, ValueError):
    pass


class UnnormalizedDistribution(BandEdgeError, ValueError):
    pass

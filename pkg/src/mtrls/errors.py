"""Exception types shared across the library."""


class MtrlsError(Exception):
    """Base class for all library errors."""


class DimensionMismatchError(MtrlsError):
    """Array arguments disagree on node count or filter dimension."""


class SelfLoopError(MtrlsError):
    """An edge connects a node to itself."""


class DuplicateEdgeError(MtrlsError):
    """The same undirected edge appears more than once."""


class NodeIndexError(MtrlsError):
    """A node index lies outside [0, n_nodes)."""


class TooManyEdgesError(MtrlsError):
    """More edges requested than distinct node pairs exist."""


class InvalidSparsityError(MtrlsError):
    """Requested zero count does not fit the filter dimension."""


class LambdaNotOneError(MtrlsError):
    """A rank-one inverse update was requested without unit forgetting."""


class SingularBlockError(MtrlsError):
    """A block or its Schur complement is numerically singular."""


class ZeroTruthError(MtrlsError):
    """Relative error is undefined against an all-zero ground truth."""

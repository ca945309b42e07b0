"""Exception hierarchy shared by the solver, simulator and CLI."""


class DirmodError(Exception):
    pass


class ConfigError(DirmodError, ValueError):
    """Invalid scenario or CLI configuration; ``field`` names the culprit."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class NumericalFailure(DirmodError, ArithmeticError):
    pass


class InfeasibleStructureError(DirmodError):
    """The phase constraints leave no free direction for the beamformer.

    Raised when L <= K/2 (more receive antennas than half the real degrees of
    freedom at the transmitter) or when the constraint matrix has full column
    rank for some other reason.
    """


class QpInfeasibleError(DirmodError):
    """The inequality polyhedron {x : Gx >= h} is empty.

    ``certificate`` is a nonnegative y with G^T y ~ 0 and h^T y > 0 (Farkas),
    ``row`` the constraint index carrying the largest certificate weight.
    """

    def __init__(self, message, certificate=None, row=None):
        super().__init__(message)
        self.certificate = certificate
        self.row = row


class PrecoderUndefinedError(DirmodError):
    pass


class EstimationImpossibleError(DirmodError):
    pass

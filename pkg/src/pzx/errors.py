"""Exception hierarchy shared by all pzx modules."""

from __future__ import annotations


class PZXError(Exception):
    """Base class for every error raised by pzx."""


# tfcore
class EvaluationAtPole(PZXError, ZeroDivisionError):
    pass


class ZeroPolynomial(PZXError, ValueError):
    pass


class DegreeZero(PZXError, ValueError):
    pass


class UnpairedComplexRoot(PZXError, ValueError):
    pass


# filterzoo
class MissingParameter(PZXError, ValueError):
    pass


class InvalidComponentValue(PZXError, ValueError):
    pass


# measure
class InvalidRange(PZXError, ValueError):
    pass


class InvalidDataset(PZXError, ValueError):
    pass


class PoleOnAxis(PZXError, ValueError):
    pass


class SaturatedSweep(PZXError):
    pass


class MalformedHeader(PZXError, ValueError):
    pass


class NonNumericField(PZXError, ValueError):
    def __init__(self, line: int, text: str = ""):
        self.line = line
        msg = f"non-numeric field on line {line}"
        if text:
            msg += f": {text!r}"
        super().__init__(msg)


class DuplicateFrequency(PZXError, ValueError):
    def __init__(self, omega: float):
        self.omega = omega
        super().__init__(f"duplicate frequency {omega!r} rad/s")


class EmptyDataset(PZXError, ValueError):
    pass


class NonPositiveAmplitude(PZXError, ValueError):
    pass


# fitting
class Overflow(PZXError, ArithmeticError):
    pass


class SingularNormalEquations(PZXError, ArithmeticError):
    pass


class NonFiniteResidual(PZXError, ArithmeticError):
    pass


class DegenerateDataset(PZXError, ValueError):
    pass


# extract
class NonDecayingTerm(PZXError, ValueError):
    pass


class DegenerateSlope(PZXError, ValueError):
    pass


class PeakTooBroad(PZXError, ValueError):
    pass


class NonPositiveParams(PZXError, ValueError):
    pass


class MissingPhase(PZXError, ValueError):
    pass


class InsufficientSamples(PZXError, ValueError):
    pass


class IllConditioned(PZXError, ArithmeticError):
    pass


class NonConvergent(PZXError):
    """Iteration cap reached; ``last`` holds the final iterate."""

    def __init__(self, message: str, last=None, change: float = float("nan")):
        super().__init__(message)
        self.last = last
        self.change = change


class AllPassAmbiguity(PZXError, ValueError):
    pass

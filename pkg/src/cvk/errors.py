"""
Exception hierarchy for cvk.

Library code raises these; only the command line converts them into
stderr messages and exit codes.
"""


class CvkError(Exception):
    """Base class for every error raised by cvk"""


class DomainError(CvkError):
    """Argument lies outside the domain of a defining integral"""


class ContourBlocked(CvkError):
    """Upward and downward pole sequences overlap, no separating contour exists"""


class NoConvergence(CvkError):
    """Adaptive quadrature exhausted its subdivision budget"""


class NonFiniteSample(CvkError):
    """Integrand returned NaN or Inf, usually a pole on or near the path"""


class MultiplePole(CvkError):
    """b**2 is rational within tolerance, so lattice poles are not simple"""


class NonTerminating(CvkError):
    """Basic hypergeometric series neither terminates nor converges"""


class DenominatorVanishes(CvkError):
    """A lower q-Pochhammer symbol vanishes before the series terminates"""


class CoefficientSingular(CvkError):
    """A difference or recurrence coefficient hits a pole"""


class SingularPoint(CvkError):
    """Evaluation point lies in the excluded singular set of an operator"""


class ExtrapolationUnstable(CvkError):
    """Richardson sequence is not converging monotonically"""


class AssumptionViolated(CvkError):
    """Parameters break a non-degeneracy condition required by a limit"""


class ConfigInvalid(CvkError):
    """Verification configuration failed validation"""


class UsageError(CvkError):
    """Command line arguments cannot be interpreted"""

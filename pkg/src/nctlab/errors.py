"""Exception types shared across the package."""


class NCTError(Exception):
    """Base class for all errors raised by this package."""


class OddDimension(NCTError):
    """Pfaffian requested for an odd-dimensional matrix."""


class ModeMismatch(NCTError):
    """Entries of a matrix mix incompatible arithmetic modes."""


class IndexOutOfRange(NCTError):
    """An index set refers to rows/columns outside the matrix."""


class SingularBlock(NCTError):
    """A leading block (or leading pfaffian minor) vanishes."""


class PreconditionViolated(NCTError):
    """A flow iterate is undefined; carries the first vanishing minor."""


class AmbiguousDecomposition(NCTError):
    """Two minimal-norm lattice decompositions fit within tolerance."""

    def __init__(self, message, solutions):
        super().__init__(message)
        self.solutions = solutions


class NotSuperIncreasing(NCTError):
    """Sequence violates the strict dominance condition."""

    def __init__(self, index, message=None):
        super().__init__(message or f"dominance fails at position {index} (1-based)")
        self.index = index


class SequenceTooShort(NCTError):
    """Sequence has fewer terms than the matrix layout needs."""


class DenominatorZero(NCTError):
    """Rational-function evaluation hit a vanishing denominator."""


class CollisionFound(NCTError):
    """Two minor expansions share a monomial exponent."""

    def __init__(self, exponent, first, second):
        super().__init__(
            f"exponent {exponent} appears in minors {first} and {second}"
        )
        self.exponent = exponent
        self.minors = (first, second)


class NotRational(NCTError):
    """Phase matrix is not rational with the requested denominator."""


class DimCapExceeded(NCTError):
    """Requested representation dimension exceeds the configured cap."""


class NotUnitary(NCTError):
    """Matrix fails the unitarity tolerance."""


class GapTooSmall(NCTError):
    """Spectrum approaches the functional-calculus cut."""

    def __init__(self, min_distance, cut=0.5):
        super().__init__(f"eigenvalue within {min_distance:.3e} of cut {cut}")
        self.min_distance = min_distance
        self.cut = cut


class SpectrumAtBranchCut(NCTError):
    """Unitary spectrum touches the excluded ray of the logarithm branch."""


class BadEpsilon(NCTError):
    """Bump parameters violate 0 < eps <= theta and theta + eps <= 1."""


class DegreeExceedsQ(NCTError):
    """Monomial degree reaches the representation's wrap-around order."""


class TruncationInsufficient(NCTError):
    """Fourier tail exceeds the norm budget at the requested cutoff."""

    def __init__(self, tail, budget):
        super().__init__(f"coefficient tail {tail:.3e} >= budget {budget:.3e}")
        self.tail = tail
        self.budget = budget


class IntegerRatio(NCTError):
    """A ratio that must be non-integral is an integer within tolerance."""

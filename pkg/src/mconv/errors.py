"""Exception hierarchy. Every domain failure raises a subclass of MconvError."""


class MconvError(Exception):
    pass


# --- field construction / residue maps ---

class InvalidCharacteristic(MconvError):
    """Characteristic is not an odd prime."""


class OrderUnavailable(MconvError):
    """Requested root-of-unity order does not divide the group order of the field."""


class RamifiedPrime(MconvError):
    """Residue characteristic divides the cyclotomic order."""


class ResidueFieldTooSmall(MconvError):
    """Requested residue degree is not a multiple of the minimal one."""


class NotIntegralAtPrime(MconvError):
    """A coefficient denominator is divisible by the residue characteristic."""


# --- linear algebra ---

class SingularMatrix(MconvError):
    pass


class NotInvariant(MconvError):
    """A subspace is not stable under one of the given matrices."""


class EigenvalueOutsideField(MconvError):
    """Eigenvalue multiplicities over the candidate roots of unity do not exhaust the
    dimension; retry over a larger field."""


# --- tuples ---

class ProductRelationViolated(MconvError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class SingularEntry(MconvError):
    def __init__(self, index):
        super().__init__(f"tuple entry {index} is singular")
        self.index = index


class ConditionAViolated(MconvError):
    """2*phi(m) < r - 4 fails."""


class InvalidM(MconvError):
    pass


class ArityMismatch(MconvError):
    pass


# --- convolution ---

class InvalidCharacter(MconvError):
    """Convolution parameter lambda is 0 or 1."""


class TooFewPoints(MconvError):
    pass


# --- reduction / pipeline ---

class BadReductionPrime(MconvError):
    """An entry became singular after reduction."""


class RankMismatch(MconvError):
    def __init__(self, expected, got):
        super().__init__(f"expected rank {expected}, got {got}")
        self.expected = expected
        self.got = got


class ParseError(MconvError):
    def __init__(self, msg, location=""):
        super().__init__(f"{msg} (at {location})" if location else msg)
        self.location = location

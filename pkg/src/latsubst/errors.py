"""Exception types raised across the package."""


class LatsubstError(Exception):
    """Base class for every error raised by latsubst."""


class DetTooSmall(LatsubstError):
    def __init__(self, det):
        super().__init__(f"|det Q| = {abs(det)} must be at least 2")
        self.det = det


class NotExpansive(LatsubstError):
    def __init__(self, charpoly):
        super().__init__(f"Q has an eigenvalue of modulus <= 1 (char poly {list(charpoly)})")
        self.charpoly = tuple(charpoly)


class BudgetExceeded(LatsubstError):
    def __init__(self, what, projected, budget, reached=None):
        msg = f"{what}: projected {projected} exceeds budget {budget}"
        if reached is not None:
            msg += f" (reached {reached})"
        super().__init__(msg)
        self.what = what
        self.projected = projected
        self.budget = budget
        self.reached = reached


class InflationMismatch(LatsubstError):
    def __init__(self):
        super().__init__("operands do not share one inflation")


class TypeCollision(LatsubstError):
    def __init__(self, point, type1, type2):
        super().__init__(f"point {tuple(point)} receives types {type1} and {type2}")
        self.point = tuple(int(v) for v in point)
        self.types = (type1, type2)


class NotPrimitive(LatsubstError):
    def __init__(self):
        super().__init__("substitution matrix is not primitive")


class WindowTooSmall(LatsubstError):
    pass


class SeedNotFound(LatsubstError):
    def __init__(self, max_power):
        super().__init__(f"no diagonal map with an integral fixed point up to power {max_power}")
        self.max_power = max_power


class DisjointnessViolation(LatsubstError):
    def __init__(self, witness, first, second):
        super().__init__(f"point {tuple(witness)} lies in both {first} and {second}")
        self.witness = tuple(witness)
        self.first = first
        self.second = second


class UnequalLengths(LatsubstError):
    def __init__(self, lengths):
        super().__init__(f"rule words have unequal lengths {sorted(set(lengths))}")
        self.lengths = lengths


class ParseError(LatsubstError):
    pass


class ValidationError(LatsubstError):
    def __init__(self, hypothesis, detail=""):
        text = f"hypothesis violated: {hypothesis}"
        if detail:
            text += f" ({detail})"
        super().__init__(text)
        self.hypothesis = hypothesis

"""Exception hierarchy shared by all hamops modules."""


class HamopsError(Exception):
    """Base class for every error raised by hamops."""


class SpaceMismatch(HamopsError):
    pass


class ParityViolation(HamopsError):
    pass


class DegreeViolation(HamopsError):
    pass


class ShapeMismatch(HamopsError):
    pass


class UnknownAtom(HamopsError):
    pass


class UnknownName(HamopsError):
    pass


class NotPolynomial(HamopsError):
    pass


class SingularMatrix(HamopsError):
    pass


class SingularJacobian(SingularMatrix):
    pass


class AntisymmetryViolation(HamopsError):
    pass


class OrderExceeded(HamopsError):
    """A total derivative needed a jet coordinate beyond the truncation order.

    ``variable`` names the dependent (or odd) variable and ``required_order``
    is the order that would have been needed, so a driver can rerun with a
    larger space.
    """

    def __init__(self, variable: str, required_order: int):
        self.variable = variable
        self.required_order = required_order
        super().__init__(
            f"total derivative of {variable!r} needs jet order {required_order}; "
            f"increase the total order"
        )

    def __reduce__(self):
        return (type(self), (self.variable, self.required_order))


class ExprSyntaxError(HamopsError):
    """Parse failure; ``position`` is the 0-based character offset."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")

    def __reduce__(self):
        return (type(self), (self.args[0].rsplit(" at position", 1)[0], self.position, self.text))


class AsymmetricMetric(HamopsError):
    pass

"""Exception hierarchy shared by the symbolic and numeric layers."""


class VarcompError(Exception):
    """Base class for all errors raised by varcomp."""


class SpecError(VarcompError):
    """Invalid JetSpec declaration (empty base, duplicate names, ...)."""


class MissingDerivativeRule(VarcompError):
    def __init__(self, atom, var):
        self.atom = atom
        self.var = var
        super().__init__(f"atom {atom!r} has no derivative rule for {var!r}")


class OrderOverflow(VarcompError):
    def __init__(self, order, limit):
        self.order = order
        self.limit = limit
        super().__init__(f"jet order {order} exceeds the limit {limit}")


class UnknownWeight(VarcompError):
    def __init__(self, atom):
        self.atom = atom
        super().__init__(f"atom {atom!r} has no homothety weight for this scaling")


class DivergentHomotopy(VarcompError):
    """The fiber homotopy integral has no finite value (weight too negative)."""

    def __init__(self, weight, message=None):
        self.weight = weight
        super().__init__(message or f"homotopy integrand has weight {weight}; "
                                    "the integral over (0, 1] diverges")


class NonFiniteIntegrand(DivergentHomotopy):
    """Numeric counterpart of DivergentHomotopy, detected by sampling near u = 0."""


class IncompletePoint(VarcompError):
    def __init__(self, var):
        self.var = var
        what = var if isinstance(var, str) else repr(var)
        super().__init__(f"jet point has no value for {what}")


class AtomEvalFailure(VarcompError):
    pass


class SingularMetric(VarcompError):
    pass


class DSLSyntaxError(VarcompError):
    def __init__(self, line, col, expected, found=None):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        msg = f"line {line}, col {col}: expected {expected}"
        if found is not None:
            msg += f", found {found!r}"
        super().__init__(msg)


class SemanticError(VarcompError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

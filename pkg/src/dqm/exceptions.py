"""Exception types raised by dqm."""


class DatasetError(ValueError):
    """Malformed or invalid input data (bad file, bad labels, bad values)."""


class NumericalDegeneracyError(ArithmeticError):
    """A computation hit a degenerate numeric case it cannot recover from."""

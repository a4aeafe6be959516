"""Exception hierarchy.

Every class carries a short ``code`` so command line tools can report the
failure in a machine readable way.
"""


class SvsError(Exception):
    code = "svs-error"


class DimensionMismatch(SvsError, ValueError):
    code = "dimension-mismatch"


class EpsilonTooLarge(SvsError, ValueError):
    code = "epsilon-too-large"


class InvalidEpsilon(SvsError, ValueError):
    code = "invalid-epsilon"


class SingularE(SvsError, ValueError):
    code = "e-singular"


class EmptyInclusion(SvsError, ValueError):
    code = "empty-after-filter"


class NumericalFailure(SvsError, ArithmeticError):
    code = "numerical-failure"


class PoleProximity(SvsError, ArithmeticError):
    """The shifted matrix ``lam*E - A`` is exactly singular."""

    code = "pole-proximity"


class ParseError(SvsError, ValueError):
    code = "parse-error"

    def __init__(self, message, path=None, line=None, column=None):
        self.path = path
        self.line = line
        self.column = column
        where = ""
        if path is not None:
            where = str(path)
            if line is not None:
                where += f":{line}"
                if column is not None:
                    where += f":{column}"
            where += ": "
        super().__init__(where + message)

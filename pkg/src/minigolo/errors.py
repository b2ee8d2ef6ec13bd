"""Exception hierarchy shared by the front end and both execution engines."""


class MiniGoloError(Exception):
    pass


class CompileTimeError(MiniGoloError):
    """Anything that stops a program before it runs (CLI exit code 2)."""

    def __init__(self, message, line=0, column=0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def format(self, filename="<source>"):
        return f"{filename}:{self.line}:{self.column}: error: {self.message}"


class LexError(CompileTimeError):
    pass


class ParseError(CompileTimeError):
    def __init__(self, line, column, expected, found):
        self.expected = tuple(expected)
        self.found = found
        if len(self.expected) == 1:
            want = self.expected[0]
        else:
            want = "one of " + ", ".join(self.expected)
        super().__init__(f"expected {want}, found {found}", line, column)


class CheckError(CompileTimeError):
    """Raised by the pipeline when reference checking produced diagnostics."""

    def __init__(self, diagnostics):
        first = diagnostics[0]
        super().__init__(first.message, first.line, first.column)
        self.diagnostics = list(diagnostics)

    def format(self, filename="<source>"):
        return "\n".join(d.format(filename) for d in self.diagnostics)


class CaptureError(CompileTimeError):
    pass


class CompileError(CompileTimeError):
    pass


class GoloRuntimeError(MiniGoloError):
    """Base of every error raised while a program executes (CLI exit code 1).

    ``trace`` collects ``(function name, location)`` pairs innermost first as
    the error unwinds through engine frames.
    """

    kind = "RuntimeError"

    def __init__(self, detail):
        super().__init__(detail)
        self.detail = detail
        self.trace = []

    def headline(self):
        return f"error: {self.kind}: {self.detail}"


class TypeMismatch(GoloRuntimeError):
    kind = "TypeMismatch"


class NoSuchMethod(GoloRuntimeError):
    kind = "NoSuchMethod"


class DivisionByZero(GoloRuntimeError):
    kind = "DivisionByZero"


class ArityError(GoloRuntimeError):
    kind = "ArityError"


class IndexOutOfBounds(GoloRuntimeError):
    kind = "IndexOutOfBounds"


class StackOverflow(GoloRuntimeError):
    kind = "StackOverflow"


class NotNumeric(TypeMismatch):
    pass

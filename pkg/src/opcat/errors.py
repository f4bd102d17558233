"""Exception hierarchy shared by every opcat module."""


class OpcatError(Exception):
    """Base class for all opcat errors."""


class MalformedTable(OpcatError):
    """A table references an undeclared id or is structurally incomplete."""


class NotComposable(OpcatError):
    pass


class MissingEntry(OpcatError):
    pass


class MalformedSpan(OpcatError):
    pass


class NotACocone(OpcatError):
    pass


class InconsistentCocone(OpcatError):
    pass


class UnresolvedReference(OpcatError):
    """A name does not resolve. ``where`` carries file/line provenance when known."""

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class InterfaceMismatch(OpcatError):
    pass


class UnknownBox(OpcatError):
    pass


class MissingChoice(OpcatError):
    pass


class WrongBoxFiller(OpcatError):
    pass


class EmptyDesignSpace(OpcatError):
    pass


class UnknownTarget(OpcatError):
    pass


class MalformedPlan(OpcatError):
    pass


class InvalidPlan(OpcatError):
    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class ParseError(OpcatError):
    def __init__(self, message, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        loc = ":".join(str(p) for p in (source, line, column) if p is not None)
        super().__init__(f"{loc}: {message}" if loc else message)


class SchemaVersionMismatch(OpcatError):
    pass

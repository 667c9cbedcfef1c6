"""Exception hierarchy shared by all synq modules.

Every error carries a stable machine-readable ``code`` so the service layer
and the CLI can report failures without string matching on messages.
"""


class SynqError(Exception):
    """Base class for all synq errors."""

    code = "SynqError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


# -- corpus ------------------------------------------------------------

class MalformedLine(SynqError):
    code = "MalformedLine"

    def __init__(self, message, sentence_ordinal=None, line_number=None):
        super().__init__(message)
        self.sentence_ordinal = sentence_ordinal
        self.line_number = line_number


class HeadOutOfRange(MalformedLine):
    code = "HeadOutOfRange"


class CyclicTree(MalformedLine):
    code = "CyclicTree"


class MultipleRoots(MalformedLine):
    code = "MultipleRoots"


class UnknownSentence(SynqError):
    code = "UnknownSentence"


class UnknownCorpus(SynqError):
    code = "UnknownCorpus"


# -- graph enhancement -------------------------------------------------

class InvalidIndex(SynqError):
    code = "InvalidIndex"


class ConfigError(SynqError):
    """A configuration file (label map, rule set, word lists, ontology,
    lexicon) is malformed."""

    code = "ConfigError"


# -- query parsing / compilation ---------------------------------------

class QuerySyntaxError(SynqError):
    code = "SyntaxError"

    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number


class UnknownNodeId(QuerySyntaxError):
    code = "UnknownNodeId"


class DisconnectedPattern(SynqError):
    code = "DisconnectedPattern"


class NoConstrainedNode(SynqError):
    code = "NoConstrainedNode"


class MarkupMismatch(SynqError):
    code = "MarkupMismatch"


class NoMarkedToken(SynqError):
    code = "NoMarkedToken"


class UnknownList(SynqError):
    code = "UnknownList"

    def __init__(self, name):
        super().__init__(f"unknown word list: {name}")
        self.name = name


# -- index / search ----------------------------------------------------

class EmptyCorpus(SynqError):
    code = "EmptyCorpus"


class FingerprintMismatch(SynqError):
    code = "FingerprintMismatch"


class UnknownCapture(SynqError):
    code = "UnknownCapture"


# -- ontology / metrics ------------------------------------------------

class UnknownLabel(SynqError):
    code = "UnknownLabel"


class InsufficientData(SynqError):
    code = "InsufficientData"


class EmptyOverlap(SynqError):
    code = "EmptyOverlap"


class DomainMismatch(SynqError):
    code = "DomainMismatch"


class EmptyInput(SynqError):
    code = "Empty"


class EmptyTraining(SynqError):
    code = "EmptyTraining"


# -- service -----------------------------------------------------------

class InvalidRecord(SynqError):
    code = "InvalidRecord"


class StorageFailure(SynqError):
    code = "StorageFailure"


class MissingData(SynqError):
    code = "MissingData"

    def __init__(self, kind):
        super().__init__(f"no data available for report kind: {kind}")
        self.kind = kind


class ParserUnavailable(SynqError):
    code = "ParserUnavailable"


class CompileError(SynqError):
    """Wraps a query parse/compile failure for the service surface."""

    code = "CompileError"

    def __init__(self, cause: SynqError):
        line = getattr(cause, "line_number", None)
        loc = f" (line {line})" if line is not None else ""
        super().__init__(f"{cause.code}{loc}: {cause}")
        self.cause = cause
        self.line_number = line

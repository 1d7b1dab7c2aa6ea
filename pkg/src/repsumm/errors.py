"""Exception hierarchy shared across the pipeline.

Two branches matter for the CLI exit code: `ValidationError` (bad input
data or configuration, exit 1) and `TransportError` (I/O or remote
service trouble, exit 2).
"""


class RepsummError(Exception):
    pass


class ValidationError(RepsummError):
    pass


class TransportError(RepsummError):
    pass


# -- corpus ------------------------------------------------------------


class MalformedLine(ValidationError):
    def __init__(self, line_no: int, detail: str = ""):
        self.line_no = line_no
        super().__init__(f"line {line_no}: not a JSON object" + (f" ({detail})" if detail else ""))


class SchemaViolation(ValidationError):
    def __init__(self, line_no: int, field: str, detail: str = ""):
        self.line_no = line_no
        self.field = field
        msg = f"line {line_no}: invalid field {field!r}"
        super().__init__(msg + (f": {detail}" if detail else ""))


class DuplicateId(ValidationError):
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(f"duplicate doc_id {doc_id!r}")


class OrphanMonthlies(ValidationError):
    def __init__(self, fund_id: str, period_key: str):
        self.fund_id = fund_id
        self.period_key = period_key
        super().__init__(f"monthlies without an investment report: ({fund_id}, {period_key})")


class OrphanInvestment(ValidationError):
    def __init__(self, fund_id: str, period_key: str):
        self.fund_id = fund_id
        self.period_key = period_key
        super().__init__(f"investment report without monthlies: ({fund_id}, {period_key})")


class DuplicateInvestment(ValidationError):
    def __init__(self, fund_id: str, period_key: str):
        self.fund_id = fund_id
        self.period_key = period_key
        super().__init__(f"more than one investment report for ({fund_id}, {period_key})")


class BadRatios(ValidationError):
    def __init__(self, ratios):
        self.ratios = tuple(ratios)
        super().__init__(f"ratios must be non-negative and sum to 1, got {self.ratios}")


# -- textproc ----------------------------------------------------------


class EmptyCorpus(ValidationError):
    def __init__(self):
        super().__init__("cannot fit TFIDF on an empty corpus")


class DimMismatch(ValidationError):
    def __init__(self, dim_a: int, dim_b: int):
        self.dims = (dim_a, dim_b)
        super().__init__(f"vector dimensions differ: {dim_a} vs {dim_b}")


# -- labeling ----------------------------------------------------------


class EmptyInvestment(ValidationError):
    def __init__(self, group_key):
        self.group_key = tuple(group_key)
        super().__init__(f"investment report of group {self.group_key} has no sentences")


# -- extractor ---------------------------------------------------------


class EmptyTrainingSet(ValidationError):
    def __init__(self):
        super().__init__("training set is empty")


class DegenerateFeatures(ValidationError):
    def __init__(self):
        super().__init__("every training vector is zero")


class EmptyInput(ValidationError):
    def __init__(self, what: str = "input"):
        super().__init__(f"{what} is empty")


class EmptyGroup(ValidationError):
    def __init__(self, group_key):
        self.group_key = tuple(group_key)
        super().__init__(f"group {self.group_key} has no monthly reports")


class ServiceUnavailable(TransportError):
    def __init__(self, url: str, detail: str = ""):
        self.url = url
        super().__init__(f"service unavailable at {url}" + (f": {detail}" if detail else ""))


class ProtocolError(TransportError):
    def __init__(self, url: str, detail: str):
        self.url = url
        super().__init__(f"bad response from {url}: {detail}")


class GenerationTooLong(TransportError):
    def __init__(self, output_tokens: int, max_new_tokens: int):
        self.output_tokens = output_tokens
        self.max_new_tokens = max_new_tokens
        super().__init__(
            f"service reported {output_tokens} output tokens, over the {max_new_tokens} cap"
        )


# -- evalharness -------------------------------------------------------


class MissingArtifact(ValidationError):
    def __init__(self, what: str):
        self.what = what
        super().__init__(f"missing required artifact: {what}")


class ExperimentError(RepsummError):
    """One or more groups failed during an experiment run."""

    def __init__(self, failures):
        # failures: list of (group_key, exception)
        self.failures = list(failures)
        keys = ", ".join(str(k) for k, _ in self.failures[:5])
        more = "" if len(self.failures) <= 5 else f" (+{len(self.failures) - 5} more)"
        super().__init__(f"{len(self.failures)} group(s) failed: {keys}{more}")

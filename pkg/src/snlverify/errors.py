class ValidationError(ValueError):
    """Input violates a documented precondition."""


class IndexOutOfRange(ValidationError):
    """A construction generated basis labels that do not fit the dimensions."""

    def __init__(self, construction: str, dims, labels):
        self.construction = construction
        self.dims = tuple(dims)
        self.labels = [tuple(x) for x in labels]
        shown = ", ".join("|" + "".join(map(str, x)) + ">" for x in self.labels)
        super().__init__(f"{construction} at dims {self.dims} generates out-of-range labels: {shown}")


class SizeLimitExceeded(ValidationError):
    pass


class HypothesisNotEstablished(Exception):
    """A lemma hypothesis could not be derived from current knowledge (not a disproof)."""


class DuplicateEntry(ValidationError):
    """Two terms of one relation address the same operator entry, so cancellation could hide."""

"""Exception hierarchy shared by services, routers and the CLI"""

from typing import Optional, Sequence


class TreeclaspError(Exception):
    """Base error; `stage` names the pipeline stage that raised it"""

    exit_code = 1

    def __init__(self, message: str, stage: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.stage = stage

    def with_stage(self, stage: str) -> "TreeclaspError":
        if self.stage is None:
            self.stage = stage
        return self

    def __str__(self) -> str:
        if self.stage:
            return f"[{self.stage}] {self.message}"
        return self.message


class InputError(TreeclaspError):
    """Malformed input: reported with exit code 2"""

    exit_code = 2


class SchemaError(InputError):
    pass


class InvalidTreeError(InputError):
    pass


class WordSyntaxError(InputError):
    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at position {position}")
        self.position = position
        self.text = text


class GeneratorRangeError(InputError):
    pass


class NotInternalEdgeError(TreeclaspError):
    pass


class ResourceLimitError(TreeclaspError):
    pass


class DepthExceededError(ResourceLimitError):
    pass


class GuardExceededError(ResourceLimitError):
    pass


class PatternError(TreeclaspError):
    pass


class NPatternError(PatternError):
    pass


class NonNullLeafError(TreeclaspError):
    def __init__(self, message: str, leaves: Sequence[str] = ()):
        super().__init__(message)
        self.leaves = list(leaves)


class CertificateRefused(TreeclaspError):
    def __init__(self, message: str, leaf: str):
        super().__init__(message)
        self.leaf = leaf


class SphereConditionError(TreeclaspError):
    pass


class SingularMatrixError(TreeclaspError):
    def __init__(self, message: str, kernel_vector: Sequence = ()):
        super().__init__(message)
        self.kernel_vector = list(kernel_vector)


class NonTreeTermError(TreeclaspError):
    pass

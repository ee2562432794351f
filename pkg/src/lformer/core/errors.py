"""Exception hierarchy shared by every lformer module.

Each error carries the process exit code the command-line interface reports for it,
so scripts can tell usage problems, data problems and numeric failures apart.
"""


class LFormerError(Exception):
    """Base exception for lformer operations"""

    exit_code = 1
    prefix = "LFormer Error"

    def __init__(self, message: str) -> None:
        """Initialize LFormerError with a message"""
        super().__init__(f"{self.prefix}: {message}")


class DimensionError(LFormerError):
    """Raised when tensor shapes are incompatible with an operation"""

    prefix = "Dimension Error"

    def __init__(self, message: str, *shapes: tuple[int, ...]) -> None:
        """Initialize DimensionError naming every offending shape"""
        if shapes:
            message = f"{message} (shapes: {', '.join(str(tuple(s)) for s in shapes)})"
        super().__init__(message)


class ConfigurationError(LFormerError):
    """Raised when a configuration value is invalid or unknown"""

    prefix = "Configuration Error"


class DataError(LFormerError):
    """Raised when on-disk data is missing, malformed or inconsistent"""

    exit_code = 2
    prefix = "Data Error"


class NumericError(LFormerError):
    """Raised when a computation produces or receives non-finite values"""

    exit_code = 3
    prefix = "Numeric Error"


class ContainerFormatError(DataError):
    """Raised when a tensor container file cannot be decoded"""

    prefix = "Container Format Error"


class ContainerMagicError(ContainerFormatError):
    """Raised when a file does not start with the container magic bytes"""

    def __init__(self, found: bytes) -> None:
        """Initialize ContainerMagicError with the bytes found instead"""
        super().__init__(f"bad magic {found!r}")


class ContainerVersionError(ContainerFormatError):
    """Raised when a container declares a version this reader does not know"""

    def __init__(self, version: int) -> None:
        """Initialize ContainerVersionError with the declared version"""
        super().__init__(f"unsupported version {version}")


class ContainerTruncatedError(ContainerFormatError):
    """Raised when a container ends before its header or payload is complete"""

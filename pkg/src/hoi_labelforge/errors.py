"""Exception types and the exit codes the command line maps them to."""

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VALIDATION = 3
EXIT_FORMAT = 4


class LabelForgeError(Exception):
    """Base class for every error this package raises on purpose."""

    exit_code = EXIT_VALIDATION


class InputError(LabelForgeError):
    """Missing or unreadable input (absent file, bad JSON, I/O failure)."""

    exit_code = EXIT_INPUT


class ValidationError(LabelForgeError):
    """Readable data that violates a schema or invariant."""

    exit_code = EXIT_VALIDATION


class FormatError(LabelForgeError):
    """Binary container mismatch: wrong magic, version, or payload kind."""

    exit_code = EXIT_FORMAT


class AlignmentError(LabelForgeError):
    """Row counts disagree between files that must line up."""

    exit_code = EXIT_FORMAT

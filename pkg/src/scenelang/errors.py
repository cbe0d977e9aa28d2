"""Exception types shared across the package."""


class SceneLangError(Exception):
    """Base class for every error raised by scenelang."""


class ProfileError(SceneLangError):
    """A profile document violates a profile invariant."""


class SceneError(SceneLangError):
    """A scene operation received bad input (unknown relation, missing object)."""


class CodecError(SceneLangError):
    """Compact binary encoding or decoding failed."""


class ProgramError(SceneLangError):
    """Program text or token sequence could not be parsed into a tree."""


class ExecutionError(SceneLangError):
    """A module application failed at run time (type mismatch, unique violation)."""


class TemplateError(SceneLangError):
    """A question template is malformed or instantiation ran out of budget."""


class QuestionParseError(SceneLangError):
    """No template matched a question, or the match was ambiguous."""

    def __init__(self, message: str, candidates: tuple[str, ...] = ()):
        super().__init__(message)
        self.candidates = candidates

"""Exception hierarchy shared across the workbench.

Domain rejections that are values (e.g. clip admission) are not exceptions;
everything here signals a contract violation or unusable input.
"""


class VqaLabError(Exception):
    """Base class for all workbench errors."""


# --- media ---------------------------------------------------------------

class MalformedHeader(VqaLabError):
    pass


class UnsupportedColorspace(VqaLabError):
    pass


class TruncatedFrame(VqaLabError):
    pass


class MissingChroma(VqaLabError):
    pass


class ZeroStride(VqaLabError):
    pass


# --- feature extraction --------------------------------------------------

class EmptySequence(VqaLabError):
    pass


class FrameTooSmall(VqaLabError):
    pass


class SingleFrame(VqaLabError):
    pass


class TooFewFrames(VqaLabError):
    pass


class DegenerateSamples(VqaLabError):
    pass


class OneSidedSamples(VqaLabError):
    pass


class EmptyCorpus(VqaLabError):
    pass


class SingularCovariance(VqaLabError):
    pass


# --- subjective scores ---------------------------------------------------

class DegenerateSession(VqaLabError):
    def __init__(self, subject, session):
        super().__init__(f"degenerate session: subject={subject} session={session}")
        self.subject = subject
        self.session = session


class UnratedVideo(VqaLabError):
    pass


class InsufficientData(VqaLabError):
    pass


# --- evaluation ----------------------------------------------------------

class ConstantInput(VqaLabError):
    pass


class LengthMismatch(VqaLabError):
    pass


class TooFewItems(VqaLabError):
    pass


class FitDiverged(VqaLabError):
    pass


class SingularKernel(VqaLabError):
    pass


# --- moeva ---------------------------------------------------------------

class ImageTooSmall(VqaLabError):
    pass


class Infeasible(VqaLabError):
    pass


class AttemptsExhausted(VqaLabError):
    pass


class EmptyNegatives(VqaLabError):
    pass


class NonPositiveTemperature(VqaLabError):
    pass


class ShapeMismatch(VqaLabError):
    pass


class InvalidMomentum(VqaLabError):
    pass


class LayoutMismatch(VqaLabError):
    pass


# --- study service -------------------------------------------------------

class SizeMismatch(VqaLabError):
    pass


class IndivisibleGroups(VqaLabError):
    pass


class GapNotElapsed(VqaLabError):
    def __init__(self, remaining_hours):
        super().__init__(f"minimum session gap not elapsed: {remaining_hours:.2f} h remaining")
        self.remaining_hours = remaining_hours


class NoPlaylistRemaining(VqaLabError):
    pass


class PendingRating(VqaLabError):
    pass


class SessionComplete(VqaLabError):
    pass


class OutOfRange(VqaLabError):
    pass


class WrongVideo(VqaLabError):
    pass


class DuplicateRating(VqaLabError):
    pass


class EmptyStore(VqaLabError):
    pass


# --- cli / reporting -----------------------------------------------------

class SchemaError(VqaLabError):
    pass


class UsageError(VqaLabError):
    pass

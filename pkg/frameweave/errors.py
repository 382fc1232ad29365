from __future__ import annotations

from typing import List, Optional, Sequence


class FrameweaveError(Exception):
    """Base class for every error raised by frameweave."""


class InvalidArgumentError(FrameweaveError, ValueError):
    pass


class ConfigError(InvalidArgumentError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class PreconditionError(FrameweaveError):
    pass


class NotInvertibleError(FrameweaveError):
    pass


class NotAFusionFrameError(FrameweaveError):
    pass


class NotAnInformationPacketError(FrameweaveError):
    pass


class ConvergenceError(FrameweaveError):
    def __init__(
        self,
        message: str,
        residuals: Optional[Sequence[float]] = None,
        last_iterate=None,
    ):
        super().__init__(message)
        self.residuals: List[float] = list(residuals or [])
        self.last_iterate = last_iterate


class ReportError(FrameweaveError):
    def __init__(self, path, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path

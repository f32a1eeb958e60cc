from pathlib import Path
from typing import Iterable, List, Optional, Tuple, Union


class NlosSslError(Exception):
    """Base class for all errors raised by nlos_ssl."""


class ConfigurationError(NlosSslError, ValueError):
    """A run, scenario or parameter set is invalid."""


class MeshFormatError(NlosSslError):
    """An OBJ file could not be parsed."""

    def __init__(self, path: Union[str, Path], line_number: int, message: str):
        self.path = Path(path)
        self.line_number = line_number
        super().__init__(f"{self.path}:{line_number}: {message}")


class MeshValidationError(NlosSslError):
    """A parsed mesh violates a structural invariant."""

    def __init__(
        self,
        message: str,
        triangle_ids: Optional[Iterable[int]] = None,
        edge: Optional[Tuple[int, int]] = None,
    ):
        self.triangle_ids: List[int] = sorted(triangle_ids or [])
        self.edge = edge
        details = message
        if self.triangle_ids:
            details += f" (triangles: {', '.join(str(t) for t in self.triangle_ids)})"
        if edge is not None:
            details += f" (edge: {edge[0]}-{edge[1]})"
        super().__init__(details)


class ObservationFormatError(NlosSslError):
    """An observation stream file is malformed."""

    def __init__(self, path: Union[str, Path], line_number: int, message: str):
        self.path = Path(path)
        self.line_number = line_number
        super().__init__(f"{self.path}:{line_number}: {message}")

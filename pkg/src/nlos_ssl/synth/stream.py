"""Observation stream CSV: the hand-off between the oracle and the localizer."""
import csv
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Union

import numpy as np

from ..errors import ObservationFormatError
from ..raytrace.models import Observation

OBSERVATION_CSV_HEADER = ["frame", "time", "lx", "ly", "lz", "qx", "qy", "qz", "qw", "dx", "dy", "dz"]


def write_observations(frames: Iterable[Sequence[Observation]], output_file: Union[str, Path]) -> Path:
    path = Path(output_file)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(OBSERVATION_CSV_HEADER)
        for observations in frames:
            for observation in observations:
                writer.writerow(
                    [observation.frame, f"{observation.time:.6f}"]
                    + [repr(float(value)) for value in observation.position]
                    + [repr(float(value)) for value in observation.orientation]
                    + [repr(float(value)) for value in observation.direction]
                )
    return path


def read_observations(input_file: Union[str, Path]) -> List[List[Observation]]:
    """Observations grouped per frame id, frames 0..max; frames without rows are empty.

    Directions are re-normalized so hand-written streams need not be exact.
    """
    path = Path(input_file)
    if not path.is_file():
        raise FileNotFoundError(f"file not found: {path}")

    by_frame: Dict[int, List[Observation]] = {}
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [column.strip() for column in header] != OBSERVATION_CSV_HEADER:
            raise ObservationFormatError(path, 1, f"expected header {','.join(OBSERVATION_CSV_HEADER)}")
        for line_number, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(OBSERVATION_CSV_HEADER):
                raise ObservationFormatError(path, line_number, f"expected {len(OBSERVATION_CSV_HEADER)} columns, got {len(row)}")
            try:
                frame = int(row[0])
                values = [float(cell) for cell in row[1:]]
            except ValueError:
                raise ObservationFormatError(path, line_number, "non-numeric value") from None
            if frame < 0:
                raise ObservationFormatError(path, line_number, f"negative frame id {frame}")
            direction = np.array(values[8:11])
            norm = float(np.linalg.norm(direction))
            if not np.isfinite(norm) or norm == 0.0:
                raise ObservationFormatError(path, line_number, "direction must be a non-zero vector")
            observations = by_frame.setdefault(frame, [])
            observations.append(
                Observation(
                    frame=frame,
                    index=len(observations),
                    position=np.array(values[1:4]),
                    direction=direction / norm,
                    orientation=np.array(values[4:8]),
                    time=values[0],
                )
            )

    if not by_frame:
        return []
    return [by_frame.get(frame, []) for frame in range(max(by_frame) + 1)]

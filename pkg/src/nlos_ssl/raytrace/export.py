import csv
from pathlib import Path
from typing import Iterable, Union

from .models import RayPathTree

RAY_PATH_CSV_HEADER = [
    "frame",
    "observation",
    "node",
    "parent",
    "kind",
    "order",
    "ox",
    "oy",
    "oz",
    "dx",
    "dy",
    "dz",
    "length",
]


def write_ray_paths_csv(trees: Iterable[RayPathTree], output_file: Union[str, Path]) -> Path:
    """One row per segment; the root's parent is written as -1."""
    path = Path(output_file)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(RAY_PATH_CSV_HEADER)
        for tree in trees:
            for segment in tree.segments:
                writer.writerow(
                    [tree.frame, tree.observation, segment.id, segment.parent, segment.kind.value, segment.order]
                    + [f"{value:.9g}" for value in (*segment.origin, *segment.direction)]
                    + [f"{segment.length:.9g}"]
                )
    return path

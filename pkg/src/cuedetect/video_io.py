"""Frame sequence and ground-truth I/O.

All knowledge of on-disk formats lives here: numbered PNG/JPEG frame
directories (flat, or the CDnet ``input/inNNNNNN.jpg`` layout), 5-valued
ground-truth masks, ``temporalROI.txt`` and binary 0/255 output masks.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np
from PIL import Image

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")

# CDnet ground-truth codes
GT_STATIC = 0
GT_SHADOW = 50
GT_OUTSIDE_ROI = 85
GT_UNKNOWN = 170
GT_MOVING = 255
GT_CODES = (GT_STATIC, GT_SHADOW, GT_OUTSIDE_ROI, GT_UNKNOWN, GT_MOVING)

_NUMBER = re.compile(r"(\d+)")


class SequenceError(Exception):
    """Raised for malformed frame directories, masks or ground truth."""


def to_gray(rgb) -> np.ndarray:
    """BT.601 luma, rounded half-up, as uint8.

    Accepts a single ``(R, G, B)`` triple or any ``(..., 3)`` array. Integer
    arithmetic keeps the result exact: ``(299 R + 587 G + 114 B + 500) // 1000``.
    """
    arr = np.asarray(rgb, dtype=np.int64)
    if arr.shape[-1] != 3:
        raise ValueError(f"expected trailing RGB axis, got shape {arr.shape}")
    luma = (299 * arr[..., 0] + 587 * arr[..., 1] + 114 * arr[..., 2] + 500) // 1000
    return np.clip(luma, 0, 255).astype(np.uint8)


@dataclass
class Frame:
    rgb: np.ndarray
    index: int = 1
    path: Path | None = None
    gray: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        rgb = np.asarray(self.rgb)
        if rgb.ndim != 3 or rgb.shape[2] != 3:
            raise ValueError(f"frame must be HxWx3, got {rgb.shape}")
        self.rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
        self.gray = to_gray(self.rgb)

    @property
    def height(self) -> int:
        return self.rgb.shape[0]

    @property
    def width(self) -> int:
        return self.rgb.shape[1]


def _frame_number(path: Path) -> int | None:
    digits = _NUMBER.findall(path.stem)
    return int(digits[-1]) if digits else None


def list_frames(directory: str | Path) -> list[tuple[int, Path]]:
    """Numbered image files of a sequence directory, ascending by number.

    A directory holding an ``input/`` subfolder (CDnet layout) is descended
    into automatically.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise SequenceError(f"frame directory not found: {directory}")
    if (directory / "input").is_dir():
        directory = directory / "input"
    numbered = []
    for path in directory.iterdir():
        if path.suffix.lower() not in IMAGE_SUFFIXES or not path.is_file():
            continue
        number = _frame_number(path)
        if number is not None:
            numbered.append((number, path))
    numbered.sort()
    for (a, pa), (b, pb) in zip(numbered, numbered[1:]):
        if a == b:
            raise SequenceError(f"duplicate frame number {a}: {pa.name} and {pb.name}")
    return numbered


def read_rgb(path: str | Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (OSError, ValueError) as exc:
        raise SequenceError(f"unreadable image {path}: {exc}") from exc


def load_sequence(directory: str | Path) -> Iterator[Frame]:
    """Yield the frames of ``directory`` in ascending index order.

    Raises ``SequenceError`` for a missing or empty directory, an unreadable
    file, or a frame whose size differs from the first one.
    """
    entries = list_frames(directory)
    if not entries:
        raise SequenceError(f"no frames found in {directory}")
    shape = None
    for number, path in entries:
        rgb = read_rgb(path)
        if shape is None:
            shape = rgb.shape
        elif rgb.shape != shape:
            raise SequenceError(
                f"frame {number} ({path.name}) is {rgb.shape[1]}x{rgb.shape[0]}, "
                f"expected {shape[1]}x{shape[0]}"
            )
        yield Frame(rgb, index=number, path=path)


def write_mask(mask, path: str | Path) -> None:
    """Write a binary label mask as an 8-bit PNG (foreground 255, background 0)."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {mask.shape}")
    out = np.where(mask.astype(bool), 255, 0).astype(np.uint8)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(out, mode="L").save(path)


def read_mask(path: str | Path) -> np.ndarray:
    """Read a 0/255 mask back as a boolean array (anything > 127 is foreground)."""
    with Image.open(path) as img:
        return np.asarray(img.convert("L")) > 127


def load_groundtruth(path: str | Path) -> np.ndarray:
    """Load a CDnet ground-truth image verbatim as uint8 codes.

    Rejects files containing values other than 0, 50, 85, 170, 255.
    """
    try:
        with Image.open(path) as img:
            arr = np.asarray(img)
    except OSError as exc:
        raise SequenceError(f"unreadable ground truth {path}: {exc}") from exc
    if arr.ndim == 3:
        if not (np.all(arr[..., 0] == arr[..., 1]) and np.all(arr[..., 0] == arr[..., 2])):
            raise SequenceError(f"ground truth {path} is not single-channel")
        arr = arr[..., 0]
    arr = arr.astype(np.uint8)
    bad = ~np.isin(arr, GT_CODES)
    if bad.any():
        values = sorted(set(np.unique(arr[bad]).tolist()))
        raise SequenceError(f"ground truth {path} contains invalid codes {values[:5]}")
    return arr


def mask_filename(index: int) -> str:
    return f"bin{index:06d}.png"


def read_temporal_roi(path: str | Path) -> tuple[int, int]:
    """First and last evaluated frame (1-based, inclusive) from ``temporalROI.txt``."""
    try:
        parts = Path(path).read_text().split()
        first, last = int(parts[0]), int(parts[1])
    except (OSError, IndexError, ValueError) as exc:
        raise SequenceError(f"malformed temporal ROI file {path}") from exc
    if first < 1 or last < first:
        raise SequenceError(f"invalid temporal ROI {first} {last} in {path}")
    return first, last


def list_groundtruth(directory: str | Path) -> list[tuple[int, Path]]:
    directory = Path(directory)
    if (directory / "groundtruth").is_dir():
        directory = directory / "groundtruth"
    if not directory.is_dir():
        raise SequenceError(f"ground-truth directory not found: {directory}")
    entries = []
    for path in directory.iterdir():
        if path.suffix.lower() in IMAGE_SUFFIXES and path.is_file():
            number = _frame_number(path)
            if number is not None:
                entries.append((number, path))
    return sorted(entries)

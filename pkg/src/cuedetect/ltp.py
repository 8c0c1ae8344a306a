"""Local ternary patterns over a 12-pixel neighborhood.

Each neighbor is compared with the center using a multiplicative tolerance
(10%) in bright regions and an additive one (5 gray levels) in dark regions,
giving a 2-bit code: ``01`` brighter, ``10`` darker, ``00`` similar. The 12
codes are concatenated into a 24-bit integer, first neighbor in the most
significant bits.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

SIMILAR = 0b00
BRIGHTER = 0b01
DARKER = 0b10

# (dy, dx): the 8-connected ring plus the four axis pixels at distance 2,
# row-major.
NEIGHBOR_OFFSETS: tuple[tuple[int, int], ...] = (
    (-2, 0),
    (-1, -1), (-1, 0), (-1, 1),
    (0, -2), (0, -1), (0, 1), (0, 2),
    (1, -1), (1, 0), (1, 1),
    (2, 0),
)
CODE_BITS = 2 * len(NEIGHBOR_OFFSETS)
CODE_MASK = (1 << CODE_BITS) - 1


def _ratio(scale: float) -> tuple[int, int]:
    # exact num/den so the bright-region test never rounds 1.1 * center
    frac = Fraction(scale).limit_denominator(10_000)
    return frac.numerator, frac.denominator


def ltp_compare(center, neighbor, tau: float = 0.1, nu: float = 5):
    """2-bit ternary code for ``neighbor`` relative to ``center``.

    Works elementwise on arrays. Integer inputs are compared exactly (no
    rounding of ``1.1 * center``); float inputs use float arithmetic.
    """
    c = np.asarray(center)
    n = np.asarray(neighbor)
    if np.issubdtype(c.dtype, np.integer) and np.issubdtype(n.dtype, np.integer):
        c = c.astype(np.int64)
        n = n.astype(np.int64)
        up_num, up_den = _ratio(1.0 + tau)
        down_num, down_den = _ratio(1.0 - tau)
        brighter = (n * up_den > c * up_num) & (n > c + nu)
        darker = (n * down_den < c * down_num) & (n < c - nu)
    else:
        c = c.astype(np.float64)
        n = n.astype(np.float64)
        brighter = (n > (1.0 + tau) * c) & (n > c + nu)
        darker = (n < (1.0 - tau) * c) & (n < c - nu)
    out = np.where(brighter, BRIGHTER, np.where(darker, DARKER, SIMILAR))
    return out.astype(np.uint8) if out.ndim else int(out)


def ltp_image(gray, tau: float = 0.1, nu: float = 5) -> np.ndarray:
    """24-bit LTP code of every pixel, neighbors clamped at the image border."""
    gray = np.asarray(gray)
    if gray.ndim != 2:
        raise ValueError(f"expected a 2-D gray image, got shape {gray.shape}")
    h, w = gray.shape
    padded = np.pad(gray, 2, mode="edge")
    codes = np.zeros((h, w), dtype=np.uint32)
    for k, (dy, dx) in enumerate(NEIGHBOR_OFFSETS):
        shifted = padded[2 + dy : 2 + dy + h, 2 + dx : 2 + dx + w]
        bits = ltp_compare(gray, shifted, tau, nu).astype(np.uint32)
        codes |= bits << np.uint32(2 * (len(NEIGHBOR_OFFSETS) - 1 - k))
    return codes


def ltp_response(gray, y: int, x: int, tau: float = 0.1, nu: float = 5) -> int:
    """LTP code of a single pixel ``(y, x)``."""
    gray = np.asarray(gray)
    h, w = gray.shape
    center = gray[y, x]
    code = 0
    for dy, dx in NEIGHBOR_OFFSETS:
        yy = min(max(y + dy, 0), h - 1)
        xx = min(max(x + dx, 0), w - 1)
        code = (code << 2) | ltp_compare(center, gray[yy, xx], tau, nu)
    return code


def slot_shift(slot: int) -> int:
    """Bit offset of neighbor ``slot`` inside the 24-bit code."""
    return 2 * (len(NEIGHBOR_OFFSETS) - 1 - slot)


def hamming(a, b) -> np.ndarray:
    """Bitwise Hamming distance between code arrays."""
    x = np.bitwise_xor(np.asarray(a, dtype=np.uint32), np.asarray(b, dtype=np.uint32))
    return np.bitwise_count(x)

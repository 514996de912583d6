"""Input loading and synthetic data generation."""

from __future__ import annotations

import logging

from .errors import ParameterError
from .rng import RandomSource

logger = logging.getLogger("dppsi")


def load_items(path) -> list[bytes]:
    """Read one item per line (UTF-8, trailing newline optional).

    Items are deduplicated keeping first occurrence; the number of dropped
    duplicates is logged as a warning.  An empty file yields an empty list.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    seen: dict[bytes, None] = {}
    duplicates = 0
    for line in lines:
        item = line.encode("utf-8")
        if item in seen:
            duplicates += 1
        else:
            seen[item] = None
    if duplicates:
        logger.warning("dropped %d duplicate item(s) from %s", duplicates, path)
    return list(seen)


def write_items(path, items: list[bytes]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(item.decode("utf-8"))
            fh.write("\n")


def load_payloads(path) -> list[float]:
    """Read one numeric payload per line, aligned with the item file."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split()
    try:
        return [float(v) for v in lines]
    except ValueError as exc:
        raise ParameterError(f"bad payload value in {path}: {exc}") from None


def synthetic_pair(
    size: int, overlap_ratio: float, rng: RandomSource
) -> tuple[list[bytes], list[bytes]]:
    """Equal-size item sets with an exact planted overlap.

    Exactly round(size * overlap_ratio) items are shared; the rest are
    disjoint per side.  A random salt makes instances distinct across runs
    while staying deterministic for a seeded source.
    """
    if size < 0:
        raise ParameterError("size must be >= 0")
    if not 0.0 <= overlap_ratio <= 1.0:
        raise ParameterError(f"overlap_ratio must be in [0, 1], got {overlap_ratio}")
    shared = round(size * overlap_ratio)
    salt = rng.token_bytes(8).hex()
    common = [f"c:{salt}:{i}".encode() for i in range(shared)]
    x_only = [f"x:{salt}:{i}".encode() for i in range(size - shared)]
    y_only = [f"y:{salt}:{i}".encode() for i in range(size - shared)]
    return common + x_only, common + y_only

"""Integer Fock-occupancy bookkeeping for field modes.

An occupancy is a tuple of nonnegative quantum counts, one per mode.
Creation always succeeds; annihilation of an empty mode yields ``None``,
the "no state at all" outcome, which is deliberately distinct from the
all-zero vacuum tuple: an excitation must exist before it can be destroyed,
and trying to destroy a nonexistent one does not leave the vacuum behind.
"""

from __future__ import annotations


def as_occupancy(occupancy) -> tuple[int, ...]:
    """Validate and return an occupancy as a tuple of nonnegative ints."""
    occ = tuple(int(n) for n in occupancy)
    if any(n != m for n, m in zip(occ, occupancy)):
        raise ValueError(f"occupancies must be integers, got {tuple(occupancy)!r}")
    if any(n < 0 for n in occ):
        raise ValueError(f"occupancies must be nonnegative, got {occ!r}")
    return occ


def _check_mode(occ: tuple[int, ...], mode: int) -> int:
    mode = int(mode)
    if not 0 <= mode < len(occ):
        raise ValueError(f"mode {mode} out of range for {len(occ)} modes")
    return mode


def fock_create(occupancy, mode: int) -> tuple[int, ...]:
    """Add one quantum to ``mode``."""
    occ = as_occupancy(occupancy)
    mode = _check_mode(occ, mode)
    return occ[:mode] + (occ[mode] + 1,) + occ[mode + 1:]


def fock_annihilate(occupancy, mode: int) -> tuple[int, ...] | None:
    """Remove one quantum from ``mode``, or ``None`` if the mode is empty.

    ``None`` models the annihilation-of-nothing outcome; it is not an error
    and it is not the vacuum.
    """
    occ = as_occupancy(occupancy)
    mode = _check_mode(occ, mode)
    if occ[mode] == 0:
        return None
    return occ[:mode] + (occ[mode] - 1,) + occ[mode + 1:]

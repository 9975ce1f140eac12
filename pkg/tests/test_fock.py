import itertools

import pytest

from stosszahl.fock import as_occupancy, fock_annihilate, fock_create


def occupancies(max_modes, max_quanta):
    for n_modes in range(1, max_modes + 1):
        for occ in itertools.product(range(max_quanta + 1), repeat=n_modes):
            if sum(occ) <= max_quanta:
                yield occ


def test_create_on_vacuum():
    assert fock_create((0, 0, 0), 1) == (0, 1, 0)


def test_create_increments():
    assert fock_create((2,), 0) == (3,)


def test_annihilate_vacuum_gives_null_not_vacuum():
    result = fock_annihilate((0, 0), 0)
    assert result is None
    assert result != (0, 0)


def test_annihilate_single_quantum_gives_vacuum():
    assert fock_annihilate((1,), 0) == (0,)


def test_annihilate_twice_hits_null():
    first = fock_annihilate((0, 1), 1)
    assert first == (0, 0)
    assert fock_annihilate(first, 1) is None


def test_create_then_annihilate_is_identity_everywhere():
    for occ in occupancies(3, 3):
        for mode in range(len(occ)):
            assert fock_annihilate(fock_create(occ, mode), mode) == occ


def test_annihilate_then_create_identity_only_when_occupied():
    for occ in occupancies(3, 3):
        for mode in range(len(occ)):
            lowered = fock_annihilate(occ, mode)
            if occ[mode] >= 1:
                assert fock_create(lowered, mode) == occ
            else:
                assert lowered is None


def test_invalid_mode_rejected():
    with pytest.raises(ValueError, match="out of range"):
        fock_create((0, 0), 2)
    with pytest.raises(ValueError, match="out of range"):
        fock_annihilate((0, 0), -1)


def test_negative_occupancy_rejected():
    with pytest.raises(ValueError, match="nonnegative"):
        as_occupancy((1, -1))


def test_fractional_occupancy_rejected():
    with pytest.raises(ValueError, match="integers"):
        as_occupancy((1.5,))

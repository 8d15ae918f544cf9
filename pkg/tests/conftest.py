import numpy as np
import pytest

from pharmgen.elements import (
    BOND_AROMATIC, BOND_SINGLE,
)
from pharmgen.molgraph import new_molgraph
from pharmgen.synth import gen_synthetic


def hexagon_coords(side=1.39, z=0.0):
    radius = side / (2.0 * np.sin(np.pi / 6))
    return [[radius * np.cos(2 * np.pi * k / 6), radius * np.sin(2 * np.pi * k / 6), z]
            for k in range(6)]


def benzene():
    """Six aromatic carbons in a ring."""
    bonds = [(k, (k + 1) % 6, BOND_AROMATIC) for k in range(6)]
    return new_molgraph(["C"] * 6, [0] * 6, hexagon_coords(), bonds, name="benzene")


def toluene_like():
    """Benzene ring plus one methyl substituent."""
    coords = hexagon_coords() + [[3.0, 0.0, 0.0]]
    bonds = [(k, (k + 1) % 6, BOND_AROMATIC) for k in range(6)] + [(0, 6, BOND_SINGLE)]
    return new_molgraph(["C"] * 7, [0] * 7, coords, bonds, name="toluene-like")


def ethanol_like():
    """C-C-O chain."""
    coords = [[0, 0, 0], [1.54, 0, 0], [2.4, 1.1, 0]]
    bonds = [(0, 1, BOND_SINGLE), (1, 2, BOND_SINGLE)]
    return new_molgraph(["C", "C", "O"], [0, 0, 0], coords, bonds, name="ethanol-like")


def dimethyl_ether_like():
    """C-O-C chain: same composition as ethanol-like, different topology."""
    coords = [[0, 0, 0], [1.43, 0, 0], [2.3, 1.1, 0]]
    bonds = [(0, 1, BOND_SINGLE), (1, 2, BOND_SINGLE)]
    return new_molgraph(["C", "O", "C"], [0, 0, 0], coords, bonds, name="ether-like")


def methane_like():
    return new_molgraph(["C"], [0], [[0.0, 0.0, 0.0]], [], name="methane-like")


@pytest.fixture(scope="session")
def small_molecules():
    return gen_synthetic(11, 30, (5, 12))

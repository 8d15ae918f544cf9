"""Deterministic synthetic molecule generation for desk-scale datasets.

Builds valence-respecting random trees, optionally seeded with a 5- or
6-membered aromatic carbon ring, embeds them with standard bond lengths,
and relaxes the geometry with a deterministic force layout.
"""

import json

import numpy as np

from .elements import (
    BOND_AROMATIC, BOND_DOUBLE, BOND_ORDER, BOND_SINGLE, BOND_TRIPLE,
    DEFAULT_TABLE, bond_length,
)
from .errors import InvalidRange
from .molgraph import MolGraph, new_molgraph

MIN_ATOMS, MAX_ATOMS = 3, 32
_MIN_SEPARATION = 0.9          # hard floor on pairwise distances after layout
_NONBOND_TARGET = 2.0          # repulsion cutoff in the relaxation

# growth vocabulary: heavier on carbon, like drug-like datasets
_ELEMENT_WEIGHTS = [("C", 0.62), ("N", 0.14), ("O", 0.14),
                    ("F", 0.04), ("S", 0.03), ("Cl", 0.03)]


def _pick_element(rng):
    r = rng.random()
    acc = 0.0
    for sym, w in _ELEMENT_WEIGHTS:
        acc += w
        if r < acc:
            return sym
    return "C"


def _relax(coords, bond_pairs, target_lengths, steps=300, lr=0.05):
    """Gradient descent on bond springs plus short-range repulsion."""
    n = coords.shape[0]
    for _ in range(steps):
        grad = np.zeros_like(coords)
        for (i, j), L in zip(bond_pairs, target_lengths):
            d = coords[i] - coords[j]
            dist = max(np.linalg.norm(d), 1e-9)
            g = 2.0 * (dist - L) * d / dist
            grad[i] += g
            grad[j] -= g
        diff = coords[:, None, :] - coords[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        np.fill_diagonal(dist, np.inf)
        bonded = np.zeros((n, n), dtype=bool)
        for i, j in bond_pairs:
            bonded[i, j] = bonded[j, i] = True
        close = (dist < _NONBOND_TARGET) & ~bonded
        if close.any():
            safe = np.where(close, dist, 1.0)
            w = np.where(close, 2.0 * (safe - _NONBOND_TARGET) / safe, 0.0)
            grad += np.einsum("ij,ijk->ik", w, diff)
        coords = coords - lr * grad
    return coords


def gen_synthetic(seed: int, count: int, size_range, rng=None) -> list:
    """Generate `count` valid molecules with sizes drawn from [min, max] atoms."""
    lo, hi = size_range
    if not (MIN_ATOMS <= lo <= hi <= MAX_ATOMS):
        raise InvalidRange(f"size range {size_range} outside [{MIN_ATOMS}, {MAX_ATOMS}]")
    rng = rng or np.random.default_rng(seed)
    return [_gen_one(rng, int(rng.integers(lo, hi + 1)), f"synthetic-{seed}-{k}")
            for k in range(count)]


def _gen_one(rng, n, name) -> MolGraph:
    table = DEFAULT_TABLE
    symbols, charges, bonds = [], [], []
    # remaining valence capacity per atom
    capacity = []

    ring_size = 0
    if n >= 8 and rng.random() < 0.5:
        ring_size = int(rng.choice([5, 6]))
        for k in range(ring_size):
            symbols.append("C")
            charges.append(0)
            capacity.append(4.0 - 3.0)  # two aromatic bonds at order 1.5 each
            bonds.append((k, (k + 1) % ring_size, BOND_AROMATIC))

    while len(symbols) < n:
        i = len(symbols)
        if i == 0:
            # always start on carbon so the tree can keep growing
            symbols.append("C")
            charges.append(0)
            capacity.append(4.0)
            continue
        parents = [j for j in range(i) if capacity[j] >= 1.0]
        parent = int(rng.choice(parents))
        sym = _pick_element(rng)
        charge = 0
        # keep at least one open attachment point while atoms remain
        if len(parents) == 1 and len(symbols) + 1 < n:
            sym = "C"
        # occasional charged heteroatoms, kept valence-consistent
        if sym == "N" and rng.random() < 0.08:
            charge = 1
        elif sym == "O" and rng.random() < 0.08:
            charge = -1
        cap_new = table.max_valence(sym, charge)
        order_choices = [BOND_SINGLE]
        if capacity[parent] >= 2.0 and cap_new >= 2.0 and rng.random() < 0.2:
            order_choices = [BOND_DOUBLE]
            if capacity[parent] >= 3.0 and cap_new >= 3.0 and rng.random() < 0.15:
                order_choices = [BOND_TRIPLE]
        cls = order_choices[0]
        if cap_new < BOND_ORDER[cls]:
            sym, charge, cls = "C", 0, BOND_SINGLE
            cap_new = 4.0
        symbols.append(sym)
        charges.append(charge)
        bonds.append((parent, i, cls))
        capacity[parent] -= BOND_ORDER[cls]
        capacity.append(cap_new - BOND_ORDER[cls])

    coords = _embed(rng, symbols, bonds, ring_size)
    coords = np.round(coords - coords.mean(axis=0), 4)
    return new_molgraph(symbols, charges, coords, bonds, name=name)


def _embed(rng, symbols, bonds, ring_size) -> np.ndarray:
    n = len(symbols)
    coords = np.zeros((n, 3))
    lengths = [bond_length(symbols[i], symbols[j], cls) for i, j, cls in bonds]
    pairs = [(i, j) for i, j, _ in bonds]

    placed = [False] * n
    if ring_size:
        # regular polygon with the aromatic side length
        side = bond_length("C", "C", BOND_AROMATIC)
        radius = side / (2.0 * np.sin(np.pi / ring_size))
        for k in range(ring_size):
            ang = 2.0 * np.pi * k / ring_size
            coords[k] = [radius * np.cos(ang), radius * np.sin(ang), 0.0]
            placed[k] = True

    adj = {i: [] for i in range(n)}
    for (i, j), L in zip(pairs, lengths):
        adj[i].append((j, L))
        adj[j].append((i, L))

    for i in range(n):
        if placed[i]:
            continue
        anchor = next((j for j, _ in adj[i] if placed[j]), None)
        direction = rng.normal(size=3)
        direction /= max(np.linalg.norm(direction), 1e-9)
        if anchor is None:
            coords[i] = rng.normal(scale=0.5, size=3)
        else:
            L = next(L for j, L in adj[i] if j == anchor)
            coords[i] = coords[anchor] + L * direction
        placed[i] = True

    coords = _relax(coords, pairs, lengths)
    # enforce the hard separation floor with extra relaxation rounds
    for _ in range(20):
        diff = coords[:, None, :] - coords[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        np.fill_diagonal(dist, np.inf)
        if dist.min() >= _MIN_SEPARATION:
            break
        coords = _relax(coords, pairs, lengths, steps=100)
    return coords


def dataset_manifest(seed: int, count: int, size_range) -> str:
    return json.dumps({"seed": seed, "count": count, "size_range": list(size_range)}, indent=2)

"""Input validation helpers shared by the estimator-facing API."""

import numpy as np

from .errors import ShapeMismatch
from .molgraph import MolGraph


def check_molgraph(m, require_decoded=True) -> MolGraph:
    """Validate the structural invariants of a molecule; returns it unchanged."""
    if not isinstance(m, MolGraph):
        raise TypeError(f"expected MolGraph, got {type(m).__name__}")
    n = m.atom_types.shape[0]
    if n < 1:
        raise ShapeMismatch("molecule must contain at least one atom")
    if m.charges.shape[0] != n or m.coords.shape != (n, 3) \
            or m.bonds.shape[:2] != (n, n):
        raise ShapeMismatch("inconsistent array shapes across MolGraph fields")
    if not np.all(np.isfinite(m.coords)):
        raise ValueError("coordinates must be finite")
    for arr, what in ((m.atom_types, "atom_types"), (m.charges, "charges")):
        if not np.allclose(arr.sum(axis=-1), 1.0, atol=1e-6):
            raise ValueError(f"{what} rows must sum to 1")
        if require_decoded and not np.allclose(arr.max(axis=-1), 1.0, atol=1e-6):
            raise ValueError(f"{what} rows must be hard one-hots")
    cls = m.bond_class_matrix()
    if not np.array_equal(cls, cls.T):
        raise ValueError("bond matrix must be symmetric")
    return m


def check_molecule_list(mols):
    mols = list(mols)
    if not mols:
        raise ValueError("expected a nonempty molecule list")
    for m in mols:
        check_molgraph(m)
    return mols

"""Pharmacophore feature perception, sub-molecular graph extraction, and hypotheses.

Perception rules (deterministic, table-driven):
  HBD  nitrogen/oxygen with at least one implicit hydrogen
  HBA  nitrogen/oxygen with formal charge <= 0, except aromatic N with
       three in-ring bonds
  HYD  carbon whose bonded neighbors are all carbon
  ARO  the atoms of each aromatic ring system
  POS  formal charge +1
  NEG  formal charge -1
"""

from dataclasses import dataclass, field
from enum import IntEnum
import json

import numpy as np

from .elements import BOND_NONE, DEFAULT_TABLE
from .errors import EmptySelection, TooFewFeatures
from .molgraph import MolGraph, aromatic_systems


class FeatureType(IntEnum):
    NONE = 0
    HBA = 1
    HBD = 2
    ARO = 3
    HYD = 4
    POS = 5
    NEG = 6


N_FEATURES = len(FeatureType)

# when one atom belongs to several selected groups, its one-hot label follows
# this priority ordering
_LABEL_PRIORITY = [FeatureType.ARO, FeatureType.HBD, FeatureType.HBA,
                   FeatureType.POS, FeatureType.NEG, FeatureType.HYD]


@dataclass
class PharmacophoreGraph:
    """Sub-molecular conditioning graph over the masked atom subset."""

    mask_indices: np.ndarray      # sorted atom indices into the source molecule
    atom_types: np.ndarray        # (m, d)
    charges: np.ndarray           # (m, a)
    feature_labels: np.ndarray    # (m, e) one-hot, per masked atom
    coords: np.ndarray            # (m, 3)
    bonds: np.ndarray             # (m, m, b), edges within the mask only
    feature_groups: list = field(default_factory=list)  # (FeatureType, member atom indices)

    @property
    def size(self) -> int:
        return len(self.mask_indices)


@dataclass
class Hypothesis:
    """A set of typed feature points in 3D; 3 to 7 features."""

    features: list                # (FeatureType, np.ndarray position)
    source: PharmacophoreGraph = None

    @property
    def k(self) -> int:
        return len(self.features)


def empty_pharmacophore(d=None, a=None, b=5) -> PharmacophoreGraph:
    d = d if d is not None else DEFAULT_TABLE.n_elements
    a = a if a is not None else DEFAULT_TABLE.n_charges
    return PharmacophoreGraph(
        mask_indices=np.zeros(0, dtype=int),
        atom_types=np.zeros((0, d)),
        charges=np.zeros((0, a)),
        feature_labels=np.zeros((0, N_FEATURES)),
        coords=np.zeros((0, 3)),
        bonds=np.zeros((0, 0, b)),
        feature_groups=[],
    )


def perceive_features(m: MolGraph, table=DEFAULT_TABLE) -> list:
    """Deterministic feature perception; returns (FeatureType, member indices) groups."""
    groups = []
    ring_systems = aromatic_systems(m)
    ring_atoms = {i for ring in ring_systems for i in ring}
    cls = m.bond_class_matrix()

    for ring in ring_systems:
        groups.append((FeatureType.ARO, list(ring)))

    for i in range(m.n):
        sym = m.symbol(i, table)
        charge = m.charge(i, table)
        if sym in ("N", "O"):
            if m.implicit_hydrogens(i, table) >= 1:
                groups.append((FeatureType.HBD, [i]))
            aromatic_n_buried = (
                sym == "N" and i in ring_atoms
                and sum(1 for j in range(m.n)
                        if j != i and cls[i, j] != BOND_NONE and j in ring_atoms) >= 3
            )
            if charge <= 0 and not aromatic_n_buried:
                groups.append((FeatureType.HBA, [i]))
        if sym == "C":
            nbrs = m.neighbors(i)
            if nbrs and all(m.symbol(j, table) == "C" for j in nbrs):
                groups.append((FeatureType.HYD, [i]))
        if charge == 1:
            groups.append((FeatureType.POS, [i]))
        elif charge == -1:
            groups.append((FeatureType.NEG, [i]))
    return groups


def extract_pharmacophore(m: MolGraph, selection, groups=None) -> PharmacophoreGraph:
    """Build the conditioning graph from selected perceived-feature groups."""
    if groups is None:
        groups = perceive_features(m)
    selection = list(selection)
    if not selection:
        raise EmptySelection("no feature groups selected")
    chosen = [groups[s] for s in selection]
    mask = np.array(sorted({i for _, members in chosen for i in members}), dtype=int)
    local = {atom: k for k, atom in enumerate(mask)}

    labels = np.zeros((len(mask), N_FEATURES))
    for atom in mask:
        types = [ftype for ftype, members in chosen if atom in members]
        label = next(t for t in _LABEL_PRIORITY if t in types)
        labels[local[atom], label] = 1.0

    return PharmacophoreGraph(
        mask_indices=mask,
        atom_types=m.atom_types[mask].copy(),
        charges=m.charges[mask].copy(),
        feature_labels=labels,
        coords=m.coords[mask].copy(),
        bonds=m.bonds[np.ix_(mask, mask)].copy(),
        feature_groups=[(ftype, list(members)) for ftype, members in chosen],
    )


def feature_label_matrix(n: int, gp: PharmacophoreGraph) -> np.ndarray:
    """Per-atom feature one-hots over the whole molecule; NONE off the mask."""
    labels = np.zeros((n, N_FEATURES))
    labels[:, FeatureType.NONE] = 1.0
    for k, atom in enumerate(gp.mask_indices):
        labels[atom] = gp.feature_labels[k]
    return labels


def hypothesis_from_groups(m: MolGraph, chosen, source=None) -> Hypothesis:
    features = [(ftype, m.coords[members].mean(axis=0)) for ftype, members in chosen]
    return Hypothesis(features=features, source=source)


def sample_hypothesis(m: MolGraph, seed: int, groups=None):
    """Pick a random 3..7-feature subset; returns (Hypothesis, PharmacophoreGraph)."""
    if groups is None:
        groups = perceive_features(m)
    if len(groups) < 3:
        raise TooFewFeatures(f"{len(groups)} perceived groups, need at least 3")
    rng = np.random.default_rng(seed)
    k = int(rng.integers(3, min(7, len(groups)) + 1))
    sel = sorted(rng.choice(len(groups), size=k, replace=False).tolist())
    gp = extract_pharmacophore(m, sel, groups=groups)
    hyp = hypothesis_from_groups(m, [groups[s] for s in sel], source=gp)
    return hyp, gp


# --- JSON interfaces (schemas under schemas/ in the repository) ---

def hypothesis_to_json(h: Hypothesis, tol: float = 1.0) -> str:
    return json.dumps({
        "features": [{"type": FeatureType(t).name, "pos": [float(v) for v in p]}
                     for t, p in h.features],
        "tol": tol,
    }, indent=2)

def hypothesis_from_json(text: str):
    doc = json.loads(text)
    features = [(FeatureType[f["type"]], np.asarray(f["pos"], dtype=float))
                for f in doc["features"]]
    return Hypothesis(features=features), float(doc.get("tol", 1.0))


def pharmacophore_to_json(gp: PharmacophoreGraph, table=DEFAULT_TABLE) -> str:
    atoms = []
    for k in range(gp.size):
        atoms.append({
            "index": int(gp.mask_indices[k]),
            "symbol": table.symbol(int(np.argmax(gp.atom_types[k]))),
            "charge": table.charge(int(np.argmax(gp.charges[k]))),
            "feature": FeatureType(int(np.argmax(gp.feature_labels[k]))).name,
            "pos": [float(v) for v in gp.coords[k]],
        })
    cls = np.argmax(gp.bonds, axis=-1) if gp.size else np.zeros((0, 0), dtype=int)
    bonds = [{"a": int(gp.mask_indices[i]), "b": int(gp.mask_indices[j]),
              "class": int(cls[i, j])}
             for i in range(gp.size) for j in range(i + 1, gp.size)
             if cls[i, j] != BOND_NONE]
    groups = [{"type": FeatureType(t).name, "members": [int(i) for i in members]}
              for t, members in gp.feature_groups]
    return json.dumps({"mask_indices": [int(i) for i in gp.mask_indices],
                       "atoms": atoms, "bonds": bonds, "feature_groups": groups}, indent=2)


def pharmacophore_from_json(text: str, table=DEFAULT_TABLE) -> PharmacophoreGraph:
    doc = json.loads(text)
    mask = np.asarray(doc["mask_indices"], dtype=int)
    m = len(mask)
    local = {int(atom): k for k, atom in enumerate(mask)}
    x = np.zeros((m, table.n_elements))
    c = np.zeros((m, table.n_charges))
    labels = np.zeros((m, N_FEATURES))
    coords = np.zeros((m, 3))
    from .elements import N_BONDS
    bonds = np.zeros((m, m, N_BONDS))
    bonds[:, :, BOND_NONE] = 1.0
    for rec in doc["atoms"]:
        k = local[int(rec["index"])]
        x[k, table.index(rec["symbol"])] = 1.0
        c[k, table.charge_index(int(rec["charge"]))] = 1.0
        labels[k, FeatureType[rec["feature"]]] = 1.0
        coords[k] = rec["pos"]
    for rec in doc.get("bonds", []):
        i, j = local[int(rec["a"])], local[int(rec["b"])]
        cls = int(rec["class"])
        bonds[i, j] = 0.0
        bonds[j, i] = 0.0
        bonds[i, j, cls] = 1.0
        bonds[j, i, cls] = 1.0
    groups = [(FeatureType[g["type"]], list(g["members"]))
              for g in doc.get("feature_groups", [])]
    return PharmacophoreGraph(mask, x, c, labels, coords, bonds, groups)

"""Molecular graph data model plus validity, identity, and fingerprint utilities."""

from dataclasses import dataclass
import hashlib

import numpy as np

from .elements import (
    BOND_AROMATIC,
    BOND_NONE,
    BOND_ORDER,
    DEFAULT_TABLE,
    HYDROGEN_MASS,
    N_BONDS,
    ElementTable,
)

FINGERPRINT_BITS = 2048
FINGERPRINT_RADIUS = 2


@dataclass
class MolGraph:
    """A molecule: one-hot atom types X, charges C, coordinates R, bonds E.

    Bond tensor is symmetric with class 0 ("no bond") on the diagonal.
    """

    atom_types: np.ndarray   # (n, d) one-hot
    charges: np.ndarray      # (n, a) one-hot
    coords: np.ndarray       # (n, 3) angstroms
    bonds: np.ndarray        # (n, n, b) one-hot
    name: str = ""

    @property
    def n(self) -> int:
        return self.atom_types.shape[0]

    def atom_class(self, i: int) -> int:
        return int(np.argmax(self.atom_types[i]))

    def symbol(self, i: int, table: ElementTable = DEFAULT_TABLE) -> str:
        return table.symbol(self.atom_class(i))

    def charge(self, i: int, table: ElementTable = DEFAULT_TABLE) -> int:
        return table.charge(int(np.argmax(self.charges[i])))

    def bond_class(self, i: int, j: int) -> int:
        return int(np.argmax(self.bonds[i, j]))

    def bond_class_matrix(self) -> np.ndarray:
        return np.argmax(self.bonds, axis=-1)

    def neighbors(self, i: int) -> list:
        cls = self.bond_class_matrix()[i]
        return [j for j in range(self.n) if j != i and cls[j] != BOND_NONE]

    def bond_order_sum(self, i: int) -> float:
        cls = self.bond_class_matrix()[i]
        return float(sum(BOND_ORDER[c] for j, c in enumerate(cls) if j != i))

    def implicit_hydrogens(self, i: int, table: ElementTable = DEFAULT_TABLE) -> int:
        deficit = table.default_valence(self.symbol(i, table), self.charge(i, table)) - self.bond_order_sum(i)
        return max(0, int(round(deficit)))

    def permuted(self, perm: np.ndarray) -> "MolGraph":
        """Relabel atoms so new index k holds old atom perm[k]."""
        perm = np.asarray(perm)
        return MolGraph(
            atom_types=self.atom_types[perm].copy(),
            charges=self.charges[perm].copy(),
            coords=self.coords[perm].copy(),
            bonds=self.bonds[perm][:, perm].copy(),
            name=self.name,
        )

    def copy(self) -> "MolGraph":
        return MolGraph(self.atom_types.copy(), self.charges.copy(),
                        self.coords.copy(), self.bonds.copy(), self.name)


@dataclass
class NoisyGraph:
    """Diffusion latent: categorical rows are soft distributions, coords zero-CoM."""

    atom_types: np.ndarray
    charges: np.ndarray
    coords: np.ndarray
    bonds: np.ndarray
    t: int = 0

    @property
    def n(self) -> int:
        return self.atom_types.shape[0]

    def copy(self) -> "NoisyGraph":
        return NoisyGraph(self.atom_types.copy(), self.charges.copy(),
                          self.coords.copy(), self.bonds.copy(), self.t)

    def decode(self, name: str = "") -> MolGraph:
        """Argmax decode to hard one-hots; bonds decoded on the upper triangle."""
        n = self.n
        x = np.eye(self.atom_types.shape[1])[np.argmax(self.atom_types, axis=-1)]
        c = np.eye(self.charges.shape[1])[np.argmax(self.charges, axis=-1)]
        cls = np.argmax(self.bonds, axis=-1)
        cls = np.triu(cls, k=1)
        cls = cls + cls.T
        e = np.eye(self.bonds.shape[-1])[cls]
        return MolGraph(x, c, self.coords.copy(), e, name=name)


def new_molgraph(symbols, charges, coords, bond_list, name="",
                 table: ElementTable = DEFAULT_TABLE) -> MolGraph:
    """Convenience constructor from symbols, integer charges, and (i, j, class) bonds."""
    n = len(symbols)
    x = np.zeros((n, table.n_elements))
    c = np.zeros((n, table.n_charges))
    e = np.zeros((n, n, N_BONDS))
    for i, sym in enumerate(symbols):
        x[i, table.index(sym)] = 1.0
        c[i, table.charge_index(charges[i])] = 1.0
    e[:, :, BOND_NONE] = 1.0
    for i, j, cls in bond_list:
        e[i, j] = 0.0
        e[j, i] = 0.0
        e[i, j, cls] = 1.0
        e[j, i, cls] = 1.0
    return MolGraph(x, c, np.asarray(coords, dtype=float).reshape(n, 3), e, name=name)


def check_validity(m: MolGraph, table: ElementTable = DEFAULT_TABLE) -> bool:
    """Valence-rule check: per-atom bond-order sum within the charge-adjusted maximum."""
    cls = m.bond_class_matrix()
    if not np.array_equal(cls, cls.T):
        return False
    if np.any(np.diagonal(cls) != BOND_NONE):
        return False
    for i in range(m.n):
        if m.bond_order_sum(i) > table.max_valence(m.symbol(i, table), m.charge(i, table)) + 1e-9:
            return False
    return True


def connected_components(m: MolGraph) -> list:
    """Connected components (as sorted index lists) of the bond graph."""
    cls = m.bond_class_matrix()
    seen = [False] * m.n
    comps = []
    for start in range(m.n):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in range(m.n):
                if j != i and cls[i, j] != BOND_NONE and not seen[j]:
                    seen[j] = True
                    stack.append(j)
        comps.append(sorted(comp))
    return comps


def aromatic_systems(m: MolGraph) -> list:
    """Connected components of the aromatic-bond subgraph that contain a cycle.

    Each system is returned as a sorted atom index list; used for ARO
    perception and ring statistics.
    """
    cls = m.bond_class_matrix()
    arom = cls == BOND_AROMATIC
    seen = [False] * m.n
    systems = []
    for start in range(m.n):
        if seen[start] or not arom[start].any():
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in range(m.n):
                if arom[i, j] and not seen[j]:
                    seen[j] = True
                    stack.append(j)
        n_edges = sum(arom[i, j] for i in comp for j in comp if i < j)
        if n_edges >= len(comp):  # cycle rank >= 1
            systems.append(sorted(comp))
    return systems


def _wl_labels(m: MolGraph, rounds: int) -> list:
    """Iterated neighborhood-hash (1-WL) labels; one label list per round."""
    cls = m.bond_class_matrix()
    labels = [hash((m.atom_class(i), int(np.argmax(m.charges[i])))) & 0xFFFFFFFFFFFFFFFF
              for i in range(m.n)]
    out = [list(labels)]
    for _ in range(rounds):
        nxt = []
        for i in range(m.n):
            env = sorted((int(cls[i, j]), labels[j])
                         for j in range(m.n) if j != i and cls[i, j] != BOND_NONE)
            nxt.append(hash((labels[i], tuple(env))) & 0xFFFFFFFFFFFFFFFF)
        labels = nxt
        out.append(list(labels))
    return out


def canonical_hash(m: MolGraph) -> int:
    """Permutation-invariant 64-bit structural digest (coordinates excluded).

    1-WL refinement run to a fixpoint-depth bound (n rounds), then a digest
    over the sorted label multiset and the sorted typed edge list. Known
    caveat: 1-WL-indistinguishable non-isomorphic graphs collide.
    """
    labels = _wl_labels(m, m.n)[-1]
    cls = m.bond_class_matrix()
    edges = sorted((min(labels[i], labels[j]), max(labels[i], labels[j]), int(cls[i, j]))
                   for i in range(m.n) for j in range(i + 1, m.n) if cls[i, j] != BOND_NONE)
    h = hashlib.blake2b(digest_size=8)
    h.update(repr((sorted(labels), edges)).encode())
    return int.from_bytes(h.digest(), "little")


def fingerprint(m: MolGraph, bits: int = FINGERPRINT_BITS,
                radius: int = FINGERPRINT_RADIUS) -> np.ndarray:
    """Circular-neighborhood fingerprint: WL labels of radius 0..radius folded to bits."""
    fp = np.zeros(bits, dtype=bool)
    for layer in _wl_labels(m, radius):
        for label in layer:
            fp[label % bits] = True
    return fp


def tanimoto(a: np.ndarray, b: np.ndarray) -> float:
    inter = int(np.sum(a & b))
    union = int(np.sum(a | b))
    return 1.0 if union == 0 else inter / union


def is_isomorphic_bruteforce(a: MolGraph, b: MolGraph) -> bool:
    """Exhaustive labeled-graph isomorphism with pruning; intended for n <= 8."""
    if a.n != b.n:
        return False

    def key(m, i):
        return (m.atom_class(i), int(np.argmax(m.charges[i])))

    if sorted(key(a, i) for i in range(a.n)) != sorted(key(b, i) for i in range(b.n)):
        return False
    ca, cb = a.bond_class_matrix(), b.bond_class_matrix()

    def extend(mapping, used):
        i = len(mapping)
        if i == a.n:
            return True
        for j in range(b.n):
            if j in used or key(a, i) != key(b, j):
                continue
            if all(ca[i, k] == cb[j, mapping[k]] for k in range(i)):
                mapping.append(j)
                used.add(j)
                if extend(mapping, used):
                    return True
                mapping.pop()
                used.remove(j)
        return False

    return extend([], set())


def molecular_weight(m: MolGraph, table: ElementTable = DEFAULT_TABLE) -> float:
    """Heavy-atom masses plus implicit hydrogens from valence deficit."""
    total = 0.0
    for i in range(m.n):
        total += table.mass(m.symbol(i, table))
        total += HYDROGEN_MASS * m.implicit_hydrogens(i, table)
    return total


def ring_count(m: MolGraph) -> int:
    """Cycle rank: edges - atoms + connected components."""
    cls = m.bond_class_matrix()
    n_edges = int(np.sum(np.triu(cls, k=1) != BOND_NONE))
    return n_edges - m.n + len(connected_components(m))

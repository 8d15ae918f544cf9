"""Element vocabulary, valence rules, and bond geometry constants.

Heavy-atom model: hydrogens are implicit and inferred from valence
deficits where needed (molecular weight, donor perception).
"""

from dataclasses import dataclass

SYMBOLS = ["C", "N", "O", "F", "S", "Cl", "Br", "P"]
N_ELEMENTS = len(SYMBOLS)

CHARGES = [-1, 0, 1]
N_CHARGES = len(CHARGES)
CHARGE_ZERO = CHARGES.index(0)

# bond classes: index 0 is "no bond"
BOND_NONE, BOND_SINGLE, BOND_DOUBLE, BOND_TRIPLE, BOND_AROMATIC = range(5)
N_BONDS = 5
BOND_ORDER = [0.0, 1.0, 2.0, 3.0, 1.5]

ATOMIC_MASS = {
    "C": 12.011, "N": 14.007, "O": 15.999, "F": 18.998,
    "S": 32.06, "Cl": 35.45, "Br": 79.904, "P": 30.974,
}
HYDROGEN_MASS = 1.008

# maximum allowed bond-order sum, keyed by formal charge
_MAX_VALENCE = {
    "C": {-1: 3, 0: 4, 1: 3},
    "N": {-1: 2, 0: 3, 1: 4},
    "O": {-1: 1, 0: 2, 1: 3},
    "F": {-1: 0, 0: 1, 1: 2},
    "S": {-1: 1, 0: 6, 1: 5},
    "Cl": {-1: 0, 0: 1, 1: 2},
    "Br": {-1: 0, 0: 1, 1: 2},
    "P": {-1: 2, 0: 5, 1: 4},
}

# typical valence used to infer implicit hydrogens
_DEFAULT_VALENCE = {
    "C": {-1: 3, 0: 4, 1: 3},
    "N": {-1: 2, 0: 3, 1: 4},
    "O": {-1: 1, 0: 2, 1: 3},
    "F": {-1: 0, 0: 1, 1: 0},
    "S": {-1: 1, 0: 2, 1: 3},
    "Cl": {-1: 0, 0: 1, 1: 0},
    "Br": {-1: 0, 0: 1, 1: 0},
    "P": {-1: 2, 0: 3, 1: 4},
}

# equilibrium bond lengths in angstroms, by (pair of symbols, bond class)
_BOND_LENGTH = {
    frozenset(["C"]): {BOND_SINGLE: 1.54, BOND_DOUBLE: 1.34, BOND_TRIPLE: 1.20, BOND_AROMATIC: 1.39},
    frozenset(["C", "N"]): {BOND_SINGLE: 1.47, BOND_DOUBLE: 1.29, BOND_TRIPLE: 1.16, BOND_AROMATIC: 1.34},
    frozenset(["C", "O"]): {BOND_SINGLE: 1.43, BOND_DOUBLE: 1.21, BOND_AROMATIC: 1.36},
    frozenset(["C", "F"]): {BOND_SINGLE: 1.35},
    frozenset(["C", "S"]): {BOND_SINGLE: 1.82, BOND_DOUBLE: 1.60},
    frozenset(["C", "Cl"]): {BOND_SINGLE: 1.77},
    frozenset(["C", "Br"]): {BOND_SINGLE: 1.94},
    frozenset(["C", "P"]): {BOND_SINGLE: 1.84},
    frozenset(["N"]): {BOND_SINGLE: 1.45, BOND_DOUBLE: 1.25, BOND_AROMATIC: 1.35},
    frozenset(["N", "O"]): {BOND_SINGLE: 1.40, BOND_DOUBLE: 1.21},
    frozenset(["O"]): {BOND_SINGLE: 1.48},
}
_FALLBACK_LENGTH = 1.6


@dataclass(frozen=True)
class ElementTable:
    """Dense element/charge vocabulary with valence lookups."""

    symbols: tuple = tuple(SYMBOLS)
    charges: tuple = tuple(CHARGES)

    @property
    def n_elements(self) -> int:
        return len(self.symbols)

    @property
    def n_charges(self) -> int:
        return len(self.charges)

    def index(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise KeyError(symbol) from None

    def symbol(self, idx: int) -> str:
        return self.symbols[idx]

    def charge_index(self, charge: int) -> int:
        try:
            return self.charges.index(charge)
        except ValueError:
            raise KeyError(charge) from None

    def charge(self, idx: int) -> int:
        return self.charges[idx]

    def max_valence(self, symbol: str, charge: int = 0) -> float:
        return _MAX_VALENCE[symbol][charge]

    def default_valence(self, symbol: str, charge: int = 0) -> float:
        return _DEFAULT_VALENCE[symbol][charge]

    def mass(self, symbol: str) -> float:
        return ATOMIC_MASS[symbol]


DEFAULT_TABLE = ElementTable()


def bond_length(sym_a: str, sym_b: str, bond_class: int) -> float:
    """Equilibrium length for a bond; falls back to a generic value."""
    pair = _BOND_LENGTH.get(frozenset([sym_a, sym_b]), {})
    return pair.get(bond_class, _FALLBACK_LENGTH)

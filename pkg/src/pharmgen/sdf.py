"""SDF / molfile (V2000) reading and writing.

Heavy-atom records only; formal charges come from M CHG property lines.
Bond types 1-3 map to single/double/triple and 4 to aromatic.
"""

import numpy as np

from .elements import (
    BOND_AROMATIC, BOND_DOUBLE, BOND_NONE, BOND_SINGLE, BOND_TRIPLE,
    DEFAULT_TABLE, N_BONDS, ElementTable,
)
from .errors import MalformedRecord, UnknownBondOrder, UnknownElement
from .molgraph import MolGraph

_BOND_TYPE_TO_CLASS = {1: BOND_SINGLE, 2: BOND_DOUBLE, 3: BOND_TRIPLE, 4: BOND_AROMATIC}
_CLASS_TO_BOND_TYPE = {v: k for k, v in _BOND_TYPE_TO_CLASS.items()}


def _parse_record(lines, record_idx, line_offset, table):
    if len(lines) < 4:
        raise MalformedRecord(record_idx, line_offset + len(lines), "truncated header")
    name = lines[0].strip()
    counts_line_no = line_offset + 4
    counts = lines[3]
    try:
        n_atoms = int(counts[0:3])
        n_bonds = int(counts[3:6])
    except (ValueError, IndexError):
        raise MalformedRecord(record_idx, counts_line_no, f"bad counts line {counts!r}") from None

    atom_start = 4
    bond_start = atom_start + n_atoms
    if len(lines) < bond_start + n_bonds:
        raise MalformedRecord(record_idx, line_offset + len(lines),
                              f"counts line declares {n_atoms} atoms / {n_bonds} bonds "
                              "but the block is shorter")

    coords = np.zeros((n_atoms, 3))
    classes = []
    for i in range(n_atoms):
        line = lines[atom_start + i]
        line_no = line_offset + atom_start + i + 1
        try:
            coords[i] = [float(line[0:10]), float(line[10:20]), float(line[20:30])]
            symbol = line[31:34].strip()
        except (ValueError, IndexError):
            raise MalformedRecord(record_idx, line_no, f"bad atom line {line!r}") from None
        if not symbol:
            raise MalformedRecord(record_idx, line_no, "missing element symbol")
        try:
            classes.append(table.index(symbol))
        except KeyError:
            raise UnknownElement(record_idx, line_no, symbol) from None

    bonds = np.zeros((n_atoms, n_atoms, N_BONDS))
    bonds[:, :, BOND_NONE] = 1.0
    for k in range(n_bonds):
        line = lines[bond_start + k]
        line_no = line_offset + bond_start + k + 1
        try:
            a = int(line[0:3]) - 1
            b = int(line[3:6]) - 1
            btype = int(line[6:9])
        except (ValueError, IndexError):
            raise MalformedRecord(record_idx, line_no, f"bad bond line {line!r}") from None
        if not (0 <= a < n_atoms and 0 <= b < n_atoms) or a == b:
            raise MalformedRecord(record_idx, line_no, f"bond references atoms {a + 1}, {b + 1}")
        if btype not in _BOND_TYPE_TO_CLASS:
            raise UnknownBondOrder(record_idx, line_no, btype)
        cls = _BOND_TYPE_TO_CLASS[btype]
        bonds[a, b] = 0.0
        bonds[b, a] = 0.0
        bonds[a, b, cls] = 1.0
        bonds[b, a, cls] = 1.0

    charges = {}
    for off, line in enumerate(lines[bond_start + n_bonds:]):
        line_no = line_offset + bond_start + n_bonds + off + 1
        if line.startswith("M  END"):
            break
        if line.startswith("M  CHG"):
            fields = line.split()
            try:
                count = int(fields[2])
                pairs = fields[3:3 + 2 * count]
                for p in range(count):
                    charges[int(pairs[2 * p]) - 1] = int(pairs[2 * p + 1])
            except (ValueError, IndexError):
                raise MalformedRecord(record_idx, line_no, f"bad M CHG line {line!r}") from None

    x = np.eye(table.n_elements)[classes] if n_atoms else np.zeros((0, table.n_elements))
    c = np.zeros((n_atoms, table.n_charges))
    for i in range(n_atoms):
        charge = charges.get(i, 0)
        try:
            c[i, table.charge_index(charge)] = 1.0
        except KeyError:
            raise MalformedRecord(record_idx, counts_line_no,
                                  f"unsupported formal charge {charge} on atom {i + 1}") from None
    return MolGraph(x, c, coords, bonds, name=name)


def parse_sdf(data, table: ElementTable = DEFAULT_TABLE) -> list:
    """Parse a multi-record V2000 SDF byte stream (or text) into MolGraphs."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    lines = data.replace("\r\n", "\n").replace("\r", "\n").split("\n")

    records = []
    current, offset = [], 0
    mols = []
    for idx, line in enumerate(lines):
        if line.strip() == "$$$$":
            records.append((current, offset))
            current, offset = [], idx + 1
        else:
            current.append(line)
    if any(l.strip() for l in current):
        records.append((current, offset))

    for rec_idx, (rec_lines, line_offset) in enumerate(records):
        mols.append(_parse_record(rec_lines, rec_idx, line_offset, table))
    return mols


def serialize_sdf(mols, table: ElementTable = DEFAULT_TABLE) -> bytes:
    """Serialize MolGraphs to a multi-record V2000 SDF byte stream."""
    if isinstance(mols, MolGraph):
        mols = [mols]
    chunks = []
    for m in mols:
        cls = m.bond_class_matrix()
        bond_rows = [(i, j, cls[i, j]) for i in range(m.n)
                     for j in range(i + 1, m.n) if cls[i, j] != BOND_NONE]
        lines = [m.name, "  pharmgen", ""]
        lines.append(f"{m.n:3d}{len(bond_rows):3d}  0  0  0  0  0  0  0  0999 V2000")
        for i in range(m.n):
            x, y, z = m.coords[i]
            lines.append(f"{x:10.4f}{y:10.4f}{z:10.4f} {m.symbol(i, table):<3s}"
                         " 0  0  0  0  0  0  0  0  0  0  0  0")
        for i, j, c in bond_rows:
            lines.append(f"{i + 1:3d}{j + 1:3d}{_CLASS_TO_BOND_TYPE[int(c)]:3d}  0  0  0  0")
        charged = [(i, m.charge(i, table)) for i in range(m.n) if m.charge(i, table) != 0]
        for start in range(0, len(charged), 8):
            block = charged[start:start + 8]
            entries = "".join(f" {i + 1:3d} {q:3d}" for i, q in block)
            lines.append(f"M  CHG{len(block):3d}{entries}")
        lines.append("M  END")
        lines.append("$$$$")
        chunks.append("\n".join(lines))
    return ("\n".join(chunks) + "\n").encode("utf-8")

"""Generation metrics over molecule sets."""

import numpy as np

from .errors import EmptyInput, TooFewMolecules
from .molgraph import (
    MolGraph, canonical_hash, check_validity, fingerprint, molecular_weight,
    ring_count, tanimoto,
)


def validity_rate(samples) -> float:
    samples = list(samples)
    if not samples:
        raise EmptyInput("no samples")
    return sum(1 for m in samples if check_validity(m)) / len(samples)


def uniqueness_rate(samples) -> float:
    """Distinct canonical hashes among the valid molecules, over valid count."""
    valid = [m for m in samples if check_validity(m)]
    if not valid:
        raise EmptyInput("no valid samples")
    return len({canonical_hash(m) for m in valid}) / len(valid)


def novelty_rate(samples, train_hashes) -> float:
    """Unique valid hashes absent from the training index, over unique count."""
    valid = [m for m in samples if check_validity(m)]
    if not valid:
        raise EmptyInput("no valid samples")
    unique = {canonical_hash(m) for m in valid}
    train_hashes = set(train_hashes)
    return len(unique - train_hashes) / len(unique)


def diversity(samples) -> float:
    """1 - mean pairwise Tanimoto similarity over valid molecules."""
    valid = [m for m in samples if check_validity(m)]
    if len(valid) < 2:
        raise TooFewMolecules(f"{len(valid)} valid molecules, need at least 2")
    fps = [fingerprint(m) for m in valid]
    sims = [tanimoto(fps[i], fps[j])
            for i in range(len(fps)) for j in range(i + 1, len(fps))]
    return 1.0 - float(np.mean(sims))


def physchem(m: MolGraph) -> dict:
    return {"mw": molecular_weight(m), "ring_count": ring_count(m)}


def summarize(values):
    """Mean and standard error (sample stddev / sqrt(n)); single value -> SE 0."""
    values = np.asarray(list(values), dtype=float)
    if values.size == 0:
        raise EmptyInput("no values")
    if values.size == 1:
        return float(values[0]), 0.0
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))

"""Euclidean pharmacophore match scoring.

The score is the best type-respecting (partial, injective) assignment of
hypothesis features onto perceived molecule features, counting hypothesis
feature pairs whose distance is reproduced within a tolerance. The search
is exhaustive with a sound branch-and-bound prune.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateHypothesis, EmptyInput
from .molgraph import MolGraph
from .pharmacophore import Hypothesis, perceive_features

DEFAULT_TOLERANCE = 1.0  # angstroms


@dataclass
class MatchResult:
    matched_pairs: int
    total_pairs: int
    mapping: list          # hypothesis index -> molecule feature index or None
    molecule_features: list

    @property
    def ms(self) -> float:
        return self.matched_pairs / self.total_pairs

    @property
    def perfect(self) -> bool:
        return self.matched_pairs == self.total_pairs


def molecule_feature_points(m: MolGraph, groups=None) -> list:
    """Perceived features reduced to (type, centroid) points."""
    if groups is None:
        groups = perceive_features(m)
    return [(ftype, m.coords[members].mean(axis=0)) for ftype, members in groups]


def match_score(m: MolGraph, h: Hypothesis, tol: float = DEFAULT_TOLERANCE,
                mol_features=None) -> MatchResult:
    """Best-assignment match score of a molecule against a hypothesis."""
    k = h.k
    if k < 2:
        raise DegenerateHypothesis(f"hypothesis has {k} feature(s), need at least 2")
    if mol_features is None:
        mol_features = molecule_feature_points(m)

    hyp_pos = np.stack([p for _, p in h.features])
    hyp_dist = np.linalg.norm(hyp_pos[:, None, :] - hyp_pos[None, :, :], axis=-1)
    candidates = [[ci for ci, (ftype, _) in enumerate(mol_features) if ftype == h.features[i][0]]
                  for i in range(k)]
    mol_pos = (np.stack([p for _, p in mol_features])
               if mol_features else np.zeros((0, 3)))

    # search order: scarce feature types first tightens the bound early
    order = sorted(range(k), key=lambda i: len(candidates[i]))
    total_pairs = k * (k - 1) // 2

    best = {"score": -1, "assign": None}
    assign = [None] * k

    def matched_with_prefix(depth, cand):
        i = order[depth]
        hits = 0
        for prev in range(depth):
            j = order[prev]
            if assign[j] is None:
                continue
            d_mol = np.linalg.norm(mol_pos[cand] - mol_pos[assign[j]])
            if abs(d_mol - hyp_dist[i, j]) <= tol:
                hits += 1
        return hits

    def recurse(depth, score, used):
        undecided = total_pairs - depth * (depth - 1) // 2
        if score + undecided <= best["score"]:
            return
        if depth == k:
            if score > best["score"]:
                best["score"] = score
                best["assign"] = list(assign)
            return
        i = order[depth]
        for cand in candidates[i]:
            if cand in used:
                continue
            assign[i] = cand
            used.add(cand)
            recurse(depth + 1, score + matched_with_prefix(depth, cand), used)
            used.remove(cand)
        assign[i] = None
        recurse(depth + 1, score, used)

    recurse(0, 0, set())
    return MatchResult(matched_pairs=best["score"], total_pairs=total_pairs,
                       mapping=best["assign"], molecule_features=mol_features)


def pmr(scores) -> float:
    """Fraction of scores equal to exactly 1 (scores are ratios of small integers)."""
    scores = list(scores)
    if not scores:
        raise EmptyInput("no scores")
    return sum(1 for s in scores if s == 1.0) / len(scores)


def ms_at_least(scores, threshold: float) -> float:
    scores = list(scores)
    if not scores:
        raise EmptyInput("no scores")
    return sum(1 for s in scores if s >= threshold) / len(scores)

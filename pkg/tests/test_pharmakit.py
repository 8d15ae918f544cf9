"""Tests for pharmacophore feature perception, extraction and hypothesis sampling."""
import json

import numpy as np
import pytest

from pharmgen.elements import BOND_SINGLE
from pharmgen.errors import EmptySelection, TooFewFeatures
from pharmgen.molgraph import new_molgraph
from pharmgen.pharmacophore import (
    FeatureType,
    N_FEATURES,
    empty_pharmacophore,
    extract_pharmacophore,
    feature_label_matrix,
    hypothesis_from_groups,
    hypothesis_from_json,
    hypothesis_to_json,
    perceive_features,
    pharmacophore_from_json,
    pharmacophore_to_json,
    sample_hypothesis,
)

from conftest import benzene, ethanol_like, methane_like, toluene_like


def _groups_of_type(groups, ftype):
    return [g for g in groups if g[0] == ftype]


def test_benzene_has_single_aromatic_group_of_six():
    groups = perceive_features(benzene())
    aro = _groups_of_type(groups, FeatureType.ARO)
    assert len(aro) == 1
    assert sorted(aro[0][1]) == [0, 1, 2, 3, 4, 5]


def test_ethanol_oxygen_is_donor_and_acceptor():
    m = ethanol_like()  # C-C-O, the O carries an implicit hydrogen
    groups = perceive_features(m)
    donors = _groups_of_type(groups, FeatureType.HBD)
    acceptors = _groups_of_type(groups, FeatureType.HBA)
    assert any(g[1] == [2] for g in donors)
    assert any(g[1] == [2] for g in acceptors)


def test_all_carbon_chain_is_hydrophobic():
    m = new_molgraph(
        ["C", "C"], [0, 0],
        [[0.0, 0.0, 0.0], [1.54, 0.0, 0.0]],
        [(0, 1, BOND_SINGLE)],
    )
    groups = perceive_features(m)
    hyd = _groups_of_type(groups, FeatureType.HYD)
    assert sorted(g[1][0] for g in hyd) == [0, 1]


def test_charged_atoms_get_ionic_features():
    m = new_molgraph(
        ["N", "C", "O"],
        [1, 0, -1],
        [[0.0, 0.0, 0.0], [1.5, 0.0, 0.0], [3.0, 0.0, 0.0]],
        [(0, 1, BOND_SINGLE), (1, 2, BOND_SINGLE)],
    )
    groups = perceive_features(m)
    assert any(g[0] == FeatureType.POS and g[1] == [0] for g in groups)
    assert any(g[0] == FeatureType.NEG and g[1] == [2] for g in groups)


def test_feature_label_matrix_one_feature_per_atom():
    m = benzene()
    groups = perceive_features(m)
    gp = extract_pharmacophore(m, range(len(groups)), groups=groups)
    F = feature_label_matrix(m.n, gp)
    assert F.shape == (m.n, N_FEATURES)
    assert np.all(F.sum(axis=1) == 1)  # exactly one label (possibly NONE) per atom
    # aromatic outranks hydrophobic in the label priority
    assert np.all(F[:, FeatureType.ARO] == 1)


def test_extract_pharmacophore_masks_and_coords():
    m = ethanol_like()
    groups = perceive_features(m)
    gp = extract_pharmacophore(m, range(len(groups)), groups=groups)
    atoms = sorted({i for _, members in groups for i in members})
    assert list(gp.mask_indices) == atoms
    assert gp.size == len(atoms)
    assert np.allclose(gp.coords, m.coords[atoms])
    assert np.array_equal(gp.atom_types, m.atom_types[atoms])
    assert np.array_equal(gp.charges, m.charges[atoms])
    s = gp.size
    assert gp.bonds.shape == (s, s, 5)
    assert np.array_equal(gp.bonds, np.swapaxes(gp.bonds, 0, 1))


def test_extract_pharmacophore_empty_selection_raises():
    with pytest.raises(EmptySelection):
        extract_pharmacophore(benzene(), [])


def test_empty_pharmacophore_is_size_zero():
    gp = empty_pharmacophore()
    assert gp.size == 0


def test_hypothesis_from_groups_uses_group_centroid():
    m = benzene()
    groups = perceive_features(m)
    h = hypothesis_from_groups(m, _groups_of_type(groups, FeatureType.ARO))
    assert h.k == 1
    ftype, pos = h.features[0]
    assert ftype == FeatureType.ARO
    assert np.allclose(pos, m.coords.mean(axis=0), atol=1e-9)


def test_sample_hypothesis_bounds_and_determinism():
    m = toluene_like()
    h1, gp1 = sample_hypothesis(m, seed=5)
    h2, gp2 = sample_hypothesis(m, seed=5)
    assert 3 <= h1.k <= 7
    assert h1.k == h2.k
    for (t1, p1), (t2, p2) in zip(h1.features, h2.features):
        assert t1 == t2 and np.allclose(p1, p2)
    assert list(gp1.mask_indices) == list(gp2.mask_indices)
    # the conditioning graph is attached as the hypothesis source
    assert h1.source is gp1


def test_sample_hypothesis_too_few_features_raises():
    with pytest.raises(TooFewFeatures):
        sample_hypothesis(methane_like(), seed=0)


def test_hypothesis_json_roundtrip():
    h, _ = sample_hypothesis(toluene_like(), seed=1)
    text = hypothesis_to_json(h, tol=1.25)
    payload = json.loads(text)
    assert "features" in payload and payload["tol"] == 1.25
    back, tol = hypothesis_from_json(text)
    assert tol == 1.25
    assert back.k == h.k
    for (t1, p1), (t2, p2) in zip(back.features, h.features):
        assert t1 == t2 and np.allclose(p1, p2)


def test_pharmacophore_json_roundtrip():
    m = toluene_like()
    groups = perceive_features(m)
    gp = extract_pharmacophore(m, range(min(3, len(groups))), groups=groups)
    back = pharmacophore_from_json(pharmacophore_to_json(gp))
    assert list(back.mask_indices) == list(gp.mask_indices)
    assert np.array_equal(back.atom_types, gp.atom_types)
    assert np.array_equal(back.charges, gp.charges)
    assert np.allclose(back.coords, gp.coords)
    assert np.array_equal(back.bonds, gp.bonds)
    assert np.array_equal(back.feature_labels, gp.feature_labels)
    assert back.feature_groups == gp.feature_groups

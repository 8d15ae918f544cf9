"""Tests for the sklearn-style estimator wrappers."""
import numpy as np
import pytest

from pharmgen.estimator import DiffusionMoleculeGenerator, PharmacophoreMatchScorer
from pharmgen.pharmacophore import sample_hypothesis
from pharmgen.synth import gen_synthetic


@pytest.fixture(scope="module")
def fitted():
    mols = gen_synthetic(31, 8, (5, 9))
    est = DiffusionMoleculeGenerator(epochs=2, batch_size=4, learning_rate=3e-4,
                                     seed=0, T=16, layers=1, width=16, heads=2,
                                     dropout=0.0)
    return est.fit(mols), mols


def test_get_set_params_roundtrip():
    est = DiffusionMoleculeGenerator(epochs=3, width=32)
    p = est.get_params()
    assert p["epochs"] == 3 and p["width"] == 32
    est.set_params(epochs=5)
    assert est.epochs == 5


def test_fit_sets_fitted_attributes(fitted):
    est, _ = fitted
    assert hasattr(est, "params_") and hasattr(est, "header_")
    assert len(est.history_) == 2


def test_sample_requires_fit():
    with pytest.raises(RuntimeError):
        DiffusionMoleculeGenerator().sample(count=1)


def test_sample_counts_and_conditioning(fitted):
    est, mols = fitted
    out = est.sample(count=3, seed=1)
    assert len(out) == 3
    _, gp = sample_hypothesis(mols[0], seed=0)
    out = est.sample(count=2, pharmacophore=gp, seed=2)
    for m in out:
        assert np.array_equal(m.atom_types[:gp.size], gp.atom_types)


def test_save_load_roundtrip(tmp_path, fitted):
    est, _ = fitted
    path = tmp_path / "est.ckpt"
    est.save(path)
    back = DiffusionMoleculeGenerator.load(path)
    assert back.get_params() == est.get_params()
    a = est.sample(count=1, seed=5)[0]
    b = back.sample(count=1, seed=5)[0]
    assert np.allclose(a.coords, b.coords, atol=0)
    assert np.array_equal(a.bonds, b.bonds)


def test_match_scorer_transform(fitted):
    _, mols = fitted
    h, _ = sample_hypothesis(mols[0], seed=0)
    scorer = PharmacophoreMatchScorer(hypothesis=h, tol=1.0)
    scores = scorer.fit_transform(mols)
    assert scores.shape == (len(mols),)
    assert scores[0] == 1.0
    assert np.all((0.0 <= scores) & (scores <= 1.0))


def test_match_scorer_requires_hypothesis():
    with pytest.raises(ValueError):
        PharmacophoreMatchScorer().fit()

"""Scikit-learn style front door for the pipeline.

`DiffusionMoleculeGenerator` is a fit/sample estimator over MolGraph lists;
`PharmacophoreMatchScorer` is a transformer mapping molecules to match
scores against a fixed hypothesis. Both expose get_params/set_params so
they compose with sklearn tooling.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .checkpoint import load_checkpoint, save_checkpoint
from .errors import TooFewFeatures
from .matching import match_score
from .pharmacophore import sample_hypothesis
from .sampling import sample as _sample
from .training import TrainConfig, train as _train
from .validation import check_molecule_list


class DiffusionMoleculeGenerator(BaseEstimator):
    """Pharmacophore-conditioned molecular diffusion model.

    fit(mols) perceives features, samples one hypothesis per molecule, and
    trains the denoiser; sample() then generates molecules, optionally
    conditioned on a PharmacophoreGraph.
    """

    def __init__(self, epochs=30, batch_size=8, learning_rate=3e-4, seed=0,
                 T=500, layers=4, width=64, heads=4, dropout=0.1):
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.seed = seed
        self.T = T
        self.layers = layers
        self.width = width
        self.heads = heads
        self.dropout = dropout

    def _config(self):
        return TrainConfig(epochs=self.epochs, batch_size=self.batch_size,
                           learning_rate=self.learning_rate, seed=self.seed,
                           T=self.T, layers=self.layers, width=self.width,
                           heads=self.heads, dropout=self.dropout)

    def fit(self, X, y=None):
        mols = check_molecule_list(X)
        dataset = []
        for i, m in enumerate(mols):
            try:
                _, gp = sample_hypothesis(m, seed=self.seed + i)
            except TooFewFeatures:
                gp = None
            dataset.append((m, gp))
        self.params_, self.history_, self.header_ = _train(self._config(), dataset)
        return self

    def sample(self, count=1, pharmacophore=None, n_atoms="auto", seed=0, trace=None):
        self._check_fitted()
        return _sample(self.params_, self.header_, gp=pharmacophore,
                       n_atoms=n_atoms, count=count, seed=seed, trace=trace)

    def save(self, path):
        self._check_fitted()
        save_checkpoint(path, self.params_, self.header_)
        return self

    @classmethod
    def load(cls, path):
        params, header = load_checkpoint(path)
        cfg = header.get("train_config", {})
        est = cls(**{k: cfg[k] for k in
                     ("epochs", "batch_size", "learning_rate", "seed", "T",
                      "layers", "width", "heads", "dropout") if k in cfg})
        est.params_ = params
        est.header_ = header
        est.history_ = []
        return est

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise RuntimeError("estimator is not fitted; call fit() or load()")


class PharmacophoreMatchScorer(BaseEstimator, TransformerMixin):
    """Transformer: molecules -> Euclidean match scores against a hypothesis."""

    def __init__(self, hypothesis=None, tol=1.0):
        self.hypothesis = hypothesis
        self.tol = tol

    def fit(self, X=None, y=None):
        if self.hypothesis is None:
            raise ValueError("a hypothesis is required")
        return self

    def transform(self, X):
        self.fit()
        mols = check_molecule_list(X)
        return np.array([match_score(m, self.hypothesis, tol=self.tol).ms for m in mols])

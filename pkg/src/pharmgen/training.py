"""Composite loss, optimizer loop, and checkpoint production."""

from dataclasses import dataclass, field, asdict

import numpy as np

from . import autodiff as ad
from .checkpoint import save_checkpoint
from .denoiser import DenoiserConfig, DenoiserParams, forward, init_params
from .diffusion import (
    DEFAULT_NU, build_schedule, build_transition_kit, forward_noise,
    marginals_from_dataset,
)
from .errors import DivergedLoss, EmptyDataset, ShapeMismatch
from .molgraph import MolGraph
from .pharmacophore import PharmacophoreGraph, empty_pharmacophore


@dataclass
class LossWeights:
    coords: float = 3.0
    atom_types: float = 0.4
    charges: float = 1.0
    bonds: float = 2.0
    pharm_coords: float = 1.0
    pharm_atom_types: float = 1.0
    pharm_charges: float = 1.0

    def __post_init__(self):
        values = asdict(self)
        if any(v < 0 for v in values.values()):
            raise ValueError("loss weights must be nonnegative")
        if not any(values[k] > 0 for k in ("coords", "atom_types", "charges", "bonds")):
            raise ValueError("at least one molecular loss weight must be positive")


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 8
    learning_rate: float = 3e-4
    seed: int = 0
    T: int = 500
    nu: dict = field(default_factory=lambda: dict(DEFAULT_NU))
    weights: LossWeights = field(default_factory=LossWeights)
    layers: int = 4
    width: int = 64
    heads: int = 4
    dropout: float = 0.1

    def to_dict(self):
        doc = asdict(self)
        return doc

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        if "weights" in doc and isinstance(doc["weights"], dict):
            doc["weights"] = LossWeights(**doc["weights"])
        return cls(**doc)


def _cross_entropy(target: np.ndarray, logits) -> ad.Tensor:
    """Mean over rows of -sum(target * log_softmax(logits))."""
    if target.shape != logits.shape:
        raise ShapeMismatch(f"target {target.shape} vs logits {logits.shape}")
    logp = ad.log_softmax(logits, axis=-1)
    rows = max(int(np.prod(target.shape[:-1])), 1)
    return ad.mul(ad.tsum(ad.mul(ad.constant(target), logp)), -1.0 / rows)


def loss(pred, target: MolGraph, gp: PharmacophoreGraph, weights: LossWeights):
    """Weighted molecular + pharmacophore objective.

    Returns (total tensor, breakdown dict of unweighted per-term floats).
    Molecular terms average over atoms (edges: unordered off-diagonal
    pairs); pharmacophore terms average over masked atoms only.
    """
    x_logits, c_logits, coords, e_logits = pred
    n = target.n
    r0 = target.coords - target.coords.mean(axis=0, keepdims=True)
    if coords.shape != r0.shape:
        raise ShapeMismatch(f"coords {coords.shape} vs target {r0.shape}")

    dr = ad.add(coords, -r0)
    term_r = ad.mul(ad.tsum(ad.mul(dr, dr)), 1.0 / n)
    term_x = _cross_entropy(target.atom_types, x_logits)
    term_c = _cross_entropy(target.charges, c_logits)
    iu = np.triu_indices(n, k=1)
    if len(iu[0]):
        term_e = _cross_entropy(target.bonds[iu], ad.getitem(e_logits, iu))
    else:
        term_e = ad.constant(0.0)

    terms = {"coords": term_r, "atom_types": term_x, "charges": term_c, "bonds": term_e}

    if gp is not None and gp.size > 0:
        mask = np.asarray(gp.mask_indices)
        drp = ad.add(ad.getitem(coords, mask), -r0[mask])
        terms["pharm_coords"] = ad.mul(ad.tsum(ad.mul(drp, drp)), 1.0 / gp.size)
        terms["pharm_atom_types"] = _cross_entropy(gp.atom_types, ad.getitem(x_logits, mask))
        terms["pharm_charges"] = _cross_entropy(gp.charges, ad.getitem(c_logits, mask))
    else:
        zero = ad.constant(0.0)
        terms.update(pharm_coords=zero, pharm_atom_types=zero, pharm_charges=zero)

    w = asdict(weights)
    total = None
    for name, term in terms.items():
        weighted = ad.mul(term, w[name])
        total = weighted if total is None else ad.add(total, weighted)
    breakdown = {name: float(term.value) for name, term in terms.items()}
    return total, breakdown


def t_sample(batch_size: int, T: int, rng) -> np.ndarray:
    """Uniform training timesteps in [1, T]."""
    return rng.integers(1, T + 1, size=batch_size)


class Adam:
    """First/second-moment adaptive optimizer over named parameter tensors."""

    def __init__(self, params: DenoiserParams, lr=3e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {k: np.zeros(v.shape) for k, v in params.tensors.items()}
        self.v = {k: np.zeros(v.shape) for k, v in params.tensors.items()}
        self.step_count = 0

    def step(self, grads: dict):
        self.step_count += 1
        b1, b2 = self.beta1, self.beta2
        correction1 = 1.0 - b1 ** self.step_count
        correction2 = 1.0 - b2 ** self.step_count
        for name, tensor in self.params.tensors.items():
            g = grads[name]
            self.m[name] = b1 * self.m[name] + (1 - b1) * g
            self.v[name] = b2 * self.v[name] + (1 - b2) * g * g
            m_hat = self.m[name] / correction1
            v_hat = self.v[name] / correction2
            tensor.value = tensor.value - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def train(config: TrainConfig, dataset, checkpoint_path=None, log_path=None,
          progress=None):
    """Train the denoiser; returns (params, history, header).

    `dataset` is a list of (MolGraph, PharmacophoreGraph) pairs. Entirely
    deterministic for a fixed config seed (single-threaded).
    """
    if not dataset:
        raise EmptyDataset("no training items")
    mols = [m for m, _ in dataset]
    sched = build_schedule(config.T, config.nu)
    marginals = marginals_from_dataset(mols)
    kit = build_transition_kit(sched, marginals)

    model_cfg = DenoiserConfig(layers=config.layers, width=config.width,
                               heads=config.heads, dropout=config.dropout)
    params = init_params(model_cfg, seed=config.seed)
    opt = Adam(params, lr=config.learning_rate)

    history = []
    log_rows = ["epoch,total," + ",".join(sorted(LossWeights().__dict__))]
    for epoch in range(config.epochs):
        # per-epoch stream: with learning rate 0 the loss curve is constant
        rng = np.random.default_rng((config.seed, epoch if config.learning_rate > 0 else 0))
        order = rng.permutation(len(dataset))
        epoch_terms = {k: 0.0 for k in asdict(config.weights)}
        epoch_total, count = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            batch = order[start:start + config.batch_size]
            grads_acc = None
            for idx in batch:
                mol, gp = dataset[idx]
                if gp is None:
                    gp = empty_pharmacophore()
                t = int(t_sample(1, config.T, rng)[0])
                noisy = forward_noise(mol, t, sched, kit, rng)
                pred = forward(noisy, gp, t, params, config.T, dropout_rng=rng)
                total, breakdown = loss(pred, mol, gp, config.weights)
                if not np.isfinite(total.value):
                    raise DivergedLoss(f"non-finite loss at epoch {epoch}")
                g = ad.grad(total, params.tensors)
                if grads_acc is None:
                    grads_acc = g
                else:
                    for k in grads_acc:
                        grads_acc[k] = grads_acc[k] + g[k]
                epoch_total += float(total.value)
                for k, v in breakdown.items():
                    epoch_terms[k] += v
                count += 1
            scale = 1.0 / len(batch)
            opt.step({k: v * scale for k, v in grads_acc.items()})
        mean_total = epoch_total / count
        history.append(mean_total)
        log_rows.append(f"{epoch},{mean_total:.6f}," +
                        ",".join(f"{epoch_terms[k] / count:.6f}" for k in sorted(epoch_terms)))
        if progress:
            progress(epoch, mean_total)

    size_hist = {}
    for m in mols:
        size_hist[m.n] = size_hist.get(m.n, 0) + 1
    header = {
        "schedule": {"T": config.T, "nu": config.nu},
        "marginals": {k: v.tolist() for k, v in marginals.items()},
        "size_histogram": {str(k): v for k, v in sorted(size_hist.items())},
        "train_config": config.to_dict(),
        "final_loss": history[-1],
    }
    if checkpoint_path:
        save_checkpoint(checkpoint_path, params, header)
    if log_path:
        with open(log_path, "w") as fh:
            fh.write("\n".join(log_rows) + "\n")
    return params, history, header

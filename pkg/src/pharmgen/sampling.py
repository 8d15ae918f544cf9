"""Reverse-diffusion molecule generation with pharmacophore conditioning."""

from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff as ad
from .denoiser import DenoiserParams, com_adjust, forward, inpaint_input
from .diffusion import (
    build_schedule, build_transition_kit, discrete_posterior,
    gaussian_posterior_step, sample_com_noise,
)
from .elements import BOND_NONE
from .errors import EmptyBatch, TooFewAtoms
from .molgraph import MolGraph, NoisyGraph, connected_components
from .pharmacophore import PharmacophoreGraph, empty_pharmacophore


def _softmax_np(logits, axis=-1):
    z = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def _sample_rows(probs, rng):
    rows = probs.reshape(-1, probs.shape[-1])
    cumulative = np.cumsum(rows, axis=1)
    cumulative[:, -1] = 1.0
    idx = (rng.random((rows.shape[0], 1)) > cumulative).sum(axis=1)
    return np.eye(probs.shape[-1])[idx].reshape(probs.shape)


def _prior_graph(n, marginals, rng, d, a, b):
    x = _sample_rows(np.broadcast_to(marginals["atom_types"], (n, d)).copy(), rng)
    c = _sample_rows(np.broadcast_to(marginals["charges"], (n, a)).copy(), rng)
    coords = sample_com_noise(n, rng)
    bonds = np.zeros((n, n, b))
    bonds[np.arange(n), np.arange(n), BOND_NONE] = 1.0
    iu = np.triu_indices(n, k=1)
    if len(iu[0]):
        rows = _sample_rows(np.broadcast_to(marginals["bonds"], (len(iu[0]), b)).copy(), rng)
        bonds[iu] = rows
        bonds[iu[1], iu[0]] = rows
    return NoisyGraph(x, c, coords, bonds, t=0)


def sample(params: DenoiserParams, header: dict, gp: PharmacophoreGraph = None,
           n_atoms="auto", count: int = 1, seed: int = 0, trace=None) -> list:
    """Generate `count` molecules by reverse diffusion.

    `header` is the checkpoint header (schedule, marginals, size histogram).
    When `gp` is given, masked entries are inpainted at every step and fixed
    in the final output; masked atoms occupy the first `gp.size` rows of each
    generated molecule. `trace(step_record)` is called once per reverse step
    when provided (used for trajectory diagnostics).
    """
    cfg = params.config
    sched = build_schedule(header["schedule"]["T"], header["schedule"]["nu"])
    marginals = {k: np.asarray(v) for k, v in header["marginals"].items()}
    kit = build_transition_kit(sched, marginals)
    T = sched.T
    gp = gp if gp is not None else empty_pharmacophore(cfg.d, cfg.a, cfg.b)
    conditioned = gp.size > 0
    if conditioned:
        # the source molecule's atom numbering is meaningless for a fresh
        # sample; masked atoms occupy the first |M_p| rows of the output
        gp = replace(gp, mask_indices=np.arange(gp.size))

    hist = header.get("size_histogram", {})
    sizes = np.array([int(k) for k in hist]) if hist else np.array([12])
    weights = np.array([hist[str(s)] for s in sizes], dtype=float) if hist else np.ones(1)
    weights /= weights.sum()

    out = []
    for index in range(count):
        # per-sample stream: results do not depend on worker scheduling
        rng = np.random.default_rng((seed, index))
        if n_atoms == "auto":
            n = int(rng.choice(sizes, p=weights))
            n = max(n, gp.size + 1) if conditioned else n
        else:
            n = int(n_atoms)
            if conditioned and n < gp.size:
                raise TooFewAtoms(f"n_atoms={n} below mask size {gp.size}")
            if n < 1:
                raise TooFewAtoms("n_atoms must be >= 1")

        g = _prior_graph(n, marginals, rng, cfg.d, cfg.a, cfg.b)
        g.t = T
        for t in range(T, 0, -1):
            if conditioned:
                g = com_adjust(g, gp)
                g = inpaint_input(g, gp)
            with ad.no_grad():
                x_log, c_log, r_hat, e_log = forward(g, gp, t, params, T)
            pred_x = _softmax_np(x_log.value)
            pred_c = _softmax_np(c_log.value)
            pred_e = _softmax_np(e_log.value)

            coords = g.coords - g.coords.mean(axis=0, keepdims=True)
            new_coords = gaussian_posterior_step(coords, r_hat.value, t, sched, rng)
            new_x = _sample_rows(
                discrete_posterior(g.atom_types, pred_x, t,
                                   kit.Q["atom_types"], kit.Q_bar["atom_types"]), rng)
            new_c = _sample_rows(
                discrete_posterior(g.charges, pred_c, t,
                                   kit.Q["charges"], kit.Q_bar["charges"]), rng)
            bonds = np.zeros_like(g.bonds)
            bonds[np.arange(n), np.arange(n), BOND_NONE] = 1.0
            iu = np.triu_indices(n, k=1)
            if len(iu[0]):
                post = discrete_posterior(g.bonds[iu], pred_e.reshape(n, n, -1)[iu], t,
                                          kit.Q["bonds"], kit.Q_bar["bonds"])
                rows = _sample_rows(post, rng)
                bonds[iu] = rows
                bonds[iu[1], iu[0]] = rows
            g = NoisyGraph(new_x, new_c, new_coords, bonds, t=t - 1)
            if conditioned:
                g = inpaint_input(g, gp)
            if trace is not None:
                trace({"t": t - 1, "com": g.coords.mean(axis=0).copy()})

        if conditioned:
            # final hard write: masked atoms carry the pharmacophore exactly
            g = com_adjust(g, gp)
            g = inpaint_input(g, gp)
        mol = g.decode(name=f"sample-{seed}-{index}")
        # keep a CoM-free frame; translation preserves masked pairwise distances
        mol.coords = mol.coords - mol.coords.mean(axis=0, keepdims=True)
        out.append(mol)
    return out


@dataclass
class GenerationReport:
    validity: float
    uniqueness: float
    novelty: float          # None when no training index was supplied
    diversity: float        # None with fewer than two valid molecules
    ms_mean: float
    pmr: float
    ms_ge_0_8: float
    count: int
    scores: list = field(default_factory=list)

    def to_dict(self):
        return {"validity": self.validity, "uniqueness": self.uniqueness,
                "novelty": self.novelty, "diversity": self.diversity,
                "ms_mean": self.ms_mean, "pmr": self.pmr,
                "ms_ge_0.8": self.ms_ge_0_8, "count": self.count}

    def to_json(self):
        import json
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self):
        doc = self.to_dict()
        keys = list(doc)
        fmt = lambda v: "" if v is None else f"{v:.6f}" if isinstance(v, float) else str(v)
        return ",".join(keys) + "\n" + ",".join(fmt(doc[k]) for k in keys) + "\n"


def batch_report(samples, hypothesis=None, tol: float = 1.0,
                 train_hashes=None) -> GenerationReport:
    """Aggregate generation metrics for one sampling run."""
    from . import metrics
    from .errors import TooFewMolecules
    from .matching import match_score, ms_at_least, pmr as pmr_fn

    samples = list(samples)
    if not samples:
        raise EmptyBatch("no samples to report on")
    validity = metrics.validity_rate(samples)
    any_valid = any(metrics.check_validity(m) for m in samples)
    uniqueness = metrics.uniqueness_rate(samples) if any_valid else None
    novelty = (metrics.novelty_rate(samples, train_hashes)
               if train_hashes is not None and any_valid else None)
    try:
        div = metrics.diversity(samples)
    except TooFewMolecules:
        div = None
    scores = []
    if hypothesis is not None:
        scores = [match_score(m, hypothesis, tol=tol).ms for m in samples]
    return GenerationReport(
        validity=validity, uniqueness=uniqueness, novelty=novelty, diversity=div,
        ms_mean=float(np.mean(scores)) if scores else None,
        pmr=pmr_fn(scores) if scores else None,
        ms_ge_0_8=ms_at_least(scores, 0.8) if scores else None,
        count=len(samples), scores=scores,
    )


def largest_fragment(m: MolGraph, mask_indices=None):
    """Keep the largest connected component.

    Ties prefer the component holding more pharmacophore (masked) atoms,
    then the one containing the lowest atom index. Returns the fragment and
    the number of masked atoms that were discarded with other components.
    """
    masked = set(int(i) for i in mask_indices) if mask_indices is not None else set()
    comps = connected_components(m)
    comps.sort(key=lambda c: (-len(c), -len(masked.intersection(c)), min(c)))
    keep = comps[0]
    dropped_mask_atoms = len(masked - set(keep))
    frag = MolGraph(
        atom_types=m.atom_types[keep].copy(),
        charges=m.charges[keep].copy(),
        coords=m.coords[keep].copy(),
        bonds=m.bonds[np.ix_(keep, keep)].copy(),
        name=m.name,
    )
    return frag, dropped_mask_atoms

"""Conditioned graph-transformer denoiser.

Predicts clean atom types, charges, coordinates, and bonds from a noisy
graph, a pharmacophore conditioning graph, and the timestep. Coordinates
are handled equivariantly: every learned quantity that touches geometry is
a function of pairwise distances, and position updates move along
difference vectors. Pharmacophore conditioning enters three ways:
embedding-level inpainting at masked rows, re-injection of masked
positions after every layer, and cross-attention onto pharmacophore node
embeddings.
"""

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .elements import N_BONDS, N_CHARGES, N_ELEMENTS
from .errors import EmptyMask, MaskOutOfRange, NonFiniteActivation, ShapeMismatch
from .molgraph import NoisyGraph
from .pharmacophore import N_FEATURES, PharmacophoreGraph, feature_label_matrix

_RBF_CENTERS = np.linspace(0.0, 8.0, 16)
_RBF_GAMMA = 4.0


@dataclass
class DenoiserConfig:
    layers: int = 4
    width: int = 64
    heads: int = 4
    edge_width: int = 32
    d: int = N_ELEMENTS
    a: int = N_CHARGES
    e: int = N_FEATURES
    b: int = N_BONDS
    dropout: float = 0.1

    def to_dict(self):
        return {k: getattr(self, k) for k in
                ("layers", "width", "heads", "edge_width", "d", "a", "e", "b", "dropout")}

    @classmethod
    def from_dict(cls, doc):
        return cls(**doc)


@dataclass
class DenoiserParams:
    config: DenoiserConfig
    tensors: dict = field(default_factory=dict)   # name -> ad.Tensor

    def count(self) -> int:
        return sum(t.value.size for t in sorted_items(self.tensors))

    def copy(self) -> "DenoiserParams":
        return DenoiserParams(self.config,
                              {k: ad.parameter(v.value.copy()) for k, v in self.tensors.items()})


def sorted_items(tensors):
    return [tensors[k] for k in sorted(tensors)]


def init_params(config: DenoiserConfig, seed: int = 0) -> DenoiserParams:
    rng = np.random.default_rng(seed)
    w, we, h = config.width, config.edge_width, config.heads
    node_in = config.d + config.a + config.e
    edge_in = config.b + len(_RBF_CENTERS)
    p = {}

    def mat(name, fan_in, fan_out):
        p[name] = ad.parameter(rng.normal(scale=1.0 / np.sqrt(fan_in), size=(fan_in, fan_out)))

    def vec(name, size, value=0.0):
        p[name] = ad.parameter(np.full(size, value, dtype=float))

    for prefix in ("mlp_h", "mlp_hp"):
        mat(f"{prefix}.W0", node_in, w)
        vec(f"{prefix}.b0", w)
        mat(f"{prefix}.W1", w, w)
        vec(f"{prefix}.b1", w)
    mat("time.W", w, w)
    vec("time.b", w)
    mat("edge_embed.W0", edge_in, we)
    vec("edge_embed.b0", we)
    mat("edge_embed.W1", we, we)
    vec("edge_embed.b1", we)

    for l in range(config.layers):
        L = f"layer{l}"
        for nm in ("Wq", "Wk", "Wv", "Wo"):
            mat(f"{L}.attn.{nm}", w, w)
        vec(f"{L}.attn.bo", w)
        mat(f"{L}.attn.edge_bias", we, h)
        mat(f"{L}.ffn.W0", w, 2 * w)
        vec(f"{L}.ffn.b0", 2 * w)
        mat(f"{L}.ffn.W1", 2 * w, w)
        vec(f"{L}.ffn.b1", w)
        vec(f"{L}.ln1.g", w, 1.0)
        vec(f"{L}.ln1.b", w)
        vec(f"{L}.ln2.g", w, 1.0)
        vec(f"{L}.ln2.b", w)
        mat(f"{L}.edge.W0", we + w + 1, we)
        vec(f"{L}.edge.b0", we)
        mat(f"{L}.edge.W1", we, we)
        vec(f"{L}.edge.b1", we)
        vec(f"{L}.ln_e.g", we, 1.0)
        vec(f"{L}.ln_e.b", we)
        mat(f"{L}.pos.W0", we + 1, we)
        vec(f"{L}.pos.b0", we)
        mat(f"{L}.pos.W1", we, 1)
        for nm in ("Wq", "Wk", "Wv", "Wa", "Wout"):
            mat(f"{L}.cross.{nm}", w, w)

    mat("head.x.W", w, config.d)
    vec("head.x.b", config.d)
    mat("head.c.W", w, config.a)
    vec("head.c.b", config.a)
    mat("head.e.W", we, config.b)
    vec("head.e.b", config.b)
    return DenoiserParams(config, p)


def time_embedding(t: int, T: int, width: int) -> np.ndarray:
    half = width // 2
    freqs = np.exp(-np.log(10000.0) * np.arange(half) / max(half - 1, 1))
    angle = (t / max(T, 1)) * freqs * 2.0 * np.pi * 10.0
    return np.concatenate([np.sin(angle), np.cos(angle)])


def _mlp(x, p, prefix):
    hidden = ad.silu(ad.add(ad.matmul(x, p[f"{prefix}.W0"]), p[f"{prefix}.b0"]))
    return ad.add(ad.matmul(hidden, p[f"{prefix}.W1"]), p[f"{prefix}.b1"])


def encode_nodes(g: NoisyGraph, feature_labels: np.ndarray, params: DenoiserParams):
    """Embed molecule nodes from [X, C, F_p] via MLP_h."""
    if feature_labels.shape != (g.n, params.config.e):
        raise ShapeMismatch(
            f"feature labels {feature_labels.shape} != {(g.n, params.config.e)}")
    h_in = ad.constant(np.concatenate([g.atom_types, g.charges, feature_labels], axis=-1))
    return _mlp(h_in, params.tensors, "mlp_h")


def encode_pharm(gp: PharmacophoreGraph, params: DenoiserParams):
    """Embed pharmacophore nodes from [X_p, C_p, F_p] via MLP_hp."""
    if gp.size == 0:
        return ad.constant(np.zeros((0, params.config.width)))
    h_in = ad.constant(np.concatenate([gp.atom_types, gp.charges, gp.feature_labels], axis=-1))
    return _mlp(h_in, params.tensors, "mlp_hp")


def com_adjust(g: NoisyGraph, gp: PharmacophoreGraph) -> NoisyGraph:
    """Translate all coordinates so the masked subset mean lands on the
    pharmacophore subset mean; rigid, distance-preserving."""
    if gp.size == 0:
        raise EmptyMask("cannot align to an empty mask")
    shift = gp.coords.mean(axis=0) - g.coords[gp.mask_indices].mean(axis=0)
    out = g.copy()
    out.coords = g.coords + shift
    return out


def inpaint_input(g: NoisyGraph, gp: PharmacophoreGraph) -> NoisyGraph:
    """Replace masked rows/edges of the noisy graph with pharmacophore values."""
    out = g.copy()
    if gp.size == 0:
        return out
    mask = np.asarray(gp.mask_indices)
    if mask.min() < 0 or mask.max() >= g.n:
        raise MaskOutOfRange(f"mask indices {mask} outside [0, {g.n})")
    out.atom_types[mask] = gp.atom_types
    out.charges[mask] = gp.charges
    out.coords[mask] = gp.coords
    out.bonds[np.ix_(mask, mask)] = gp.bonds
    return out


def cross_attend(h_mol, h_pharm, params: DenoiserParams, layer: int):
    """Molecule nodes attend to pharmacophore nodes; residual inpaint of the output."""
    p = params.tensors
    L = f"layer{layer}.cross"
    if h_pharm.shape[0] == 0:
        return h_mol
    if h_mol.shape[1] != h_pharm.shape[1]:
        raise ShapeMismatch(f"widths differ: {h_mol.shape} vs {h_pharm.shape}")
    w = params.config.width
    q = ad.matmul(h_mol, p[f"{L}.Wq"])
    k = ad.matmul(h_pharm, p[f"{L}.Wk"])
    v = ad.matmul(h_pharm, p[f"{L}.Wv"])
    logits = ad.mul(ad.matmul(ad.matmul(q, p[f"{L}.Wa"]), ad.swapaxes(k, 0, 1)),
                    1.0 / np.sqrt(w))
    attn = ad.softmax(logits, axis=-1)
    out = ad.matmul(ad.matmul(attn, v), p[f"{L}.Wout"])
    return ad.add(h_mol, out)


def _rbf(dist: np.ndarray) -> np.ndarray:
    return np.exp(-_RBF_GAMMA * (dist[..., None] - _RBF_CENTERS) ** 2)


def _pair_distances(coords):
    diff = ad.add(ad.reshape(coords, (coords.shape[0], 1, 3)),
                  ad.mul(ad.reshape(coords, (1, coords.shape[0], 3)), -1.0))
    d2 = ad.tsum(ad.mul(diff, diff), axis=-1, keepdims=True)
    return diff, ad.sqrt(ad.add(d2, 1e-12))


def _self_attention(h, e, params, layer, n):
    p = params.tensors
    cfg = params.config
    L = f"layer{layer}"
    heads, dk = cfg.heads, cfg.width // cfg.heads
    q = ad.matmul(h, p[f"{L}.attn.Wq"])
    k = ad.matmul(h, p[f"{L}.attn.Wk"])
    v = ad.matmul(h, p[f"{L}.attn.Wv"])

    def split(x):  # (n, w) -> (heads, n, dk)
        return ad.swapaxes(ad.reshape(x, (n, heads, dk)), 0, 1)

    qh, kh, vh = split(q), split(k), split(v)
    logits = ad.mul(ad.matmul(qh, ad.swapaxes(kh, 1, 2)), 1.0 / np.sqrt(dk))
    bias = ad.matmul(e, p[f"{L}.attn.edge_bias"])          # (n, n, heads)
    logits = ad.add(logits, ad.swapaxes(ad.swapaxes(bias, 0, 2), 1, 2))
    attn = ad.softmax(logits, axis=-1)
    out = ad.reshape(ad.swapaxes(ad.matmul(attn, vh), 0, 1), (n, cfg.width))
    return ad.add(ad.matmul(out, p[f"{L}.attn.Wo"]), p[f"{L}.attn.bo"])


def _dropout(x, rate, rng):
    if rng is None or rate <= 0.0:
        return x
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return ad.mul(x, mask)


def forward(g_t: NoisyGraph, gp: PharmacophoreGraph, t: int, params: DenoiserParams,
            T: int, dropout_rng=None):
    """Full denoiser pass; returns (x_logits, c_logits, coords, e_logits) tensors."""
    cfg = params.config
    p = params.tensors
    n = g_t.n
    if g_t.atom_types.shape[1] != cfg.d or g_t.charges.shape[1] != cfg.a \
            or g_t.bonds.shape[-1] != cfg.b:
        raise ShapeMismatch("noisy graph shapes do not match the model config")
    rate = cfg.dropout

    labels = feature_label_matrix(n, gp)
    masked = gp.size > 0
    if masked:
        mask = np.asarray(gp.mask_indices)
        if mask.min() < 0 or mask.max() >= n:
            raise MaskOutOfRange(f"mask indices {mask} outside [0, {n})")
        scatter = np.zeros((n, gp.size))
        scatter[mask, np.arange(gp.size)] = 1.0
        row_mask = np.zeros((n, 1), dtype=bool)
        row_mask[mask] = True
        pair_mask = (row_mask & row_mask.T)[..., None]

    # --- input-level inpainting of geometry and edges ---
    coords_in = g_t.coords.copy()
    bonds_in = g_t.bonds.copy()
    if masked:
        coords_in[mask] = gp.coords
        bonds_full = np.zeros_like(bonds_in)
        bonds_full[np.ix_(mask, mask)] = gp.bonds
        bonds_in = np.where(pair_mask, bonds_full, bonds_in)
    coords_in = coords_in - coords_in.mean(axis=0, keepdims=True)
    rp_centered = coords_in[mask].copy() if masked else None

    # --- node embeddings, with embedding-level inpainting at masked rows ---
    h = encode_nodes(g_t, labels, params)
    h_pharm = encode_pharm(gp, params)
    if masked:
        hp_full = ad.matmul(ad.constant(scatter), h_pharm)
        h = ad.where(np.broadcast_to(row_mask, (n, cfg.width)), hp_full, h)
    temb = time_embedding(t, T, cfg.width).reshape(1, -1)
    h = ad.add(h, ad.add(ad.matmul(ad.constant(temb), p["time.W"]), p["time.b"]))

    # --- edge embeddings ---
    dist_in = np.linalg.norm(coords_in[:, None, :] - coords_in[None, :, :], axis=-1)
    e_in = np.concatenate([bonds_in, _rbf(dist_in)], axis=-1)
    e = _mlp(ad.constant(e_in), p, "edge_embed")

    coords = ad.constant(coords_in)
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)[..., None]

    for l in range(cfg.layers):
        L = f"layer{l}"
        # node update: self-attention + feed-forward, pre-norm residuals
        h_norm = ad.layer_norm(h, p[f"{L}.ln1.g"], p[f"{L}.ln1.b"])
        h = ad.add(h, _dropout(_self_attention(h_norm, e, params, l, n), rate, dropout_rng))
        h_norm = ad.layer_norm(h, p[f"{L}.ln2.g"], p[f"{L}.ln2.b"])
        ffn = ad.matmul(ad.silu(ad.add(ad.matmul(h_norm, p[f"{L}.ffn.W0"]), p[f"{L}.ffn.b0"])),
                        p[f"{L}.ffn.W1"])
        h = ad.add(h, _dropout(ad.add(ffn, p[f"{L}.ffn.b1"]), rate, dropout_rng))

        # edge update from symmetric node context and current distances
        _, dist = _pair_distances(coords)
        hi = ad.reshape(h, (n, 1, cfg.width))
        hj = ad.reshape(h, (1, n, cfg.width))
        pair_h = ad.add(hi, hj)  # symmetric in (i, j)
        e_ctx = ad.concat([e, pair_h, dist], axis=-1)
        e_upd = _mlp(e_ctx, p, f"{L}.edge")
        e = ad.layer_norm(ad.add(e, _dropout(e_upd, rate, dropout_rng)),
                          p[f"{L}.ln_e.g"], p[f"{L}.ln_e.b"])

        # equivariant position update: invariant gates on difference vectors
        diff, dist = _pair_distances(coords)
        gate_in = ad.concat([e, dist], axis=-1)
        gate = ad.matmul(ad.silu(ad.add(ad.matmul(gate_in, p[f"{L}.pos.W0"]),
                                        p[f"{L}.pos.b0"])), p[f"{L}.pos.W1"])
        scaled = ad.mul(gate, ad.mul(diff, ad.power(ad.add(dist, 1.0), -1.0)))
        delta = ad.mul(ad.tsum(scaled, axis=1), 1.0 / n)
        coords = ad.add(coords, delta)
        coords = ad.add(coords, ad.mul(ad.tmean(coords, axis=0, keepdims=True), -1.0))

        # cross-attention onto pharmacophore embeddings
        h = cross_attend(h, h_pharm, params, l)

        # re-inject masked positions after every layer
        if masked:
            rp_full = np.zeros((n, 3))
            rp_full[mask] = rp_centered
            coords = ad.where(np.broadcast_to(row_mask, (n, 3)),
                              ad.constant(rp_full), coords)

    # --- output heads ---
    x_logits = ad.add(ad.matmul(h, p["head.x.W"]), p["head.x.b"])
    c_logits = ad.add(ad.matmul(h, p["head.c.W"]), p["head.c.b"])
    e_logits = ad.add(ad.matmul(e, p["head.e.W"]), p["head.e.b"])
    e_logits = ad.where(np.broadcast_to(upper, e_logits.shape), e_logits,
                        ad.swapaxes(e_logits, 0, 1))
    coords = ad.add(coords, ad.mul(ad.tmean(coords, axis=0, keepdims=True), -1.0))

    for tensor in (x_logits, c_logits, coords, e_logits):
        if not np.all(np.isfinite(tensor.value)):
            raise NonFiniteActivation("non-finite activation in denoiser output")
    return x_logits, c_logits, coords, e_logits


grad = ad.grad

"""Joint continuous/discrete diffusion: schedules, forward noising, posteriors.

Coordinates follow variance-preserving Gaussian diffusion restricted to the
zero center-of-mass subspace. Discrete modalities (atom types, charges,
bonds) follow categorical diffusion with marginal transition matrices
Q_t = beta_t I + (1 - beta_t) 1 m^T.
"""

from dataclasses import dataclass, field

import numpy as np

from .elements import BOND_NONE
from .errors import InvalidNu, InvalidT, TimestepOutOfRange, ZeroNormalizer
from .molgraph import MolGraph, NoisyGraph

MODALITIES = ("coords", "atom_types", "charges", "bonds")
DEFAULT_NU = {"coords": 2.5, "atom_types": 1.0, "charges": 1.0, "bonds": 1.5}
COSINE_S = 0.008


@dataclass
class NoiseSchedule:
    """Per-modality cosine schedule with exponent nu; arrays indexed t = 0..T."""

    T: int
    nu: dict
    alpha_bar: dict = field(default_factory=dict)   # cumulative signal
    alpha: dict = field(default_factory=dict)       # per-step, alpha[t] = abar[t]/abar[t-1]
    sigma_bar: dict = field(default_factory=dict)   # sqrt(1 - abar^2)

    def check_t(self, t: int, lo: int = 1):
        if not (lo <= t <= self.T):
            raise TimestepOutOfRange(f"t={t} outside [{lo}, {self.T}]")


def build_schedule(T: int, nu: dict = None) -> NoiseSchedule:
    """Normalized cosine schedule: abar_t = f(t)/f(0), f = cos(pi/2 ((t/T+s)/(1+s))^nu)^2."""
    if T < 2:
        raise InvalidT(f"T={T} must be >= 2")
    nu = dict(DEFAULT_NU, **(nu or {}))
    for mod in MODALITIES:
        if nu[mod] <= 0:
            raise InvalidNu(f"nu[{mod}]={nu[mod]} must be > 0")
    sched = NoiseSchedule(T=T, nu=nu)
    t = np.arange(T + 1, dtype=float)
    for mod in MODALITIES:
        f = np.cos(0.5 * np.pi * ((t / T + COSINE_S) / (1 + COSINE_S)) ** nu[mod]) ** 2
        abar = f / f[0]
        alpha = np.ones(T + 1)
        alpha[1:] = abar[1:] / abar[:-1]
        sched.alpha_bar[mod] = abar
        sched.alpha[mod] = alpha
        sched.sigma_bar[mod] = np.sqrt(np.clip(1.0 - abar ** 2, 0.0, None))
    return sched


@dataclass
class TransitionKit:
    """Marginal-matrix transition kit for one or more discrete modalities."""

    marginals: dict                      # modality -> (d,) probability vector
    Q: dict = field(default_factory=dict)      # modality -> (T+1, d, d); Q[0] = I
    Q_bar: dict = field(default_factory=dict)  # cumulative products


def build_transition_kit(sched: NoiseSchedule, marginals: dict) -> TransitionKit:
    """Transition matrices from per-step retention alpha_t and the data marginals."""
    kit = TransitionKit(marginals={k: np.asarray(v, dtype=float) for k, v in marginals.items()})
    for mod, m in kit.marginals.items():
        d = len(m)
        eye = np.eye(d)
        ones_m = np.outer(np.ones(d), m)
        Q = np.empty((sched.T + 1, d, d))
        Q_bar = np.empty((sched.T + 1, d, d))
        Q[0] = eye
        Q_bar[0] = eye
        for t in range(1, sched.T + 1):
            a = sched.alpha[mod][t]
            Q[t] = a * eye + (1.0 - a) * ones_m
            Q_bar[t] = Q_bar[t - 1] @ Q[t]
        kit.Q[mod] = Q
        kit.Q_bar[mod] = Q_bar
    return kit


def marginals_from_dataset(mols) -> dict:
    """Empirical categorical marginals of a molecule list (bonds off-diagonal only)."""
    x = np.concatenate([m.atom_types for m in mols], axis=0)
    c = np.concatenate([m.charges for m in mols], axis=0)
    bond_rows = []
    for m in mols:
        iu = np.triu_indices(m.n, k=1)
        if len(iu[0]):
            bond_rows.append(m.bonds[iu])
    e = np.concatenate(bond_rows, axis=0) if bond_rows else np.zeros((1, 5))
    out = {}
    for mod, arr in (("atom_types", x), ("charges", c), ("bonds", e)):
        m = arr.mean(axis=0)
        m = np.clip(m, 1e-6, None)
        out[mod] = m / m.sum()
    return out


def sample_com_noise(n: int, rng) -> np.ndarray:
    """Standard normal (n, 3) draws projected onto the zero column-sum subspace."""
    eps = rng.standard_normal((n, 3))
    return eps - eps.mean(axis=0, keepdims=True)


def _sample_categorical_rows(probs, rng):
    """One sample per row of a (rows, d) probability matrix, as one-hot."""
    probs = np.asarray(probs, dtype=float)
    rows, d = probs.shape
    cumulative = np.cumsum(probs, axis=1)
    cumulative[:, -1] = 1.0
    draws = rng.random((rows, 1))
    idx = (draws > cumulative).sum(axis=1)
    return np.eye(d)[idx]


def forward_noise(g: MolGraph, t: int, sched: NoiseSchedule, kit: TransitionKit,
                  rng) -> NoisyGraph:
    """Closed-form forward noising q(z_t | x) for every modality."""
    if not (0 <= t <= sched.T):
        raise TimestepOutOfRange(f"t={t} outside [0, {sched.T}]")
    n = g.n
    if t == 0:
        coords = g.coords - g.coords.mean(axis=0, keepdims=True)
        return NoisyGraph(g.atom_types.copy(), g.charges.copy(), coords, g.bonds.copy(), t=0)

    coords0 = g.coords - g.coords.mean(axis=0, keepdims=True)
    eps = sample_com_noise(n, rng)
    coords = sched.alpha_bar["coords"][t] * coords0 + sched.sigma_bar["coords"][t] * eps

    x = _sample_categorical_rows(g.atom_types @ kit.Q_bar["atom_types"][t], rng)
    c = _sample_categorical_rows(g.charges @ kit.Q_bar["charges"][t], rng)

    # bonds: sample the upper triangle, mirror for symmetry
    b = g.bonds.shape[-1]
    iu = np.triu_indices(n, k=1)
    bonds = np.zeros((n, n, b))
    bonds[np.arange(n), np.arange(n), BOND_NONE] = 1.0
    if len(iu[0]):
        probs = g.bonds[iu] @ kit.Q_bar["bonds"][t]
        samples = _sample_categorical_rows(probs, rng)
        bonds[iu] = samples
        bonds[iu[1], iu[0]] = samples
    return NoisyGraph(x, c, coords, bonds, t=t)


def discrete_posterior(z_t: np.ndarray, pred_x: np.ndarray, t: int, Q: np.ndarray,
                       Q_bar: np.ndarray) -> np.ndarray:
    """Reverse kernel for one categorical row.

    Mixture over clean classes x of the exact single-x posterior
    q(z_{t-1} | z_t, x) ~ (z_t Q_t^T) * (x Qbar_{t-1}), weighted by pred_x.
    Accepts matrix-valued z_t/pred_x (rows processed independently).
    """
    single_row = np.asarray(z_t).ndim == 1
    z_t = np.atleast_2d(np.asarray(z_t, dtype=float))
    pred_x = np.atleast_2d(np.asarray(pred_x, dtype=float))
    left = z_t @ Q[t].T                       # (rows, d) over z_{t-1} classes
    # per-x posterior: left[r] * Q_bar[t-1][x]; normalizer left[r] . Q_bar[t-1][x]... over classes
    numer = left[:, None, :] * Q_bar[t - 1][None, :, :]   # (rows, x, d)
    denom = numer.sum(axis=-1)                             # (rows, x)
    support = pred_x > 0
    if np.any(support & (denom <= 0.0)):
        raise ZeroNormalizer("z_t unreachable under the kit for a predicted class")
    safe = np.where(denom > 0, denom, 1.0)
    post = (pred_x / safe)[:, :, None] * numer             # weighted per-x posteriors
    out = post.sum(axis=1)
    total = out.sum(axis=-1, keepdims=True)
    if np.any(total <= 0.0):
        raise ZeroNormalizer("posterior mixture has zero mass")
    out = out / total
    return out[0] if single_row else out


def gaussian_posterior_step(z_t: np.ndarray, pred_x0: np.ndarray, t: int,
                            sched: NoiseSchedule, rng) -> np.ndarray:
    """One reverse step for coordinates using the clean-data parameterization.

    Returns z_{t-1}; at t = 1 this is the posterior mean (no injected noise).
    Inputs and output live in the zero-CoM subspace.
    """
    sched.check_t(t)
    abar_t = sched.alpha_bar["coords"][t]
    abar_prev = sched.alpha_bar["coords"][t - 1]
    var_t = sched.sigma_bar["coords"][t] ** 2
    var_prev = sched.sigma_bar["coords"][t - 1] ** 2
    alpha_t = sched.alpha["coords"][t]
    step_var = var_t - alpha_t ** 2 * var_prev

    mean = (alpha_t * var_prev / var_t) * z_t + (abar_prev * step_var / var_t) * pred_x0
    if t == 1:
        out = mean
    else:
        post_std = np.sqrt(max(step_var * var_prev / var_t, 0.0))
        out = mean + post_std * sample_com_noise(z_t.shape[0], rng)
    return out - out.mean(axis=0, keepdims=True)

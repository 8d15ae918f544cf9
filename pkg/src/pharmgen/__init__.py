"""Pharmacophore-conditioned 3D molecular graph diffusion at desk scale."""

from .elements import DEFAULT_TABLE, ElementTable
from .molgraph import (
    MolGraph, NoisyGraph, canonical_hash, check_validity, fingerprint,
    molecular_weight, new_molgraph, ring_count, tanimoto,
)
from .sdf import parse_sdf, serialize_sdf
from .synth import gen_synthetic
from .pharmacophore import (
    FeatureType, Hypothesis, PharmacophoreGraph, extract_pharmacophore,
    perceive_features, sample_hypothesis,
)
from .matching import MatchResult, match_score, ms_at_least, pmr
from .diffusion import (
    NoiseSchedule, TransitionKit, build_schedule, build_transition_kit,
    discrete_posterior, forward_noise, gaussian_posterior_step, sample_com_noise,
)
from .denoiser import (
    DenoiserConfig, DenoiserParams, com_adjust, cross_attend, encode_nodes,
    encode_pharm, forward, init_params, inpaint_input,
)
from .training import Adam, LossWeights, TrainConfig, loss, t_sample, train
from .checkpoint import load_checkpoint, save_checkpoint
from .sampling import GenerationReport, batch_report, largest_fragment, sample
from .metrics import (
    diversity, novelty_rate, physchem, summarize, uniqueness_rate, validity_rate,
)
from .estimator import DiffusionMoleculeGenerator, PharmacophoreMatchScorer

__version__ = "0.1.0"

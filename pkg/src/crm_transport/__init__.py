"""Optimal transport distances between completely random measures.

Jump-measure and base-measure distances, posterior intensities for gamma
and generalized gamma priors, latent-variable sampling, simulation helpers
and the experiment harness behind ``crm-transport``.
"""

from .measures import (
    Atom,
    Empirical,
    FixedAtom,
    GammaJump,
    Gaussian,
    GenGammaJump,
    Mixture1D,
    PoissonLaw,
    ScaledLevyIntensity,
)
from .posterior import (
    LatentLaw,
    PosteriorState,
    dw_posterior_dp,
    dw_posterior_gengamma_vs_dp,
    latent_sample,
    posterior_gamma,
    posterior_gengamma,
)
from .simulate import DataSequence, gen_crp, gen_iid, gen_pitman_yor, substream
from .transport import (
    DistanceReport,
    constant_C,
    dw_homogeneous,
    jump_gamma_gamma,
    jump_gengamma_gamma,
    w1_extended,
    w1_mixture,
)

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "Empirical",
    "FixedAtom",
    "GammaJump",
    "Gaussian",
    "GenGammaJump",
    "Mixture1D",
    "PoissonLaw",
    "ScaledLevyIntensity",
    "LatentLaw",
    "PosteriorState",
    "dw_posterior_dp",
    "dw_posterior_gengamma_vs_dp",
    "latent_sample",
    "posterior_gamma",
    "posterior_gengamma",
    "DataSequence",
    "gen_crp",
    "gen_iid",
    "gen_pitman_yor",
    "substream",
    "DistanceReport",
    "constant_C",
    "dw_homogeneous",
    "jump_gamma_gamma",
    "jump_gengamma_gamma",
    "w1_extended",
    "w1_mixture",
]

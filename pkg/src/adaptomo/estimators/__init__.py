"""Point and region estimators: linear inversion, MLE and the particle filter."""

from .fisher import cramer_rao_floor, fisher_information
from .likelihood import DEFAULT_HEDGING, log_likelihood, mle_estimate
from .linear import CountVector, linear_inversion, stokes_estimate, tally
from .region import CredibleEllipsoid, credible_region, khachiyan_mvee
from .smc import (
    DEFAULT_PARTICLES,
    ParticleSet,
    SmcSettings,
    bme,
    effective_sample_size,
    load_particles,
    mean_bures_to_bme,
    resample,
    save_particles,
    smc_init,
    smc_update,
    update_row,
    update_rows,
)

__all__ = [
    "CountVector",
    "CredibleEllipsoid",
    "DEFAULT_HEDGING",
    "DEFAULT_PARTICLES",
    "ParticleSet",
    "SmcSettings",
    "bme",
    "cramer_rao_floor",
    "credible_region",
    "effective_sample_size",
    "fisher_information",
    "khachiyan_mvee",
    "linear_inversion",
    "load_particles",
    "log_likelihood",
    "mean_bures_to_bme",
    "mle_estimate",
    "resample",
    "save_particles",
    "smc_init",
    "smc_update",
    "stokes_estimate",
    "tally",
    "update_row",
    "update_rows",
]

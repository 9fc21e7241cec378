//! Functionals evaluated along trajectories: tail mass, weighted and localized masses and
//! energies, Weinstein-type quadratic forms, and exponential decay fits.

mod decay;
mod functionals;
mod weights;
mod weinstein;

pub use decay::{fit_exponential_decay, fit_spatial_decay, DecayFit, Side};
pub use functionals::{
    fit_monotone_constant, localized_energy, localized_mass, monotone_functional, monotonicity_report,
    nondispersion_profile, tail_mass, tilde_m, MonotoneFit, MonotonicityReport, Quantity, Violation,
};
pub use weights::{Partition, PhiWeight, PsiWeight};
pub use weinstein::{
    coercivity_study, project_out_translations, weinstein_f, weinstein_h, CoercivityReport, CoercivitySample,
    WeinsteinF,
};

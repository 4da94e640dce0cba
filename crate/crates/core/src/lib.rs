//! Separation of amplitude and phase variation in collections of 1-D point
//! processes.
//!
//! The estimation pipeline smooths each observed pattern into a diffuse
//! conditional mean measure, takes the Frechet-Wasserstein barycenter of
//! the smoothed measures as the structural mean estimate, reads warp and
//! registration maps off quantile/CDF compositions, and registers the
//! patterns by pushing them through the registration maps. Simulators for
//! warped Poisson (Cox) scenarios and Monte-Carlo verification harnesses
//! round out the crate.

pub mod error;
mod interp;
pub mod measure;
pub mod transport;
pub mod smoothing;
pub mod frechet;
pub mod registration;
pub mod simulation;
pub mod evaluation;
pub mod io;

pub use error::{Error, Result};
pub use frechet::{arithmetic_mean, barycenter, frechet_functional, BarycenterResult};
pub use measure::{
    grid_tolerance, DiffuseMeasure, EmpiricalMeasure, Interval, Measure1d, PointPattern,
    RescaleAffine, DEFAULT_GRID,
};
pub use registration::{
    estimate_warps, pipeline, register, BandwidthRule, KernelPolicy, RegistrationOutput,
};
pub use smoothing::{
    default_bandwidth, lemma_bound, smooth_atom, smooth_pattern, BaseKernel, KernelSpec,
    SmoothedAtom,
};
pub use transport::{
    geodesic, optimal_map, push_forward_measure, push_forward_pattern, wasserstein1, wasserstein2,
    wasserstein2_empirical_oracle, WarpMap,
};

//! Center expansions and endpoint behavior of the integrals.

mod fit;
mod limits;
mod series;

pub use fit::{
    endpoint_fit, endpoint_fit_with, fit_model, infinity_exponent_fit, EndpointFit, FitModel, FitOptions,
    InfinityFit, INFINITY_CORRECTIONS,
};
pub use limits::{endpoint_samples, f_limits, End, EndLimit, FLimits, LIMIT_SAMPLES};
pub use series::{
    center_expansion, center_expansion_exact, forward_map, reverse_series, to_rational, Coefficient, PowerSeries,
    MAX_REVERSION_ORDER,
};

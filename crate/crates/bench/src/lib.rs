//! Fixed inputs shared by the benchmarks.

use igcx_core::complexity::tau_grid;
use igcx_core::{
    CorrelationCoefficient, GeodesicConfig, IgcConfig, ModelParams3, ModelParams4,
};

pub fn correlation() -> CorrelationCoefficient {
    CorrelationCoefficient::new(0.5).expect("valid correlation")
}

pub fn reduced_point() -> ModelParams3 {
    ModelParams3::new(0.3, -1.2, 0.8, correlation()).expect("valid point")
}

pub fn full_point() -> ModelParams4 {
    ModelParams4::new(0.3, 1.1, -1.2, 0.8, correlation()).expect("valid point")
}

/// Canonical geodesic on `[0, 10]` with 1001 output nodes.
pub fn geodesic() -> GeodesicConfig {
    GeodesicConfig::new(correlation(), 1.0, 1.0, -1.0, 10.0, 1001).expect("valid config")
}

/// Canonical IGC configuration on a log grid reaching `tau = 1e4`.
pub fn igc(points: usize) -> IgcConfig {
    IgcConfig::new(0.5, 1.0, 1.0, tau_grid(1e-2, 1e4, points, true)).expect("valid config")
}

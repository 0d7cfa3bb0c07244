//! Criterion benchmarks for the bracket engine and the asymptotic fits.
//! The benches live in `benches/`; this library only holds shared setup.

use wpvol_core::bracket::EngineConfig;

/// Single-worker configuration, so timings do not depend on the host.
pub fn serial_config() -> EngineConfig {
    EngineConfig {
        workers: 1,
        ..EngineConfig::default()
    }
}

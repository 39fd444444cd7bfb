//! Replicated experiments over the generator and the coupling.
//!
//! Each experiment draws its replicas from dedicated RNG streams (see
//! [`crate::streams`]), so reports are reproducible for a given seed and
//! independent of worker count.

mod concentration;
mod coupled;
mod fit;
mod scan;

pub use concentration::{
    arrival_concentration, degree_envelope, vertex_count_concentration, ArrivalBandReport,
    EnvelopeReport, EnvelopeRow, VertexBandReport, DEFAULT_ARRIVAL_HORIZON_FACTOR,
};
pub use coupled::{
    coupling_distribution_check, monotone_suite, tv_check, CollapseVariant,
    DistributionCheckReport, MonotoneReport, TvReport,
};
pub use fit::{two_sample_chi_square, ChiSquareReport, ExponentFit, FitPoint};
pub use scan::{
    exponent_scan, inverse_relation_check, multi_exponent_scan, InverseRelationReport,
    ScanConfig, ScanStatistic,
};

use crate::error::Error;
use crate::Result;

/// Runs `task` on a dedicated rayon pool of `workers` threads, or on the
/// global pool when `workers` is zero.
fn with_workers<T: Send>(workers: usize, task: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(task());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config(format!("worker pool: {e}")))?;
    Ok(pool.install(task))
}

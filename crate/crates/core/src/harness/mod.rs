//! Monte Carlo experiments around the soft edge.
//!
//! Every experiment is a pure function of its configuration: trial `t`
//! draws from the stream [`trial_rng`](crate::matrix_lab::trial_rng)`(seed, t)`,
//! so results do not depend on the number of worker threads.

mod config;
mod cutoff;
mod ensemble;
mod ks;
mod locallaw;
pub mod output;
mod probe;
mod rigidity;

pub use config::{parse_population, Comparison, ExperimentConfig, PopulationConfig, Statistic};
pub use cutoff::{cutoff_decompose, cutoff_ensemble, cutoff_verify, CutoffEnsembleReport, CutoffReport, CutoffSplit};
pub use ensemble::{run_edge_ensemble, trial_record, EnsembleRun, TrialRecord};
pub use ks::{ks_against_tw, ks_one_sample, two_sample_ks, KsReport};
pub use locallaw::{locallaw_scan, pi_diagonal, LocalLawConfig, LocalLawPoint, LocalLawReport};
pub use probe::{necessary_probe, wilson_interval, ProbeRow, TailProbeReport};
pub use rigidity::{rigidity_check, RigidityReport};

/// Maps `f` over `0..count`, in parallel when the `parallel` feature is on.
/// The output order is the index order either way.
pub(crate) fn map_trials<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

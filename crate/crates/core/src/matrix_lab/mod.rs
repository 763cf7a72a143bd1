//! Entry distributions, sampling, eigensolvers and the linearized resolvent.

pub mod dense;
pub mod dist;
pub mod rng;
pub mod green;
pub mod sample;

pub use dense::{lanczos_top, svd, tridiagonal_eigen, Mat, Svd};
pub use dist::{EntryDistribution, EntryKind, TailClass};
pub use green::{green_function_at, GreenBlocks, GreenEvaluation, Resolvent};
pub use rng::{derive_seed, trial_rng};
pub use sample::{
    eigens, largest_entry_event, linearized_h, read_matrix, sample_entries, sample_entries_stream, write_matrix,
    CovarianceModel, EigenMethod, EigenSpectrum, SampleMatrix, Witness,
};

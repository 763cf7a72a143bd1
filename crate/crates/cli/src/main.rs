//! `rmt-edge`: command-line front end.
//!
//! Exit codes: 0 on success, 2 on invalid input (including usage errors),
//! 3 on numerical failure.
// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rmt_edge::matrix_lab::EntryDistribution;

#[derive(Debug, Parser)]
#[command(name = "rmt-edge", version, about = "Soft-edge toolkit for deformed sample covariance matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Population and shape of the model.
#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Population: `null` (σ ≡ 1), `two:σa,σb,w` (σa on a fraction w,
    /// σb on the rest), or a JSON file `{"sigmas": [..]}` /
    /// `{"atoms": [{"sigma": s, "weight": w}, ..], "M": m}`.
    #[arg(long, default_value = "null")]
    pub pop: String,
    /// Number of rows M (population size). Taken from the file when omitted.
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Aspect ratio d = N/M; N is rounded to the nearest integer.
    #[arg(long, conflicts_with = "n")]
    pub d: Option<f64>,
    /// Number of columns N.
    #[arg(long = "N")]
    pub n: Option<usize>,
}

/// Options shared by the Monte Carlo commands.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// Entry law: `gaussian`, `rademacher`, `heavy` or `pareto:a` (a > 2).
    #[arg(long, default_value = "gaussian")]
    pub dist: EntryDistribution,
    /// Number of trials.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Master seed; trial t uses the ChaCha8 stream t of this seed.
    #[arg(long)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory; without it the main result goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Soft edge λ_r, γ_0, regularity margin and support atlas as JSON
    /// (`edge.json` under --out).
    Edge {
        #[command(flatten)]
        model: ModelArgs,
        /// Regularity threshold on |1 + m2c(λ_r) σ_1|.
        #[arg(long, default_value_t = 0.01)]
        tau: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Limiting density on a uniform grid as CSV `E,rho` (`density.csv`).
    Density {
        #[command(flatten)]
        model: ModelArgs,
        /// Left end of the grid (default 0).
        #[arg(long)]
        e_lo: Option<f64>,
        /// Right end of the grid (default 1.1 λ_r).
        #[arg(long)]
        e_hi: Option<f64>,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Smallest η used before extrapolating to the real axis.
        #[arg(long, default_value_t = 1e-6)]
        eta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tracy-Widom distribution function F_β(s), printed as a number.
    Tw {
        /// β = 1 or 2.
        #[arg(long, default_value_t = 1)]
        order: u8,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        /// Gauss-Legendre nodes; the value is checked against twice as many.
        #[arg(long, default_value_t = 128)]
        nodes: usize,
    },
    /// Table of F1 and F2 as CSV `s,F1,F2` (`tw_table.csv`).
    TwTable {
        #[arg(long, default_value_t = -8.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ensemble of rescaled top eigenvalues. Writes `trials.csv`
    /// (`trial,lambda1,rescaled,triggered`) and `report.json`; without
    /// --out the CSV goes to stdout.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Record the top k eigenvalues (k ≤ 8).
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Experiment config JSON; replaces the model and run flags except
        /// --threads and --out.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the first sampled matrix as `matrix.bin`
        /// (16-byte header `QMATF64\0`, M, N as u32 LE, then row-major f64 LE).
        #[arg(long)]
        dump_matrix: bool,
        /// Add wall-clock timing to `report.json`.
        #[arg(long)]
        timing: bool,
    },
    /// KS distance of rescaled λ1 to F1, or to a second ensemble with
    /// --against (`universality.json`).
    Universality {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Comparison law: `tw1` or an entry law for a two-sample test.
        #[arg(long, default_value = "tw1")]
        against: String,
        /// Pass threshold for the KS statistic.
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
    },
    /// Estimates of P(λ1 ≥ s) along a ladder of N with Wilson intervals
    /// (`probe.json`).
    ProbeTail {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Level s (default 2 λ_r).
        #[arg(long)]
        s: Option<f64>,
        /// Comma-separated N values.
        #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
        ladder: Vec<usize>,
        /// τ of the large-entry witness.
        #[arg(long, default_value_t = 0.99)]
        tau: f64,
    },
    /// Normalized distances of edge eigenvalues to classical locations
    /// (`rigidity.json`).
    Rigidity {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Window {j : γ_j ≥ λ_r - c1}.
        #[arg(long, default_value_t = 0.5)]
        c1: f64,
    },
    /// Local-law errors of G(z) on a spectral grid (`locallaw.json`).
    Locallaw {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, allow_hyphen_values = true)]
        e_lo: Option<f64>,
        #[arg(long)]
        e_hi: Option<f64>,
        /// Smallest η, at least ln N / N.
        #[arg(long)]
        eta_lo: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        eta_hi: f64,
        #[arg(long, default_value_t = 5)]
        n_e: usize,
        #[arg(long, default_value_t = 5)]
        n_eta: usize,
        /// Random index pairs per grid point.
        #[arg(long, default_value_t = 200)]
        pairs: usize,
    },
    /// Entry cutoff at N^(1/2-ε): large-entry counts, reconstruction and
    /// the λ1 gap (`cutoff.json`).
    Cutoff {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

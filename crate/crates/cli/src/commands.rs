use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use rmt_edge::deformed_mp::io::{population_from_json, write_density_csv};
use rmt_edge::deformed_mp::{DeformedMp, EdgeReport, PopulationSpectrum, SolverConfig, SpectralDomain};
use rmt_edge::error::{Error, Result};
use rmt_edge::harness::output::{write_json, write_trials_csv, RunReport};
use rmt_edge::harness::{
    cutoff_ensemble, ks_against_tw, locallaw_scan, necessary_probe, parse_population, rigidity_check,
    run_edge_ensemble, two_sample_ks, ExperimentConfig, LocalLawConfig, PopulationConfig, Statistic,
};
use rmt_edge::matrix_lab::{derive_seed, sample_entries_stream, write_matrix, CovarianceModel, EntryDistribution};
use rmt_edge::tracy_widom::{tw_cdf, QuadratureGrid, TwOrder, TwTable, DEFAULT_SPAN};

use crate::{Command, ModelArgs, RunArgs};

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

/// Population, `M` and `N` from the model flags.
fn resolve(args: &ModelArgs) -> Result<(PopulationConfig, PopulationSpectrum, usize)> {
    let spec = args.pop.trim();
    let (config, pop) = if spec == "null" || spec.starts_with("two:") {
        let m = args.m.ok_or_else(|| invalid(format!("--M is required with --pop {spec}")))?;
        (PopulationConfig::Shorthand(spec.to_string()), parse_population(spec, m)?)
    } else {
        let text = if spec.starts_with('{') {
            spec.to_string()
        } else {
            fs::read_to_string(spec).map_err(|e| invalid(format!("population file {spec}: {e}")))?
        };
        let pop = population_from_json(&text)?;
        if let Some(m) = args.m {
            if m != pop.len() {
                return Err(invalid(format!("--M {m} does not match the {} entries of {spec}", pop.len())));
            }
        }
        (PopulationConfig::Atoms { atoms: pop.atoms().to_vec() }, pop)
    };
    let m = pop.len();
    let n = match (args.n, args.d) {
        (Some(n), _) => n,
        (None, Some(d)) if d > 0.0 && d.is_finite() => (d * m as f64).round() as usize,
        (None, Some(d)) => return Err(invalid(format!("--d must be positive, got {d}"))),
        (None, None) => m,
    };
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    Ok((config, pop, n))
}

fn experiment(model: &ModelArgs, run: &RunArgs) -> Result<ExperimentConfig> {
    let (population, pop, n) = resolve(model)?;
    let mut cfg = ExperimentConfig::new(pop.len(), n, run.dist.clone(), run.trials, run.seed);
    cfg.population = population;
    cfg.validate()?;
    Ok(cfg)
}

fn set_threads(threads: Option<usize>) -> Result<()> {
    if let Some(k) = threads {
        if k == 0 {
            return Err(invalid("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| invalid(format!("thread pool: {e}")))?;
    }
    Ok(())
}

/// Writes `bytes` to `dir/name`, or to stdout without a directory.
fn emit(dir: Option<&Path>, name: &str, bytes: &[u8]) -> Result<()> {
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), bytes)?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_json(&mut buf, value)?;
    Ok(buf)
}

#[derive(Serialize)]
struct EdgeOutput<'a> {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    d: f64,
    #[serde(flatten)]
    edge: &'a EdgeReport,
}

#[derive(Serialize)]
struct UniversalityOutput {
    against: String,
    lambda_r: f64,
    gamma0: f64,
    mean_rescaled: f64,
    mean_rescaled_against: Option<f64>,
    ks: rmt_edge::harness::KsReport,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

pub(crate) fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Edge { model, tau, out } => {
            let (_, pop, n) = resolve(&model)?;
            let cm = CovarianceModel::new(pop, n)?;
            let edge = cm.deformed_mp().edge_report(tau)?;
            let output = EdgeOutput { m: cm.m(), n, d: cm.ratio.d(), edge: &edge };
            emit(out.as_deref(), "edge.json", &json(&output)?)
        }
        Command::Density { model, e_lo, e_hi, points, eta, out } => {
            let (_, pop, n) = resolve(&model)?;
            let dmp = DeformedMp::new(&pop, CovarianceModel::new(pop.clone(), n)?.ratio);
            if points < 2 {
                return Err(invalid("--points must be at least 2"));
            }
            let lo = e_lo.unwrap_or(0.0);
            let hi = match e_hi {
                Some(h) => h,
                None => 1.1 * dmp.edge_report_unchecked(0.0)?.lambda_r,
            };
            if !(hi > lo) {
                return Err(invalid("density grid needs e_lo < e_hi"));
            }
            let cfg = SolverConfig::default();
            let rows = (0..points)
                .map(|k| {
                    let e = lo + (hi - lo) * k as f64 / (points - 1) as f64;
                    Ok((e, dmp.density_at(e, eta, &cfg)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut buf = Vec::new();
            write_density_csv(&mut buf, &rows)?;
            emit(out.as_deref(), "density.csv", &buf)
        }
        Command::Tw { order, s, nodes } => {
            let grid = QuadratureGrid::new(nodes, DEFAULT_SPAN)?;
            let value = tw_cdf(s, TwOrder::new(order)?, &grid)?;
            println!("{value}");
            Ok(())
        }
        Command::TwTable { lo, hi, step, out } => {
            let table = TwTable::build(lo, hi, step, &QuadratureGrid::default())?;
            let mut buf = Vec::new();
            writeln!(buf, "s,F1,F2")?;
            for (s, f1, f2) in table.rows() {
                writeln!(buf, "{s},{f1},{f2}")?;
            }
            emit(out.as_deref(), "tw_table.csv", &buf)
        }
        Command::Simulate { model, run, k, config, dump_matrix, timing } => {
            set_threads(run.threads)?;
            let cfg = match config {
                Some(path) => ExperimentConfig::from_json(&fs::read_to_string(&path)?)?,
                None => {
                    let mut cfg = experiment(&model, &run)?;
                    cfg.statistic = if k == 1 { Statistic::Lambda1 } else { Statistic::Topk(k) };
                    cfg.validate()?;
                    cfg
                }
            };
            let started = Instant::now();
            let result = run_edge_ensemble(&cfg)?;
            let mut csv = Vec::new();
            write_trials_csv(&mut csv, &result.records)?;
            match run.out.as_deref() {
                None => {
                    if dump_matrix {
                        return Err(invalid("--dump-matrix needs --out"));
                    }
                    emit(None, "trials.csv", &csv)
                }
                Some(dir) => {
                    emit(Some(dir), "trials.csv", &csv)?;
                    let mut report = RunReport::new(&cfg, &result, None);
                    if timing {
                        report.timing_seconds = Some(started.elapsed().as_secs_f64());
                    }
                    emit(Some(dir), "report.json", &json(&report)?)?;
                    if dump_matrix {
                        let x = sample_entries_stream(&cfg.dist, cfg.m, cfg.n, cfg.master_seed, 0)?;
                        let mut buf = Vec::new();
                        write_matrix(&mut buf, x.x())?;
                        emit(Some(dir), "matrix.bin", &buf)?;
                    }
                    Ok(())
                }
            }
        }
        Command::Universality { model, run, against, threshold } => {
            set_threads(run.threads)?;
            let cfg = experiment(&model, &run)?;
            let a = run_edge_ensemble(&cfg)?;
            let (ks, other_mean) = if against == "tw1" {
                (ks_against_tw(&a.records, TwOrder::One, threshold)?, None)
            } else {
                let dist: EntryDistribution = against.parse()?;
                let mut other = cfg.clone();
                other.dist = dist;
                other.master_seed = derive_seed(cfg.master_seed, "against");
                let b = run_edge_ensemble(&other)?;
                (two_sample_ks(&a.records, &b.records, threshold)?, Some(mean(&b.rescaled_lambda1())))
            };
            let output = UniversalityOutput {
                against,
                lambda_r: a.edge.lambda_r,
                gamma0: a.edge.gamma0,
                mean_rescaled: mean(&a.rescaled_lambda1()),
                mean_rescaled_against: other_mean,
                ks,
            };
            emit(run.out.as_deref(), "universality.json", &json(&output)?)
        }
        Command::ProbeTail { model, run, s, ladder, tau } => {
            set_threads(run.threads)?;
            let mut cfg = experiment(&model, &run)?;
            cfg.witness_tau = tau;
            let report = necessary_probe(&cfg, s, &ladder)?;
            emit(run.out.as_deref(), "probe.json", &json(&report)?)
        }
        Command::Rigidity { model, run, c1 } => {
            set_threads(run.threads)?;
            let cfg = experiment(&model, &run)?;
            let report = rigidity_check(&cfg, c1)?;
            emit(run.out.as_deref(), "rigidity.json", &json(&report)?)
        }
        Command::Locallaw { model, run, e_lo, e_hi, eta_lo, eta_hi, n_e, n_eta, pairs } => {
            set_threads(run.threads)?;
            let cfg = experiment(&model, &run)?;
            let edge = cfg.model()?.deformed_mp().edge_report(cfg.tau)?;
            let floor = (cfg.n as f64).ln() / cfg.n as f64;
            let lo = e_lo.unwrap_or_else(|| edge.atlas.intervals.first().map_or(0.0, |iv| iv.0));
            let hi = e_hi.unwrap_or(edge.lambda_r + 1.0);
            let domain = SpectralDomain::new(lo, hi, eta_lo.unwrap_or(floor.max(0.01)), eta_hi, n_e, n_eta)?;
            let mut ll = LocalLawConfig::new(domain);
            ll.pairs = pairs;
            let report = locallaw_scan(&cfg, &ll)?;
            emit(run.out.as_deref(), "locallaw.json", &json(&report)?)
        }
        Command::Cutoff { model, run, epsilon } => {
            set_threads(run.threads)?;
            let cfg = experiment(&model, &run)?;
            let report = cutoff_ensemble(&cfg, epsilon)?;
            emit(run.out.as_deref(), "cutoff.json", &json(&report)?)
        }
    }
}

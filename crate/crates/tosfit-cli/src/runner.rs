//! Experiment execution across seeds, trace persistence and aggregation.
//!
//! Seeds run in parallel up to a worker budget; every seed owns its state
//! and RNG streams, so the per-seed CSVs are byte-identical across reruns
//! regardless of scheduling. Floats are written with 17 significant digits
//! and files use LF line endings.

use crate::config::{Algorithm, EnvSpec, ExperimentSpec};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use tosfit::algo::{
    run_ac, run_exact_ts, run_exact_vbos, run_pgts, run_sac, run_tosfit, run_unguided, RunConfig,
    Trace,
};
use tosfit::env::{
    pretrain_sequence, pretrain_tabular, Environment, FiniteGaussianBandit, PriorKind,
    PriorTarget, SequenceLinearEnv,
};
use tosfit::policy::{Policy, SequencePolicy, TabularPolicy};
use tosfit::rng::{SeedPlan, Stream};

#[derive(Debug)]
pub enum RunnerError {
    /// All seeds failed, or the output could not be written.
    Runtime(String),
}

impl std::fmt::Display for RunnerError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunnerError::Runtime(msg) => write!(f, "runtime failure: {msg}"),
        }
    }
}

impl std::error::Error for RunnerError {}

pub struct RunSummary {
    pub per_seed_files: Vec<PathBuf>,
    pub aggregate_file: PathBuf,
    pub failed_seeds: Vec<(u64, String)>,
}

/// Formats one float with 17 significant digits.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn trace_csv(seed: u64, trace: &Trace) -> String {
    let mut out = String::from("seed,step,point_hash,reward,best_seen\n");
    for o in &trace.observations {
        let _ = writeln!(
            out,
            "{seed},{},{:016x},{},{}",
            o.step,
            o.point_hash,
            fmt_f64(o.reward),
            fmt_f64(o.best_seen)
        );
    }
    out
}

fn aggregate_csv(traces: &[&Trace]) -> String {
    let mut out = String::from("step,mean_best_seen,se\n");
    if traces.is_empty() {
        return out;
    }
    let rows = traces[0].observations.len();
    let n = traces.len() as f64;
    for i in 0..rows {
        let step = traces[0].observations[i].step;
        let values: Vec<f64> = traces.iter().map(|t| t.observations[i].best_seen).collect();
        let mean = values.iter().sum::<f64>() / n;
        let se = if traces.len() > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        let _ = writeln!(out, "{step},{},{}", fmt_f64(mean), fmt_f64(se));
    }
    out
}

/// The policy an experiment starts from, pre-fit to the configured prior.
enum BasePolicy {
    Tabular(TabularPolicy),
    Sequence(SequencePolicy),
    None,
}

fn build_base_policy(spec: &ExperimentSpec) -> Result<BasePolicy, RunnerError> {
    if matches!(spec.algorithm, Algorithm::ExactTs | Algorithm::ExactVbos) {
        return Ok(BasePolicy::None);
    }
    let mut rng = SeedPlan::new(spec.run.master_seed, u64::MAX).rng(Stream::Pretrain);
    match &spec.env {
        EnvSpec::Bandit { arms, features, noise, env_seed } => {
            let env = FiniteGaussianBandit::new(*arms, *features, 0.0, *noise, *env_seed)
                .map_err(|e| RunnerError::Runtime(e.to_string()))?;
            let mut policy = TabularPolicy::new(*arms);
            if spec.prior != PriorKind::Uniform {
                let prior = env.prior_spec(spec.prior);
                let PriorTarget::Categorical(target) = &prior.target else { unreachable!() };
                pretrain_tabular(&mut policy, target, spec.pretrain_iters)
                    .map_err(|e| RunnerError::Runtime(e.to_string()))?;
            }
            Ok(BasePolicy::Tabular(policy))
        }
        EnvSpec::SeqLin { length, noise, env_seed } => {
            let env = SequenceLinearEnv::new(*length, *noise, *env_seed)
                .map_err(|e| RunnerError::Runtime(e.to_string()))?;
            let mut policy = SequencePolicy::new(2, *length);
            if spec.prior != PriorKind::Uniform {
                let prior = env.prior_spec(spec.prior);
                let PriorTarget::BitProduct(p_one) = &prior.target else { unreachable!() };
                policy.init_gaussian(0.05, &mut rng);
                let report = pretrain_sequence(&mut policy, p_one, spec.pretrain_iters, &mut rng)
                    .map_err(|e| RunnerError::Runtime(e.to_string()))?;
                if !report.converged {
                    eprintln!(
                        "warning: pre-training did not reach the total-variation band (tv = {:?})",
                        report.tv
                    );
                }
            }
            Ok(BasePolicy::Sequence(policy))
        }
    }
}

fn run_seed<E, P>(
    algorithm: Algorithm,
    env: &E,
    base: &P,
    cfg: &RunConfig,
) -> tosfit::Result<Trace>
where
    E: Environment,
    P: Policy<Point = E::Point> + Clone,
{
    match algorithm {
        Algorithm::Tosfit => run_tosfit(env, &mut base.clone(), cfg),
        Algorithm::Unguided => run_unguided(env, base, cfg),
        Algorithm::Pgts => run_pgts(env, base, cfg),
        Algorithm::Ac => run_ac(env, &mut base.clone(), cfg),
        Algorithm::Sac => {
            let alpha = cfg.sac_alpha.expect("validated at parse time");
            run_sac(env, &mut base.clone(), cfg, alpha)
        }
        Algorithm::ExactTs | Algorithm::ExactVbos => unreachable!("handled separately"),
    }
}

fn execute_one(spec: &ExperimentSpec, base: &BasePolicy, seed: u64) -> tosfit::Result<Trace> {
    let mut cfg = spec.run.clone();
    cfg.seed = seed;
    match (&spec.env, base) {
        (EnvSpec::Bandit { arms, features, noise, env_seed }, _) => {
            let env = FiniteGaussianBandit::new(*arms, *features, 0.0, *noise, *env_seed)?;
            match (spec.algorithm, base) {
                (Algorithm::ExactTs, _) => run_exact_ts(&env, &cfg),
                (Algorithm::ExactVbos, _) => run_exact_vbos(&env, &cfg),
                (alg, BasePolicy::Tabular(p)) => run_seed(alg, &env, p, &cfg),
                _ => unreachable!("bandit experiments use tabular policies"),
            }
        }
        (EnvSpec::SeqLin { length, noise, env_seed }, _) => {
            let env = SequenceLinearEnv::new(*length, *noise, *env_seed)?;
            match (spec.algorithm, base) {
                (Algorithm::ExactTs, _) => run_exact_ts(&env, &cfg),
                (Algorithm::ExactVbos, _) => run_exact_vbos(&env, &cfg),
                (alg, BasePolicy::Sequence(p)) => run_seed(alg, &env, p, &cfg),
                _ => unreachable!("sequence experiments use sequence policies"),
            }
        }
    }
}

/// Runs every seed (in parallel up to `workers`), writes one CSV per seed
/// and an aggregate CSV, and reports per-seed failures.
pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> Result<RunSummary, RunnerError> {
    let base = build_base_policy(spec)?;
    let out_dir = Path::new(&spec.output);
    fs::create_dir_all(out_dir)
        .map_err(|e| RunnerError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<tosfit::Result<Trace>>>> =
        Mutex::new((0..spec.seeds.len()).map(|_| None).collect());
    let workers = workers.max(1).min(spec.seeds.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= spec.seeds.len() {
                    break;
                }
                let outcome = execute_one(spec, &base, spec.seeds[idx]);
                results.lock().unwrap()[idx] = Some(outcome);
            });
        }
    });

    let results = results.into_inner().unwrap();
    let mut per_seed_files = Vec::new();
    let mut failed = Vec::new();
    let mut ok_traces: Vec<(u64, Trace)> = Vec::new();
    for (idx, outcome) in results.into_iter().enumerate() {
        let seed = spec.seeds[idx];
        match outcome.expect("every index is claimed by a worker") {
            Ok(trace) => {
                let path = out_dir.join(format!("seed-{seed:03}.csv"));
                fs::write(&path, trace_csv(seed, &trace))
                    .map_err(|e| RunnerError::Runtime(format!("writing {}: {e}", path.display())))?;
                per_seed_files.push(path);
                ok_traces.push((seed, trace));
            }
            Err(e) => failed.push((seed, e.to_string())),
        }
    }
    for (seed, msg) in &failed {
        eprintln!("warning: seed {seed} failed: {msg}");
    }
    if ok_traces.is_empty() {
        return Err(RunnerError::Runtime("all seeds failed".into()));
    }
    let aggregate_file = out_dir.join("aggregate.csv");
    let refs: Vec<&Trace> = ok_traces.iter().map(|(_, t)| t).collect();
    fs::write(&aggregate_file, aggregate_csv(&refs))
        .map_err(|e| RunnerError::Runtime(format!("writing aggregate: {e}")))?;
    Ok(RunSummary { per_seed_files, aggregate_file, failed_seeds: failed })
}

/// Writes the full `(hash, point, reward)` listing of an environment.
pub fn enumerate_to_csv<E: Environment>(env: &E, out: &Path) -> Result<usize, RunnerError> {
    let listed = env.enumerate().map_err(|e| RunnerError::Runtime(e.to_string()))?;
    let mut body = String::from("point_hash,point,reward\n");
    for (x, _, r) in &listed {
        let _ = writeln!(
            body,
            "{:016x},{},{}",
            tosfit::point::Point::hash64(x),
            tosfit::point::Point::label(x),
            fmt_f64(*r)
        );
    }
    fs::write(out, body)
        .map_err(|e| RunnerError::Runtime(format!("writing {}: {e}", out.display())))?;
    Ok(listed.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_17_significant_digits() {
        assert_eq!(fmt_f64(0.25), "2.5000000000000000e-1");
        assert_eq!(fmt_f64(1.0 / 3.0), "3.3333333333333331e-1");
    }

    #[test]
    fn aggregate_se_is_sample_std_over_sqrt_n() {
        let mk = |best: f64| Trace {
            observations: vec![tosfit::algo::ObsRecord {
                step: 1,
                point_hash: 0,
                reward: best,
                best_seen: best,
            }],
            steps: vec![],
        };
        let traces = [mk(1.0), mk(2.0), mk(3.0)];
        let refs: Vec<&Trace> = traces.iter().collect();
        let csv = aggregate_csv(&refs);
        let line = csv.lines().nth(1).unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        let mean: f64 = fields[1].parse().unwrap();
        let se: f64 = fields[2].parse().unwrap();
        assert!((mean - 2.0).abs() < 1e-15);
        // sample std = 1, n = 3.
        assert!((se - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }
}

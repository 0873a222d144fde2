//! Experiment configuration: a flat INI-style document with
//! `[experiment]`, `[env]` and `[run]` sections.
//!
//! Unknown sections or keys, duplicate keys, type mismatches and
//! constraint violations are all rejected at parse time with the offending
//! line or field named.

use std::collections::BTreeMap;
use std::fmt;
use tosfit::algo::RunConfig;
use tosfit::env::PriorKind;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Tosfit,
    Unguided,
    Pgts,
    ExactTs,
    ExactVbos,
    Ac,
    Sac,
}

impl Algorithm {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "tosfit" => Self::Tosfit,
            "unguided" => Self::Unguided,
            "pgts" => Self::Pgts,
            "exact_ts" => Self::ExactTs,
            "exact_vbos" => Self::ExactVbos,
            "ac" => Self::Ac,
            "sac" => Self::Sac,
            other => {
                return Err(ConfigError(format!(
                    "unknown algorithm '{other}' (expected tosfit, unguided, pgts, exact_ts, exact_vbos, ac or sac)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Tosfit => "tosfit",
            Self::Unguided => "unguided",
            Self::Pgts => "pgts",
            Self::ExactTs => "exact_ts",
            Self::ExactVbos => "exact_vbos",
            Self::Ac => "ac",
            Self::Sac => "sac",
        }
    }
}

/// Which benchmark environment to build.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvSpec {
    Bandit { arms: usize, features: usize, noise: f64, env_seed: u64 },
    SeqLin { length: usize, noise: f64, env_seed: u64 },
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub algorithm: Algorithm,
    pub env: EnvSpec,
    pub prior: PriorKind,
    pub pretrain_iters: usize,
    pub run: RunConfig,
    pub seeds: Vec<u64>,
    pub output: String,
}

/// One parsed section: key -> (line number, value).
#[derive(Default)]
struct Section {
    entries: BTreeMap<String, (usize, String)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(_, v)| v)
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                ConfigError(format!("field '{key}': cannot parse '{raw}'"))
            }),
        }
    }

    fn reject_leftovers(&self, section: &str) -> Result<()> {
        if let Some((key, (line, _))) = self.entries.iter().next() {
            return Err(ConfigError(format!(
                "unknown key '{key}' in [{section}] (line {line})"
            )));
        }
        Ok(())
    }
}

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| ConfigError(format!("line {line_no}: malformed section header")))?
                .trim()
                .to_string();
            if !["experiment", "env", "run"].contains(&name.as_str()) {
                return Err(ConfigError(format!("line {line_no}: unknown section [{name}]")));
            }
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError(format!("line {line_no}: expected 'key = value'")));
        };
        let section = current
            .as_ref()
            .ok_or_else(|| ConfigError(format!("line {line_no}: key outside any section")))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let entries = &mut sections.get_mut(section).unwrap().entries;
        if let Some((first_line, _)) = entries.get(&key) {
            return Err(ConfigError(format!(
                "duplicate key '{key}' in [{section}] (lines {first_line} and {line_no})"
            )));
        }
        entries.insert(key, (line_no, value));
    }
    Ok(sections)
}

fn parse_seeds(raw: &str) -> Result<Vec<u64>> {
    let raw = raw.trim();
    if let Some((a, b)) = raw.split_once("..") {
        let lo: u64 =
            a.trim().parse().map_err(|_| ConfigError(format!("bad seed range start '{a}'")))?;
        let hi: u64 =
            b.trim().parse().map_err(|_| ConfigError(format!("bad seed range end '{b}'")))?;
        if hi < lo {
            return Err(ConfigError(format!("empty seed range {lo}..{hi}")));
        }
        return Ok((lo..=hi).collect());
    }
    let seeds: Result<Vec<u64>> = raw
        .split(',')
        .map(|s| {
            s.trim().parse::<u64>().map_err(|_| ConfigError(format!("bad seed '{}'", s.trim())))
        })
        .collect();
    let seeds = seeds?;
    if seeds.is_empty() {
        return Err(ConfigError("seed list is empty".into()));
    }
    Ok(seeds)
}

/// Parses and fully validates an experiment document, filling defaults
/// (`burn_in = 16`, `grad_steps = 1`, `gen_batch = 16`, `obs_batch = 1`,
/// `bonus = 4.0`, `sigma_nar = 0.01`).
pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let mut sections = split_sections(text)?;

    let mut experiment = sections.remove("experiment").unwrap_or_default();
    let algorithm = Algorithm::parse(
        &experiment
            .take("algorithm")
            .ok_or_else(|| ConfigError("missing 'algorithm' in [experiment]".into()))?,
    )?;
    let seeds = match experiment.take("seeds") {
        Some(raw) => parse_seeds(&raw)?,
        None => (0..=24).collect(),
    };
    let output = experiment.take("output").unwrap_or_else(|| "runs".to_string());
    let master_seed: u64 = experiment.parsed("master_seed")?.unwrap_or(0);
    experiment.reject_leftovers("experiment")?;

    let mut env_section = sections.remove("env").unwrap_or_default();
    let env_name = env_section
        .take("name")
        .ok_or_else(|| ConfigError("missing 'name' in [env]".into()))?;
    let noise: f64 = env_section.parsed("noise")?.unwrap_or(0.0);
    let env_seed: u64 = env_section.parsed("env_seed")?.unwrap_or(7);
    let env = match env_name.as_str() {
        "bandit" => EnvSpec::Bandit {
            arms: env_section.parsed("arms")?.unwrap_or(64),
            features: env_section.parsed("features")?.unwrap_or(8),
            noise,
            env_seed,
        },
        "seqlin" => {
            EnvSpec::SeqLin { length: env_section.parsed("length")?.unwrap_or(12), noise, env_seed }
        }
        other => {
            return Err(ConfigError(format!(
                "unknown environment '{other}' (expected bandit or seqlin)"
            )))
        }
    };
    let prior = match env_section.take("prior").as_deref() {
        None | Some("uniform") => PriorKind::Uniform,
        Some("biased") => PriorKind::Biased,
        Some("anti") | Some("anti_biased") => PriorKind::AntiBiased,
        Some(other) => {
            return Err(ConfigError(format!(
                "unknown prior '{other}' (expected uniform, biased or anti)"
            )))
        }
    };
    let pretrain_iters: usize = env_section.parsed("pretrain_iters")?.unwrap_or(3000);
    env_section.reject_leftovers("env")?;

    let mut run_section = sections.remove("run").unwrap_or_default();
    let mut run = RunConfig {
        t_steps: run_section.parsed("steps")?.unwrap_or(300),
        burn_in: run_section.parsed("burn_in")?.unwrap_or(16),
        grad_steps: run_section.parsed("grad_steps")?.unwrap_or(1),
        gen_batch: run_section.parsed("gen_batch")?.unwrap_or(16),
        obs_batch: run_section.parsed("obs_batch")?.unwrap_or(1),
        lr: run_section.parsed("lr")?.unwrap_or(0.05),
        bonus: run_section.parsed("bonus")?.unwrap_or(4.0),
        sigma_nar: run_section.parsed("sigma_nar")?.unwrap_or(0.01),
        sac_alpha: run_section.parsed("sac_alpha")?,
        pool_size: run_section.parsed("pool_size")?.unwrap_or(1000),
        master_seed,
        seed: 0,
        track_gap: run_section.parsed("track_gap")?.unwrap_or(false),
    };
    run_section.reject_leftovers("run")?;
    run.seed = seeds[0];
    run.validate().map_err(|e| ConfigError(e.to_string()))?;

    if algorithm == Algorithm::Sac && run.sac_alpha.is_none() {
        return Err(ConfigError("algorithm 'sac' requires 'sac_alpha' in [run]".into()));
    }

    Ok(ExperimentSpec { algorithm, env, prior, pretrain_iters, run, seeds, output })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_installs_defaults() {
        let spec = parse_config("[experiment]\nalgorithm = tosfit\n[env]\nname = bandit\n").unwrap();
        assert_eq!(spec.run.burn_in, 16);
        assert_eq!(spec.run.grad_steps, 1);
        assert_eq!(spec.run.gen_batch, 16);
        assert_eq!(spec.run.obs_batch, 1);
        assert_eq!(spec.run.bonus, 4.0);
        assert_eq!(spec.run.sigma_nar, 0.01);
        assert_eq!(spec.seeds.len(), 25);
        assert_eq!(spec.seeds[0], 0);
        assert_eq!(spec.seeds[24], 24);
    }

    #[test]
    fn batch_constraint_rejected() {
        let err = parse_config(
            "[experiment]\nalgorithm = tosfit\n[env]\nname = bandit\n[run]\nobs_batch = 32\ngen_batch = 16\n",
        )
        .unwrap_err();
        assert!(err.0.contains("b <= B"), "message: {}", err.0);
    }

    #[test]
    fn duplicate_key_names_the_key() {
        let err =
            parse_config("[experiment]\nalgorithm = tosfit\nalgorithm = unguided\n").unwrap_err();
        assert!(err.0.contains("duplicate key 'algorithm'"), "message: {}", err.0);
    }

    #[test]
    fn unknown_key_names_line() {
        let err = parse_config("[experiment]\nalgorithm = tosfit\nbogus = 1\n[env]\nname = bandit\n")
            .unwrap_err();
        assert!(err.0.contains("unknown key 'bogus'"), "message: {}", err.0);
        assert!(err.0.contains("line 3"), "message: {}", err.0);
    }

    #[test]
    fn type_mismatch_names_the_field() {
        let err = parse_config(
            "[experiment]\nalgorithm = tosfit\n[env]\nname = bandit\n[run]\nsteps = many\n",
        )
        .unwrap_err();
        assert!(err.0.contains("'steps'"), "message: {}", err.0);
    }

    #[test]
    fn seed_forms() {
        let spec = parse_config(
            "[experiment]\nalgorithm = unguided\nseeds = 3,5,9\n[env]\nname = bandit\n",
        )
        .unwrap();
        assert_eq!(spec.seeds, vec![3, 5, 9]);
        let spec = parse_config(
            "[experiment]\nalgorithm = unguided\nseeds = 2..4\n[env]\nname = bandit\n",
        )
        .unwrap();
        assert_eq!(spec.seeds, vec![2, 3, 4]);
    }

    #[test]
    fn sac_needs_alpha() {
        let err = parse_config("[experiment]\nalgorithm = sac\n[env]\nname = bandit\n").unwrap_err();
        assert!(err.0.contains("sac_alpha"));
    }
}

//! Seeded batch certification.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{format_rational, parse_rational};
use crate::graph::Instance;
use crate::oracle::{OracleConfig, DEFAULT_MAX_EDGES};
use crate::tree::is_forest;
use crate::Rational;

use super::generate::{generate, BoundPolicy, Family, GenerateError, GeneratorSpec, WeightPolicy};
use super::run::{run_with, References, RunParams, RunReport, Solver};
use super::{strip_timing, REPORT_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchConfig {
    pub name: String,
    pub seed: u64,
    pub instances: usize,
    /// Instance `i` uses family `families[i % len]`.
    pub families: Vec<Family>,
    pub n_min: usize,
    pub n_max: usize,
    /// Cap on edges; families with a fixed edge count shrink `n` to fit.
    pub m_max: usize,
    /// One policy is drawn per instance.
    pub bounds: Vec<BoundPolicy>,
    pub weights: WeightPolicy,
    pub solvers: Vec<Solver>,
    /// Rounding runs once per value, written as decimals or `p/q`.
    pub eps: Vec<String>,
    /// Shuffle the greedy edge order with the instance seed.
    pub randomize_order: bool,
    /// Shuffle the weighted solver's vertex labels with the instance seed.
    pub relabel: bool,
    pub oracle_max_edges: usize,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            name: "default".into(),
            seed: 0,
            instances: 1000,
            families: Family::ALL.to_vec(),
            n_min: 1,
            n_max: 8,
            m_max: 14,
            bounds: vec![
                BoundPolicy::UniformRandom,
                BoundPolicy::Fixed { k: 1 },
                BoundPolicy::Fraction { num: 1, den: 2 },
            ],
            weights: WeightPolicy::None,
            solvers: vec![
                Solver::Add,
                Solver::Delete,
                Solver::Round,
                Solver::Weighted,
                Solver::Tree,
                Solver::Exact,
            ],
            eps: vec!["1/100".into()],
            randomize_order: true,
            relabel: false,
            oracle_max_edges: DEFAULT_MAX_EDGES,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("invalid eps `{0}`")]
    Eps(String),
    #[error("config lists no {0}")]
    Empty(&'static str),
    #[error("n_min {min} exceeds n_max {max}")]
    Range { min: usize, max: usize },
    #[error("instance {index}: {source}")]
    Generate { index: usize, source: GenerateError },
    #[error("thread pool: {0}")]
    Pool(String),
}

impl BatchConfig {
    pub fn instance_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_add(index as u64)
    }

    /// Generator settings of instance `index`.
    pub fn spec(&self, index: usize) -> GeneratorSpec {
        let seed = self.instance_seed(index);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_ba7c);
        let family = self.families[index % self.families.len()];
        let mut n_max = self.n_max;
        while n_max > self.n_min && family.fixed_edges(n_max).is_some_and(|k| k > self.m_max) {
            n_max -= 1;
        }
        let n = rng.gen_range(self.n_min..=n_max);
        let m = match family.fixed_edges(n) {
            Some(k) => k,
            None => rng.gen_range(0..=self.m_max.min(n * n.saturating_sub(1) / 2)),
        };
        let bounds = *self.bounds.choose(&mut rng).expect("bounds checked non-empty");
        GeneratorSpec {
            family,
            n,
            m,
            bounds,
            weights: self.weights,
            seed,
        }
    }

    fn eps_values(&self) -> Result<Vec<Rational>, ConfigError> {
        self.eps
            .iter()
            .map(|s| parse_rational(s).ok_or_else(|| ConfigError::Eps(s.clone())))
            .collect()
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.families.is_empty() {
            return Err(ConfigError::Empty("families"));
        }
        if self.bounds.is_empty() {
            return Err(ConfigError::Empty("bound policies"));
        }
        if self.solvers.is_empty() {
            return Err(ConfigError::Empty("solvers"));
        }
        if self.n_min > self.n_max {
            return Err(ConfigError::Range {
                min: self.n_min,
                max: self.n_max,
            });
        }
        Ok(())
    }
}

/// One (instance, solver, eps) run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub seed: u64,
    pub family: Family,
    pub solver: Solver,
    #[serde(with = "crate::serde_rational::option")]
    pub eps: Option<Rational>,
    pub report: Option<RunReport>,
    pub error: Option<String>,
}

impl CaseReport {
    pub fn failure(&self) -> Option<String> {
        match (&self.report, &self.error) {
            (_, Some(e)) => Some(e.clone()),
            (Some(r), None) => r.failure(),
            (None, None) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub seed: u64,
    pub solver: Solver,
    #[serde(with = "crate::serde_rational::option")]
    pub eps: Option<Rational>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolverRow {
    pub solver: Solver,
    #[serde(with = "crate::serde_rational::option")]
    pub eps: Option<Rational>,
    pub runs: usize,
    pub feasible: usize,
    pub certified: usize,
    /// Runs where the bound in use admits no check.
    pub unchecked: usize,
    pub failed: usize,
    #[serde(with = "crate::serde_rational::option")]
    pub worst_ratio: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifySummary {
    pub version: u32,
    pub name: String,
    pub instances: usize,
    pub violations: Vec<Violation>,
    pub table: Vec<SolverRow>,
    pub cases: Vec<CaseReport>,
}

impl CertifySummary {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("summary serializes")
    }

    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("summary serializes");
        strip_timing(&mut v);
        v.to_string()
    }

    /// Fixed-width text table of the per-solver counts.
    pub fn table_text(&self) -> String {
        let mut out = format!(
            "{:<10} {:>6} {:>6} {:>8} {:>9} {:>9} {:>6}  worst ratio\n",
            "solver", "eps", "runs", "feasible", "certified", "unchecked", "failed"
        );
        for row in &self.table {
            out += &format!(
                "{:<10} {:>6} {:>6} {:>8} {:>9} {:>9} {:>6}  {}\n",
                row.solver.name(),
                row.eps.as_ref().map_or("-".into(), format_rational),
                row.runs,
                row.feasible,
                row.certified,
                row.unchecked,
                row.failed,
                row.worst_ratio.as_ref().map_or("-".into(), format_rational),
            );
        }
        out
    }
}

/// Whether `solver` accepts `inst` inside a batch.
fn applicable(solver: Solver, inst: &Instance, oracle: &OracleConfig) -> bool {
    match solver {
        Solver::Tree => !inst.is_weighted() && is_forest(inst),
        Solver::Exact => inst.m() <= oracle.max_edges,
        _ => true,
    }
}

fn run_instance(
    config: &BatchConfig,
    eps: &[Rational],
    oracle: OracleConfig,
    index: usize,
) -> Result<Vec<CaseReport>, ConfigError> {
    let spec = config.spec(index);
    let inst = generate(&spec).map_err(|source| ConfigError::Generate { index, source })?;
    let refs = References::new(&inst, oracle);
    let mut out = Vec::new();
    for &solver in &config.solvers {
        let resolved = solver.resolve(&inst);
        if !applicable(resolved, &inst, &oracle) {
            continue;
        }
        let eps_list: Vec<Option<&Rational>> = if resolved == Solver::Round {
            eps.iter().map(Some).collect()
        } else {
            vec![None]
        };
        for e in eps_list {
            let params = RunParams {
                eps: e.cloned().unwrap_or_else(crate::rounding::default_eps),
                order_seed: config.randomize_order.then_some(spec.seed),
                root: None,
                relabel_seed: config.relabel.then_some(spec.seed),
                oracle,
            };
            let (report, error) = match run_with(&inst, solver, &params, &refs) {
                Ok(r) => (Some(r), None),
                Err(err) => (None, Some(err.to_string())),
            };
            out.push(CaseReport {
                seed: spec.seed,
                family: spec.family,
                solver,
                eps: e.cloned(),
                report,
                error,
            });
        }
    }
    Ok(out)
}

pub fn certify_suite(config: &BatchConfig) -> Result<CertifySummary, ConfigError> {
    config.validate()?;
    let eps = config.eps_values()?;
    let oracle = OracleConfig {
        max_edges: config.oracle_max_edges,
        prune: true,
    };
    let work = || {
        (0..config.instances)
            .into_par_iter()
            .map(|i| run_instance(config, &eps, oracle, i))
            .collect::<Result<Vec<_>, _>>()
    };
    let batches = if config.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| ConfigError::Pool(e.to_string()))?
            .install(work)?
    } else {
        work()?
    };
    let mut cases: Vec<CaseReport> = batches.into_iter().flatten().collect();
    cases.sort_by(|a, b| (a.seed, a.solver, &a.eps).cmp(&(b.seed, b.solver, &b.eps)));

    let violations = cases
        .iter()
        .filter_map(|c| {
            c.failure().map(|reason| Violation {
                seed: c.seed,
                solver: c.solver,
                eps: c.eps.clone(),
                reason,
            })
        })
        .collect();

    let mut rows: BTreeMap<(Solver, Option<Rational>), SolverRow> = BTreeMap::new();
    for c in &cases {
        let row = rows
            .entry((c.solver, c.eps.clone()))
            .or_insert_with(|| SolverRow {
                solver: c.solver,
                eps: c.eps.clone(),
                runs: 0,
                feasible: 0,
                certified: 0,
                unchecked: 0,
                failed: 0,
                worst_ratio: None,
            });
        row.runs += 1;
        if c.failure().is_some() {
            row.failed += 1;
        }
        if let Some(r) = &c.report {
            row.feasible += usize::from(r.feasible);
            match r.certified {
                Some(true) => row.certified += 1,
                Some(false) => {}
                None => row.unchecked += 1,
            }
            if let Some(q) = &r.ratio {
                if row.worst_ratio.as_ref().map_or(true, |w| q > w) {
                    row.worst_ratio = Some(q.clone());
                }
            }
        }
    }

    Ok(CertifySummary {
        version: REPORT_VERSION,
        name: config.name.clone(),
        instances: config.instances,
        violations,
        table: rows.into_values().collect(),
        cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BatchConfig {
        BatchConfig {
            instances: 40,
            n_max: 6,
            m_max: 8,
            ..BatchConfig::default()
        }
    }

    #[test]
    fn small_batch_certifies() {
        let s = certify_suite(&small()).unwrap();
        assert!(s.passed(), "{:?}", s.violations);
        assert!(s.cases.iter().any(|c| c.solver == Solver::Tree));
        assert!(s.table.iter().all(|r| r.failed == 0));
        let keys: Vec<_> = s.cases.iter().map(|c| (c.seed, c.solver)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn reruns_are_identical() {
        let a = certify_suite(&small()).unwrap();
        let b = certify_suite(&small()).unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json());
    }

    #[test]
    fn config_from_toml() {
        let c: BatchConfig = toml::from_str(
            r#"
            name = "trees"
            instances = 3
            families = ["random-tree"]
            n_max = 12
            bounds = [{ kind = "fixed", k = 2 }, { kind = "uniform-random" }]
            solvers = ["tree", "exact"]
            "#,
        )
        .unwrap();
        assert_eq!(c.families, vec![Family::RandomTree]);
        assert_eq!(c.m_max, 14);
        assert_eq!(c.bounds[0], BoundPolicy::Fixed { k: 2 });
        let s = certify_suite(&c).unwrap();
        assert!(s.passed());
        assert_eq!(s.cases.len(), 6);
    }

    #[test]
    fn bad_configs() {
        let c = BatchConfig {
            eps: vec!["x".into()],
            ..small()
        };
        assert_eq!(certify_suite(&c).unwrap_err(), ConfigError::Eps("x".into()));
        let c = BatchConfig {
            solvers: vec![],
            ..small()
        };
        assert!(matches!(certify_suite(&c), Err(ConfigError::Empty(_))));
    }
}

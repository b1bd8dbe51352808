use std::time::Instant;

use qbc_core::adversary::{AdversaryError, AliceStrategy, BobStrategy, Scenario, Tally};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, ExperimentConfig};

/// Trials per work item.
const BATCH: u64 = 1024;

/// The generator for trial `index`: stream `index` of the ChaCha8 keyed by
/// `seed`. Independent of batching and thread count.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn run_batch(scenario: &Scenario, seed: u64, range: std::ops::Range<u64>) -> Result<Tally, AdversaryError> {
    let mut tally = Tally::default();
    for i in range {
        let mut rng = trial_rng(seed, i);
        tally.record(&scenario.run_trial(&mut rng)?);
    }
    Ok(tally)
}

/// Runs `trials` trials of `scenario` on `jobs` threads (or inline).
pub fn run_tally(
    scenario: &Scenario,
    trials: u64,
    seed: u64,
    jobs: usize,
    single_thread: bool,
) -> Result<Tally, AdversaryError> {
    let batches = trials.div_ceil(BATCH);
    let range = |b: u64| b * BATCH..((b + 1) * BATCH).min(trials);
    if single_thread || jobs <= 1 {
        return (0..batches).try_fold(Tally::default(), |acc, b| {
            Ok(acc.merge(&run_batch(scenario, seed, range(b))?))
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    pool.install(|| {
        (0..batches)
            .into_par_iter()
            .map(|b| run_batch(scenario, seed, range(b)))
            .try_reduce(Tally::default, |a, b| Ok(a.merge(&b)))
    })
}

/// One output line: the configuration echo, the headline estimate and the
/// verdict counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub protocol: String,
    pub alice: String,
    pub bob: String,
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub trials: u64,
    pub seed: u64,
    /// Alice strategies: Bob's acceptance rate. Bob's guessing strategies:
    /// fraction of correct guesses among non-aborted runs. Biased-state runs:
    /// fraction of runs that got past the mixing test.
    pub accept: f64,
    pub stderr: f64,
    pub beta0: Option<f64>,
    pub beta1: Option<f64>,
    pub lambda: Option<f64>,
    pub reject_mixing: u64,
    pub reject_unmarked: u64,
    pub reject_outcome: u64,
    pub reject_crosscheck: u64,
    pub ms: Option<f64>,
}

impl ResultRow {
    pub fn from_tally(config: &ExperimentConfig, tally: &Tally, ms: Option<f64>) -> Self {
        let headline = match config.bob {
            BobStrategy::Honest => tally.acceptance(),
            BobStrategy::BiasedState => {
                qbc_core::adversary::Estimate::binomial(tally.trials - tally.abort_mixing, tally.trials)
            }
            _ => tally.p_cheat(),
        };
        let zeta = matches!(config.alice, AliceStrategy::ZetaP | AliceStrategy::ZetaPrime);
        let stats = tally.cheat_stats();
        Self {
            protocol: config.protocol.id().to_owned(),
            alice: config.alice.id().to_owned(),
            bob: config.bob.id().to_owned(),
            m: config.m,
            n: config.n,
            p: config.p,
            q: config.q,
            trials: tally.trials,
            seed: config.seed,
            accept: headline.value,
            stderr: headline.stderr,
            beta0: zeta.then_some(stats.beta[0].value),
            beta1: zeta.then_some(stats.beta[1].value),
            lambda: zeta.then_some(stats.lambda.value),
            reject_mixing: tally.abort_mixing,
            reject_unmarked: tally.reject_unmarked,
            reject_outcome: tally.reject_outcome,
            reject_crosscheck: tally.reject_crosscheck,
            ms,
        }
    }

    /// The figure of merit used for classification: `λ` when present,
    /// otherwise the headline rate.
    pub fn lambda_or_accept(&self) -> (f64, f64) {
        match self.lambda {
            Some(l) => (l, self.lambda_stderr()),
            None => (self.accept, self.stderr),
        }
    }

    /// Binomial stderr of `λ` over all trials.
    pub fn lambda_stderr(&self) -> f64 {
        let l = self.lambda.unwrap_or(0.0);
        (l * (1.0 - l) / self.trials as f64).sqrt()
    }
}

/// Tallies for every sweep point, in sweep order, with wall times.
pub fn run_tallies(config: &ExperimentConfig) -> Result<Vec<(ExperimentConfig, Tally, f64)>, ConfigError> {
    let points = config.validate()?;
    points
        .into_iter()
        .map(|(c, scenario)| {
            let start = Instant::now();
            let tally = run_tally(&scenario, c.trials, c.seed, config.jobs, config.single_thread).map_err(
                |source| ConfigError::Scenario {
                    point: format!("(m,n,p,q)=({},{},{},{})", c.m, c.n, c.p, c.q),
                    source,
                },
            )?;
            Ok((c, tally, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect()
}

/// Runs the experiment. Invalid configurations are reported before any
/// trial runs.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>, ConfigError> {
    Ok(run_tallies(config)?
        .into_iter()
        .map(|(c, tally, ms)| ResultRow::from_tally(&c, &tally, config.timing.then_some(ms)))
        .collect())
}

use super::{AdversaryError, TrialRecord};
use crate::protocol::{CommitBit, Verdict};

/// A binomial frequency with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// `successes / trials` with stderr `√(p(1−p)/trials)`. Zero trials give
    /// an estimate of 0 with zero error.
    pub fn binomial(successes: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self {
                value: 0.0,
                stderr: 0.0,
            };
        }
        let value = successes as f64 / trials as f64;
        Self {
            value,
            stderr: libm::sqrt(value * (1.0 - value) / trials as f64),
        }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }

    /// True if `|value − target| ≤ sigmas · stderr`. When the stderr is
    /// zero, `floor` stands in for it.
    pub fn within(&self, target: f64, sigmas: f64, floor: f64) -> bool {
        (self.value - target).abs() <= sigmas * self.stderr.max(floor)
    }
}

/// Per-attack success figures: the overall success rate, the per-bit
/// unveiling rates and their minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheatStats {
    pub trials: u64,
    pub successes: u64,
    pub estimate: Estimate,
    pub beta: [Estimate; 2],
    pub lambda: Estimate,
}

/// `min(β(0), β(1))`, carrying the stderr of whichever estimate is smaller.
pub fn compute_lambda(beta0: Option<Estimate>, beta1: Option<Estimate>) -> Result<Estimate, AdversaryError> {
    match (beta0, beta1) {
        (Some(a), Some(b)) => Ok(if b.value < a.value { b } else { a }),
        _ => Err(AdversaryError::MissingStats),
    }
}

/// Integer counters over a batch of trials. Merging is plain addition, so
/// any split of the trials gives the same totals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Tally {
    pub trials: u64,
    pub accept: u64,
    pub abort_mixing: u64,
    pub reject_unmarked: u64,
    pub reject_outcome: u64,
    pub reject_crosscheck: u64,
    /// Trials past the outcome check (accepted or rejected by the cross-check).
    pub passed_outcome: u64,
    /// Per bit: trials unveiling it, and those accepted.
    pub unveiled: [u64; 2],
    pub accepted_by_bit: [u64; 2],
    /// Cross-check rejections whose cited qubit was prepared in a basis other
    /// than the unveiled one.
    pub crosscheck_off_basis: u64,
    pub bivalid_checked: u64,
    pub bivalid: u64,
    pub guesses: u64,
    pub correct: u64,
}

impl Tally {
    pub fn record(&mut self, trial: &TrialRecord) {
        self.trials += 1;
        match trial.verdict {
            Verdict::Accept => self.accept += 1,
            Verdict::AbortMixing => self.abort_mixing += 1,
            Verdict::RejectUnmarked => self.reject_unmarked += 1,
            Verdict::RejectOutcome => self.reject_outcome += 1,
            Verdict::RejectCrossCheck => self.reject_crosscheck += 1,
        }
        if trial.verdict.passed_outcome_check() {
            self.passed_outcome += 1;
        }
        if let Some(bit) = trial.unveiled {
            self.unveiled[bit.index()] += 1;
            if trial.verdict == Verdict::Accept {
                self.accepted_by_bit[bit.index()] += 1;
            }
        }
        if trial.crosscheck_basis_match == Some(false) {
            self.crosscheck_off_basis += 1;
        }
        if let Some(b) = trial.bivalid {
            self.bivalid_checked += 1;
            self.bivalid += u64::from(b);
        }
        if let Some(c) = trial.guess_correct {
            self.guesses += 1;
            self.correct += u64::from(c);
        }
    }

    pub fn merge(mut self, other: &Tally) -> Tally {
        self.trials += other.trials;
        self.accept += other.accept;
        self.abort_mixing += other.abort_mixing;
        self.reject_unmarked += other.reject_unmarked;
        self.reject_outcome += other.reject_outcome;
        self.reject_crosscheck += other.reject_crosscheck;
        self.passed_outcome += other.passed_outcome;
        for i in 0..2 {
            self.unveiled[i] += other.unveiled[i];
            self.accepted_by_bit[i] += other.accepted_by_bit[i];
        }
        self.crosscheck_off_basis += other.crosscheck_off_basis;
        self.bivalid_checked += other.bivalid_checked;
        self.bivalid += other.bivalid;
        self.guesses += other.guesses;
        self.correct += other.correct;
        self
    }

    pub fn acceptance(&self) -> Estimate {
        Estimate::binomial(self.accept, self.trials)
    }

    pub fn passed_outcome_rate(&self) -> Estimate {
        Estimate::binomial(self.passed_outcome, self.trials)
    }

    pub fn abort_rate(&self) -> Estimate {
        Estimate::binomial(self.abort_mixing, self.trials)
    }

    /// Correct guesses among runs where Bob made one (aborted runs excluded).
    pub fn p_cheat(&self) -> Estimate {
        Estimate::binomial(self.correct, self.guesses)
    }

    pub fn bivalid_rate(&self) -> Estimate {
        Estimate::binomial(self.bivalid, self.bivalid_checked)
    }

    /// `β(b)`: fraction of all trials in which Alice unveiled `b` and Bob
    /// accepted.
    pub fn beta(&self, bit: CommitBit) -> Estimate {
        Estimate::binomial(self.accepted_by_bit[bit.index()], self.trials)
    }

    pub fn cheat_stats(&self) -> CheatStats {
        let beta = [self.beta(CommitBit::Zero), self.beta(CommitBit::One)];
        CheatStats {
            trials: self.trials,
            successes: self.accept,
            estimate: self.acceptance(),
            beta,
            lambda: compute_lambda(Some(beta[0]), Some(beta[1])).expect("both present"),
        }
    }
}

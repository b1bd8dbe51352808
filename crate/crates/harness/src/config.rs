use std::fmt;
use std::str::FromStr;

use qbc_core::adversary::{AdversaryError, AliceStrategy, BiasPolicy, BobStrategy, Scenario, ZetaPolicy};
use qbc_core::protocol::{DecoyPolicy, ParamsError, ProtocolParams, RunSettings, Variant};
use qbc_core::qstate::Basis;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("jobs must be at least 1")]
    NoJobs,
    #[error("threshold must be a positive finite number, got {0}")]
    Threshold(f64),
    #[error("invalid parameters {point}: {source}")]
    Params {
        point: String,
        #[source]
        source: ParamsError,
    },
    #[error("{point}: {source}")]
    Scenario {
        point: String,
        #[source]
        source: AdversaryError,
    },
    #[error("unknown sweep field {0:?} (expected m, n, p, q, trials, seed or threshold)")]
    SweepField(String),
    #[error("bad sweep value {value:?} for {field}")]
    SweepValue { field: String, value: String },
    #[error("sweep {0:?} is not of the form field=v1,v2,...")]
    SweepSyntax(String),
    #[error("unknown {kind} {value:?}")]
    Unknown { kind: &'static str, value: String },
    #[error("at least three distinct m values are needed to classify, got {0}")]
    TooFewPoints(usize),
    #[error("transcripts are only recorded for honest runs")]
    TranscriptsNeedHonest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// The decoy protocol.
    P,
    /// The scrambled variant.
    PPrime,
}

impl Protocol {
    pub fn id(self) -> &'static str {
        match self {
            Protocol::P => "p",
            Protocol::PPrime => "pprime",
        }
    }

    pub fn variant(self) -> Variant {
        match self {
            Protocol::P => Variant::Decoy,
            Protocol::PPrime => Variant::Scrambled,
        }
    }
}

impl FromStr for Protocol {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "p" => Ok(Protocol::P),
            "pprime" => Ok(Protocol::PPrime),
            _ => Err(ConfigError::Unknown {
                kind: "protocol",
                value: s.to_owned(),
            }),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

pub fn decoy_policy_id(policy: DecoyPolicy) -> &'static str {
    match policy {
        DecoyPolicy::Bb84 => "bb84",
        DecoyPolicy::Haar => "haar",
    }
}

pub fn parse_decoy_policy(s: &str) -> Result<DecoyPolicy, ConfigError> {
    match s {
        "bb84" => Ok(DecoyPolicy::Bb84),
        "haar" => Ok(DecoyPolicy::Haar),
        _ => Err(ConfigError::Unknown {
            kind: "decoy policy",
            value: s.to_owned(),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepField {
    M,
    N,
    P,
    Q,
    Trials,
    Seed,
    Threshold,
}

impl SweepField {
    pub fn id(self) -> &'static str {
        match self {
            SweepField::M => "m",
            SweepField::N => "n",
            SweepField::P => "p",
            SweepField::Q => "q",
            SweepField::Trials => "trials",
            SweepField::Seed => "seed",
            SweepField::Threshold => "threshold",
        }
    }
}

/// One swept field and its values, kept as text until applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub field: SweepField,
    pub values: Vec<String>,
}

impl FromStr for Sweep {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (field, values) = s
            .split_once('=')
            .ok_or_else(|| ConfigError::SweepSyntax(s.to_owned()))?;
        let field = match field.trim() {
            "m" => SweepField::M,
            "n" => SweepField::N,
            "p" => SweepField::P,
            "q" => SweepField::Q,
            "trials" => SweepField::Trials,
            "seed" => SweepField::Seed,
            "threshold" => SweepField::Threshold,
            other => return Err(ConfigError::SweepField(other.to_owned())),
        };
        let values: Vec<String> = values.split(',').map(|v| v.trim().to_owned()).collect();
        if values.iter().any(String::is_empty) {
            return Err(ConfigError::SweepSyntax(s.to_owned()));
        }
        Ok(Sweep { field, values })
    }
}

/// A complete experiment description. Outputs are a function of this value
/// alone (`jobs` and `single_thread` only affect scheduling).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    pub alice: AliceStrategy,
    pub bob: BobStrategy,
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub trials: u64,
    pub seed: u64,
    pub threshold: f64,
    pub decoy_policy: DecoyPolicy,
    pub zeta_policy: ZetaPolicy,
    pub bias_policy: BiasPolicy,
    pub control_basis: Basis,
    pub sweep: Option<Sweep>,
    pub jobs: usize,
    pub single_thread: bool,
    /// Fill the `ms` column with wall time. Off by default so repeated runs
    /// produce identical files.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            protocol: Protocol::P,
            alice: AliceStrategy::Honest,
            bob: BobStrategy::Honest,
            m: 4,
            n: 16,
            p: 64,
            q: 64,
            trials: 100_000,
            seed: 1,
            threshold: qbc_core::protocol::DEFAULT_MIXING_THRESHOLD,
            decoy_policy: DecoyPolicy::Bb84,
            zeta_policy: ZetaPolicy::Plus,
            bias_policy: BiasPolicy::AllZeroPlus,
            control_basis: Basis::Plus,
            sweep: None,
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            single_thread: false,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    fn point_label(&self) -> String {
        format!("(m,n,p,q)=({},{},{},{})", self.m, self.n, self.p, self.q)
    }

    /// The configuration with one sweep value applied.
    fn with_value(&self, field: SweepField, value: &str) -> Result<Self, ConfigError> {
        let bad = || ConfigError::SweepValue {
            field: field.id().to_owned(),
            value: value.to_owned(),
        };
        let mut c = self.clone();
        c.sweep = None;
        match field {
            SweepField::M => c.m = value.parse().map_err(|_| bad())?,
            SweepField::N => c.n = value.parse().map_err(|_| bad())?,
            SweepField::P => c.p = value.parse().map_err(|_| bad())?,
            SweepField::Q => c.q = value.parse().map_err(|_| bad())?,
            SweepField::Trials => c.trials = value.parse().map_err(|_| bad())?,
            SweepField::Seed => c.seed = value.parse().map_err(|_| bad())?,
            SweepField::Threshold => c.threshold = value.parse().map_err(|_| bad())?,
        }
        Ok(c)
    }

    /// The sweep expanded into one configuration per row, in sweep order.
    pub fn points(&self) -> Result<Vec<ExperimentConfig>, ConfigError> {
        match &self.sweep {
            None => {
                let mut c = self.clone();
                c.sweep = None;
                Ok(vec![c])
            }
            Some(s) => s.values.iter().map(|v| self.with_value(s.field, v)).collect(),
        }
    }

    pub fn params(&self) -> Result<ProtocolParams, ConfigError> {
        ProtocolParams::new(self.m, self.n, self.p, self.q).map_err(|source| ConfigError::Params {
            point: self.point_label(),
            source,
        })
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let mut s = Scenario::new(self.protocol.variant(), self.params()?, self.alice, self.bob);
        s.settings = RunSettings {
            threshold: self.threshold,
            decoys: self.decoy_policy,
        };
        s.zeta_policy = self.zeta_policy;
        s.bias_policy = self.bias_policy;
        s.control_basis = self.control_basis;
        s.validate().map_err(|source| ConfigError::Scenario {
            point: self.point_label(),
            source,
        })?;
        Ok(s)
    }

    /// Checks every sweep point; returns the scenarios to run.
    pub fn validate(&self) -> Result<Vec<(ExperimentConfig, Scenario)>, ConfigError> {
        if self.jobs == 0 {
            return Err(ConfigError::NoJobs);
        }
        self.points()?
            .into_iter()
            .map(|c| {
                if c.trials == 0 {
                    return Err(ConfigError::NoTrials);
                }
                if !(c.threshold.is_finite() && c.threshold > 0.0) {
                    return Err(ConfigError::Threshold(c.threshold));
                }
                let s = c.scenario()?;
                Ok((c, s))
            })
            .collect()
    }
}

use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParamsError {
    #[error("n must be at least 1")]
    NoSurvivors,
    #[error("need m <= n <= p, got m={m}, n={n}, p={p}")]
    Ordering { m: usize, n: usize, p: usize },
    #[error("need n <= q, got n={n}, q={q}")]
    EvidenceTooNarrow { n: usize, q: usize },
    #[error("p - n must be even so the mixing test splits evenly, got p={p}, n={n}")]
    OddDiscard { p: usize, n: usize },
}

/// The four security parameters: `m` marked qubits among `n` survivors of a
/// `p`-qubit anonymous state, sent back inside a `q`-qubit evidence register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProtocolParams {
    m: usize,
    n: usize,
    p: usize,
    q: usize,
}

impl ProtocolParams {
    /// Validates `1 <= n`, `m <= n <= p`, `n <= q` and `p - n` even.
    ///
    /// Realistic instances satisfy `m < n < p, q` with wide gaps; the
    /// boundary cases are accepted so degenerate instances (no mixing test,
    /// no decoys, every survivor marked) can be exercised.
    pub fn new(m: usize, n: usize, p: usize, q: usize) -> Result<Self, ParamsError> {
        if n == 0 {
            return Err(ParamsError::NoSurvivors);
        }
        if m > n || n > p {
            return Err(ParamsError::Ordering { m, n, p });
        }
        if n > q {
            return Err(ParamsError::EvidenceTooNarrow { n, q });
        }
        if !(p - n).is_multiple_of(2) {
            return Err(ParamsError::OddDiscard { p, n });
        }
        Ok(Self { m, n, p, q })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Qubits measured in each basis during the mixing test.
    pub fn test_group(&self) -> usize {
        (self.p - self.n) / 2
    }
}

impl fmt::Display for ProtocolParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(m={}, n={}, p={}, q={})", self.m, self.n, self.p, self.q)
    }
}

use serde::{Deserialize, Serialize};

use crate::algos::AlgorithmId;

/// Input with the largest ulp error seen; ties go to the smaller input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub x: f64,
    pub ulp: u64,
}

/// Ulp-distance counts of one algorithm against the oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UlpHistogram {
    pub algorithm: AlgorithmId,
    pub zero_ulp: u64,
    pub one_ulp: u64,
    pub two_plus_ulp: u64,
    /// One-ulp results that do not bracket the true value, plus all
    /// two-plus results.
    pub unfaithful: u64,
    pub total: u64,
    pub worst: Option<WorstCase>,
}

impl UlpHistogram {
    pub fn new(algorithm: AlgorithmId) -> Self {
        UlpHistogram {
            algorithm,
            zero_ulp: 0,
            one_ulp: 0,
            two_plus_ulp: 0,
            unfaithful: 0,
            total: 0,
            worst: None,
        }
    }

    pub fn record(&mut self, x: f64, ulp: u64, faithful: bool) {
        match ulp {
            0 => self.zero_ulp += 1,
            1 => self.one_ulp += 1,
            _ => self.two_plus_ulp += 1,
        }
        if !faithful {
            self.unfaithful += 1;
        }
        self.total += 1;
        self.note_worst(WorstCase { x, ulp });
    }

    fn note_worst(&mut self, candidate: WorstCase) {
        let replace = match self.worst {
            None => true,
            Some(w) => candidate.ulp > w.ulp || (candidate.ulp == w.ulp && candidate.x < w.x),
        };
        if replace {
            self.worst = Some(candidate);
        }
    }

    /// Adds another histogram of the same algorithm. Commutative and
    /// associative.
    pub fn merge(&mut self, other: &UlpHistogram) {
        debug_assert_eq!(self.algorithm, other.algorithm);
        self.zero_ulp += other.zero_ulp;
        self.one_ulp += other.one_ulp;
        self.two_plus_ulp += other.two_plus_ulp;
        self.unfaithful += other.unfaithful;
        self.total += other.total;
        if let Some(w) = other.worst {
            self.note_worst(w);
        }
    }

    pub fn percent(&self, count: u64) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * count as f64 / self.total as f64
        }
    }

    pub fn zero_ulp_percent(&self) -> f64 {
        self.percent(self.zero_ulp)
    }

    pub fn one_ulp_percent(&self) -> f64 {
        self.percent(self.one_ulp)
    }

    pub fn two_plus_ulp_percent(&self) -> f64 {
        self.percent(self.two_plus_ulp)
    }

    /// Binomial standard error of the zero-ulp rate, in percentage points.
    pub fn zero_ulp_std_error(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let p = self.zero_ulp as f64 / self.total as f64;
        100.0 * (p * (1.0 - p) / self.total as f64).sqrt()
    }

    pub fn is_consistent(&self) -> bool {
        self.zero_ulp + self.one_ulp + self.two_plus_ulp == self.total
    }
}

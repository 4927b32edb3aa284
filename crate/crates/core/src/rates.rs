use serde::{Deserialize, Serialize};

/// Round-off slack below zero that is clamped back to zero.
pub const NEGATIVE_SLACK: f64 = 1e-9;

/// Which capacity region a triple belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SecretKind {
    /// The key is extracted from the encoder's observation.
    Generated,
    /// An independent key is embedded into the helper data.
    Chosen,
}

/// A (secret-key, privacy-leakage, storage) rate triple in bits per source
/// symbol.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateTriple {
    pub r_s: f64,
    pub r_l: f64,
    pub r_m: f64,
}

fn clamp(v: f64) -> f64 {
    if (-NEGATIVE_SLACK..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

impl RateTriple {
    /// Builds a triple, clamping round-off negatives to zero.
    pub fn new(r_s: f64, r_l: f64, r_m: f64) -> Self {
        Self {
            r_s: clamp(r_s),
            r_l: clamp(r_l),
            r_m: clamp(r_m),
        }
    }

    pub const ZERO: RateTriple = RateTriple {
        r_s: 0.0,
        r_l: 0.0,
        r_m: 0.0,
    };

    pub fn as_array(&self) -> [f64; 3] {
        [self.r_s, self.r_l, self.r_m]
    }

    /// `w_s r_s - w_l r_l - w_m r_m`.
    pub fn scalarize(&self, weights: [f64; 3]) -> f64 {
        weights[0] * self.r_s - weights[1] * self.r_l - weights[2] * self.r_m
    }

    /// True if `self` is at least as good as `other` in every coordinate up
    /// to `slack` (higher key rate, lower leakage, lower storage).
    pub fn weakly_dominates(&self, other: &RateTriple, slack: f64) -> bool {
        self.r_s >= other.r_s - slack && self.r_l <= other.r_l + slack && self.r_m <= other.r_m + slack
    }

    /// Weak dominance plus a strict gain larger than `slack` somewhere.
    pub fn strictly_dominates(&self, other: &RateTriple, slack: f64) -> bool {
        self.weakly_dominates(other, slack)
            && (self.r_s > other.r_s + slack || self.r_l < other.r_l - slack || self.r_m < other.r_m - slack)
    }

    pub fn max_abs_diff(&self, other: &RateTriple) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

//! Rate regions for arbitrary finite alphabets.
//!
//! Every auxiliary channel `P(U|X̃)` yields one corner triple
//! `(I(U;Y), I(U;X) - I(U;Y), I(U;X̃) - I(U;Y))` (generated secret) or
//! `(I(U;Y), I(U;X) - I(U;Y), I(U;X̃))` (chosen secret); the region is the
//! union of the boxes these corners dominate. [`pareto_search`] approximates
//! the boundary of that union from the inside, so outside the binary case
//! its output is an inner bound.

mod evaluator;
mod search;

pub use evaluator::{Informations, RegionEvaluator};
pub use search::{
    cardinality_sweep, pareto_search, pareto_search_with, scalarized_optimize, weight_grid,
    CardinalityLevel, CardinalityReport, FrontierPoint, Origin, ParetoRun, ScalarizedResult,
    DOMINANCE_SLACK, GRID_PER_AXIS, MAX_REFINED_WEIGHTS, MAX_REFINE_DEPTH, REFINE_RESOLUTION,
};

use crate::error::{check_unit, Error, Result};
use crate::info_math::ProbVector;
use crate::models::{inverse_channel, make_bsc, Channel, InverseChannel, SourceModel};
use crate::rates::{RateTriple, SecretKind};

/// An auxiliary test channel `P(U|X̃)` from the product encoder alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxChannel {
    card_u: usize,
    rows: Channel,
}

impl AuxChannel {
    pub fn new(rows: Channel) -> Self {
        Self {
            card_u: rows.out_size(),
            rows,
        }
    }

    /// `U` independent of the observation.
    pub fn constant(n_enc: usize) -> Result<Self> {
        Ok(Self::new(Channel::from_rows(vec![vec![1.0]; n_enc])?))
    }

    /// `U = X̃`.
    pub fn identity(n_enc: usize) -> Result<Self> {
        Ok(Self::new(Channel::identity(n_enc)?))
    }

    /// Binary `U` through a BSC with crossover `a`.
    pub fn bsc(a: f64) -> Result<Self> {
        Ok(Self::new(make_bsc(a)?))
    }

    pub(crate) fn from_matrix(q: &[f64], n_enc: usize, card_u: usize) -> Self {
        let rows = q
            .chunks_exact(card_u)
            .take(n_enc)
            .map(|r| {
                let mut r: Vec<f64> = r.iter().map(|&p| p.max(0.0)).collect();
                let s: f64 = r.iter().sum();
                if s > 0.0 {
                    r.iter_mut().for_each(|p| *p /= s);
                } else {
                    r.iter_mut().for_each(|p| *p = 1.0 / card_u as f64);
                }
                r
            })
            .collect();
        Self::new(Channel::from_masses(rows))
    }

    pub fn card_u(&self) -> usize {
        self.card_u
    }

    pub fn rows(&self) -> &Channel {
        &self.rows
    }

    pub fn in_size(&self) -> usize {
        self.rows.in_size()
    }

    /// Whether `card_u` respects the `|X| + 2` cardinality bound.
    pub fn within_bound(&self, source_alphabet: usize) -> bool {
        self.card_u <= source_alphabet + 2
    }

    /// Reverse channel `P(X̃|U)` together with the law of `U`.
    pub fn reverse(&self, p_enc: &ProbVector) -> Result<InverseChannel> {
        inverse_channel(p_enc, &self.rows)
    }

    /// Relabels `U`: output `u` becomes output `perm[u]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.card_u];
        if perm.len() != self.card_u || perm.iter().any(|&p| p >= self.card_u || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Dimension(format!("{perm:?} is not a permutation of 0..{}", self.card_u)));
        }
        let rows = self
            .rows
            .rows()
            .iter()
            .map(|r| {
                let mut out = vec![0.0; self.card_u];
                for (u, &p) in r.weights().iter().enumerate() {
                    out[perm[u]] = p;
                }
                out
            })
            .collect();
        Ok(Self::new(Channel::from_masses(rows)))
    }

    pub(crate) fn to_matrix(&self) -> Vec<f64> {
        self.rows.rows().iter().flat_map(|r| r.weights().iter().copied()).collect()
    }
}

/// Settings of the multi-start search over auxiliary channels.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub n_random_starts: usize,
    /// Upper bound on the number of improvement sweeps per start.
    pub n_refine_iters: usize,
    /// Transfer sizes, tried from first to last.
    pub step_schedule: Vec<f64>,
    pub seed: u64,
    /// Minimum objective gain for a move to be accepted.
    pub tolerance: f64,
    /// Cardinality of `U`; `None` means `|X| + 2`.
    pub card_u: Option<usize>,
    /// Random auxiliary channels added to the Pareto candidates.
    pub n_samples: usize,
    /// Use the rayon pool (no effect without the `parallel` feature).
    pub parallel: bool,
}

/// `n` geometrically spaced values from `from` down to `to`.
pub fn geometric_schedule(from: f64, to: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![from];
    }
    let ratio = (to / from).powf(1.0 / (n - 1) as f64);
    (0..n).map(|i| if i + 1 == n { to } else { from * ratio.powi(i as i32) }).collect()
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_random_starts: 64,
            n_refine_iters: 200,
            step_schedule: geometric_schedule(0.25, 1e-4, 12),
            seed: 0,
            tolerance: 1e-12,
            card_u: None,
            n_samples: 256,
            parallel: true,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, value: f64, domain: &'static str| Err(Error::Domain { name, value, domain });
        if self.n_random_starts == 0 {
            return bad("n_random_starts", 0.0, ">= 1");
        }
        if self.n_refine_iters == 0 {
            return bad("n_refine_iters", 0.0, ">= 1");
        }
        if self.step_schedule.is_empty() {
            return Err(Error::Empty("step schedule"));
        }
        if let Some(&s) = self.step_schedule.iter().find(|s| !(**s > 0.0 && **s <= 1.0)) {
            return bad("step", s, "(0, 1]");
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return bad("tolerance", self.tolerance, "> 0");
        }
        if self.card_u == Some(0) {
            return bad("card_u", 0.0, ">= 1");
        }
        Ok(())
    }

    /// Cardinality of `U` used for a model with `source_alphabet` letters.
    pub fn resolved_card_u(&self, source_alphabet: usize) -> usize {
        self.card_u.unwrap_or(source_alphabet + 2)
    }
}

/// Rate triple of the auxiliary channel `u` for the model `m`.
pub fn evaluate_triple(m: &SourceModel, u: &AuxChannel, kind: SecretKind) -> Result<RateTriple> {
    let eval = RegionEvaluator::new(m, kind)?;
    eval.check_alphabet(u.in_size())?;
    Ok(eval.evaluate_matrix(&u.to_matrix(), u.card_u()).1)
}

/// Time-sharing: `alpha t1 + (1 - alpha) t2`.
pub fn timeshare(t1: RateTriple, t2: RateTriple, alpha: f64) -> Result<RateTriple> {
    check_unit("alpha", alpha)?;
    let mix = |a: f64, b: f64| alpha * a + (1.0 - alpha) * b;
    Ok(RateTriple {
        r_s: mix(t1.r_s, t2.r_s),
        r_l: mix(t1.r_l, t2.r_l),
        r_m: mix(t1.r_m, t2.r_m),
    })
}

//! Fast evaluation of rate triples for a fixed source model.
//!
//! For an auxiliary channel `P(U|X̃)` every conditional entropy
//! `H(Z|U)` with `Z ∈ {X̃, X, Y}` splits into per-letter terms of `U`, each
//! depending on one column of the channel only. Moving mass between two
//! columns therefore only requires recomputing those two columns.

use crate::error::{Error, Result};
use crate::info_math::plogp;
use crate::models::{build_joint, SourceModel};
use crate::rates::{RateTriple, SecretKind};

const ROUND_OFF: f64 = 1e-13;

/// Contribution of one letter of `U` to `H(X̃|U)`, `H(X|U)` and `H(Y|U)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct ColumnTerms {
    pub(crate) enc: f64,
    pub(crate) src: f64,
    pub(crate) dec: f64,
}

/// Sums per-letter terms in sorted order, so the total does not depend on
/// how the letters of `U` are labelled.
pub(crate) fn sum_terms(terms: &[ColumnTerms]) -> ColumnTerms {
    let sorted_sum = |f: fn(&ColumnTerms) -> f64| {
        let mut v: Vec<f64> = terms.iter().map(f).collect();
        v.sort_by(f64::total_cmp);
        v.iter().sum::<f64>()
    };
    ColumnTerms {
        enc: sorted_sum(|t| t.enc),
        src: sorted_sum(|t| t.src),
        dec: sorted_sum(|t| t.dec),
    }
}

/// Model marginals needed to score any auxiliary channel.
#[derive(Debug, Clone)]
pub struct RegionEvaluator {
    kind: SecretKind,
    n_enc: usize,
    n_src: usize,
    n_dec: usize,
    p_enc: Vec<f64>,
    src_given_enc: Vec<f64>,
    dec_given_enc: Vec<f64>,
    h_enc: f64,
    h_src: f64,
    h_dec: f64,
}

/// Mutual informations of `U` with the three observed variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Informations {
    pub enc: f64,
    pub src: f64,
    pub dec: f64,
}

fn row_normalize(table: &[f64], cols: usize, marginal: &[f64]) -> Vec<f64> {
    table
        .chunks_exact(cols)
        .zip(marginal)
        .flat_map(|(row, &m)| {
            row.iter()
                .map(move |&p| if m > 0.0 { p / m } else { 1.0 / cols as f64 })
        })
        .collect()
}

impl RegionEvaluator {
    pub fn new(m: &SourceModel, kind: SecretKind) -> Result<Self> {
        let joint = build_joint(m)?;
        let enc = m.enc_axes();
        let es = joint.group(&enc, &[m.source_axis()])?;
        let ed = joint.group(&enc, &m.dec_axes())?;
        let (n_enc, n_src, n_dec) = (es.dims()[0], es.dims()[1], ed.dims()[1]);
        let p_enc: Vec<f64> = es
            .probs()
            .chunks_exact(n_src)
            .map(|r| r.iter().sum())
            .collect();
        let mut src = vec![0.0; n_src];
        for row in es.probs().chunks_exact(n_src) {
            for (s, &p) in src.iter_mut().zip(row) {
                *s += p;
            }
        }
        let mut dec = vec![0.0; n_dec];
        for row in ed.probs().chunks_exact(n_dec) {
            for (d, &p) in dec.iter_mut().zip(row) {
                *d += p;
            }
        }
        let entropy = |v: &[f64]| v.iter().map(|&p| plogp(p)).sum::<f64>();
        Ok(Self {
            kind,
            n_enc,
            n_src,
            n_dec,
            src_given_enc: row_normalize(es.probs(), n_src, &p_enc),
            dec_given_enc: row_normalize(ed.probs(), n_dec, &p_enc),
            h_enc: entropy(&p_enc),
            h_src: entropy(&src),
            h_dec: entropy(&dec),
            p_enc,
        })
    }

    pub fn kind(&self) -> SecretKind {
        self.kind
    }

    pub fn enc_alphabet(&self) -> usize {
        self.n_enc
    }

    pub fn src_alphabet(&self) -> usize {
        self.n_src
    }

    pub fn p_enc(&self) -> &[f64] {
        &self.p_enc
    }

    /// Terms of the letter `u` whose column of `P(U|X̃)` is `column`.
    pub(crate) fn column_terms(&self, column: impl Fn(usize) -> f64, scratch: &mut Vec<f64>) -> ColumnTerms {
        let mut pu = 0.0;
        let mut enc = 0.0;
        scratch.clear();
        scratch.resize(self.n_src + self.n_dec, 0.0);
        let (src, dec) = scratch.split_at_mut(self.n_src);
        for a in 0..self.n_enc {
            let mass = self.p_enc[a] * column(a);
            if mass <= 0.0 {
                continue;
            }
            pu += mass;
            enc += plogp(mass);
            let sr = &self.src_given_enc[a * self.n_src..(a + 1) * self.n_src];
            for (s, &q) in src.iter_mut().zip(sr) {
                *s += mass * q;
            }
            let dr = &self.dec_given_enc[a * self.n_dec..(a + 1) * self.n_dec];
            for (d, &q) in dec.iter_mut().zip(dr) {
                *d += mass * q;
            }
        }
        if pu <= 0.0 {
            return ColumnTerms::default();
        }
        let norm = plogp(pu);
        ColumnTerms {
            enc: enc - norm,
            src: src.iter().map(|&p| plogp(p)).sum::<f64>() - norm,
            dec: dec.iter().map(|&p| plogp(p)).sum::<f64>() - norm,
        }
    }

    pub(crate) fn informations(&self, total: ColumnTerms) -> Informations {
        // Differences of equal entropies leave round-off dust around zero.
        let mi = |h: f64, cond: f64| {
            let v = h - cond;
            if v < ROUND_OFF {
                0.0
            } else {
                v
            }
        };
        Informations {
            enc: mi(self.h_enc, total.enc),
            src: mi(self.h_src, total.src),
            dec: mi(self.h_dec, total.dec),
        }
    }

    pub(crate) fn triple_from(&self, info: Informations) -> RateTriple {
        let r_m = match self.kind {
            SecretKind::Generated => info.enc - info.dec,
            SecretKind::Chosen => info.enc,
        };
        RateTriple::new(info.dec, info.src - info.dec, r_m)
    }

    /// Scores a row-major `n_enc × card_u` channel matrix.
    pub(crate) fn evaluate_matrix(&self, q: &[f64], card_u: usize) -> (Informations, RateTriple) {
        let mut scratch = Vec::new();
        let terms: Vec<ColumnTerms> = (0..card_u)
            .map(|u| self.column_terms(|a| q[a * card_u + u], &mut scratch))
            .collect();
        let info = self.informations(sum_terms(&terms));
        (info, self.triple_from(info))
    }

    pub fn check_alphabet(&self, in_size: usize) -> Result<()> {
        if in_size != self.n_enc {
            return Err(Error::Dimension(format!(
                "auxiliary channel has {in_size} inputs, the encoder alphabet has {} letters",
                self.n_enc
            )));
        }
        Ok(())
    }
}

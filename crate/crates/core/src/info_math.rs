//! Information-theoretic primitives on finite alphabets.
//!
//! Everything is in bits. `0 · log 0` is taken as `0`, and probabilities
//! below [`NEGLIGIBLE`] are treated as exact zeros so that the logarithm
//! never underflows.

use serde::{Deserialize, Serialize};

use crate::error::{check_half, check_unit, Error, Result};

/// Tolerance on the total mass of a distribution.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Probabilities at or below this value contribute nothing to an entropy.
pub const NEGLIGIBLE: f64 = 1e-300;

/// `-p log2 p` with the `0 log 0 = 0` convention.
#[inline]
pub fn plogp(p: f64) -> f64 {
    if p <= NEGLIGIBLE {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Shannon entropy of a slice of non-negative masses.
#[inline]
pub fn entropy_of(probs: &[f64]) -> f64 {
    probs.iter().map(|&p| plogp(p)).sum()
}

fn validate_masses(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::Empty("probability vector"));
    }
    if let Some((i, p)) = probs
        .iter()
        .enumerate()
        .find(|(_, p)| !p.is_finite() || **p < 0.0)
    {
        return Err(Error::InvalidDistribution(format!(
            "entry {i} is {p}, expected a finite non-negative value"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidDistribution(format!(
            "masses sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// A probability distribution over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbVector {
    weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl ProbVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        validate_masses(&weights)?;
        Ok(Self {
            weights,
            labels: None,
        })
    }

    pub fn with_labels(weights: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::Dimension(format!(
                "{} labels for {} outcomes",
                labels.len(),
                weights.len()
            )));
        }
        let mut v = Self::new(weights)?;
        v.labels = Some(labels);
        Ok(v)
    }

    /// Uniform distribution over `n` outcomes.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("probability vector"));
        }
        Ok(Self {
            weights: vec![1.0 / n as f64; n],
            labels: None,
        })
    }

    /// Point mass on outcome `index`.
    pub fn point(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::Dimension(format!(
                "point mass at {index} in an alphabet of size {n}"
            )));
        }
        let mut weights = vec![0.0; n];
        weights[index] = 1.0;
        Ok(Self {
            weights,
            labels: None,
        })
    }

    /// Builds a distribution from masses known to be valid up to round-off.
    pub(crate) fn from_masses(weights: Vec<f64>) -> Self {
        debug_assert!(validate_masses(&weights).is_ok(), "{weights:?}");
        Self {
            weights,
            labels: None,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

/// A joint distribution over a product alphabet.
///
/// Cells are flattened row-major: the first variable varies slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Dimension(format!("invalid dims {dims:?}")));
        }
        let cells: usize = dims.iter().product();
        if cells != probs.len() {
            return Err(Error::Dimension(format!(
                "dims {dims:?} describe {cells} cells but {} probabilities were given",
                probs.len()
            )));
        }
        validate_masses(&probs)?;
        Ok(Self { dims, probs })
    }

    pub(crate) fn from_parts(dims: Vec<usize>, probs: Vec<f64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), probs.len());
        Self { dims, probs }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    /// Entropy of the full joint.
    pub fn entropy(&self) -> f64 {
        entropy_of(&self.probs)
    }

    /// Marginal over `axes`, with the output variables in the order given.
    pub fn marginal(&self, axes: &[usize]) -> Result<JointTable> {
        if axes.is_empty() {
            return Err(Error::Empty("marginal axes"));
        }
        for (i, &a) in axes.iter().enumerate() {
            if a >= self.ndim() || axes[..i].contains(&a) {
                return Err(Error::Dimension(format!(
                    "invalid axis list {axes:?} for a {}-dimensional table",
                    self.ndim()
                )));
            }
        }
        let out_dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        // Stride of each source axis inside the output index.
        let mut out_strides = vec![0usize; self.ndim()];
        let mut stride = 1;
        for &a in axes.iter().rev() {
            out_strides[a] = stride;
            stride *= self.dims[a];
        }
        let mut out = vec![0.0; stride];
        let mut idx = vec![0usize; self.ndim()];
        for &p in &self.probs {
            let o: usize = idx.iter().zip(&out_strides).map(|(i, s)| i * s).sum();
            out[o] += p;
            for d in (0..self.ndim()).rev() {
                idx[d] += 1;
                if idx[d] < self.dims[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        Ok(JointTable::from_parts(out_dims, out))
    }

    /// Two-dimensional view `(left, right)` with each side flattened row-major.
    pub fn group(&self, left: &[usize], right: &[usize]) -> Result<JointTable> {
        if left.is_empty() || right.is_empty() {
            return Err(Error::Empty("axis group"));
        }
        let axes: Vec<usize> = left.iter().chain(right).copied().collect();
        let m = self.marginal(&axes)?;
        let rows: usize = left.iter().map(|&a| self.dims[a]).product();
        let cols: usize = right.iter().map(|&a| self.dims[a]).product();
        Ok(JointTable::from_parts(vec![rows, cols], m.probs))
    }

    /// Mutual information between two groups of variables.
    pub fn mutual_information_between(&self, left: &[usize], right: &[usize]) -> Result<f64> {
        mutual_information(&self.group(left, right)?)
    }

    /// Entropy of the marginal over `axes`.
    pub fn marginal_entropy(&self, axes: &[usize]) -> Result<f64> {
        Ok(self.marginal(axes)?.entropy())
    }

    pub fn into_prob_vector(self) -> ProbVector {
        ProbVector::from_masses(self.probs)
    }
}

/// Binary entropy `h(x) = -x log2 x - (1-x) log2 (1-x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    check_unit("x", x)?;
    Ok(binary_entropy_unchecked(x))
}

#[inline]
pub(crate) fn binary_entropy_unchecked(x: f64) -> f64 {
    plogp(x) + plogp(1.0 - x)
}

/// Inverse of the binary entropy function restricted to `[0, 1/2]`.
///
/// Bracketed bisection; the bracket is shrunk until it is narrower than
/// `1e-12` or can no longer be split in `f64`.
pub fn inv_binary_entropy(v: f64) -> Result<f64> {
    check_unit("v", v)?;
    Ok(inv_binary_entropy_unchecked(v))
}

pub(crate) fn inv_binary_entropy_unchecked(v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    if v >= 1.0 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if binary_entropy_unchecked(mid) < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Crossover of two cascaded binary symmetric channels: `p(1-x) + (1-p)x`.
pub fn star(p: f64, x: f64) -> Result<f64> {
    check_unit("p", p)?;
    check_unit("x", x)?;
    Ok(star_unchecked(p, x))
}

#[inline]
pub(crate) fn star_unchecked(p: f64, x: f64) -> f64 {
    p * (1.0 - x) + (1.0 - p) * x
}

/// Shannon entropy of a distribution.
pub fn entropy(d: &ProbVector) -> f64 {
    entropy_of(d.weights())
}

/// `I(A;B)` for a two-dimensional joint table over `(A, B)`.
pub fn mutual_information(j: &JointTable) -> Result<f64> {
    if j.ndim() != 2 {
        return Err(Error::Dimension(format!(
            "mutual information needs a 2-D table, got {} dimensions",
            j.ndim()
        )));
    }
    let (rows, cols) = (j.dims[0], j.dims[1]);
    let mut pa = vec![0.0; rows];
    let mut pb = vec![0.0; cols];
    for (r, row) in j.probs.chunks_exact(cols).enumerate() {
        for (c, &p) in row.iter().enumerate() {
            pa[r] += p;
            pb[c] += p;
        }
    }
    let mi = entropy_of(&pa) + entropy_of(&pb) - j.entropy();
    Ok(mi.max(0.0))
}

fn binomial(m: u32, k: u32) -> f64 {
    let k = k.min(m - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(m - i) / f64::from(i + 1))
}

/// Entropy of `m` conditionally independent BSC(`p_d`) observations of a
/// bit that is itself Bernoulli(`w`).
///
/// Sequences with the same number `k` of ones share the probability
/// `(1-w) p_d^k (1-p_d)^(m-k) + w p_d^(m-k) (1-p_d)^k`, so the sum over
/// `2^m` outcomes collapses to `m + 1` weight classes.
pub fn g_mixture(w: f64, m: u32, p_d: f64) -> Result<f64> {
    check_half("w", w)?;
    check_half("p_d", p_d)?;
    if m == 0 {
        return Err(Error::Domain {
            name: "m",
            value: 0.0,
            domain: "m >= 1",
        });
    }
    Ok(g_mixture_unchecked(w, m, p_d))
}

pub(crate) fn g_mixture_unchecked(w: f64, m: u32, p_d: f64) -> f64 {
    let q = 1.0 - p_d;
    (0..=m)
        .map(|k| {
            let ones = k as i32;
            let zeros = (m - k) as i32;
            let class = (1.0 - w) * p_d.powi(ones) * q.powi(zeros)
                + w * p_d.powi(zeros) * q.powi(ones);
            binomial(m, k) * plogp(class)
        })
        .sum()
}

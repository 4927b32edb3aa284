//! Source models: identifier law, measurement channels and their joint law.
//!
//! A [`SourceModel`] keeps one channel per measurement, so measurements are
//! conditionally independent given the identifier by construction.

mod file;

pub use file::{ChannelSpec, ModelFile};

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::info_math::{star_unchecked, JointTable, ProbVector};

/// Largest joint alphabet (in cells) that [`build_joint`] will materialize.
pub const MAX_JOINT_CELLS: u128 = 1 << 24;

/// A row-stochastic conditional distribution `P(out | in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    in_size: usize,
    out_size: usize,
    rows: Vec<ProbVector>,
}

impl Channel {
    pub fn new(rows: Vec<ProbVector>) -> Result<Self> {
        let in_size = rows.len();
        if in_size == 0 {
            return Err(Error::Empty("channel rows"));
        }
        let out_size = rows[0].len();
        if let Some(i) = rows.iter().position(|r| r.len() != out_size) {
            return Err(Error::Dimension(format!(
                "channel row {i} has {} outputs, row 0 has {out_size}",
                rows[i].len()
            )));
        }
        Ok(Self {
            in_size,
            out_size,
            rows,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                ProbVector::new(r).map_err(|e| Error::InvalidDistribution(format!("row {i}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub(crate) fn from_masses(rows: Vec<Vec<f64>>) -> Self {
        let rows: Vec<ProbVector> = rows.into_iter().map(ProbVector::from_masses).collect();
        Self {
            in_size: rows.len(),
            out_size: rows[0].len(),
            rows,
        }
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| ProbVector::point(n, i)).collect::<Result<_>>()?)
    }

    pub fn in_size(&self) -> usize {
        self.in_size
    }

    pub fn out_size(&self) -> usize {
        self.out_size
    }

    pub fn rows(&self) -> &[ProbVector] {
        &self.rows
    }

    pub fn row(&self, input: usize) -> &[f64] {
        self.rows[input].weights()
    }

    pub fn prob(&self, input: usize, output: usize) -> f64 {
        self.rows[input].get(output)
    }

    /// Crossover probability if this is a binary symmetric channel.
    pub fn bsc_crossover(&self) -> Option<f64> {
        if self.in_size != 2 || self.out_size != 2 {
            return None;
        }
        let (a, b) = (self.prob(0, 1), self.prob(1, 0));
        ((a - b).abs() <= 1e-12).then_some(a)
    }

    /// Output law for the input law `prior`.
    pub fn output_law(&self, prior: &ProbVector) -> Result<ProbVector> {
        if prior.len() != self.in_size {
            return Err(Error::Dimension(format!(
                "prior over {} letters for a channel with {} inputs",
                prior.len(),
                self.in_size
            )));
        }
        let mut out = vec![0.0; self.out_size];
        for (a, &pa) in prior.weights().iter().enumerate() {
            for (o, &q) in out.iter_mut().zip(self.row(a)) {
                *o += pa * q;
            }
        }
        Ok(ProbVector::from_masses(out))
    }
}

/// Binary symmetric channel with crossover `p`.
pub fn make_bsc(p: f64) -> Result<Channel> {
    check_unit("p", p)?;
    Ok(Channel::from_masses(vec![vec![1.0 - p, p], vec![p, 1.0 - p]]))
}

/// Serial concatenation: `first` feeds `second`.
pub fn compose(first: &Channel, second: &Channel) -> Result<Channel> {
    if first.out_size != second.in_size {
        return Err(Error::Dimension(format!(
            "cannot feed {} outputs into a channel with {} inputs",
            first.out_size, second.in_size
        )));
    }
    let rows = (0..first.in_size)
        .map(|a| {
            let mut out = vec![0.0; second.out_size];
            for (b, &pb) in first.row(a).iter().enumerate() {
                for (o, &q) in out.iter_mut().zip(second.row(b)) {
                    *o += pb * q;
                }
            }
            out
        })
        .collect();
    Ok(Channel::from_masses(rows))
}

// Outer product of the rows of `chs` at `input`, leftmost channel slowest.
fn product_row(chs: &[Channel], input: usize) -> Vec<f64> {
    let mut acc = vec![1.0];
    for ch in chs {
        let row = ch.row(input);
        acc = acc
            .iter()
            .flat_map(|&p| row.iter().map(move |&q| p * q))
            .collect();
    }
    acc
}

/// Conditionally independent outputs of several channels sharing one input.
pub fn parallel(chs: &[Channel]) -> Result<Channel> {
    let first = chs.first().ok_or(Error::Empty("channel list"))?;
    if let Some(i) = chs.iter().position(|c| c.in_size != first.in_size) {
        return Err(Error::Dimension(format!(
            "channel {i} has {} inputs, channel 0 has {}",
            chs[i].in_size, first.in_size
        )));
    }
    let rows = (0..first.in_size).map(|a| product_row(chs, a)).collect();
    Ok(Channel::from_masses(rows))
}

/// Output law and Bayes posterior of a channel driven by `prior`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseChannel {
    pub marginal: ProbVector,
    /// Row `b` is `P(input | output = b)`.
    pub posterior: Channel,
    /// Outputs with zero probability; their posterior rows are uniform.
    pub degenerate_outputs: Vec<usize>,
}

pub fn inverse_channel(prior: &ProbVector, ch: &Channel) -> Result<InverseChannel> {
    let marginal = ch.output_law(prior)?;
    let mut degenerate_outputs = Vec::new();
    let rows = (0..ch.out_size)
        .map(|b| {
            let pb = marginal.get(b);
            if pb <= 0.0 {
                degenerate_outputs.push(b);
                return vec![1.0 / ch.in_size as f64; ch.in_size];
            }
            let mut row: Vec<f64> = (0..ch.in_size)
                .map(|a| prior.get(a) * ch.prob(a, b) / pb)
                .collect();
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= total);
            row
        })
        .collect();
    Ok(InverseChannel {
        marginal,
        posterior: Channel::from_masses(rows),
        degenerate_outputs,
    })
}

/// Whether the encoder observes the identifier itself or a noisy copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Hidden,
    Visible,
}

/// Identifier law plus encoder and decoder measurement channels.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    q_x: ProbVector,
    enc_channels: Vec<Channel>,
    dec_channels: Vec<Channel>,
    kind: SourceKind,
}

impl SourceModel {
    pub fn new(
        q_x: ProbVector,
        enc_channels: Vec<Channel>,
        dec_channels: Vec<Channel>,
        kind: SourceKind,
    ) -> Result<Self> {
        if enc_channels.is_empty() {
            return Err(Error::InvalidModel("at least one encoder measurement is required".into()));
        }
        if dec_channels.is_empty() {
            return Err(Error::InvalidModel("at least one decoder measurement is required".into()));
        }
        let nx = q_x.len();
        for (side, chs) in [("encoder", &enc_channels), ("decoder", &dec_channels)] {
            if let Some(i) = chs.iter().position(|c| c.in_size != nx) {
                return Err(Error::Dimension(format!(
                    "{side} channel {i} has {} inputs but the source alphabet has {nx} letters",
                    chs[i].in_size
                )));
            }
        }
        Ok(Self {
            q_x,
            enc_channels,
            dec_channels,
            kind,
        })
    }

    /// Binary symmetric source observed through `m_e` BSC(`p_e`) encoder
    /// measurements and `m_d` BSC(`p_d`) decoder measurements.
    pub fn binary_hidden(p_e: f64, m_e: usize, p_d: f64, m_d: usize) -> Result<Self> {
        Self::new(
            ProbVector::uniform(2)?,
            vec![make_bsc(p_e)?; m_e],
            vec![make_bsc(p_d)?; m_d],
            SourceKind::Hidden,
        )
    }

    pub fn q_x(&self) -> &ProbVector {
        &self.q_x
    }

    pub fn enc_channels(&self) -> &[Channel] {
        &self.enc_channels
    }

    pub fn dec_channels(&self) -> &[Channel] {
        &self.dec_channels
    }

    pub fn kind(&self) -> SourceKind {
        self.kind
    }

    pub fn m_e(&self) -> usize {
        self.enc_channels.len()
    }

    pub fn m_d(&self) -> usize {
        self.dec_channels.len()
    }

    /// Size of the product encoder alphabet.
    pub fn enc_alphabet(&self) -> usize {
        self.enc_channels.iter().map(Channel::out_size).product()
    }

    /// Size of the product decoder alphabet.
    pub fn dec_alphabet(&self) -> usize {
        self.dec_channels.iter().map(Channel::out_size).product()
    }

    /// Number of cells of the joint over `(X̃_1..X̃_ME, X, Y_1..Y_MD)`.
    pub fn joint_cells(&self) -> u128 {
        self.enc_channels
            .iter()
            .chain(&self.dec_channels)
            .map(|c| c.out_size as u128)
            .product::<u128>()
            * self.q_x.len() as u128
    }

    pub(crate) fn check_size(&self) -> Result<()> {
        let cells = self.joint_cells();
        if cells > MAX_JOINT_CELLS {
            Err(Error::SizeGuard {
                cells,
                limit: MAX_JOINT_CELLS,
            })
        } else {
            Ok(())
        }
    }

    /// Axis of `X` in [`build_joint`] output.
    pub fn source_axis(&self) -> usize {
        self.m_e()
    }

    pub fn enc_axes(&self) -> Vec<usize> {
        (0..self.m_e()).collect()
    }

    pub fn dec_axes(&self) -> Vec<usize> {
        (self.m_e() + 1..self.m_e() + 1 + self.m_d()).collect()
    }
}

/// Joint law of `(X̃_1, .., X̃_ME, X, Y_1, .., Y_MD)`, flattened row-major.
pub fn build_joint(m: &SourceModel) -> Result<JointTable> {
    m.check_size()?;
    let nx = m.q_x.len();
    let dims: Vec<usize> = m
        .enc_channels
        .iter()
        .map(Channel::out_size)
        .chain(std::iter::once(nx))
        .chain(m.dec_channels.iter().map(Channel::out_size))
        .collect();
    let (na, nb) = (m.enc_alphabet(), m.dec_alphabet());
    let mut probs = vec![0.0; na * nx * nb];
    for x in 0..nx {
        let qx = m.q_x.get(x);
        if qx == 0.0 {
            continue;
        }
        let enc = product_row(&m.enc_channels, x);
        let dec = product_row(&m.dec_channels, x);
        for (a, &pa) in enc.iter().enumerate() {
            let base = (a * nx + x) * nb;
            for (b, &pb) in dec.iter().enumerate() {
                probs[base + b] = qx * pa * pb;
            }
        }
    }
    Ok(JointTable::from_parts(dims, probs))
}

/// The visible model an implementer would assume by treating the encoder's
/// measurement as the identifier itself.
///
/// Requires a binary hidden model with a single BSC encoder measurement and
/// BSC decoder measurements. Decoder `j` becomes BSC(`p_e * p_dj`).
pub fn vsm_projection(m: &SourceModel) -> Result<SourceModel> {
    if m.q_x.len() != 2 {
        return Err(Error::InvalidModel("visible projection needs a binary source".into()));
    }
    if m.m_e() != 1 {
        return Err(Error::InvalidModel(format!(
            "visible projection needs exactly one encoder measurement, got {}",
            m.m_e()
        )));
    }
    let enc = &m.enc_channels[0];
    let p_e = enc
        .bsc_crossover()
        .ok_or_else(|| Error::InvalidModel("encoder channel is not a BSC".into()))?;
    let dec = m
        .dec_channels
        .iter()
        .enumerate()
        .map(|(j, ch)| {
            let p_d = ch.bsc_crossover().ok_or_else(|| {
                Error::InvalidModel(format!("decoder channel {j} is not a BSC"))
            })?;
            make_bsc(star_unchecked(p_e, p_d))
        })
        .collect::<Result<Vec<_>>>()?;
    SourceModel::new(
        enc.output_law(&m.q_x)?,
        vec![Channel::identity(2)?],
        dec,
        SourceKind::Visible,
    )
}

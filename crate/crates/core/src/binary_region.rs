//! Closed-form region boundaries for a binary symmetric source.
//!
//! The encoder sees one BSC(`p_e`) measurement, the decoder `m_d`
//! independent BSC(`p_d`) measurements. Boundary points are reached by
//! auxiliary variables whose reverse channel `P(X̃|U)` is a BSC; the sweep
//! parameter is that channel's crossover `a ∈ [0, 1/2]`. With
//! `w = p_e * a` and `g(w) = H(Y_1..Y_md | U)`:
//!
//! ```text
//! r_s = g(1/2) - g(w)
//! r_l = 1 - h(w) - r_s
//! r_m = 1 - h(a) - r_s      (generated secret)
//! r_m = 1 - h(a)            (chosen secret)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{check_half, Error, Result};
use crate::info_math::{binary_entropy_unchecked, g_mixture_unchecked, star_unchecked};
use crate::models::{build_joint, SourceModel};
use crate::par::map_indexed;
use crate::rates::{RateTriple, SecretKind};

/// Grid size used when the caller does not pick one.
pub const DEFAULT_GRID: usize = 512;

/// Largest total number of binary variables for [`multi_encoder_corner`].
pub const MAX_BINARY_VARIABLES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    HsmGenerated,
    HsmChosen,
    Vsm,
}

impl BoundaryKind {
    pub fn label(&self) -> &'static str {
        match self {
            BoundaryKind::HsmGenerated => "hsm-generated",
            BoundaryKind::HsmChosen => "hsm-chosen",
            BoundaryKind::Vsm => "vsm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub param: f64,
    pub triple: RateTriple,
}

/// Boundary triples ordered by increasing sweep parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionBoundary {
    pub model_kind: BoundaryKind,
    pub param_name: String,
    pub points: Vec<BoundaryPoint>,
}

const PARAM_NAME: &str = "crossover of the BSC P(X~|U)";

fn check_params(p_e: f64, p_d: f64, m_d: u32) -> Result<()> {
    check_half("p_e", p_e)?;
    check_half("p_d", p_d)?;
    if m_d == 0 {
        return Err(Error::Domain {
            name: "m_d",
            value: 0.0,
            domain: "m_d >= 1",
        });
    }
    Ok(())
}

/// Single boundary point at auxiliary crossover `a`.
pub fn boundary_point(kind: BoundaryKind, p_e: f64, p_d: f64, m_d: u32, a: f64) -> Result<RateTriple> {
    check_params(p_e, p_d, m_d)?;
    check_half("a", a)?;
    Ok(point_unchecked(kind, p_e, p_d, m_d, a))
}

fn point_unchecked(kind: BoundaryKind, p_e: f64, p_d: f64, m_d: u32, a: f64) -> RateTriple {
    let h_a = binary_entropy_unchecked(a);
    match kind {
        BoundaryKind::HsmGenerated | BoundaryKind::HsmChosen => {
            let w = star_unchecked(p_e, a);
            let r_s = g_mixture_unchecked(0.5, m_d, p_d) - g_mixture_unchecked(w, m_d, p_d);
            let r_l = 1.0 - binary_entropy_unchecked(w) - r_s;
            let r_m = if kind == BoundaryKind::HsmGenerated {
                1.0 - h_a - r_s
            } else {
                1.0 - h_a
            };
            RateTriple::new(r_s, r_l, r_m)
        }
        BoundaryKind::Vsm => {
            let q = star_unchecked(p_e, p_d);
            let r_s = g_mixture_unchecked(0.5, m_d, q) - g_mixture_unchecked(a, m_d, q);
            let r_lm = 1.0 - h_a - r_s;
            RateTriple::new(r_s, r_lm, r_lm)
        }
    }
}

fn boundary(kind: BoundaryKind, p_e: f64, p_d: f64, m_d: u32, grid: usize) -> Result<RegionBoundary> {
    check_params(p_e, p_d, m_d)?;
    if grid < 2 {
        return Err(Error::Domain {
            name: "grid",
            value: grid as f64,
            domain: "grid >= 2",
        });
    }
    let last = (grid - 1) as f64;
    let points = map_indexed(grid, true, |i| {
        let param = 0.5 * i as f64 / last;
        BoundaryPoint {
            param,
            triple: point_unchecked(kind, p_e, p_d, m_d, param),
        }
    });
    Ok(RegionBoundary {
        model_kind: kind,
        param_name: PARAM_NAME.to_string(),
        points,
    })
}

/// Generated-secret boundary of the hidden source model.
pub fn hsm_generated_boundary(p_e: f64, p_d: f64, m_d: u32, grid: usize) -> Result<RegionBoundary> {
    boundary(BoundaryKind::HsmGenerated, p_e, p_d, m_d, grid)
}

/// Chosen-secret boundary of the hidden source model.
pub fn hsm_chosen_boundary(p_e: f64, p_d: f64, m_d: u32, grid: usize) -> Result<RegionBoundary> {
    boundary(BoundaryKind::HsmChosen, p_e, p_d, m_d, grid)
}

/// Boundary of the visible model that treats X̃ as noise-free and each
/// decoder measurement as BSC(`p_e * p_d`).
pub fn vsm_boundary(p_e: f64, p_d: f64, m_d: u32, grid: usize) -> Result<RegionBoundary> {
    boundary(BoundaryKind::Vsm, p_e, p_d, m_d, grid)
}

/// The maximum-key-rate triple; ties go to the smallest parameter.
pub fn corner_point(boundary: &RegionBoundary) -> Result<RateTriple> {
    let mut best: Option<&BoundaryPoint> = None;
    for p in &boundary.points {
        if best.is_none_or(|b| p.triple.r_s > b.triple.r_s) {
            best = Some(p);
        }
    }
    best.map(|p| p.triple).ok_or(Error::Empty("boundary"))
}

/// Corner triple with `U = (X̃_1, .., X̃_me)`, by exact enumeration of the
/// joint law.
pub fn multi_encoder_corner(p_e: f64, m_e: usize, p_d: f64, m_d: usize) -> Result<RateTriple> {
    multi_encoder_corner_for(SecretKind::Generated, p_e, m_e, p_d, m_d)
}

pub fn multi_encoder_corner_for(
    kind: SecretKind,
    p_e: f64,
    m_e: usize,
    p_d: f64,
    m_d: usize,
) -> Result<RateTriple> {
    check_half("p_e", p_e)?;
    check_half("p_d", p_d)?;
    if m_e == 0 || m_d == 0 {
        return Err(Error::InvalidModel("m_e and m_d must both be at least 1".into()));
    }
    if m_e + m_d + 1 > MAX_BINARY_VARIABLES {
        return Err(Error::SizeGuard {
            cells: 1u128 << (m_e + m_d + 1),
            limit: 1u128 << MAX_BINARY_VARIABLES,
        });
    }
    let model = SourceModel::binary_hidden(p_e, m_e, p_d, m_d)?;
    let joint = build_joint(&model)?;
    let enc = model.enc_axes();
    let r_s = joint.mutual_information_between(&enc, &model.dec_axes())?;
    let i_ux = joint.mutual_information_between(&enc, &[model.source_axis()])?;
    let h_u = joint.marginal_entropy(&enc)?;
    let r_m = match kind {
        SecretKind::Generated => h_u - r_s,
        SecretKind::Chosen => h_u,
    };
    Ok(RateTriple::new(r_s, i_ux - r_s, r_m))
}

/// Signed per-coordinate percentage differences `100 (a - b) / b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    pub r_s: Option<f64>,
    pub r_l: Option<f64>,
    pub r_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub a: RateTriple,
    pub b: RateTriple,
    /// `None` where the reference component of `b` is zero.
    pub delta_pct: Deltas,
    /// Names of the components whose delta is undefined.
    pub undefined: Vec<String>,
}

pub fn compare_regions(a: RateTriple, b: RateTriple) -> ComparisonReport {
    let mut undefined = Vec::new();
    let mut delta = |name: &str, x: f64, y: f64| {
        if y.abs() < 1e-12 {
            undefined.push(name.to_string());
            None
        } else {
            Some(100.0 * (x - y) / y)
        }
    };
    let delta_pct = Deltas {
        r_s: delta("r_s", a.r_s, b.r_s),
        r_l: delta("r_l", a.r_l, b.r_l),
        r_m: delta("r_m", a.r_m, b.r_m),
    };
    ComparisonReport {
        a,
        b,
        delta_pct,
        undefined,
    }
}

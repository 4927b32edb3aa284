use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use kls_core::binary_region::{
    boundary_point, compare_regions, hsm_chosen_boundary, hsm_generated_boundary, multi_encoder_corner_for,
    vsm_boundary, BoundaryKind, RegionBoundary, DEFAULT_GRID,
};
use kls_core::generic_region::{pareto_search_with, SearchConfig};
use kls_core::models::{vsm_projection, SourceModel};
use kls_core::{RateTriple, SecretKind};

use crate::output::{csv, manifest_path, write_file, RunManifest, TOOL_VERSION};

const INNER_BOUND_NOTE: &str =
    "numerical frontier: an inner bound on the region boundary outside the binary symmetric case";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    HsmGenerated,
    HsmChosen,
    Vsm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KeyKind {
    Generated,
    Chosen,
}

impl From<KeyKind> for SecretKind {
    fn from(k: KeyKind) -> Self {
        match k {
            KeyKind::Generated => SecretKind::Generated,
            KeyKind::Chosen => SecretKind::Chosen,
        }
    }
}

/// Settings for the numerical search used with `--model`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SearchArgs {
    /// Random starts per scalarization.
    #[arg(long, default_value_t = 64)]
    pub starts: usize,
    /// Maximum improvement sweeps per start.
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Letters of the auxiliary variable (default |X| + 2).
    #[arg(long)]
    pub card_u: Option<usize>,
    /// Random auxiliary channels added to the candidates.
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            n_random_starts: self.starts,
            n_refine_iters: self.iters,
            seed: self.seed,
            card_u: self.card_u,
            n_samples: self.samples,
            ..SearchConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RegionArgs {
    /// With `--model`, hsm-* select the secret kind of the model as given
    /// and vsm first projects a binary model onto its visible counterpart.
    #[arg(long, value_enum)]
    pub kind: RegionKind,
    /// JSON model file; runs the numerical search instead of the closed form.
    #[arg(long, conflicts_with_all = ["p_e", "p_d"])]
    pub model: Option<PathBuf>,
    #[arg(long, required_unless_present = "model")]
    pub p_e: Option<f64>,
    #[arg(long, required_unless_present = "model")]
    pub p_d: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub m_d: u32,
    /// Points on the closed-form boundary.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    /// Compare the hidden model (other) with its visible counterpart
    /// (baseline) at the same parameters.
    #[arg(long)]
    pub hsm_vsm: bool,
    #[arg(long)]
    pub p_e: f64,
    #[arg(long)]
    pub p_d: f64,
    #[arg(long, default_value_t = 1)]
    pub m_d: usize,
    #[arg(long, default_value_t = 1)]
    pub m_e: usize,
    #[arg(long, value_enum, default_value_t = KeyKind::Generated)]
    pub kind: KeyKind,
    /// Parameters of the other model; each defaults to the baseline value.
    #[arg(long, conflicts_with = "hsm_vsm")]
    pub other_p_e: Option<f64>,
    #[arg(long, conflicts_with = "hsm_vsm")]
    pub other_p_d: Option<f64>,
    #[arg(long, conflicts_with = "hsm_vsm")]
    pub other_m_d: Option<usize>,
    #[arg(long, conflicts_with = "hsm_vsm")]
    pub other_m_e: Option<usize>,
    /// Output JSON (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CornerArgs {
    #[arg(long)]
    pub p_e: f64,
    #[arg(long, default_value_t = 1)]
    pub m_e: usize,
    #[arg(long)]
    pub p_d: f64,
    #[arg(long, default_value_t = 1)]
    pub m_d: usize,
    #[arg(long, value_enum, default_value_t = KeyKind::Generated)]
    pub kind: KeyKind,
    /// Output JSON (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ExportArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write to this path (or directory, for export-figures) instead of
    /// the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

// Writes `text` to `out` with its manifest, or prints it.
fn emit(out: Option<&Path>, text: &str, manifest: RunManifest) -> Result<()> {
    match out {
        Some(path) => {
            write_file(path, text)?;
            manifest.write(&manifest_path(path))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn triple_row(param: f64, t: &RateTriple) -> Vec<f64> {
    vec![param, t.r_s, t.r_l, t.r_m]
}

fn binary_boundary(kind: RegionKind, p_e: f64, p_d: f64, m_d: u32, grid: usize) -> Result<RegionBoundary> {
    Ok(match kind {
        RegionKind::HsmGenerated => hsm_generated_boundary(p_e, p_d, m_d, grid)?,
        RegionKind::HsmChosen => hsm_chosen_boundary(p_e, p_d, m_d, grid)?,
        RegionKind::Vsm => vsm_boundary(p_e, p_d, m_d, grid)?,
    })
}

fn load_model(path: &Path) -> Result<SourceModel> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    SourceModel::from_json(&text).with_context(|| format!("model file {}", path.display()))
}

pub fn region(a: &RegionArgs) -> Result<()> {
    let mut manifest = RunManifest::new("region", a, a.search.seed)?;
    let rows: Vec<Vec<f64>> = match &a.model {
        None => {
            let (p_e, p_d) = (a.p_e.expect("required by clap"), a.p_d.expect("required by clap"));
            let b = binary_boundary(a.kind, p_e, p_d, a.m_d, a.grid)?;
            b.points.iter().map(|p| triple_row(p.param, &p.triple)).collect()
        }
        Some(path) => {
            let model = load_model(path)?;
            let (model, kind) = match a.kind {
                RegionKind::HsmGenerated => (model, SecretKind::Generated),
                RegionKind::HsmChosen => (model, SecretKind::Chosen),
                RegionKind::Vsm => (
                    vsm_projection(&model).with_context(|| format!("model file {}", path.display()))?,
                    SecretKind::Generated,
                ),
            };
            let run = pareto_search_with(&model, kind, &a.search.config())?;
            eprintln!("note: {INNER_BOUND_NOTE}");
            manifest.notes.push(INNER_BOUND_NOTE.into());
            let mut rows: Vec<Vec<f64>> = run
                .frontier
                .iter()
                .map(|p| triple_row(run.candidate_index(&p.origin) as f64, &p.triple))
                .collect();
            rows.sort_by(|x, y| x[0].total_cmp(&y[0]));
            rows
        }
    };
    let text = csv(&["param", "r_s", "r_l", "r_m"], &rows)?;
    emit(a.out.as_deref(), &text, manifest)
}

fn corner_of(kind: SecretKind, p_e: f64, m_e: usize, p_d: f64, m_d: usize) -> Result<RateTriple> {
    if m_e == 1 {
        let m_d = u32::try_from(m_d).context("m_d is too large")?;
        let bk = match kind {
            SecretKind::Generated => BoundaryKind::HsmGenerated,
            SecretKind::Chosen => BoundaryKind::HsmChosen,
        };
        Ok(boundary_point(bk, p_e, p_d, m_d, 0.0)?)
    } else {
        Ok(multi_encoder_corner_for(kind, p_e, m_e, p_d, m_d)?)
    }
}

fn side(label: &str, p_e: f64, m_e: usize, p_d: f64, m_d: usize, t: &RateTriple) -> serde_json::Value {
    json!({
        "model": label,
        "p_e": p_e,
        "m_e": m_e,
        "p_d": p_d,
        "m_d": m_d,
        "corner": t,
    })
}

pub fn compare(a: &CompareArgs) -> Result<()> {
    let kind = SecretKind::from(a.kind);
    let (baseline, other, mode) = if a.hsm_vsm {
        if a.m_e != 1 || kind != SecretKind::Generated {
            bail!("--hsm-vsm compares generated-secret corners with one encoder measurement");
        }
        let m_d = u32::try_from(a.m_d).context("m_d is too large")?;
        let vsm = boundary_point(BoundaryKind::Vsm, a.p_e, a.p_d, m_d, 0.0)?;
        let hsm = boundary_point(BoundaryKind::HsmGenerated, a.p_e, a.p_d, m_d, 0.0)?;
        (
            side("vsm", a.p_e, 1, a.p_d, a.m_d, &vsm),
            side("hsm", a.p_e, 1, a.p_d, a.m_d, &hsm),
            "hsm-vsm",
        )
    } else {
        let o_pe = a.other_p_e.unwrap_or(a.p_e);
        let o_pd = a.other_p_d.unwrap_or(a.p_d);
        let o_md = a.other_m_d.unwrap_or(a.m_d);
        let o_me = a.other_m_e.unwrap_or(a.m_e);
        let b = corner_of(kind, a.p_e, a.m_e, a.p_d, a.m_d)?;
        let o = corner_of(kind, o_pe, o_me, o_pd, o_md)?;
        (
            side("hsm", a.p_e, a.m_e, a.p_d, a.m_d, &b),
            side("hsm", o_pe, o_me, o_pd, o_md, &o),
            "parameters",
        )
    };
    let corner = |v: &serde_json::Value| -> Result<RateTriple> { Ok(serde_json::from_value(v["corner"].clone())?) };
    let (b, o) = (corner(&baseline)?, corner(&other)?);
    let forward = compare_regions(o, b);
    let reverse = compare_regions(b, o);
    let report = json!({
        "mode": mode,
        "kind": a.kind,
        "baseline": baseline,
        "other": other,
        "delta_pct": forward.delta_pct,
        "undefined": forward.undefined,
        "reverse_delta_pct": reverse.delta_pct,
        "reverse_undefined": reverse.undefined,
    });
    let text = serde_json::to_string_pretty(&report)? + "\n";
    emit(a.out.as_deref(), &text, RunManifest::new("compare", a, 0)?)
}

pub fn corner(a: &CornerArgs) -> Result<()> {
    let t = multi_encoder_corner_for(a.kind.into(), a.p_e, a.m_e, a.p_d, a.m_d)?;
    let report = json!({
        "p_e": a.p_e,
        "m_e": a.m_e,
        "p_d": a.p_d,
        "m_d": a.m_d,
        "kind": a.kind,
        "r_s": t.r_s,
        "r_l": t.r_l,
        "r_m": t.r_m,
    });
    let text = serde_json::to_string_pretty(&report)? + "\n";
    emit(a.out.as_deref(), &text, RunManifest::new("corner", a, 0)?)
}

const FIG_P_E: [f64; 2] = [0.03, 0.10];
const FIG_M_D: [u32; 2] = [1, 3];
const FIG_P_D: f64 = 0.10;
const FIG_MAX_M_E: usize = 3;

pub fn export_figures(a: &ExportArgs) -> Result<()> {
    let dir = &a.out_dir;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut files = Vec::new();
    let mut write = |name: String, header: [&str; 3], rows: Vec<Vec<f64>>| -> Result<()> {
        write_file(&dir.join(&name), &csv(&header, &rows)?)?;
        files.push(name);
        Ok(())
    };
    for p_e in FIG_P_E {
        for m_d in FIG_M_D {
            let tag = format!("pe{p_e:.2}_md{m_d}");
            for (label, kind) in [("hsm", RegionKind::HsmGenerated), ("vsm", RegionKind::Vsm)] {
                let b = binary_boundary(kind, p_e, FIG_P_D, m_d, a.grid)?;
                let pick = |f: fn(&RateTriple) -> f64| -> Vec<Vec<f64>> {
                    b.points.iter().map(|p| vec![p.param, p.triple.r_l, f(&p.triple)]).collect()
                };
                write(format!("fig3_{label}_{tag}.csv"), ["param", "r_l", "r_m"], pick(|t| t.r_m))?;
                write(format!("fig4_{label}_{tag}.csv"), ["param", "r_l", "r_s"], pick(|t| t.r_s))?;
            }
            let corners = (1..=FIG_MAX_M_E)
                .map(|m_e| Ok((m_e, multi_encoder_corner_for(SecretKind::Generated, p_e, m_e, FIG_P_D, m_d as usize)?)))
                .collect::<Result<Vec<_>>>()?;
            let pick = |f: fn(&RateTriple) -> f64| -> Vec<Vec<f64>> {
                corners.iter().map(|(m_e, t)| vec![*m_e as f64, t.r_l, f(t)]).collect()
            };
            write(format!("fig5_hsm_{tag}.csv"), ["param", "r_l", "r_m"], pick(|t| t.r_m))?;
            write(format!("fig6_hsm_{tag}.csv"), ["param", "r_l", "r_s"], pick(|t| t.r_s))?;
        }
    }
    let mut manifest = RunManifest::new("export-figures", a, 0)?;
    manifest.notes.push(format!(
        "p_d = {FIG_P_D}; fig3/fig4 param is the crossover of P(X~|U); fig5/fig6 param is m_e"
    ));
    manifest.notes.extend(files);
    manifest.write(&dir.join("manifest.json"))
}

pub fn replay(a: &ReplayArgs) -> Result<()> {
    let manifest = RunManifest::load(&a.manifest)?;
    if manifest.tool_version != TOOL_VERSION {
        eprintln!(
            "warning: manifest written by {}, replaying with {TOOL_VERSION}",
            manifest.tool_version
        );
    }
    let mut m = manifest;
    if let Some(out) = &a.out {
        let key = if m.command == "export-figures" { "out_dir" } else { "out" };
        m.parameters.insert(key.into(), json!(out));
    }
    match m.command.as_str() {
        "region" => region(&m.arguments()?),
        "compare" => compare(&m.arguments()?),
        "corner" => corner(&m.arguments()?),
        "export-figures" => export_figures(&m.arguments()?),
        other => bail!("unknown command `{other}` in {}", a.manifest.display()),
    }
}

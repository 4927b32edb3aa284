//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines come out in
//! order; the process fails if any criterion fails.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kls_core::binary_region::{
    boundary_point, hsm_chosen_boundary, hsm_generated_boundary, multi_encoder_corner, vsm_boundary, BoundaryKind,
};
use kls_core::generic_region::{pareto_search_with, timeshare, SearchConfig};
use kls_core::info_math::{g_mixture, inv_binary_entropy, ProbVector};
use kls_core::masking::{otp_unwrap, otp_wrap, KeySpace};
use kls_core::models::SourceModel;
use kls_core::{RateTriple, SecretKind};

// ---- independent oracles -------------------------------------------------

fn hb(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

fn entropy(masses: impl IntoIterator<Item = f64>) -> f64 {
    masses.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

/// Corner triple with `U = X̃_{1:m_e}` for a uniform binary source, by
/// brute-force enumeration of all `2^(1 + m_e + m_d)` atoms.
fn enumerated_corner(p_e: f64, m_e: usize, p_d: f64, m_d: usize) -> (f64, f64, f64) {
    let mut u = HashMap::new();
    let mut y = HashMap::new();
    let mut uy = HashMap::new();
    let mut ux = HashMap::new();
    for x in 0..2u32 {
        for xt in 0..1u32 << m_e {
            for yy in 0..1u32 << m_d {
                let flips_e = (0..m_e).filter(|i| (xt >> i) & 1 != x).count() as i32;
                let flips_d = (0..m_d).filter(|i| (yy >> i) & 1 != x).count() as i32;
                let p = 0.5
                    * p_e.powi(flips_e)
                    * (1.0 - p_e).powi(m_e as i32 - flips_e)
                    * p_d.powi(flips_d)
                    * (1.0 - p_d).powi(m_d as i32 - flips_d);
                *u.entry(xt).or_insert(0.0) += p;
                *y.entry(yy).or_insert(0.0) += p;
                *uy.entry((xt, yy)).or_insert(0.0) += p;
                *ux.entry((xt, x)).or_insert(0.0) += p;
            }
        }
    }
    let h_u = entropy(u.into_values());
    let i_uy = h_u + entropy(y.into_values()) - entropy(uy.into_values());
    let i_ux = h_u + 1.0 - entropy(ux.into_values());
    (i_uy, i_ux - i_uy, h_u - i_uy)
}

/// Visible-model corner: the encoder observation is treated as the source
/// and each decoder measurement as BSC(`p_e * p_d`).
fn enumerated_vsm_corner(p_e: f64, p_d: f64, m_d: usize) -> (f64, f64, f64) {
    enumerated_corner(0.0, 1, p_e * (1.0 - p_d) + (1.0 - p_e) * p_d, m_d)
}

fn pct(new: f64, old: f64) -> f64 {
    100.0 * (new - old) / old
}

// ---- reporting ------------------------------------------------------------

struct Outcome {
    pass: bool,
    detail: String,
}

struct Suite {
    failed: Vec<usize>,
}

impl Suite {
    fn run(&mut self, id: usize, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let t0 = Instant::now();
        let mut out = f();
        let elapsed = t0.elapsed();
        if let Some(b) = budget {
            if elapsed >= b {
                out.pass = false;
                out.detail.push_str(&format!("; over the {b:?} budget"));
            }
        }
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {id} [{tag}] {name}: {} ({elapsed:.2?})", out.detail);
        if !out.pass {
            self.failed.push(id);
        }
    }
}

fn within(v: f64, target: f64, tol: f64) -> bool {
    (v - target).abs() <= tol
}

// ---- criteria ---------------------------------------------------------------

fn leakage_gain() -> Outcome {
    let (p_e, p_d) = (0.03, 0.10);
    let hsm = boundary_point(BoundaryKind::HsmGenerated, p_e, p_d, 1, 0.0).unwrap();
    let vsm = boundary_point(BoundaryKind::Vsm, p_e, p_d, 1, 0.0).unwrap();
    let q = p_e * (1.0 - p_d) + (1.0 - p_e) * p_d;
    let (oracle_hsm, oracle_vsm) = (hb(q) - hb(p_e), hb(q));
    let ratio = hsm.r_l / vsm.r_l;
    let pass = within(ratio, 0.64, 0.02) && within(hsm.r_l, oracle_hsm, 1e-12) && within(vsm.r_l, oracle_vsm, 1e-12);
    Outcome {
        pass,
        detail: format!(
            "r_l(HSM)/r_l(VSM) = {ratio:.4} (target 0.64 +/- 0.02); r_l(HSM) = {:.6} vs H_b(0.124) - H_b(0.03) = {oracle_hsm:.6}; r_l(VSM) = {:.6} vs H_b(0.124) = {oracle_vsm:.6}",
            hsm.r_l, vsm.r_l
        ),
    }
}

fn key_rate_optimism() -> Outcome {
    let (p_e, p_d, m_d) = (0.03, 0.10, 3);
    let hsm = boundary_point(BoundaryKind::HsmGenerated, p_e, p_d, m_d, 0.0).unwrap();
    let vsm = boundary_point(BoundaryKind::Vsm, p_e, p_d, m_d, 0.0).unwrap();
    let (hsm_enum, _, _) = enumerated_corner(p_e, 1, p_d, m_d as usize);
    let (vsm_enum, _, _) = enumerated_vsm_corner(p_e, p_d, m_d as usize);
    let d = pct(vsm.r_s, hsm_enum);
    let pass = within(d, 14.0, 2.0) && within(hsm.r_s, hsm_enum, 1e-12) && within(vsm.r_s, vsm_enum, 1e-12);
    Outcome {
        pass,
        detail: format!(
            "VSM r_s exceeds HSM r_s by {d:.2}% (target 14 +/- 2); HSM r_s closed form {:.10} vs 2^5-atom enumeration {hsm_enum:.10}",
            hsm.r_s
        ),
    }
}

fn encoder_noise() -> Outcome {
    let (p_d, m_d) = (0.10, 1);
    let base = boundary_point(BoundaryKind::HsmGenerated, 0.03, p_d, m_d, 0.0).unwrap();
    let noisy = boundary_point(BoundaryKind::HsmGenerated, 0.10, p_d, m_d, 0.0).unwrap();
    let ob = enumerated_corner(0.03, 1, p_d, 1);
    let on = enumerated_corner(0.10, 1, p_d, 1);
    let d = [pct(noisy.r_s, base.r_s), pct(noisy.r_l, base.r_l), pct(noisy.r_m, base.r_m)];
    let od = [pct(on.0, ob.0), pct(on.1, ob.1), pct(on.2, ob.2)];
    let targets = [-30.0, -39.0, 26.0];
    let pass = d.iter().zip(targets).all(|(&v, t)| within(v, t, 2.0))
        && d.iter().zip(od).all(|(a, b)| within(*a, b, 1e-9));
    Outcome {
        pass,
        detail: format!(
            "p_e 0.03 -> 0.10 changes (r_s, r_l, r_m) by ({:+.2}%, {:+.2}%, {:+.2}%) (targets -30/-39/+26 +/- 2); enumeration ({:+.2}%, {:+.2}%, {:+.2}%)",
            d[0], d[1], d[2], od[0], od[1], od[2]
        ),
    }
}

fn multi_encoder() -> Outcome {
    let (p_e, p_d) = (0.03, 0.10);
    let one = multi_encoder_corner(p_e, 1, p_d, 3).unwrap();
    let three = multi_encoder_corner(p_e, 3, p_d, 3).unwrap();
    let o1 = enumerated_corner(p_e, 1, p_d, 3);
    let o3 = enumerated_corner(p_e, 3, p_d, 3);
    let d = [pct(three.r_s, one.r_s), pct(three.r_l, one.r_l), pct(three.r_m, one.r_m)];
    let oracle_ok = [(one, o1), (three, o3)].iter().all(|(t, o)| {
        within(t.r_s, o.0, 1e-12) && within(t.r_l, o.1, 1e-12) && within(t.r_m, o.2, 1e-12)
    });
    // Storage above one bit shows up on the single-decoder-measurement curve.
    let storage_md1 = multi_encoder_corner(p_e, 3, p_d, 1).unwrap().r_m;
    let targets = [20.0, 36.0, 145.0];
    let pass = d.iter().zip(targets).all(|(&v, t)| within(v, t, 3.0)) && oracle_ok && storage_md1 > 1.0;
    Outcome {
        pass,
        detail: format!(
            "m_e 1 -> 3 at m_d = 3 changes (r_s, r_l, r_m) by ({:+.2}%, {:+.2}%, {:+.2}%) (targets +20/+36/+145 +/- 3); enumeration agrees: {oracle_ok}; r_m(m_e = 3) = {storage_md1:.4} at m_d = 1 and {:.4} at m_d = 3",
            d[0], d[1], d[2], three.r_m
        ),
    }
}

/// Closed-form boundary point with the same `H(X|U) = 1 - r_s - r_l`.
fn matched_curve_point(t: &RateTriple, p_e: f64, p_d: f64, m_d: u32) -> RateTriple {
    let nu = (1.0 - t.r_s - t.r_l).clamp(0.0, 1.0);
    let w = inv_binary_entropy(nu).unwrap();
    let a = ((w - p_e) / (1.0 - 2.0 * p_e)).clamp(0.0, 0.5);
    boundary_point(BoundaryKind::HsmGenerated, p_e, p_d, m_d, a).unwrap()
}

// Closed-form points used to locate the boundary surface.
const CURVE_GRID: usize = 16385;

struct BinaryRun {
    p_e: f64,
    p_d: f64,
    m_d: u32,
    frontier: Vec<RateTriple>,
}

fn optimality(runs: &mut Vec<BinaryRun>) -> Outcome {
    let cfg = SearchConfig {
        n_random_starts: 8,
        ..SearchConfig::default()
    };
    let uniform = ProbVector::uniform(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut optimum_dev, mut coverage_gap, mut asym) = (0.0f64, 0.0f64, 0.0f64);
    let mut slack_range = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..20 {
        let p_e = rng.gen_range(0.01..=0.3);
        let p_d = rng.gen_range(0.01..=0.3);
        let m_d = rng.gen_range(1..=3u32);
        let m = SourceModel::binary_hidden(p_e, 1, p_d, m_d as usize).unwrap();
        let run = pareto_search_with(&m, SecretKind::Generated, &cfg).unwrap();

        for r in &run.scalarized {
            let c = matched_curve_point(&r.triple, p_e, p_d, m_d);
            optimum_dev = optimum_dev.max(r.triple.max_abs_diff(&c));
            let inv = r.aux.reverse(&uniform).unwrap();
            let crossovers: Vec<f64> = (0..r.aux.card_u())
                .filter(|&u| inv.marginal.get(u) > 1e-6)
                .map(|u| {
                    let t = inv.posterior.prob(u, 1);
                    t.min(1.0 - t)
                })
                .collect();
            let hi = crossovers.iter().copied().fold(f64::MIN, f64::max);
            let lo = crossovers.iter().copied().fold(f64::MAX, f64::min);
            asym = asym.max(hi - lo);
        }
        // Slack of each frontier point: how far it can move along
        // (+r_s, -r_l, -r_m) before leaving the closed-form region. Zero on
        // the boundary surface, negative outside.
        let curve: Vec<RateTriple> = hsm_generated_boundary(p_e, p_d, m_d, CURVE_GRID)
            .unwrap()
            .points
            .iter()
            .map(|p| p.triple)
            .collect();
        let slack = |f: &RateTriple, c: &RateTriple| (c.r_s - f.r_s).min(f.r_l - c.r_l).min(f.r_m - c.r_m);
        for f in &run.frontier {
            let matched = matched_curve_point(&f.triple, p_e, p_d, m_d);
            let s = curve.iter().map(|c| slack(&f.triple, c)).fold(slack(&f.triple, &matched), f64::max);
            slack_range = (slack_range.0.min(s), slack_range.1.max(s));
        }
        // Every closed-form point is matched by some frontier point.
        for c in curve.iter().step_by(CURVE_GRID / 256) {
            let gap = run
                .frontier
                .iter()
                .map(|f| (-slack(&f.triple, c)).max(0.0))
                .fold(f64::INFINITY, f64::min);
            coverage_gap = coverage_gap.max(gap);
        }
        runs.push(BinaryRun {
            p_e,
            p_d,
            m_d,
            frontier: run.frontier.iter().map(|f| f.triple).collect(),
        });
    }
    let pass = optimum_dev <= 2e-3
        && slack_range.0 >= -2e-3
        && slack_range.1 <= 2e-3
        && coverage_gap <= 2e-3
        && asym <= 1e-3;
    Outcome {
        pass,
        detail: format!(
            "20 configs, 8 starts: frontier slack to the closed-form boundary in [{:.2e}, {:.2e}], closed form covered within {coverage_gap:.2e}, scalarized optima within {optimum_dev:.2e} of it (tol 2e-3); row asymmetry {asym:.2e} (tol 1e-3)",
            slack_range.0, slack_range.1
        ),
    }
}

fn mgl_convexity() -> Outcome {
    let n = 200;
    let mut worst = f64::INFINITY;
    let mut oracle_dev = 0.0f64;
    for m in 1..=3u32 {
        for p_d in [0.05, 0.10, 0.25] {
            let f: Vec<f64> = (0..n)
                .map(|i| {
                    let w = inv_binary_entropy(i as f64 / (n - 1) as f64).unwrap();
                    g_mixture(w, m, p_d).unwrap()
                })
                .collect();
            for i in 1..n - 1 {
                worst = worst.min(f[i - 1] - 2.0 * f[i] + f[i + 1]);
            }
            // Spot-check the mixture entropy against the enumerated H(Y|U).
            for w in [0.0, 0.1, 0.37] {
                let mut h = 0.0;
                for y in 0..1u32 << m {
                    let k = y.count_ones() as i32;
                    let px = |x_flip: f64| {
                        let ones = p_d * (1.0 - x_flip) + (1.0 - p_d) * x_flip;
                        ones.powi(k) * (1.0 - ones).powi(m as i32 - k)
                    };
                    let p = (1.0 - w) * px(0.0) + w * px(1.0);
                    if p > 0.0 {
                        h -= p * p.log2();
                    }
                }
                oracle_dev = oracle_dev.max((h - g_mixture(w, m, p_d).unwrap()).abs());
            }
        }
    }
    Outcome {
        pass: worst >= -1e-8 && oracle_dev < 1e-12,
        detail: format!(
            "smallest second difference of g(H_b^-1(v)) over m in 1..3, p_d in {{0.05, 0.10, 0.25}}: {worst:.3e} (>= -1e-8); g vs enumeration {oracle_dev:.1e}"
        ),
    }
}

fn structural_identities() -> Outcome {
    let grid = 512;
    let mut checked = 0usize;
    let mut problems = Vec::new();
    for p_e in [0.0, 0.03, 0.10, 0.25] {
        for p_d in [0.01, 0.10, 0.30] {
            for m_d in 1..=3u32 {
                let g = hsm_generated_boundary(p_e, p_d, m_d, grid).unwrap();
                let c = hsm_chosen_boundary(p_e, p_d, m_d, grid).unwrap();
                let v = vsm_boundary(p_e, p_d, m_d, grid).unwrap();
                for ((gp, cp), vp) in g.points.iter().zip(&c.points).zip(&v.points) {
                    let (g, c, v) = (gp.triple, cp.triple, vp.triple);
                    checked += 1;
                    if (c.r_m - g.r_m - g.r_s).abs() > 1e-12 {
                        problems.push(format!("chosen-generated storage gap at {p_e},{p_d},{m_d},{}", gp.param));
                    }
                    if !(g.r_m >= g.r_l - 1e-12 && g.r_l >= 0.0) {
                        problems.push(format!("ordering at {p_e},{p_d},{m_d},{}", gp.param));
                    }
                    if v.r_l != v.r_m {
                        problems.push(format!("VSM r_l != r_m at {p_e},{p_d},{m_d}"));
                    }
                    if m_d == 1 && (v.r_m - g.r_m).abs() > 1e-12 {
                        problems.push(format!("storage columns differ at {p_e},{p_d},{}", gp.param));
                    }
                }
            }
        }
    }
    Outcome {
        pass: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("{checked} boundary points: r_m(chosen) - r_m(generated) = r_s, r_m >= r_l >= 0, VSM r_l = r_m, HSM/VSM storage equal at m_d = 1")
        } else {
            format!("{} violations, first: {}", problems.len(), problems[0])
        },
    }
}

fn time_sharing(runs: &[BinaryRun]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let run = &runs[rng.gen_range(0..runs.len())];
        let t1 = run.frontier[rng.gen_range(0..run.frontier.len())];
        let t2 = run.frontier[rng.gen_range(0..run.frontier.len())];
        let mix = timeshare(t1, t2, rng.gen_range(0.0..=1.0)).unwrap();
        let gap = run
            .frontier
            .iter()
            .map(|f| (mix.r_s - f.r_s).max(f.r_l - mix.r_l).max(f.r_m - mix.r_m).max(0.0))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(gap);
    }
    let first = &runs[0];
    Outcome {
        pass: worst <= 1e-3,
        detail: format!(
            "1000 convex combinations of frontier pairs over the {} frontiers (first: p_e {:.3}, p_d {:.3}, m_d {}): worst domination gap {worst:.2e} (tol 1e-3)",
            runs.len(),
            first.p_e,
            first.p_d,
            first.m_d
        ),
    }
}

fn masking() -> Outcome {
    let mut round_trip = true;
    for n in 1..=64 {
        let ks = KeySpace::new(n).unwrap();
        for s in 0..n {
            for k in 0..n {
                round_trip &= otp_unwrap(otp_wrap(s, k, ks).unwrap(), k, ks).unwrap() == s;
            }
        }
    }
    // With s uniform, P(masked = c | s_gen = k) = #{s : wrap(s, k) = c} / n.
    // Exact uniformity and independence means every count is exactly 1.
    let mut uniform = true;
    for n in 1..=16 {
        let ks = KeySpace::new(n).unwrap();
        for k in 0..n {
            let mut counts = vec![0u32; n];
            for s in 0..n {
                counts[otp_wrap(s, k, ks).unwrap()] += 1;
            }
            uniform &= counts.iter().all(|&c| c == 1);
        }
    }
    Outcome {
        pass: round_trip && uniform,
        detail: format!("round trip exact for all |S| <= 64: {round_trip}; masked key exactly uniform given every generated key for |S| <= 16: {uniform}"),
    }
}

fn main() {
    let mut suite = Suite { failed: Vec::new() };
    let second = Some(Duration::from_secs(1));
    suite.run(1, "HSM vs VSM leakage gain", second, leakage_gain);
    suite.run(2, "VSM key-rate over-optimism", second, key_rate_optimism);
    suite.run(3, "encoder-noise sensitivity", second, encoder_noise);
    suite.run(4, "multi-encoder cost", second, multi_encoder);
    let mut runs = Vec::new();
    suite.run(5, "binary optimality of the numerical frontier", Some(Duration::from_secs(600)), || {
        optimality(&mut runs)
    });
    suite.run(6, "MGL convexity", None, mgl_convexity);
    suite.run(7, "structural identities", None, structural_identities);
    suite.run(8, "convexity via time-sharing", None, || time_sharing(&runs));
    suite.run(9, "masking layer", None, masking);
    if suite.failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
    } else {
        println!("acceptance: failing criteria {:?}", suite.failed);
        std::process::exit(1);
    }
}

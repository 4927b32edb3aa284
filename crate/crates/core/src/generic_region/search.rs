//! Derivative-free search over auxiliary channels.
//!
//! The objective `w_s r_s - w_l r_l - w_m r_m` mixes concave and convex
//! mutual-information terms in `P(U|X̃)`, so there is no alternating
//! maximization to lean on. Each start draws every row of the channel
//! uniformly from the simplex and then runs a compass search: a move
//! transfers `min(step, mass)` from one letter of `U` to another within a
//! single row, which keeps the row on the simplex and clamps at zero. Moves
//! are tried in a freshly shuffled order each sweep; a sweep without an
//! accepted move advances to the next (smaller) step.
//!
//! [`pareto_search`] runs this for every weight of a fixed log grid, then
//! bisects grid edges whose optima lie far apart.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::evaluator::{sum_terms, ColumnTerms, RegionEvaluator};
use super::{AuxChannel, SearchConfig};
use crate::error::{Error, Result};
use crate::models::SourceModel;
use crate::par::map_indexed;
use crate::rates::{RateTriple, SecretKind};

/// Slack used for all non-dominance comparisons.
pub const DOMINANCE_SLACK: f64 = 1e-9;

/// Number of values on each axis of the scalarization grid.
pub const GRID_PER_AXIS: usize = 33;

/// Grid edges whose optima differ by more than this (in any coordinate)
/// are bisected.
pub const REFINE_RESOLUTION: f64 = 5e-4;

/// Maximum number of bisections of one grid edge.
pub const MAX_REFINE_DEPTH: usize = 12;

/// Upper bound on the number of weights added by refinement.
pub const MAX_REFINED_WEIGHTS: usize = 8192;

// A bisected edge is split again only if its gap shrank by this factor;
// gaps that do not shrink are jumps between separate optima.
const GAP_SHRINK: f64 = 0.9;

// Largest step used when polishing a warm start.
const WARM_START_STEP: f64 = 0.03;

/// Best channel found for one scalarization.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarizedResult {
    pub aux: AuxChannel,
    pub triple: RateTriple,
    pub objective: f64,
    pub weights: [f64; 3],
    /// Start that produced the winner.
    pub start_index: usize,
}

/// Where a frontier point came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Origin {
    Scalarized { weight_index: usize, weights: [f64; 3] },
    Sample { index: usize },
}

impl Origin {
    /// Position in the candidate list: weights first, then samples.
    pub fn candidate_index(&self, n_weights: usize) -> usize {
        match *self {
            Origin::Scalarized { weight_index, .. } => weight_index,
            Origin::Sample { index } => n_weights + index,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub aux: AuxChannel,
    pub triple: RateTriple,
    pub origin: Origin,
}

/// Scalarization weights `(w_s, w_l, w_m)`.
///
/// The three axis weights come first, followed by `(1, λ_l, λ_m)` over a
/// `33 × 33` log-spaced grid on `[1e-3, 1e3]` (`λ_l` outer).
pub fn weight_grid() -> Vec<[f64; 3]> {
    let lambdas: Vec<f64> = (0..GRID_PER_AXIS)
        .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / (GRID_PER_AXIS - 1) as f64))
        .collect();
    let mut out = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for &l in &lambdas {
        for &m in &lambdas {
            out.push([1.0, l, m]);
        }
    }
    out
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn stream_rng(seed: u64, stream: u64, start: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(splitmix64(seed ^ splitmix64(stream)) ^ start))
}

// Row-major n_enc × card_u matrix with rows uniform on the simplex.
fn random_matrix(rng: &mut impl Rng, n_enc: usize, card_u: usize) -> Vec<f64> {
    let mut q = Vec::with_capacity(n_enc * card_u);
    for _ in 0..n_enc {
        let row: Vec<f64> = (0..card_u).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let s: f64 = row.iter().sum();
        q.extend(row.into_iter().map(|e| e / s));
    }
    q
}

struct Objective<'a> {
    eval: &'a RegionEvaluator,
    weights: [f64; 3],
}

impl Objective<'_> {
    fn score(&self, terms: &[ColumnTerms]) -> f64 {
        let info = self.eval.informations(sum_terms(terms));
        self.eval.triple_from(info).scalarize(self.weights)
    }
}

fn refine(
    obj: &Objective,
    q: &mut [f64],
    card_u: usize,
    schedule: &[f64],
    cfg: &SearchConfig,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let eval = obj.eval;
    let n_enc = eval.enc_alphabet();
    let mut scratch = Vec::new();
    let column = |q: &[f64], u: usize, scratch: &mut Vec<f64>| eval.column_terms(|a| q[a * card_u + u], scratch);
    let mut terms: Vec<ColumnTerms> = (0..card_u).map(|u| column(q, u, &mut scratch)).collect();
    let mut best = obj.score(&terms);
    if card_u < 2 {
        return best;
    }
    let mut moves: Vec<(usize, usize, usize)> = (0..n_enc)
        .flat_map(|a| (0..card_u).flat_map(move |u| (0..card_u).filter(move |&v| v != u).map(move |v| (a, u, v))))
        .collect();
    let mut sweeps = 0;
    'schedule: for &step in schedule {
        loop {
            if sweeps == cfg.n_refine_iters {
                break 'schedule;
            }
            sweeps += 1;
            moves.shuffle(rng);
            let mut improved = false;
            for &(a, u, v) in &moves {
                let (iu, iv) = (a * card_u + u, a * card_u + v);
                let delta = step.min(q[iu]);
                if delta <= 0.0 {
                    continue;
                }
                let (old_u, old_v) = (q[iu], q[iv]);
                q[iu] = old_u - delta;
                q[iv] = old_v + delta;
                let (tu, tv) = (terms[u], terms[v]);
                terms[u] = column(q, u, &mut scratch);
                terms[v] = column(q, v, &mut scratch);
                let score = obj.score(&terms);
                if score > best + cfg.tolerance {
                    best = score;
                    improved = true;
                } else {
                    q[iu] = old_u;
                    q[iv] = old_v;
                    terms[u] = tu;
                    terms[v] = tv;
                }
            }
            if !improved {
                break;
            }
        }
    }
    // Fold letters of U into each other when that costs at most `tolerance`.
    // Near-duplicate letters carry almost no weight in the objective, so the
    // compass moves above leave them where the random start put them.
    for u in 0..card_u {
        for v in 0..card_u {
            if u == v || (0..n_enc).all(|a| q[a * card_u + u] == 0.0) {
                continue;
            }
            let saved: Vec<(f64, f64)> = (0..n_enc).map(|a| (q[a * card_u + u], q[a * card_u + v])).collect();
            for a in 0..n_enc {
                q[a * card_u + v] += q[a * card_u + u];
                q[a * card_u + u] = 0.0;
            }
            let (tu, tv) = (terms[u], terms[v]);
            terms[u] = ColumnTerms::default();
            terms[v] = column(q, v, &mut scratch);
            let score = obj.score(&terms);
            if score >= best - cfg.tolerance {
                best = best.max(score);
            } else {
                for (a, &(su, sv)) in saved.iter().enumerate() {
                    q[a * card_u + u] = su;
                    q[a * card_u + v] = sv;
                }
                terms[u] = tu;
                terms[v] = tv;
            }
        }
    }
    best
}

// Keeps the best start; ties go to the lower start index.
fn best_start(eval: &RegionEvaluator, weights: [f64; 3], card_u: usize, starts: Vec<(f64, Vec<f64>)>) -> ScalarizedResult {
    let (start_index, (_, q)) = starts
        .into_iter()
        .enumerate()
        .reduce(|best, cur| if cur.1 .0 > best.1 .0 { cur } else { best })
        .expect("at least one start");
    let aux = AuxChannel::from_matrix(&q, eval.enc_alphabet(), card_u);
    let triple = eval.evaluate_matrix(&aux.to_matrix(), card_u).1;
    ScalarizedResult {
        objective: triple.scalarize(weights),
        aux,
        triple,
        weights,
        start_index,
    }
}

pub(crate) fn optimize_with(
    eval: &RegionEvaluator,
    weights: [f64; 3],
    card_u: usize,
    cfg: &SearchConfig,
    stream: u64,
) -> ScalarizedResult {
    let obj = Objective { eval, weights };
    let n_enc = eval.enc_alphabet();
    let starts = map_indexed(cfg.n_random_starts, cfg.parallel, |s| {
        let mut rng = stream_rng(cfg.seed, stream, s as u64);
        let mut q = random_matrix(&mut rng, n_enc, card_u);
        let score = refine(&obj, &mut q, card_u, &cfg.step_schedule, cfg, &mut rng);
        (score, q)
    });
    best_start(eval, weights, card_u, starts)
}

// Optimum for a weight between two solved neighbours, polished from both of
// their channels with small steps only.
fn optimize_between(
    eval: &RegionEvaluator,
    weights: [f64; 3],
    card_u: usize,
    cfg: &SearchConfig,
    stream: u64,
    seeds: [&AuxChannel; 2],
) -> ScalarizedResult {
    let obj = Objective { eval, weights };
    let mut schedule: Vec<f64> = cfg.step_schedule.iter().copied().filter(|&s| s <= WARM_START_STEP).collect();
    if schedule.is_empty() {
        schedule.push(*cfg.step_schedule.last().expect("validated schedule"));
    }
    let starts = seeds
        .iter()
        .enumerate()
        .map(|(s, aux)| {
            let mut rng = stream_rng(cfg.seed, stream, s as u64);
            let mut q = aux.to_matrix();
            let score = refine(&obj, &mut q, card_u, &schedule, cfg, &mut rng);
            (score, q)
        })
        .collect();
    best_start(eval, weights, card_u, starts)
}

fn check_weights(weights: [f64; 3]) -> Result<()> {
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidModel(format!("weights {weights:?} must be finite and non-negative")));
    }
    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::InvalidModel("weights must not all be zero".into()));
    }
    Ok(())
}

/// Best-effort maximizer of `w_s r_s - w_l r_l - w_m r_m` over auxiliary
/// channels. Deterministic for a fixed `cfg.seed`.
pub fn scalarized_optimize(
    m: &SourceModel,
    weights: [f64; 3],
    kind: SecretKind,
    cfg: &SearchConfig,
) -> Result<ScalarizedResult> {
    check_weights(weights)?;
    cfg.validate()?;
    let eval = RegionEvaluator::new(m, kind)?;
    let card_u = cfg.resolved_card_u(eval.src_alphabet());
    Ok(optimize_with(&eval, weights, card_u, cfg, 0))
}

// Indices of the candidates that survive the non-dominance filter.
fn non_dominated(triples: &[RateTriple]) -> Vec<usize> {
    (0..triples.len())
        .filter(|&i| {
            !triples.iter().enumerate().any(|(j, t)| {
                j != i
                    && (t.strictly_dominates(&triples[i], DOMINANCE_SLACK)
                        || (j < i && t.weakly_dominates(&triples[i], DOMINANCE_SLACK)
                            && triples[i].weakly_dominates(t, DOMINANCE_SLACK)))
            })
        })
        .collect()
}

/// Result of a full weight-grid search.
#[derive(Debug, Clone)]
pub struct ParetoRun {
    pub frontier: Vec<FrontierPoint>,
    /// Optima for the [`weight_grid`] entries, in order, followed by the
    /// weights added by edge refinement.
    pub scalarized: Vec<ScalarizedResult>,
}

impl ParetoRun {
    /// Position of a frontier point among all candidates.
    pub fn candidate_index(&self, origin: &Origin) -> usize {
        origin.candidate_index(self.scalarized.len())
    }
}

// Neighbouring entries of the λ grid, as indices into `weight_grid()`.
fn grid_edges() -> Vec<(usize, usize)> {
    let at = |i: usize, j: usize| 3 + i * GRID_PER_AXIS + j;
    let mut edges = Vec::new();
    for i in 0..GRID_PER_AXIS {
        for j in 0..GRID_PER_AXIS {
            if j + 1 < GRID_PER_AXIS {
                edges.push((at(i, j), at(i, j + 1)));
            }
            if i + 1 < GRID_PER_AXIS {
                edges.push((at(i, j), at(i + 1, j)));
            }
        }
    }
    edges
}

// Bisects (in log-λ) every grid edge whose two optima are further apart than
// REFINE_RESOLUTION, until the optima along the edge are dense, the gap stops
// shrinking, or a limit is hit. A fixed grid leaves wide stretches of the
// boundary without a maximizer where the optimum moves quickly with the
// weights.
fn refine_edges(
    eval: &RegionEvaluator,
    card_u: usize,
    cfg: &SearchConfig,
    weights: &mut Vec<[f64; 3]>,
    results: &mut Vec<ScalarizedResult>,
) {
    // (lower end, upper end, depth, gap of the parent edge)
    let mut pending: Vec<(usize, usize, usize, f64)> =
        grid_edges().into_iter().map(|(a, b)| (a, b, 0, f64::INFINITY)).collect();
    let limit = weights.len() + MAX_REFINED_WEIGHTS;
    loop {
        let gaps: Vec<f64> = pending.iter().map(|&(a, b, ..)| results[a].triple.max_abs_diff(&results[b].triple)).collect();
        let mut split: Vec<(usize, usize, usize, f64)> = pending
            .iter()
            .zip(&gaps)
            .filter(|&(&(_, _, depth, parent), &gap)| {
                depth < MAX_REFINE_DEPTH && gap > REFINE_RESOLUTION && gap < GAP_SHRINK * parent
            })
            .map(|(&(a, b, depth, _), &gap)| (a, b, depth, gap))
            .collect();
        // Widest gaps first, so the budget goes where the frontier is thinnest.
        split.sort_by(|x, y| y.3.total_cmp(&x.3));
        split.truncate(limit - weights.len());
        if split.is_empty() {
            return;
        }
        let base = weights.len();
        let mids: Vec<[f64; 3]> = split
            .iter()
            .map(|&(a, b, ..)| {
                let (wa, wb) = (weights[a], weights[b]);
                [1.0, (wa[1] * wb[1]).sqrt(), (wa[2] * wb[2]).sqrt()]
            })
            .collect();
        let fresh = map_indexed(split.len(), cfg.parallel, |k| {
            let (a, b, ..) = split[k];
            optimize_between(eval, mids[k], card_u, cfg, (base + k) as u64, [&results[a].aux, &results[b].aux])
        });
        weights.extend(mids);
        results.extend(fresh);
        pending = split
            .iter()
            .enumerate()
            .flat_map(|(k, &(a, b, depth, gap))| [(a, base + k, depth + 1, gap), (base + k, b, depth + 1, gap)])
            .collect();
    }
}

/// [`pareto_search`] that also returns every scalarized optimum.
pub fn pareto_search_with(m: &SourceModel, kind: SecretKind, cfg: &SearchConfig) -> Result<ParetoRun> {
    cfg.validate()?;
    let eval = RegionEvaluator::new(m, kind)?;
    let card_u = cfg.resolved_card_u(eval.src_alphabet());
    let n_enc = eval.enc_alphabet();
    let mut weights = weight_grid();
    let mut scalarized = map_indexed(weights.len(), cfg.parallel, |i| {
        optimize_with(&eval, weights[i], card_u, cfg, i as u64)
    });
    if card_u > 1 {
        refine_edges(&eval, card_u, cfg, &mut weights, &mut scalarized);
    }

    let mut candidates: Vec<FrontierPoint> = scalarized
        .iter()
        .enumerate()
        .map(|(i, r)| FrontierPoint {
            aux: r.aux.clone(),
            triple: r.triple,
            origin: Origin::Scalarized {
                weight_index: i,
                weights: r.weights,
            },
        })
        .collect();
    let mut rng = stream_rng(cfg.seed, u64::MAX, 0);
    for index in 0..cfg.n_samples.max(1) {
        let aux = if index == 0 {
            AuxChannel::from_matrix(&vec![1.0 / card_u as f64; n_enc * card_u], n_enc, card_u)
        } else {
            AuxChannel::from_matrix(&random_matrix(&mut rng, n_enc, card_u), n_enc, card_u)
        };
        let triple = eval.evaluate_matrix(&aux.to_matrix(), card_u).1;
        candidates.push(FrontierPoint {
            aux,
            triple,
            origin: Origin::Sample { index },
        });
    }

    let triples: Vec<RateTriple> = candidates.iter().map(|c| c.triple).collect();
    let keep = non_dominated(&triples);
    let mut frontier: Vec<FrontierPoint> = keep.into_iter().map(|i| candidates[i].clone()).collect();
    frontier.sort_by(|a, b| a.triple.r_s.total_cmp(&b.triple.r_s));
    Ok(ParetoRun { frontier, scalarized })
}

/// Non-dominated auxiliary channels over the (refined) weight grid and
/// random samples, sorted by increasing key rate.
pub fn pareto_search(m: &SourceModel, kind: SecretKind, cfg: &SearchConfig) -> Result<Vec<FrontierPoint>> {
    Ok(pareto_search_with(m, kind, cfg)?.frontier)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CardinalityLevel {
    pub card_u: usize,
    /// Scalarized optimum for every entry of [`weight_grid`].
    pub scalarized_optima: Vec<f64>,
    /// Sum of the scalarized optima.
    pub proxy: f64,
    pub frontier_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CardinalityReport {
    pub levels: Vec<CardinalityLevel>,
}

impl CardinalityReport {
    pub fn level(&self, card_u: usize) -> Option<&CardinalityLevel> {
        self.levels.iter().find(|l| l.card_u == card_u)
    }

    /// Largest per-scalarization gain of `to` over `from`.
    pub fn max_improvement(&self, from: usize, to: usize) -> Option<f64> {
        let (a, b) = (self.level(from)?, self.level(to)?);
        a.scalarized_optima
            .iter()
            .zip(&b.scalarized_optima)
            .map(|(x, y)| y - x)
            .reduce(f64::max)
    }
}

/// Runs [`pareto_search`] for every cardinality `2..=max_card`.
pub fn cardinality_sweep(
    m: &SourceModel,
    kind: SecretKind,
    max_card: usize,
    cfg: &SearchConfig,
) -> Result<CardinalityReport> {
    let bound = m.q_x().len() + 2;
    if max_card < bound {
        return Err(Error::Domain {
            name: "max_card",
            value: max_card as f64,
            domain: "max_card >= |X| + 2",
        });
    }
    let n_grid = weight_grid().len();
    let levels = (2..=max_card)
        .map(|card_u| {
            let cfg = SearchConfig {
                card_u: Some(card_u),
                ..cfg.clone()
            };
            let run = pareto_search_with(m, kind, &cfg)?;
            let scalarized_optima: Vec<f64> = run.scalarized[..n_grid].iter().map(|r| r.objective).collect();
            Ok(CardinalityLevel {
                card_u,
                proxy: scalarized_optima.iter().sum(),
                scalarized_optima,
                frontier_size: run.frontier.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CardinalityReport { levels })
}

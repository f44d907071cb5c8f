//! Silhouette widths and automatic selection of the EPA mass.
//!
//! The user proposes a range of cluster counts. Boundary masses whose
//! estimates attain the two ends of the range are located by bisection on a
//! log scale, a geometric grid of masses between them is evaluated, and the
//! mass whose estimate has the largest average silhouette wins. A final,
//! larger sampling pass at that mass produces the reported estimate.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use crate::distance::DistanceMatrix;
use crate::epa::{ddcrp_sample_many, epa_sample_many, EpaParams, SimilarityMatrix};
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::psm::{pairwise_similarity, PairwiseSimilarityMatrix};
use crate::search::{minimize_expected_loss, SearchConfig};
use crate::seed::mix;

/// Mean silhouette width of `p` under distances `d`. Items alone in their
/// cluster score 0.
pub fn average_silhouette(p: &Partition, d: &DistanceMatrix) -> Result<f64> {
    let n = p.n_items();
    if n != d.n_items() {
        return Err(Error::DimensionMismatch {
            expected: d.n_items(),
            found: n,
        });
    }
    let k = p.n_clusters();
    if k < 2 || k + 1 > n {
        return Err(Error::SilhouetteUndefined { clusters: k, items: n });
    }
    let sizes = p.cluster_sizes();
    let mut sums = vec![0.0; k];
    let mut total = 0.0;
    for i in 0..n {
        let own = p.label(i);
        if sizes[own] == 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for (j, &dij) in d.row(i).iter().enumerate() {
            sums[p.label(j)] += dij;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Distribution {
    #[default]
    Epa,
    /// Distance-dependent CRP; no mass selection.
    Ddcrp,
}

/// Ψ from `count` draws of the chosen distribution.
pub fn sample_psm(
    sim: &SimilarityMatrix,
    params: &EpaParams,
    distribution: Distribution,
    count: usize,
    seed: u64,
    parallelism: usize,
) -> Result<PairwiseSimilarityMatrix> {
    let draws = match distribution {
        Distribution::Epa => epa_sample_many(count, params, sim, seed, parallelism)?,
        Distribution::Ddcrp => ddcrp_sample_many(count, params.mass, sim, seed, parallelism)?,
    };
    pairwise_similarity(&draws)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassSearchConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub grid_size: usize,
    /// Draws per evaluated mass (B); the final pass uses 4·B.
    pub samples_per_eval: usize,
    /// Relative width at which bisection stops.
    pub bisection_tolerance: f64,
    pub max_bisection_steps: usize,
    pub boundary_rule: BoundaryRule,
    pub seed: u64,
}

/// Which mass attaining a boundary cluster count bisection settles on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryRule {
    /// The first mass evaluated whose estimate has the target count.
    FirstHit,
    /// The smallest mass attaining `k_min` and the largest attaining `k_max`,
    /// so the grid covers every mass whose count lies in the range. Costs a
    /// few more evaluations but keeps the grid away from the sharp jumps in
    /// cluster count that the first hit often lands on.
    #[default]
    Outermost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edge {
    FirstHit,
    Lowest,
    Highest,
}

/// Which end of the final bracket to report when no probed mass gives the
/// target count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fallback {
    /// Closer count; the smaller mass on ties.
    Nearest,
    /// The mass giving more clusters than the target.
    Above,
    /// The mass giving fewer clusters than the target.
    Below,
}

impl Default for MassSearchConfig {
    fn default() -> Self {
        Self {
            k_min: 2,
            k_max: 5,
            grid_size: 9,
            samples_per_eval: 500,
            bisection_tolerance: 0.05,
            max_bisection_steps: 30,
            boundary_rule: BoundaryRule::Outermost,
            seed: 0,
        }
    }
}

impl MassSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_min < 2 || self.k_min > self.k_max {
            return Err(Error::InvalidParameter(format!(
                "cluster range must satisfy 2 <= k_min <= k_max, got {}:{}",
                self.k_min, self.k_max
            )));
        }
        if self.grid_size < 2 {
            return Err(Error::InvalidParameter("grid_size must be >= 2".into()));
        }
        if self.samples_per_eval == 0 {
            return Err(Error::InvalidParameter("samples_per_eval must be >= 1".into()));
        }
        if !(self.bisection_tolerance > 0.0) {
            return Err(Error::InvalidParameter("bisection_tolerance must be > 0".into()));
        }
        Ok(())
    }
}

pub const MIN_MASS: f64 = 1e-6;
pub const MAX_MASS: f64 = 1e6;
const BRACKET_FACTOR: f64 = 4.0;
const DRAW_STREAM: u64 = 0x6472_6177;

/// Conditions under which the selection's assumptions did not hold.
#[derive(Debug, Clone, PartialEq)]
pub enum MassFlag {
    /// Bisection ran out of steps; `alpha` is the closest endpoint.
    TargetNotAttained { target_k: usize, alpha: f64, k: usize },
    /// Cluster counts along the bracket were not monotone in the mass.
    NonMonotone { target_k: usize },
    /// The boundary mass for k_max came out below the one for k_min.
    BoundariesReversed,
    /// No grid estimate had a cluster count inside the requested range.
    NoGridPointInRange,
    /// The final pass at `alpha` found `final_k` clusters where the grid
    /// estimate had `grid_k`.
    FinalPassDisagrees { alpha: f64, grid_k: usize, final_k: usize },
}

impl fmt::Display for MassFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MassFlag::TargetNotAttained { target_k, alpha, k } => {
                write!(f, "K={target_k} not attained; using alpha={alpha} with K={k}")
            }
            MassFlag::NonMonotone { target_k } => {
                write!(f, "cluster count not monotone in mass while bracketing K={target_k}")
            }
            MassFlag::BoundariesReversed => write!(f, "boundary masses reversed"),
            MassFlag::NoGridPointInRange => write!(f, "no grid estimate inside the cluster range"),
            MassFlag::FinalPassDisagrees { alpha, grid_k, final_k } => {
                write!(f, "final pass at alpha={alpha} gave K={final_k}, grid estimate had K={grid_k}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMass {
    pub alpha: f64,
    pub k: usize,
    /// Every (α, K) evaluated, in order.
    pub trail: Vec<(f64, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub alpha: f64,
    pub k: usize,
    /// `None` when K is outside [2, n−1].
    pub avg_silhouette: Option<f64>,
    pub expected_loss: f64,
}

#[derive(Debug, Clone)]
pub struct CaviarResult {
    pub mass: f64,
    pub psm: PairwiseSimilarityMatrix,
    pub estimate: Partition,
    /// Average silhouette of `estimate`; NaN if undefined.
    pub silhouette: f64,
    pub expected_loss: f64,
    pub boundaries: Vec<BoundaryMass>,
    pub diagnostics: Vec<GridPoint>,
    pub flags: Vec<MassFlag>,
}

struct Evaluation {
    estimate: Partition,
    loss: f64,
}

/// Estimates at a given mass, memoized.
///
/// Every mass is evaluated with the same draw streams (common random
/// numbers): draw `b` uses the same generator whatever the mass, so the
/// sampled partitions, and with them the cluster count, change gradually
/// with the mass instead of jumping with fresh noise at each evaluation. The
/// final pass extends the same streams, so its first B draws are those the
/// selection saw.
struct Evaluator {
    sim: SimilarityMatrix,
    params: EpaParams,
    samples: usize,
    seed: u64,
    search: SearchConfig,
    cache: BTreeMap<u64, Evaluation>,
}

impl Evaluator {
    fn new(d: &DistanceMatrix, params: &EpaParams, msc: &MassSearchConfig, search: &SearchConfig) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            sim: SimilarityMatrix::from_distance(d, params.similarity_kind, params.temperature)?,
            params: *params,
            samples: msc.samples_per_eval,
            seed: mix(msc.seed, DRAW_STREAM),
            search: search.clone(),
            cache: BTreeMap::new(),
        })
    }

    /// Estimate under the configured loss from B draws at `alpha`.
    fn eval(&mut self, alpha: f64) -> Result<&Evaluation> {
        let key = alpha.to_bits();
        if !self.cache.contains_key(&key) {
            let psm = self.sample_at(alpha)?;
            let cfg = SearchConfig {
                seed: mix(self.seed, 1),
                ..self.search.clone()
            };
            let r = minimize_expected_loss(&psm, &cfg)?;
            self.cache.insert(
                key,
                Evaluation {
                    estimate: r.partition,
                    loss: r.loss,
                },
            );
        }
        Ok(&self.cache[&key])
    }

    fn k_at(&mut self, alpha: f64) -> Result<usize> {
        Ok(self.eval(alpha)?.estimate.n_clusters())
    }

    fn boundary(
        &mut self,
        target_k: usize,
        edge: Edge,
        fallback: Fallback,
        msc: &MassSearchConfig,
        flags: &mut Vec<MassFlag>,
    ) -> Result<BoundaryMass> {
        let mut trail = Vec::new();
        let probe = |ev: &mut Self, alpha: f64, trail: &mut Vec<(f64, usize)>| -> Result<usize> {
            let k = ev.k_at(alpha)?;
            trail.push((alpha, k));
            Ok(k)
        };
        // bisection keeps `above` false at lo and true at hi
        let above = |k: usize| match edge {
            Edge::FirstHit | Edge::Lowest => k >= target_k,
            Edge::Highest => k > target_k,
        };
        let first_hit = |alpha, k, trail: &[(f64, usize)]| {
            (edge == Edge::FirstHit && k == target_k).then(|| BoundaryMass {
                alpha,
                k,
                trail: trail.to_vec(),
            })
        };

        let k1 = probe(self, 1.0, &mut trail)?;
        if let Some(b) = first_hit(1.0, k1, &trail) {
            return Ok(b);
        }
        let (mut lo, mut k_lo, mut hi, mut k_hi) = (1.0, k1, 1.0, k1);
        let mut bracketed = true;
        if above(k1) {
            while above(k_lo) {
                if lo <= MIN_MASS {
                    bracketed = false;
                    break;
                }
                (hi, k_hi) = (lo, k_lo);
                lo = (lo / BRACKET_FACTOR).max(MIN_MASS);
                k_lo = probe(self, lo, &mut trail)?;
                if let Some(b) = first_hit(lo, k_lo, &trail) {
                    return Ok(b);
                }
            }
        } else {
            while !above(k_hi) {
                if hi >= MAX_MASS {
                    bracketed = false;
                    break;
                }
                (lo, k_lo) = (hi, k_hi);
                hi = (hi * BRACKET_FACTOR).min(MAX_MASS);
                k_hi = probe(self, hi, &mut trail)?;
                if let Some(b) = first_hit(hi, k_hi, &trail) {
                    return Ok(b);
                }
            }
        }
        if bracketed {
            for _ in 0..msc.max_bisection_steps {
                if hi / lo - 1.0 <= msc.bisection_tolerance {
                    break;
                }
                let mid = (lo * hi).sqrt();
                let k = probe(self, mid, &mut trail)?;
                if let Some(b) = first_hit(mid, k, &trail) {
                    self.flag_non_monotone(target_k, &trail, flags);
                    return Ok(b);
                }
                if above(k) {
                    (hi, k_hi) = (mid, k);
                } else {
                    (lo, k_lo) = (mid, k);
                }
            }
        }
        let hits = trail.iter().filter(|&&(_, k)| k == target_k).map(|&(a, _)| a);
        let hit = match edge {
            Edge::Lowest => hits.reduce(f64::min),
            _ => hits.reduce(f64::max),
        };
        if let Some(alpha) = hit {
            self.flag_non_monotone(target_k, &trail, flags);
            return Ok(BoundaryMass { alpha, k: target_k, trail });
        }
        if !bracketed {
            return Err(Error::UnreachableClusterCount(target_k));
        }
        self.flag_non_monotone(target_k, &trail, flags);
        let use_lo = match fallback {
            Fallback::Nearest => target_k.abs_diff(k_lo) <= target_k.abs_diff(k_hi),
            Fallback::Above => false,
            Fallback::Below => true,
        };
        let (alpha, k) = if use_lo { (lo, k_lo) } else { (hi, k_hi) };
        flags.push(MassFlag::TargetNotAttained { target_k, alpha, k });
        Ok(BoundaryMass { alpha, k, trail })
    }

    fn flag_non_monotone(&self, target_k: usize, trail: &[(f64, usize)], flags: &mut Vec<MassFlag>) {
        let mut sorted = trail.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        if sorted.windows(2).any(|w| w[1].1 < w[0].1) {
            flags.push(MassFlag::NonMonotone { target_k });
        }
    }
}

/// Mass whose estimate from B draws (under `search.loss`) has `target_k`
/// clusters.
pub fn mass_for_cluster_count(
    target_k: usize,
    d: &DistanceMatrix,
    params: &EpaParams,
    search: &SearchConfig,
    msc: &MassSearchConfig,
) -> Result<(BoundaryMass, Vec<MassFlag>)> {
    if target_k == 0 {
        return Err(Error::InvalidParameter("target cluster count must be >= 1".into()));
    }
    let mut ev = Evaluator::new(d, params, msc, search)?;
    let mut flags = Vec::new();
    let b = ev.boundary(target_k, Edge::FirstHit, Fallback::Nearest, msc, &mut flags)?;
    Ok((b, flags))
}

/// `count` masses spaced geometrically from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|g| match g {
            0 => lo,
            g if g + 1 == count => hi,
            g => (a + (b - a) * g as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}

struct GridSearch {
    ev: Evaluator,
    boundaries: Vec<BoundaryMass>,
    diagnostics: Vec<GridPoint>,
    estimates: Vec<Partition>,
    /// Grid indices by preference: in-range K first (only those, if any),
    /// then larger silhouette, then smaller mass.
    ranking: Vec<usize>,
    flags: Vec<MassFlag>,
}

fn grid_search(d: &DistanceMatrix, params: &EpaParams, msc: &MassSearchConfig, search: &SearchConfig) -> Result<GridSearch> {
    msc.validate()?;
    search.validate()?;
    let mut ev = Evaluator::new(d, params, msc, search)?;
    let mut flags = Vec::new();
    let (lower, upper) = match msc.boundary_rule {
        BoundaryRule::FirstHit => (Edge::FirstHit, Edge::FirstHit),
        BoundaryRule::Outermost => (Edge::Lowest, Edge::Highest),
    };
    // a skipped count falls back to the side inside the range
    let low = ev.boundary(msc.k_min, lower, Fallback::Above, msc, &mut flags)?;
    let high = ev.boundary(msc.k_max, upper, Fallback::Below, msc, &mut flags)?;
    let (mut a_lo, mut a_hi) = (low.alpha, high.alpha);
    if a_hi < a_lo {
        flags.push(MassFlag::BoundariesReversed);
        std::mem::swap(&mut a_lo, &mut a_hi);
    }
    let n = d.n_items();
    let mut diagnostics = Vec::with_capacity(msc.grid_size);
    let mut estimates = Vec::with_capacity(msc.grid_size);
    for alpha in geometric_grid(a_lo, a_hi, msc.grid_size) {
        let e = ev.eval(alpha)?;
        let k = e.estimate.n_clusters();
        let avg_silhouette = if (2..n).contains(&k) {
            Some(average_silhouette(&e.estimate, d)?)
        } else {
            None
        };
        diagnostics.push(GridPoint {
            alpha,
            k,
            avg_silhouette,
            expected_loss: e.loss,
        });
        estimates.push(e.estimate.clone());
    }
    let defined = |g: &usize| diagnostics[*g].avg_silhouette.is_some();
    let in_range = |g: &usize| (msc.k_min..=msc.k_max).contains(&diagnostics[*g].k);
    let mut ranking: Vec<usize> = (0..diagnostics.len()).filter(defined).filter(in_range).collect();
    if ranking.is_empty() {
        flags.push(MassFlag::NoGridPointInRange);
        ranking = (0..diagnostics.len()).filter(defined).collect();
    }
    if ranking.is_empty() {
        return Err(Error::NoValidGridPoint {
            diagnostics: diagnostics_table(&diagnostics),
        });
    }
    // stable sort on index order keeps ties at the smaller mass
    let silhouette = |g: usize| diagnostics[g].avg_silhouette.expect("filtered");
    ranking.sort_by(|&a, &b| silhouette(b).total_cmp(&silhouette(a)));
    Ok(GridSearch {
        ev,
        boundaries: vec![low, high],
        diagnostics,
        estimates,
        ranking,
        flags,
    })
}

/// Grid search over the mass between the boundary masses of the range;
/// returns the estimate with the largest average silhouette (ties go to the
/// smaller mass) and the Ψ it came from.
pub fn select_mass(
    d: &DistanceMatrix,
    params: &EpaParams,
    msc: &MassSearchConfig,
    search: &SearchConfig,
) -> Result<CaviarResult> {
    let mut grid = grid_search(d, params, msc, search)?;
    let g = grid.ranking[0];
    let point = &grid.diagnostics[g];
    Ok(CaviarResult {
        mass: point.alpha,
        psm: grid.ev.sample_at(point.alpha)?,
        estimate: grid.estimates.swap_remove(g),
        silhouette: point.avg_silhouette.expect("ranked points have one"),
        expected_loss: point.expected_loss,
        boundaries: grid.boundaries,
        diagnostics: grid.diagnostics,
        flags: grid.flags,
    })
}

impl Evaluator {
    /// The Ψ behind `eval(alpha)`, regenerated rather than cached.
    fn sample_at(&self, alpha: f64) -> Result<PairwiseSimilarityMatrix> {
        sample_psm(
            &self.sim,
            &self.params.with_mass(alpha),
            Distribution::Epa,
            self.samples,
            self.seed,
            self.search.parallelism,
        )
    }
}

/// Full pipeline: mass selection, then 4·B draws at the chosen mass for the
/// reported Ψ and estimate.
///
/// If the larger pass changes the cluster count of the selected grid
/// estimate, the chosen mass sits on a jump of K(α); the next grid point in
/// the selection order is tried instead (flagged). When no grid point is
/// consistent the first choice is kept.
pub fn caviarpd_estimate(
    d: &DistanceMatrix,
    params: &EpaParams,
    msc: &MassSearchConfig,
    search: &SearchConfig,
) -> Result<CaviarResult> {
    let grid = grid_search(d, params, msc, search)?;
    let sim = SimilarityMatrix::from_distance(d, params.similarity_kind, params.temperature)?;
    let seed = mix(msc.seed, DRAW_STREAM);
    let mut flags = grid.flags;
    let mut first = None;
    for &g in &grid.ranking {
        let point = &grid.diagnostics[g];
        let psm = sample_psm(
            &sim,
            &params.with_mass(point.alpha),
            Distribution::Epa,
            4 * msc.samples_per_eval,
            seed,
            search.parallelism,
        )?;
        let r = minimize_expected_loss(
            &psm,
            &SearchConfig {
                seed: mix(seed, 1),
                ..search.clone()
            },
        )?;
        let consistent = r.partition.n_clusters() == point.k;
        if !consistent {
            flags.push(MassFlag::FinalPassDisagrees {
                alpha: point.alpha,
                grid_k: point.k,
                final_k: r.partition.n_clusters(),
            });
        }
        let result = (point.alpha, psm, r);
        if consistent {
            first = Some(result);
            break;
        }
        first.get_or_insert(result);
    }
    let (mass, psm, r) = first.expect("ranking is non-empty");
    let silhouette = average_silhouette(&r.partition, d).unwrap_or(f64::NAN);
    Ok(CaviarResult {
        mass,
        psm,
        estimate: r.partition,
        silhouette,
        expected_loss: r.loss,
        boundaries: grid.boundaries,
        diagnostics: grid.diagnostics,
        flags,
    })
}

/// Estimate at a fixed mass, skipping selection. Works for either
/// distribution.
pub fn estimate_at_mass(
    d: &DistanceMatrix,
    params: &EpaParams,
    distribution: Distribution,
    samples: usize,
    seed: u64,
    search: &SearchConfig,
) -> Result<CaviarResult> {
    search.validate()?;
    let sim = SimilarityMatrix::from_distance(d, params.similarity_kind, params.temperature)?;
    let seed = mix(seed, DRAW_STREAM);
    let psm = sample_psm(&sim, params, distribution, samples, seed, search.parallelism)?;
    let r = minimize_expected_loss(
        &psm,
        &SearchConfig {
            seed: mix(seed, 1),
            ..search.clone()
        },
    )?;
    let silhouette = average_silhouette(&r.partition, d).unwrap_or(f64::NAN);
    Ok(CaviarResult {
        mass: params.mass,
        psm,
        estimate: r.partition,
        silhouette,
        expected_loss: r.loss,
        boundaries: Vec::new(),
        diagnostics: Vec::new(),
        flags: Vec::new(),
    })
}

fn diagnostics_table(rows: &[GridPoint]) -> String {
    let mut out = Vec::new();
    write_diagnostics_csv(rows, &mut out).expect("writing to memory");
    String::from_utf8(out).expect("ascii")
}

/// `alpha,k,avg_silhouette,expected_loss`; an undefined silhouette is `NA`.
pub fn write_diagnostics_csv<W: Write>(rows: &[GridPoint], mut out: W) -> Result<()> {
    writeln!(out, "alpha,k,avg_silhouette,expected_loss")?;
    for r in rows {
        match r.avg_silhouette {
            Some(s) => writeln!(out, "{},{},{},{}", r.alpha, r.k, s, r.expected_loss)?,
            None => writeln!(out, "{},{},NA,{}", r.alpha, r.k, r.expected_loss)?,
        }
    }
    Ok(())
}

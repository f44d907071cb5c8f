//! The Ewens-Pitman attraction (EPA) distribution over partitions, and the
//! distance-dependent Chinese restaurant process (ddCRP) as an alternative
//! sampler.
//!
//! Items are allocated one at a time in the order given by a permutation.
//! At step `t` the next item opens a new subset with probability
//! `mass / (mass + t - 1)`; otherwise it joins an existing subset with
//! probability proportional to the summed similarity between the item and
//! that subset's members.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::parallel::map_indexed;
use crate::partition::Partition;
use crate::seed::stream_rng;

/// Masses at or above this value are treated as "every item opens a new subset".
pub const MASS_INFINITY_GUARD: f64 = 1e12;

/// Above this many items, per-subset attraction sums use compensated summation.
const COMPENSATED_SUM_THRESHOLD: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimilarityKind {
    /// `f(d) = d^(-temperature)`
    Reciprocal,
    /// `f(d) = exp(-temperature * d)`
    #[default]
    Exponential,
}

/// Pairwise attraction between items. Off-diagonal entries are finite and
/// strictly positive; the diagonal is unused and held at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SimilarityMatrix {
    /// Applies the similarity function to every off-diagonal distance.
    ///
    /// Values that underflow are raised to `f64::MIN_POSITIVE` and values that
    /// overflow are capped so that row sums stay finite.
    pub fn from_distance(d: &DistanceMatrix, kind: SimilarityKind, temperature: f64) -> Result<Self> {
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "temperature must be finite and >= 0, got {temperature}"
            )));
        }
        let n = d.n_items();
        if kind == SimilarityKind::Reciprocal {
            for i in 0..n {
                for j in i + 1..n {
                    if d.get(i, j) == 0.0 {
                        return Err(Error::ZeroDistanceReciprocal);
                    }
                }
            }
        }
        let cap = f64::MAX / n.max(1) as f64;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let dij = d.get(i, j);
                let raw = match kind {
                    SimilarityKind::Reciprocal => dij.powf(-temperature),
                    SimilarityKind::Exponential => (-temperature * dij).exp(),
                };
                let value = raw.clamp(f64::MIN_POSITIVE, cap);
                entries[i * n + j] = value;
                entries[j * n + i] = value;
            }
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            if rows[i].len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: rows[i].len(),
                });
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                let v = rows[i][j];
                if !(v > 0.0) || !v.is_finite() || v != rows[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "similarity ({i},{j}) = {v} must be finite, positive and symmetric"
                    )));
                }
                entries[i * n + j] = v;
            }
        }
        Ok(Self { n, entries })
    }

    pub fn constant(n: usize, value: f64) -> Self {
        assert!(value > 0.0 && value.is_finite());
        let mut entries = vec![value; n * n];
        for i in 0..n {
            entries[i * n + i] = 0.0;
        }
        Self { n, entries }
    }

    pub fn n_items(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpaParams {
    pub mass: f64,
    /// Must be 0.
    pub discount: f64,
    pub temperature: f64,
    pub similarity_kind: SimilarityKind,
}

impl EpaParams {
    pub const DEFAULT_TEMPERATURE: f64 = 10.0;

    pub fn new(mass: f64) -> Self {
        Self {
            mass,
            discount: 0.0,
            temperature: Self::DEFAULT_TEMPERATURE,
            similarity_kind: SimilarityKind::Exponential,
        }
    }

    pub fn with_mass(self, mass: f64) -> Self {
        Self { mass, ..self }
    }

    /// Checks the parameters for sampling, where a zero mass is allowed.
    pub fn validate(&self) -> Result<()> {
        if self.discount != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "discount must be 0, got {}",
                self.discount
            )));
        }
        if !(self.mass >= 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be >= 0, got {}", self.mass)));
        }
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "temperature must be finite and >= 0, got {}",
                self.temperature
            )));
        }
        Ok(())
    }

    /// Stricter check for pmf evaluation: the mass must be positive.
    pub fn validate_for_pmf(&self) -> Result<()> {
        self.validate()?;
        if !(self.mass > 0.0) {
            return Err(Error::InvalidParameter("pmf evaluation requires mass > 0".into()));
        }
        Ok(())
    }
}

/// Allocation order of the items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    order: Vec<usize>,
}

impl Permutation {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &i in &order {
            match seen.get_mut(i) {
                Some(s @ false) => *s = true,
                _ => return Err(Error::InvalidInput(format!("{order:?} is not a permutation"))),
            }
        }
        Ok(Self { order })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        Self { order }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Allocation probabilities for one step of the sequential construction.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProbabilities {
    /// One entry per existing subset, in the order the subsets were given.
    pub existing: Vec<f64>,
    pub new_subset: f64,
}

impl StepProbabilities {
    pub fn total(&self) -> f64 {
        self.existing.iter().sum::<f64>() + self.new_subset
    }
}

/// Sum that switches to Neumaier compensation for large problems.
#[derive(Clone, Copy, Default)]
struct Accumulator {
    sum: f64,
    compensation: f64,
}

impl Accumulator {
    #[inline]
    fn add(&mut self, x: f64, compensated: bool) {
        if compensated {
            let t = self.sum + x;
            if self.sum.abs() >= x.abs() {
                self.compensation += (self.sum - t) + x;
            } else {
                self.compensation += (x - t) + self.sum;
            }
            self.sum = t;
        } else {
            self.sum += x;
        }
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Weight of opening a new subset and of joining existing ones, scaled so that
/// they sum to `mass + t - 1`.
fn new_subset_share(mass: f64, t: usize) -> (f64, f64) {
    let prior = (t - 1) as f64;
    if mass.is_infinite() {
        (1.0, 0.0)
    } else {
        let denom = mass + prior;
        (mass / denom, prior / denom)
    }
}

/// Allocation probabilities for `next_item` given the subsets formed so far.
/// The step index is `t = 1 + (number of allocated items)`.
pub fn epa_step_probabilities(
    allocated: &[Vec<usize>],
    next_item: usize,
    mass: f64,
    sim: &SimilarityMatrix,
) -> Result<StepProbabilities> {
    let n = sim.n_items();
    if next_item >= n {
        return Err(Error::InvalidInput(format!("item {next_item} out of range for {n} items")));
    }
    if !(mass >= 0.0) {
        return Err(Error::InvalidParameter(format!("mass must be >= 0, got {mass}")));
    }
    let mut count = 0;
    for subset in allocated {
        for &s in subset {
            if s == next_item {
                return Err(Error::AlreadyAllocated(next_item));
            }
            if s >= n {
                return Err(Error::InvalidInput(format!("item {s} out of range for {n} items")));
            }
            count += 1;
        }
    }
    let t = count + 1;
    if t == 1 {
        return Ok(StepProbabilities {
            existing: Vec::new(),
            new_subset: 1.0,
        });
    }
    let compensated = n > COMPENSATED_SUM_THRESHOLD;
    let attraction: Vec<f64> = allocated
        .iter()
        .map(|subset| {
            let mut acc = Accumulator::default();
            for &s in subset {
                acc.add(sim.get(next_item, s), compensated);
            }
            acc.value()
        })
        .collect();
    let total: f64 = attraction.iter().sum();
    let (new_subset, join) = new_subset_share(mass, t);
    Ok(StepProbabilities {
        existing: attraction.iter().map(|a| join * a / total).collect(),
        new_subset,
    })
}

/// Log-probability of `p` under the EPA distribution with a fixed allocation
/// order.
pub fn epa_log_pmf(
    p: &Partition,
    params: &EpaParams,
    sim: &SimilarityMatrix,
    perm: &Permutation,
) -> Result<f64> {
    params.validate_for_pmf()?;
    let n = sim.n_items();
    for found in [p.n_items(), perm.len()] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    let compensated = n > COMPENSATED_SUM_THRESHOLD;
    let mut opened = vec![false; p.n_clusters()];
    let mut log_p = 0.0;
    for (step, &item) in perm.order().iter().enumerate() {
        let t = step + 1;
        let label = p.label(item);
        let (new_share, join_share) = new_subset_share(params.mass, t);
        if !opened[label] {
            opened[label] = true;
            log_p += new_share.ln();
        } else {
            let mut same = Accumulator::default();
            let mut all = Accumulator::default();
            for &s in &perm.order()[..step] {
                let lambda = sim.get(item, s);
                all.add(lambda, compensated);
                if p.label(s) == label {
                    same.add(lambda, compensated);
                }
            }
            log_p += join_share.ln() + (same.value() / all.value()).ln();
        }
    }
    Ok(log_p)
}

/// Sequential allocation along a given permutation.
pub fn epa_sample_with_permutation<R: Rng + ?Sized>(
    params: &EpaParams,
    sim: &SimilarityMatrix,
    perm: &Permutation,
    rng: &mut R,
) -> Partition {
    let n = sim.n_items();
    let compensated = n > COMPENSATED_SUM_THRESHOLD;
    let mut labels = vec![usize::MAX; n];
    let mut attraction: Vec<Accumulator> = Vec::new();
    let order = perm.order();
    for (step, &item) in order.iter().enumerate() {
        let t = step + 1;
        let (new_share, _) = new_subset_share(params.mass, t);
        let opens = t == 1 || {
            let u: f64 = rng.random();
            u < new_share
        };
        if opens {
            labels[item] = attraction.len();
            attraction.push(Accumulator::default());
            continue;
        }
        attraction.iter_mut().for_each(|a| *a = Accumulator::default());
        for &s in &order[..step] {
            attraction[labels[s]].add(sim.get(item, s), compensated);
        }
        let total: f64 = attraction.iter().map(Accumulator::value).sum();
        let mut target = rng.random::<f64>() * total;
        let mut chosen = attraction.len() - 1;
        for (k, a) in attraction.iter().enumerate() {
            target -= a.value();
            if target < 0.0 {
                chosen = k;
                break;
            }
        }
        labels[item] = chosen;
    }
    Partition::canonicalize(&labels).expect("n >= 1")
}

/// One draw with a uniformly random allocation order.
pub fn epa_sample_one<R: Rng + ?Sized>(
    params: &EpaParams,
    sim: &SimilarityMatrix,
    rng: &mut R,
) -> Partition {
    let perm = Permutation::random(sim.n_items(), rng);
    epa_sample_with_permutation(params, sim, &perm, rng)
}

/// `count` draws; draw `b` uses a generator seeded with
/// [`mix(master_seed, b)`](crate::seed::mix), so the output is the same for
/// every `parallelism`.
pub fn epa_sample_many(
    count: usize,
    params: &EpaParams,
    sim: &SimilarityMatrix,
    master_seed: u64,
    parallelism: usize,
) -> Result<Vec<Partition>> {
    params.validate()?;
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    Ok(map_indexed(count, parallelism, |b| {
        epa_sample_one(params, sim, &mut stream_rng(master_seed, b as u64))
    }))
}

/// One ddCRP draw: every item links to another item with weight equal to
/// their similarity, or to itself with weight `mass`; the partition is the
/// connected components of the links.
pub fn ddcrp_sample_one<R: Rng + ?Sized>(mass: f64, sim: &SimilarityMatrix, rng: &mut R) -> Partition {
    let n = sim.n_items();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        if mass.is_infinite() {
            continue;
        }
        let total: f64 = mass + (0..n).filter(|&j| j != i).map(|j| sim.get(i, j)).sum::<f64>();
        let mut target = rng.random::<f64>() * total - mass;
        if target < 0.0 {
            continue;
        }
        let mut link = i;
        for j in (0..n).filter(|&j| j != i) {
            link = j;
            target -= sim.get(i, j);
            if target < 0.0 {
                break;
            }
        }
        let (a, b) = (root(&mut parent, i), root(&mut parent, link));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let labels: Vec<usize> = (0..n).map(|i| root(&mut parent, i)).collect();
    Partition::canonicalize(&labels).expect("n >= 1")
}

pub fn ddcrp_sample_many(
    count: usize,
    mass: f64,
    sim: &SimilarityMatrix,
    master_seed: u64,
    parallelism: usize,
) -> Result<Vec<Partition>> {
    if !(mass > 0.0) {
        return Err(Error::InvalidParameter(format!("ddCRP mass must be > 0, got {mass}")));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    Ok(map_indexed(count, parallelism, |b| {
        ddcrp_sample_one(mass, sim, &mut stream_rng(master_seed, b as u64))
    }))
}

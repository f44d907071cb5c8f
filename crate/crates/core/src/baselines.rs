//! Baseline clusterers: agglomerative hierarchical clustering and PAM
//! k-medoids, plus silhouette-based choice of k.

use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;
use std::str::FromStr;

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::mass::average_silhouette;
use crate::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Linkage {
    Single,
    Complete,
    Average,
    /// Lance–Williams on squared distances; heights are reported as square
    /// roots.
    Ward,
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            "ward" => Ok(Linkage::Ward),
            other => Err(Error::InvalidParameter(format!("unknown linkage '{other}'"))),
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
            Linkage::Ward => "ward",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

/// Leaves are `0..n`; the node created by merge `s` is `n + s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn n_items(&self) -> usize {
        self.n
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// One `left,right,height` line per merge, heights with 9 significant
    /// digits.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        for m in &self.merges {
            writeln!(out, "{},{},{}", m.left, m.right, nine_significant(m.height))?;
        }
        Ok(())
    }
}

fn nine_significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.8}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Agglomerative clustering with Lance–Williams updates. Among equal
/// minimum distances the pair with the smallest (left, right) node ids
/// merges first.
pub fn hierarchical(d: &DistanceMatrix, linkage: Linkage) -> Result<Dendrogram> {
    let n = d.n_items();
    if n < 2 {
        return Err(Error::InvalidInput("hierarchical clustering needs at least 2 items".into()));
    }
    let mut dist: Vec<f64> = (0..n * n)
        .map(|ij| {
            let v = d.get(ij / n, ij % n);
            if linkage == Linkage::Ward {
                v * v
            } else {
                v
            }
        })
        .collect();
    let mut node: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for (x, &a) in active.iter().enumerate() {
            for &b in &active[x + 1..] {
                let v = dist[a * n + b];
                let key = (node[a].min(node[b]), node[a].max(node[b]));
                let better = match best {
                    None => true,
                    Some((bv, bkey, _, _)) => v < bv || (v == bv && key < bkey),
                };
                if better {
                    best = Some((v, key, a, b));
                }
            }
        }
        let (v, (left, right), a, b) = best.expect("two active clusters");
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for &k in &active {
            if k == a || k == b {
                continue;
            }
            let (dak, dbk) = (dist[a * n + k], dist[b * n + k]);
            let nk = size[k] as f64;
            let updated = match linkage {
                Linkage::Single => dak.min(dbk),
                Linkage::Complete => dak.max(dbk),
                Linkage::Average => (na * dak + nb * dbk) / (na + nb),
                Linkage::Ward => ((na + nk) * dak + (nb + nk) * dbk - nk * v) / (na + nb + nk),
            };
            dist[a * n + k] = updated;
            dist[k * n + a] = updated;
        }
        size[a] += size[b];
        node[a] = n + step;
        active.retain(|&s| s != b);
        let height = if linkage == Linkage::Ward { v.max(0.0).sqrt() } else { v };
        merges.push(Merge { left, right, height });
    }
    Ok(Dendrogram { n, merges })
}

/// Partition with exactly `k` clusters: the last `k − 1` merges undone.
pub fn cut_dendrogram(dend: &Dendrogram, k: usize) -> Result<Partition> {
    let n = dend.n;
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("cut size {k} outside 1..={n}")));
    }
    // union-find over nodes; each merge points both children at the new node
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (s, m) in dend.merges[..n - k].iter().enumerate() {
        let (l, r) = (root(&mut parent, m.left), root(&mut parent, m.right));
        parent[l] = n + s;
        parent[r] = n + s;
    }
    let labels: Vec<usize> = (0..n).map(|i| root(&mut parent, i)).collect();
    Partition::canonicalize(&labels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PamResult {
    pub partition: Partition,
    /// Ascending item indices.
    pub medoids: Vec<usize>,
    pub cost: f64,
    /// Total cost after BUILD and after every applied swap.
    pub cost_trace: Vec<f64>,
}

/// Nearest medoid of each item (smaller medoid index on ties) and the total
/// cost. `medoids` must be ascending.
fn assign(d: &DistanceMatrix, medoids: &[usize]) -> (Vec<usize>, f64) {
    let mut cost = 0.0;
    let nearest = (0..d.n_items())
        .map(|i| {
            let mut best = (f64::INFINITY, medoids[0]);
            for &m in medoids {
                if d.get(i, m) < best.0 {
                    best = (d.get(i, m), m);
                }
            }
            cost += best.0;
            best.1
        })
        .collect();
    (nearest, cost)
}

fn total_cost(d: &DistanceMatrix, medoids: &[usize]) -> f64 {
    (0..d.n_items())
        .map(|i| medoids.iter().map(|&m| d.get(i, m)).fold(f64::INFINITY, f64::min))
        .sum()
}

/// Partitioning around medoids: greedy BUILD, then SWAP applying the single
/// best exchange while it strictly lowers the cost.
pub fn pam(d: &DistanceMatrix, k: usize, max_iter: usize) -> Result<PamResult> {
    let n = d.n_items();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k = {k} outside 1..={n}")));
    }
    // BUILD
    let mut nearest = vec![f64::INFINITY; n];
    let mut medoids = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(f64, usize)> = None;
        for c in (0..n).filter(|c| !medoids.contains(c)) {
            let cost: f64 = (0..n).map(|j| nearest[j].min(d.get(j, c))).sum();
            if best.is_none_or(|(b, _)| cost < b) {
                best = Some((cost, c));
            }
        }
        let (_, c) = best.expect("k <= n");
        medoids.push(c);
        for (j, v) in nearest.iter_mut().enumerate() {
            *v = v.min(d.get(j, c));
        }
    }
    medoids.sort_unstable();
    let mut cost = total_cost(d, &medoids);
    let mut cost_trace = vec![cost];

    // SWAP
    for _ in 0..max_iter {
        let mut best: Option<(f64, usize, usize)> = None;
        for slot in 0..k {
            for h in (0..n).filter(|h| !medoids.contains(h)) {
                let mut trial = medoids.clone();
                trial[slot] = h;
                let c = total_cost(d, &trial);
                if best.is_none_or(|(b, _, _)| c < b) {
                    best = Some((c, slot, h));
                }
            }
        }
        match best {
            Some((c, slot, h)) if c < cost - 1e-12 * cost.abs().max(1.0) => {
                medoids[slot] = h;
                medoids.sort_unstable();
                cost = c;
                cost_trace.push(cost);
            }
            _ => break,
        }
    }
    let (labels, cost) = assign(d, &medoids);
    Ok(PamResult {
        partition: Partition::canonicalize(&labels)?,
        medoids,
        cost,
        cost_trace,
    })
}

pub const PAM_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    Pam,
    Hierarchical(Linkage),
}

impl fmt::Display for BaselineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaselineMethod::Pam => f.write_str("pam"),
            BaselineMethod::Hierarchical(l) => write!(f, "hclust-{l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSelection {
    pub k: usize,
    pub partition: Partition,
    /// (k, average silhouette) for every k tried.
    pub scores: Vec<(usize, f64)>,
}

/// Runs `method` for every k in `range`; the largest average silhouette wins,
/// ties going to the smaller k.
pub fn select_k_by_silhouette(
    d: &DistanceMatrix,
    range: RangeInclusive<usize>,
    method: BaselineMethod,
) -> Result<KSelection> {
    let n = d.n_items();
    if range.is_empty() || *range.start() < 2 || *range.end() + 1 > n {
        return Err(Error::InvalidParameter(format!(
            "k range {}..={} must be non-empty and within 2..={}",
            range.start(),
            range.end(),
            n.saturating_sub(1)
        )));
    }
    let dend = match method {
        BaselineMethod::Hierarchical(l) => Some(hierarchical(d, l)?),
        BaselineMethod::Pam => None,
    };
    let mut best: Option<(f64, usize, Partition)> = None;
    let mut scores = Vec::new();
    for k in range {
        let p = match &dend {
            Some(dend) => cut_dendrogram(dend, k)?,
            None => pam(d, k, PAM_MAX_ITER)?.partition,
        };
        let s = average_silhouette(&p, d)?;
        scores.push((k, s));
        if best.as_ref().is_none_or(|(b, _, _)| s > *b) {
            best = Some((s, k, p));
        }
    }
    let (_, k, partition) = best.expect("non-empty range");
    Ok(KSelection { k, partition, scores })
}

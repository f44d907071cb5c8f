//! Reference implementations used as test oracles. Everything here is
//! written from the definitions, without going through the crate's
//! incremental or greedy code paths.

#![allow(dead_code)]

use std::path::PathBuf;

use caviarpd::{DistanceMatrix, PairwiseSimilarityMatrix, Partition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Every set partition of `n` items as restricted growth strings, in
/// lexicographic order (Bell(n) of them).
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for label in 0..=max + 1 {
            prefix.push(label);
            let next_max = if label > max { label } else { max };
            extend(prefix, next_max, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut prefix = vec![0];
    extend(&mut prefix, 0, n, &mut out);
    out
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, items, out);
            if k.is_multiple_of(2) {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    let mut items: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut items, &mut out);
    out
}

/// Ewens (CRP) probability of a partition with the given block sizes:
/// `alpha^K prod (|S|-1)! / prod_{i<n} (alpha + i)`.
pub fn ewens_log_pmf(sizes: &[usize], mass: f64) -> f64 {
    let n: usize = sizes.iter().sum();
    let mut log_p = sizes.len() as f64 * mass.ln();
    for &s in sizes {
        log_p += (1..s).map(|i| (i as f64).ln()).sum::<f64>();
    }
    log_p - (0..n).map(|i| (mass + i as f64).ln()).sum::<f64>()
}

/// EPA probability of `labels` when items arrive in `order`, built step by
/// step from the allocation rule on a plain similarity table.
pub fn epa_pmf_oracle(labels: &[usize], mass: f64, sim: &[Vec<f64>], order: &[usize]) -> f64 {
    let mut p = 1.0;
    for (step, &item) in order.iter().enumerate() {
        let earlier = &order[..step];
        let seen = earlier.iter().any(|&s| labels[s] == labels[item]);
        let t = step as f64;
        if !seen {
            p *= mass / (mass + t);
        } else {
            let same: f64 = earlier.iter().filter(|&&s| labels[s] == labels[item]).map(|&s| sim[item][s]).sum();
            let all: f64 = earlier.iter().map(|&s| sim[item][s]).sum();
            p *= t / (mass + t) * same / all;
        }
    }
    p
}

/// Symmetric matrix with zero diagonal and off-diagonal entries drawn by `f`.
pub fn random_symmetric(n: usize, rng: &mut impl Rng, mut f: impl FnMut(&mut dyn rand::RngCore) -> f64) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = f(rng);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

pub fn random_distances(n: usize, rng: &mut impl Rng) -> DistanceMatrix {
    let rows = random_symmetric(n, rng, |r| r.random_range(0.01..10.0));
    DistanceMatrix::from_rows(&rows).unwrap()
}

pub fn random_partition(n: usize, max_k: usize, rng: &mut impl Rng) -> Partition {
    let raw: Vec<usize> = (0..n).map(|_| rng.random_range(0..max_k)).collect();
    Partition::canonicalize(&raw).unwrap()
}

/// Co-clustering frequencies of `draws` random partitions, computed pair by
/// pair.
pub fn random_psm(n: usize, draws: usize, rng: &mut impl Rng) -> PairwiseSimilarityMatrix {
    let samples: Vec<Partition> = (0..draws)
        .map(|_| {
            let k = rng.random_range(1..=n);
            random_partition(n, k, rng)
        })
        .collect();
    let mut rows = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let together = samples.iter().filter(|p| p.labels()[i] == p.labels()[j]).count();
                rows[i][j] = together as f64 / draws as f64;
            }
        }
    }
    PairwiseSimilarityMatrix::from_rows(&rows).unwrap()
}

pub fn expected_binder_oracle(labels: &[usize], psm: &PairwiseSimilarityMatrix) -> f64 {
    let n = labels.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let gamma = f64::from(u8::from(labels[i] == labels[j]));
            let diff = gamma - psm.get(i, j);
            total += diff * diff;
        }
    }
    total
}

pub fn expected_vi_lb_oracle(labels: &[usize], psm: &PairwiseSimilarityMatrix) -> f64 {
    let n = labels.len();
    let mut total = 0.0;
    for i in 0..n {
        let size = labels.iter().filter(|&&l| l == labels[i]).count() as f64;
        let all: f64 = (0..n).map(|j| psm.get(i, j)).sum();
        let within: f64 = (0..n).filter(|&j| labels[j] == labels[i]).map(|j| psm.get(i, j)).sum();
        total += size.log2() + all.log2() - 2.0 * within.log2();
    }
    total / n as f64 * std::f64::consts::LN_2
}

/// Minimum of `loss` over every set partition.
pub fn brute_force_min(n: usize, loss: impl Fn(&[usize]) -> f64) -> f64 {
    set_partitions(n).iter().map(|p| loss(p)).fold(f64::INFINITY, f64::min)
}

/// Binder distance between label vectors by pair counting, normalized.
pub fn binder_oracle(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let mut disagree = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            if (a[i] == a[j]) != (b[i] == b[j]) {
                disagree += 1;
            }
        }
    }
    disagree as f64 / (n * (n - 1) / 2) as f64
}

/// VI from the contingency table, natural log.
pub fn vi_oracle(a: &[usize], b: &[usize]) -> f64 {
    use std::collections::HashMap;
    let n = a.len() as f64;
    let mut ca: HashMap<usize, f64> = HashMap::new();
    let mut cb: HashMap<usize, f64> = HashMap::new();
    let mut cab: HashMap<(usize, usize), f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *ca.entry(x).or_default() += 1.0;
        *cb.entry(y).or_default() += 1.0;
        *cab.entry((x, y)).or_default() += 1.0;
    }
    let h = |m: &HashMap<usize, f64>| -m.values().map(|c| c / n * (c / n).ln()).sum::<f64>();
    let mi: f64 = cab.iter().map(|(&(x, y), &c)| c / n * (c * n / (ca[&x] * cb[&y])).ln()).sum();
    h(&ca) + h(&cb) - 2.0 * mi
}

/// Smallest total cost over every k-subset of medoids.
pub fn exhaustive_medoid_cost(d: &DistanceMatrix, k: usize) -> f64 {
    fn combos(start: usize, n: usize, k: usize, chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if chosen.len() == k {
            f(chosen);
            return;
        }
        for m in start..n {
            chosen.push(m);
            combos(m + 1, n, k, chosen, f);
            chosen.pop();
        }
    }
    let n = d.n_items();
    let mut best = f64::INFINITY;
    combos(0, n, k, &mut Vec::new(), &mut |medoids| {
        let cost: f64 = (0..n)
            .map(|i| medoids.iter().map(|&m| d.get(i, m)).fold(f64::INFINITY, f64::min))
            .sum();
        best = best.min(cost);
    });
    best
}

/// Edge weights of a minimum spanning tree (Prim), ascending.
pub fn mst_weights(d: &DistanceMatrix) -> Vec<f64> {
    let n = d.n_items();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut weights = Vec::with_capacity(n - 1);
    for step in 0..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        in_tree[u] = true;
        if step > 0 {
            weights.push(best[u]);
        }
        for v in 0..n {
            if !in_tree[v] && d.get(u, v) < best[v] {
                best[v] = d.get(u, v);
            }
        }
    }
    weights.sort_by(f64::total_cmp);
    weights
}

/// Average silhouette straight from the definition; singletons score 0.
pub fn silhouette_oracle(labels: &[usize], d: &DistanceMatrix) -> f64 {
    let n = labels.len();
    let k = labels.iter().max().unwrap() + 1;
    let mut total = 0.0;
    for i in 0..n {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for j in (0..n).filter(|&j| j != i) {
            sums[labels[j]] += d.get(i, j);
            counts[labels[j]] += 1;
        }
        let own = labels[i];
        if counts[own] == 0 {
            continue;
        }
        let a = sums[own] / counts[own] as f64;
        let b = (0..k)
            .filter(|&c| c != own && counts[c] > 0)
            .map(|c| sums[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / n as f64
}

//! Pairwise similarity matrix: the fraction of sampled partitions that put
//! each pair of items together, plus heat map output.

use std::fs::File;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use crate::epa::Permutation;
use crate::error::{Error, Result};
use crate::partition::Partition;

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseSimilarityMatrix {
    n: usize,
    entries: Vec<f64>,
    sample_count: usize,
}

/// Co-clustering counts for the upper triangle, mergeable across shards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoClusteringCounts {
    n: usize,
    counts: Vec<u32>,
    samples: usize,
}

impl CoClusteringCounts {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            counts: vec![0; n * (n.saturating_sub(1)) / 2],
            samples: 0,
        }
    }

    fn offset(n: usize, i: usize) -> usize {
        // start of row i in the packed strict upper triangle
        i * (2 * n - i - 1) / 2
    }

    pub fn add(&mut self, p: &Partition) -> Result<()> {
        if p.n_items() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: p.n_items(),
            });
        }
        let n = self.n;
        for members in p.clusters() {
            for (a, &i) in members.iter().enumerate() {
                let row = Self::offset(n, i);
                for &j in &members[a + 1..] {
                    self.counts[row + j - i - 1] += 1;
                }
            }
        }
        self.samples += 1;
        Ok(())
    }

    pub fn merge(mut self, other: &Self) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.samples += other.samples;
        Ok(self)
    }

    pub fn finish(&self) -> Result<PairwiseSimilarityMatrix> {
        if self.samples == 0 {
            return Err(Error::InvalidInput("no samples".into()));
        }
        let n = self.n;
        let b = self.samples as f64;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
            let row = Self::offset(n, i);
            for j in i + 1..n {
                let v = self.counts[row + j - i - 1] as f64 / b;
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        Ok(PairwiseSimilarityMatrix {
            n,
            entries,
            sample_count: self.samples,
        })
    }
}

/// Element-wise mean of the samples' association matrices.
pub fn pairwise_similarity(samples: &[Partition]) -> Result<PairwiseSimilarityMatrix> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidInput("need at least one sample".into()))?;
    let mut counts = CoClusteringCounts::new(first.n_items());
    for p in samples {
        counts.add(p)?;
    }
    counts.finish()
}

impl PairwiseSimilarityMatrix {
    /// Wraps a precomputed matrix, e.g. for searching a known target. It must be
    /// symmetric with unit diagonal and entries in [0, 1]; `sample_count` is 0.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                let ok = (0.0..=1.0).contains(&v) && (i != j || v == 1.0) && v == rows[j][i];
                if !ok {
                    return Err(Error::InvalidInput(format!("bad similarity ({i},{j}) = {v}")));
                }
            }
            entries.extend_from_slice(row);
        }
        Ok(Self {
            n,
            entries,
            sample_count: 0,
        })
    }

    pub fn n_items(&self) -> usize {
        self.n
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Writes `i,j,psm` for every pair `i <= j`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "i,j,psm")?;
        for i in 0..self.n {
            for j in i..self.n {
                writeln!(out, "{i},{j},{}", self.get(i, j))?;
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().transpose()?;
        if header.as_deref().map(str::trim) != Some("i,j,psm") {
            return Err(Error::Data("missing `i,j,psm` header".into()));
        }
        let mut triples = Vec::new();
        let mut n = 0;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::Data(format!("bad psm row: {line}"));
            if f.len() != 3 {
                return Err(bad());
            }
            let i: usize = f[0].trim().parse().map_err(|_| bad())?;
            let j: usize = f[1].trim().parse().map_err(|_| bad())?;
            let v: f64 = f[2].trim().parse().map_err(|_| bad())?;
            n = n.max(i + 1).max(j + 1);
            triples.push((i, j, v));
        }
        let mut rows = vec![vec![f64::NAN; n]; n];
        for (i, j, v) in triples {
            rows[i][j] = v;
            rows[j][i] = v;
        }
        Self::from_rows(&rows)
    }

    /// Copy with rows and columns permuted to `order`.
    pub fn reordered(&self, order: &Permutation) -> Vec<Vec<f64>> {
        let o = order.order();
        o.iter().map(|&i| o.iter().map(|&j| self.get(i, j)).collect()).collect()
    }
}

/// Item order that makes the estimated clusters contiguous: clusters by size
/// descending, then by their first item; items ascending within a cluster.
pub fn display_order(psm: &PairwiseSimilarityMatrix, estimate: &Partition) -> Result<Permutation> {
    if estimate.n_items() != psm.n_items() {
        return Err(Error::DimensionMismatch {
            expected: psm.n_items(),
            found: estimate.n_items(),
        });
    }
    // Canonical labels already follow first-item order, so a stable sort by
    // size keeps that as the tie-breaker.
    let mut clusters = estimate.clusters();
    clusters.sort_by_key(|c| std::cmp::Reverse(c.len()));
    Permutation::new(clusters.concat())
}

/// Grayscale P5 bytes: header `P5\n{w} {w}\n255\n` then row-major pixels with
/// value `floor(255 * psm + 0.5)`.
pub fn heatmap_pgm(psm: &PairwiseSimilarityMatrix, order: &Permutation, cell_size: usize) -> Result<Vec<u8>> {
    if cell_size == 0 {
        return Err(Error::InvalidParameter("cell size must be >= 1".into()));
    }
    if order.len() != psm.n_items() {
        return Err(Error::DimensionMismatch {
            expected: psm.n_items(),
            found: order.len(),
        });
    }
    let width = psm.n_items() * cell_size;
    let mut bytes = format!("P5\n{width} {width}\n255\n").into_bytes();
    bytes.reserve(width * width);
    for &i in order.order() {
        let row: Vec<u8> = order
            .order()
            .iter()
            .flat_map(|&j| {
                let v = (255.0 * psm.get(i, j) + 0.5).floor() as u8;
                std::iter::repeat_n(v, cell_size)
            })
            .collect();
        for _ in 0..cell_size {
            bytes.extend_from_slice(&row);
        }
    }
    Ok(bytes)
}

/// Writes the heat map to `path` and the reordered matrix to `path` with a
/// `.csv` extension (`row,col,item_i,item_j,psm`).
pub fn render_heatmap(
    psm: &PairwiseSimilarityMatrix,
    order: &Permutation,
    cell_size: usize,
    path: &Path,
) -> Result<()> {
    let bytes = heatmap_pgm(psm, order, cell_size)?;
    std::fs::write(path, bytes)?;
    let mut out = BufWriter::new(File::create(path.with_extension("csv"))?);
    writeln!(out, "row,col,item_i,item_j,psm")?;
    for (r, &i) in order.order().iter().enumerate() {
        for (c, &j) in order.order().iter().enumerate() {
            writeln!(out, "{r},{c},{i},{j},{}", psm.get(i, j))?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn part(l: &[usize]) -> Partition {
        Partition::canonicalize(l).unwrap()
    }

    #[test]
    fn average_of_two_partitions() {
        let psm = pairwise_similarity(&[part(&[0, 0, 1]), part(&[0, 1, 1])]).unwrap();
        assert_eq!(psm.get(0, 1), 0.5);
        assert_eq!(psm.get(1, 2), 0.5);
        assert_eq!(psm.get(0, 2), 0.0);
        assert!((0..3).all(|i| psm.get(i, i) == 1.0));
        assert_eq!(psm.sample_count(), 2);
    }

    #[test]
    fn identical_samples_give_association_matrix() {
        let p = part(&[0, 1, 0, 2, 1]);
        let psm = pairwise_similarity(&vec![p.clone(); 4]).unwrap();
        let a = p.association_matrix();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(psm.get(i, j), a.get(i, j) as u8 as f64);
            }
        }
        let apart = pairwise_similarity(&[part(&[0, 1]), part(&[0, 1])]).unwrap();
        assert_eq!(apart.get(0, 1), 0.0);
    }

    #[test]
    fn inconsistent_sizes_rejected() {
        assert!(pairwise_similarity(&[part(&[0, 1]), part(&[0, 1, 2])]).is_err());
        assert!(pairwise_similarity(&[]).is_err());
    }

    #[test]
    fn display_order_fixtures() {
        let psm = pairwise_similarity(&[part(&[0, 1, 0])]).unwrap();
        assert_eq!(display_order(&psm, &part(&[0, 1, 0])).unwrap().order(), &[0, 2, 1]);
        let psm = pairwise_similarity(&[part(&[0, 0, 1, 1, 1])]).unwrap();
        assert_eq!(
            display_order(&psm, &part(&[0, 0, 1, 1, 1])).unwrap().order(),
            &[2, 3, 4, 0, 1]
        );
        let psm = pairwise_similarity(&[part(&[0, 1, 2, 3])]).unwrap();
        assert_eq!(
            display_order(&psm, &Partition::singletons(4)).unwrap().order(),
            &[0, 1, 2, 3]
        );
    }

    #[test]
    fn heatmap_fixtures() {
        let psm = PairwiseSimilarityMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let bytes = heatmap_pgm(&psm, &Permutation::identity(2), 1).unwrap();
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[255, 128, 128, 255]);

        let id = pairwise_similarity(&[Partition::singletons(3)]).unwrap();
        let bytes = heatmap_pgm(&id, &Permutation::identity(3), 2).unwrap();
        let pixels = &bytes[b"P5\n6 6\n255\n".len()..];
        for r in 0..6 {
            for c in 0..6 {
                let expect = if r / 2 == c / 2 { 255 } else { 0 };
                assert_eq!(pixels[r * 6 + c], expect);
            }
        }

        let one = pairwise_similarity(&[Partition::one_cluster(1)]).unwrap();
        let bytes = heatmap_pgm(&one, &Permutation::identity(1), 1).unwrap();
        assert_eq!(bytes.last(), Some(&255));
        assert_eq!(bytes.len(), b"P5\n1 1\n255\n".len() + 1);
    }

    #[test]
    fn heatmap_rejects_zero_cell() {
        let one = pairwise_similarity(&[Partition::one_cluster(1)]).unwrap();
        assert!(heatmap_pgm(&one, &Permutation::identity(1), 0).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let samples = [part(&[0, 0, 1, 2]), part(&[0, 1, 1, 2]), part(&[0, 0, 0, 0])];
        let psm = pairwise_similarity(&samples).unwrap();
        let mut buf = Vec::new();
        psm.write_csv(&mut buf).unwrap();
        let back = PairwiseSimilarityMatrix::read_csv(&buf[..]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(back.get(i, j).to_bits(), psm.get(i, j).to_bits());
            }
        }
    }

    fn arb_samples() -> impl Strategy<Value = Vec<Vec<u8>>> {
        (1usize..8).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0u8..4, n), 1..12))
    }

    proptest! {
        #[test]
        fn psm_invariants(raw in arb_samples()) {
            let samples: Vec<Partition> = raw.iter().map(|r| Partition::canonicalize(r).unwrap()).collect();
            let psm = pairwise_similarity(&samples).unwrap();
            let b = samples.len() as f64;
            let n = psm.n_items();
            for i in 0..n {
                prop_assert_eq!(psm.get(i, i), 1.0);
                for j in 0..n {
                    let v = psm.get(i, j);
                    prop_assert!((0.0..=1.0).contains(&v));
                    prop_assert_eq!(v, psm.get(j, i));
                    prop_assert!(((v * b).round() - v * b).abs() < 1e-9);
                }
            }
            let mut reversed = samples.clone();
            reversed.reverse();
            prop_assert_eq!(pairwise_similarity(&reversed).unwrap(), psm.clone());

            // sharded accumulation merges to the same matrix
            let mid = samples.len() / 2;
            let mut left = CoClusteringCounts::new(n);
            let mut right = CoClusteringCounts::new(n);
            samples[..mid].iter().for_each(|p| left.add(p).unwrap());
            samples[mid..].iter().for_each(|p| right.add(p).unwrap());
            prop_assert_eq!(right.merge(&left).unwrap().finish().unwrap(), psm.clone());

            let order = display_order(&psm, &samples[0]).unwrap();
            let bytes = heatmap_pgm(&psm, &order, 2).unwrap();
            let w = 2 * n;
            let pixels = &bytes[bytes.len() - w * w..];
            for r in 0..w {
                for c in 0..w {
                    prop_assert_eq!(pixels[r * w + c], pixels[c * w + r]);
                }
            }
        }
    }
}

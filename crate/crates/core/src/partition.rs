//! Canonical partitions of `n` items and their association matrices.
//!
//! A [`Partition`] stores one label per item. Labels are dense and appear in
//! first-occurrence order, so two label vectors describe the same grouping
//! exactly when they are equal.

use std::collections::HashMap;
use std::hash::Hash;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    labels: Vec<usize>,
    n_clusters: usize,
}

impl Partition {
    /// Relabels arbitrary cluster identifiers by order of first occurrence.
    pub fn canonicalize<T: Hash + Eq>(raw_labels: &[T]) -> Result<Self> {
        if raw_labels.is_empty() {
            return Err(Error::EmptyPartition);
        }
        let mut map: HashMap<&T, usize> = HashMap::new();
        let labels = raw_labels
            .iter()
            .map(|raw| {
                let next = map.len();
                *map.entry(raw).or_insert(next)
            })
            .collect();
        Ok(Self {
            labels,
            n_clusters: map.len(),
        })
    }

    /// Accepts a label vector that is already canonical.
    pub fn from_canonical(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyPartition);
        }
        let mut next = 0;
        for &label in &labels {
            if label == next {
                next += 1;
            } else if label > next {
                return Err(Error::InvalidInput(format!(
                    "labels are not canonical: saw {label} before {next}"
                )));
            }
        }
        Ok(Self {
            labels,
            n_clusters: next,
        })
    }

    pub fn one_cluster(n: usize) -> Self {
        assert!(n > 0, "partition needs at least one item");
        Self {
            labels: vec![0; n],
            n_clusters: 1,
        }
    }

    pub fn singletons(n: usize) -> Self {
        assert!(n > 0, "partition needs at least one item");
        Self {
            labels: (0..n).collect(),
            n_clusters: n,
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_items(&self) -> usize {
        self.labels.len()
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn label(&self, item: usize) -> usize {
        self.labels[item]
    }

    pub fn same_cluster(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for &label in &self.labels {
            sizes[label] += 1;
        }
        sizes
    }

    /// Members of each cluster, in label order, each list ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut clusters = vec![Vec::new(); self.n_clusters];
        for (item, &label) in self.labels.iter().enumerate() {
            clusters[label].push(item);
        }
        clusters
    }

    pub fn association_matrix(&self) -> AssociationMatrix {
        let n = self.n_items();
        let mut entries = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = self.labels[i] == self.labels[j];
            }
        }
        AssociationMatrix { n, entries }
    }

    /// Writes `item_index,cluster_label` rows (0-based indices) with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "item_index,cluster_label")?;
        for (i, label) in self.labels.iter().enumerate() {
            writeln!(out, "{i},{label}")?;
        }
        Ok(())
    }

    /// Reads the format produced by [`Partition::write_csv`]. Rows may come in
    /// any order but every index in `0..n` must appear exactly once.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().transpose()?;
        if header.as_deref().map(str::trim) != Some("item_index,cluster_label") {
            return Err(Error::Data("missing partition CSV header".into()));
        }
        let mut pairs = Vec::new();
        for (row, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parse = |field: Option<&str>| -> Result<usize> {
                field
                    .and_then(|f| f.trim().parse().ok())
                    .ok_or_else(|| Error::Data(format!("bad partition row {}: {line}", row + 2)))
            };
            let mut fields = line.split(',');
            let item = parse(fields.next())?;
            let label = parse(fields.next())?;
            pairs.push((item, label));
        }
        let n = pairs.len();
        let mut raw = vec![None; n];
        for (item, label) in pairs {
            match raw.get_mut(item) {
                Some(slot @ None) => *slot = Some(label),
                _ => return Err(Error::Data(format!("item index {item} invalid or repeated"))),
            }
        }
        let raw: Vec<usize> = raw.into_iter().map(|l| l.expect("filled above")).collect();
        Self::canonicalize(&raw)
    }
}

/// Binary co-membership matrix of a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationMatrix {
    n: usize,
    entries: Vec<bool>,
}

impl AssociationMatrix {
    pub fn n_items(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.entries
            .chunks(self.n)
            .map(|row| row.iter().map(|&b| b as u8).collect())
            .collect()
    }

    /// Recovers the partition whose relation this matrix encodes, as the
    /// connected components of its 1-entries.
    pub fn to_partition(&self) -> Partition {
        let n = self.n;
        let mut labels = vec![usize::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if labels[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            labels[start] = next;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    if labels[j] == usize::MAX && self.get(i, j) {
                        labels[j] = next;
                        stack.push(j);
                    }
                }
            }
            next += 1;
        }
        Partition {
            labels,
            n_clusters: next,
        }
    }
}

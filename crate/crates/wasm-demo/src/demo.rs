//! The demo's operations on plain Rust types, so they can be tested natively.

use caviarpd::psm::{display_order, heatmap_pgm};
use caviarpd::{
    caviarpd_estimate, cut_dendrogram, estimate_at_mass, hierarchical, pam, CaviarResult, DistanceMatrix,
    Distribution, EpaParams, Error, Linkage, MassSearchConfig, Partition, Result, SearchConfig,
};

/// Most points the page accepts; sampling cost grows with the square.
pub const MAX_POINTS: usize = 400;

/// Euclidean distances between 2-D points given as `[x0, y0, x1, y1, ...]`.
pub fn distances(xy: &[f64]) -> Result<DistanceMatrix> {
    if !xy.len().is_multiple_of(2) {
        return Err(Error::InvalidInput("coordinates must come in (x, y) pairs".into()));
    }
    let n = xy.len() / 2;
    if n < 3 {
        return Err(Error::InvalidInput("place at least 3 points".into()));
    }
    if n > MAX_POINTS {
        return Err(Error::InvalidInput(format!("at most {MAX_POINTS} points")));
    }
    if xy.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("coordinates must be finite".into()));
    }
    Ok(DistanceMatrix::from_fn(n, |i, j| {
        (xy[2 * i] - xy[2 * j]).hypot(xy[2 * i + 1] - xy[2 * j + 1])
    }))
}

/// What the page draws after any operation.
#[derive(Debug, Clone, PartialEq)]
pub struct View {
    pub mass: f64,
    pub labels: Vec<u32>,
    pub n_clusters: usize,
    /// NaN when the silhouette is undefined (one cluster, or all singletons).
    pub silhouette: f64,
    /// Row-major gray pixels, one per item pair, items in display order.
    pub heatmap: Vec<u8>,
    pub heatmap_width: usize,
    /// `(alpha, k, silhouette)` per grid point; empty without mass selection.
    pub grid: Vec<(f64, usize, f64)>,
}

fn labels_u32(p: &Partition) -> Vec<u32> {
    p.labels().iter().map(|&l| l as u32).collect()
}

fn view(r: &CaviarResult) -> Result<View> {
    let order = display_order(&r.psm, &r.estimate)?;
    let pgm = heatmap_pgm(&r.psm, &order, 1)?;
    let width = r.psm.n_items();
    Ok(View {
        mass: r.mass,
        labels: labels_u32(&r.estimate),
        n_clusters: r.estimate.n_clusters(),
        silhouette: r.silhouette,
        heatmap: pgm[pgm.len() - width * width..].to_vec(),
        heatmap_width: width,
        grid: r
            .diagnostics
            .iter()
            .map(|g| (g.alpha, g.k, g.avg_silhouette.unwrap_or(f64::NAN)))
            .collect(),
    })
}

fn params(mass: f64, temperature: f64) -> EpaParams {
    EpaParams {
        temperature,
        ..EpaParams::new(mass)
    }
}

/// Ψ and its estimate at a fixed mass.
pub fn sample_at_mass(xy: &[f64], mass: f64, temperature: f64, samples: usize, seed: u64) -> Result<View> {
    let d = distances(xy)?;
    let params = params(mass, temperature);
    params.validate()?;
    let r = estimate_at_mass(&d, &params, Distribution::Epa, samples, seed, &SearchConfig::default())?;
    view(&r)
}

/// Mass chosen by silhouette over a cluster-count range, then the estimate.
pub fn select_mass(
    xy: &[f64],
    k_min: usize,
    k_max: usize,
    temperature: f64,
    samples: usize,
    seed: u64,
) -> Result<View> {
    let d = distances(xy)?;
    let msc = MassSearchConfig {
        k_min,
        k_max,
        samples_per_eval: samples,
        seed,
        ..Default::default()
    };
    let r = caviarpd_estimate(&d, &params(1.0, temperature), &msc, &SearchConfig::default())?;
    view(&r)
}

/// Labels from PAM (`"pam"`) or a hierarchical cut (`"single"`, `"complete"`,
/// `"average"`, `"ward"`) with `k` clusters.
pub fn baseline(xy: &[f64], method: &str, k: usize) -> Result<Vec<u32>> {
    let d = distances(xy)?;
    if k == 0 || k > d.n_items() {
        return Err(Error::InvalidParameter(format!("k must be between 1 and {}", d.n_items())));
    }
    let p = match method {
        "pam" => pam(&d, k, caviarpd::baselines::PAM_MAX_ITER)?.partition,
        other => {
            let linkage: Linkage = other.parse()?;
            cut_dendrogram(&hierarchical(&d, linkage)?, k)?
        }
    };
    Ok(labels_u32(&p))
}

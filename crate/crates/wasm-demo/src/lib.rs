//! Browser bindings for the clustering demo in `www/`.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js_error(e: caviarpd::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Result of a sampling run, read by the page through getters.
#[wasm_bindgen]
pub struct Clustering(demo::View);

#[wasm_bindgen]
impl Clustering {
    #[wasm_bindgen(getter)]
    pub fn mass(&self) -> f64 {
        self.0.mass
    }

    #[wasm_bindgen(getter)]
    pub fn labels(&self) -> Vec<u32> {
        self.0.labels.clone()
    }

    #[wasm_bindgen(getter, js_name = nClusters)]
    pub fn n_clusters(&self) -> usize {
        self.0.n_clusters
    }

    #[wasm_bindgen(getter)]
    pub fn silhouette(&self) -> f64 {
        self.0.silhouette
    }

    #[wasm_bindgen(getter)]
    pub fn heatmap(&self) -> Vec<u8> {
        self.0.heatmap.clone()
    }

    #[wasm_bindgen(getter, js_name = heatmapWidth)]
    pub fn heatmap_width(&self) -> usize {
        self.0.heatmap_width
    }

    /// Flattened `[alpha, k, silhouette, ...]` per grid point.
    #[wasm_bindgen(getter)]
    pub fn grid(&self) -> Vec<f64> {
        self.0.grid.iter().flat_map(|&(a, k, s)| [a, k as f64, s]).collect()
    }
}

#[wasm_bindgen(js_name = sampleAtMass)]
pub fn sample_at_mass(xy: &[f64], mass: f64, temperature: f64, samples: usize, seed: u32) -> Result<Clustering, JsError> {
    demo::sample_at_mass(xy, mass, temperature, samples, seed.into())
        .map(Clustering)
        .map_err(js_error)
}

#[wasm_bindgen(js_name = selectMass)]
pub fn select_mass(
    xy: &[f64],
    k_min: usize,
    k_max: usize,
    temperature: f64,
    samples: usize,
    seed: u32,
) -> Result<Clustering, JsError> {
    demo::select_mass(xy, k_min, k_max, temperature, samples, seed.into())
        .map(Clustering)
        .map_err(js_error)
}

#[wasm_bindgen]
pub fn baseline(xy: &[f64], method: &str, k: usize) -> Result<Vec<u32>, JsError> {
    demo::baseline(xy, method, k).map_err(js_error)
}

//! Nodal domain counting on a sign raster and the density estimator built on it.
//!
//! Both signs use 4-connectivity. A component is counted as inside the disk
//! of radius `R` only if every one of its nodes is strictly closer than `R` to
//! the raster center and none lies on the raster edge.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field_sampler::{
    draw, eval_raster, sample_seed, truncation_order, FieldRaster, GridSpec,
};

/// Disjoint-set forest over provisional labels, union by size with path halving.
#[derive(Debug, Clone, Default)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            parent: Vec::with_capacity(n),
            size: Vec::with_capacity(n),
        }
    }

    pub fn make_set(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.size.push(1);
        id
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut i: u32) -> u32 {
        while self.parent[i as usize] != i {
            let grand = self.parent[self.parent[i as usize] as usize];
            self.parent[i as usize] = grand;
            i = grand;
        }
        i
    }

    pub fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
    }
}

/// Signs of a raster; `true` is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SignGrid {
    rows: usize,
    cols: usize,
    positive: Vec<bool>,
    zero_node_count: usize,
    geometry: Option<GridSpec>,
    seed: u64,
}

impl SignGrid {
    /// Exact zeros are assigned `+` and counted in `zero_node_count`.
    pub fn from_raster(raster: &FieldRaster) -> Self {
        let mut zeros = 0;
        let positive = raster
            .values()
            .iter()
            .map(|&v| {
                if v == 0.0 {
                    zeros += 1;
                }
                v >= 0.0
            })
            .collect();
        Self {
            rows: raster.side(),
            cols: raster.side(),
            positive,
            zero_node_count: zeros,
            geometry: Some(*raster.grid()),
            seed: raster.seed(),
        }
    }

    /// A bare sign array without geometry, usable for labeling only.
    pub fn from_signs(rows: usize, cols: usize, positive: Vec<bool>) -> Result<Self> {
        if positive.len() != rows * cols {
            return Err(Error::Geometry(format!(
                "{} signs for a {rows}x{cols} grid",
                positive.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            positive,
            zero_node_count: 0,
            geometry: None,
            seed: 0,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_positive(&self, row: usize, col: usize) -> bool {
        self.positive[row * self.cols + col]
    }

    pub fn signs(&self) -> &[bool] {
        &self.positive
    }

    pub fn zero_node_count(&self) -> usize {
        self.zero_node_count
    }

    pub fn geometry(&self) -> Option<&GridSpec> {
        self.geometry.as_ref()
    }
}

/// Component label of every node, numbered `0..n_components` in raster order
/// of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    rows: usize,
    cols: usize,
    labels: Vec<u32>,
    n_components: usize,
}

impl Labeling {
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label_at(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.cols + col]
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn component_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_components];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }
}

/// Two-pass union-find labeling, 4-connected for both signs.
pub fn label(grid: &SignGrid) -> Labeling {
    let (rows, cols) = (grid.rows, grid.cols);
    let s = &grid.positive;
    let mut provisional = vec![0u32; rows * cols];
    let mut uf = UnionFind::with_capacity(rows * cols / 64 + 16);

    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            let left = (c > 0 && s[i - 1] == s[i]).then(|| provisional[i - 1]);
            let up = (r > 0 && s[i - cols] == s[i]).then(|| provisional[i - cols]);
            provisional[i] = match (left, up) {
                (None, None) => uf.make_set(),
                (Some(l), None) => l,
                (None, Some(u)) => u,
                (Some(l), Some(u)) => {
                    if l != u {
                        uf.union(l, u);
                    }
                    l
                }
            };
        }
    }

    let mut compact = vec![u32::MAX; uf.len()];
    let mut next = 0u32;
    for p in provisional.iter_mut() {
        let root = uf.find(*p) as usize;
        if compact[root] == u32::MAX {
            compact[root] = next;
            next += 1;
        }
        *p = compact[root];
    }

    Labeling {
        rows,
        cols,
        labels: provisional,
        n_components: next as usize,
    }
}

/// Flat indices of the 4-connected same-sign component containing `(row, col)`.
pub fn flood_fill_component(grid: &SignGrid, row: usize, col: usize) -> Vec<usize> {
    let (rows, cols) = (grid.rows, grid.cols);
    let start = row * cols + col;
    let sign = grid.positive[start];
    let mut seen = vec![false; rows * cols];
    let mut stack = vec![start];
    let mut out = Vec::new();
    seen[start] = true;
    while let Some(i) = stack.pop() {
        out.push(i);
        let (r, c) = (i / cols, i % cols);
        let mut visit = |j: usize| {
            if !seen[j] && grid.positive[j] == sign {
                seen[j] = true;
                stack.push(j);
            }
        };
        if c > 0 {
            visit(i - 1);
        }
        if c + 1 < cols {
            visit(i + 1);
        }
        if r > 0 {
            visit(i - cols);
        }
        if r + 1 < rows {
            visit(i + cols);
        }
    }
    out
}

/// Nodal domains of one sample relative to the disk of radius `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalCensus {
    pub seed: u64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub h: f64,
    pub n_inside: usize,
    pub n_touching: usize,
    pub zero_node_count: usize,
    /// Node counts of the inside components.
    pub component_sizes: Vec<usize>,
}

/// Splits the components of `labels` into those inside the disk of radius
/// `radius` about the raster center and those touching its boundary or the
/// raster edge.
pub fn census(labels: &Labeling, grid: &SignGrid, radius: f64) -> Result<NodalCensus> {
    let geom = grid
        .geometry
        .as_ref()
        .ok_or_else(|| Error::Geometry("census needs a sign grid with geometry".into()))?;
    if labels.rows != grid.rows || labels.cols != grid.cols {
        return Err(Error::Geometry(
            "labeling and sign grid differ in shape".into(),
        ));
    }
    if !(radius > 0.0) {
        return Err(invalid(format!("disk radius must be > 0, got {radius}")));
    }
    let h = geom.h();
    if radius + h > geom.half_extent() + 1e-9 * h {
        return Err(Error::Geometry(format!(
            "disk radius {radius} needs half_extent >= R + h = {}, raster has {}",
            radius + h,
            geom.half_extent()
        )));
    }

    let p = geom.half_nodes() as i64;
    let side = grid.rows;
    let r2 = radius * radius;
    let mut touching = vec![false; labels.n_components];
    for row in 0..side {
        let dy = (row as i64 - p) as f64 * h;
        let edge_row = row == 0 || row + 1 == side;
        for col in 0..side {
            let l = labels.labels[row * side + col] as usize;
            if touching[l] {
                continue;
            }
            let dx = (col as i64 - p) as f64 * h;
            if edge_row || col == 0 || col + 1 == side || dx * dx + dy * dy >= r2 {
                touching[l] = true;
            }
        }
    }

    let sizes = labels.component_sizes();
    let component_sizes: Vec<usize> = sizes
        .iter()
        .zip(&touching)
        .filter(|(_, &t)| !t)
        .map(|(&s, _)| s)
        .collect();
    Ok(NodalCensus {
        seed: grid.seed,
        radius,
        h,
        n_inside: component_sizes.len(),
        n_touching: touching.iter().filter(|&&t| t).count(),
        zero_node_count: grid.zero_node_count,
        component_sizes,
    })
}

/// Half extent of the raster used to count inside a disk of radius `radius`.
pub fn raster_half_extent(radius: f64, h: f64) -> f64 {
    radius + 2.0 * h
}

/// Draws the sample with `seed`, rasterises it around the disk and takes its census.
pub fn count_sample(seed: u64, radius: f64, h: f64, eps: f64) -> Result<NodalCensus> {
    let grid = GridSpec::centered(h, raster_half_extent(radius, h))?;
    let n_trunc = truncation_order(grid.max_radius(), eps)?;
    let coeffs = draw(seed, n_trunc)?;
    let raster = eval_raster(&coeffs, &grid)?;
    let signs = SignGrid::from_raster(&raster);
    census(&label(&signs), &signs, radius)
}

/// Censuses of samples `indices` of the ensemble seeded by `master`, in index order.
pub fn count_ensemble(
    master: u64,
    indices: std::ops::Range<u64>,
    radius: f64,
    h: f64,
    eps: f64,
) -> Result<Vec<NodalCensus>> {
    indices
        .into_par_iter()
        .map(|i| count_sample(sample_seed(master, i), radius, h, eps))
        .collect()
}

/// Ensemble estimate `4 mean(n_inside) / R^2` of the nodal domain constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuEstimate {
    pub nu_hat: f64,
    pub stderr: f64,
    pub n_samples: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub h: f64,
    pub mean_inside: f64,
    pub std_inside: f64,
}

pub fn estimate_nu(samples: &[NodalCensus]) -> Result<NuEstimate> {
    if samples.len() < 2 {
        return Err(invalid(format!(
            "need at least 2 samples, got {}",
            samples.len()
        )));
    }
    let (radius, h) = (samples[0].radius, samples[0].h);
    if let Some(odd) = samples.iter().find(|s| s.radius != radius || s.h != h) {
        return Err(Error::Geometry(format!(
            "mixed geometries: (R={radius}, h={h}) and (R={}, h={})",
            odd.radius, odd.h
        )));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().map(|s| s.n_inside as f64).sum::<f64>() / n;
    let var = samples
        .iter()
        .map(|s| (s.n_inside as f64 - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    let scale = 4.0 / (radius * radius);
    Ok(NuEstimate {
        nu_hat: scale * mean,
        stderr: scale * var.sqrt() / n.sqrt(),
        n_samples: samples.len(),
        radius,
        h,
        mean_inside: mean,
        std_inside: var.sqrt(),
    })
}

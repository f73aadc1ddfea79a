//! Uniform box grids in one or two dimensions, grid functions with
//! zero-extension semantics, and quadrature over them.

mod mollify;
mod pairs;
mod rule;
mod testfn;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use mollify::mollify;
pub use pairs::{double_integrate, Ladder, PairGeometry};
pub use rule::{DiagonalPolicy, QuadratureRule, SingleRule};
pub use testfn::{make_test_function, TestKind};

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 8;

/// A box [lower, upper] in R^dim (dim ∈ {1, 2}) sampled on a uniform grid
/// that includes the boundary. Node `(ix, iy)` has flat index `ix * ny + iy`;
/// in one dimension `ny = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    dim: usize,
    lower: [f64; 2],
    upper: [f64; 2],
    nodes: [usize; 2],
    halo: f64,
}

impl Domain {
    pub fn interval(a: f64, b: f64, nodes: usize) -> Result<Self> {
        Self::build(1, [a, 0.0], [b, 0.0], [nodes, 1])
    }

    pub fn rectangle(x: [f64; 2], y: [f64; 2], nodes: [usize; 2]) -> Result<Self> {
        Self::build(2, [x[0], y[0]], [x[1], y[1]], nodes)
    }

    fn build(dim: usize, lower: [f64; 2], upper: [f64; 2], nodes: [usize; 2]) -> Result<Self> {
        for axis in 0..dim {
            if !(lower[axis].is_finite() && upper[axis].is_finite() && upper[axis] > lower[axis]) {
                return Err(Error::Invalid(format!(
                    "axis {axis}: bounds [{}, {}] must be finite and increasing",
                    lower[axis], upper[axis]
                )));
            }
            if nodes[axis] < MIN_NODES {
                return Err(Error::Invalid(format!(
                    "axis {axis}: at least {MIN_NODES} nodes required, got {}",
                    nodes[axis]
                )));
            }
        }
        let mut dom = Domain { dim, lower, upper, nodes, halo: 0.0 };
        dom.halo = dom.diameter();
        Ok(dom)
    }

    /// Width of the exterior band used for zero-extension integrals.
    pub fn with_halo(mut self, halo: f64) -> Result<Self> {
        if !(halo >= 0.0 && halo.is_finite()) {
            return Err(Error::Invalid(format!("halo must be finite and non-negative, got {halo}")));
        }
        self.halo = halo;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> [f64; 2] {
        self.lower
    }

    pub fn upper(&self) -> [f64; 2] {
        self.upper
    }

    pub fn halo(&self) -> f64 {
        self.halo
    }

    /// Nodes per axis (the second entry is 1 in one dimension).
    pub fn shape(&self) -> [usize; 2] {
        self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes[0] * self.nodes[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing per axis (0 for the unused axis in one dimension).
    pub fn spacing(&self) -> [f64; 2] {
        let mut h = [0.0; 2];
        for (axis, slot) in h.iter_mut().enumerate().take(self.dim) {
            *slot = (self.upper[axis] - self.lower[axis]) / (self.nodes[axis] - 1) as f64;
        }
        h
    }

    /// Smallest spacing over the active axes.
    pub fn h_min(&self) -> f64 {
        let h = self.spacing();
        if self.dim == 1 {
            h[0]
        } else {
            h[0].min(h[1])
        }
    }

    /// Lebesgue measure |Ω|.
    pub fn measure(&self) -> f64 {
        (0..self.dim).map(|a| self.upper[a] - self.lower[a]).product()
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim).map(|a| (self.upper[a] - self.lower[a]).powi(2)).sum::<f64>().sqrt()
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix * self.nodes[1] + iy
    }

    pub fn multi_index(&self, idx: usize) -> (usize, usize) {
        (idx / self.nodes[1], idx % self.nodes[1])
    }

    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let (ix, iy) = self.multi_index(idx);
        let h = self.spacing();
        let y = if self.dim == 2 { self.lower[1] + iy as f64 * h[1] } else { 0.0 };
        [self.lower[0] + ix as f64 * h[0], y]
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let (ix, iy) = self.multi_index(idx);
        let edge_x = ix == 0 || ix + 1 == self.nodes[0];
        let edge_y = self.dim == 2 && (iy == 0 || iy + 1 == self.nodes[1]);
        edge_x || edge_y
    }

    /// Flat indices of the non-boundary nodes, in index order.
    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.is_boundary(i)).collect()
    }

    /// Quadrature weights of the tensor-product single rule.
    pub fn weights(&self, rule: SingleRule) -> Vec<f64> {
        let h = self.spacing();
        let wx = rule.axis_weights(self.nodes[0], h[0]);
        let wy = if self.dim == 2 { rule.axis_weights(self.nodes[1], h[1]) } else { vec![1.0] };
        wx.iter().flat_map(|a| wy.iter().map(move |b| a * b)).collect()
    }

    /// Halo width rounded up to whole cells on each active axis.
    pub fn halo_cells(&self) -> [usize; 2] {
        let h = self.spacing();
        let mut k = [0; 2];
        for (axis, slot) in k.iter_mut().enumerate().take(self.dim) {
            *slot = (self.halo / h[axis] - 1e-9).ceil().max(0.0) as usize;
        }
        k
    }

    /// The box grown by the halo on every side, with the same spacing.
    pub fn extended(&self) -> Domain {
        let k = self.halo_cells();
        let h = self.spacing();
        let mut ext = *self;
        for axis in 0..self.dim {
            ext.lower[axis] -= k[axis] as f64 * h[axis];
            ext.upper[axis] += k[axis] as f64 * h[axis];
            ext.nodes[axis] += 2 * k[axis];
        }
        ext.halo = 0.0;
        ext
    }

    /// Index in [`Domain::extended`] of node `idx`.
    pub fn to_extended_index(&self, idx: usize) -> usize {
        let k = self.halo_cells();
        let ext = self.extended();
        let (ix, iy) = self.multi_index(idx);
        ext.index(ix + k[0], iy + k[1])
    }

    /// Evaluate `f` at every node.
    pub fn sample(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.coords(i))).collect()
    }

    fn same_grid(&self, other: &Domain) -> bool {
        self.dim == other.dim && self.nodes == other.nodes && self.lower == other.lower && self.upper == other.upper
    }
}

/// Behaviour of a grid function off Ω.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extension {
    /// u = 0 on R^N \ Ω; boundary nodes must vanish.
    ZeroOutside,
    Undefined,
}

/// Samples of a function at the nodes of a [`Domain`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    domain: Domain,
    values: Vec<f64>,
    extension: Extension,
}

impl GridFunction {
    pub fn new(domain: Domain, values: Vec<f64>, extension: Extension) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::Invalid(format!(
                "expected {} values for the grid, got {}",
                domain.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite value at node {i}")));
        }
        if extension == Extension::ZeroOutside {
            if let Some(i) = (0..domain.len()).find(|&i| domain.is_boundary(i) && values[i] != 0.0) {
                return Err(Error::Invalid(format!(
                    "zero-outside function must vanish on the boundary (node {i} = {})",
                    values[i]
                )));
            }
        }
        Ok(GridFunction { domain, values, extension })
    }

    pub fn from_fn(domain: Domain, extension: Extension, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        Self::new(domain, domain.sample(f), extension)
    }

    pub fn zeros(domain: Domain) -> Self {
        GridFunction { domain, values: vec![0.0; domain.len()], extension: Extension::ZeroOutside }
    }

    pub fn constant(domain: Domain, c: f64) -> Self {
        let extension = if c == 0.0 { Extension::ZeroOutside } else { Extension::Undefined };
        GridFunction { domain, values: vec![c; domain.len()], extension }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn is_constant(&self) -> bool {
        let first = self.values[0];
        self.values.iter().all(|&v| v == first)
    }

    /// Apply `f` nodewise; the result keeps zero extension only if it
    /// still vanishes on the boundary.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let mut extension = self.extension;
        if extension == Extension::ZeroOutside
            && (0..self.domain.len()).any(|i| self.domain.is_boundary(i) && values[i] != 0.0)
        {
            extension = Extension::Undefined;
        }
        GridFunction { domain: self.domain, values, extension }
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    fn check_same(&self, other: &GridFunction) -> Result<()> {
        if !self.domain.same_grid(&other.domain) {
            return Err(Error::Invalid("grid functions live on different grids".into()));
        }
        Ok(())
    }

    /// a·self + b·other.
    pub fn combine(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        let extension = if self.extension == Extension::ZeroOutside && other.extension == Extension::ZeroOutside {
            Extension::ZeroOutside
        } else {
            Extension::Undefined
        };
        Ok(GridFunction { domain: self.domain, values, extension })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.combine(1.0, other, -1.0)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.combine(1.0, other, 1.0)
    }

    /// The same function on [`Domain::extended`], zero in the halo.
    pub fn zero_extended(&self) -> Result<GridFunction> {
        if self.extension != Extension::ZeroOutside {
            return Err(Error::Precondition("exterior integrals need a zero-outside function".into()));
        }
        let ext = self.domain.extended();
        let mut values = vec![0.0; ext.len()];
        for (i, &v) in self.values.iter().enumerate() {
            values[self.domain.to_extended_index(i)] = v;
        }
        Ok(GridFunction { domain: ext, values, extension: Extension::ZeroOutside })
    }

    /// Write `x[,y],value` rows with a header.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        if self.domain.dim == 1 {
            w.write_record(["x", "value"])?;
        } else {
            w.write_record(["x", "y", "value"])?;
        }
        for (i, v) in self.values.iter().enumerate() {
            let c = self.domain.coords(i);
            if self.domain.dim == 1 {
                w.write_record([c[0].to_string(), v.to_string()])?;
            } else {
                w.write_record([c[0].to_string(), c[1].to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: GridFunction = serde_json::from_str(text)?;
        Self::new(raw.domain, raw.values, raw.extension)
    }
}

/// ∫_Ω g with the tensor-product single rule.
pub fn integrate(g: &GridFunction, rule: SingleRule) -> f64 {
    let w = g.domain.weights(rule);
    crate::par::pairwise_sum(&g.values.iter().zip(&w).map(|(v, w)| v * w).collect::<Vec<_>>())
}

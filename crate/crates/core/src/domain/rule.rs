use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Composite rule applied along each axis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingleRule {
    #[default]
    Trapezoid,
    /// Composite Simpson; an odd number of intervals ends with a 3/8 panel.
    Simpson,
}

impl SingleRule {
    pub fn axis_weights(self, nodes: usize, h: f64) -> Vec<f64> {
        let mut w = vec![0.0; nodes];
        let intervals = nodes - 1;
        match self {
            SingleRule::Trapezoid => {
                w.iter_mut().for_each(|x| *x = h);
                w[0] = 0.5 * h;
                w[intervals] = 0.5 * h;
            }
            SingleRule::Simpson => {
                let tail = if intervals % 2 == 1 { 3 } else { 0 };
                let even_part = intervals - tail;
                for k in (0..even_part).step_by(2) {
                    w[k] += h / 3.0;
                    w[k + 1] += 4.0 * h / 3.0;
                    w[k + 2] += h / 3.0;
                }
                if tail == 3 {
                    let k = even_part;
                    w[k] += 3.0 * h / 8.0;
                    w[k + 1] += 9.0 * h / 8.0;
                    w[k + 2] += 9.0 * h / 8.0;
                    w[k + 3] += 3.0 * h / 8.0;
                }
            }
        }
        w
    }
}

/// How the diagonal x = y of a double integral is treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DiagonalPolicy {
    /// Drop pairs closer than `width` grid spacings; the ladder doubles
    /// the width at each coarser rung.
    ExcludeBand { width: usize },
    /// Sum each unordered pair {x, y} once as K(x,y) + K(y,x), skipping x = y.
    SymmetricPv,
}

impl Default for DiagonalPolicy {
    fn default() -> Self {
        DiagonalPolicy::ExcludeBand { width: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureRule {
    #[serde(default)]
    pub single: SingleRule,
    #[serde(default)]
    pub diagonal: DiagonalPolicy,
    /// Number of ladder rungs.
    #[serde(default = "default_depth")]
    pub depth: usize,
}

fn default_depth() -> usize {
    3
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule { single: SingleRule::Trapezoid, diagonal: DiagonalPolicy::default(), depth: default_depth() }
    }
}

impl QuadratureRule {
    pub fn validate(&self) -> Result<()> {
        if self.depth < 2 {
            return Err(Error::Invalid(format!("ladder depth must be at least 2, got {}", self.depth)));
        }
        if self.depth > 8 {
            return Err(Error::Invalid(format!("ladder depth above 8 is not supported, got {}", self.depth)));
        }
        if let DiagonalPolicy::ExcludeBand { width } = self.diagonal {
            if width == 0 {
                return Err(Error::Invalid("band width must be at least one grid spacing".into()));
            }
        }
        Ok(())
    }

    /// The rule with one extra ladder rung when s ≥ 0.7.
    pub fn for_order(&self, s: f64) -> QuadratureRule {
        let mut r = *self;
        if s >= 0.7 {
            r.depth += 1;
        }
        r
    }

    /// Band widths in grid spacings, coarsest first.
    pub fn ladder_widths(&self) -> Vec<usize> {
        let base = match self.diagonal {
            DiagonalPolicy::ExcludeBand { width } => width,
            DiagonalPolicy::SymmetricPv => 1,
        };
        (0..self.depth).rev().map(|k| base << k).collect()
    }
}

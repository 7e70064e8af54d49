//! Thermomajorization (Lorenz) curves of block-diagonal states.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::GibbsData;
use crate::states::{QuantumState, BLOCK_DIAGONAL_TOL};

/// Tolerance of the curve comparison at breakpoints.
pub const CURVE_TOL: f64 = 1e-12;

/// Concave piecewise-linear curve through `(Σ q_i, Σ p_i)`, starting at the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LorenzCurve {
    pub points: Vec<(f64, f64)>,
}

impl LorenzCurve {
    /// Builds the curve from populations `p` and reference weights `q`, ordering
    /// elements by `p_i / q_i` (given as `ln p_i - ln q_i`) descending.
    pub fn from_pairs(p: &[f64], logq: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..p.len()).collect();
        let ratio = |i: usize| {
            if p[i] > 0.0 {
                p[i].ln() - logq[i]
            } else {
                f64::NEG_INFINITY
            }
        };
        order.sort_by(|&a, &b| ratio(b).total_cmp(&ratio(a)).then(a.cmp(&b)));
        let mut points = Vec::with_capacity(p.len() + 1);
        let (mut x, mut y) = (0.0, 0.0);
        points.push((x, y));
        for i in order {
            x += logq[i].exp();
            y += p[i].max(0.0);
            points.push((x, y));
        }
        Self { points }
    }

    /// Linear interpolation, constant beyond the last breakpoint.
    pub fn eval(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x <= pts[0].0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x <= x1 {
                if x1 - x0 <= 0.0 {
                    return y1;
                }
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
        }
        pts[pts.len() - 1].1
    }

    /// True when this curve is nowhere below `other` (checked at both sets of breakpoints).
    pub fn dominates(&self, other: &LorenzCurve, tol: f64) -> bool {
        self.points
            .iter()
            .chain(&other.points)
            .all(|&(x, _)| self.eval(x) >= other.eval(x) - tol)
    }

    /// Writes `x,y` rows, one per breakpoint.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y"])?;
        for (x, y) in &self.points {
            w.write_record([x.to_string(), y.to_string()])?;
        }
        w.flush()
    }
}

/// Curve of a block-diagonal state using per-block eigenvalues.
pub fn thermomajorization_curve(rho: &QuantumState, g: &GibbsData) -> Result<LorenzCurve> {
    let blocks = rho.system().blocks()?;
    let off = rho.off_block_weight(blocks);
    if off > BLOCK_DIAGONAL_TOL {
        return Err(Error::NotBlockDiagonal { off_block: off });
    }
    if g.log_weights.len() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: g.log_weights.len(),
        });
    }
    let mut p = Vec::with_capacity(rho.dim());
    let mut logq = Vec::with_capacity(rho.dim());
    for (k, b) in blocks.blocks.iter().enumerate() {
        let sub = rho.matrix().submatrix(&b.members);
        let eig = crate::linalg::eigh(&sub)?;
        p.extend(eig.eigenvalues.iter().map(|l| l.max(0.0)));
        logq.extend(std::iter::repeat(g.log_block_weights[k]).take(b.members.len()));
    }
    Ok(LorenzCurve::from_pairs(&p, &logq))
}

/// Whether `rho` thermomajorizes `sigma`.
pub fn thermomajorizes(rho: &QuantumState, sigma: &QuantumState, g: &GibbsData) -> Result<bool> {
    let a = thermomajorization_curve(rho, g)?;
    let b = thermomajorization_curve(sigma, g)?;
    Ok(a.dominates(&b, CURVE_TOL))
}

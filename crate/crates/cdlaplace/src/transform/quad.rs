//! One-dimensional node sets: composite Gauss-Legendre, tanh-sinh, and the
//! exponential map for semi-infinite axes.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use gauss_quad::GaussLegendre;

/// Nodes and weights on one axis.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AxisNodes {
    pub t: Vec<f64>,
    pub w: Vec<f64>,
}

impl AxisNodes {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn append(&mut self, other: AxisNodes) {
        self.t.extend(other.t);
        self.w.extend(other.w);
    }

    /// Applies `t -> map(x)`, `w -> w jac(x)`.
    pub fn mapped(self, map: impl Fn(f64) -> (f64, f64)) -> AxisNodes {
        let mut out = AxisNodes::default();
        for (x, w) in self.t.into_iter().zip(self.w) {
            let (t, j) = map(x);
            out.t.push(t);
            out.w.push(w * j);
        }
        out
    }
}

/// Gauss-Legendre rule of the given order on `[-1, 1]` (memoized).
pub fn gauss_legendre_unit(order: usize) -> Vec<(f64, f64)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Vec<(f64, f64)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("gauss-legendre cache");
    guard
        .entry(order.max(2))
        .or_insert_with(|| {
            let rule = GaussLegendre::new(order.max(2)).expect("order >= 2");
            let mut v = rule.as_node_weight_pairs().to_vec();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v
        })
        .clone()
}

/// Composite Gauss-Legendre on `[lo, hi]` with equal panels.
pub fn composite_gauss_legendre(lo: f64, hi: f64, panels: usize, order: usize) -> AxisNodes {
    let rule = gauss_legendre_unit(order);
    let panels = panels.max(1);
    let h = (hi - lo) / panels as f64;
    let mut out = AxisNodes::default();
    for k in 0..panels {
        let a = lo + k as f64 * h;
        for &(x, w) in &rule {
            out.t.push(a + 0.5 * h * (x + 1.0));
            out.w.push(0.5 * h * w);
        }
    }
    out
}

/// Tanh-sinh rule on `[lo, hi]` with step `h = 2^-level` on `|u| <= 3.5`.
pub fn tanh_sinh(lo: f64, hi: f64, level: u32) -> AxisNodes {
    use std::f64::consts::FRAC_PI_2;
    let h = 0.5f64.powi(level as i32);
    let kmax = (3.5 / h).ceil() as i64;
    let c = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut out = AxisNodes::default();
    for k in -kmax..=kmax {
        let u = k as f64 * h;
        let s = FRAC_PI_2 * u.sinh();
        let cs = s.cosh();
        let w = h * FRAC_PI_2 * u.cosh() / (cs * cs);
        // distance to the nearer endpoint without cancellation
        let e = (-2.0 * s.abs()).exp();
        let gap = 2.0 * e / (1.0 + e);
        if w < 1e-300 || gap == 0.0 {
            continue;
        }
        let t = if s < 0.0 { lo + c * gap } else if s > 0.0 { hi - c * gap } else { mid };
        out.t.push(t);
        out.w.push(c * w);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_rule_integrates_polynomials() {
        let q = composite_gauss_legendre(-1.0, 3.0, 3, 5);
        let s: f64 = q.t.iter().zip(&q.w).map(|(t, w)| w * t.powi(6)).sum();
        assert!((s - (3f64.powi(7) + 1.0) / 7.0).abs() < 1e-10);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        let q = tanh_sinh(0.0, 1.0, 4);
        let s: f64 = q.t.iter().zip(&q.w).map(|(t, w)| w / t.sqrt()).sum();
        assert!((s - 2.0).abs() < 1e-9, "{s}");
    }
}

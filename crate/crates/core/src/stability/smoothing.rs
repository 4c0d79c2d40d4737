use std::sync::Arc;

use super::StabilityError;
use crate::oscillation::{hermite_basis, hermite_basis_derivative, RadialMap};

/// The weight `K_j`: `1` on `[0, R0/2]`, `(m-j) S_j` beyond `R0`, and a C¹
/// cubic Hermite blend in between kept above a positive floor.
#[derive(Debug, Clone)]
pub struct KjSmoothing {
    pub r0: f64,
    pub scale: f64,
    pub floor: f64,
    pub map: RadialMap,
}

struct Blend {
    sj: RadialMap,
    scale: f64,
    r0: f64,
    end: f64,
    end_slope: f64,
    floor: f64,
}

impl Blend {
    fn value(&self, t: f64) -> (f64, f64) {
        let a = 0.5 * self.r0;
        if t <= a {
            return (1.0, 0.0);
        }
        if t >= self.r0 {
            return (self.scale * self.sj.eval(t), self.scale * self.sj.derivative(t));
        }
        let h = self.r0 - a;
        let s = (t - a) / h;
        // start value 1 with zero slope
        let (h00, _, h01, h11) = hermite_basis(s);
        let (d00, _, d01, d11) = hermite_basis_derivative(s);
        let y = h00 + h01 * self.end + h11 * h * self.end_slope;
        let dy = (d00 + d01 * self.end) / h + d11 * self.end_slope;
        if y < self.floor {
            (self.floor, 0.0)
        } else {
            (y, dy)
        }
    }
}

/// Builds `K_j` from the radial `S_j`, checking `S_j > 0` on
/// `[R0/2, t_max]`.
pub fn smoothing_kj(sj: &RadialMap, m: usize, j: usize, r0: f64, t_max: f64) -> Result<KjSmoothing, StabilityError> {
    if !(r0 > 0.0) || !(t_max > 0.5 * r0) {
        return Err(StabilityError::InvalidData(format!(
            "R0 = {r0} must be positive and below 2 t_max = {}",
            2.0 * t_max
        )));
    }
    if j >= m {
        return Err(StabilityError::InvalidData(format!("tensor index {j} must be below m = {m}")));
    }
    let n = 2000;
    for i in 0..=n {
        let t = 0.5 * r0 + (t_max - 0.5 * r0) * i as f64 / n as f64;
        let value = sj.eval(t);
        if !(value > 0.0) {
            return Err(StabilityError::NonPositiveSj { t, value });
        }
    }
    let scale = (m - j) as f64;
    let end = scale * sj.eval(r0);
    let end_slope = scale * sj.derivative(r0);
    let floor = 0.5 * end.min(1.0);
    let blend = Arc::new(Blend { sj: sj.clone(), scale, r0, end, end_slope, floor });
    let (b1, b2) = (blend.clone(), blend);
    let map =
        RadialMap::from_fn_with_derivative(format!("K_{j}[R0={r0}]"), move |t| b1.value(t).0, move |t| b2.value(t).1);
    Ok(KjSmoothing { r0, scale, floor, map })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_matching_sj_gives_one() {
        let k = smoothing_kj(&RadialMap::constant(0.5), 3, 1, 2.0, 10.0).unwrap();
        for t in [0.0, 0.7, 1.3, 1.9, 5.0] {
            assert!((k.map.eval(t) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn blend_endpoints_and_monotonicity() {
        let k = smoothing_kj(&RadialMap::constant(1.0), 3, 1, 2.0, 10.0).unwrap();
        assert!((k.map.eval(1.0) - 1.0).abs() < 1e-12);
        assert!((k.map.eval(2.0) - 2.0).abs() < 1e-12);
        assert!(k.map.derivative(1.0).abs() < 1e-12);
        assert!(k.map.derivative(2.0 - 1e-14).abs() < 1e-12);
        let mut prev = 1.0;
        for i in 1..=100 {
            let v = k.map.eval(1.0 + i as f64 / 100.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn derivative_matches_outer_branch() {
        let sj = RadialMap::power(1.0, 1.0);
        let k = smoothing_kj(&sj, 4, 1, 2.0, 10.0).unwrap();
        let inside = k.map.derivative(2.0 - 1e-9);
        assert!((inside - 3.0).abs() < 1e-6);
        assert!((k.map.eval(2.0 - 1e-12) - 6.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_nonpositive_sj() {
        let sj = RadialMap::from_fn("3-t", |t| 3.0 - t);
        assert!(matches!(smoothing_kj(&sj, 3, 1, 2.0, 10.0), Err(StabilityError::NonPositiveSj { .. })));
    }
}

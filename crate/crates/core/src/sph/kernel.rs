//! 2D cubic-spline smoothing kernel with compact support radius `h`.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicSpline {
    h: f64,
    inv_l: f64,
    sigma: f64,
}

impl CubicSpline {
    /// `h` is the support radius; the spline's smoothing length is `h / 2`.
    pub fn new(h: f64) -> Self {
        let l = 0.5 * h;
        CubicSpline {
            h,
            inv_l: 1.0 / l,
            sigma: 10.0 / (7.0 * PI * l * l),
        }
    }

    #[inline]
    pub fn support(&self) -> f64 {
        self.h
    }

    /// Smoothing length `h / 2`.
    #[inline]
    pub fn smoothing_length(&self) -> f64 {
        0.5 * self.h
    }

    #[inline]
    pub fn w(&self, r: f64) -> f64 {
        if r >= self.h {
            return 0.0;
        }
        let q = r * self.inv_l;
        if q < 1.0 {
            self.sigma * (1.0 - 1.5 * q * q + 0.75 * q * q * q)
        } else {
            let t = 2.0 - q;
            self.sigma * 0.25 * t * t * t
        }
    }

    /// dW/dr.
    #[inline]
    pub fn dw_dr(&self, r: f64) -> f64 {
        if r >= self.h {
            return 0.0;
        }
        let q = r * self.inv_l;
        let s = self.sigma * self.inv_l;
        if q < 1.0 {
            s * (-3.0 * q + 2.25 * q * q)
        } else {
            let t = 2.0 - q;
            -0.75 * s * t * t
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_over_plane() {
        // Midpoint rule over the support disc.
        let k = CubicSpline::new(0.1);
        let n = 4000;
        let dr = k.support() / n as f64;
        let integral: f64 = (0..n)
            .map(|i| {
                let r = (i as f64 + 0.5) * dr;
                2.0 * PI * r * k.w(r) * dr
            })
            .sum();
        assert!((integral - 1.0).abs() < 1e-6, "{integral}");
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let k = CubicSpline::new(0.2);
        for &r in &[0.01, 0.04, 0.07, 0.11, 0.15, 0.19] {
            let e = 1e-7;
            let fd = (k.w(r + e) - k.w(r - e)) / (2.0 * e);
            assert!((fd - k.dw_dr(r)).abs() < 1e-4 * k.dw_dr(0.05).abs(), "r={r}");
        }
    }

    #[test]
    fn compact_support() {
        let k = CubicSpline::new(0.3);
        assert_eq!(k.w(0.3), 0.0);
        assert_eq!(k.dw_dr(0.3), 0.0);
        assert!(k.w(0.2999) > 0.0);
    }
}

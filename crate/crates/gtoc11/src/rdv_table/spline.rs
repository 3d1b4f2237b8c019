//! Natural cubic spline interpolation with exact per-segment root finding,
//! used to turn the sampled phase table into continuous curves whose level
//! crossings are the rendezvous opportunities.

use crate::{Error, Result};

/// Natural cubic spline through `(xs[i], ys[i])`: C² piecewise cubic with
/// zero second derivative at both ends. Two points degenerate to a line.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n != ys.len() || n < 2 {
            return Err(Error::InvalidArgument(
                "spline needs at least two knots with one value each".into(),
            ));
        }
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidArgument(format!(
                    "spline knots must increase strictly: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("spline data must be finite".into()));
        }

        // Tridiagonal system for the interior second derivatives (Thomas
        // algorithm); natural boundary: m[0] = m[n-1] = 0.
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                let h0 = xs[i + 1] - xs[i];
                let h1 = xs[i + 2] - xs[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h1 - (ys[i + 1] - ys[i]) / h0);
            }
            for i in 1..k {
                let lower = xs[i + 1] - xs[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (1..k).rev() {
                m[i] = (rhs[i - 1] - upper[i - 1] * m[i + 1]) / diag[i - 1];
            }
        }
        Ok(CubicSpline { xs, ys, m })
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().expect("non-empty knots")
    }

    /// Segment index whose closed interval contains `x` (clamped to the ends).
    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|k| k.total_cmp(&x)) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.xs.len() - 2),
        }
    }

    /// Cubic coefficients of segment `i` in the local variable t = x − xs[i]:
    /// S(t) = a + b·t + c·t² + d·t³.
    fn coeffs(&self, i: usize) -> (f64, f64, f64, f64) {
        let h = self.xs[i + 1] - self.xs[i];
        let a = self.ys[i];
        let b = (self.ys[i + 1] - self.ys[i]) / h - h * (2.0 * self.m[i] + self.m[i + 1]) / 6.0;
        let c = self.m[i] / 2.0;
        let d = (self.m[i + 1] - self.m[i]) / (6.0 * h);
        (a, b, c, d)
    }

    /// Evaluate the spline; outside the data the end segments extend.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (a, b, c, d) = self.coeffs(i);
        let t = x - self.xs[i];
        ((d * t + c) * t + b) * t + a
    }

    /// All isolated solutions of `S(x) = level` inside the data span,
    /// ascending, bisection-polished to `tol` in x. Segments identically
    /// equal to the level yield no isolated roots and are skipped.
    pub fn roots(&self, level: f64, tol: f64) -> Vec<f64> {
        let span = self.x_max() - self.x_min();
        let mut out: Vec<f64> = Vec::new();
        for i in 0..self.xs.len() - 1 {
            let (a, b, c, d) = self.coeffs(i);
            let h = self.xs[i + 1] - self.xs[i];
            for t in cubic_roots_in(a - level, b, c, d, h) {
                out.push(self.polish(i, level, t, tol));
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|x, y| (*x - *y).abs() <= tol.max(1e-12 * span));
        out
    }

    /// Bisection polish of an analytic in-segment root; falls back to the
    /// analytic value when no sign change brackets it (tangency).
    fn polish(&self, i: usize, level: f64, t: f64, tol: f64) -> f64 {
        let x0 = self.xs[i] + t;
        let h = self.xs[i + 1] - self.xs[i];
        let f = |x: f64| self.eval(x) - level;
        let mut step = (h / 64.0).max(tol);
        let (mut lo, mut hi) = (x0, x0);
        for _ in 0..8 {
            lo = (x0 - step).max(self.xs[i]);
            hi = (x0 + step).min(self.xs[i + 1]);
            if f(lo) * f(hi) <= 0.0 {
                break;
            }
            step *= 2.0;
        }
        if f(lo) * f(hi) > 0.0 {
            return x0;
        }
        let (mut lo, mut hi) = (lo, hi);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Real roots of a + b·t + c·t² + d·t³ = 0 with t in [0, h], ascending.
fn cubic_roots_in(a: f64, b: f64, c: f64, d: f64, h: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs() * h).max(c.abs() * h * h);
    let mut ts = if d.abs() * h * h * h <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
        quadratic_roots(a, b, c)
    } else {
        // Monic form t³ + p t² + q t + r.
        let (p, q, r) = (c / d, b / d, a / d);
        // Depressed: u³ + su + w with t = u − p/3.
        let s = q - p * p / 3.0;
        let w = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
        let shift = -p / 3.0;
        let disc = (w / 2.0) * (w / 2.0) + (s / 3.0) * (s / 3.0) * (s / 3.0);
        if disc > 0.0 {
            // One real root.
            let sq = disc.sqrt();
            let u = (-w / 2.0 + sq).cbrt() + (-w / 2.0 - sq).cbrt();
            vec![u + shift]
        } else if s.abs() < 1e-300 {
            vec![shift]
        } else {
            // Three real roots (trigonometric form).
            let rho = 2.0 * (-s / 3.0).sqrt();
            let arg = (3.0 * w / (s * rho)).clamp(-1.0, 1.0);
            let theta = arg.acos() / 3.0;
            (0..3)
                .map(|k| rho * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift)
                .collect()
        }
    };
    let eps = 1e-9 * h;
    ts.retain(|t| (-eps..=h + eps).contains(t));
    for t in ts.iter_mut() {
        *t = t.clamp(0.0, h);
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|x, y| (*x - *y).abs() <= eps);
    ts
}

/// Real roots of a + b·t + c·t² = 0 (degenerating gracefully to linear).
fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if c.abs() <= 1e-300 {
        if b.abs() <= 1e-300 {
            return Vec::new(); // constant segment: no isolated roots
        }
        return vec![-a / b];
    }
    let disc = b * b - 4.0 * c * a;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // Citardauq form on one branch avoids cancellation.
    let q = -0.5 * (b + b.signum() * sq);
    if q.abs() <= 1e-300 {
        return vec![0.0];
    }
    let mut r = vec![q / c, a / q];
    r.sort_by(f64::total_cmp);
    r
}

//! Derivative-free local minimizers for the refinement stages: golden-section
//! on a bracket, Nelder-Mead simplex descent, and a compass pattern polish.
//! All three are deterministic.

/// Golden-section search on `[a, b]` for a unimodal objective. Returns the
/// bracket midpoint and its value once the bracket is narrower than `tol`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iters: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    if b < a {
        std::mem::swap(&mut a, &mut b);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iters {
        if (b - a) <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    if fc < fd && fc < fx {
        (c, fc)
    } else if fd <= fc && fd < fx {
        (d, fd)
    } else {
        (x, fx)
    }
}

/// Nelder-Mead stopping/behavior knobs.
#[derive(Debug, Clone)]
pub struct NmOptions {
    /// Stop when the simplex diameter falls below this.
    pub xtol: f64,
    /// Stop when the value spread across the simplex falls below this.
    pub ftol: f64,
    pub max_iters: usize,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions {
            xtol: 1e-10,
            ftol: 1e-12,
            max_iters: 2000,
        }
    }
}

/// Nelder-Mead simplex minimization from `x0`, with the initial simplex edge
/// along dimension `k` sized by `scale[k]`. Returns the best vertex found.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    scale: &[f64],
    opts: &NmOptions,
) -> (Vec<f64>, f64) {
    assert_eq!(x0.len(), scale.len(), "one simplex scale per dimension");
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for k in 0..n {
        let mut v = x0.to_vec();
        v[k] += if scale[k] != 0.0 { scale[k] } else { 1e-3 };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    // Standard reflection/expansion/contraction/shrink coefficients.
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    for _ in 0..opts.max_iters {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let diameter = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let spread = values[worst] - values[best];
        if diameter < opts.xtol && spread.abs() < opts.ftol {
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for (i, v) in simplex.iter().enumerate() {
            if i == worst {
                continue;
            }
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }

        let lerp = |from: &[f64], coeff: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, x)| c + coeff * (c - x))
                .collect()
        };

        let reflected = lerp(&simplex[worst], alpha);
        let fr = f(&reflected);
        if fr < values[best] {
            let expanded = lerp(&simplex[worst], gamma);
            let fe = f(&expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let contracted = if fr < values[worst] {
                lerp(&simplex[worst], rho) // outside
            } else {
                lerp(&simplex[worst], -rho) // inside
            };
            let fc = f(&contracted);
            if fc < values[worst].min(fr) {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                // Shrink toward the best vertex.
                let anchor = simplex[best].clone();
                for (i, v) in simplex.iter_mut().enumerate() {
                    if i == best {
                        continue;
                    }
                    for (x, a) in v.iter_mut().zip(&anchor) {
                        *x = a + sigma * (*x - a);
                    }
                    values[i] = f(v);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    (simplex.swap_remove(best), values[best])
}

/// Compass pattern search: sweep coordinate steps, halving the step pattern
/// whenever no move improves, until the steps fall below `tol`. A robust
/// polisher for nonsmooth objectives.
pub fn pattern_search<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step0: &[f64],
    tol: f64,
    max_iters: usize,
) -> (Vec<f64>, f64) {
    assert_eq!(x0.len(), step0.len(), "one step per dimension");
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut steps: Vec<f64> = step0.iter().map(|s| s.abs().max(1e-300)).collect();
    for _ in 0..max_iters {
        if steps.iter().all(|s| *s < tol) {
            break;
        }
        let mut improved = false;
        for k in 0..x.len() {
            for dir in [1.0, -1.0] {
                let old = x[k];
                x[k] = old + dir * steps[k];
                let ft = f(&x);
                if ft < fx {
                    fx = ft;
                    improved = true;
                    break;
                }
                x[k] = old;
            }
        }
        if !improved {
            for s in &mut steps {
                *s *= 0.5;
            }
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn golden_section_finds_a_smooth_minimum() {
        let (x, fx) = golden_section_min(|x| (x - 2.3) * (x - 2.3) + 0.7, 0.0, 10.0, 1e-10, 200);
        assert_relative_eq!(x, 2.3, epsilon = 1e-8);
        assert_relative_eq!(fx, 0.7, epsilon = 1e-12);
    }

    #[test]
    fn golden_section_handles_a_kink_and_a_reversed_bracket() {
        let (x, _) = golden_section_min(|x| (x - 1.0).abs(), 4.0, -2.0, 1e-12, 300);
        assert_relative_eq!(x, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn nelder_mead_solves_rosenbrock() {
        let rosen = |x: &[f64]| {
            100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
        };
        let (x, fx) = nelder_mead(rosen, &[-1.2, 1.0], &[0.5, 0.5], &NmOptions::default());
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-5);
        assert_relative_eq!(x[1], 1.0, epsilon = 1e-5);
        assert!(fx < 1e-10);
    }

    #[test]
    fn nelder_mead_handles_anisotropic_quadratics() {
        let f = |x: &[f64]| {
            let d = [x[0] - 3.0, 1e3 * (x[1] + 2.0), x[2] - 0.5, x[3]];
            d.iter().map(|v| v * v).sum::<f64>()
        };
        let opts = NmOptions {
            max_iters: 6000,
            ..Default::default()
        };
        let (x, fx) = nelder_mead(f, &[0.0; 4], &[1.0, 1e-3, 1.0, 1.0], &opts);
        assert!(fx < 1e-12, "fx = {fx}");
        assert_relative_eq!(x[0], 3.0, epsilon = 1e-5);
        assert_relative_eq!(x[1], -2.0, epsilon = 1e-5);
    }

    #[test]
    fn pattern_search_polishes_a_nonsmooth_objective() {
        let f = |x: &[f64]| (x[0] - 0.25).abs() + 2.0 * (x[1] + 1.5).abs();
        let (x, fx) = pattern_search(f, &[3.0, 3.0], &[1.0, 1.0], 1e-10, 10_000);
        assert!(fx < 1e-8, "fx = {fx}");
        assert_relative_eq!(x[0], 0.25, epsilon = 1e-8);
        assert_relative_eq!(x[1], -1.5, epsilon = 1e-8);
    }

    #[test]
    fn pattern_search_leaves_a_minimum_untouched() {
        let f = |x: &[f64]| x[0] * x[0];
        let (x, fx) = pattern_search(f, &[0.0], &[0.5], 1e-12, 1000);
        assert_eq!(x[0], 0.0);
        assert_eq!(fx, 0.0);
    }
}

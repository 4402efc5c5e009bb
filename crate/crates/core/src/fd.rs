//! Richardson-extrapolated central differences for complex-valued functions
//! of one real variable.

use num_complex::Complex64;

/// Step ladder `h, h/2, h/4, ...` with `levels` extrapolation levels.
#[derive(Debug, Clone, Copy)]
pub struct Richardson {
    pub h0: f64,
    pub levels: usize,
}

impl Default for Richardson {
    fn default() -> Self {
        Self { h0: 0.05, levels: 5 }
    }
}

impl Richardson {
    pub fn new(h0: f64, levels: usize) -> Self {
        Self { h0, levels: levels.max(1) }
    }

    fn extrapolate(&self, mut estimate: impl FnMut(f64) -> Complex64) -> Complex64 {
        // Central stencils have an even error expansion, so column j removes h^{2j}.
        let mut prev: Vec<Complex64> = Vec::with_capacity(self.levels);
        let mut h = self.h0;
        for k in 0..self.levels {
            let mut row = Vec::with_capacity(k + 1);
            row.push(estimate(h));
            for j in 1..=k {
                let factor = 4f64.powi(j as i32);
                let val = row[j - 1] + (row[j - 1] - prev[j - 1]) / (factor - 1.0);
                row.push(val);
            }
            prev = row;
            h *= 0.5;
        }
        *prev.last().expect("at least one level")
    }

    pub fn first(&self, f: impl Fn(f64) -> Complex64, x: f64) -> Complex64 {
        self.extrapolate(|h| (f(x + h) - f(x - h)) / (2.0 * h))
    }

    pub fn second(&self, f: impl Fn(f64) -> Complex64, x: f64) -> Complex64 {
        let f0 = f(x);
        self.extrapolate(|h| (f(x + h) - 2.0 * f0 + f(x - h)) / (h * h))
    }
}

/// Weights `w[d][j]` such that `f^{(d)}(0) ~ sum_j w[d][j] f(x_j)` for
/// `d <= max_deriv`, on arbitrary distinct nodes (Fornberg's recursion).
pub fn stencil_weights(nodes: &[f64], max_deriv: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_deriv + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0];
    for i in 1..n {
        let mn = max_deriv.min(i);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i];
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_sine() {
        let r = Richardson::default();
        let f = |x: f64| Complex64::new(x.sin(), (2.0 * x).cos());
        let x = 0.3;
        let d1 = r.first(f, x);
        let d2 = r.second(f, x);
        assert!((d1 - Complex64::new(x.cos(), -2.0 * (2.0 * x).sin())).norm() < 1e-12);
        assert!((d2 - Complex64::new(-x.sin(), -4.0 * (2.0 * x).cos())).norm() < 1e-10);
    }

    #[test]
    fn five_point_stencil() {
        let w = stencil_weights(&[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let d1 = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for j in 0..5 {
            assert!((w[1][j] - d1[j]).abs() < 1e-14);
            assert!((w[2][j] - d2[j]).abs() < 1e-14);
        }
        // one-sided stencils are exact on polynomials of degree < n
        let nodes = [-5.0, -4.0, -3.0, -2.0, -1.0, 0.0];
        let w = stencil_weights(&nodes, 2);
        let d2: f64 = nodes.iter().zip(&w[2]).map(|(x, c)| c * (x * x * x * x + 3.0 * x * x)).sum();
        assert!((d2 - 6.0).abs() < 1e-11);
    }
}

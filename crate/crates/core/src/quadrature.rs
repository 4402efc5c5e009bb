//! Gauss-Hermite and Gauss-Legendre rules.

use crate::special::hermite_pair_scaled;

/// Nodes `x_i` and weights `W_i` with `int g(x) dx ~ sum W_i g(x_i)`,
/// exact when `g` is a polynomial of degree `< 2n` times `e^{-x^2}`.
///
/// The weights absorb the Gaussian: `W_i = w_i e^{x_i^2} = 1 / (n phi_{n-1}(x_i)^2)`,
/// which stays representable for every node up to large `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite needs at least one node");
        // Positive roots, bracketed by a sign scan finer than the smallest
        // root spacing pi / sqrt(2n + 1), then polished by safeguarded Newton.
        let edge = (2.0 * n as f64 + 1.0).sqrt();
        let h = std::f64::consts::PI / edge / 4.0;
        let sign = |x: f64| hermite_pair_scaled(n, x).0;
        let mut pos: Vec<f64> = Vec::with_capacity(n / 2 + 1);
        let mut x0 = 0.5 * h;
        let mut s0 = sign(x0);
        while pos.len() < n / 2 {
            let x1 = x0 + h;
            let s1 = sign(x1);
            if s0 == 0.0 {
                pos.push(x0);
            } else if s0 * s1 < 0.0 {
                pos.push(polish(n, x0, x1));
            }
            assert!(x1 < edge + 2.0, "Gauss-Hermite root scan overran for n = {n}");
            x0 = x1;
            s0 = s1;
        }
        if n % 2 == 1 {
            pos.insert(0, 0.0);
        }
        pos.reverse();
        let pos_w: Vec<f64> = pos.iter().map(|&x| weight(n, x)).collect();
        // pos is descending, so the negated roots come out ascending.
        let mut nodes: Vec<f64> = pos.iter().map(|x| -x).collect();
        let mut weights = pos_w.clone();
        let skip = n % 2;
        nodes.extend(pos.iter().rev().skip(skip));
        weights.extend(pos_w.iter().rev().skip(skip));
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Newton on `phi_n` kept inside the bracket `[a, b]` by bisection.
fn polish(n: usize, mut a: f64, mut b: f64) -> f64 {
    let fa = hermite_pair_scaled(n, a).0;
    let mut z = 0.5 * (a + b);
    for _ in 0..200 {
        let (pn, pm, _) = hermite_pair_scaled(n, z);
        if pn == 0.0 {
            return z;
        }
        if (pn < 0.0) == (fa < 0.0) {
            a = z;
        } else {
            b = z;
        }
        let dp = (2.0 * n as f64).sqrt() * pm - z * pn;
        let mut next = z - pn / dp;
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        let step = (next - z).abs();
        z = next;
        if step <= 2e-16 * z.abs().max(1.0) {
            break;
        }
    }
    z
}

fn weight(n: usize, x: f64) -> f64 {
    let (_, pm, log_scale) = hermite_pair_scaled(n, x);
    let phi = pm * log_scale.exp();
    1.0 / (n as f64 * phi * phi)
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { z } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = nf * (z * pn - pm) / (z * z - 1.0);
                let step = pn / dp;
                z -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// `int_a^b f` split into `panels` equal pieces.
    pub fn integrate<T>(&self, a: f64, b: f64, panels: usize, f: impl Fn(f64) -> T) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    {
        let h = (b - a) / panels as f64;
        let mut acc = T::default();
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc = acc + f(mid + 0.5 * h * x) * (0.5 * h * w);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::hermite_functions;

    #[test]
    fn five_point_rule() {
        let gh = GaussHermite::new(5);
        let expected = [-2.020_182_870_456_085_6, -0.958_572_464_613_818_5, 0.0, 0.958_572_464_613_818_5, 2.020_182_870_456_085_6];
        for (x, e) in gh.nodes.iter().zip(expected) {
            assert!((x - e).abs() < 1e-14, "{:?}", gh.nodes);
        }
        // standard weights times e^{x^2}
        let std_w = [0.019_953_242_059_045_91, 0.393_619_323_152_241_2, 0.945_308_720_482_941_9];
        for (k, w) in std_w.iter().enumerate() {
            let x = gh.nodes[k];
            assert!((gh.weights[k] * (-x * x).exp() - w).abs() < 1e-15);
        }
    }

    #[test]
    fn nodes_sorted_and_integrate_gaussian() {
        for n in [1, 2, 7, 64, 301, 2048] {
            let gh = GaussHermite::new(n);
            assert_eq!(gh.len(), n);
            assert!(gh.nodes.windows(2).all(|w| w[0] < w[1]), "n = {n}");
            // int phi_0^2 = 1
            let s: f64 = gh.nodes.iter().zip(&gh.weights).map(|(x, w)| w * hermite_functions(0, *x)[0].powi(2)).sum();
            assert!((s - 1.0).abs() < 1e-12, "n = {n}: {s}");
        }
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let gl = GaussLegendre::new(8);
        let v: f64 = gl.integrate(0.0, 2.0, 1, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-10);
        let v: f64 = gl.integrate(-1.0, 3.0, 4, |x| x.exp());
        assert!((v - (3f64.exp() - (-1f64).exp())).abs() < 1e-13);
        assert_eq!(GaussLegendre::new(1).nodes, vec![0.0]);
    }
}

//! Hermitian bases of su(N) and the Z2-graded split into isotropy and coset
//! generators relative to a chart.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, I, ONE, ZERO};

/// Entries below this modulus count as zero when classifying generators.
const BLOCK_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraBasis {
    pub generators: Vec<CMatrix>,
    pub labels: Vec<String>,
}

impl AlgebraBasis {
    /// Spin-1/2 operators `s = sigma / 2`.
    pub fn pauli() -> Self {
        let h = Complex64::from(0.5);
        let sx = CMatrix::from_row_slice(2, 2, &[ZERO, h, h, ZERO]);
        let sy = CMatrix::from_row_slice(2, 2, &[ZERO, -I * h, I * h, ZERO]);
        let sz = CMatrix::from_row_slice(2, 2, &[h, ZERO, ZERO, -h]);
        Self {
            generators: vec![sx, sy, sz],
            labels: vec!["s_x".into(), "s_y".into(), "s_z".into()],
        }
    }

    /// The eight Gell-Mann matrices `lambda_1 .. lambda_8`, unscaled.
    pub fn gell_mann() -> Self {
        let o = ZERO;
        let l = ONE;
        let s8 = Complex64::from(1.0 / 3f64.sqrt());
        let gens = [
            [o, l, o, l, o, o, o, o, o],
            [o, -I, o, I, o, o, o, o, o],
            [l, o, o, o, -l, o, o, o, o],
            [o, o, l, o, o, o, l, o, o],
            [o, o, -I, o, o, o, I, o, o],
            [o, o, o, o, o, l, o, l, o],
            [o, o, o, o, o, -I, o, I, o],
            [s8, o, o, o, s8, o, o, o, s8 * -2.0],
        ];
        Self {
            generators: gens.iter().map(|g| CMatrix::from_row_slice(3, 3, g)).collect(),
            labels: (1..=8).map(|k| format!("lambda_{k}")).collect(),
        }
    }

    /// Generalized Gell-Mann basis of su(n): symmetric and antisymmetric
    /// off-diagonal pairs followed by `n - 1` diagonal matrices, all with
    /// `tr(T_a T_b) = 2 delta_ab`.
    pub fn generalized(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("su({n}) needs n >= 2")));
        }
        let mut generators = Vec::new();
        let mut labels = Vec::new();
        for j in 0..n {
            for k in j + 1..n {
                let mut s = CMatrix::zeros(n, n);
                s[(j, k)] = ONE;
                s[(k, j)] = ONE;
                generators.push(s);
                labels.push(format!("S_{j}{k}"));
                let mut a = CMatrix::zeros(n, n);
                a[(j, k)] = -I;
                a[(k, j)] = I;
                generators.push(a);
                labels.push(format!("A_{j}{k}"));
            }
        }
        for l in 1..n {
            let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
            let mut d = CMatrix::zeros(n, n);
            for j in 0..l {
                d[(j, j)] = Complex64::from(scale);
            }
            d[(l, l)] = Complex64::from(-(l as f64) * scale);
            generators.push(d);
            labels.push(format!("D_{l}"));
        }
        Ok(Self { generators, labels })
    }

    pub fn dim(&self) -> usize {
        self.generators.first().map_or(0, |g| g.nrows())
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Structure constants `[T_a, T_b] = i sum_c f_abc T_c`, indexed `[a][b][c]`.
    ///
    /// Solved against the Gram matrix so the basis need not be orthonormal.
    pub fn structure_constants(&self) -> Vec<Vec<Vec<Complex64>>> {
        let n = self.len();
        let gram = CMatrix::from_fn(n, n, |a, b| linalg::trace_inner(&self.generators[a], &self.generators[b]));
        let lu = gram.lu();
        let mut f = vec![vec![vec![ZERO; n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                let comm = linalg::commutator(&self.generators[a], &self.generators[b]);
                let rhs = nalgebra::DVector::from_fn(n, |c, _| linalg::trace_inner(&self.generators[c], &comm));
                let sol = lu.solve(&rhs).expect("basis generators are linearly independent");
                for c in 0..n {
                    f[a][b][c] = sol[c] / I;
                }
            }
        }
        f
    }
}

/// Generators split into the isotropy part `H` (no entries coupling the
/// chart index to the others) and the coset part `B`, with the largest
/// violation of each graded inclusion.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedSplit {
    pub chart: usize,
    pub higgs: Vec<CMatrix>,
    pub higgs_labels: Vec<String>,
    pub goldstone: Vec<CMatrix>,
    pub goldstone_labels: Vec<String>,
    /// Residuals of `[H,H] in H`, `[H,B] in B`, `[B,B] in H`.
    pub residuals: [f64; 3],
}

/// `(H part, B part)` of a matrix relative to `chart`.
pub fn block_parts(m: &CMatrix, chart: usize) -> (CMatrix, CMatrix) {
    let mut h = m.clone();
    let mut b = CMatrix::zeros(m.nrows(), m.ncols());
    for k in 0..m.nrows() {
        if k != chart {
            b[(chart, k)] = m[(chart, k)];
            b[(k, chart)] = m[(k, chart)];
            h[(chart, k)] = ZERO;
            h[(k, chart)] = ZERO;
        }
    }
    (h, b)
}

pub fn graded_split(basis: &AlgebraBasis, chart: usize) -> Result<GradedSplit> {
    let n = basis.dim();
    if chart >= n {
        return Err(Error::InvalidInput(format!("chart {chart} out of range for N = {n}")));
    }
    let mut split = GradedSplit {
        chart,
        higgs: Vec::new(),
        higgs_labels: Vec::new(),
        goldstone: Vec::new(),
        goldstone_labels: Vec::new(),
        residuals: [0.0; 3],
    };
    for (g, label) in basis.generators.iter().zip(&basis.labels) {
        let (h, b) = block_parts(g, chart);
        let (h_zero, b_zero) = (linalg::max_abs(&h) < BLOCK_TOL, linalg::max_abs(&b) < BLOCK_TOL);
        if !h_zero {
            split.higgs_labels.push(if b_zero { label.clone() } else { format!("{label}|H") });
            split.higgs.push(h);
        }
        if !b_zero {
            split.goldstone_labels.push(if h_zero { label.clone() } else { format!("{label}|B") });
            split.goldstone.push(b);
        }
    }

    let outside_h = |m: &CMatrix| linalg::max_abs(&block_parts(m, chart).1);
    let outside_b = |m: &CMatrix| linalg::max_abs(&block_parts(m, chart).0);
    for x in &split.higgs {
        for y in &split.higgs {
            split.residuals[0] = split.residuals[0].max(outside_h(&linalg::commutator(x, y)));
        }
        for y in &split.goldstone {
            split.residuals[1] = split.residuals[1].max(outside_b(&linalg::commutator(x, y)));
        }
    }
    for x in &split.goldstone {
        for y in &split.goldstone {
            split.residuals[2] = split.residuals[2].max(outside_h(&linalg::commutator(x, y)));
        }
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_hermitian_traceless(b: &AlgebraBasis) {
        for g in &b.generators {
            assert!(linalg::hermiticity_defect(g) == 0.0);
            assert!(g.trace().norm() < 1e-15);
        }
    }

    #[test]
    fn bases_are_hermitian_and_traceless() {
        check_hermitian_traceless(&AlgebraBasis::pauli());
        check_hermitian_traceless(&AlgebraBasis::gell_mann());
        for n in 2..7 {
            let b = AlgebraBasis::generalized(n).unwrap();
            assert_eq!(b.len(), n * n - 1);
            check_hermitian_traceless(&b);
        }
    }

    #[test]
    fn pauli_structure_constants_are_levi_civita() {
        let f = AlgebraBasis::pauli().structure_constants();
        assert!((f[0][1][2] - ONE).norm() < 1e-15);
        assert!((f[1][0][2] + ONE).norm() < 1e-15);
        assert!((f[2][0][1] - ONE).norm() < 1e-15);
        assert!(f[0][1][0].norm() < 1e-15);
    }

    #[test]
    fn gell_mann_structure_constants() {
        // [lambda_a, lambda_b] = 2 i f_abc lambda_c with f_123 = 1, f_458 = sqrt(3)/2.
        let f = AlgebraBasis::gell_mann().structure_constants();
        assert!((f[0][1][2] - Complex64::from(2.0)).norm() < 1e-14);
        assert!((f[3][4][7] - Complex64::from(3f64.sqrt())).norm() < 1e-14);
        assert!((f[0][3][6] - Complex64::from(1.0)).norm() < 1e-14);
    }

    #[test]
    fn pauli_split() {
        let s = graded_split(&AlgebraBasis::pauli(), 0).unwrap();
        assert_eq!(s.higgs_labels, vec!["s_z"]);
        assert_eq!(s.goldstone_labels, vec!["s_x", "s_y"]);
        assert!(s.residuals.iter().all(|&r| r < 1e-12));
    }

    #[test]
    fn gell_mann_split() {
        let s = graded_split(&AlgebraBasis::gell_mann(), 0).unwrap();
        assert_eq!(s.higgs_labels, vec!["lambda_3", "lambda_6", "lambda_7", "lambda_8"]);
        assert_eq!(s.goldstone_labels, vec!["lambda_1", "lambda_2", "lambda_4", "lambda_5"]);
        assert!(s.residuals.iter().all(|&r| r < 1e-12));

        let s2 = graded_split(&AlgebraBasis::gell_mann(), 2).unwrap();
        assert_eq!(s2.goldstone.len(), 4);
        assert!(s2.residuals.iter().all(|&r| r < 1e-12));
    }

    #[test]
    fn mixed_generator_is_split_in_two() {
        let mut b = AlgebraBasis::pauli();
        b.generators[0] = &b.generators[0] + &b.generators[2];
        let s = graded_split(&b, 0).unwrap();
        assert!(s.higgs_labels.contains(&"s_x|H".to_string()));
        assert!(s.goldstone_labels.contains(&"s_x|B".to_string()));
    }
}

//! State-dependent ("local") dynamical variables on CP(N-1).
//!
//! A Hermitian generator `P` moves a state by `d psi / d tau = -(i/hbar) P psi`.
//! Its image on the chart `b` is the tangent field
//!
//! ```text
//! xi^i = -(i/hbar) [P^i_b - P^b_b pi^i + sum_k (P^i_k - P^b_k pi^i) pi^k]
//! ```
//!
//! which is quadratic in `pi`, so the generator fields close under the exact
//! polynomial bracket: `[X_P, X_Q] = X_{i[P,Q]/hbar}`.

pub mod basis;
pub mod field;
pub mod poly;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use basis::{graded_split, AlgebraBasis, GradedSplit};
pub use field::{lie_bracket, TangentField};
pub use poly::Poly;

use crate::error::{Error, Result};
use crate::geometry::{self, ConnectionVariant, GeometryConfig, LocalPoint, StateVector, TangentVector};
use crate::linalg::{self, CMatrix, I, ZERO};

/// Step ladder for the finite-difference generator components.
pub const FD_LADDER: [f64; 3] = [1e-3, 1e-4, 1e-5];

/// Hilbert index of local coordinate `i` in chart `chart`.
pub(crate) fn hilbert_index(chart: usize, i: usize) -> usize {
    if i < chart {
        i
    } else {
        i + 1
    }
}

fn check_generator(p: &LocalPoint, gen: &CMatrix) -> Result<()> {
    let n = p.dim();
    if gen.nrows() != n || gen.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: gen.nrows(),
        });
    }
    Ok(())
}

/// Tangent vector of the flow `exp(-i tau P / hbar)` at `p`, from the closed
/// quadratic formula.
pub fn local_components_closed(p: &LocalPoint, gen: &CMatrix, cfg: &GeometryConfig) -> Result<TangentVector> {
    check_generator(p, gen)?;
    let b = p.chart();
    let pi = p.coords();
    let n = pi.len();
    let pref = -I / cfg.hbar;
    let row_b: Complex64 = (0..n).map(|k| gen[(b, hilbert_index(b, k))] * pi[k]).sum();
    let xi = (0..n)
        .map(|i| {
            let a = hilbert_index(b, i);
            let row_a: Complex64 = (0..n).map(|k| gen[(a, hilbert_index(b, k))] * pi[k]).sum();
            pref * (gen[(a, b)] - gen[(b, b)] * pi[i] + row_a - row_b * pi[i])
        })
        .collect();
    TangentVector::new(p.clone(), xi)
}

/// Orientation of the one-parameter group used by the difference quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowSign {
    /// `exp(-i eps P / hbar)`
    Minus,
    /// `exp(+i eps P / hbar)`
    Plus,
}

impl FlowSign {
    fn factor(self) -> Complex64 {
        match self {
            FlowSign::Minus => -I,
            FlowSign::Plus => I,
        }
    }
}

/// `(pi(eps P) - pi) / eps` with `pi(eps P)` the chart coordinates of
/// `exp(+-i eps P / hbar) psi`.
pub fn local_components_fd(
    p: &LocalPoint,
    gen: &CMatrix,
    eps: f64,
    cfg: &GeometryConfig,
    sign: FlowSign,
) -> Result<Vec<Complex64>> {
    check_generator(p, gen)?;
    let psi = geometry::from_local(p, 1.0, 0.0);
    let u = linalg::expm(&(gen * (sign.factor() * eps / cfg.hbar)));
    let moved = StateVector::new(linalg::mat_vec(&u, psi.amplitudes()))?;
    let q = geometry::to_local(&moved, p.chart())?;
    Ok(q.coords().iter().zip(p.coords()).map(|(a, b)| (a - b) / eps).collect())
}

/// Two-level Richardson extrapolation of [`local_components_fd`] over
/// [`FD_LADDER`]; each level removes one power of `eps`.
pub fn local_components_richardson(
    p: &LocalPoint,
    gen: &CMatrix,
    cfg: &GeometryConfig,
    sign: FlowSign,
) -> Result<Vec<Complex64>> {
    let d: Vec<Vec<Complex64>> = FD_LADDER
        .iter()
        .map(|&e| local_components_fd(p, gen, e, cfg, sign))
        .collect::<Result<_>>()?;
    let ratio = FD_LADDER[0] / FD_LADDER[1];
    let r2 = ratio * ratio;
    Ok((0..d[0].len())
        .map(|i| {
            let first = (ratio * d[1][i] - d[0][i]) / (ratio - 1.0);
            let second = (ratio * d[2][i] - d[1][i]) / (ratio - 1.0);
            (r2 * second - first) / (r2 - 1.0)
        })
        .collect())
}

/// Distance of each orientation's extrapolated difference quotient from the
/// closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignReport {
    pub minus_error: f64,
    pub plus_error: f64,
    pub matched: FlowSign,
}

pub fn fd_sign_report(p: &LocalPoint, gen: &CMatrix, cfg: &GeometryConfig) -> Result<SignReport> {
    let closed = local_components_closed(p, gen, cfg)?.xi;
    let minus = local_components_richardson(p, gen, cfg, FlowSign::Minus)?;
    let plus = local_components_richardson(p, gen, cfg, FlowSign::Plus)?;
    let minus_error = linalg::max_abs_diff(&minus, &closed);
    let plus_error = linalg::max_abs_diff(&plus, &closed);
    Ok(SignReport {
        minus_error,
        plus_error,
        matched: if minus_error <= plus_error {
            FlowSign::Minus
        } else {
            FlowSign::Plus
        },
    })
}

/// Symbolic field of `P` on chart 0 of CP(N-1).
pub fn field_from_generator(gen: &CMatrix, cfg: &GeometryConfig) -> Result<TangentField> {
    let dim = gen.nrows();
    if dim < 2 || gen.ncols() != dim {
        return Err(Error::InvalidInput(format!(
            "generator must be square with N >= 2, got {}x{}",
            gen.nrows(),
            gen.ncols()
        )));
    }
    let n = dim - 1;
    let pref = -I / cfg.hbar;
    let hol = (0..n)
        .map(|i| {
            let a = i + 1;
            let mut p = Poly::constant(n, gen[(a, 0)]);
            p = p.add(&Poly::var(n, i).scale(-gen[(0, 0)]));
            for k in 0..n {
                p = p.add(&Poly::var(n, k).scale(gen[(a, k + 1)]));
                p = p.add(&Poly::monomial(n, &[i, k], -gen[(0, k + 1)]));
            }
            p.scale(pref)
        })
        .collect();
    Ok(TangentField::real(hol))
}

fn c(x: f64) -> Complex64 {
    Complex64::from(x)
}

/// The three spin fields `D_x, D_y, D_z` as transcribed, with the coordinate
/// `pi` of CP(1).
pub fn printed_su2_fields(cfg: &GeometryConfig) -> Vec<TangentField> {
    let h = cfg.hbar;
    let one = Poly::constant(1, c(1.0));
    let sq = Poly::monomial(1, &[0, 0], c(1.0));
    let w = Poly::var(1, 0);
    let dx = TangentField {
        hol: vec![one.sub(&sq).scale(c(-h / 2.0))],
        conj: vec![one.sub(&sq).scale(c(h / 2.0))],
    };
    let dy = TangentField {
        hol: vec![one.add(&sq).scale(c(h / 2.0))],
        conj: vec![one.add(&sq).scale(c(h / 2.0))],
    };
    let dz = TangentField {
        hol: vec![Poly::var(1, 0).scale(c(-h))],
        conj: vec![w.scale(c(h))],
    };
    vec![dx, dy, dz]
}

/// The eight fields `D_1 .. D_8` of the three-level system as transcribed.
pub fn printed_su3_fields(cfg: &GeometryConfig) -> Vec<TangentField> {
    let h = cfg.hbar;
    let n = 2;
    let one = Poly::constant(n, c(1.0));
    let m = |vars: &[usize]| Poly::monomial(n, vars, c(1.0));
    let (p1, p2) = (m(&[0]), m(&[1]));
    let (p11, p22, p12) = (m(&[0, 0]), m(&[1, 1]), m(&[0, 1]));
    let zero = Poly::zero(n);
    let ih2 = Complex64::new(0.0, h / 2.0);
    let field = |hol: [Poly; 2], conj: [Poly; 2], s: Complex64| TangentField {
        hol: hol.iter().map(|p| p.scale(s)).collect(),
        conj: conj.iter().map(|p| p.scale(s)).collect(),
    };
    let neg = |p: &Poly| p.scale(c(-1.0));
    vec![
        field(
            [p11.sub(&one), p12.clone()],
            [p11.sub(&one), p12.clone()],
            ih2,
        ),
        field(
            [p11.add(&one), p12.clone()],
            [neg(&p11.add(&one)), neg(&p12)],
            ih2,
        ),
        field([zero.clone(), p2.clone()], [zero.clone(), p2.clone()], c(-h / 2.0)),
        field(
            [p12.clone(), p22.sub(&one)],
            [p12.clone(), p22.sub(&one)],
            c(h / 2.0),
        ),
        field(
            [p12.clone(), p22.add(&one)],
            [neg(&p12), neg(&p22.add(&one))],
            c(h / 2.0),
        ),
        field([p2.clone(), p1.clone()], [neg(&p2), neg(&p1)], c(-h / 2.0)),
        field([p2.clone(), neg(&p1)], [neg(&p2), p1.clone()], c(-h / 2.0)),
        field([zero.clone(), p2.clone()], [zero, neg(&p2)], c(3.0 * h)),
    ]
}

/// One bracket `[D_a, D_b]` of the transcribed spin fields against the
/// stated `-i hbar eps_abc D_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketComparison {
    pub a: String,
    pub b: String,
    pub target: String,
    pub stated_constant: Complex64,
    /// Least-squares `k` in `[D_a, D_b] = k D_c`.
    pub fitted_constant: Complex64,
    pub stated_residual: f64,
    pub fitted_residual: f64,
}

/// Least-squares `k` minimizing `|x - k y|` over coefficient vectors.
fn fit_constant(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    let den: f64 = y.iter().map(|z| z.norm_sqr()).sum();
    if den == 0.0 {
        return ZERO;
    }
    linalg::inner(y, x) / den
}

pub fn compare_printed_su2(cfg: &GeometryConfig) -> Result<Vec<BracketComparison>> {
    let d = printed_su2_fields(cfg);
    let names = ["D_x", "D_y", "D_z"];
    let stated = Complex64::new(0.0, -cfg.hbar);
    [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
        .iter()
        .map(|&(a, b, t)| {
            let br = lie_bracket(&d[a], &d[b])?;
            let fitted = fit_constant(&flatten_any(&br), &flatten_any(&d[t]));
            Ok(BracketComparison {
                a: names[a].into(),
                b: names[b].into(),
                target: names[t].into(),
                stated_constant: stated,
                fitted_constant: fitted,
                stated_residual: br.max_diff(&d[t].scale(stated)),
                fitted_residual: br.max_diff(&d[t].scale(fitted)),
            })
        })
        .collect()
}

/// Closure of the generator fields of a basis: one constant `k` with
/// `[X_a, X_b] = k sum_c f_abc X_c`, where `[T_a, T_b] = i f_abc T_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub constant: Complex64,
    pub residual: f64,
}

pub fn closure_check(basis: &AlgebraBasis, cfg: &GeometryConfig) -> Result<ClosureReport> {
    let fields: Vec<TangentField> = basis
        .generators
        .iter()
        .map(|g| field_from_generator(g, cfg))
        .collect::<Result<_>>()?;
    let f = basis.structure_constants();
    let n = fields.len();
    let mut brackets = Vec::new();
    let mut targets = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let br = lie_bracket(&fields[a], &fields[b])?;
            let mut t = TangentField::zero(fields[a].len());
            for (cidx, fc) in fields.iter().enumerate() {
                if f[a][b][cidx].norm() > 0.0 {
                    t = t.add(&fc.scale(f[a][b][cidx]));
                }
            }
            brackets.push(br);
            targets.push(t);
        }
    }
    let bx: Vec<Complex64> = brackets.iter().flat_map(flatten_any).collect();
    let tx: Vec<Complex64> = targets.iter().flat_map(flatten_any).collect();
    let constant = fit_constant(&bx, &tx);
    let residual = brackets
        .iter()
        .zip(&targets)
        .map(|(b, t)| b.max_diff(&t.scale(constant)))
        .fold(0.0, f64::max);
    Ok(ClosureReport { constant, residual })
}

/// All coefficients of a field in a canonical monomial order up to degree 2.
fn flatten_any(f: &TangentField) -> Vec<Complex64> {
    let n = f.len();
    let mut monomials: Vec<Vec<u8>> = vec![vec![0; n]];
    for k in 0..n {
        let mut e = vec![0; n];
        e[k] = 1;
        monomials.push(e);
        for m in k..n {
            let mut e = vec![0; n];
            e[k] += 1;
            e[m] += 1;
            monomials.push(e);
        }
    }
    f.hol
        .iter()
        .chain(&f.conj)
        .flat_map(|p| monomials.iter().map(|e| p.coeff(e)).collect::<Vec<_>>())
        .collect()
}

/// `max |[X_P, X_Q] - X_{i[P,Q]/hbar}|` over coefficients.
pub fn homomorphism_residual(p: &CMatrix, q: &CMatrix, cfg: &GeometryConfig) -> Result<f64> {
    let xp = field_from_generator(p, cfg)?;
    let xq = field_from_generator(q, cfg)?;
    let lhs = lie_bracket(&xp, &xq)?;
    let comm = linalg::commutator(p, q) * (I / cfg.hbar);
    let rhs = field_from_generator(&comm, cfg)?;
    Ok(lhs.max_diff(&rhs))
}

/// `[psi0, psi0 pi'^1, ...]` with `psi0` placed on the chart component.
pub fn lift(psi0: Complex64, shifted: &LocalPoint) -> Result<StateVector> {
    if psi0.norm() == 0.0 {
        return Err(Error::InvalidInput("lift needs a nonzero chart amplitude".into()));
    }
    let n = shifted.dim();
    let b = shifted.chart();
    let mut a = vec![ZERO; n];
    a[b] = psi0;
    for (i, pi) in shifted.coords().iter().enumerate() {
        a[hilbert_index(b, i)] = psi0 * pi;
    }
    StateVector::new(a)
}

/// `Delta pi^i = -Gamma^i_{km} xi^k dpi^m tau`.
pub fn transport_increment(
    xi: &TangentVector,
    dpi: &[Complex64],
    tau: f64,
    cfg: &GeometryConfig,
    variant: ConnectionVariant,
) -> Result<Vec<Complex64>> {
    if dpi.len() != xi.xi.len() {
        return Err(Error::DimensionMismatch {
            expected: xi.xi.len(),
            got: dpi.len(),
        });
    }
    Ok(geometry::connection_contract(&xi.base, cfg, variant, &xi.xi, dpi)
        .into_iter()
        .map(|g| -g * tau)
        .collect())
}

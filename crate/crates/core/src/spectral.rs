//! Dense Hermitian eigendecomposition, first-order eigenvalue derivatives and
//! inertia of critical points.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::operators::HermitianOperator;
use crate::{Error, Result};

/// Relative gap below which two eigenvalues count as equal.
pub const TOL_GAP_REL: f64 = 1e-8;

const MAX_SWEEPS: usize = 10_000;

/// Eigenvalues in ascending order and an orthonormal eigenbasis, column `j`
/// paired with `eigenvalues[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
    real: bool,
}

/// Full eigendecomposition.
///
/// Real symmetric input goes through the real solver and yields real
/// eigenvectors. Every eigenvector is rotated so that its first entry of
/// modulus above `1e-10` is positive real.
pub fn eig(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    let d = h.dim();
    let (values, vectors, real) = if h.is_real() {
        let se = SymmetricEigen::try_new(h.real_part(), f64::EPSILON, MAX_SWEEPS)
            .ok_or(Error::ConvergenceFailure { dim: d })?;
        let vectors = se.eigenvectors.map(|x| Complex64::new(x, 0.0));
        (se.eigenvalues.as_slice().to_vec(), vectors, true)
    } else {
        let se = SymmetricEigen::try_new(h.matrix().clone(), f64::EPSILON, MAX_SWEEPS)
            .ok_or(Error::ConvergenceFailure { dim: d })?;
        (se.eigenvalues.as_slice().to_vec(), se.eigenvectors, false)
    };
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::ConvergenceFailure { dim: d });
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let mut eigenvectors = DMatrix::zeros(d, d);
    for (col, &src) in order.iter().enumerate() {
        let mut v = vectors.column(src).into_owned();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if let Some(z) = v.iter().find(|z| z.norm() > 1e-10) {
            let phase = z.conj() / z.norm();
            v.iter_mut().for_each(|x| *x *= phase);
        }
        if real {
            v.iter_mut().for_each(|x| x.im = 0.0);
        }
        eigenvectors.set_column(col, &(v / Complex64::new(norm, 0.0)));
    }
    Ok(SpectralDecomposition {
        eigenvalues: order.iter().map(|&i| values[i]).collect(),
        eigenvectors,
        real,
    })
}

/// Ascending eigenvalues only.
pub fn eigenvalues(h: &HermitianOperator) -> Vec<f64> {
    let mut values: Vec<f64> = if h.is_real() {
        h.real_part().symmetric_eigenvalues().as_slice().to_vec()
    } else {
        h.matrix().clone().symmetric_eigenvalues().as_slice().to_vec()
    };
    values.sort_by(f64::total_cmp);
    values
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `lambda_level`, 1-based.
    pub fn eigenvalue(&self, level: usize) -> f64 {
        self.eigenvalues[level - 1]
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn vector(&self, level: usize) -> Vec<Complex64> {
        self.eigenvectors.column(level - 1).iter().copied().collect()
    }

    /// Real eigenvector, or `None` when the decomposition is complex.
    pub fn real_vector(&self, level: usize) -> Option<Vec<f64>> {
        self.real
            .then(|| self.eigenvectors.column(level - 1).iter().map(|z| z.re).collect())
    }

    /// True when the source operator was real symmetric.
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn check_level(&self, level: usize) -> Result<()> {
        if level >= 1 && level <= self.dim() {
            Ok(())
        } else {
            Err(Error::LevelOutOfRange {
                level,
                dim: self.dim(),
            })
        }
    }

    /// `1e-8 * max(1, lambda_max - lambda_min)`.
    pub fn tol_gap(&self) -> f64 {
        let diameter = match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        };
        TOL_GAP_REL * diameter.max(1.0)
    }

    /// Distance from `lambda_level` to the nearest other eigenvalue
    /// (infinite for a 1x1 operator).
    pub fn gap(&self, level: usize) -> f64 {
        let i = level - 1;
        let lam = self.eigenvalues[i];
        let below = i
            .checked_sub(1)
            .map_or(f64::INFINITY, |k| lam - self.eigenvalues[k]);
        let above = self
            .eigenvalues
            .get(i + 1)
            .map_or(f64::INFINITY, |x| x - lam);
        below.min(above)
    }

    pub fn is_simple(&self, level: usize) -> bool {
        self.gap(level) > self.tol_gap()
    }

    pub(crate) fn require_simple(&self, level: usize) -> Result<()> {
        self.check_level(level)?;
        if self.is_simple(level) {
            Ok(())
        } else {
            Err(Error::DegenerateEigenvalue {
                level,
                gap: self.gap(level),
                tol: self.tol_gap(),
            })
        }
    }
}

/// First-order derivative `<f_n, dH f_n>` of a simple eigenvalue along the
/// direction `dh`.
pub fn eigenvalue_derivative(
    sd: &SpectralDecomposition,
    level: usize,
    dh: &HermitianOperator,
) -> Result<f64> {
    sd.require_simple(level)?;
    if dh.dim() != sd.dim() {
        return Err(Error::DimensionMismatch {
            what: "derivative operator",
            got: dh.dim(),
            expected: sd.dim(),
        });
    }
    let f = sd.vector(level);
    Ok(dh.inner(&f, &f).re)
}

/// Counts of negative, zero and positive eigenvalues of a Hessian at a
/// critical point; `n_minus` is the Morse index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Inertia {
    pub n_minus: usize,
    pub n_zero: usize,
    pub n_plus: usize,
}

impl Inertia {
    /// Classifies `values` relative to zero with tolerance `tol`.
    pub fn of_values(values: &[f64], tol: f64) -> Self {
        values.iter().fold(
            Inertia {
                n_minus: 0,
                n_zero: 0,
                n_plus: 0,
            },
            |mut acc, &x| {
                if x < -tol {
                    acc.n_minus += 1;
                } else if x > tol {
                    acc.n_plus += 1;
                } else {
                    acc.n_zero += 1;
                }
                acc
            },
        )
    }

    /// Inertia of a real symmetric matrix.
    pub fn of_symmetric(m: &DMatrix<f64>, tol: f64) -> Self {
        if m.is_empty() {
            return Self::of_values(&[], tol);
        }
        Self::of_values(m.clone().symmetric_eigenvalues().as_slice(), tol)
    }

    pub fn dimension(&self) -> usize {
        self.n_minus + self.n_zero + self.n_plus
    }

    pub fn morse_index(&self) -> usize {
        self.n_minus
    }

    /// The same critical point seen in the real space of twice the
    /// dimension: every count doubles and the phase direction adds one zero.
    pub fn doubled(&self) -> Self {
        Inertia {
            n_minus: 2 * self.n_minus,
            n_zero: 2 * self.n_zero + 1,
            n_plus: 2 * self.n_plus,
        }
    }
}

/// Inertia of the eigenvector `f_level` as a critical point of `<x, H x>` on
/// the unit sphere: eigenvalues strictly below, equal to (excluding itself)
/// and strictly above `lambda_level`, with equality up to the gap tolerance.
pub fn quadform_inertia(h: &HermitianOperator, level: usize) -> Result<Inertia> {
    let values = eigenvalues(h);
    let sd_tol = {
        let diameter = values.last().unwrap_or(&0.0) - values.first().unwrap_or(&0.0);
        TOL_GAP_REL * diameter.max(1.0)
    };
    if level == 0 || level > values.len() {
        return Err(Error::LevelOutOfRange {
            level,
            dim: values.len(),
        });
    }
    let lam = values[level - 1];
    let shifted: Vec<f64> = values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != level - 1)
        .map(|(_, &x)| x - lam)
        .collect();
    Ok(Inertia::of_values(&shifted, sd_tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{CycleStructure, Graph};
    use crate::operators::{build_magnetic, build_plain, MagneticPhases};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn random_hermitian(rng: &mut ChaCha8Rng, d: usize, complex: bool) -> HermitianOperator {
        let m = DMatrix::from_fn(d, d, |_, _| {
            let im = if complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
            Complex64::new(rng.gen_range(-1.0..1.0), im)
        });
        HermitianOperator::from_upper(&m)
    }

    fn residual(h: &HermitianOperator, sd: &SpectralDecomposition, level: usize) -> f64 {
        let f = nalgebra::DVector::from_vec(sd.vector(level));
        let r = h.matrix() * &f - f * Complex64::new(sd.eigenvalue(level), 0.0);
        r.norm()
    }

    #[test]
    fn two_by_two_closed_form() {
        let h = HermitianOperator::from_real_upper(&DMatrix::from_row_slice(
            2,
            2,
            &[0.0, -1.0, -1.0, 0.0],
        ));
        let sd = eig(&h).unwrap();
        assert!((sd.eigenvalue(1) + 1.0).abs() < 1e-15);
        assert!((sd.eigenvalue(2) - 1.0).abs() < 1e-15);
        let f1 = sd.real_vector(1).unwrap();
        let f2 = sd.real_vector(2).unwrap();
        assert!((f1[0] - FRAC_1_SQRT_2).abs() < 1e-15 && (f1[1] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((f2[0] - FRAC_1_SQRT_2).abs() < 1e-15 && (f2[1] + FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn triangle_circulant_spectrum() {
        let g = Graph::new(3, &[(0, 1), (1, 2), (0, 2)], vec![0.0; 3]).unwrap();
        let cs = CycleStructure::new(&g, None);
        let sd = eig(&build_plain(&g)).unwrap();
        for (got, want) in sd.eigenvalues().iter().zip([-2.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        for &alpha in &[0.3, -1.2, 2.9, PI] {
            let h = build_magnetic(&g, &cs, &MagneticPhases::new(vec![alpha])).unwrap();
            let mut want: Vec<f64> = (0..3)
                .map(|k| -2.0 * ((alpha + 2.0 * PI * k as f64) / 3.0).cos())
                .collect();
            want.sort_by(f64::total_cmp);
            let got = eig(&h).unwrap();
            for (a, b) in got.eigenvalues().iter().zip(&want) {
                assert!((a - b).abs() < 1e-13, "alpha={alpha}: {a} vs {b}");
            }
            assert_eq!(eigenvalues(&h).len(), 3);
        }
    }

    #[test]
    fn random_decompositions_satisfy_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..200 {
            let d = 1 + trial % 16;
            let h = random_hermitian(&mut rng, d, trial % 2 == 0);
            let sd = eig(&h).unwrap();
            let scale = h.frobenius_norm().max(1.0);
            assert!(sd.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
            for level in 1..=d {
                assert!(residual(&h, &sd, level) <= 1e-10 * scale);
            }
            let gram = sd.eigenvectors().adjoint() * sd.eigenvectors();
            for i in 0..d {
                for j in 0..d {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((gram[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn sign_canonicalization_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(&mut rng, 7, false);
        let a = eig(&h).unwrap();
        let b = eig(&h.clone()).unwrap();
        assert_eq!(a, b);
        assert!(a.is_real());
        for level in 1..=7 {
            let f = a.real_vector(level).unwrap();
            let first = f.iter().find(|x| x.abs() > 1e-10).unwrap();
            assert!(*first > 0.0);
        }
        let hc = random_hermitian(&mut rng, 5, true);
        let c = eig(&hc).unwrap();
        assert!(!c.is_real());
        for level in 1..=5 {
            let f = c.vector(level);
            let first = f.iter().find(|z| z.norm() > 1e-10).unwrap();
            assert!(first.re > 0.0 && first.im == 0.0);
        }
    }

    #[test]
    fn derivative_along_identity_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 6, true);
        let sd = eig(&h).unwrap();
        let id = HermitianOperator::diagonal(&[1.0; 6]);
        for level in 1..=6 {
            assert!((eigenvalue_derivative(&sd, level, &id).unwrap() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let h = random_hermitian(&mut rng, 6, true);
            let dh = random_hermitian(&mut rng, 6, true);
            let sd = eig(&h).unwrap();
            let t = 1e-6;
            let plus = eigenvalues(&h.add(&dh.scale(t)));
            let minus = eigenvalues(&h.sub(&dh.scale(t)));
            for level in 1..=6 {
                if sd.gap(level) < 1e-3 {
                    continue;
                }
                let fd = (plus[level - 1] - minus[level - 1]) / (2.0 * t);
                let exact = eigenvalue_derivative(&sd, level, &dh).unwrap();
                assert!((fd - exact).abs() < 1e-6, "{fd} vs {exact}");
            }
        }
    }

    #[test]
    fn derivative_rejects_degenerate_level() {
        let g = Graph::new(3, &[(0, 1), (1, 2), (0, 2)], vec![0.0; 3]).unwrap();
        let h = build_plain(&g);
        let sd = eig(&h).unwrap();
        assert!(matches!(
            eigenvalue_derivative(&sd, 2, &h),
            Err(Error::DegenerateEigenvalue { level: 2, .. })
        ));
        assert!(eigenvalue_derivative(&sd, 1, &h).is_ok());
    }

    #[test]
    fn quadform_inertia_examples() {
        let h = HermitianOperator::diagonal(&[-2.0, -1.0, 0.5, 3.0, 4.0]);
        let i = quadform_inertia(&h, 3).unwrap();
        assert_eq!((i.n_minus, i.n_zero, i.n_plus), (2, 0, 2));
        assert_eq!(i.doubled(), Inertia { n_minus: 4, n_zero: 1, n_plus: 4 });

        let g = Graph::new(3, &[(0, 1), (1, 2), (0, 2)], vec![0.0; 3]).unwrap();
        let i = quadform_inertia(&build_plain(&g), 2).unwrap();
        // spectrum (-2, 1, 1): one below, one equal, none above
        assert_eq!((i.n_minus, i.n_zero, i.n_plus), (1, 1, 0));
        assert_eq!(i.doubled(), Inertia { n_minus: 2, n_zero: 3, n_plus: 0 });

        assert!(quadform_inertia(&h, 0).is_err());
        assert!(quadform_inertia(&h, 6).is_err());
    }

    #[test]
    fn inertia_of_symmetric_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let i = Inertia::of_symmetric(&m, 1e-12);
        assert_eq!((i.n_minus, i.n_zero, i.n_plus), (1, 0, 1));
        let empty = Inertia::of_symmetric(&DMatrix::zeros(0, 0), 1e-12);
        assert_eq!(empty.dimension(), 0);
    }
}

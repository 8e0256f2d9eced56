//! Dense complex matrices sized for small circuits (up to 16×16).

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected {expected} entries for a {dim}x{dim} matrix, got {found}")]
    BadLength {
        dim: usize,
        expected: usize,
        found: usize,
    },
    #[error("matrix dimension must be at least 1")]
    Empty,
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self, MatrixError> {
        if dim == 0 {
            return Err(MatrixError::Empty);
        }
        if entries.len() != dim * dim {
            return Err(MatrixError::BadLength {
                dim,
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if let Some(index) = entries
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(MatrixError::NonFinite { index });
        }
        Ok(Self { dim, entries })
    }

    /// Builds a matrix from real-valued rows. Panics on ragged input; meant for constants.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let entries = rows
            .iter()
            .flat_map(|row| {
                assert_eq!(row.len(), dim, "ragged matrix literal");
                row.iter().map(|&re| Complex64::new(re, 0.0))
            })
            .collect();
        Self::new(dim, entries).expect("valid matrix literal")
    }

    /// Builds a matrix from complex rows. Panics on ragged input; meant for constants.
    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let dim = rows.len();
        let entries = rows
            .iter()
            .flat_map(|row| {
                assert_eq!(row.len(), dim, "ragged matrix literal");
                row.iter().copied()
            })
            .collect();
        Self::new(dim, entries).expect("valid matrix literal")
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self { dim, entries }
    }

    pub(crate) fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub(crate) fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.dim != other.dim {
            return Err(MatrixError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &other.entries[k * n..(k + 1) * n];
                let dst = &mut out.entries[r * n..(r + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product with `self` as the more-significant factor.
    pub fn kron(&self, other: &Self) -> Self {
        let (na, nb) = (self.dim, other.dim);
        let n = na * nb;
        let mut out = Self::zeros(n);
        for ar in 0..na {
            for ac in 0..na {
                let a = self.get(ar, ac);
                for br in 0..nb {
                    for bc in 0..nb {
                        out.set(ar * nb + br, ac * nb + bc, a * other.get(br, bc));
                    }
                }
            }
        }
        out
    }

    /// Maximum entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, MatrixError> {
        if self.dim != other.dim {
            return Err(MatrixError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// True iff every entry of `m·m† − I` has modulus at most `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        let product = self
            .matmul(&self.adjoint())
            .expect("a matrix and its adjoint share a dimension");
        product
            .max_abs_diff(&Self::identity(self.dim))
            .map(|d| d <= tol)
            .unwrap_or(false)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self.get(r, c);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn h() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[FRAC_1_SQRT_2, FRAC_1_SQRT_2], &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]])
    }
    fn x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }
    fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }
    fn cx() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ])
    }

    #[test]
    fn matmul_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.matmul(&h()).unwrap(), h());
        assert!(h().matmul(&h()).unwrap().max_abs_diff(&i2).unwrap() <= 1e-15);

        let lhs = h().kron(&x());
        let rhs = x().kron(&x());
        let s = FRAC_1_SQRT_2;
        let expected = ComplexMatrix::from_real_rows(&[
            &[s, 0.0, s, 0.0],
            &[0.0, s, 0.0, s],
            &[-s, 0.0, s, 0.0],
            &[0.0, -s, 0.0, s],
        ]);
        let got = lhs.matmul(&rhs).unwrap();
        assert!(got.max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn matmul_dimension_mismatch() {
        let err = ComplexMatrix::identity(2).matmul(&ComplexMatrix::identity(4));
        assert_eq!(err, Err(MatrixError::DimensionMismatch { left: 2, right: 4 }));
    }

    #[test]
    fn kron_examples() {
        assert_eq!(
            ComplexMatrix::identity(2).kron(&ComplexMatrix::identity(2)),
            ComplexMatrix::identity(4)
        );
        let s = FRAC_1_SQRT_2;
        let hx = ComplexMatrix::from_real_rows(&[
            &[0.0, s, 0.0, s],
            &[s, 0.0, s, 0.0],
            &[0.0, s, 0.0, -s],
            &[s, 0.0, -s, 0.0],
        ]);
        assert!(h().kron(&x()).max_abs_diff(&hx).unwrap() < 1e-15);
        let xx = ComplexMatrix::from_real_rows(&[
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
        ]);
        assert_eq!(x().kron(&x()), xx);
    }

    #[test]
    fn unitarity() {
        assert!(h().is_unitary(1e-12));
        assert!(!ComplexMatrix::identity(2).scale(Complex64::new(2.0, 0.0)).is_unitary(1e-12));
        assert!(cx().is_unitary(1e-12));
    }

    #[test]
    fn abs_diff() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.max_abs_diff(&i2).unwrap(), 0.0);
        assert_eq!(x().max_abs_diff(&z()).unwrap(), 1.0);
        assert!(x().max_abs_diff(&cx()).is_err());
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert_eq!(ComplexMatrix::new(0, vec![]), Err(MatrixError::Empty));
        assert!(matches!(
            ComplexMatrix::new(2, vec![Complex64::new(0.0, 0.0); 3]),
            Err(MatrixError::BadLength { .. })
        ));
        let mut e = vec![Complex64::new(0.0, 0.0); 4];
        e[2].im = f64::NAN;
        assert_eq!(ComplexMatrix::new(2, e), Err(MatrixError::NonFinite { index: 2 }));
    }

    fn unit_entry() -> impl Strategy<Value = Complex64> {
        (0.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
    }

    fn bounded_matrix(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
        proptest::collection::vec(unit_entry(), dim * dim)
            .prop_map(move |e| ComplexMatrix::new(dim, e).unwrap())
    }

    fn random_unitary_2() -> impl Strategy<Value = ComplexMatrix> {
        (0.0..6.3f64, 0.0..6.3f64, 0.0..6.3f64).prop_map(|(t, p, l)| {
            let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
            ComplexMatrix::from_rows(&[
                &[Complex64::new(c, 0.0), -Complex64::from_polar(s, l)],
                &[Complex64::from_polar(s, p), Complex64::from_polar(c, p + l)],
            ])
        })
    }

    proptest! {
        #[test]
        fn kron_is_associative(a in bounded_matrix(2), b in bounded_matrix(2), c in bounded_matrix(2)) {
            let left = a.kron(&b.kron(&c));
            let right = a.kron(&b).kron(&c);
            prop_assert_eq!(left.dim(), right.dim());
            prop_assert!(left.max_abs_diff(&right).unwrap() <= 1e-12);
        }

        #[test]
        fn matmul_is_associative(dim in prop::sample::select(vec![2usize, 4, 8, 16]), seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let mut gen = || {
                let e = (0..dim * dim)
                    .map(|_| Complex64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..6.3)))
                    .collect();
                ComplexMatrix::new(dim, e).unwrap()
            };
            let (a, b, c) = (gen(), gen(), gen());
            let left = a.matmul(&b).unwrap().matmul(&c).unwrap();
            let right = a.matmul(&b.matmul(&c).unwrap()).unwrap();
            prop_assert!(left.max_abs_diff(&right).unwrap() <= 1e-10);
        }

        #[test]
        fn products_of_unitaries_stay_unitary(a in random_unitary_2(), b in random_unitary_2()) {
            prop_assert!(a.matmul(&b).unwrap().is_unitary(1e-10));
            prop_assert!(a.kron(&b).is_unitary(1e-10));
        }
    }
}

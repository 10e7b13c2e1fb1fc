//! Dense complex 2×2 linear algebra.
//!
//! Everything here uses closed forms: eigenvalues from the trace/determinant
//! quadratic, the exponential from the Pauli (Cayley–Hamilton) form and the
//! Hermitian square root from the 2×2 identity `√A = (A + √det·𝕀)/√(tr + 2√det)`.
//! All values are `Copy` and all operations are pure.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

/// Default tolerance for matrix predicates.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Below this modulus of `r` the exponential switches to the series for `sinh r / r`.
const EXP_SERIES_CUTOFF: f64 = 1e-6;

pub(crate) const fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

pub(crate) const ZERO: Complex = c(0.0, 0.0);
pub(crate) const ONE: Complex = c(1.0, 0.0);
pub(crate) const I: Complex = c(0.0, 1.0);

/// A column vector in ℂ².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexVector2 {
    pub v1: Complex,
    pub v2: Complex,
}

impl ComplexVector2 {
    pub const fn new(v1: Complex, v2: Complex) -> Self {
        Self { v1, v2 }
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO)
    }

    pub const fn e1() -> Self {
        Self::new(ONE, ZERO)
    }

    pub const fn e2() -> Self {
        Self::new(ZERO, ONE)
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Complex {
        self.v1.conj() * other.v1 + self.v2.conj() * other.v2
    }

    pub fn norm(&self) -> f64 {
        self.v1.norm().hypot(self.v2.norm())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.v1.norm_sqr() + self.v2.norm_sqr()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.v1.conj(), self.v2.conj())
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self::new(self.v1 * s, self.v2 * s)
    }

    /// Unit-norm copy; the zero vector is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            *self
        } else {
            self.scale(c(1.0 / n, 0.0))
        }
    }

    /// The outer product `|self⟩⟨other|`.
    pub fn outer(&self, other: &Self) -> ComplexMatrix2 {
        ComplexMatrix2::new(
            self.v1 * other.v1.conj(),
            self.v1 * other.v2.conj(),
            self.v2 * other.v1.conj(),
            self.v2 * other.v2.conj(),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.v1.is_finite() && self.v2.is_finite()
    }
}

impl Add for ComplexVector2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.v1 + rhs.v1, self.v2 + rhs.v2)
    }
}

impl Sub for ComplexVector2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.v1 - rhs.v1, self.v2 - rhs.v2)
    }
}

impl Mul<Complex> for ComplexVector2 {
    type Output = Self;
    fn mul(self, rhs: Complex) -> Self {
        self.scale(rhs)
    }
}

impl Mul<f64> for ComplexVector2 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(c(rhs, 0.0))
    }
}

/// A 2×2 complex matrix `[[a11, a12], [a21, a22]]`.
///
/// Hermiticity, unitarity and definiteness are predicates evaluated on demand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexMatrix2 {
    pub a11: Complex,
    pub a12: Complex,
    pub a21: Complex,
    pub a22: Complex,
}

/// An eigenvalue together with a unit-norm right eigenvector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenPair2 {
    pub eigenvalue: Complex,
    pub right_vector: ComplexVector2,
}

impl ComplexMatrix2 {
    pub const fn new(a11: Complex, a12: Complex, a21: Complex, a22: Complex) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn from_real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self::new(c(a11, 0.0), c(a12, 0.0), c(a21, 0.0), c(a22, 0.0))
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn sigma_x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub const fn sigma_y() -> Self {
        Self::new(ZERO, c(0.0, -1.0), I, ZERO)
    }

    pub const fn sigma_z() -> Self {
        Self::new(ONE, ZERO, ZERO, c(-1.0, 0.0))
    }

    pub const fn diag(d1: Complex, d2: Complex) -> Self {
        Self::new(d1, ZERO, ZERO, d2)
    }

    /// Matrix whose columns are `first` and `second`.
    pub fn from_columns(first: ComplexVector2, second: ComplexVector2) -> Self {
        Self::new(first.v1, second.v1, first.v2, second.v2)
    }

    /// Matrix whose rows are `first` and `second` (entries taken as given, not conjugated).
    pub fn from_rows(first: ComplexVector2, second: ComplexVector2) -> Self {
        Self::new(first.v1, first.v2, second.v1, second.v2)
    }

    pub fn column(&self, j: usize) -> ComplexVector2 {
        match j {
            0 => ComplexVector2::new(self.a11, self.a21),
            1 => ComplexVector2::new(self.a12, self.a22),
            _ => panic!("column index {j} out of range for a 2x2 matrix"),
        }
    }

    pub fn entries(&self) -> [Complex; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    fn map(&self, f: impl Fn(Complex) -> Complex) -> Self {
        Self::new(f(self.a11), f(self.a12), f(self.a21), f(self.a22))
    }

    pub fn scale(&self, s: Complex) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::new(
            self.a11.conj(),
            self.a21.conj(),
            self.a12.conj(),
            self.a22.conj(),
        )
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn trace(&self) -> Complex {
        self.a11 + self.a22
    }

    pub fn det(&self) -> Complex {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries()
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.is_finite())
    }

    /// `self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn apply(&self, v: &ComplexVector2) -> ComplexVector2 {
        ComplexVector2::new(
            self.a11 * v.v1 + self.a12 * v.v2,
            self.a21 * v.v1 + self.a22 * v.v2,
        )
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        let scale = self.frobenius_norm();
        if det.norm() <= f64::EPSILON * scale * scale || det.norm() == 0.0 {
            return Err(Error::Singular);
        }
        Ok(Self::new(self.a22, -self.a12, -self.a21, self.a11).scale(det.inv()))
    }

    /// Frobenius norm of the anti-Hermitian part `(A − A†)/2`.
    pub fn anti_hermitian_residual(&self) -> f64 {
        (*self - self.adjoint()).frobenius_norm() / 2.0
    }

    /// Hermitian within `tol`, measured relative to `max(1, ‖A‖)`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.anti_hermitian_residual() <= tol * self.frobenius_norm().max(1.0)
    }

    /// Hermitian (within `tol`) with smallest eigenvalue above `tol`.
    pub fn is_positive_definite(&self, tol: f64) -> bool {
        match self.hermitian_eigenvalues(tol) {
            Ok((_, lo)) => lo > tol,
            Err(_) => false,
        }
    }

    /// Eigenvalues and unit right eigenvectors, ordered by descending
    /// `(Re λ, Im λ)`.
    ///
    /// A degenerate but diagonalizable (scalar) matrix yields the standard basis.
    /// A degenerate, non-diagonalizable matrix yields [`Error::Defective`].
    pub fn eigen(&self) -> Result<[EigenPair2; 2]> {
        self.eigen_with_tol(DEFAULT_TOL)
    }

    pub fn eigen_with_tol(&self, tol: f64) -> Result<[EigenPair2; 2]> {
        let scale = self.frobenius_norm();
        let half_trace = self.trace() / 2.0;
        let half_diff = (self.a11 - self.a22) / 2.0;
        let root = (half_diff * half_diff + self.a12 * self.a21).sqrt();

        if root.norm() <= tol * scale.max(f64::MIN_POSITIVE) {
            let shifted = *self - Self::identity().scale(half_trace);
            if shifted.frobenius_norm() <= tol * scale.max(f64::MIN_POSITIVE) || scale == 0.0 {
                return Ok([
                    EigenPair2 {
                        eigenvalue: half_trace,
                        right_vector: ComplexVector2::e1(),
                    },
                    EigenPair2 {
                        eigenvalue: half_trace,
                        right_vector: ComplexVector2::e2(),
                    },
                ]);
            }
            return Err(Error::Defective {
                eigenvalue: half_trace,
            });
        }

        // Pick the sign that avoids cancellation, recover the other root from det.
        let big = if (half_trace.conj() * root).re >= 0.0 {
            half_trace + root
        } else {
            half_trace - root
        };
        let small = if big.norm() > 0.0 {
            self.det() / big
        } else {
            half_trace - (big - half_trace)
        };

        let mut pairs = [
            EigenPair2 {
                eigenvalue: big,
                right_vector: self.eigenvector_for(big),
            },
            EigenPair2 {
                eigenvalue: small,
                right_vector: self.eigenvector_for(small),
            },
        ];
        if eigenvalue_precedes(pairs[1].eigenvalue, pairs[0].eigenvalue, tol * scale) {
            pairs.swap(0, 1);
        }
        Ok(pairs)
    }

    // Two candidate null vectors of A − λ; the longer one is better conditioned.
    fn eigenvector_for(&self, lambda: Complex) -> ComplexVector2 {
        let first = ComplexVector2::new(self.a12, lambda - self.a11);
        let second = ComplexVector2::new(lambda - self.a22, self.a21);
        let v = if first.norm() >= second.norm() {
            first
        } else {
            second
        };
        if v.norm() == 0.0 {
            ComplexVector2::e1()
        } else {
            v.normalized()
        }
    }

    /// `exp(A)` from the Pauli form `A = a₀𝕀 + a⃗·σ⃗`:
    /// `exp(A) = e^{a₀}(cosh r·𝕀 + (sinh r / r)·a⃗·σ⃗)` with `r² = a⃗·a⃗`.
    pub fn exp(&self) -> Self {
        let a0 = self.trace() / 2.0;
        let traceless = *self - Self::identity().scale(a0);
        let half_diff = (self.a11 - self.a22) / 2.0;
        let r2 = half_diff * half_diff + self.a12 * self.a21;
        let r = r2.sqrt();
        let (cosh_r, sinhc_r) = if r.norm() < EXP_SERIES_CUTOFF {
            cosh_sinhc_series(r2)
        } else {
            (r.cosh(), r.sinh() / r)
        };
        (Self::identity().scale(cosh_r) + traceless.scale(sinhc_r)).scale(a0.exp())
    }

    /// Real eigenvalues `(high, low)` of a Hermitian matrix.
    pub fn hermitian_eigenvalues(&self, tol: f64) -> Result<(f64, f64)> {
        if !self.is_hermitian(tol) {
            return Err(Error::NotHermitian {
                residual: self.anti_hermitian_residual(),
            });
        }
        let a = self.a11.re;
        let d = self.a22.re;
        let b = (self.a12 + self.a21.conj()) / 2.0;
        let mean = (a + d) / 2.0;
        let radius = ((a - d) / 2.0).hypot(b.norm());
        let det = hermitian_det(a, d, b);
        if mean >= 0.0 {
            let hi = mean + radius;
            let lo = if hi != 0.0 { det / hi } else { mean - radius };
            Ok((hi, lo))
        } else {
            let lo = mean - radius;
            Ok((det / lo, lo))
        }
    }

    /// The unique Hermitian positive-definite square root.
    pub fn psd_sqrt(&self, tol: f64) -> Result<Self> {
        let (hi, lo) = self.hermitian_eigenvalues(tol)?;
        if lo <= tol {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: lo });
        }
        let herm = (*self + self.adjoint()).scale_real(0.5);
        let sqrt_det = (hi * lo).sqrt();
        let denom = hi.sqrt() + lo.sqrt();
        Ok((herm + Self::identity().scale_real(sqrt_det)).scale_real(1.0 / denom))
    }
}

/// `(Re, Im)` lexicographic "greater than" with a tie window on the real part.
fn eigenvalue_precedes(a: Complex, b: Complex, tie: f64) -> bool {
    if (a.re - b.re).abs() > tie {
        a.re > b.re
    } else {
        a.im > b.im
    }
}

// a·d − |b|² with the products compensated by fma.
fn hermitian_det(a: f64, d: f64, b: Complex) -> f64 {
    let p = a * d;
    let ep = a.mul_add(d, -p);
    let q = b.re * b.re;
    let eq = b.re.mul_add(b.re, -q);
    let s = b.im * b.im;
    let es = b.im.mul_add(b.im, -s);
    (p - q - s) + (ep - eq - es)
}

// Six terms each of cosh r and sinh r / r in powers of r².
fn cosh_sinhc_series(r2: Complex) -> (Complex, Complex) {
    let mut cosh = ZERO;
    let mut sinhc = ZERO;
    let mut power = ONE;
    let mut even_fact = 1.0;
    let mut odd_fact = 1.0;
    for k in 0..6 {
        cosh += power / even_fact;
        sinhc += power / odd_fact;
        power *= r2;
        let n = 2.0 * k as f64;
        even_fact *= (n + 1.0) * (n + 2.0);
        odd_fact *= (n + 2.0) * (n + 3.0);
    }
    (cosh, sinhc)
}

impl Add for ComplexMatrix2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(
            self.a11 + rhs.a11,
            self.a12 + rhs.a12,
            self.a21 + rhs.a21,
            self.a22 + rhs.a22,
        )
    }
}

impl Sub for ComplexMatrix2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(
            self.a11 - rhs.a11,
            self.a12 - rhs.a12,
            self.a21 - rhs.a21,
            self.a22 - rhs.a22,
        )
    }
}

impl Neg for ComplexMatrix2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|z| -z)
    }
}

impl Mul for ComplexMatrix2 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.a11 * rhs.a11 + self.a12 * rhs.a21,
            self.a11 * rhs.a12 + self.a12 * rhs.a22,
            self.a21 * rhs.a11 + self.a22 * rhs.a21,
            self.a21 * rhs.a12 + self.a22 * rhs.a22,
        )
    }
}

impl Mul<ComplexVector2> for ComplexMatrix2 {
    type Output = ComplexVector2;
    fn mul(self, rhs: ComplexVector2) -> ComplexVector2 {
        self.apply(&rhs)
    }
}

impl Mul<Complex> for ComplexMatrix2 {
    type Output = Self;
    fn mul(self, rhs: Complex) -> Self {
        self.scale(rhs)
    }
}

impl Mul<f64> for ComplexMatrix2 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale_real(rhs)
    }
}

impl fmt::Display for ComplexMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.a11, self.a12, self.a21, self.a22
        )
    }
}

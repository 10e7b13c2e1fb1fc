//! The two-level Hamiltonian family `H(t) = −½(ω𝕀 + λτ(t)σ_z + iκτ(t)σ_x)`,
//! its drives, Pauli decompositions and the parity / 𝒫𝒯 operators.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, Complex, ComplexMatrix2, ComplexVector2, I};

/// Relative tie window for classifying `|λ| = |κ|` as the exceptional point.
pub const REGIME_TIE_TOL: f64 = 1e-12;

/// Time profile `τ(t)` of the driven terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DriveKind {
    Constant(f64),
    Sine {
        amplitude: f64,
        frequency: f64,
    },
    /// `(t, τ)` samples, strictly increasing in `t`; linear in between.
    Tabulated(Vec<(f64, f64)>),
}

/// A drive together with the lower limit `t_ref` of its antiderivative
/// `∫_{t_ref}^t τ(s) ds`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub kind: DriveKind,
    pub t_ref: f64,
}

impl DriveSpec {
    /// `τ ≡ value`, integrated from `t_ref = 0`.
    pub fn constant(value: f64) -> Self {
        Self {
            kind: DriveKind::Constant(value),
            t_ref: 0.0,
        }
    }

    /// `τ(t) = amplitude·sin(frequency·t)`, integrated from `t_ref = π/2`.
    pub fn sine(amplitude: f64, frequency: f64) -> Self {
        Self {
            kind: DriveKind::Sine {
                amplitude,
                frequency,
            },
            t_ref: FRAC_PI_2,
        }
    }

    /// Tabulated drive integrated from its first sample time.
    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidDrive(
                "a tabulated drive needs at least two samples".into(),
            ));
        }
        if samples
            .iter()
            .any(|(t, v)| !t.is_finite() || !v.is_finite())
        {
            return Err(Error::InvalidDrive("non-finite drive sample".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidDrive(
                "tabulated sample times must be strictly increasing".into(),
            ));
        }
        let t_ref = samples[0].0;
        Ok(Self {
            kind: DriveKind::Tabulated(samples),
            t_ref,
        })
    }

    pub fn with_t_ref(mut self, t_ref: f64) -> Self {
        self.t_ref = t_ref;
        self
    }

    pub fn is_unit_constant(&self) -> bool {
        self.kind == DriveKind::Constant(1.0)
    }

    /// Time range on which the drive is defined.
    pub fn domain(&self) -> (f64, f64) {
        match &self.kind {
            DriveKind::Tabulated(s) => (s[0].0, s[s.len() - 1].0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Fails with [`Error::DriveRange`] unless `[t0, t1]` lies inside the domain.
    pub fn check_covers(&self, t0: f64, t1: f64) -> Result<()> {
        let (start, end) = self.domain();
        for t in [t0, t1] {
            if !(start..=end).contains(&t) {
                return Err(Error::DriveRange { t, start, end });
            }
        }
        Ok(())
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        match &self.kind {
            DriveKind::Constant(v) => Ok(*v),
            DriveKind::Sine {
                amplitude,
                frequency,
            } => Ok(amplitude * (frequency * t).sin()),
            DriveKind::Tabulated(samples) => {
                self.check_covers(t, t)?;
                let k = segment(samples, t);
                let (ta, va) = samples[k];
                let (tb, vb) = samples[k + 1];
                Ok(va + (vb - va) * (t - ta) / (tb - ta))
            }
        }
    }

    /// `∫_{t_ref}^t τ(s) ds`. Tabulated drives integrate the piecewise-linear
    /// interpolant exactly, which is the trapezoid rule on the sample grid.
    pub fn integral(&self, t: f64) -> Result<f64> {
        match &self.kind {
            DriveKind::Constant(v) => Ok(v * (t - self.t_ref)),
            DriveKind::Sine {
                amplitude,
                frequency,
            } => {
                if *frequency == 0.0 {
                    Ok(0.0)
                } else {
                    Ok(
                        amplitude * ((frequency * self.t_ref).cos() - (frequency * t).cos())
                            / frequency,
                    )
                }
            }
            DriveKind::Tabulated(samples) => {
                self.check_covers(t, self.t_ref)?;
                Ok(tabulated_antiderivative(samples, t)
                    - tabulated_antiderivative(samples, self.t_ref))
            }
        }
    }
}

impl Default for DriveSpec {
    fn default() -> Self {
        Self::constant(1.0)
    }
}

// Index k with samples[k].0 <= t <= samples[k+1].0; t must be in range.
fn segment(samples: &[(f64, f64)], t: f64) -> usize {
    let upper = samples.partition_point(|(ts, _)| *ts <= t);
    upper.clamp(1, samples.len() - 1) - 1
}

// ∫ from the first sample to t of the linear interpolant.
fn tabulated_antiderivative(samples: &[(f64, f64)], t: f64) -> f64 {
    let k = segment(samples, t);
    let mut total = 0.0;
    for w in samples[..=k].windows(2) {
        total += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
    }
    let (ta, va) = samples[k];
    let (tb, vb) = samples[k + 1];
    let vt = va + (vb - va) * (t - ta) / (tb - ta);
    total + 0.5 * (va + vt) * (t - ta)
}

/// Parameters `(ω, λ, κ, ħ, τ)` of the Hamiltonian family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub omega: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub hbar: f64,
    pub drive: DriveSpec,
}

impl HamiltonianParams {
    /// Time-independent member: `τ ≡ 1`, `ħ = 1`.
    pub fn new(omega: f64, lambda: f64, kappa: f64) -> Self {
        Self {
            omega,
            lambda,
            kappa,
            hbar: 1.0,
            drive: DriveSpec::default(),
        }
    }

    pub fn with_drive(mut self, drive: DriveSpec) -> Self {
        self.drive = drive;
        self
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "hbar must be positive, got {}",
                self.hbar
            )));
        }
        for (name, v) in [
            ("omega", self.omega),
            ("lambda", self.lambda),
            ("kappa", self.kappa),
            ("t_ref", self.drive.t_ref),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self, REGIME_TIE_TOL)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    PtSymmetric,
    SpontaneouslyBroken,
    ExceptionalPoint,
}

/// `|λ| > |κ|` is 𝒫𝒯-symmetric, `|λ| < |κ|` broken, and a tie within
/// `tol·max(|λ|, |κ|, 1)` is the exceptional point.
pub fn classify_regime(p: &HamiltonianParams, tol: f64) -> Regime {
    let (l, k) = (p.lambda.abs(), p.kappa.abs());
    let gap = l - k;
    if gap.abs() <= tol * l.max(k).max(1.0) {
        Regime::ExceptionalPoint
    } else if gap > 0.0 {
        Regime::PtSymmetric
    } else {
        Regime::SpontaneouslyBroken
    }
}

/// Coefficients of `c₀𝕀 + c₁σ_x + c₂σ_y + c₃σ_z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliCoefficients {
    pub c0: Complex,
    pub c1: Complex,
    pub c2: Complex,
    pub c3: Complex,
}

impl PauliCoefficients {
    /// `c₀ = tr(A)/2`, `c_k = tr(σ_k A)/2`.
    pub fn decompose(a: &ComplexMatrix2) -> Self {
        Self {
            c0: (a.a11 + a.a22) / 2.0,
            c1: (a.a12 + a.a21) / 2.0,
            c2: (a.a12 - a.a21) * I / 2.0,
            c3: (a.a11 - a.a22) / 2.0,
        }
    }

    pub fn compose(&self) -> ComplexMatrix2 {
        ComplexMatrix2::new(
            self.c0 + self.c3,
            self.c1 - I * self.c2,
            self.c1 + I * self.c2,
            self.c0 - self.c3,
        )
    }

    /// The vector part `(c₁, c₂, c₃)`.
    pub fn vector(&self) -> [Complex; 3] {
        [self.c1, self.c2, self.c3]
    }
}

/// `H(t) = −½(ω𝕀 + λτ(t)σ_z + iκτ(t)σ_x)`.
pub fn hamiltonian_at(p: &HamiltonianParams, t: f64) -> Result<ComplexMatrix2> {
    Ok(hamiltonian_coefficients(p, t)?.compose())
}

/// Pauli coefficients of `H(t)`: `h₀ = −ω/2`, `h₁ = −iκτ/2`, `h₂ = 0`, `h₃ = −λτ/2`.
pub fn hamiltonian_coefficients(p: &HamiltonianParams, t: f64) -> Result<PauliCoefficients> {
    let tau = p.drive.value(t)?;
    Ok(PauliCoefficients {
        c0: c(-0.5 * p.omega, 0.0),
        c1: c(0.0, -0.5 * p.kappa * tau),
        c2: c(0.0, 0.0),
        c3: c(-0.5 * p.lambda * tau, 0.0),
    })
}

/// The parity operator `𝒫 = σ_z`.
pub fn parity() -> ComplexMatrix2 {
    ComplexMatrix2::sigma_z()
}

/// An antilinear operator `v ↦ L·conj(v)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AntilinearOp {
    pub linear_part: ComplexMatrix2,
}

impl AntilinearOp {
    pub fn apply(&self, v: &ComplexVector2) -> ComplexVector2 {
        self.linear_part.apply(&v.conj())
    }

    /// `‖L·conj(A)·L⁻¹ − A‖`: zero iff `A` commutes with this operator.
    pub fn commutation_residual(&self, a: &ComplexMatrix2) -> Result<f64> {
        let inv = self.linear_part.inverse()?;
        Ok((self.linear_part * a.conj() * inv - *a).frobenius_norm())
    }
}

/// `𝒫𝒯 = σ_z ∘ complex conjugation`.
pub fn pt_operator() -> AntilinearOp {
    AntilinearOp {
        linear_part: parity(),
    }
}

pub fn apply_antilinear(op: &AntilinearOp, v: &ComplexVector2) -> ComplexVector2 {
    op.apply(v)
}

/// `‖σ_z·conj(A)·σ_z − A‖`, the linear form of `[𝒫𝒯, A] = 0`.
pub fn pt_commutation_residual(a: &ComplexMatrix2) -> f64 {
    let p = parity();
    (p * a.conj() * p - *a).frobenius_norm()
}

/// 𝒫𝒯-symmetry residual of `H(t)`.
pub fn pt_symmetry_residual(p: &HamiltonianParams, t: f64) -> Result<f64> {
    Ok(pt_commutation_residual(&hamiltonian_at(p, t)?))
}

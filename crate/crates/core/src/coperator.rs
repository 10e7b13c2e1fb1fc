//! 𝒞-operators, metrics `ρ = 𝒫𝒞` and Dyson maps.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::biortho::BiorthoSystem;
use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix2, DEFAULT_TOL};
use crate::lr_solver::{lr_residual, regular_parts, ClosedFormInvariant, InvariantVariant};
use crate::model::{hamiltonian_at, parity, pt_commutation_residual, HamiltonianParams, Regime};
use crate::report::{Check, VerificationReport};

/// The weights `s_n = ±1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature(Vec<i8>);

impl Signature {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if let Some(&bad) = signs.iter().find(|s| s.abs() != 1) {
            return Err(Error::InvalidSignature(bad));
        }
        Ok(Self(signs))
    }

    pub fn plus_minus() -> Self {
        Self(vec![1, -1])
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }
}

impl FromStr for Signature {
    type Err = Error;

    /// Parses strings such as `+-` or `--`.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(Error::InvalidSignature(0)),
            })
            .collect::<Result<Vec<i8>>>()
            .and_then(Self::new)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(if *s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct COperator {
    pub matrix: ComplexMatrix2,
    pub signature: Signature,
    /// `None` for a time-independent operator.
    pub time: Option<f64>,
}

impl COperator {
    pub fn at(mut self, t: f64) -> Self {
        self.time = Some(t);
        self
    }

    /// `‖𝒞² − 𝕀‖`.
    pub fn involution_residual(&self) -> f64 {
        (self.matrix * self.matrix - ComplexMatrix2::identity()).frobenius_norm()
    }

    /// `‖σ_z𝒞†σ_z − 𝒞‖`.
    pub fn pseudo_hermiticity_residual(&self) -> f64 {
        let p = parity();
        (p * self.matrix.adjoint() * p - self.matrix).frobenius_norm()
    }
}

/// `𝒞 = Σ_n s_n |Ψ_n⟩⟨Φ_n|`.
pub fn c_from_system(sys: &BiorthoSystem, sig: &Signature) -> Result<COperator> {
    if sig.len() != sys.len() {
        return Err(Error::SignatureLength {
            expected: sys.len(),
            got: sig.len(),
        });
    }
    let scale: f64 = sys
        .pairs
        .iter()
        .map(|p| p.right.norm() * p.left.norm())
        .sum::<f64>()
        .max(1.0);
    let residual = sys.completeness_residual();
    if !(residual <= DEFAULT_TOL * scale) {
        return Err(Error::InvalidSystem { residual });
    }
    let weights: Vec<f64> = sig.signs().iter().map(|&s| f64::from(s)).collect();
    Ok(COperator {
        matrix: sys.weighted_sum(&weights),
        signature: sig.clone(),
        time: None,
    })
}

/// `𝒞² = 𝕀`, `[𝒫𝒯, 𝒞] = 0` and `[H, 𝒞] = 0`.
pub fn static_constraint_suite(
    c_op: &COperator,
    h: &ComplexMatrix2,
    tol: f64,
) -> VerificationReport {
    let mut report = VerificationReport::new();
    report.push(Check::new("c_squared", c_op.involution_residual(), tol));
    report.push(Check::new(
        "pt_commutation",
        pt_commutation_residual(&c_op.matrix),
        tol,
    ));
    report.push(Check::new(
        "h_commutator",
        h.commutator(&c_op.matrix).frobenius_norm(),
        tol,
    ));
    report
}

/// `𝒞²(t) = 𝕀`, `[𝒫𝒯, 𝒞(t)] = 0` and `iħ∂_t𝒞 = [H, 𝒞]` at time `t`.
///
/// The antilinear 𝒫𝒯 also reverses time about the drive origin `t_ref`, so
/// the second check compares `σ_z·conj(𝒞(2t_ref − t))·σ_z` with `𝒞(t)`.
pub fn td_constraint_suite<F>(
    c_provider: F,
    p: &HamiltonianParams,
    t: f64,
    fd_step: f64,
    tol: f64,
) -> Result<VerificationReport>
where
    F: Fn(f64) -> Result<ComplexMatrix2>,
{
    let c_t = c_provider(t)?;
    let mut report = VerificationReport::new();
    report.push(
        Check::new(
            "c_squared",
            (c_t * c_t - ComplexMatrix2::identity()).frobenius_norm(),
            tol,
        )
        .at(t),
    );
    let reflected = c_provider(2.0 * p.drive.t_ref - t)?;
    let sz = parity();
    let pt = (sz * reflected.conj() * sz - c_t).frobenius_norm();
    report.push(Check::new("pt_commutation", pt, tol).at(t));
    report.push(Check::new("lr_equation", lr_residual(&c_provider, p, t, fd_step)?, tol).at(t));
    Ok(report)
}

/// A Hermitian metric together with its spectral summary.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricOperator {
    pub matrix: ComplexMatrix2,
    pub time: Option<f64>,
    pub det: f64,
    pub max_eigenvalue: f64,
    pub min_eigenvalue: f64,
    pub positive_definite: bool,
}

impl MetricOperator {
    /// Fails with `NotHermitian` beyond `tol`; positivity is recorded, not required.
    pub fn new(matrix: ComplexMatrix2, time: Option<f64>, tol: f64) -> Result<Self> {
        let (hi, lo) = matrix.hermitian_eigenvalues(tol)?;
        Ok(Self {
            matrix,
            time,
            det: matrix.det().re,
            max_eigenvalue: hi,
            min_eigenvalue: lo,
            positive_definite: lo > 0.0,
        })
    }
}

/// `ρ = 𝒫𝒞`.
pub fn metric_from_c(c_op: &COperator, tol: f64) -> Result<MetricOperator> {
    MetricOperator::new(parity() * c_op.matrix, c_op.time, tol)
}

/// `‖iħ∂_tρ − H†ρ + ρH‖` by central differences.
pub fn quasi_hermiticity_residual<F>(
    rho_provider: F,
    p: &HamiltonianParams,
    t: f64,
    fd_step: f64,
) -> Result<f64>
where
    F: Fn(f64) -> Result<ComplexMatrix2>,
{
    let drho = (rho_provider(t + fd_step)? - rho_provider(t - fd_step)?).scale_real(0.5 / fd_step);
    let rho = rho_provider(t)?;
    let h = hamiltonian_at(p, t)?;
    let residual = drho.scale(c(0.0, p.hbar)) - h.adjoint() * rho + rho * h;
    Ok(residual.frobenius_norm())
}

/// Closed-form metrics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricForm {
    PtSymmetric,
    Broken,
    ExceptionalPoint,
    /// Valid across all regimes.
    FullTd,
    /// Limit of `FullTd` at `|λ| = |κ|`.
    EpLimit,
}

impl MetricForm {
    /// The invariant whose `𝒫`-multiple this metric is, if any.
    pub fn invariant_variant(self) -> Option<InvariantVariant> {
        match self {
            Self::PtSymmetric => Some(InvariantVariant::PtForm),
            Self::Broken => Some(InvariantVariant::BrokenForm),
            Self::ExceptionalPoint => Some(InvariantVariant::EpForm),
            Self::FullTd => Some(InvariantVariant::FullTd),
            Self::EpLimit => None,
        }
    }
}

/// Closed-form `ρ(t)`; the time argument enters through `∫τ/ħ`.
pub fn closed_form_metric(
    form: MetricForm,
    p: &HamiltonianParams,
    t: f64,
) -> Result<MetricOperator> {
    let (l, k) = (p.lambda, p.kappa);
    if form == MetricForm::EpLimit {
        p.validate()?;
        if p.regime() != Regime::ExceptionalPoint {
            return Err(Error::RegimeMismatch {
                variant: "EPLimit",
                regime: p.regime(),
            });
        }
    }
    let s = match form.invariant_variant() {
        Some(v) => ClosedFormInvariant::new(v, p.clone())?.scaled_time(t)?,
        None => p.drive.integral(t)? / p.hbar,
    };
    let (diag, re, im) = match form {
        MetricForm::PtSymmetric => {
            let xi = (l * l - k * k).sqrt();
            let (sin, cos) = (xi * s).sin_cos();
            (
                (SQRT_2 * l + k * sin) / xi,
                cos,
                (SQRT_2 * k + l * sin) / xi,
            )
        }
        MetricForm::Broken => {
            let xi = (k * k - l * l).sqrt();
            let (sinh, cosh) = ((xi * s).sinh(), (xi * s).cosh());
            (
                (SQRT_2 * k * cosh - l) / xi,
                SQRT_2 * sinh,
                (SQRT_2 * l * cosh - k) / xi,
            )
        }
        MetricForm::ExceptionalPoint => {
            let ks = k * s;
            (
                ks * ks / SQRT_2 + ks + SQRT_2,
                1.0 + SQRT_2 * ks,
                0.5 * ks * (SQRT_2 * ks + 2.0),
            )
        }
        MetricForm::FullTd => {
            let (f, g) = regular_parts((k * k - l * l) * s * s)?;
            (1.0 + k * k * s * s * f, k * s * g, k * l * s * s * f)
        }
        MetricForm::EpLimit => (1.0 + 0.5 * k * k * s * s, k * s, 0.5 * k * l * s * s),
    };
    let matrix = ComplexMatrix2::new(c(diag, 0.0), c(re, im), c(re, -im), c(diag, 0.0));
    MetricOperator::new(matrix, Some(t), DEFAULT_TOL)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DysonConstruction {
    /// Hermitian positive square root of `ρ`.
    PsdSqrt,
    /// Rows are the dual (left) eigenvectors `⟨Φ_n|`.
    EigenvectorRows,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DysonMap {
    pub matrix: ComplexMatrix2,
    pub construction: DysonConstruction,
}

impl DysonMap {
    /// `ηAη⁻¹`.
    pub fn similarity(&self, a: &ComplexMatrix2) -> Result<ComplexMatrix2> {
        Ok(self.matrix * *a * self.matrix.inverse()?)
    }

    /// `‖η†η − ρ‖`.
    pub fn metric_residual(&self, rho: &ComplexMatrix2) -> f64 {
        (self.matrix.adjoint() * self.matrix - *rho).frobenius_norm()
    }
}

/// `η = √ρ`, so that `η = η†` and `η² = ρ`.
pub fn dyson_map(rho: &MetricOperator, tol: f64) -> Result<DysonMap> {
    Ok(DysonMap {
        matrix: rho.matrix.psd_sqrt(tol)?,
        construction: DysonConstruction::PsdSqrt,
    })
}

/// `η` with rows `⟨Φ_n|`, the inverse of the right-eigenvector matrix, so that
/// `ηAη⁻¹ = diag(λ_n)` in the order of `sys`.
pub fn dyson_from_eigenvectors(sys: &BiorthoSystem) -> Result<DysonMap> {
    let [first, second] = match sys.pairs.as_slice() {
        [a, b] => [a, b],
        _ => {
            return Err(Error::SignatureLength {
                expected: 2,
                got: sys.len(),
            })
        }
    };
    Ok(DysonMap {
        matrix: ComplexMatrix2::from_rows(first.left.conj(), second.left.conj()),
        construction: DysonConstruction::EigenvectorRows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biortho::{biortho_system, biortho_system_ordered, PairOrdering};
    use crate::linalg::{Complex, ComplexVector2, I};
    use crate::model::DriveSpec;
    use proptest::prelude::*;

    fn static_params() -> HamiltonianParams {
        HamiltonianParams::new(1.0, 2.0, 1.0)
    }

    fn static_c() -> COperator {
        let h = hamiltonian_at(&static_params(), 0.0).unwrap();
        c_from_system(&biortho_system(&h).unwrap(), &Signature::plus_minus()).unwrap()
    }

    #[test]
    fn signature_parsing() {
        assert_eq!("+-".parse::<Signature>().unwrap(), Signature::plus_minus());
        assert_eq!("-+".parse::<Signature>().unwrap().signs(), &[-1, 1]);
        assert!("+x".parse::<Signature>().is_err());
        assert_eq!(Signature::new(vec![1, 0]), Err(Error::InvalidSignature(0)));
        assert_eq!(Signature::plus_minus().to_string(), "+-");
    }

    #[test]
    fn static_c_matches_closed_form() {
        let s3 = 3f64.sqrt();
        let expected = ComplexMatrix2::new(c(2.0, 0.0), I, I, c(-2.0, 0.0)).scale_real(1.0 / s3);
        assert!((static_c().matrix - expected).max_abs() <= 1e-14);
    }

    #[test]
    fn uniform_signatures_give_identity() {
        let h = hamiltonian_at(&static_params(), 0.0).unwrap();
        let sys = biortho_system(&h).unwrap();
        let plus = c_from_system(&sys, &"++".parse().unwrap()).unwrap();
        let minus = c_from_system(&sys, &"--".parse().unwrap()).unwrap();
        assert!((plus.matrix - ComplexMatrix2::identity()).max_abs() < 1e-14);
        assert!((minus.matrix + ComplexMatrix2::identity()).max_abs() < 1e-14);
        let flipped = c_from_system(&sys, &Signature::plus_minus().negated()).unwrap();
        assert_eq!(flipped.matrix, -static_c().matrix);
    }

    #[test]
    fn c_from_system_errors() {
        let h = hamiltonian_at(&static_params(), 0.0).unwrap();
        let mut sys = biortho_system(&h).unwrap();
        assert!(matches!(
            c_from_system(&sys, &"+".parse().unwrap()),
            Err(Error::SignatureLength {
                expected: 2,
                got: 1
            })
        ));
        sys.pairs[1].left = sys.pairs[1].left.scale(c(2.0, 0.0));
        assert!(matches!(
            c_from_system(&sys, &Signature::plus_minus()),
            Err(Error::InvalidSystem { .. })
        ));
    }

    #[test]
    fn static_constraints() {
        let h = hamiltonian_at(&static_params(), 0.0).unwrap();
        let report = static_constraint_suite(&static_c(), &h, 1e-10);
        assert!(report.all_pass(), "{report:?}");
        assert_eq!(report.checks.len(), 3);

        let sigma_y = COperator {
            matrix: ComplexMatrix2::sigma_y(),
            signature: Signature::plus_minus(),
            time: None,
        };
        let r = static_constraint_suite(&sigma_y, &h, 1e-10);
        assert!(r.get("h_commutator").unwrap().value > 0.1);

        let identity = COperator {
            matrix: ComplexMatrix2::identity(),
            signature: "++".parse().unwrap(),
            time: None,
        };
        assert!(static_constraint_suite(&identity, &h, 1e-10).all_pass());
    }

    #[test]
    fn td_constraints() {
        for (l, k) in [(2.0, 1.0), (1.0, 2.0), (1.0, 1.0)] {
            let p = HamiltonianParams::new(1.0, l, k).with_drive(DriveSpec::sine(1.0, 1.0));
            let cf = ClosedFormInvariant::new(InvariantVariant::FullTd, p.clone()).unwrap();
            for t in [0.0, 1.3, 4.9] {
                let r = td_constraint_suite(cf.as_provider(), &p, t, 1e-5, 1e-8).unwrap();
                assert!(r.all_pass(), "{l} {k} {t}: {r:?}");
                // Without the time reflection the antilinear check fails off t_ref.
                let m = cf.matrix(t).unwrap();
                assert!(pt_commutation_residual(&m) > 1e-3);
            }
        }
        // The static 𝒞 is proportional to the traceless part of H, which the
        // drive only rescales, so it stays an invariant of the driven family.
        let p = static_params().with_drive(DriveSpec::sine(1.0, 1.0));
        let fixed = static_c().matrix;
        let r = td_constraint_suite(|_| Ok(fixed), &p, 0.9, 1e-5, 1e-8).unwrap();
        assert!(r.get("lr_equation").unwrap().value < 1e-12);
        let other = HamiltonianParams::new(1.0, 1.0, 2.0).with_drive(DriveSpec::sine(1.0, 1.0));
        let r = td_constraint_suite(|_| Ok(fixed), &other, 0.9, 1e-5, 1e-8).unwrap();
        assert!(r.get("lr_equation").unwrap().value > 1e-3);

        for sign in [1.0, -1.0] {
            let id = ComplexMatrix2::identity().scale_real(sign);
            let r = td_constraint_suite(|_| Ok(id), &p, 0.9, 1e-5, 1e-12).unwrap();
            assert!(r.all_pass());
        }
    }

    #[test]
    fn metric_from_static_c() {
        let rho = metric_from_c(&static_c(), DEFAULT_TOL).unwrap();
        let s3 = 3f64.sqrt();
        let expected = ComplexMatrix2::new(c(2.0, 0.0), I, -I, c(2.0, 0.0)).scale_real(1.0 / s3);
        assert!((rho.matrix - expected).max_abs() < 1e-14);
        assert!((rho.max_eigenvalue - 3.0 / s3).abs() < 1e-14);
        assert!((rho.min_eigenvalue - 1.0 / s3).abs() < 1e-14);
        assert!(rho.positive_definite);

        let plus = COperator {
            matrix: ComplexMatrix2::identity(),
            signature: "++".parse().unwrap(),
            time: None,
        };
        let parity_metric = metric_from_c(&plus, DEFAULT_TOL).unwrap();
        assert_eq!(parity_metric.matrix, ComplexMatrix2::sigma_z());
        assert!(!parity_metric.positive_definite);

        let bad = COperator {
            matrix: ComplexMatrix2::sigma_x(),
            ..plus
        };
        assert!(matches!(
            metric_from_c(&bad, DEFAULT_TOL),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn quasi_hermiticity_examples() {
        let p = static_params();
        let rho = metric_from_c(&static_c(), DEFAULT_TOL).unwrap().matrix;
        assert!(quasi_hermiticity_residual(|_| Ok(rho), &p, 0.0, 1e-5).unwrap() <= 1e-10);

        let h = hamiltonian_at(&p, 0.0).unwrap();
        let r =
            quasi_hermiticity_residual(|_| Ok(ComplexMatrix2::identity()), &p, 0.0, 1e-5).unwrap();
        assert!((r - (h.adjoint() - h).frobenius_norm()).abs() < 1e-15);
        assert!(r > 0.0);

        for (l, k) in [(2.0, 1.0), (1.0, 2.0), (1.0, 1.0)] {
            let p = HamiltonianParams::new(1.0, l, k).with_drive(DriveSpec::sine(1.0, 1.0));
            for t in [0.2, 2.0, 3.7] {
                let r = quasi_hermiticity_residual(
                    |s| Ok(closed_form_metric(MetricForm::FullTd, &p, s)?.matrix),
                    &p,
                    t,
                    1e-5,
                )
                .unwrap();
                assert!(r <= 1e-8, "{l} {k} {t}: {r}");
            }
        }
    }

    #[test]
    fn closed_form_metric_examples() {
        let p = static_params();
        let s3 = 3f64.sqrt();
        let rho = closed_form_metric(MetricForm::PtSymmetric, &p, 0.0).unwrap();
        let off = Complex::new(s3, SQRT_2) / s3;
        let expected = ComplexMatrix2::new(
            c(2.0 * SQRT_2 / s3, 0.0),
            off,
            off.conj(),
            c(2.0 * SQRT_2 / s3, 0.0),
        );
        assert!((rho.matrix - expected).max_abs() < 1e-15);

        let driven = p.clone().with_drive(DriveSpec::sine(1.0, 1.0));
        let at_origin =
            closed_form_metric(MetricForm::FullTd, &driven, std::f64::consts::FRAC_PI_2).unwrap();
        assert_eq!(at_origin.matrix, ComplexMatrix2::identity());

        assert!(matches!(
            closed_form_metric(MetricForm::Broken, &p, 0.0),
            Err(Error::RegimeMismatch { .. })
        ));
        assert!(matches!(
            closed_form_metric(MetricForm::EpLimit, &p, 0.0),
            Err(Error::RegimeMismatch { .. })
        ));
    }

    #[test]
    fn regime_metrics_are_parity_times_invariant() {
        let cases = [
            (MetricForm::PtSymmetric, 2.0, 1.0),
            (MetricForm::Broken, 1.0, 2.0),
            (MetricForm::Broken, 0.5, 1.0),
            (MetricForm::ExceptionalPoint, 1.0, 1.0),
            (MetricForm::FullTd, 0.5, 2.0),
            (MetricForm::FullTd, 2.0, 2.0),
        ];
        for (form, l, k) in cases {
            let p = HamiltonianParams::new(1.0, l, k);
            let cf =
                ClosedFormInvariant::new(form.invariant_variant().unwrap(), p.clone()).unwrap();
            for t in [0.0, 0.8, 3.0, 6.0] {
                let rho = closed_form_metric(form, &p, t).unwrap();
                let expected = parity() * cf.matrix(t).unwrap();
                let scale = expected.max_abs().max(1.0);
                assert!(
                    (rho.matrix - expected).max_abs() <= 1e-13 * scale,
                    "{form:?} {t}"
                );
                assert!(rho.positive_definite);
            }
        }
    }

    #[test]
    fn c_from_invariant_system_is_the_invariant() {
        for (l, k) in [(2.0, 1.0), (1.0, 2.0), (0.5, 0.5)] {
            let p = HamiltonianParams::new(1.0, l, k).with_drive(DriveSpec::sine(1.0, 1.0));
            let cf = ClosedFormInvariant::new(InvariantVariant::FullTd, p).unwrap();
            for t in [0.0, 1.0, 2.5] {
                let m = cf.matrix(t).unwrap();
                let sys = biortho_system(&m).unwrap();
                let c_op = c_from_system(&sys, &Signature::plus_minus()).unwrap();
                assert!((c_op.matrix - m).max_abs() < 1e-12);
                assert!(c_op.pseudo_hermiticity_residual() < 1e-12);
            }
        }
    }

    #[test]
    fn ep_limit_matches_full_td_nearby() {
        let k = 1.0;
        let drive = DriveSpec::sine(1.0, 1.0);
        let ep = HamiltonianParams::new(1.0, k, k).with_drive(drive.clone());
        for l in [k * (1.0 - 1e-4), k * (1.0 + 1e-4)] {
            let near = HamiltonianParams::new(1.0, l, k).with_drive(drive.clone());
            for t in [0.0, 1.0, 4.0] {
                let a = closed_form_metric(MetricForm::FullTd, &near, t)
                    .unwrap()
                    .matrix;
                let b = closed_form_metric(MetricForm::EpLimit, &ep, t)
                    .unwrap()
                    .matrix;
                assert!((a - b).max_abs() < 1e-3);
            }
        }
    }

    #[test]
    fn dyson_psd_sqrt() {
        let id = MetricOperator::new(ComplexMatrix2::identity(), None, DEFAULT_TOL).unwrap();
        assert_eq!(
            dyson_map(&id, DEFAULT_TOL).unwrap().matrix,
            ComplexMatrix2::identity()
        );

        let rho = metric_from_c(&static_c(), DEFAULT_TOL).unwrap();
        let eta = dyson_map(&rho, DEFAULT_TOL).unwrap();
        assert!(eta.metric_residual(&rho.matrix) < 1e-14);
        let h = hamiltonian_at(&static_params(), 0.0).unwrap();
        let small = eta.similarity(&h).unwrap();
        assert!(small.is_hermitian(1e-12));
        let (hi, lo) = small.hermitian_eigenvalues(1e-12).unwrap();
        let s3 = 3f64.sqrt();
        assert!((hi - (-0.5 + s3 / 2.0)).abs() < 1e-14);
        assert!((lo - (-0.5 - s3 / 2.0)).abs() < 1e-14);

        let parity_metric =
            MetricOperator::new(ComplexMatrix2::sigma_z(), None, DEFAULT_TOL).unwrap();
        assert!(matches!(
            dyson_map(&parity_metric, DEFAULT_TOL),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn dyson_from_eigenvector_rows() {
        let h = hamiltonian_at(&static_params(), 0.0).unwrap();
        let sys = biortho_system_ordered(&h, PairOrdering::Eigenvalue, DEFAULT_TOL).unwrap();
        let eta = dyson_from_eigenvectors(&sys).unwrap();
        let d = eta.similarity(&h).unwrap();
        let s3 = 3f64.sqrt();
        let expected = ComplexMatrix2::diag(c(-0.5 + s3 / 2.0, 0.0), c(-0.5 - s3 / 2.0, 0.0));
        assert!((d - expected).max_abs() < 1e-14);

        // The rows are proportional to the transposed right eigenvectors.
        for (n, pair) in sys.pairs.iter().enumerate() {
            let row = if n == 0 {
                ComplexVector2::new(eta.matrix.a11, eta.matrix.a12)
            } else {
                ComplexVector2::new(eta.matrix.a21, eta.matrix.a22)
            };
            let t = pair.right;
            let cross = row.v1 * t.v2 - row.v2 * t.v1;
            assert!(cross.norm() < 1e-14);
        }
    }

    fn pair_factor() -> impl Strategy<Value = Complex> {
        (0.05f64..20.0, -3.2f64..3.2).prop_map(|(r, a)| Complex::from_polar(r, a))
    }

    proptest! {
        #[test]
        fn constructed_c_is_pseudo_hermitian(l in -3.0f64..3.0, k in -3.0f64..3.0, t in 0.0f64..5.0) {
            let p = HamiltonianParams::new(1.0, l, k).with_drive(DriveSpec::sine(1.0, 1.0));
            let m = ClosedFormInvariant::new(InvariantVariant::FullTd, p).unwrap().matrix(t).unwrap();
            prop_assume!(m.max_abs() < 1e3);
            let sys = biortho_system(&m).unwrap();
            let c_op = c_from_system(&sys, &Signature::plus_minus()).unwrap();
            prop_assert!(c_op.pseudo_hermiticity_residual() <= 1e-10 * m.max_abs().max(1.0));
        }

        #[test]
        fn gauge_rescaling_leaves_c_unchanged(a in pair_factor(), b in pair_factor()) {
            let h = hamiltonian_at(&static_params(), 0.0).unwrap();
            let sys = biortho_system(&h).unwrap();
            let c0 = c_from_system(&sys, &Signature::plus_minus()).unwrap().matrix;
            let c1 = c_from_system(&sys.rescaled(&[a, b]), &Signature::plus_minus()).unwrap().matrix;
            prop_assert!((c0 - c1).max_abs() <= 1e-12);
        }
    }
}

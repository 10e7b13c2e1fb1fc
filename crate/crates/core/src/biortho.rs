//! Biorthonormal left/right eigensystems of non-Hermitian 2×2 matrices.
//!
//! Right vectors are unit-norm eigenvectors of `A`; left vectors are
//! eigenvectors of `A†` scaled so that `⟨Φ_n|Ψ_n⟩ = 1`. Only products
//! `|Ψ_n⟩⟨Φ_n|` are gauge-invariant, so this split is one choice among many.

use crate::error::{Error, Result};
use crate::linalg::{Complex, ComplexMatrix2, ComplexVector2, DEFAULT_TOL};
use crate::model::parity;

/// Condition number of the eigenvector matrix above which a system is rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiorthoPair {
    pub eigenvalue: Complex,
    /// `|Ψ_n⟩`
    pub right: ComplexVector2,
    /// `|Φ_n⟩`
    pub left: ComplexVector2,
}

impl BiorthoPair {
    /// `⟨σ_z Ψ|Ψ⟩`, real because σ_z is Hermitian.
    pub fn parity_norm(&self) -> f64 {
        parity().apply(&self.right).inner(&self.right).re
    }

    /// `|Ψ⟩ → c|Ψ⟩`, `|Φ⟩ → |Φ⟩/c̄`; leaves `|Ψ⟩⟨Φ|` and `⟨Φ|Ψ⟩` unchanged.
    pub fn rescaled(&self, factor: Complex) -> Self {
        Self {
            eigenvalue: self.eigenvalue,
            right: self.right.scale(factor),
            left: self.left.scale(factor.conj().inv()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiorthoSystem {
    pub pairs: Vec<BiorthoPair>,
    pub source: ComplexMatrix2,
}

/// How the pairs of a [`BiorthoSystem`] are ordered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PairOrdering {
    /// Positive parity norm `⟨Ψ|σ_zΨ⟩` first when the two norms have opposite
    /// signs; otherwise by eigenvalue.
    #[default]
    ParityNorm,
    /// Descending `(Re λ, Im λ)`.
    Eigenvalue,
}

/// Biorthonormal system of `a`, pairs ordered by [`PairOrdering::ParityNorm`].
pub fn biortho_system(a: &ComplexMatrix2) -> Result<BiorthoSystem> {
    biortho_system_ordered(a, PairOrdering::default(), DEFAULT_TOL)
}

pub fn biortho_system_ordered(
    a: &ComplexMatrix2,
    ordering: PairOrdering,
    tol: f64,
) -> Result<BiorthoSystem> {
    let right = a.eigen_with_tol(tol)?;
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    let degenerate = (right[0].eigenvalue - right[1].eigenvalue).norm() <= tol * scale;
    let mut pairs: Vec<BiorthoPair> = if degenerate {
        // Scalar matrix: any basis works, the standard one is self-dual.
        right
            .iter()
            .map(|p| BiorthoPair {
                eigenvalue: p.eigenvalue,
                right: p.right_vector,
                left: p.right_vector,
            })
            .collect()
    } else {
        let left = a.adjoint().eigen_with_tol(tol)?;
        let mut out = Vec::with_capacity(2);
        for r in &right {
            let d: Vec<f64> = left
                .iter()
                .map(|l| (r.eigenvalue - l.eigenvalue.conj()).norm())
                .collect();
            let (best, other) = if d[0] <= d[1] { (0, 1) } else { (1, 0) };
            if d[other] <= tol * scale {
                return Err(Error::AmbiguousPairing);
            }
            out.push(BiorthoPair {
                eigenvalue: r.eigenvalue,
                right: r.right_vector,
                left: left[best].right_vector,
            });
        }
        out
    };

    for pair in &mut pairs {
        let overlap = pair.left.inner(&pair.right);
        if overlap.norm() <= f64::EPSILON {
            return Err(Error::NearlyDefective {
                condition: f64::INFINITY,
                limit: MAX_CONDITION,
            });
        }
        pair.left = pair.left.scale(overlap.inv().conj());
    }

    let condition = pairs.iter().map(|p| p.right.norm_sqr()).sum::<f64>().sqrt()
        * pairs.iter().map(|p| p.left.norm_sqr()).sum::<f64>().sqrt();
    if condition > MAX_CONDITION {
        return Err(Error::NearlyDefective {
            condition,
            limit: MAX_CONDITION,
        });
    }

    if ordering == PairOrdering::ParityNorm {
        let (p0, p1) = (pairs[0].parity_norm(), pairs[1].parity_norm());
        if p0 * p1 < 0.0 && p0.abs().min(p1.abs()) > tol && p1 > 0.0 {
            pairs.swap(0, 1);
        }
    }

    Ok(BiorthoSystem { pairs, source: *a })
}

impl BiorthoSystem {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `Σ_n w_n |Ψ_n⟩⟨Φ_n|`.
    pub fn weighted_sum(&self, weights: &[f64]) -> ComplexMatrix2 {
        self.pairs
            .iter()
            .zip(weights)
            .fold(ComplexMatrix2::zero(), |acc, (p, w)| {
                acc + p.right.outer(&p.left).scale_real(*w)
            })
    }

    /// `max_{n,m} |⟨Φ_n|Ψ_m⟩ − δ_nm|`.
    pub fn cross_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (n, pn) in self.pairs.iter().enumerate() {
            for (m, pm) in self.pairs.iter().enumerate() {
                let target = if n == m { 1.0 } else { 0.0 };
                worst = worst.max((pn.left.inner(&pm.right) - target).norm());
            }
        }
        worst
    }

    pub fn completeness_residual(&self) -> f64 {
        completeness_residual(self)
    }

    /// Eigenrelation residual `max_n max(‖AΨ − λΨ‖, ‖A†Φ − λ̄Φ‖)`.
    pub fn eigen_residual(&self) -> f64 {
        let adj = self.source.adjoint();
        self.pairs
            .iter()
            .map(|p| {
                let r = self.source.apply(&p.right) - p.right.scale(p.eigenvalue);
                let l = adj.apply(&p.left) - p.left.scale(p.eigenvalue.conj());
                r.norm().max(l.norm())
            })
            .fold(0.0, f64::max)
    }

    pub fn rescaled(&self, factors: &[Complex]) -> Self {
        Self {
            pairs: self
                .pairs
                .iter()
                .zip(factors)
                .map(|(p, f)| p.rescaled(*f))
                .collect(),
            source: self.source,
        }
    }
}

/// `‖Σ_n |Ψ_n⟩⟨Φ_n| − 𝕀‖`.
pub fn completeness_residual(sys: &BiorthoSystem) -> f64 {
    let ones = vec![1.0; sys.len()];
    (sys.weighted_sum(&ones) - ComplexMatrix2::identity()).frobenius_norm()
}

/// How far each left vector is from `s_n·σ_z|Ψ_n⟩`.
///
/// Both sides are gauge-dependent, so each pair is first brought to the gauge
/// with `|⟨Ψ|σ_zΨ⟩| = 1` (right scaled by `1/√|p|`, left by `√|p|`). In that
/// gauge a σ_z-linked pair satisfies `Φ = sign(p)·σ_zΨ` exactly, so the
/// residual vanishes precisely when `s_n` equals the sign of the parity norm.
/// Pairs with vanishing parity norm are compared without rescaling.
pub fn check_left_right_parity_relation(sys: &BiorthoSystem, signs: &[i8]) -> f64 {
    let p = parity();
    sys.pairs
        .iter()
        .zip(signs)
        .map(|(pair, &s)| {
            let norm = pair.parity_norm();
            let (right, left) = if norm.abs() > f64::EPSILON {
                let k = norm.abs().sqrt();
                (
                    pair.right.scale((1.0 / k).into()),
                    pair.left.scale(k.into()),
                )
            } else {
                (pair.right, pair.left)
            };
            (left - p.apply(&right).scale(f64::from(s).into())).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, I, ONE, ZERO};
    use crate::model::{hamiltonian_at, HamiltonianParams};
    use proptest::prelude::*;

    fn static_h() -> ComplexMatrix2 {
        hamiltonian_at(&HamiltonianParams::new(1.0, 2.0, 1.0), 0.0).unwrap()
    }

    fn parallel(a: &ComplexVector2, b: &ComplexVector2) -> bool {
        (a.inner(b).norm() - a.norm() * b.norm()).abs() <= 1e-12 * a.norm() * b.norm()
    }

    #[test]
    fn sigma_z_is_self_dual() {
        let sys = biortho_system(&ComplexMatrix2::sigma_z()).unwrap();
        assert_eq!(sys.pairs[0].eigenvalue, ONE);
        assert_eq!(sys.pairs[0].right, ComplexVector2::e1());
        assert_eq!(sys.pairs[0].left, ComplexVector2::e1());
        assert_eq!(sys.pairs[1].eigenvalue, -ONE);
        assert_eq!(sys.pairs[1].right.v1, ZERO);
        assert_eq!(sys.pairs[1].right.v2.norm(), 1.0);
        assert_eq!(sys.pairs[1].left, sys.pairs[1].right);
        assert_eq!(completeness_residual(&sys), 0.0);
    }

    #[test]
    fn static_hamiltonian_right_vectors() {
        let (lambda, kappa) = (2.0f64, 1.0f64);
        let xi = (lambda * lambda - kappa * kappa).sqrt();
        let sys = biortho_system(&static_h()).unwrap();
        assert!(sys.completeness_residual() < 1e-14);
        assert!(sys.cross_residual() < 1e-14);
        assert!(sys.eigen_residual() < 1e-14);
        for pair in &sys.pairs {
            // E± = −ω/2 ± ξ/2 ↔ (i(−λ ± ξ), κ)ᵀ
            let sign = if pair.eigenvalue.re > -0.5 { 1.0 } else { -1.0 };
            let expected = ComplexVector2::new(c(0.0, -lambda + sign * xi), c(kappa, 0.0));
            assert!(parallel(&pair.right, &expected));
        }
        // Positive parity norm first: the lower level E₋.
        assert!(sys.pairs[0].eigenvalue.re < sys.pairs[1].eigenvalue.re);
        assert!(sys.pairs[0].parity_norm() > 0.0 && sys.pairs[1].parity_norm() < 0.0);

        let by_value =
            biortho_system_ordered(&static_h(), PairOrdering::Eigenvalue, DEFAULT_TOL).unwrap();
        assert!(by_value.pairs[0].eigenvalue.re > by_value.pairs[1].eigenvalue.re);
    }

    #[test]
    fn exceptional_point_is_defective() {
        let h = hamiltonian_at(&HamiltonianParams::new(1.0, 1.0, 1.0), 0.0).unwrap();
        assert!(matches!(biortho_system(&h), Err(Error::Defective { .. })));
    }

    #[test]
    fn nearly_defective_is_rejected() {
        let near_jordan = ComplexMatrix2::from_real(0.0, 1.0, 1e-30, 0.0);
        assert!(matches!(
            biortho_system_ordered(&near_jordan, PairOrdering::Eigenvalue, 1e-300),
            Err(Error::NearlyDefective { .. })
        ));
        assert!(matches!(
            biortho_system(&near_jordan),
            Err(Error::Defective { .. })
        ));
        // Close to the exceptional point but still well conditioned.
        let h = hamiltonian_at(&HamiltonianParams::new(1.0, 1.0 + 1e-12, 1.0), 0.0).unwrap();
        assert!(biortho_system(&h).is_ok());
    }

    #[test]
    fn parity_relation_for_static_hamiltonian() {
        let sys = biortho_system(&static_h()).unwrap();
        // Pairs are (E₋, E₊): |Φ_±⟩ = ∓𝒫|Ψ_±⟩ reads (+, −) in this order.
        assert!(check_left_right_parity_relation(&sys, &[1, -1]) < 1e-12);
        assert!(check_left_right_parity_relation(&sys, &[-1, 1]) > 1.0);
        let by_value =
            biortho_system_ordered(&static_h(), PairOrdering::Eigenvalue, DEFAULT_TOL).unwrap();
        assert!(check_left_right_parity_relation(&by_value, &[-1, 1]) < 1e-12);
    }

    #[test]
    fn parity_relation_fails_for_sigma_x() {
        let sys = biortho_system(&ComplexMatrix2::sigma_x()).unwrap();
        for signs in [[1, 1], [1, -1], [-1, 1], [-1, -1]] {
            assert!(check_left_right_parity_relation(&sys, &signs) > 0.5);
        }
    }

    #[test]
    fn completeness_detects_rank_deficiency() {
        let mut sys = biortho_system(&ComplexMatrix2::sigma_z()).unwrap();
        sys.pairs[1].left = ComplexVector2::zero();
        assert!((completeness_residual(&sys) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hermitian_input_gives_orthonormal_basis() {
        let h = ComplexMatrix2::new(c(1.0, 0.0), c(0.5, -0.3), c(0.5, 0.3), c(-2.0, 0.0));
        let sys = biortho_system(&h).unwrap();
        for p in &sys.pairs {
            assert!((p.left - p.right).norm() < 1e-14);
        }
        assert!(sys.pairs[0].right.inner(&sys.pairs[1].right).norm() < 1e-14);
    }

    fn complex_in(bound: f64) -> impl Strategy<Value = Complex> {
        (-bound..bound, -bound..bound).prop_map(|(re, im)| c(re, im))
    }

    proptest! {
        #[test]
        fn random_systems_are_biorthonormal(
            a in complex_in(3.0), b in complex_in(3.0), d in complex_in(3.0), e in complex_in(3.0)
        ) {
            let m = ComplexMatrix2::new(a, b, d, e);
            if let Ok(sys) = biortho_system(&m) {
                let cond = sys.pairs.iter().map(|p| p.left.norm()).fold(0.0, f64::max);
                prop_assume!(cond < 1e3);
                prop_assert!(sys.cross_residual() <= 1e-10);
                prop_assert!(sys.completeness_residual() <= 1e-10);
            }
        }

        #[test]
        fn gauge_rescaling_leaves_weighted_sum_unchanged(
            re in 0.1f64..10.0, phase in 0.0f64..6.3, re2 in 0.1f64..10.0, phase2 in 0.0f64..6.3
        ) {
            let sys = biortho_system(&static_h()).unwrap();
            let f = [Complex::from_polar(re, phase), Complex::from_polar(re2, phase2)];
            let w = [1.0, -1.0];
            let before = sys.weighted_sum(&w);
            let after = sys.rescaled(&f).weighted_sum(&w);
            prop_assert!((before - after).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn rescaled_pair_keeps_overlap() {
        let sys = biortho_system(&static_h()).unwrap();
        let p = sys.pairs[0].rescaled(c(0.3, -2.0) * I);
        assert!((p.left.inner(&p.right) - ONE).norm() < 1e-14);
    }
}

//! Lewis-Riesenfeld invariants of the two-level family.
//!
//! Writing `I = ι₀𝕀 + ι⃗·σ⃗` and `H = h₀𝕀 + h⃗·σ⃗`, the equation `iħ∂_tI = [H, I]`
//! becomes `∂_tι₀ = 0`, `∂_tι⃗ = (2/ħ)Mι⃗` with `M_ij = −ε_ijk h_k`. This module
//! propagates that system by a midpoint exponential product and provides
//! closed-form invariants for cross-checks.

use std::f64::consts::SQRT_2;
use std::ops::Mul;

use crate::error::{Error, Result};
use crate::linalg::{c, Complex, ComplexMatrix2, DEFAULT_TOL, ZERO};
use crate::model::{
    hamiltonian_at, hamiltonian_coefficients, HamiltonianParams, PauliCoefficients,
};

/// Dense complex 3×3 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix3(pub [[Complex; 3]; 3]);

impl Matrix3 {
    pub const fn zero() -> Self {
        Self([[ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for k in 0..3 {
            m.0[k][k] = c(1.0, 0.0);
        }
        m
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self(self.0.map(|row| row.map(|x| x * s)))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = self.0[j][i];
            }
        }
        t
    }

    pub fn apply(&self, v: &[Complex; 3]) -> [Complex; 3] {
        let mut out = [ZERO; 3];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..3)
            .map(|j| (0..3).map(|i| self.0[i][j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }

    /// Scaling and squaring around a Taylor series, truncated once a term
    /// drops below `1e-17` of the partial sum.
    pub fn exp(&self) -> Self {
        let norm = self.norm1();
        if norm == 0.0 {
            return Self::identity();
        }
        let squarings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as i32
        } else {
            0
        };
        let a = self.scale(c(0.5f64.powi(squarings), 0.0));
        let mut sum = Self::identity();
        let mut term = Self::identity();
        for k in 1..=30 {
            term = (term * a).scale(c(1.0 / k as f64, 0.0));
            sum = sum + term;
            if term.norm1() <= 1e-17 * sum.norm1() {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum * sum;
        }
        sum
    }
}

impl Mul for Matrix3 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}

impl std::ops::Add for Matrix3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

/// `M_ij = −ε_ijk h_k`.
pub fn coefficient_matrix(h: &PauliCoefficients) -> Matrix3 {
    let [h1, h2, h3] = h.vector();
    Matrix3([[ZERO, -h3, h2], [h3, ZERO, -h1], [-h2, h1, ZERO]])
}

/// Pauli coefficients of an invariant at a given time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantState {
    pub iota0: Complex,
    pub iota: [Complex; 3],
    pub time: f64,
}

impl InvariantState {
    pub fn new(iota0: Complex, iota: [Complex; 3], time: f64) -> Self {
        Self { iota0, iota, time }
    }

    pub fn from_matrix(m: &ComplexMatrix2, time: f64) -> Self {
        let p = PauliCoefficients::decompose(m);
        Self {
            iota0: p.c0,
            iota: p.vector(),
            time,
        }
    }

    pub fn matrix(&self) -> ComplexMatrix2 {
        PauliCoefficients {
            c0: self.iota0,
            c1: self.iota[0],
            c2: self.iota[1],
            c3: self.iota[2],
        }
        .compose()
    }
}

fn propagator_factor(p: &HamiltonianParams, t_mid: f64, dt: f64) -> Result<Matrix3> {
    let h = hamiltonian_coefficients(p, t_mid)?;
    Ok(coefficient_matrix(&h)
        .scale(c(2.0 * dt / p.hbar, 0.0))
        .exp())
}

/// `ι⃗(t₁) = ∏_k exp((2/ħ)M(t_k + Δt/2)Δt)·ι⃗(t₀)`, later factors on the left.
/// `ι₀` is carried through unchanged; `init.time` is ignored in favour of `t0`.
pub fn time_ordered_propagate(
    p: &HamiltonianParams,
    init: &InvariantState,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<InvariantState> {
    if steps == 0 {
        return Err(Error::InvalidSteps);
    }
    p.validate()?;
    p.drive.check_covers(t0, t1)?;
    let dt = (t1 - t0) / steps as f64;
    let mut iota = init.iota;
    for k in 0..steps {
        let t_mid = t0 + (k as f64 + 0.5) * dt;
        iota = propagator_factor(p, t_mid, dt)?.apply(&iota);
    }
    Ok(InvariantState::new(init.iota0, iota, t1))
}

/// Propagates through each interval of `grid` with `steps_per_interval`
/// midpoint steps, returning the state at every grid time.
pub fn time_ordered_trajectory(
    p: &HamiltonianParams,
    init: &InvariantState,
    grid: &[f64],
    steps_per_interval: usize,
) -> Result<Vec<InvariantState>> {
    let Some(&first) = grid.first() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(grid.len());
    let mut state = InvariantState::new(init.iota0, init.iota, first);
    out.push(state);
    for w in grid.windows(2) {
        state = time_ordered_propagate(p, &state, w[0], w[1], steps_per_interval)?;
        out.push(state);
    }
    Ok(out)
}

/// The four closed-form solutions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InvariantVariant {
    /// `|λ| > |κ|`, time-independent coefficients.
    PtForm,
    /// `|λ| < |κ|`.
    BrokenForm,
    /// `λ = κ`.
    EpForm,
    /// Valid in every regime, any drive.
    FullTd,
}

impl InvariantVariant {
    pub const ALL: [Self; 4] = [Self::PtForm, Self::BrokenForm, Self::EpForm, Self::FullTd];

    pub fn name(self) -> &'static str {
        match self {
            Self::PtForm => "PTForm",
            Self::BrokenForm => "BrokenForm",
            Self::EpForm => "EPForm",
            Self::FullTd => "FullTD",
        }
    }

    /// `ι⃗` at the origin of the drive integral. `ι₀ = 0` throughout.
    pub fn initial_iota(self, p: &HamiltonianParams) -> Result<[Complex; 3]> {
        let (l, k) = (p.lambda, p.kappa);
        Ok(match self {
            Self::PtForm => {
                let xi = checked_xi(self, l * l - k * k, p)?;
                [
                    c(0.0, SQRT_2 * k / xi),
                    c(0.0, 1.0),
                    c(SQRT_2 * l / xi, 0.0),
                ]
            }
            Self::BrokenForm => {
                let xi = checked_xi(self, k * k - l * l, p)?;
                [
                    c(0.0, (SQRT_2 * l - k) / xi),
                    ZERO,
                    c((SQRT_2 * k - l) / xi, 0.0),
                ]
            }
            Self::EpForm => [ZERO, c(0.0, 1.0), c(SQRT_2, 0.0)],
            Self::FullTd => [ZERO, ZERO, c(1.0, 0.0)],
        })
    }
}

// √(xi²) for the regime-bound variants, rejecting the exceptional point first.
fn checked_xi(variant: InvariantVariant, xi_sq: f64, p: &HamiltonianParams) -> Result<f64> {
    let scale = p.lambda.abs().max(p.kappa.abs()).max(1.0);
    let xi = xi_sq.abs().sqrt();
    if xi <= DEFAULT_TOL * scale {
        return Err(Error::EpSingular {
            variant: variant.name(),
            xi,
        });
    }
    if xi_sq < 0.0 {
        return Err(Error::RegimeMismatch {
            variant: variant.name(),
            regime: p.regime(),
        });
    }
    Ok(xi)
}

/// Entries of `I = (1/ξ)[[−δ, γ₊], [γ₋, δ]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TemplateEntries {
    pub xi: f64,
    pub delta: f64,
    pub gamma_plus: Complex,
    pub gamma_minus: Complex,
}

impl TemplateEntries {
    /// `|δ² + γ₊γ₋ − ξ²|` relative to the largest of the three terms.
    pub fn identity_residual(&self) -> f64 {
        let product = self.gamma_plus * self.gamma_minus;
        let scale = (self.delta * self.delta)
            .max(product.norm())
            .max(self.xi * self.xi);
        if scale == 0.0 {
            return 0.0;
        }
        (self.delta * self.delta + product - self.xi * self.xi).norm() / scale
    }
}

/// A closed-form invariant bound to its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormInvariant {
    pub variant: InvariantVariant,
    pub params: HamiltonianParams,
}

impl ClosedFormInvariant {
    pub fn new(variant: InvariantVariant, params: HamiltonianParams) -> Result<Self> {
        params.validate()?;
        match variant {
            InvariantVariant::PtForm | InvariantVariant::BrokenForm => {
                variant.initial_iota(&params)?;
            }
            InvariantVariant::EpForm => {
                let scale = params.lambda.abs().max(params.kappa.abs()).max(1.0);
                if (params.lambda - params.kappa).abs() > DEFAULT_TOL * scale {
                    return Err(Error::RegimeMismatch {
                        variant: variant.name(),
                        regime: params.regime(),
                    });
                }
            }
            InvariantVariant::FullTd => {}
        }
        Ok(Self { variant, params })
    }

    /// Scaled time `∫_{t_ref}^t τ(s) ds / ħ`.
    pub fn scaled_time(&self, t: f64) -> Result<f64> {
        Ok(self.params.drive.integral(t)? / self.params.hbar)
    }

    pub fn initial_state(&self) -> Result<InvariantState> {
        Ok(InvariantState::new(
            ZERO,
            self.variant.initial_iota(&self.params)?,
            self.params.drive.t_ref,
        ))
    }

    /// `ξ`, `δ`, `γ±` at time `t`. For `FullTd` at the exceptional point all
    /// four vanish; use [`Self::matrix`] there.
    pub fn entries(&self, t: f64) -> Result<TemplateEntries> {
        let s = self.scaled_time(t)?;
        let (l, k) = (self.params.lambda, self.params.kappa);
        Ok(match self.variant {
            InvariantVariant::PtForm => {
                let xi = (l * l - k * k).sqrt();
                let (sin, cos) = (xi * s).sin_cos();
                let im = SQRT_2 * k + l * sin;
                TemplateEntries {
                    xi,
                    delta: -SQRT_2 * l - k * sin,
                    gamma_plus: c(xi * cos, im),
                    gamma_minus: c(-xi * cos, im),
                }
            }
            InvariantVariant::BrokenForm => {
                let xi = (k * k - l * l).sqrt();
                let (sinh, cosh) = ((xi * s).sinh(), (xi * s).cosh());
                let im = SQRT_2 * l * cosh - k;
                TemplateEntries {
                    xi,
                    delta: l - SQRT_2 * k * cosh,
                    gamma_plus: c(SQRT_2 * xi * sinh, im),
                    gamma_minus: c(-SQRT_2 * xi * sinh, im),
                }
            }
            InvariantVariant::EpForm => {
                let ks = k * s;
                let re = 1.0 + SQRT_2 * ks;
                let im = ks * ks / SQRT_2 + ks;
                TemplateEntries {
                    xi: 1.0,
                    delta: -ks * ks / SQRT_2 - ks - SQRT_2,
                    gamma_plus: c(re, im),
                    gamma_minus: c(-re, im),
                }
            }
            InvariantVariant::FullTd => {
                let xi = k * k - l * l;
                let (f, g) = regular_parts(xi * s * s)?;
                // With μ = √ξ·s: cosh μ − 1 = ξs²f and √ξ·sinh μ = ξsg.
                let cosh_m1 = xi * s * s * f;
                TemplateEntries {
                    xi,
                    delta: -xi - k * k * cosh_m1,
                    gamma_plus: c(k * xi * s * g, k * l * cosh_m1),
                    gamma_minus: c(-k * xi * s * g, k * l * cosh_m1),
                }
            }
        })
    }

    pub fn matrix(&self, t: f64) -> Result<ComplexMatrix2> {
        if self.variant == InvariantVariant::FullTd {
            return self.full_td_matrix(t);
        }
        let e = self.entries(t)?;
        Ok(ComplexMatrix2::new(
            c(-e.delta, 0.0),
            e.gamma_plus,
            e.gamma_minus,
            c(e.delta, 0.0),
        )
        .scale_real(1.0 / e.xi))
    }

    // Entries divided through by ξ analytically, so the form stays finite at ξ = 0.
    fn full_td_matrix(&self, t: f64) -> Result<ComplexMatrix2> {
        let s = self.scaled_time(t)?;
        let (l, k) = (self.params.lambda, self.params.kappa);
        let (f, g) = regular_parts((k * k - l * l) * s * s)?;
        let d = 1.0 + k * k * s * s * f;
        let re = k * s * g;
        let im = k * l * s * s * f;
        Ok(ComplexMatrix2::new(
            c(d, 0.0),
            c(re, im),
            c(-re, im),
            c(-d, 0.0),
        ))
    }

    pub fn as_provider(&self) -> impl Fn(f64) -> Result<ComplexMatrix2> + '_ {
        move |t| self.matrix(t)
    }
}

/// `f(x) = (cosh √x − 1)/x` and `g(x) = sinh(√x)/√x`, both entire in `x`.
///
/// Away from the origin they are evaluated on the principal branch of `√x` in
/// complex arithmetic and must come out real.
pub fn regular_parts(x: f64) -> Result<(f64, f64)> {
    if x.abs() < 1.0 {
        let mut f = 0.0;
        let mut g = 0.0;
        let mut power = 1.0;
        let mut fact_odd = 1.0; // (2k+1)!
        for k in 0..14 {
            let n = 2.0 * k as f64;
            let fact_even_next = fact_odd * (n + 2.0); // (2k+2)!
            g += power / fact_odd;
            f += power / fact_even_next;
            power *= x;
            fact_odd = fact_even_next * (n + 3.0);
        }
        return Ok((f, g));
    }
    let z = c(x, 0.0).sqrt();
    let f = (z.cosh() - 1.0) / x;
    let g = z.sinh() / z;
    for (value, quantity) in [(f, "cosh term"), (g, "sinh term")] {
        if value.im.abs() > DEFAULT_TOL * value.re.abs().max(1.0) {
            return Err(Error::NonRealResidue {
                quantity,
                residue: value.im,
            });
        }
    }
    Ok((f.re, g.re))
}

/// `‖iħ(I(t+h) − I(t−h))/(2h) − [H(t), I(t)]‖`.
pub fn lr_residual<F>(invariant: F, p: &HamiltonianParams, t: f64, fd_step: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<ComplexMatrix2>,
{
    let derivative = (invariant(t + fd_step)? - invariant(t - fd_step)?).scale_real(0.5 / fd_step);
    let h = hamiltonian_at(p, t)?;
    let lhs = derivative.scale(c(0.0, p.hbar));
    Ok((lhs - h.commutator(&invariant(t)?)).frobenius_norm())
}

/// Rescales an invariant with eigenvalues `{+a, −a}` to eigenvalues `{+1, −1}`,
/// taking `a` in the right half plane.
pub fn signature_normalize(i: &ComplexMatrix2, tol: f64) -> Result<ComplexMatrix2> {
    let pairs = i.eigen_with_tol(tol).map_err(|e| match e {
        Error::Defective { eigenvalue } => Error::NotTemplate {
            first: eigenvalue,
            second: eigenvalue,
        },
        other => other,
    })?;
    let (first, second) = (pairs[0].eigenvalue, pairs[1].eigenvalue);
    let scale = first.norm().max(second.norm()).max(1.0);
    if (first + second).norm() > tol * scale || first.norm() <= tol * scale {
        return Err(Error::NotTemplate { first, second });
    }
    let a = if first.re > 0.0 || (first.re == 0.0 && first.im > 0.0) {
        first
    } else {
        second
    };
    Ok(i.scale(a.inv()))
}

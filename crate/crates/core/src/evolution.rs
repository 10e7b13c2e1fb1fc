//! Paired Schrödinger evolution of right and left states, the 𝒞-operator
//! rebuilt from evolved states, and the Lewis-Riesenfeld phase.

use serde::{Deserialize, Serialize};

use crate::biortho::BiorthoSystem;
use crate::coperator::{COperator, Signature};
use crate::error::{Error, Result};
use crate::linalg::{c, Complex, ComplexMatrix2, ComplexVector2, ZERO};
use crate::lr_solver::ClosedFormInvariant;
use crate::model::{hamiltonian_at, HamiltonianParams};

/// States on a shared uniform time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolvedState {
    pub grid: Vec<f64>,
    /// `|Ψ(t)⟩`, evolved with `H`.
    pub right_states: Vec<ComplexVector2>,
    /// `|Φ(t)⟩`, evolved with `H†`.
    pub left_states: Vec<ComplexVector2>,
}

impl EvolvedState {
    /// Index of the grid point equal to `t` up to `1e-9` of the spacing.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let n = self.grid.len();
        if n == 0 {
            return Err(Error::OffGrid { t });
        }
        let k = self.grid.partition_point(|&g| g < t);
        let spacing = if n > 1 {
            (self.grid[n - 1] - self.grid[0]) / (n - 1) as f64
        } else {
            1.0
        };
        [k.saturating_sub(1), k.min(n - 1)]
            .into_iter()
            .find(|&i| (self.grid[i] - t).abs() <= 1e-9 * spacing.abs().max(f64::MIN_POSITIVE))
            .ok_or(Error::OffGrid { t })
    }

    /// `⟨Φ(t_k)|Ψ(t_k)⟩` along the grid.
    pub fn overlaps(&self) -> Vec<Complex> {
        self.left_states
            .iter()
            .zip(&self.right_states)
            .map(|(l, r)| l.inner(r))
            .collect()
    }
}

fn rk4_step<F>(f: F, t: f64, dt: f64, y: ComplexVector2) -> Result<ComplexVector2>
where
    F: Fn(f64, &ComplexVector2) -> Result<ComplexVector2>,
{
    let k1 = f(t, &y)?;
    let k2 = f(t + 0.5 * dt, &(y + k1 * (0.5 * dt)))?;
    let k3 = f(t + 0.5 * dt, &(y + k2 * (0.5 * dt)))?;
    let k4 = f(t + dt, &(y + k3 * dt))?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

/// Classical RK4 on `iħ∂_t|Ψ⟩ = H|Ψ⟩` and `iħ∂_t|Φ⟩ = H†|Φ⟩` simultaneously.
pub fn tdse_integrate(
    p: &HamiltonianParams,
    psi0: ComplexVector2,
    phi0: ComplexVector2,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<EvolvedState> {
    if steps == 0 {
        return Err(Error::InvalidSteps);
    }
    p.validate()?;
    p.drive.check_covers(t0, t1)?;
    let factor = c(0.0, -1.0 / p.hbar);
    let right = |t: f64, v: &ComplexVector2| Ok(hamiltonian_at(p, t)?.apply(v).scale(factor));
    let left =
        |t: f64, v: &ComplexVector2| Ok(hamiltonian_at(p, t)?.adjoint().apply(v).scale(factor));

    let dt = (t1 - t0) / steps as f64;
    let mut grid = Vec::with_capacity(steps + 1);
    let mut right_states = Vec::with_capacity(steps + 1);
    let mut left_states = Vec::with_capacity(steps + 1);
    let (mut psi, mut phi) = (psi0, phi0);
    grid.push(t0);
    right_states.push(psi);
    left_states.push(phi);
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        psi = rk4_step(right, t, dt, psi)?;
        phi = rk4_step(left, t, dt, phi)?;
        grid.push(if k + 1 == steps { t1 } else { t + dt });
        right_states.push(psi);
        left_states.push(phi);
    }
    Ok(EvolvedState {
        grid,
        right_states,
        left_states,
    })
}

/// Evolves every pair of `sys` over `[t0, t1]`.
pub fn evolve_system(
    p: &HamiltonianParams,
    sys: &BiorthoSystem,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<Vec<EvolvedState>> {
    sys.pairs
        .iter()
        .map(|pair| tdse_integrate(p, pair.right, pair.left, t0, t1, steps))
        .collect()
}

/// `𝒞(t) = Σ_n s_n |Ψ_n(t)⟩⟨Φ_n(t)|` at a grid time.
pub fn c_from_evolution(states: &[EvolvedState], sig: &Signature, t: f64) -> Result<COperator> {
    if states.len() != sig.len() {
        return Err(Error::SignatureLength {
            expected: states.len(),
            got: sig.len(),
        });
    }
    let mut matrix = ComplexMatrix2::zero();
    for (state, &s) in states.iter().zip(sig.signs()) {
        let k = state.index_of(t)?;
        matrix = matrix
            + state.right_states[k]
                .outer(&state.left_states[k])
                .scale_real(f64::from(s));
    }
    Ok(COperator {
        matrix,
        signature: sig.clone(),
        time: Some(t),
    })
}

/// Factor relating a Schrödinger solution to an invariant eigenstate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseConvention {
    /// `|Ψ(t)⟩ = e^{iα(t)}|Ψ^I(t)⟩`.
    #[default]
    ExpIAlpha,
    /// `|Ψ(t)⟩ = e^{iħα(t)}|Ψ^I(t)⟩`.
    ExpIHbarAlpha,
}

impl PhaseConvention {
    pub fn factor(self, alpha: f64, hbar: f64) -> Complex {
        let angle = match self {
            Self::ExpIAlpha => alpha,
            Self::ExpIHbarAlpha => hbar * alpha,
        };
        Complex::from_polar(1.0, angle)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTrace {
    pub grid: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Eigenstates in the continuity gauge, normalized in the ρ-inner product.
    pub states: Vec<ComplexVector2>,
    /// Largest `|Im α|` along the trace.
    pub imag_residue: f64,
    pub convention: PhaseConvention,
}

/// `α(t)` from `α̇ = ⟨Ψ^I|ρ(i∂_t − H/ħ)Ψ^I⟩ / ⟨Ψ^I|ρΨ^I⟩`, with `α(t₀) = 0`.
///
/// Eigenstates are sampled on a uniform grid, rescaled to unit ρ-norm and
/// rotated so consecutive overlaps are positive real. The derivative is a
/// second-order finite difference on that grid and `α` is integrated by the
/// trapezoid rule.
pub fn phase_alpha<E, R>(
    eigenstate: E,
    p: &HamiltonianParams,
    rho: R,
    t0: f64,
    t1: f64,
    steps: usize,
    convention: PhaseConvention,
) -> Result<PhaseTrace>
where
    E: Fn(f64) -> Result<ComplexVector2>,
    R: Fn(f64) -> Result<ComplexMatrix2>,
{
    if steps < 2 {
        return Err(Error::InvalidSteps);
    }
    p.validate()?;
    let dt = (t1 - t0) / steps as f64;
    let grid: Vec<f64> = (0..=steps)
        .map(|k| if k == steps { t1 } else { t0 + k as f64 * dt })
        .collect();

    let mut states: Vec<ComplexVector2> = Vec::with_capacity(grid.len());
    let mut metrics = Vec::with_capacity(grid.len());
    for &t in &grid {
        let r = rho(t)?;
        let raw = eigenstate(t)?;
        let norm_sq = raw.inner(&r.apply(&raw)).re;
        if !(norm_sq > 0.0) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: norm_sq,
            });
        }
        let mut v = raw * (1.0 / norm_sq.sqrt());
        if let Some(prev) = states.last() {
            let overlap = prev.inner(&v);
            let modulus = overlap.norm() / (prev.norm() * v.norm());
            if modulus < 0.5 {
                return Err(Error::BranchFlip {
                    t,
                    overlap: modulus,
                });
            }
            v = v.scale(overlap.conj() / overlap.norm());
        }
        states.push(v);
        metrics.push(r);
    }

    let rates: Vec<Complex> = (0..grid.len())
        .map(|k| {
            let deriv = stencil(&states, k, dt);
            let h = hamiltonian_at(p, grid[k])?;
            let v = states[k];
            let action = deriv.scale(c(0.0, 1.0)) - h.apply(&v) * (1.0 / p.hbar);
            let weighted = metrics[k].apply(&action);
            Ok(v.inner(&weighted) / v.inner(&metrics[k].apply(&v)))
        })
        .collect::<Result<_>>()?;

    let mut alpha = Vec::with_capacity(grid.len());
    let mut acc = ZERO;
    let mut imag_residue: f64 = 0.0;
    alpha.push(0.0);
    for k in 1..grid.len() {
        acc += (rates[k - 1] + rates[k]) * (0.5 * (grid[k] - grid[k - 1]));
        imag_residue = imag_residue.max(acc.im.abs());
        alpha.push(acc.re);
    }
    Ok(PhaseTrace {
        grid,
        alpha,
        states,
        imag_residue,
        convention,
    })
}

// Second-order derivative of a uniformly sampled sequence.
fn stencil(v: &[ComplexVector2], k: usize, dt: f64) -> ComplexVector2 {
    let n = v.len();
    if k == 0 {
        (v[1] * 4.0 - v[0] * 3.0 - v[2]) * (0.5 / dt)
    } else if k == n - 1 {
        (v[n - 1] * 3.0 - v[n - 2] * 4.0 + v[n - 3]) * (0.5 / dt)
    } else {
        (v[k + 1] - v[k - 1]) * (0.5 / dt)
    }
}

/// `max_k ‖iħ∂_tΨ − HΨ‖` for `Ψ_k = factor(α_k)·Ψ^I_k`, central differences
/// at interior grid points.
pub fn reconstruction_residual(trace: &PhaseTrace, p: &HamiltonianParams) -> Result<f64> {
    let psi: Vec<ComplexVector2> = trace
        .states
        .iter()
        .zip(&trace.alpha)
        .map(|(v, &a)| v.scale(trace.convention.factor(a, p.hbar)))
        .collect();
    let mut worst: f64 = 0.0;
    for k in 1..psi.len().saturating_sub(1) {
        let dt = trace.grid[k + 1] - trace.grid[k - 1];
        let deriv = (psi[k + 1] - psi[k - 1]) * (1.0 / dt);
        let h = hamiltonian_at(p, trace.grid[k])?;
        worst = worst.max((deriv.scale(c(0.0, p.hbar)) - h.apply(&psi[k])).norm());
    }
    Ok(worst)
}

/// Right eigenvector of a closed-form invariant for the eigenvalue nearest
/// `target`.
pub fn invariant_eigenstate(
    cf: &ClosedFormInvariant,
    target: f64,
) -> impl Fn(f64) -> Result<ComplexVector2> + '_ {
    move |t| {
        let pairs = cf.matrix(t)?.eigen()?;
        let best = pairs
            .iter()
            .min_by(|a, b| {
                (a.eigenvalue - target)
                    .norm()
                    .total_cmp(&(b.eigenvalue - target).norm())
            })
            .map(|e| e.right_vector);
        best.ok_or(Error::Singular)
    }
}

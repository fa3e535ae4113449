//! Independent verification of the derivative formulas.
//!
//! Nothing here reuses the auxiliary-solution machinery: finite
//! differences probe the one-parameter family `s -> lambda_n(q + s h)`
//! directly through the eigensolver, the perturbation sum rebuilds `M`
//! from neighbouring eigenpairs, and the Rayleigh and concavity probes
//! check the variational facts that make the ground-state second
//! derivative negative.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::eigen::{eigenpair, eigenvalue, BoundaryData};
use crate::error::{Error, Result};
use crate::frechet::{first_derivative, second_derivative_direct, solve_un, UnMethod};
use crate::mesh::{Grid, SampledFn};

/// Central finite differences of `s -> lambda_n(q + s h)` against the
/// analytic `L` and `M`.
#[derive(Debug, Clone, Serialize)]
pub struct FdReport {
    pub s_step: f64,
    pub fd_first: f64,
    pub fd_second: f64,
    pub richardson_first: f64,
    pub richardson_second: f64,
    pub analytic_l: f64,
    pub analytic_m: f64,
    pub first_gap_abs: f64,
    pub first_gap_rel: f64,
    pub second_gap_abs: f64,
    pub second_gap_rel: f64,
}

/// Central differences at steps `s` and `s/2` with Richardson
/// extrapolation, compared against the analytic derivatives.
pub fn fd_derivatives(
    q: &SampledFn,
    bc: &BoundaryData,
    index: usize,
    h: &SampledFn,
    s: f64,
) -> Result<FdReport> {
    q.same_grid(h)?;
    if !(1e-6..=1e-1).contains(&s) {
        return Err(Error::BadInput(format!("fd step must lie in [1e-6, 1e-1], got {s}")));
    }

    let lam_at = |t: f64| -> Result<f64> {
        if t == 0.0 {
            eigenvalue(q, bc, index)
        } else {
            eigenvalue(&q.affine(1.0, h, t)?, bc, index)
        }
    };

    let l0 = lam_at(0.0)?;
    let (lp, lm) = (lam_at(s)?, lam_at(-s)?);
    let (lp2, lm2) = (lam_at(s / 2.0)?, lam_at(-s / 2.0)?);

    let fd_first = (lp - lm) / (2.0 * s);
    let fd_first_half = (lp2 - lm2) / s;
    let fd_second = (lp - 2.0 * l0 + lm) / (s * s);
    let fd_second_half = (lp2 - 2.0 * l0 + lm2) / (s * s / 4.0);

    // both stencils are O(s^2); one Richardson step removes that term
    let richardson_first = (4.0 * fd_first_half - fd_first) / 3.0;
    let richardson_second = (4.0 * fd_second_half - fd_second) / 3.0;

    let ep = eigenpair(q, bc, index)?;
    let analytic_l = first_derivative(&ep, h)?;
    let u = solve_un(&ep, q, h, UnMethod::Ivp)?;
    let analytic_m = second_derivative_direct(&ep, h, &u.z)?;

    let first_gap_abs = (richardson_first - analytic_l).abs();
    let second_gap_abs = (richardson_second - analytic_m).abs();
    Ok(FdReport {
        s_step: s,
        fd_first,
        fd_second,
        richardson_first,
        richardson_second,
        analytic_l,
        analytic_m,
        first_gap_abs,
        first_gap_rel: first_gap_abs / (1.0 + analytic_l.abs()),
        second_gap_abs,
        second_gap_rel: second_gap_abs / (1.0 + analytic_m.abs()),
    })
}

/// Truncated second-order perturbation sum
/// `2 sum_{m != n} <E_n h, E_m>^2 / (lambda_n - lambda_m)` over the
/// first `modes` eigenpairs.
pub fn perturbation_sum_m(
    q: &SampledFn,
    bc: &BoundaryData,
    index: usize,
    h: &SampledFn,
    modes: usize,
) -> Result<f64> {
    q.same_grid(h)?;
    if modes < index + 5 {
        return Err(Error::BadInput(format!(
            "perturbation sum needs modes >= index + 5, got {modes}"
        )));
    }
    let target = eigenpair(q, bc, index)?;
    let weighted = target.efn.mul(h)?;
    let mut sum = 0.0;
    for m in 0..modes {
        if m == index {
            continue;
        }
        let other = eigenpair(q, bc, m)?;
        let coupling = weighted.inner_product(&other.efn)?;
        sum += 2.0 * coupling * coupling / (target.lambda - other.lambda);
    }
    Ok(sum)
}

/// One trial of the Rayleigh probe.
#[derive(Debug, Clone, Serialize)]
pub struct RayleighReport {
    pub lambda_first_dirichlet: f64,
    pub quotient_at_eigenfunction: f64,
    pub min_trial_quotient: f64,
    pub trials: usize,
    pub seed: u64,
    pub all_above: bool,
}

/// Rayleigh quotient `int (z'^2 + q z^2) / int z^2` of a piecewise-linear
/// trial function in the Dirichlet class; the derivative term is exact
/// for piecewise-linear `z`.
fn rayleigh_quotient_pl(q: &SampledFn, z: &SampledFn) -> Result<f64> {
    let grid = q.grid();
    let dx = grid.dx();
    let zv = z.values();
    let mut kinetic = 0.0;
    for i in 0..grid.n_cells() {
        let slope = (zv[i + 1] - zv[i]) / dx;
        kinetic += slope * slope * dx;
    }
    let potential = q.mul(z)?.inner_product(z)?;
    let mass = z.inner_product(z)?;
    Ok((kinetic + potential) / mass)
}

/// Verify the minimization characterization of the first Dirichlet
/// eigenvalue: no trial function beats `lambda_1^D` and the eigenfunction
/// attains it.
pub fn rayleigh_check(q: &SampledFn, trials: usize, seed: u64) -> Result<RayleighReport> {
    if trials < 1 {
        return Err(Error::BadInput("rayleigh check needs at least one trial".into()));
    }
    let bc = BoundaryData::dirichlet();
    let ep = eigenpair(q, &bc, 0)?;
    let kinetic = ep.efn_deriv.inner_product(&ep.efn_deriv)?;
    let potential = q.mul(&ep.efn)?.inner_product(&ep.efn)?;
    let quotient_at_eigenfunction = (kinetic + potential) / ep.efn.inner_product(&ep.efn)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = q.grid();
    let mut min_trial = f64::INFINITY;
    for _ in 0..trials {
        let mut values: Vec<f64> = (0..grid.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        values[0] = 0.0;
        *values.last_mut().unwrap() = 0.0;
        let z = SampledFn::new(grid, values)?;
        min_trial = min_trial.min(rayleigh_quotient_pl(q, &z)?);
    }
    Ok(RayleighReport {
        lambda_first_dirichlet: ep.lambda,
        quotient_at_eigenfunction,
        min_trial_quotient: min_trial,
        trials,
        seed,
        all_above: min_trial >= ep.lambda - 1e-7,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcavityRow {
    pub tau: f64,
    pub lambda_mix: f64,
    pub lambda_chord: f64,
    /// `lambda(tau q1 + (1-tau) q2) - tau lambda(q1) - (1-tau) lambda(q2)`;
    /// nonnegative when the eigenvalue is concave in the potential.
    pub slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcavityReport {
    pub index: usize,
    pub lambda_q1: f64,
    pub lambda_q2: f64,
    pub rows: Vec<ConcavityRow>,
    pub min_slack: f64,
}

/// Sample the concavity inequality of the eigenvalue along the segment
/// between two potentials.
pub fn concavity_probe(
    q1: &SampledFn,
    q2: &SampledFn,
    bc: &BoundaryData,
    index: usize,
    taus: &[f64],
) -> Result<ConcavityReport> {
    q1.same_grid(q2)?;
    if taus.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::BadInput("tau values must lie in [0, 1]".into()));
    }
    let lam1 = eigenvalue(q1, bc, index)?;
    let lam2 = eigenvalue(q2, bc, index)?;
    let mut rows = Vec::with_capacity(taus.len());
    let mut min_slack = f64::INFINITY;
    for &tau in taus {
        let mix = q1.affine(tau, q2, 1.0 - tau)?;
        let lambda_mix = eigenvalue(&mix, bc, index)?;
        let lambda_chord = tau * lam1 + (1.0 - tau) * lam2;
        let slack = lambda_mix - lambda_chord;
        min_slack = min_slack.min(slack);
        rows.push(ConcavityRow { tau, lambda_mix, lambda_chord, slack });
    }
    Ok(ConcavityReport { index, lambda_q1: lam1, lambda_q2: lam2, rows, min_slack })
}

/// Random piecewise-linear function with node values i.i.d. uniform in
/// `[-1, 1]`.
pub fn random_piecewise_linear(grid: Grid, rng: &mut impl Rng) -> SampledFn {
    let values = (0..grid.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SampledFn::new(grid, values).expect("finite random values")
}

/// Random smooth function: a few low-order Fourier modes with uniform
/// coefficients.
pub fn random_smooth(grid: Grid, rng: &mut impl Rng) -> SampledFn {
    let ell = grid.ell();
    let coeffs: Vec<(f64, f64)> = (0..3).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let offset: f64 = rng.gen_range(-1.0..1.0);
    SampledFn::from_fn(grid, |x| {
        let mut v = offset;
        for (j, (a, b)) in coeffs.iter().enumerate() {
            let w = (j as f64 + 1.0) * std::f64::consts::PI * x / ell;
            v += a * w.cos() + b * w.sin();
        }
        v
    })
    .expect("finite random values")
}

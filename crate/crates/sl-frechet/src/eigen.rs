//! Indexed eigenvalues of `-z'' + q z = lambda z` with separated boundary
//! conditions, located by Prüfer-angle shooting.
//!
//! In the Prüfer variables `z = r sin(theta)`, `z' = r cos(theta)` the
//! angle obeys `theta' = cos^2(theta) + (lambda - q) sin^2(theta)`, starts
//! at `alpha` and is strictly increasing in `lambda` at `x = ell`; the
//! k-th eigenvalue is the unique root of `theta(ell; lambda) = k pi + beta`.
//! The winding of the angle counts eigenfunction zeros, so the index can
//! never be missed or duplicated.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mesh::{shifted_potential, SampledFn};
use crate::ode::{integrate_ivp, IvpSolution};

/// Residual target for the angle equation `theta(ell; lambda) = k pi + beta`.
/// Kept near the sweep's roundoff floor: eigenvalue errors appear divided
/// by s^2 in finite-difference cross-checks, so a loose polish leaks there.
pub const ANGLE_TOL: f64 = 1e-13;
/// Bisection width at which Newton polish takes over.
const BISECT_TOL: f64 = 1e-8;
const MAX_BRACKET_GROWTH: usize = 60;
const MAX_NEWTON: usize = 8;

/// Boundary angles of `z(0)cos(alpha) - z'(0)sin(alpha) = 0` and
/// `z(ell)cos(beta) - z'(ell)sin(beta) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData {
    alpha: f64,
    beta: f64,
}

impl BoundaryData {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..PI).contains(&alpha) {
            return Err(Error::BadInput(format!("alpha must lie in [0, pi), got {alpha}")));
        }
        if !(beta > 0.0 && beta <= PI) {
            return Err(Error::BadInput(format!("beta must lie in (0, pi], got {beta}")));
        }
        Ok(BoundaryData { alpha, beta })
    }

    /// Dirichlet at both ends: `alpha = 0`, `beta = pi`.
    pub fn dirichlet() -> Self {
        BoundaryData { alpha: 0.0, beta: PI }
    }

    /// Neumann at both ends: `alpha = pi/2`, `beta = pi/2`.
    pub fn neumann() -> Self {
        BoundaryData { alpha: PI / 2.0, beta: PI / 2.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_dirichlet_left(&self) -> bool {
        self.alpha == 0.0
    }

    pub fn is_dirichlet_right(&self) -> bool {
        self.beta == PI
    }

    pub fn is_neumann_right(&self) -> bool {
        self.beta == PI / 2.0
    }

    /// `z(ell) = 0` or `z'(ell) = 0`: the restriction under which the
    /// energy form of the second derivative is valid.
    pub fn right_end_decoupled(&self) -> bool {
        self.is_dirichlet_right() || self.is_neumann_right()
    }

    /// Dual restriction at the left end.
    pub fn left_end_decoupled(&self) -> bool {
        self.alpha == 0.0 || self.alpha == PI / 2.0
    }
}

/// Counters reported alongside each eigenvalue.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct SolverStats {
    pub bracket_growths: usize,
    pub bisection_iters: usize,
    pub newton_iters: usize,
}

/// Eigenvalue with its normalized, sign-fixed eigenfunction.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub index: usize,
    pub lambda: f64,
    /// Normalized eigenfunction, positive just right of `x = 0`.
    pub efn: SampledFn,
    pub efn_deriv: SampledFn,
    /// `| ||E||_2 - 1 |` re-measured after normalization.
    pub norm_residual: f64,
    /// `|E(ell)cos(beta) - E'(ell)sin(beta)|`.
    pub boundary_residual: f64,
    pub stats: SolverStats,
}

impl Eigenpair {
    /// Number of interior sign changes of the eigenfunction. The endpoint
    /// samples are excluded: under a Dirichlet end they hold residual-level
    /// noise whose sign is meaningless.
    pub fn interior_sign_changes(&self) -> usize {
        let v = self.efn.values();
        count_sign_changes(&v[1..v.len() - 1])
    }
}

fn count_sign_changes(values: &[f64]) -> usize {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    // Values below the noise floor are skipped so a grazing touch of zero
    // is not double counted.
    let floor = 1e-9 * scale;
    let mut last = 0.0f64;
    let mut changes = 0;
    for &v in values {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            changes += 1;
        }
        last = v;
    }
    changes
}

/// Integrate the Prüfer angle across the interval; returns `theta(ell)`.
pub fn pruefer_angle_at_ell(q: &SampledFn, bc: &BoundaryData, lambda: f64) -> Result<f64> {
    Ok(pruefer_sweep(q, bc, lambda, false)?.0)
}

/// One RK4 sweep of the angle equation, optionally carrying the
/// sensitivity `u = d theta / d lambda` (variational equation).
fn pruefer_sweep(
    q: &SampledFn,
    bc: &BoundaryData,
    lambda: f64,
    with_sensitivity: bool,
) -> Result<(f64, f64)> {
    if !lambda.is_finite() {
        return Err(Error::BadInput("lambda must be finite".into()));
    }
    let grid = q.grid();
    let dx = grid.dx();
    let qv = q.values();
    let mut theta = bc.alpha;
    let mut u = 0.0;

    let rhs = |th: f64, uu: f64, qx: f64| -> (f64, f64) {
        let s = th.sin();
        let c = th.cos();
        let dtheta = c * c + (lambda - qx) * s * s;
        let du = if with_sensitivity {
            (2.0 * s * c) * (lambda - qx - 1.0) * uu + s * s
        } else {
            0.0
        };
        (dtheta, du)
    };

    for i in 0..grid.n_cells() {
        let q0 = qv[i];
        let q1 = qv[i + 1];
        let qm = 0.5 * (q0 + q1);
        let (k1t, k1u) = rhs(theta, u, q0);
        let (k2t, k2u) = rhs(theta + 0.5 * dx * k1t, u + 0.5 * dx * k1u, qm);
        let (k3t, k3u) = rhs(theta + 0.5 * dx * k2t, u + 0.5 * dx * k2u, qm);
        let (k4t, k4u) = rhs(theta + dx * k3t, u + dx * k3u, q1);
        theta += dx / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        u += dx / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        if !theta.is_finite() {
            return Err(Error::SolverFailure(format!(
                "Prüfer angle diverged at x = {:.6}",
                grid.node(i + 1)
            )));
        }
    }
    Ok((theta, u))
}

/// Locate the k-th eigenvalue (k interior zeros) by bracketing, bisection
/// and a Newton polish on the angle residual.
pub fn eigenvalue(q: &SampledFn, bc: &BoundaryData, index: usize) -> Result<f64> {
    Ok(eigenvalue_with_stats(q, bc, index)?.0)
}

pub fn eigenvalue_with_stats(
    q: &SampledFn,
    bc: &BoundaryData,
    index: usize,
) -> Result<(f64, SolverStats)> {
    let target = index as f64 * PI + bc.beta;
    let ell = q.grid().ell();
    let q_min = q.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let q_max = q.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let mut stats = SolverStats::default();
    let mut lo = q_min - 1.0;
    let mut hi = q_max + ((index as f64 + 2.0) * PI / ell).powi(2) + 1.0;
    let mut g_lo = pruefer_angle_at_ell(q, bc, lo)? - target;
    let mut g_hi = pruefer_angle_at_ell(q, bc, hi)? - target;

    let mut step = (hi - lo).max(1.0);
    let mut growths = 0;
    while g_lo > 0.0 && growths < MAX_BRACKET_GROWTH {
        lo -= step;
        step *= 2.0;
        g_lo = pruefer_angle_at_ell(q, bc, lo)? - target;
        growths += 1;
    }
    step = (hi - lo).max(1.0);
    while g_hi < 0.0 && growths < MAX_BRACKET_GROWTH {
        hi += step;
        step *= 2.0;
        g_hi = pruefer_angle_at_ell(q, bc, hi)? - target;
        growths += 1;
    }
    stats.bracket_growths = growths;
    if g_lo > 0.0 || g_hi < 0.0 {
        return Err(Error::SolverFailure(format!(
            "index {index} out of searched range [{lo:.3e}, {hi:.3e}]"
        )));
    }

    // Bisection down to a narrow bracket.
    let mut mid = 0.5 * (lo + hi);
    while hi - lo > BISECT_TOL * mid.abs().max(1.0) {
        mid = 0.5 * (lo + hi);
        let g_mid = pruefer_angle_at_ell(q, bc, mid)? - target;
        stats.bisection_iters += 1;
        if g_mid < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if stats.bisection_iters > 200 {
            break;
        }
    }

    // Newton polish with the variational sensitivity d theta / d lambda.
    let mut lambda = 0.5 * (lo + hi);
    for _ in 0..MAX_NEWTON {
        let (theta, dtheta) = pruefer_sweep(q, bc, lambda, true)?;
        let g = theta - target;
        stats.newton_iters += 1;
        if g.abs() <= ANGLE_TOL {
            break;
        }
        if dtheta <= 0.0 {
            break;
        }
        let next = lambda - g / dtheta;
        if next <= lo || next >= hi {
            // fall back to the bracket midpoint
            if g < 0.0 {
                lo = lambda;
            } else {
                hi = lambda;
            }
            lambda = 0.5 * (lo + hi);
        } else {
            lambda = next;
        }
    }
    Ok((lambda, stats))
}

/// Full eigenpair: eigenvalue plus the normalized eigenfunction obtained
/// by one IVP shot from `(sin(alpha), cos(alpha))`.
pub fn eigenpair(q: &SampledFn, bc: &BoundaryData, index: usize) -> Result<Eigenpair> {
    let (lambda, stats) = eigenvalue_with_stats(q, bc, index)?;
    let qq = shifted_potential(q, lambda);
    let zero = SampledFn::zeros(q.grid());
    let phi = integrate_ivp(&qq, &zero, bc.alpha.sin(), bc.alpha.cos())?;
    eigenpair_from_trajectory(phi, bc, index, lambda, stats)
}

fn eigenpair_from_trajectory(
    phi: IvpSolution,
    bc: &BoundaryData,
    index: usize,
    lambda: f64,
    stats: SolverStats,
) -> Result<Eigenpair> {
    let norm = phi.z.l2_norm();
    if norm == 0.0 {
        return Err(Error::SolverFailure("eigenfunction collapsed to zero".into()));
    }
    let mut efn = phi.z.scale(1.0 / norm);
    let mut efn_deriv = phi.dz.scale(1.0 / norm);

    // With initial data (sin(alpha), cos(alpha)) the leading values are
    // already positive; flip only if roundoff produced a negative lead.
    let lead = efn
        .values()
        .iter()
        .find(|v| v.abs() > 1e-9 * efn.max_abs())
        .copied()
        .unwrap_or(0.0);
    if lead < 0.0 {
        efn = efn.scale(-1.0);
        efn_deriv = efn_deriv.scale(-1.0);
    }

    let norm_residual = (efn.l2_norm() - 1.0).abs();
    let boundary_residual = (efn.last() * bc.beta.cos() - efn_deriv.last() * bc.beta.sin()).abs();
    Ok(Eigenpair {
        index,
        lambda,
        efn,
        efn_deriv,
        norm_residual,
        boundary_residual,
        stats,
    })
}

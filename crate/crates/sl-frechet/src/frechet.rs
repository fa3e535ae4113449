//! First- and second-order derivatives of the eigenvalue map in the
//! potential.
//!
//! For a direction `h` the first derivative is the linear functional
//! `L = int E_n^2 h`. The second derivative `M` is computed by up to
//! three routes that must agree:
//!
//! * **direct** — `M = 2 int E_n (h - L) U_n`, where `U_n` solves
//!   `-z'' + (q - lambda_n) z = -E_n (h - L)` with `z(0) = z'(0) = 0`;
//! * **energy** — `M = -2 int (U_n'^2 + (q - lambda_n) U_n^2)`, valid
//!   when the right boundary condition is `z(ell) = 0` or `z'(ell) = 0`
//!   (dually through `V_n` when the left end is restricted);
//! * **kernel** — `M = int int J_n(x,y) h(x) h(y)`, with `J_n` assembled
//!   from the symmetrized kernel `G`.
//!
//! Disagreement between routes beyond tolerance is an error, not
//! something to average away.

use crate::eigen::{BoundaryData, Eigenpair};
use crate::error::{Error, Result};
use crate::mesh::{shifted_potential, SampledFn};
use crate::ode::{
    fundamental_solutions, integrate_ivp, variation_of_constants_streamed, IvpSolution,
    KernelMatrix,
};

/// Which route computes the auxiliary solution `U_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnMethod {
    /// Direct RK4 integration of the inhomogeneous IVP.
    Ivp,
    /// Variation of constants against the kernel `W`, streamed row-wise.
    Kernel,
}

/// First derivative `L = int E_n^2 h`.
pub fn first_derivative(ep: &Eigenpair, h: &SampledFn) -> Result<f64> {
    ep.efn.same_grid(h)?;
    ep.efn.mul(&ep.efn)?.inner_product(h)
}

/// `hat_h = E_n (h - L)`, the source of the auxiliary problem.
pub fn hat_h(ep: &Eigenpair, h: &SampledFn, l: f64) -> Result<SampledFn> {
    ep.efn.mul(&h.shift(-l))
}

/// Solve for `U_n` with its derivative track by the requested route.
pub fn solve_un(
    ep: &Eigenpair,
    q: &SampledFn,
    h: &SampledFn,
    method: UnMethod,
) -> Result<IvpSolution> {
    let l = first_derivative(ep, h)?;
    solve_un_with_l(ep, q, h, l, method)
}

pub fn solve_un_with_l(
    ep: &Eigenpair,
    q: &SampledFn,
    h: &SampledFn,
    l: f64,
    method: UnMethod,
) -> Result<IvpSolution> {
    q.same_grid(h)?;
    // source f = -E_n (h - L) = E_n (L - h)
    let source = hat_h(ep, h, l)?.scale(-1.0);
    let qq = shifted_potential(q, ep.lambda);
    match method {
        UnMethod::Ivp => integrate_ivp(&qq, &source, 0.0, 0.0),
        UnMethod::Kernel => {
            let (psi1, psi2) = fundamental_solutions(&qq)?;
            variation_of_constants_streamed(&psi1, &psi2, &source)
        }
    }
}

/// Direct second derivative `M = 2 int E_n (h - L) U_n`.
pub fn second_derivative_direct(ep: &Eigenpair, h: &SampledFn, u: &SampledFn) -> Result<f64> {
    let l = first_derivative(ep, h)?;
    Ok(2.0 * hat_h(ep, h, l)?.inner_product(u)?)
}

/// Energy form `M = -2 int (U'^2 + (q - lambda_n) U^2)`; requires the
/// right boundary condition `z(ell) = 0` or `z'(ell) = 0`.
pub fn second_derivative_energy(
    ep: &Eigenpair,
    q: &SampledFn,
    u: &IvpSolution,
    bc: &BoundaryData,
) -> Result<f64> {
    if !bc.right_end_decoupled() {
        return Err(Error::BadInput(
            "energy form requires z(ell)=0 or z'(ell)=0 (beta = pi or pi/2)".into(),
        ));
    }
    energy_integral(ep, q, u)
}

fn energy_integral(ep: &Eigenpair, q: &SampledFn, u: &IvpSolution) -> Result<f64> {
    let kinetic = u.dz.inner_product(&u.dz)?;
    let qq = shifted_potential(q, ep.lambda);
    let potential = qq.mul(&u.z)?.inner_product(&u.z)?;
    Ok(-2.0 * (kinetic + potential))
}

/// Dual auxiliary solution `V_n`: the solution of the same inhomogeneous
/// equation integrated backwards from `z(ell) = z'(ell) = 0`.
pub fn solve_vn(ep: &Eigenpair, q: &SampledFn, h: &SampledFn) -> Result<IvpSolution> {
    q.same_grid(h)?;
    let l = first_derivative(ep, h)?;
    let source = hat_h(ep, h, l)?.scale(-1.0);
    let qq = shifted_potential(q, ep.lambda);

    // reflect x -> ell - x, integrate forward, reflect back
    let grid = q.grid();
    let rev = |f: &SampledFn| {
        let mut v: Vec<f64> = f.values().to_vec();
        v.reverse();
        SampledFn::new(grid, v)
    };
    let sol = integrate_ivp(&rev(&qq)?, &rev(&source)?, 0.0, 0.0)?;
    let mut z: Vec<f64> = sol.z.values().to_vec();
    let mut dz: Vec<f64> = sol.dz.values().iter().map(|v| -v).collect();
    z.reverse();
    dz.reverse();
    Ok(IvpSolution { z: SampledFn::new(grid, z)?, dz: SampledFn::new(grid, dz)? })
}

/// Energy form through `V_n`; requires the left boundary condition
/// `z(0) = 0` or `z'(0) = 0`.
pub fn second_derivative_energy_dual(
    ep: &Eigenpair,
    q: &SampledFn,
    v: &IvpSolution,
    bc: &BoundaryData,
) -> Result<f64> {
    if !bc.left_end_decoupled() {
        return Err(Error::BadInput(
            "dual energy form requires z(0)=0 or z'(0)=0 (alpha = 0 or pi/2)".into(),
        ));
    }
    energy_integral(ep, q, v)
}

/// Symmetrization `G(x,y) = W(x,y)` for `x <= y`, `-W(x,y)` for `y <= x`;
/// symmetric with zero diagonal by construction.
pub fn build_g(q: &SampledFn, lambda: f64) -> Result<KernelMatrix> {
    let qq = shifted_potential(q, lambda);
    let (psi1, psi2) = fundamental_solutions(&qq)?;
    let grid = q.grid();
    let n = grid.n_nodes();
    let p1 = psi1.z.values();
    let p2 = psi2.z.values();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = p1[i] * p2[j] - p2[i] * p1[j];
            entries[i * n + j] = w;
            entries[j * n + i] = w;
        }
    }
    KernelMatrix::from_entries(grid, entries)
}

/// Assemble `J_n(x,y)` by contracting the four-point kernel against
/// `E_n(u) E_n(v)`:
///
/// `J_n(x,y) = E(x)E(y) (G(x,y) - E(y) g(x) - E(x) g(y) + c E(x)E(y))`
///
/// with `g(x) = int G(x,v) E(v) dv` and `c = int int G E E`. Since
/// `int E^2 = 1`, the `G(x,y)` term carries unit weight. The four-point
/// kernel itself is never materialized.
pub fn build_jn(ep: &Eigenpair, g: &KernelMatrix) -> Result<KernelMatrix> {
    if ep.efn.grid() != g.grid() {
        return Err(Error::BadInput("eigenfunction and kernel grids differ".into()));
    }
    let grid = g.grid();
    let n = grid.n_nodes();
    let e = ep.efn.values();
    let weights = grid.simpson_weights();

    // g_vec[i] = int G(x_i, v) E(v) dv
    let g_vec: Vec<f64> = (0..n)
        .map(|i| {
            let row = g.row(i);
            row.iter().zip(&weights).zip(e).map(|((gv, w), ev)| gv * w * ev).sum::<f64>()
        })
        .collect();
    // c = int int G E E
    let c: f64 = g_vec.iter().zip(&weights).zip(e).map(|((gv, w), ev)| gv * w * ev).sum();

    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let core = g.get(i, j) - e[j] * g_vec[i] - e[i] * g_vec[j] + c * e[i] * e[j];
            let val = e[i] * e[j] * core;
            entries[i * n + j] = val;
            entries[j * n + i] = val;
        }
    }
    KernelMatrix::from_entries(grid, entries)
}

/// Double Simpson contraction `int int J(x,y) h(x) h(y) dx dy`.
pub fn quadratic_form(j: &KernelMatrix, h: &SampledFn) -> Result<f64> {
    if j.grid() != h.grid() {
        return Err(Error::BadInput("kernel and direction grids differ".into()));
    }
    let n = j.grid().n_nodes();
    let weights = j.grid().simpson_weights();
    let hv = h.values();
    let wh: Vec<f64> = (0..n).map(|i| weights[i] * hv[i]).collect();
    let mut total = 0.0;
    for i in 0..n {
        let row = j.row(i);
        let inner: f64 = row.iter().zip(&wh).map(|(a, b)| a * b).sum();
        total += wh[i] * inner;
    }
    Ok(total)
}

/// Solvability residual `int E_n (L - h) E_n`; vanishes by the definition
/// of `L`, so anything above quadrature noise flags an inconsistency.
pub fn fredholm_residual(ep: &Eigenpair, h: &SampledFn, l: f64) -> Result<f64> {
    ep.efn.mul(&ep.efn)?.inner_product(&h.shift(-l).scale(-1.0))
}

/// Right-end boundary residual `U(ell) cos(beta) - U'(ell) sin(beta)`;
/// its smallness is the numerical content of the auxiliary solution
/// satisfying the original boundary conditions.
pub fn un_boundary_residual(u: &IvpSolution, bc: &BoundaryData) -> f64 {
    u.z.last() * bc.beta().cos() - u.dz.last() * bc.beta().sin()
}

/// Which optional `M` routes to evaluate.
#[derive(Debug, Clone, Copy, Default)]
pub struct Routes {
    pub energy: bool,
    pub kernel: bool,
}

impl Routes {
    pub fn all() -> Self {
        Routes { energy: true, kernel: true }
    }
}

/// Everything the derivative calculus produces for one `(q, bc, n, h)`.
#[derive(Debug, Clone)]
pub struct FrechetResult {
    pub l: f64,
    pub u: IvpSolution,
    pub m_direct: f64,
    pub m_energy: Option<f64>,
    pub m_kernel: Option<f64>,
    pub hat_h: SampledFn,
    pub fredholm_residual_f1: f64,
    pub u_boundary_residual: f64,
}

impl FrechetResult {
    /// Largest gap between the direct route and any other computed route.
    pub fn max_route_gap(&self) -> f64 {
        let mut gap = 0.0f64;
        if let Some(me) = self.m_energy {
            gap = gap.max((self.m_direct - me).abs());
        }
        if let Some(mk) = self.m_kernel {
            gap = gap.max((self.m_direct - mk).abs());
        }
        gap
    }
}

pub const DEFAULT_ROUTE_TOL: f64 = 1e-5;

/// Run the full calculus for one eigenpair and direction. The energy
/// route is attempted only when the boundary data admits it; a route gap
/// above `route_tol * (1 + |M|)` is an error.
pub fn compute(
    ep: &Eigenpair,
    q: &SampledFn,
    h: &SampledFn,
    bc: &BoundaryData,
    routes: Routes,
    route_tol: f64,
) -> Result<FrechetResult> {
    q.same_grid(h)?;
    if h.max_abs() == 0.0 {
        // degenerate direction: everything is zero, no ODE solves
        let grid = q.grid();
        let zero = SampledFn::zeros(grid);
        return Ok(FrechetResult {
            l: 0.0,
            u: IvpSolution { z: zero.clone(), dz: zero.clone() },
            m_direct: 0.0,
            m_energy: routes.energy.then_some(0.0),
            m_kernel: routes.kernel.then_some(0.0),
            hat_h: zero,
            fredholm_residual_f1: 0.0,
            u_boundary_residual: 0.0,
        });
    }

    let l = first_derivative(ep, h)?;
    let u = solve_un_with_l(ep, q, h, l, UnMethod::Ivp)?;
    let m_direct = 2.0 * hat_h(ep, h, l)?.inner_product(&u.z)?;

    let m_energy = if routes.energy && bc.right_end_decoupled() {
        Some(second_derivative_energy(ep, q, &u, bc)?)
    } else {
        None
    };
    let m_kernel = if routes.kernel {
        let g = build_g(q, ep.lambda)?;
        let jn = build_jn(ep, &g)?;
        Some(quadratic_form(&jn, h)?)
    } else {
        None
    };

    let result = FrechetResult {
        l,
        m_direct,
        m_energy,
        m_kernel,
        hat_h: hat_h(ep, h, l)?,
        fredholm_residual_f1: fredholm_residual(ep, h, l)?,
        u_boundary_residual: un_boundary_residual(&u, bc),
        u,
    };

    let tol = route_tol * (1.0 + m_direct.abs());
    let gap = result.max_route_gap();
    if gap > tol {
        return Err(Error::RouteDisagreement {
            what: "second-derivative routes".into(),
            gap,
            tol,
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::eigenpair;
    use crate::mesh::Grid;
    use std::f64::consts::PI;

    fn dirichlet_ground(n: usize) -> (SampledFn, Eigenpair, BoundaryData) {
        let g = Grid::new(PI, n).unwrap();
        let q = SampledFn::zeros(g);
        let bc = BoundaryData::dirichlet();
        let ep = eigenpair(&q, &bc, 0).unwrap();
        (q, ep, bc)
    }

    #[test]
    fn first_derivative_of_constant_direction() {
        let (q, ep, _) = dirichlet_ground(2000);
        let h = SampledFn::constant(q.grid(), 3.5).unwrap();
        let l = first_derivative(&ep, &h).unwrap();
        assert!((l - 3.5).abs() < 1e-9);
        let l0 = first_derivative(&ep, &SampledFn::zeros(q.grid())).unwrap();
        assert_eq!(l0, 0.0);
    }

    #[test]
    fn first_derivative_cos2x_is_minus_half() {
        let (q, ep, _) = dirichlet_ground(2000);
        let h = SampledFn::from_fn(q.grid(), |x| (2.0 * x).cos()).unwrap();
        let l = first_derivative(&ep, &h).unwrap();
        assert!((l + 0.5).abs() < 1e-6, "L = {l}");
    }

    #[test]
    fn un_vanishes_for_constant_direction() {
        let (q, ep, _) = dirichlet_ground(1000);
        let h = SampledFn::constant(q.grid(), 4.0).unwrap();
        for method in [UnMethod::Ivp, UnMethod::Kernel] {
            let u = solve_un(&ep, &q, &h, method).unwrap();
            assert!(u.z.max_abs() < 1e-9);
        }
    }

    #[test]
    fn un_closed_form_for_cos2x() {
        // -z'' - z = -sqrt(2/pi) sin(x) (cos 2x + 1/2) reduces to
        // z'' + z = sqrt(2/pi) sin(3x)/2, whose zero-data solution is
        // U(x) = sqrt(2/pi) (3 sin x - sin 3x) / 16.
        let (q, ep, _) = dirichlet_ground(2000);
        let h = SampledFn::from_fn(q.grid(), |x| (2.0 * x).cos()).unwrap();
        let amp = (2.0 / PI).sqrt() / 16.0;
        for method in [UnMethod::Ivp, UnMethod::Kernel] {
            let u = solve_un(&ep, &q, &h, method).unwrap();
            for (i, x) in q.grid().nodes().enumerate() {
                let exact = amp * (3.0 * x.sin() - (3.0 * x).sin());
                assert!((u.z.value(i) - exact).abs() < 1e-6, "{method:?} at x={x}");
            }
        }
    }

    #[test]
    fn un_routes_agree_on_generic_input() {
        let g = Grid::new(PI, 2000).unwrap();
        let q = SampledFn::from_fn(g, |x| (x - 1.0).cos() * 1.5).unwrap();
        let bc = BoundaryData::new(0.4, 2.2).unwrap();
        let ep = eigenpair(&q, &bc, 2).unwrap();
        let h = SampledFn::from_fn(g, |x| (3.0 * x).sin() - 0.2 * x).unwrap();
        let a = solve_un(&ep, &q, &h, UnMethod::Ivp).unwrap();
        let b = solve_un(&ep, &q, &h, UnMethod::Kernel).unwrap();
        for i in 0..g.n_nodes() {
            assert!((a.z.value(i) - b.z.value(i)).abs() < 1e-6);
        }
    }

    #[test]
    fn second_derivative_bench_value() {
        let (q, ep, bc) = dirichlet_ground(2000);
        let h = SampledFn::from_fn(q.grid(), |x| (2.0 * x).cos()).unwrap();
        let u = solve_un(&ep, &q, &h, UnMethod::Ivp).unwrap();
        let m = second_derivative_direct(&ep, &h, &u.z).unwrap();
        assert!((m + 0.0625).abs() < 1e-5, "M_direct = {m}");
        let me = second_derivative_energy(&ep, &q, &u, &bc).unwrap();
        assert!((me + 0.0625).abs() < 1e-5, "M_energy = {me}");
    }

    #[test]
    fn second_derivative_zero_for_constant_direction() {
        let (q, ep, _) = dirichlet_ground(1000);
        let h = SampledFn::constant(q.grid(), 2.0).unwrap();
        let u = solve_un(&ep, &q, &h, UnMethod::Ivp).unwrap();
        let m = second_derivative_direct(&ep, &h, &u.z).unwrap();
        assert!(m.abs() < 1e-9);
    }

    #[test]
    fn energy_route_rejects_coupled_right_end() {
        let (q, ep, _) = dirichlet_ground(500);
        let bc = BoundaryData::new(0.0, PI / 3.0).unwrap();
        let h = SampledFn::from_fn(q.grid(), |x| x).unwrap();
        let u = solve_un(&ep, &q, &h, UnMethod::Ivp).unwrap();
        assert!(second_derivative_energy(&ep, &q, &u, &bc).is_err());
    }

    #[test]
    fn g_kernel_free_case_is_abs_difference() {
        let g = Grid::new(PI, 200).unwrap();
        let q = SampledFn::zeros(g);
        let gk = build_g(&q, 0.0).unwrap();
        for &(i, j) in &[(0, 150), (40, 90), (199, 3), (77, 77)] {
            let expect = (g.node(j) - g.node(i)).abs();
            assert!((gk.get(i, j) - expect).abs() < 1e-9);
        }
        assert_eq!(gk.symmetry_defect(), 0.0);
    }

    #[test]
    fn g_kernel_shifted_case_is_sine_of_distance() {
        let g = Grid::new(PI, 2000).unwrap();
        let q = SampledFn::zeros(g);
        let gk = build_g(&q, 1.0).unwrap();
        for &(i, j) in &[(0, 1500), (300, 900), (1700, 200)] {
            let expect = (g.node(j) - g.node(i)).abs().sin();
            assert!((gk.get(i, j) - expect).abs() < 1e-7);
        }
    }

    #[test]
    fn jn_symmetric_and_flat_on_constants() {
        let (q, ep, _) = dirichlet_ground(400);
        let gk = build_g(&q, ep.lambda).unwrap();
        let jn = build_jn(&ep, &gk).unwrap();
        assert_eq!(jn.symmetry_defect(), 0.0);
        let ones = SampledFn::constant(q.grid(), 1.0).unwrap();
        assert!(quadratic_form(&jn, &ones).unwrap().abs() < 1e-7);
        assert_eq!(quadratic_form(&jn, &SampledFn::zeros(q.grid())).unwrap(), 0.0);
    }

    #[test]
    fn kernel_route_bench_value() {
        let (q, ep, _) = dirichlet_ground(1000);
        let gk = build_g(&q, ep.lambda).unwrap();
        let jn = build_jn(&ep, &gk).unwrap();
        let h = SampledFn::from_fn(q.grid(), |x| (2.0 * x).cos()).unwrap();
        let m = quadratic_form(&jn, &h).unwrap();
        assert!((m + 0.0625).abs() < 1e-4, "M_kernel = {m}");
    }

    #[test]
    fn vn_energy_route_matches_un_energy_route() {
        let g = Grid::new(PI, 2000).unwrap();
        let q = SampledFn::from_fn(g, |x| 0.8 * (2.0 * x).sin()).unwrap();
        let bc = BoundaryData::dirichlet();
        let ep = eigenpair(&q, &bc, 0).unwrap();
        let h = SampledFn::from_fn(g, |x| x.cos() + 0.1 * x * x).unwrap();
        let u = solve_un(&ep, &q, &h, UnMethod::Ivp).unwrap();
        let v = solve_vn(&ep, &q, &h).unwrap();
        let mu = second_derivative_energy(&ep, &q, &u, &bc).unwrap();
        let mv = second_derivative_energy_dual(&ep, &q, &v, &bc).unwrap();
        assert!((mu - mv).abs() <= 1e-5 * (1.0 + mu.abs()), "{mu} vs {mv}");
    }

    #[test]
    fn vn_bench_value() {
        let (q, ep, bc) = dirichlet_ground(2000);
        let h = SampledFn::from_fn(q.grid(), |x| (2.0 * x).cos()).unwrap();
        let v = solve_vn(&ep, &q, &h).unwrap();
        let m = second_derivative_energy_dual(&ep, &q, &v, &bc).unwrap();
        assert!((m + 0.0625).abs() < 1e-5, "M via V = {m}");
    }

    #[test]
    fn vn_dual_energy_rejects_generic_alpha() {
        let g = Grid::new(PI, 500).unwrap();
        let q = SampledFn::zeros(g);
        let bc = BoundaryData::new(0.7, PI).unwrap();
        let ep = eigenpair(&q, &bc, 0).unwrap();
        let h = SampledFn::from_fn(g, |x| x).unwrap();
        let v = solve_vn(&ep, &q, &h).unwrap();
        assert!(second_derivative_energy_dual(&ep, &q, &v, &bc).is_err());
    }

    #[test]
    fn fredholm_residual_vanishes_and_is_linear_in_l() {
        let g = Grid::new(PI, 1500).unwrap();
        let q = SampledFn::from_fn(g, |x| (x * 1.3).sin()).unwrap();
        let bc = BoundaryData::new(0.2, 2.8).unwrap();
        let ep = eigenpair(&q, &bc, 1).unwrap();
        let h = SampledFn::from_fn(g, |x| x * x - 1.0).unwrap();
        let l = first_derivative(&ep, &h).unwrap();
        let r = fredholm_residual(&ep, &h, l).unwrap();
        assert!(r.abs() <= 1e-9, "residual {r}");
        // shifting L by 1 shifts the residual by exactly int E^2 = 1
        let r_wrong = fredholm_residual(&ep, &h, l + 1.0).unwrap();
        assert!((r_wrong - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn un_satisfies_right_boundary_condition() {
        let g = Grid::new(PI, 2000).unwrap();
        let q = SampledFn::from_fn(g, |x| (x - 0.5).sin()).unwrap();
        let bc = BoundaryData::new(1.1, 2.4).unwrap();
        let ep = eigenpair(&q, &bc, 1).unwrap();
        let h = SampledFn::from_fn(g, |x| (2.0 * x).cos() - 0.3 * x).unwrap();
        let u = solve_un(&ep, &q, &h, UnMethod::Ivp).unwrap();
        let r = un_boundary_residual(&u, &bc).abs();
        let scale = 1.0 + u.z.max_abs() + u.dz.max_abs();
        assert!(r <= 1e-5 * scale, "residual {r}");
    }

    #[test]
    fn compute_full_result_with_all_routes() {
        let (q, ep, bc) = dirichlet_ground(1000);
        let h = SampledFn::from_fn(q.grid(), |x| (2.0 * x).cos()).unwrap();
        let res = compute(&ep, &q, &h, &bc, Routes::all(), DEFAULT_ROUTE_TOL).unwrap();
        assert!((res.l + 0.5).abs() < 1e-6);
        assert!((res.m_direct + 0.0625).abs() < 1e-5);
        assert!(res.m_energy.is_some() && res.m_kernel.is_some());
        assert!(res.fredholm_residual_f1.abs() <= 1e-9);
    }

    #[test]
    fn compute_degenerate_direction_short_circuits() {
        let (q, ep, bc) = dirichlet_ground(1000);
        let h = SampledFn::zeros(q.grid());
        let res = compute(&ep, &q, &h, &bc, Routes::all(), DEFAULT_ROUTE_TOL).unwrap();
        assert_eq!(res.l, 0.0);
        assert_eq!(res.m_direct, 0.0);
        assert_eq!(res.m_kernel, Some(0.0));
    }

    #[test]
    fn homogeneity_and_translation_flatness() {
        let g = Grid::new(PI, 2000).unwrap();
        let q = SampledFn::from_fn(g, |x| 0.5 * x.cos()).unwrap();
        let bc = BoundaryData::dirichlet();
        let ep = eigenpair(&q, &bc, 0).unwrap();
        let h = SampledFn::from_fn(g, |x| (2.0 * x).sin() + 0.4).unwrap();

        let l1 = first_derivative(&ep, &h).unwrap();
        let u1 = solve_un(&ep, &q, &h, UnMethod::Ivp).unwrap();
        let m1 = second_derivative_direct(&ep, &h, &u1.z).unwrap();

        for c in [2.0, -3.0] {
            let hc = h.scale(c);
            let lc = first_derivative(&ep, &hc).unwrap();
            assert!((lc - c * l1).abs() <= 1e-7 * (1.0 + l1.abs()));
            let uc = solve_un(&ep, &q, &hc, UnMethod::Ivp).unwrap();
            let mc = second_derivative_direct(&ep, &hc, &uc.z).unwrap();
            assert!((mc - c * c * m1).abs() <= 1e-7 * (1.0 + m1.abs()) * c * c);
        }

        let hshift = h.shift(5.0);
        let us = solve_un(&ep, &q, &hshift, UnMethod::Ivp).unwrap();
        let ms = second_derivative_direct(&ep, &hshift, &us.z).unwrap();
        assert!((ms - m1).abs() <= 1e-6);
    }
}

//! Initial-value integration of `-z'' + Q(x) z = f(x)`, fundamental
//! solutions of the homogeneous equation, the two-point kernel
//! `W(x,y) = psi1(x) psi2(y) - psi2(x) psi1(y)` and variation of
//! constants.
//!
//! The integrator is fixed-step classical RK4 with one step per grid
//! cell; coefficient values at the half-step stages come from linear
//! interpolation between nodes, so within each cell the right-hand side
//! is smooth and the method keeps its full order.

use crate::error::{Error, Result};
use crate::mesh::{prefix_integrals, Grid, SampledFn};

/// Magnitude cap signalling blow-up of the IVP solution.
pub const BLOWUP_CAP: f64 = 1e120;

/// Trajectory of `z` together with the integrator's own derivative track.
#[derive(Debug, Clone)]
pub struct IvpSolution {
    pub z: SampledFn,
    pub dz: SampledFn,
}

impl IvpSolution {
    pub fn grid(&self) -> Grid {
        self.z.grid()
    }
}

/// Solve `-z'' + Q(x) z = f(x)` with `z(0) = z0`, `z'(0) = dz0`,
/// sampling `z` and `z'` at every grid node.
pub fn integrate_ivp(qq: &SampledFn, f: &SampledFn, z0: f64, dz0: f64) -> Result<IvpSolution> {
    qq.same_grid(f)?;
    if !z0.is_finite() || !dz0.is_finite() {
        return Err(Error::BadInput("initial data must be finite".into()));
    }
    let grid = qq.grid();
    let n = grid.n_cells();
    let dx = grid.dx();
    let qv = qq.values();
    let fv = f.values();

    let mut z = vec![0.0; n + 1];
    let mut dz = vec![0.0; n + 1];
    z[0] = z0;
    dz[0] = dz0;

    // Q is piecewise-linear data, so its midpoint is the node average;
    // the source is a smooth product of computed quantities, so its
    // midpoints are reconstructed at O(h^4) to keep RK4 at full order.
    let f_mid = cubic_midpoints(fv);

    for i in 0..n {
        let (q0, q1) = (qv[i], qv[i + 1]);
        let (f0, f1) = (fv[i], fv[i + 1]);
        let qm = 0.5 * (q0 + q1);
        let fm = f_mid[i];
        let (zi, dzi) = (z[i], dz[i]);

        // z'' = Q z - f as the first-order system (z, z')
        let k1z = dzi;
        let k1d = q0 * zi - f0;
        let k2z = dzi + 0.5 * dx * k1d;
        let k2d = qm * (zi + 0.5 * dx * k1z) - fm;
        let k3z = dzi + 0.5 * dx * k2d;
        let k3d = qm * (zi + 0.5 * dx * k2z) - fm;
        let k4z = dzi + dx * k3d;
        let k4d = q1 * (zi + dx * k3z) - f1;

        z[i + 1] = zi + dx / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        dz[i + 1] = dzi + dx / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);

        if z[i + 1].abs() > BLOWUP_CAP || dz[i + 1].abs() > BLOWUP_CAP {
            return Err(Error::Overflow { x: grid.node(i + 1), cap: BLOWUP_CAP });
        }
    }

    Ok(IvpSolution {
        z: SampledFn::new(grid, z)?,
        dz: SampledFn::new(grid, dz)?,
    })
}

/// Cell-midpoint values by cubic interpolation through the four nearest
/// nodes (one-sided stencils at the ends). Exact for cubics.
fn cubic_midpoints(v: &[f64]) -> Vec<f64> {
    let n = v.len() - 1;
    let mut mid = vec![0.0; n];
    for i in 0..n {
        mid[i] = if i == 0 {
            if n == 1 {
                0.5 * (v[0] + v[1])
            } else if n == 2 {
                (3.0 * v[0] + 6.0 * v[1] - v[2]) / 8.0
            } else {
                (5.0 * v[0] + 15.0 * v[1] - 5.0 * v[2] + v[3]) / 16.0
            }
        } else if i == n - 1 && n >= 3 {
            (v[n - 3] - 5.0 * v[n - 2] + 15.0 * v[n - 1] + 5.0 * v[n]) / 16.0
        } else if i + 2 <= n {
            (-v[i - 1] + 9.0 * v[i] + 9.0 * v[i + 1] - v[i + 2]) / 16.0
        } else {
            0.5 * (v[i] + v[i + 1])
        };
    }
    mid
}

/// Fundamental solutions `psi1`, `psi2` of `-z'' + Q z = 0` with initial
/// data `e1 = (1, 0)` and `e2 = (0, 1)`.
pub fn fundamental_solutions(qq: &SampledFn) -> Result<(IvpSolution, IvpSolution)> {
    let zero = SampledFn::zeros(qq.grid());
    let psi1 = integrate_ivp(qq, &zero, 1.0, 0.0)?;
    let psi2 = integrate_ivp(qq, &zero, 0.0, 1.0)?;
    Ok((psi1, psi2))
}

/// Dense kernel tabulated at all node pairs, row-major.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    grid: Grid,
    entries: Vec<f64>,
}

impl KernelMatrix {
    pub fn from_entries(grid: Grid, entries: Vec<f64>) -> Result<Self> {
        let n = grid.n_nodes();
        if entries.len() != n * n {
            return Err(Error::BadInput(format!(
                "kernel matrix needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadInput("kernel entries must be finite".into()));
        }
        Ok(KernelMatrix { grid, entries })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.grid.n_nodes() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.grid.n_nodes();
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|K(i,j) - K(j,i)|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.grid.n_nodes();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Largest `|K(i,j) + K(j,i)|` (including the diagonal).
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.grid.n_nodes();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) + self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        let n = self.grid.n_nodes();
        writeln!(w, "x,y,value")?;
        for i in 0..n {
            let x = self.grid.node(i);
            for j in 0..n {
                writeln!(w, "{x:.17e},{:.17e},{:.17e}", self.grid.node(j), self.get(i, j))?;
            }
        }
        Ok(())
    }
}

/// Tabulate `W(x_i, x_j)`; antisymmetry and the zero diagonal hold
/// exactly because the lower triangle mirrors the upper one.
pub fn kernel_w(psi1: &IvpSolution, psi2: &IvpSolution) -> Result<KernelMatrix> {
    psi1.z.same_grid(&psi2.z)?;
    let grid = psi1.grid();
    let n = grid.n_nodes();
    let p1 = psi1.z.values();
    let p2 = psi2.z.values();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = p1[i] * p2[j] - p2[i] * p1[j];
            entries[i * n + j] = w;
            entries[j * n + i] = -w;
        }
    }
    KernelMatrix::from_entries(grid, entries)
}

/// Variation of constants: `z(x) = int_0^x W(x,y) f(y) dy`.
pub fn variation_of_constants(w: &KernelMatrix, f: &SampledFn) -> Result<SampledFn> {
    if w.grid() != f.grid() {
        return Err(Error::BadInput("kernel and source live on different grids".into()));
    }
    let grid = f.grid();
    let n = grid.n_nodes();
    let dx = grid.dx();
    let fv = f.values();
    let mut out = vec![0.0; n];
    let mut integrand = vec![0.0; n];
    for i in 1..n {
        let row = w.row(i);
        for j in 0..=i {
            integrand[j] = row[j] * fv[j];
        }
        out[i] = prefix_at(&integrand[..=i], dx);
    }
    SampledFn::new(grid, out)
}

/// Prefix quadrature over all supplied samples: Simpson when the prefix
/// has an even number of cells, trapezoid on the closing panel otherwise.
fn prefix_at(values: &[f64], dx: f64) -> f64 {
    let n = values.len() - 1;
    let even = n - n % 2;
    let mut acc = 0.0;
    for i in (2..=even).step_by(2) {
        acc += (values[i - 2] + 4.0 * values[i - 1] + values[i]) * dx / 3.0;
    }
    if n % 2 == 1 {
        acc += (values[n - 1] + values[n]) * dx / 2.0;
    }
    acc
}

/// Streamed variation of constants: same quadrature as
/// [`variation_of_constants`] but rows of `W` are formed on the fly from
/// the fundamental solutions, so no dense matrix is materialized.
pub fn variation_of_constants_streamed(
    psi1: &IvpSolution,
    psi2: &IvpSolution,
    f: &SampledFn,
) -> Result<IvpSolution> {
    psi1.z.same_grid(&psi2.z)?;
    psi1.z.same_grid(f)?;
    let grid = f.grid();
    let n = grid.n_nodes();
    let dx = grid.dx();
    let p1 = psi1.z.values();
    let p2 = psi2.z.values();
    let dp1 = psi1.dz.values();
    let dp2 = psi2.dz.values();
    let fv = f.values();

    // z(x) = psi1(x) * int_0^x psi2 f - psi2(x) * int_0^x psi1 f, and the
    // x-derivative has the same form with psi_i' outside (the boundary
    // terms cancel since W(x,x) = 0).
    let g1: Vec<f64> = (0..n).map(|j| p1[j] * fv[j]).collect();
    let g2: Vec<f64> = (0..n).map(|j| p2[j] * fv[j]).collect();
    let c1 = prefix_integrals(&g1, dx);
    let c2 = prefix_integrals(&g2, dx);

    let mut z = vec![0.0; n];
    let mut dz = vec![0.0; n];
    for i in 0..n {
        z[i] = p1[i] * c2[i] - p2[i] * c1[i];
        dz[i] = dp1[i] * c2[i] - dp2[i] * c1[i];
    }
    Ok(IvpSolution {
        z: SampledFn::new(grid, z)?,
        dz: SampledFn::new(grid, dz)?,
    })
}

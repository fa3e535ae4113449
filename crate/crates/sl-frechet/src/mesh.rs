//! Uniform grids on `[0, ell]`, grid-sampled functions and composite
//! Simpson quadrature.
//!
//! Every integral in the crate goes through [`SampledFn::integrate`] or a
//! weight vector derived from it, so all inner products are mutually
//! consistent. Sampled values are interpreted piecewise-linearly between
//! nodes; `n_cells` must be even so composite Simpson applies.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Uniform partition of `I = [0, ell]` into `n_cells` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    ell: f64,
    n_cells: usize,
}

impl Grid {
    pub fn new(ell: f64, n_cells: usize) -> Result<Self> {
        if !ell.is_finite() || ell <= 0.0 {
            return Err(Error::BadInput(format!("interval length must be positive, got {ell}")));
        }
        if n_cells < 2 {
            return Err(Error::BadInput(format!("n_cells must be >= 2, got {n_cells}")));
        }
        if n_cells % 2 != 0 {
            return Err(Error::BadInput(format!("n_cells must be even for Simpson, got {n_cells}")));
        }
        Ok(Grid { ell, n_cells })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    /// Cell width.
    pub fn dx(&self) -> f64 {
        self.ell / self.n_cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n_cells);
        self.ell * i as f64 / self.n_cells as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes()).map(|i| self.node(i))
    }

    /// Composite Simpson weights for the whole interval.
    pub fn simpson_weights(&self) -> Vec<f64> {
        let scale = self.dx() / 3.0;
        (0..self.n_nodes())
            .map(|i| {
                let w = if i == 0 || i == self.n_cells {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * scale
            })
            .collect()
    }
}

/// Real function on `[0, ell]` given by its values at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn {
    grid: Grid,
    values: Vec<f64>,
}

impl SampledFn {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::BadInput(format!(
                "expected {} values, got {}",
                grid.n_nodes(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadInput("sampled values must be finite".into()));
        }
        Ok(SampledFn { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        SampledFn::new(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        SampledFn { grid, values: vec![0.0; grid.n_nodes()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        SampledFn::new(grid, vec![c; grid.n_nodes()])
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn same_grid(&self, other: &SampledFn) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::BadInput("sampled functions live on different grids".into()))
        }
    }

    /// Node-wise `a*self + b*other`.
    pub fn affine(&self, a: f64, other: &SampledFn, b: f64) -> Result<SampledFn> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        SampledFn::new(self.grid, values)
    }

    pub fn add(&self, other: &SampledFn) -> Result<SampledFn> {
        self.affine(1.0, other, 1.0)
    }

    pub fn scale(&self, a: f64) -> SampledFn {
        SampledFn {
            grid: self.grid,
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    pub fn shift(&self, c: f64) -> SampledFn {
        SampledFn {
            grid: self.grid,
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    /// Node-wise product.
    pub fn mul(&self, other: &SampledFn) -> Result<SampledFn> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x * y).collect();
        SampledFn::new(self.grid, values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SampledFn {
        SampledFn {
            grid: self.grid,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    /// Composite Simpson approximation of the integral over `[0, ell]`.
    pub fn integrate(&self) -> f64 {
        simpson(&self.values, self.grid.dx())
    }

    /// Simpson approximation of the `L^2` inner product.
    pub fn inner_product(&self, other: &SampledFn) -> Result<f64> {
        self.same_grid(other)?;
        let prod: Vec<f64> = self.values.iter().zip(&other.values).map(|(x, y)| x * y).collect();
        Ok(simpson(&prod, self.grid.dx()))
    }

    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        simpson(&sq, self.grid.dx()).max(0.0).sqrt()
    }

    /// Piecewise-linear evaluation between nodes.
    pub fn eval(&self, x: f64) -> f64 {
        let dx = self.grid.dx();
        let t = (x / dx).clamp(0.0, self.grid.n_cells() as f64);
        let i = (t.floor() as usize).min(self.grid.n_cells() - 1);
        let frac = t - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Write the `x,value` CSV format, header included.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,value")?;
        for (x, v) in self.grid.nodes().zip(&self.values) {
            writeln!(w, "{x:.17e},{v:.17e}")?;
        }
        Ok(())
    }

    pub fn write_csv_path(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Read the `x,value` CSV format. The nodes must match a uniform grid
    /// within 1e-9 relative.
    pub fn read_csv<R: BufRead>(r: R) -> Result<SampledFn> {
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if lineno == 0 && line.to_ascii_lowercase().starts_with("x,") {
                continue;
            }
            let mut parts = line.splitn(2, ',');
            let (xs_str, vs_str) = match (parts.next(), parts.next()) {
                (Some(a), Some(b)) => (a.trim(), b.trim()),
                _ => return Err(Error::BadInput(format!("csv line {}: expected x,value", lineno + 1))),
            };
            let x: f64 = xs_str
                .parse()
                .map_err(|_| Error::BadInput(format!("csv line {}: bad x {xs_str:?}", lineno + 1)))?;
            let v: f64 = vs_str
                .parse()
                .map_err(|_| Error::BadInput(format!("csv line {}: bad value {vs_str:?}", lineno + 1)))?;
            xs.push(x);
            vs.push(v);
        }
        if xs.len() < 3 {
            return Err(Error::BadInput("csv must contain at least 3 nodes".into()));
        }
        let n_cells = xs.len() - 1;
        let ell = *xs.last().unwrap();
        let grid = Grid::new(ell, n_cells)?;
        for (i, x) in xs.iter().enumerate() {
            let expect = grid.node(i);
            if (x - expect).abs() > 1e-9 * ell.max(1.0) {
                return Err(Error::BadInput(format!(
                    "csv node {i} at x = {x} does not match the uniform grid node {expect}"
                )));
            }
        }
        SampledFn::new(grid, vs)
    }

    pub fn read_csv_path(path: &Path) -> Result<SampledFn> {
        let file = std::fs::File::open(path)?;
        SampledFn::read_csv(std::io::BufReader::new(file))
    }
}

/// `Q(x) = q(x) - lambda`, the shifted potential of the homogeneous
/// equation `-z'' + Q z = 0`.
pub fn shifted_potential(q: &SampledFn, lambda: f64) -> SampledFn {
    q.shift(-lambda)
}

fn simpson(values: &[f64], dx: f64) -> f64 {
    let n = values.len() - 1;
    debug_assert!(n >= 2 && n % 2 == 0);
    let mut s4 = 0.0;
    let mut s2 = 0.0;
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        if i % 2 == 1 {
            s4 += v;
        } else {
            s2 += v;
        }
    }
    (values[0] + values[n] + 4.0 * s4 + 2.0 * s2) * dx / 3.0
}

/// Prefix integrals `F(x_i) = int_0^{x_i} f` for every node: Simpson on
/// even prefixes, one trapezoid panel closing odd prefixes.
pub fn prefix_integrals(values: &[f64], dx: f64) -> Vec<f64> {
    let n = values.len() - 1;
    let mut out = vec![0.0; values.len()];
    // Simpson pairs accumulate two cells at a time.
    let mut acc = 0.0;
    for i in (2..=n).step_by(2) {
        acc += (values[i - 2] + 4.0 * values[i - 1] + values[i]) * dx / 3.0;
        out[i] = acc;
    }
    for i in (1..=n).step_by(2) {
        out[i] = out[i - 1] + (values[i - 1] + values[i]) * dx / 2.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn make_grid_nodes() {
        let g = Grid::new(PI, 4).unwrap();
        let nodes: Vec<f64> = g.nodes().collect();
        let expect = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI];
        for (a, b) in nodes.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let g = Grid::new(1.0, 2).unwrap();
        let nodes: Vec<f64> = g.nodes().collect();
        assert_eq!(nodes, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn make_grid_rejects_bad_input() {
        assert!(Grid::new(PI, 3).is_err());
        assert!(Grid::new(0.0, 4).is_err());
        assert!(Grid::new(-1.0, 4).is_err());
        assert!(Grid::new(1.0, 0).is_err());
    }

    #[test]
    fn integrate_constant_is_exact() {
        let g = Grid::new(PI, 10).unwrap();
        let f = SampledFn::constant(g, 1.0).unwrap();
        assert!((f.integrate() - PI).abs() < 1e-14);
        let z = SampledFn::zeros(g);
        assert_eq!(z.integrate(), 0.0);
    }

    #[test]
    fn integrate_sin_squared() {
        let g = Grid::new(PI, 1000).unwrap();
        let f = SampledFn::from_fn(g, |x| x.sin().powi(2)).unwrap();
        assert!((f.integrate() - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn inner_products() {
        let g = Grid::new(PI, 1000).unwrap();
        let s = SampledFn::from_fn(g, f64::sin).unwrap();
        let c = SampledFn::from_fn(g, f64::cos).unwrap();
        assert!((s.inner_product(&s).unwrap() - PI / 2.0).abs() < 1e-10);
        assert!(s.inner_product(&c).unwrap().abs() < 1e-10);
        let z = SampledFn::zeros(g);
        assert_eq!(s.inner_product(&z).unwrap(), 0.0);
    }

    #[test]
    fn simpson_exact_on_cubics() {
        let g = Grid::new(2.0, 8).unwrap();
        let f = SampledFn::from_fn(g, |x| 3.0 * x.powi(3) - x.powi(2) + 5.0 * x - 2.0).unwrap();
        // antiderivative: (3/4)x^4 - x^3/3 + (5/2)x^2 - 2x
        let exact = 0.75 * 16.0 - 8.0 / 3.0 + 10.0 - 4.0;
        assert!((f.integrate() - exact).abs() <= 1e-10 * exact.abs());
    }

    #[test]
    fn refinement_is_fourth_order() {
        let f = |x: f64| (3.0 * x).sin() * (-x).exp();
        let exact = 3.0 / 10.0 - (-1.0f64).exp() * (3.0f64.cos() * 3.0 + 3.0f64.sin()) / 10.0;
        let mut errs = Vec::new();
        for n in [50, 100, 200] {
            let g = Grid::new(1.0, n).unwrap();
            let s = SampledFn::from_fn(g, f).unwrap();
            errs.push((s.integrate() - exact).abs());
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 3.7, "observed order {order}");
        }
    }

    #[test]
    fn prefix_matches_full_integral() {
        let g = Grid::new(1.0, 200).unwrap();
        let f = SampledFn::from_fn(g, |x| (2.0 * x).cos()).unwrap();
        let pre = prefix_integrals(f.values(), g.dx());
        assert_eq!(pre[0], 0.0);
        assert!((pre[g.n_cells()] - f.integrate()).abs() < 1e-15);
        // interior node against the closed form sin(2x)/2; odd prefixes
        // close with a trapezoid panel, so allow its O(h^3) local error
        for i in [37, 100, 151] {
            let x = g.node(i);
            assert!((pre[i] - (2.0 * x).sin() / 2.0).abs() < 1e-7);
        }
    }

    #[test]
    fn csv_round_trip() {
        let g = Grid::new(PI, 16).unwrap();
        let f = SampledFn::from_fn(g, |x| x.cos() - 0.25 * x).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = SampledFn::read_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn csv_rejects_nonuniform_nodes() {
        let text = "x,value\n0.0,1.0\n0.4,1.0\n1.0,1.0\n";
        assert!(SampledFn::read_csv(std::io::Cursor::new(text)).is_err());
    }

    proptest! {
        #[test]
        fn integrate_is_linear(
            fv in proptest::collection::vec(-10.0f64..10.0, 21),
            gv in proptest::collection::vec(-10.0f64..10.0, 21),
            a in -5.0f64..5.0,
            b in -5.0f64..5.0,
        ) {
            let grid = Grid::new(2.5, 20).unwrap();
            let f = SampledFn::new(grid, fv).unwrap();
            let g = SampledFn::new(grid, gv).unwrap();
            let lhs = f.affine(a, &g, b).unwrap().integrate();
            let rhs = a * f.integrate() + b * g.integrate();
            let bound = 1e-12 * (a.abs() * f.max_abs() + b.abs() * g.max_abs() + 1.0) * grid.ell();
            prop_assert!((lhs - rhs).abs() <= bound);
        }
    }
}

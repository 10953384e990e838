use std::io::{self, Write};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Domain, Point, Shape};
use crate::oracle::boundary::BoundaryFunction;

pub const SOR_OMEGA: f64 = 1.9;
pub const SOR_MAX_ITERATIONS: usize = 100_000;
pub const DEFAULT_FD_TOL: f64 = 1e-10;

/// Node values of a discrete harmonic function on a uniform planar grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FdGrid {
    lo: [f64; 2],
    hi: [f64; 2],
    spacing: f64,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
    iterations: usize,
    residual: f64,
}

impl FdGrid {
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of nodes along each axis, including the boundary nodes.
    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Largest stencil residual at convergence.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [coord(self.lo[0], self.hi[0], self.spacing, i, self.nx), coord(self.lo[1], self.hi[1], self.spacing, j, self.ny)]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    /// Bilinear interpolation of the node values at `x`.
    pub fn interpolate(&self, x: &Point) -> Result<f64> {
        if x.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: x.dim() });
        }
        let mut cell = [0usize; 2];
        let mut frac = [0.0; 2];
        let counts = [self.nx, self.ny];
        for a in 0..2 {
            let t = (x[a] - self.lo[a]) / self.spacing;
            if !(t >= -1e-9 && t <= (counts[a] - 1) as f64 + 1e-9) {
                return Err(Error::NotInterior(x.to_vec()));
            }
            let t = t.clamp(0.0, (counts[a] - 1) as f64);
            let c = (t.floor() as usize).min(counts[a] - 2);
            cell[a] = c;
            frac[a] = t - c as f64;
        }
        let [i, j] = cell;
        let [fx, fy] = frac;
        Ok((1.0 - fx) * (1.0 - fy) * self.value(i, j)
            + fx * (1.0 - fy) * self.value(i + 1, j)
            + (1.0 - fx) * fy * self.value(i, j + 1)
            + fx * fy * self.value(i + 1, j + 1))
    }

    /// Writes `x,y,value` rows, one per node, with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,y,value")?;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let [x, y] = self.node(i, j);
                writeln!(out, "{:.16e},{:.16e},{:.16e}", x, y, self.value(i, j))?;
            }
        }
        Ok(())
    }
}

fn coord(lo: f64, hi: f64, h: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        hi
    } else {
        lo + h * i as f64
    }
}

/// Solves the discrete Laplace equation (5-point stencil) on a planar box by
/// successive over-relaxation, with Dirichlet values `f` at boundary nodes.
///
/// Iterates until the largest residual `|(sum of neighbours)/4 - u|` is at
/// most `tol`; the spacing must divide both sides of the box.
pub fn fd_solve(domain: &Domain, f: &BoundaryFunction, spacing: f64, tol: f64) -> Result<FdGrid> {
    let Shape::AxisBox { lo, hi } = domain.shape() else {
        return Err(Error::Unsupported(format!("finite differences need a box, got {}", domain.kind_name())));
    };
    if domain.dim() != 2 {
        return Err(Error::Unsupported("finite differences need a planar box".into()));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(invalid("grid_spacing", "must be positive"));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    f.validate_complete(domain)?;
    let mut counts = [0usize; 2];
    for a in 0..2 {
        let cells = (hi[a] - lo[a]) / spacing;
        let rounded = cells.round();
        if rounded < 2.0 || (cells - rounded).abs() > 1e-9 * rounded.max(1.0) {
            return Err(invalid(
                "grid_spacing",
                format!("{spacing} does not divide the side length {} into at least two cells", hi[a] - lo[a]),
            ));
        }
        counts[a] = rounded as usize + 1;
    }
    let [nx, ny] = counts;
    let lo2 = [lo[0], lo[1]];
    let hi2 = [hi[0], hi[1]];
    let mut u = vec![0.0; nx * ny];
    let mut boundary_sum = 0.0;
    let mut boundary_count = 0usize;
    for j in 0..ny {
        for i in 0..nx {
            if i == 0 || j == 0 || i + 1 == nx || j + 1 == ny {
                let x = [coord(lo2[0], hi2[0], spacing, i, nx), coord(lo2[1], hi2[1], spacing, j, ny)];
                let v = f.value_raw(domain, &x)?;
                u[j * nx + i] = v;
                boundary_sum += v;
                boundary_count += 1;
            }
        }
    }
    let start = boundary_sum / boundary_count as f64;
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            u[j * nx + i] = start;
        }
    }

    let mut residual = f64::INFINITY;
    for iter in 1..=SOR_MAX_ITERATIONS {
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let k = j * nx + i;
                let avg = 0.25 * (u[k - 1] + u[k + 1] + u[k - nx] + u[k + nx]);
                u[k] += SOR_OMEGA * (avg - u[k]);
            }
        }
        residual = 0.0;
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let k = j * nx + i;
                let avg = 0.25 * (u[k - 1] + u[k + 1] + u[k - nx] + u[k + nx]);
                residual = f64::max(residual, (avg - u[k]).abs());
            }
        }
        if residual <= tol {
            return Ok(FdGrid {
                lo: lo2,
                hi: hi2,
                spacing,
                nx,
                ny,
                values: u,
                iterations: iter,
                residual,
            });
        }
    }
    Err(Error::NonConvergence(format!(
        "SOR residual {residual:e} above {tol:e} after {SOR_MAX_ITERATIONS} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::boundary::HarmonicPoly;

    fn square() -> Domain {
        Domain::axis_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
    }

    fn max_error(grid: &FdGrid, exact: impl Fn(f64, f64) -> f64) -> f64 {
        let (nx, ny) = grid.shape();
        let mut err: f64 = 0.0;
        for j in 0..ny {
            for i in 0..nx {
                let [x, y] = grid.node(i, j);
                err = err.max((grid.value(i, j) - exact(x, y)).abs());
            }
        }
        err
    }

    #[test]
    fn reproduces_quadratic_harmonic() {
        let f = BoundaryFunction::HarmonicPoly2D(HarmonicPoly::X2MinusY2);
        let grid = fd_solve(&square(), &f, 1.0 / 64.0, DEFAULT_FD_TOL).unwrap();
        assert_eq!(grid.shape(), (65, 65));
        assert!(max_error(&grid, |x, y| x * x - y * y) <= 5e-4);
        let g = fd_solve(&square(), &BoundaryFunction::Coordinate(0), 1.0 / 64.0, DEFAULT_FD_TOL).unwrap();
        assert!(max_error(&g, |x, _| x) <= 5e-4);
    }

    #[test]
    fn constant_data_is_exact() {
        let grid = fd_solve(&square(), &BoundaryFunction::Constant(3.25), 1.0 / 16.0, DEFAULT_FD_TOL).unwrap();
        let (nx, ny) = grid.shape();
        for j in 0..ny {
            for i in 0..nx {
                assert_eq!(grid.value(i, j), 3.25);
            }
        }
    }

    #[test]
    fn interpolation_hits_nodes() {
        let f = BoundaryFunction::HarmonicPoly2D(HarmonicPoly::Xy);
        let grid = fd_solve(&square(), &f, 0.125, DEFAULT_FD_TOL).unwrap();
        let at = grid.interpolate(&Point::new(vec![0.25, 0.5]).unwrap()).unwrap();
        assert_eq!(at, grid.value(2, 4));
        let mid = grid.interpolate(&Point::new(vec![0.3, 0.7]).unwrap()).unwrap();
        assert!((mid - 0.21).abs() < 1e-3);
        assert!(grid.interpolate(&Point::new(vec![1.5, 0.5]).unwrap()).is_err());
    }

    #[test]
    fn input_errors() {
        let disk = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(matches!(
            fd_solve(&disk, &BoundaryFunction::Constant(1.0), 0.1, 1e-10),
            Err(Error::Unsupported(_))
        ));
        assert!(fd_solve(&square(), &BoundaryFunction::Constant(1.0), 0.3, 1e-10).is_err());
        let cube = Domain::axis_box(vec![0.0; 3], vec![1.0; 3]).unwrap();
        assert!(fd_solve(&cube, &BoundaryFunction::Constant(1.0), 0.25, 1e-10).is_err());
    }

    #[test]
    fn csv_has_one_row_per_node() {
        let grid = fd_solve(&square(), &BoundaryFunction::Coordinate(1), 0.25, DEFAULT_FD_TOL).unwrap();
        let mut buf = Vec::new();
        grid.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 25);
        assert!(text.starts_with("x,y,value\n"));
    }
}

//! Radial grids on the annulus `[1-eps, 1]` and the discrete mode-n radial
//! operator `L_n[psi] = -psi'' - psi'/r + (n^2/r^2) psi`.
//!
//! The default scheme is second-order finite differences, uniform in the
//! stretched coordinate `t = (1-r)/eps` (equivalently uniform in `r`, since
//! the map is affine), with one-sided second-order closures at both ends.
//! Stretching is what makes conditioning and attainable residuals
//! `eps`-independent: solvers scale interior rows by `eps^2` before
//! factorizing or measuring residuals. A Chebyshev collocation variant is
//! provided for convergence cross-checks.
//!
//! Sign conventions fixed here once: the outward normal on the inner circle
//! `r = 1-eps` points toward the blood (decreasing `r`), so a Robin
//! condition `du/dn + beta(u - u0) = 0` discretizes as `-u' + beta*u =
//! beta*u0`, and the Robin boundary row is `-D1[0,:] + beta*e_0`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::tolerances::GRID_MIN_NODES;

/// Node placement and differentiation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Uniform second-order finite differences on the stretched coordinate.
    UniformFd2,
    /// Chebyshev-Gauss-Lobatto collocation mapped to `[1-eps, 1]`.
    StretchedCollocation,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::UniformFd2 => "uniform-fd2",
            Scheme::StretchedCollocation => "stretched-collocation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uniform-fd2" | "uniform_fd2" | "fd2" => Some(Scheme::UniformFd2),
            "stretched-collocation" | "stretched_collocation" | "collocation" | "cheb" => {
                Some(Scheme::StretchedCollocation)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("grid too coarse for boundary closures (N = {0}, need >= {GRID_MIN_NODES})")]
    TooCoarse(usize),
    #[error("invalid annulus width eps = {0}")]
    BadEps(f64),
}

/// Immutable radial grid: nodes, differentiation operators, quadrature.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub eps: f64,
    pub scheme: Scheme,
    /// Strictly increasing, `nodes[0] = 1-eps`, `nodes[N-1] = 1`.
    pub nodes: Vec<f64>,
    /// First-derivative operator in `r` (dense `N x N`).
    pub d1: DMatrix<f64>,
    /// Second-derivative operator in `r`.
    pub d2: DMatrix<f64>,
    /// Weights with `sum_i quad[i] f(r_i) ~ int_{1-eps}^1 f dr`.
    pub quad: Vec<f64>,
}

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int_{1-eps}^1 f dr` by the grid's quadrature.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.quad.len());
        self.quad.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Running integral `int_{1-eps}^{r_i} f dr` at every node, by the
    /// parabola-per-interval rule (composite Simpson pairing where the
    /// interval count allows, one leftover parabola otherwise): O(h^4)
    /// globally on uniform grids, which dominates the FD2 error.
    pub fn cumulative_integral(&self, f: &[f64]) -> Vec<f64> {
        cumulative_integral(&self.nodes, f)
    }

    /// Nodal derivative `D1 f`.
    pub fn deriv(&self, f: &[f64]) -> Vec<f64> {
        apply(&self.d1, f)
    }

    /// Same `eps` and scheme with the spacing halved (`2N-1` nodes, so the
    /// coarse nodes are a subset and Richardson differences need no
    /// interpolation).
    pub fn refined(&self) -> RadialGrid {
        build_grid(self.eps, 2 * self.len() - 1, self.scheme).expect("refinement of valid grid")
    }
}

/// Dense matrix-vector product into a plain Vec.
pub fn apply(m: &DMatrix<f64>, f: &[f64]) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(m.ncols(), f.len());
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..f.len() {
            acc += m[(i, j)] * f[j];
        }
        out[i] = acc;
    }
    out
}

/// Builds the grid; node placement is deterministic in `(eps, N, scheme)`.
pub fn build_grid(eps: f64, n: usize, scheme: Scheme) -> Result<RadialGrid, GridError> {
    if !(eps > 0.0 && eps < 1.0) || !eps.is_finite() {
        return Err(GridError::BadEps(eps));
    }
    if n < GRID_MIN_NODES {
        return Err(GridError::TooCoarse(n));
    }
    let grid = match scheme {
        Scheme::UniformFd2 => build_uniform_fd2(eps, n),
        Scheme::StretchedCollocation => build_collocation(eps, n),
    };
    Ok(grid)
}

fn build_uniform_fd2(eps: f64, n: usize) -> RadialGrid {
    let m = n - 1;
    let h = eps / m as f64;
    let r0 = 1.0 - eps;
    let nodes: Vec<f64> = (0..n)
        .map(|i| if i == m { 1.0 } else { r0 + eps * i as f64 / m as f64 })
        .collect();

    let mut d1 = DMatrix::zeros(n, n);
    let mut d2 = DMatrix::zeros(n, n);
    let inv2h = 1.0 / (2.0 * h);
    let invh2 = 1.0 / (h * h);
    // One-sided second-order closures at both ends.
    d1[(0, 0)] = -3.0 * inv2h;
    d1[(0, 1)] = 4.0 * inv2h;
    d1[(0, 2)] = -inv2h;
    d1[(m, m)] = 3.0 * inv2h;
    d1[(m, m - 1)] = -4.0 * inv2h;
    d1[(m, m - 2)] = inv2h;
    d2[(0, 0)] = 2.0 * invh2;
    d2[(0, 1)] = -5.0 * invh2;
    d2[(0, 2)] = 4.0 * invh2;
    d2[(0, 3)] = -invh2;
    d2[(m, m)] = 2.0 * invh2;
    d2[(m, m - 1)] = -5.0 * invh2;
    d2[(m, m - 2)] = 4.0 * invh2;
    d2[(m, m - 3)] = -invh2;
    for i in 1..m {
        d1[(i, i - 1)] = -inv2h;
        d1[(i, i + 1)] = inv2h;
        d2[(i, i - 1)] = invh2;
        d2[(i, i)] = -2.0 * invh2;
        d2[(i, i + 1)] = invh2;
    }

    let quad = newton_cotes_weights(n, h);
    RadialGrid { eps, scheme: Scheme::UniformFd2, nodes, d1, d2, quad }
}

/// Composite Simpson weights, with a 3/8 tail when the interval count is
/// odd. Exact for cubics either way, so `int r dr` is reproduced to
/// roundoff.
fn newton_cotes_weights(n: usize, h: f64) -> Vec<f64> {
    let m = n - 1;
    let mut w = vec![0.0; n];
    let simpson_pairs = if m % 2 == 0 { m / 2 } else { (m - 3) / 2 };
    for k in 0..simpson_pairs {
        let i = 2 * k;
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if m % 2 != 0 {
        let i = m - 3;
        w[i] += 3.0 * h / 8.0;
        w[i + 1] += 9.0 * h / 8.0;
        w[i + 2] += 9.0 * h / 8.0;
        w[i + 3] += 3.0 * h / 8.0;
    }
    w
}

fn build_collocation(eps: f64, n: usize) -> RadialGrid {
    let m = n - 1;
    // x_j = cos(j pi / m) runs 1 -> -1; r = 1 - eps (1+x)/2 runs 1-eps -> 1,
    // so nodes come out increasing without reordering.
    let theta: Vec<f64> = (0..n).map(|j| std::f64::consts::PI * j as f64 / m as f64).collect();
    let x: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
    let mut nodes: Vec<f64> = x.iter().map(|&xi| 1.0 - eps * (1.0 + xi) / 2.0).collect();
    nodes[0] = 1.0 - eps;
    nodes[m] = 1.0;

    // Standard differentiation matrix on the x_j, negative-sum diagonal.
    let mut dx = DMatrix::zeros(n, n);
    let c = |i: usize| if i == 0 || i == m { 2.0 } else { 1.0 };
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                dx[(i, j)] = c(i) / c(j) * sign / (x[i] - x[j]);
            }
        }
    }
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            if j != i {
                s += dx[(i, j)];
            }
        }
        dx[(i, i)] = -s;
    }
    // dr/dx = -eps/2.
    let d1 = dx.clone() * (-2.0 / eps);
    let mut d2 = &d1 * &d1;
    // Negative-sum correction on D2 as well; D2 of a constant must vanish.
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            if j != i {
                s += d2[(i, j)];
            }
        }
        d2[(i, i)] = -s;
    }

    // Clenshaw-Curtis weights on [-1, 1], scaled by eps/2.
    let mut wx = vec![0.0; n];
    if m % 2 == 0 {
        wx[0] = 1.0 / (m * m - 1) as f64;
        wx[m] = wx[0];
        for (i, wi) in wx.iter_mut().enumerate().take(m).skip(1) {
            let mut v = 1.0;
            for k in 1..m / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta[i]).cos() / (4 * k * k - 1) as f64;
            }
            v -= (m as f64 * theta[i]).cos() / (m * m - 1) as f64;
            *wi = 2.0 * v / m as f64;
        }
    } else {
        wx[0] = 1.0 / (m * m) as f64;
        wx[m] = wx[0];
        for (i, wi) in wx.iter_mut().enumerate().take(m).skip(1) {
            let mut v = 1.0;
            for k in 1..=(m - 1) / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta[i]).cos() / (4 * k * k - 1) as f64;
            }
            *wi = 2.0 * v / m as f64;
        }
    }
    let quad: Vec<f64> = wx.iter().map(|w| w * eps / 2.0).collect();

    RadialGrid { eps, scheme: Scheme::StretchedCollocation, nodes, d1, d2, quad }
}

/// Running integral of samples `f` over arbitrary strictly increasing nodes.
///
/// Interval `i` is integrated with the parabola through the node triple
/// anchored at the even index (`i, i+1, i+2` for even `i`, `i-1, i, i+1` for
/// odd), which reproduces composite Simpson pairing and its error
/// cancellation; an odd interval count leaves one backward-parabola tail.
pub fn cumulative_integral(nodes: &[f64], f: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    assert_eq!(f.len(), n);
    assert!(n >= 3, "need at least 3 nodes for parabolic integration");
    let m = n - 1;
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    for i in 0..m {
        let (a, b, c) = if i % 2 == 0 {
            if i + 2 <= m {
                (i, i + 1, i + 2)
            } else {
                (i - 2, i - 1, i)
            }
        } else {
            (i - 1, i, i + 1)
        };
        acc += parabola_segment(
            nodes[a], nodes[b], nodes[c], f[a], f[b], f[c], nodes[i], nodes[i + 1],
        );
        out[i + 1] = acc;
    }
    out
}

/// Integral over `[lo, hi]` of the quadratic through `(x0,f0),(x1,f1),(x2,f2)`,
/// in Newton form so it is exact for quadratics up to roundoff.
fn parabola_segment(
    x0: f64,
    x1: f64,
    x2: f64,
    f0: f64,
    f1: f64,
    f2: f64,
    lo: f64,
    hi: f64,
) -> f64 {
    let d01 = (f1 - f0) / (x1 - x0);
    let d12 = (f2 - f1) / (x2 - x1);
    let d012 = (d12 - d01) / (x2 - x0);
    // p(x) = f0 + d01 (x-x0) + d012 (x-x0)(x-x1)
    let prim = |x: f64| {
        let u = x - x0;
        f0 * u + d01 * u * u / 2.0 + d012 * (u * u * u / 3.0 - (x1 - x0) * u * u / 2.0)
    };
    prim(hi) - prim(lo)
}

/// Inner-boundary closure for the mode operator; the outer closure at `r = 1`
/// is always homogeneous Neumann in this model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerBc {
    /// Row `-psi' + beta psi` at `r = 1-eps`.
    Robin { beta: f64 },
    /// Row `psi` at `r = 1-eps`.
    Dirichlet,
}

/// Discretization of `L_n` with boundary rows substituted for the closures.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    pub n: u32,
    pub inner_bc: InnerBc,
    pub matrix: DMatrix<f64>,
}

/// Interior rows discretize `-psi'' - psi'/r + (n^2/r^2) psi`; row 0 carries
/// the requested inner closure and row N-1 the Neumann closure `psi'(1)`.
pub fn assemble_mode_operator(grid: &RadialGrid, n: u32, inner_bc: InnerBc) -> ModeOperator {
    let nn = grid.len();
    let mut matrix = DMatrix::zeros(nn, nn);
    let n2 = (n as f64) * (n as f64);
    for i in 1..nn - 1 {
        let r = grid.nodes[i];
        for j in 0..nn {
            matrix[(i, j)] = -grid.d2[(i, j)] - grid.d1[(i, j)] / r;
        }
        matrix[(i, i)] += n2 / (r * r);
    }
    match inner_bc {
        InnerBc::Robin { beta } => {
            for j in 0..nn {
                matrix[(0, j)] = -grid.d1[(0, j)];
            }
            matrix[(0, 0)] += beta;
        }
        InnerBc::Dirichlet => {
            matrix[(0, 0)] = 1.0;
        }
    }
    for j in 0..nn {
        matrix[(nn - 1, j)] = grid.d1[(nn - 1, j)];
    }
    ModeOperator { n, inner_bc, matrix }
}

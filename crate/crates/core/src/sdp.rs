//! Max-slack Hermitian SDP with unit diagonal:
//!
//! ```text
//! maximize s  subject to  tr(A_i V) ≥ b_i + s,  diag(V) = 1,  V ⪰ 0.
//! ```
//!
//! Two first-order solvers share the same contract:
//!
//! * [`SdpMethod::Admm`] splits `V = W` with `W` in the PSD cone. The
//!   `(V, s)` step has a closed form through a simplex-constrained QP whose
//!   size is the number of constraints.
//! * [`SdpMethod::Bisection`] bisects on `s` and decides each level with
//!   Dykstra's alternating projections between the PSD cone and the affine
//!   set `{diag V = 1, tr(A_i V) ≥ b_i + s}`.
//!
//! Whatever the method, the returned `V` is an exact unit-diagonal PSD matrix
//! (a diagonal congruence of a PSD iterate) and `slack` is recomputed from it.

use log::debug;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::{hermitian_defect, min_eigenvalue, project_psd, quad_form, trace_product, unit_diagonal_congruence, CMatrix};

/// `tr(A V) ≥ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceConstraint {
    pub a: CMatrix,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpInstance {
    n: usize,
    constraints: Vec<TraceConstraint>,
}

impl SdpInstance {
    pub fn new(n: usize, constraints: Vec<TraceConstraint>) -> Result<Self> {
        if n == 0 {
            return domain("SDP dimension must be at least 1");
        }
        for (i, c) in constraints.iter().enumerate() {
            if c.a.nrows() != n || c.a.ncols() != n {
                return domain(format!("constraint {i} is {}x{}, expected {n}x{n}", c.a.nrows(), c.a.ncols()));
            }
            if hermitian_defect(&c.a) > 1e-12 * c.a.norm().max(1.0) {
                return domain(format!("constraint {i} is not Hermitian"));
            }
            if !c.b.is_finite() {
                return domain(format!("constraint {i} has a non-finite bound"));
            }
        }
        Ok(Self { n, constraints })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn constraints(&self) -> &[TraceConstraint] {
        &self.constraints
    }

    /// The diagonal of `V` is always pinned to one.
    pub fn unit_diagonal(&self) -> bool {
        true
    }

    pub fn margins(&self, v: &CMatrix) -> Vec<f64> {
        self.constraints.iter().map(|c| trace_product(&c.a, v) - c.b).collect()
    }

    /// Margins at `V = x x^H`.
    pub fn rank_one_margins(&self, x: &[Complex64]) -> Vec<f64> {
        self.constraints.iter().map(|c| quad_form(&c.a, x) - c.b).collect()
    }

    pub fn min_margin(&self, v: &CMatrix) -> f64 {
        min_of(&self.margins(v))
    }
}

pub(crate) fn min_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SdpMethod {
    Admm,
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SdpOptions {
    pub method: SdpMethod,
    /// An instance counts as feasible when its slack is at least `-tol_feas`.
    pub tol_feas: f64,
    pub tol_bisect: f64,
    pub bisect_lo: f64,
    pub bisect_hi: f64,
    /// Projection pairs per bisection level.
    pub inner_cap: usize,
    pub outer_cap: usize,
    pub admm_tol: f64,
    pub admm_max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            method: SdpMethod::Admm,
            tol_feas: 1e-6,
            tol_bisect: 1e-4,
            bisect_lo: -2.0,
            bisect_hi: 2.0,
            inner_cap: 5000,
            outer_cap: 40,
            admm_tol: 1e-7,
            admm_max_iter: 5000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    /// Converged with negative slack; no dual certificate is produced.
    InfeasibleCertificateFree,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub v: CMatrix,
    pub slack: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn is_sdr_feasible(&self, tol_feas: f64) -> bool {
        self.slack >= -tol_feas
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionReport {
    pub margins: Vec<f64>,
    pub max_diag_deviation: f64,
    pub min_eigenvalue: f64,
}

pub fn check_solution(inst: &SdpInstance, sol: &SdpSolution) -> SolutionReport {
    let v = &sol.v;
    SolutionReport {
        margins: inst.margins(v),
        max_diag_deviation: (0..v.nrows()).map(|i| (v[(i, i)] - Complex64::new(1.0, 0.0)).norm()).fold(0.0, f64::max),
        min_eigenvalue: min_eigenvalue(v),
    }
}

pub fn solve_max_slack(inst: &SdpInstance, opts: &SdpOptions) -> SdpSolution {
    let geom = Geometry::new(inst);
    let mut sol = match opts.method {
        SdpMethod::Admm => admm(inst, &geom, opts),
        SdpMethod::Bisection => bisection(inst, &geom, opts),
    };
    if sol.status == SdpStatus::Optimal && sol.slack < -opts.tol_feas {
        sol.status = SdpStatus::InfeasibleCertificateFree;
    }
    debug!("sdp n={} status={:?} slack={:.3e} iters={}", inst.n, sol.status, sol.slack, sol.iterations);
    sol
}

/// Off-diagonal parts of the constraint matrices and their Gram matrix.
struct Geometry {
    off: Vec<CMatrix>,
    gram: Vec<Vec<f64>>,
}

impl Geometry {
    fn new(inst: &SdpInstance) -> Self {
        let off: Vec<CMatrix> = inst
            .constraints
            .iter()
            .map(|c| {
                let mut a = c.a.clone();
                for i in 0..inst.n {
                    a[(i, i)] = Complex64::new(0.0, 0.0);
                }
                a
            })
            .collect();
        let gram = off
            .iter()
            .map(|x| off.iter().map(|y| trace_product(x, y)).collect())
            .collect();
        Self { off, gram }
    }

    fn combine(&self, base: &CMatrix, y: &[f64], scale: f64) -> CMatrix {
        let mut out = base.clone();
        for (yi, a) in y.iter().zip(&self.off) {
            if *yi != 0.0 {
                out += a * Complex64::new(yi * scale, 0.0);
            }
        }
        out
    }
}

fn with_unit_diagonal(x: &CMatrix) -> CMatrix {
    let mut out = crate::linalg::hermitian_part(x);
    for i in 0..out.nrows() {
        out[(i, i)] = Complex64::new(1.0, 0.0);
    }
    out
}

/// Solves the square system `m x = rhs`. `None` when numerically singular.
fn solve_dense(m: Vec<Vec<f64>>, rhs: Vec<f64>) -> Option<Vec<f64>> {
    let k = rhs.len();
    let a = DMatrix::from_fn(k, k, |i, j| m[i][j]);
    let scale = a.amax().max(1e-300);
    let lu = a.full_piv_lu();
    if lu.u().diagonal().iter().any(|d| d.abs() <= 1e-13 * scale) {
        return None;
    }
    lu.solve(&DVector::from_vec(rhs)).map(|x| x.iter().copied().collect())
}

fn supports(m: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1u32 << m)).map(move |mask| (0..m).filter(|i| mask & (1 << i) != 0).collect())
}

/// `argmin_{y ≥ 0} ½ yᵀ G y − rᵀ y` by enumerating supports.
/// `None` if some constraint cannot be met at all (`G_ii = 0`, `r_i > 0`).
fn nonneg_qp(g: &[Vec<f64>], r: &[f64]) -> Option<Vec<f64>> {
    let m = r.len();
    let tol = 1e-12 * (1.0 + g.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs())));
    if r.iter().all(|&ri| ri <= 0.0) {
        return Some(vec![0.0; m]);
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for s in supports(m) {
        let gs: Vec<Vec<f64>> = s.iter().map(|&i| s.iter().map(|&j| g[i][j]).collect()).collect();
        let Some(ys) = solve_dense(gs, s.iter().map(|&i| r[i]).collect()) else { continue };
        if ys.iter().any(|&v| v < -tol) {
            continue;
        }
        let mut y = vec![0.0; m];
        for (k, &i) in s.iter().enumerate() {
            y[i] = ys[k].max(0.0);
        }
        let gy: Vec<f64> = (0..m).map(|i| (0..m).map(|j| g[i][j] * y[j]).sum()).collect();
        if (0..m).all(|j| gy[j] >= r[j] - tol * (1.0 + r[j].abs())) {
            let obj = 0.5 * y.iter().zip(&gy).map(|(a, b)| a * b).sum::<f64>() - y.iter().zip(r).map(|(a, b)| a * b).sum::<f64>();
            if best.as_ref().is_none_or(|(o, _)| obj < *o) {
                best = Some((obj, y));
            }
        }
    }
    best.map(|(_, y)| y)
}

/// `argmin_{y ∈ simplex} cᵀ y + yᵀ G y / (2ρ)`; returns `(y, μ)` where `μ`
/// is the common value of `c_i + (G y)_i / ρ` on the support.
fn simplex_qp(g: &[Vec<f64>], c: &[f64], rho: f64) -> (Vec<f64>, f64) {
    let m = c.len();
    let tol = 1e-12 * (1.0 + c.iter().fold(0.0f64, |a, x| a.max(x.abs())));
    let value = |y: &[f64], i: usize| c[i] + (0..m).map(|j| g[i][j] * y[j]).sum::<f64>() / rho;
    for s in supports(m) {
        let k = s.len();
        let mut mat = vec![vec![0.0; k + 1]; k + 1];
        let mut rhs = vec![0.0; k + 1];
        for (a, &i) in s.iter().enumerate() {
            for (b, &j) in s.iter().enumerate() {
                mat[a][b] = g[i][j] / rho;
            }
            mat[a][k] = -1.0;
            rhs[a] = -c[i];
            mat[k][a] = 1.0;
        }
        rhs[k] = 1.0;
        let Some(sol) = solve_dense(mat, rhs) else { continue };
        if sol[..k].iter().any(|&v| v < -1e-12) {
            continue;
        }
        let mut y = vec![0.0; m];
        for (a, &i) in s.iter().enumerate() {
            y[i] = sol[a].max(0.0);
        }
        let mu = sol[k];
        if (0..m).all(|j| value(&y, j) >= mu - tol) {
            let mu = (0..m).map(|j| value(&y, j)).fold(f64::INFINITY, f64::min);
            return (y, mu);
        }
    }
    // Degenerate Gram matrix: projected gradient on the simplex.
    let mut y = vec![1.0 / m as f64; m];
    let lip = g.iter().map(|row| row.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max) / rho;
    let step = 1.0 / lip.max(1e-12);
    for _ in 0..2000 {
        let grad: Vec<f64> = (0..m).map(|i| value(&y, i)).collect();
        let z: Vec<f64> = y.iter().zip(&grad).map(|(a, b)| a - step * b).collect();
        y = project_simplex(&z);
    }
    let mu = (0..m).map(|j| value(&y, j)).fold(f64::INFINITY, f64::min);
    (y, mu)
}

fn project_simplex(z: &[f64]) -> Vec<f64> {
    let mut u = z.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            tau = t;
        }
    }
    z.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// Unit-diagonal PSD candidate built from a PSD iterate, with its slack.
fn certify(inst: &SdpInstance, w: &CMatrix) -> Option<(CMatrix, f64)> {
    let v = unit_diagonal_congruence(w)?;
    let s = inst.min_margin(&v);
    Some((v, s))
}

fn admm(inst: &SdpInstance, geom: &Geometry, opts: &SdpOptions) -> SdpSolution {
    let n = inst.n;
    let m = inst.constraints.len();
    let identity = CMatrix::identity(n, n);
    let mut best = (identity.clone(), inst.min_margin(&identity));
    if m == 0 {
        return SdpSolution {
            v: best.0,
            slack: f64::INFINITY,
            status: SdpStatus::Optimal,
            iterations: 0,
        };
    }
    let mut w = identity;
    let mut u = CMatrix::zeros(n, n);
    let mut rho = 1.0;
    let scale = n as f64;
    let mut iterations = 0;
    let mut converged = false;
    for k in 0..opts.admm_max_iter {
        iterations = k + 1;
        let x = with_unit_diagonal(&(&w - &u));
        let c: Vec<f64> = inst
            .constraints
            .iter()
            .map(|con| trace_product(&con.a, &x) - con.b)
            .collect();
        let (y, _) = simplex_qp(&geom.gram, &c, rho);
        let v = geom.combine(&x, &y, 1.0 / rho);
        let w_prev = std::mem::replace(&mut w, project_psd(&(&v + &u)));
        let r = &v - &w;
        u += &r;
        let r_pri = r.norm();
        let r_dual = rho * (&w - &w_prev).norm();

        if k % 10 == 0 || r_pri <= opts.admm_tol * scale {
            if let Some(cand) = certify(inst, &w) {
                if cand.1 > best.1 {
                    best = cand;
                }
            }
        }
        if r_pri <= opts.admm_tol * scale && r_dual <= opts.admm_tol * scale {
            converged = true;
            break;
        }
        if r_pri > 10.0 * r_dual {
            rho *= 2.0;
            u /= Complex64::new(2.0, 0.0);
        } else if r_dual > 10.0 * r_pri {
            rho /= 2.0;
            u *= Complex64::new(2.0, 0.0);
        }
    }
    SdpSolution {
        v: best.0,
        slack: best.1,
        status: if converged { SdpStatus::Optimal } else { SdpStatus::MaxIterations },
        iterations,
    }
}

/// Projection onto `{diag V = 1, tr(A_i V) ≥ b_i + s}`; `None` if empty.
fn project_affine(inst: &SdpInstance, geom: &Geometry, x: &CMatrix, s: f64) -> Option<CMatrix> {
    let base = with_unit_diagonal(x);
    let r: Vec<f64> = inst
        .constraints
        .iter()
        .map(|c| c.b + s - trace_product(&c.a, &base))
        .collect();
    let y = nonneg_qp(&geom.gram, &r)?;
    Some(geom.combine(&base, &y, 1.0))
}

enum Level {
    Feasible(CMatrix, f64),
    Infeasible,
    /// Inner cap reached without a verdict.
    Undecided,
}

/// Dykstra between the PSD cone and the level-`s` affine set.
fn level_feasible(inst: &SdpInstance, geom: &Geometry, s: f64, warm: &CMatrix, opts: &SdpOptions, used: &mut usize) -> Level {
    let n = inst.n;
    let mut x = warm.clone();
    let mut p = CMatrix::zeros(n, n);
    let mut q = CMatrix::zeros(n, n);
    for k in 0..opts.inner_cap {
        *used += 1;
        let y = project_psd(&(&x + &p));
        p = &x + &p - &y;
        if let Some((v, slack)) = certify(inst, &y) {
            if slack >= s - 1e-9 {
                return Level::Feasible(v, slack);
            }
        }
        let Some(x_new) = project_affine(inst, geom, &(&y + &q), s) else {
            return Level::Infeasible;
        };
        q = &y + &q - &x_new;
        let moved = (&x_new - &x).norm();
        x = x_new;
        if k > 20 && moved <= 1e-12 * n as f64 {
            return Level::Infeasible;
        }
    }
    Level::Undecided
}

fn bisection(inst: &SdpInstance, geom: &Geometry, opts: &SdpOptions) -> SdpSolution {
    let n = inst.n;
    let identity = CMatrix::identity(n, n);
    let mut best = (identity.clone(), inst.min_margin(&identity));
    if inst.constraints.is_empty() {
        return SdpSolution {
            v: best.0,
            slack: f64::INFINITY,
            status: SdpStatus::Optimal,
            iterations: 0,
        };
    }
    let mut lo = opts.bisect_lo.max(best.1);
    let mut hi = opts.bisect_hi;
    let mut used = 0;
    let mut steps = 0;
    let mut undecided = false;
    while hi - lo > opts.tol_bisect && steps < opts.outer_cap {
        steps += 1;
        let s = 0.5 * (lo + hi);
        match level_feasible(inst, geom, s, &best.0, opts, &mut used) {
            Level::Feasible(v, slack) => {
                lo = s.max(slack.min(hi));
                if slack > best.1 {
                    best = (v, slack);
                }
            }
            Level::Infeasible => hi = s,
            Level::Undecided => {
                undecided = true;
                hi = s;
            }
        }
    }
    SdpSolution {
        v: best.0,
        slack: best.1,
        status: if !undecided && (hi - lo <= opts.tol_bisect || best.1 >= hi) {
            SdpStatus::Optimal
        } else {
            SdpStatus::MaxIterations
        },
        iterations: used,
    }
}

/// Convenience for tests and examples: `n×n` real symmetric matrix from rows.
pub fn real_matrix(rows: &[&[f64]]) -> CMatrix {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0))
}

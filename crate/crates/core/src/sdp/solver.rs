//! Infeasible-start primal-dual path following with the Nesterov–Todd
//! direction and a Mehrotra predictor-corrector step.
//!
//! Each Newton system is reduced to the Schur complement
//! `H_ij = tr(A_i W A_j W)`, formed densely and factored by Cholesky. The
//! products `W A_j W` only touch the columns of `A_j` that are nonzero,
//! which keeps moment-matrix problems (hundreds of two-entry constraints)
//! cheap without a general sparse code path.

use alloc::vec;
use alloc::vec::Vec;

use super::{SdpProblem, Sense, SparseSym};
use crate::linalg::{symmetric_eig, symmetric_eigenvalues, Cholesky, RealMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub max_iterations: usize,
    /// Relative duality gap `|p − d| / (1 + |p| + |d|)` at which to stop.
    pub gap_tol: f64,
    /// Largest residual entry, relative to `1 + max|b_i|` (primal) or
    /// `1 + max|C_ij|` (dual), at which to stop.
    pub feasibility_tol: f64,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gap_tol: 1e-8,
            feasibility_tol: 1e-8,
            step_fraction: 0.98,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    NumericalFailure,
}

/// Objectives and residuals at the start of one iteration, in the caller's
/// sense.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateRecord {
    pub primal_obj: f64,
    pub dual_obj: f64,
    /// `⟨X, S⟩`, nonnegative while both iterates are interior.
    pub complementarity: f64,
    /// `max_i |b_i − ⟨A_i, X⟩|`.
    pub primal_residual: f64,
    /// `max |C − S − Σ y_i A_i|` (entrywise, internal minimization form).
    pub dual_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub x: RealMatrix,
    pub y: Vec<f64>,
    pub s: RealMatrix,
    pub primal_obj: f64,
    pub dual_obj: f64,
    /// Duality gap oriented so that it is nonnegative at feasible points:
    /// `primal − dual` when minimizing, `dual − primal` when maximizing.
    pub gap: f64,
    pub status: SdpStatus,
    /// Stopping measures of the returned iterate.
    pub accuracy: Accuracy,
    pub iterations: usize,
    pub trace: Vec<IterateRecord>,
}

/// The three quantities the stopping test compares against tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracy {
    /// `|p − d| / (1 + |p| + |d|)`.
    pub relative_gap: f64,
    /// `max_i |b_i − ⟨A_i, X⟩| / (1 + max|b_i|)`.
    pub primal_infeasibility: f64,
    /// `max |C − S − Σ y_i A_i| / (1 + max|C_ij|)`.
    pub dual_infeasibility: f64,
}

impl Accuracy {
    /// Worst of the three.
    pub fn merit(&self) -> f64 {
        self.relative_gap
            .max(self.primal_infeasibility)
            .max(self.dual_infeasibility)
    }
}

pub fn solve(problem: &SdpProblem) -> SdpSolution {
    solve_with(problem, &SolverSettings::default())
}

pub fn solve_with(problem: &SdpProblem, settings: &SolverSettings) -> SdpSolution {
    Solver::new(problem).run(settings)
}

const REFINEMENT_PASSES: usize = 2;
const BACKTRACK_LIMIT: usize = 20;
/// Give up when the best merit has not dropped by `STALL_FACTOR` for this
/// many iterations.
const STALL_WINDOW: usize = 40;
const STALL_FACTOR: f64 = 0.9;
const FRAC_1_SQRT_3: f64 = 0.577_350_269_189_625_8;

struct Solver<'a> {
    n: usize,
    /// Objective in minimization form.
    c: RealMatrix,
    a: Vec<&'a SparseSym>,
    b: Vec<f64>,
    sign: f64,
    c_norm: f64,
    c_max: f64,
    b_max: f64,
}

struct Direction {
    dx: RealMatrix,
    dy: Vec<f64>,
    ds: RealMatrix,
}

/// Nesterov–Todd scaling point: `W S W = X`, `W = G Gᵀ`, and
/// `G⁻¹ X G⁻ᵀ = Gᵀ S G = diag(v)`.
struct NtScaling {
    w: RealMatrix,
    g: RealMatrix,
    g_inv: RealMatrix,
    v: Vec<f64>,
}

impl NtScaling {
    /// From `X = L Lᵀ`: with `Lᵀ S L = Q diag(v²) Qᵀ`, `G = L Q diag(v)^{-1/2}`.
    fn new(lx: &Cholesky, s: &RealMatrix) -> Option<Self> {
        let l = lx.lower();
        let mut m = l.transpose().matmul(s).matmul(l);
        m.symmetrize();
        let eig = symmetric_eig(&m).ok()?;
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN counts as not positive
        if eig.eigenvalues.iter().any(|&e| !(e > 0.0)) {
            return None;
        }
        let v: Vec<f64> = eig.eigenvalues.iter().map(|e| libm::sqrt(*e)).collect();
        let q = &eig.eigenvectors;
        let n = v.len();
        let lq = l.matmul(q);
        let g = RealMatrix::from_fn(n, n, |i, j| lq[(i, j)] / libm::sqrt(v[j]));
        let qt_linv = q.transpose().matmul(&lx.lower_inverse());
        let g_inv = RealMatrix::from_fn(n, n, |i, j| libm::sqrt(v[i]) * qt_linv[(i, j)]);
        let mut w = g.matmul(&g.transpose());
        w.symmetrize();
        Some(Self { w, g, g_inv, v })
    }
}

impl<'a> Solver<'a> {
    fn new(problem: &'a SdpProblem) -> Self {
        let sign = match problem.sense() {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let c = problem.objective().scale(sign);
        let b: Vec<f64> = problem.constraints().iter().map(|k| k.b).collect();
        Self {
            n: problem.dim(),
            c_norm: c.frobenius_norm(),
            c_max: c.max_abs(),
            b_max: b.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            c,
            a: problem.constraints().iter().map(|k| &k.a).collect(),
            b,
            sign,
        }
    }

    fn run(&self, settings: &SolverSettings) -> SdpSolution {
        let n = self.n;
        let tau = 1.0f64.max(self.c_norm).max(self.b_max);
        let mut x = RealMatrix::identity(n).scale(tau);
        let mut s = x.clone();
        let mut y = vec![0.0; self.a.len()];
        let mut trace = Vec::new();
        let mut status = SdpStatus::MaxIterations;
        let mut steps = 0;
        let mut best: Option<(Accuracy, RealMatrix, Vec<f64>, RealMatrix)> = None;
        let mut last_progress = 0;

        for iter in 0..settings.max_iterations {
            let rp = self.primal_residual(&x);
            let rd = self.dual_residual(&y, &s);
            let pobj = self.c.inner(&x);
            let dobj = dot(&self.b, &y);
            let xs = x.inner(&s);
            let record = IterateRecord {
                primal_obj: self.sign * pobj,
                dual_obj: self.sign * dobj,
                complementarity: xs,
                primal_residual: rp.iter().fold(0.0, |m, v| m.max(v.abs())),
                dual_residual: rd.max_abs(),
            };
            trace.push(record);
            let acc = self.accuracy(&record);
            if !acc.merit().is_finite() {
                status = SdpStatus::NumericalFailure;
                break;
            }
            if best.as_ref().is_none_or(|b| acc.merit() < b.0.merit()) {
                if best
                    .as_ref()
                    .is_none_or(|b| acc.merit() < STALL_FACTOR * b.0.merit())
                {
                    last_progress = iter;
                }
                best = Some((acc, x.clone(), y.clone(), s.clone()));
            }
            if acc.relative_gap <= settings.gap_tol
                && acc.primal_infeasibility <= settings.feasibility_tol
                && acc.dual_infeasibility <= settings.feasibility_tol
            {
                status = SdpStatus::Optimal;
                break;
            }
            if iter - last_progress > STALL_WINDOW {
                status = SdpStatus::NumericalFailure;
                break;
            }

            let Some(step) = self.step(&x, &s, &rp, &rd, settings) else {
                status = SdpStatus::NumericalFailure;
                break;
            };
            let (dir, mut ap, mut ad) = step;
            // Roundoff can push a boundary-hugging step just outside the
            // cone; shorten it until both iterates factor again.
            let mut accepted = false;
            for _ in 0..BACKTRACK_LIMIT {
                let mut xn = x.clone();
                xn.axpy(ap, &dir.dx);
                xn.symmetrize();
                let mut sn = s.clone();
                sn.axpy(ad, &dir.ds);
                sn.symmetrize();
                if Cholesky::factor(&xn, 0.0).is_ok() && Cholesky::factor(&sn, 0.0).is_ok() {
                    x = xn;
                    s = sn;
                    accepted = true;
                    break;
                }
                ap *= 0.5;
                ad *= 0.5;
            }
            if !accepted {
                status = SdpStatus::NumericalFailure;
                break;
            }
            for (yi, di) in y.iter_mut().zip(&dir.dy) {
                *yi += ad * di;
            }
            steps += 1;
        }

        // An unconverged run reports the most accurate iterate it visited.
        if status != SdpStatus::Optimal {
            if let Some((_, bx, by, bs)) = best {
                x = bx;
                y = by;
                s = bs;
            }
        }
        let pobj = self.c.inner(&x);
        let dobj = dot(&self.b, &y);
        let final_record = IterateRecord {
            primal_obj: pobj,
            dual_obj: dobj,
            complementarity: x.inner(&s),
            primal_residual: self
                .primal_residual(&x)
                .iter()
                .fold(0.0, |m, v| m.max(v.abs())),
            dual_residual: self.dual_residual(&y, &s).max_abs(),
        };
        SdpSolution {
            iterations: steps,
            accuracy: self.accuracy(&final_record),
            x,
            y: y.iter().map(|v| self.sign * v).collect(),
            s,
            primal_obj: self.sign * pobj,
            dual_obj: self.sign * dobj,
            gap: pobj - dobj,
            status,
            trace,
        }
    }

    fn accuracy(&self, r: &IterateRecord) -> Accuracy {
        Accuracy {
            relative_gap: (r.primal_obj - r.dual_obj).abs()
                / (1.0 + r.primal_obj.abs() + r.dual_obj.abs()),
            primal_infeasibility: r.primal_residual / (1.0 + self.b_max),
            dual_infeasibility: r.dual_residual / (1.0 + self.c_max),
        }
    }

    /// One predictor-corrector step; `None` when the iterates or the Schur
    /// complement lose definiteness.
    fn step(
        &self,
        x: &RealMatrix,
        s: &RealMatrix,
        rp: &[f64],
        rd: &RealMatrix,
        settings: &SolverSettings,
    ) -> Option<(Direction, f64, f64)> {
        let n = self.n as f64;
        let lx = Cholesky::factor(x, 0.0).ok()?;
        let ls = Cholesky::factor(s, 0.0).ok()?;
        let nt = NtScaling::new(&lx, s)?;
        let h = self.schur(&nt.w, &nt.w);
        let hf = factor_regularized(&h)?;
        let mu = x.inner(s) / n;
        let w_rd_w = nt.w.matmul(rd).matmul(&nt.w);

        let pred = self.direction(&nt, rp, rd, &w_rd_w, &hf, 0.0, None)?;
        let ap = max_step(&lx, &pred.dx)?.min(1.0);
        let ad = max_step(&ls, &pred.ds)?.min(1.0);
        let mut xa = x.clone();
        xa.axpy(ap, &pred.dx);
        let mut sa = s.clone();
        sa.axpy(ad, &pred.ds);
        let mu_aff = xa.inner(&sa) / n;
        // Short predictor steps mean the iterates have drifted from the
        // central path; center harder by flattening the exponent.
        let short = ap.min(ad);
        let expon = if short < FRAC_1_SQRT_3 {
            1.0
        } else {
            (3.0 * short * short).max(1.0)
        };
        let sigma = libm::pow((mu_aff / mu).clamp(0.0, 1.0), expon);

        let corr = self.direction(&nt, rp, rd, &w_rd_w, &hf, sigma * mu, Some(&pred))?;
        let ap = (settings.step_fraction * max_step(&lx, &corr.dx)?).min(1.0);
        let ad = (settings.step_fraction * max_step(&ls, &corr.ds)?).min(1.0);
        Some((corr, ap, ad))
    }

    /// Solves for `(dX, dy, dS)` with
    /// `dX = G Z Gᵀ − W dS W`, `dS = R_d − Σ dy_i A_i`, `⟨A_i, dX⟩ = r_p,i`,
    /// where `Z` solves the scaled complementarity equation
    /// `V Z + Z V = 2σμ I − 2V² − (dX̃ dS̃ + dS̃ dX̃)` with the predictor's
    /// scaled direction in the corrector term.
    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        nt: &NtScaling,
        rp: &[f64],
        rd: &RealMatrix,
        w_rd_w: &RealMatrix,
        hf: &Cholesky,
        sigma_mu: f64,
        pred: Option<&Direction>,
    ) -> Option<Direction> {
        let n = self.n;
        let d = &nt.v;
        let mut rhs_c = RealMatrix::zeros(n, n);
        for i in 0..n {
            rhs_c[(i, i)] = 2.0 * (sigma_mu - d[i] * d[i]);
        }
        if let Some(p) = pred {
            let dxs = nt.g_inv.matmul(&p.dx).matmul(&nt.g_inv.transpose());
            let dss = nt.g.transpose().matmul(&p.ds).matmul(&nt.g);
            let k = dxs.matmul(&dss);
            rhs_c.axpy(-1.0, &k);
            rhs_c.axpy(-1.0, &k.transpose());
        }
        let z = RealMatrix::from_fn(n, n, |i, j| rhs_c[(i, j)] / (d[i] + d[j]));
        // Everything in dX that does not depend on dy.
        let mut base = nt.g.matmul(&z).matmul(&nt.g.transpose());
        base.axpy(-1.0, w_rd_w);
        base.symmetrize();
        let rhs: Vec<f64> = self
            .a
            .iter()
            .zip(rp)
            .map(|(a, r)| r - a.inner(&base))
            .collect();
        let mut dy = hf.solve(&rhs);
        let mut dx = base.clone();
        let mut aty = RealMatrix::zeros(n, n);
        // Near the optimum H is badly conditioned; refining dy against the
        // equations dX must actually satisfy keeps the primal residual from
        // drifting upward.
        for pass in 0..=REFINEMENT_PASSES {
            if dy.iter().any(|v| !v.is_finite()) {
                return None;
            }
            aty = RealMatrix::zeros(n, n);
            for (a, d) in self.a.iter().zip(&dy) {
                a.add_scaled_to(&mut aty, *d);
            }
            dx = base.clone();
            dx.axpy(1.0, &nt.w.matmul(&aty).matmul(&nt.w));
            dx.symmetrize();
            if pass == REFINEMENT_PASSES {
                break;
            }
            let miss: Vec<f64> = self
                .a
                .iter()
                .zip(rp)
                .map(|(a, r)| r - a.inner(&dx))
                .collect();
            let fix = hf.solve(&miss);
            for (d, f) in dy.iter_mut().zip(&fix) {
                *d += f;
            }
        }
        let mut ds = rd.clone();
        ds.axpy(-1.0, &aty);
        Some(Direction { dx, dy, ds })
    }

    /// `H_ij = tr(A_i P A_j Q)`.
    fn schur(&self, x: &RealMatrix, s_inv: &RealMatrix) -> RealMatrix {
        let n = self.n;
        let m = self.a.len();
        let mut h = RealMatrix::zeros(m, m);
        let mut xa = RealMatrix::zeros(n, n);
        let mut g = RealMatrix::zeros(n, n);
        let mut touched = vec![false; n];
        let mut cols = Vec::with_capacity(n);
        for (j, aj) in self.a.iter().enumerate() {
            // X A_j, column by column.
            cols.clear();
            for &(p, q, v) in aj.entries() {
                accumulate_column(&mut xa, x, q, p, v, &mut touched, &mut cols);
                if p != q {
                    accumulate_column(&mut xa, x, p, q, v, &mut touched, &mut cols);
                }
            }
            // G = (X A_j) S⁻¹ over the touched columns.
            for r in 0..n {
                for c in 0..n {
                    let mut acc = 0.0;
                    for &q in &cols {
                        acc += xa[(r, q)] * s_inv[(q, c)];
                    }
                    g[(r, c)] = acc;
                }
            }
            for (i, ai) in self.a.iter().enumerate().skip(j) {
                let v = ai.entries().iter().fold(0.0, |acc, &(r, c, u)| {
                    acc + if r == c {
                        u * g[(r, r)]
                    } else {
                        u * (g[(r, c)] + g[(c, r)])
                    }
                });
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
            for &q in &cols {
                touched[q] = false;
                for r in 0..n {
                    xa[(r, q)] = 0.0;
                }
            }
        }
        h
    }

    fn primal_residual(&self, x: &RealMatrix) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(a, b)| b - a.inner(x))
            .collect()
    }

    fn dual_residual(&self, y: &[f64], s: &RealMatrix) -> RealMatrix {
        let mut r = self.c.sub(s);
        for (a, yi) in self.a.iter().zip(y) {
            a.add_scaled_to(&mut r, -yi);
        }
        r
    }
}

/// `xa[:, col] += v · x[:, src]`.
fn accumulate_column(
    xa: &mut RealMatrix,
    x: &RealMatrix,
    col: usize,
    src: usize,
    v: f64,
    touched: &mut [bool],
    cols: &mut Vec<usize>,
) {
    if !touched[col] {
        touched[col] = true;
        cols.push(col);
    }
    for r in 0..x.rows() {
        xa[(r, col)] += v * x[(r, src)];
    }
}

/// Cholesky of the Schur complement, nudging the diagonal when roundoff has
/// made it numerically semidefinite.
fn factor_regularized(h: &RealMatrix) -> Option<Cholesky> {
    if let Ok(f) = Cholesky::factor(h, 0.0) {
        return Some(f);
    }
    let scale = (0..h.rows())
        .fold(0.0f64, |m, i| m.max(h[(i, i)].abs()))
        .max(1e-300);
    for exp in [1e-14, 1e-12, 1e-10] {
        let mut reg = h.clone();
        for i in 0..h.rows() {
            reg[(i, i)] += exp * scale;
        }
        if let Ok(f) = Cholesky::factor(&reg, 0.0) {
            return Some(f);
        }
    }
    None
}

/// Largest `α` with `L Lᵀ + α D ⪰ 0`, infinite when `D` is a PSD direction.
fn max_step(l: &Cholesky, d: &RealMatrix) -> Option<f64> {
    let li = l.lower_inverse();
    let mut m = li.matmul(d).matmul(&li.transpose());
    m.symmetrize();
    let lmin = *symmetric_eigenvalues(&m).ok()?.first()?;
    Some(if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

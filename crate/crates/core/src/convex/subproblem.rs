//! The reduced convex subproblem around a fixed incumbent.
//!
//! With the incumbent's eigenvectors frozen, the ground energy is bounded
//! above by `u0' H(A) u0` and the excited energies by the smallest eigenvalue
//! of the compressed block `Phi1' H(A) Phi1`. Both are affine in the schedule
//! table `A`, so maximizing the smallest bound difference is an LP plus one
//! small linear matrix inequality per grid point. The LMIs are enforced by
//! cutting planes `v' G(A) v >= eps1` at the most negative eigenvector `v`.

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Solution, Variable};

use crate::eigen::dense::symmetric_eigen;
use crate::error::{Result, SpoError};
use crate::hamiltonian::{endpoint_weights, PathHamiltonian};
use crate::schedule::Schedule;
use crate::spectrum::SpectrumProfile;

/// Frozen eigenvectors of the incumbent at the interior grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct Projectors {
    intervals: usize,
    // indexed by i - 1 for i in 1..N
    ground: Vec<Vec<f64>>,
    excited: Vec<Vec<Vec<f64>>>,
}

impl Projectors {
    /// Takes `u0` and `u1..up` from a profile that kept at least `p + 1`
    /// levels with eigenvectors.
    pub fn from_profile(profile: &SpectrumProfile, p: usize) -> Result<Self> {
        let n = profile.intervals();
        if p == 0 || profile.levels() < p + 1 || profile.state(0, p).is_none() {
            return Err(SpoError::InvalidArgument(format!(
                "projectors with p = {p} need a profile with {} levels and eigenvectors",
                p + 1
            )));
        }
        let ground = (1..n).map(|i| profile.ground_state(i).to_vec()).collect();
        let excited = (1..n)
            .map(|i| (1..=p).map(|l| profile.state(i, l).unwrap().to_vec()).collect())
            .collect();
        Ok(Self {
            intervals: n,
            ground,
            excited,
        })
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of excited columns `p`.
    pub fn width(&self) -> usize {
        self.excited[0].len()
    }

    /// `u0(i)` for interior `i`.
    pub fn ground(&self, i: usize) -> &[f64] {
        &self.ground[i - 1]
    }

    /// `[u1(i), ..., up(i)]` for interior `i`.
    pub fn excited(&self, i: usize) -> &[Vec<f64>] {
        &self.excited[i - 1]
    }
}

/// Affine data of one grid point: `u0' H(A) u0 = c0 + e0 . A(i)` and
/// `Phi1' H(A) Phi1 = G_base + sum_j A_j(i) G_j`.
#[derive(Debug, Clone)]
pub(crate) struct PointModel {
    c0: f64,
    e0: Vec<f64>,
    g_base: Vec<f64>,
    g_terms: Vec<Vec<f64>>,
    p: usize,
}

impl PointModel {
    pub(crate) fn new(path: &PathHamiltonian, proj: &Projectors, i: usize) -> Self {
        let (w0, w1) = endpoint_weights(i, proj.intervals);
        let m = 2 * path.n_qubits();
        let base = path.realize(w0, w1, &vec![0.0; m]);
        let u0 = proj.ground(i);
        let phi = proj.excited(i);
        let p = phi.len();
        let mut g_base = vec![0.0; p * p];
        let mut g_terms = vec![vec![0.0; p * p]; m];
        let mut hv = vec![0.0; path.dim()];
        for b in 0..p {
            base.apply_real(&phi[b], &mut hv);
            for a in 0..=b {
                let v: f64 = phi[a].iter().zip(&hv).map(|(x, y)| x * y).sum();
                g_base[a * p + b] = v;
                g_base[b * p + a] = v;
                let terms = path.local_matrix_elements(&phi[a], &phi[b]);
                for (j, t) in terms.into_iter().enumerate() {
                    g_terms[j][a * p + b] = t;
                    g_terms[j][b * p + a] = t;
                }
            }
        }
        Self {
            c0: base.expectation_real(u0),
            e0: path.local_expectations(u0),
            g_base,
            g_terms,
            p,
        }
    }

    pub(crate) fn ground_bound(&self, column: &[f64]) -> f64 {
        self.c0 + self.e0.iter().zip(column).map(|(a, b)| a * b).sum::<f64>()
    }

    pub(crate) fn block(&self, column: &[f64]) -> Vec<f64> {
        let mut g = self.g_base.clone();
        for (gj, &a) in self.g_terms.iter().zip(column) {
            if a != 0.0 {
                for (x, y) in g.iter_mut().zip(gj) {
                    *x += a * y;
                }
            }
        }
        g
    }

    /// Smallest eigenvalue of the compressed block and its eigenvector.
    pub(crate) fn excited_bound(&self, column: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (vals, vecs) = symmetric_eigen(&self.block(column), self.p)?;
        Ok((vals[0], vecs[0].clone()))
    }

    /// Coefficients of `v' G_j v` per term and the constant `v' G_base v`.
    fn cut(&self, v: &[f64]) -> (Vec<f64>, f64) {
        let quad = |g: &[f64]| -> f64 {
            let mut s = 0.0;
            for a in 0..self.p {
                for b in 0..self.p {
                    s += v[a] * g[a * self.p + b] * v[b];
                }
            }
            s
        };
        (self.g_terms.iter().map(|g| quad(g)).collect(), quad(&self.g_base))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubproblemLimits {
    /// Trust-region radius: `|A - A_hat| <= eta` entrywise.
    pub eta: f64,
    /// Cuts are added while some LMI has an eigenvalue below `-lmi_tol`.
    pub lmi_tol: f64,
    pub max_cut_rounds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    pub schedule: Schedule,
    /// Exact bounds at the returned schedule, interior points `1..N`.
    pub eps0: Vec<f64>,
    pub eps1: Vec<f64>,
    /// `min_i eps1(i) - eps0(i)`.
    pub objective: f64,
    /// Same quantity at the incumbent.
    pub incumbent_objective: f64,
    pub cut_count: usize,
    pub cut_rounds: usize,
    /// Smallest eigenvalue of `Phi1' (H - eps1 I) Phi1` over the LP's own `eps1`.
    pub lmi_min_eigenvalue: f64,
}

/// Bounds `(eps0, eps1)` of a schedule under fixed projectors.
pub fn surrogate_bounds(path: &PathHamiltonian, proj: &Projectors, sched: &Schedule) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = proj.intervals();
    let mut e0 = Vec::with_capacity(n - 1);
    let mut e1 = Vec::with_capacity(n - 1);
    for i in 1..n {
        let model = PointModel::new(path, proj, i);
        let col = sched.column(i);
        e0.push(model.ground_bound(&col));
        e1.push(model.excited_bound(&col)?.0);
    }
    Ok((e0, e1))
}

fn lp_error(e: microlp::Error) -> SpoError {
    SpoError::LinearProgram(e.to_string())
}

fn into_solution(outcome: microlp::SolveOutcome) -> Result<Solution> {
    outcome
        .into_solution()
        .map_err(|e| SpoError::LinearProgram(format!("solve interrupted: {:?}", e.termination_reason())))
}

/// Solves the trust-region subproblem around `a_hat`.
pub fn solve_subproblem(
    path: &PathHamiltonian,
    proj: &Projectors,
    a_hat: &Schedule,
    limits: &SubproblemLimits,
) -> Result<SubproblemSolution> {
    let n = a_hat.intervals();
    if proj.intervals() != n {
        return Err(SpoError::InvalidArgument("projectors and schedule use different grids".into()));
    }
    if !(limits.eta >= 0.0) {
        return Err(SpoError::InvalidArgument("trust-region radius must be nonnegative".into()));
    }
    let m = a_hat.n_terms();
    let cap = a_hat.f_bound();
    let step = a_hat.max_step();
    let models: Vec<PointModel> = (1..n).map(|i| PointModel::new(path, proj, i)).collect();

    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    // a[i - 1][j]
    let mut a: Vec<Vec<Variable>> = Vec::with_capacity(n - 1);
    for i in 1..n {
        let reach = (step * i.min(n - i) as f64).min(cap);
        let row = (0..m)
            .map(|j| {
                let centre = a_hat.value(j, i);
                let lo = (-reach).max(centre - limits.eta).min(centre);
                let hi = reach.min(centre + limits.eta).max(centre);
                lp.add_var(0.0, (lo, hi))
            })
            .collect();
        a.push(row);
    }
    let eps0: Vec<Variable> = (1..n).map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    let eps1: Vec<Variable> = (1..n).map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();

    for k in 0..n - 1 {
        // t <= eps1 - eps0
        lp.add_constraint(&[(t, 1.0), (eps1[k], -1.0), (eps0[k], 1.0)], ComparisonOp::Le, 0.0);
        // eps0 >= c0 + e0 . A
        let mut expr = LinearExpr::empty();
        expr.add(eps0[k], 1.0);
        for j in 0..m {
            if models[k].e0[j] != 0.0 {
                expr.add(a[k][j], -models[k].e0[j]);
            }
        }
        lp.add_constraint(expr, ComparisonOp::Ge, models[k].c0);
        // initial cuts: the diagonal of the LMI block
        for b in 0..models[k].p {
            let mut v = vec![0.0; models[k].p];
            v[b] = 1.0;
            let (coef, constant) = models[k].cut(&v);
            lp.add_constraint(cut_expr(&a[k], eps1[k], &coef), ComparisonOp::Ge, -constant);
        }
    }
    // slew between interior neighbours; the end pairs are in the bounds
    for k in 0..n.saturating_sub(2) {
        for j in 0..m {
            lp.add_constraint(&[(a[k + 1][j], 1.0), (a[k][j], -1.0)], ComparisonOp::Le, step);
            lp.add_constraint(&[(a[k + 1][j], 1.0), (a[k][j], -1.0)], ComparisonOp::Ge, -step);
        }
    }
    let mut cut_count = (n - 1) * models.first().map_or(0, |md| md.p);

    let mut solution = into_solution(lp.solve().map_err(lp_error)?)?;
    let mut rounds = 0;
    let mut lmi_min;
    loop {
        let mut new_cuts = Vec::new();
        lmi_min = f64::INFINITY;
        for k in 0..n - 1 {
            let col: Vec<f64> = a[k].iter().map(|&v| solution.var_value(v)).collect();
            let (lam, v) = models[k].excited_bound(&col)?;
            let slack = lam - solution.var_value(eps1[k]);
            lmi_min = lmi_min.min(slack);
            if slack < -limits.lmi_tol {
                new_cuts.push((k, v));
            }
        }
        if new_cuts.is_empty() || rounds >= limits.max_cut_rounds {
            break;
        }
        rounds += 1;
        for (k, v) in new_cuts {
            let (coef, constant) = models[k].cut(&v);
            solution = into_solution(
                solution
                    .add_constraint(cut_expr(&a[k], eps1[k], &coef), ComparisonOp::Ge, -constant)
                    .map_err(lp_error)?,
            )?;
            cut_count += 1;
        }
    }

    let mut out = a_hat.clone();
    for (k, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out.set(j, k + 1, solution.var_value(v));
        }
    }
    // simplex round-off can leave the slew pairs a hair outside
    out.project();

    let mut e0 = Vec::with_capacity(n - 1);
    let mut e1 = Vec::with_capacity(n - 1);
    let mut e0_hat = Vec::with_capacity(n - 1);
    let mut e1_hat = Vec::with_capacity(n - 1);
    for (k, model) in models.iter().enumerate() {
        let col = out.column(k + 1);
        e0.push(model.ground_bound(&col));
        e1.push(model.excited_bound(&col)?.0);
        let col_hat = a_hat.column(k + 1);
        e0_hat.push(model.ground_bound(&col_hat));
        e1_hat.push(model.excited_bound(&col_hat)?.0);
    }
    let objective = min_difference(&e0, &e1);
    let incumbent_objective = min_difference(&e0_hat, &e1_hat);
    Ok(SubproblemSolution {
        schedule: out,
        eps0: e0,
        eps1: e1,
        objective,
        incumbent_objective,
        cut_count,
        cut_rounds: rounds,
        lmi_min_eigenvalue: lmi_min,
    })
}

fn cut_expr(a: &[Variable], eps1: Variable, coef: &[f64]) -> LinearExpr {
    let mut expr = LinearExpr::empty();
    for (&v, &c) in a.iter().zip(coef) {
        if c != 0.0 {
            expr.add(v, c);
        }
    }
    expr.add(eps1, -1.0);
    expr
}

fn min_difference(e0: &[f64], e1: &[f64]) -> f64 {
    e0.iter().zip(e1).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::QuboInstance;
    use crate::spectrum::{profile_on_path, ProfileOptions};

    fn setup(inst: &QuboInstance, sched: &Schedule, p: usize) -> (PathHamiltonian, Projectors) {
        let path = PathHamiltonian::new(inst);
        let profile = profile_on_path(&path, sched, &ProfileOptions::new(p + 1)).unwrap();
        let proj = Projectors::from_profile(&profile, p).unwrap();
        (path, proj)
    }

    fn wide(eta: f64) -> SubproblemLimits {
        SubproblemLimits {
            eta,
            lmi_tol: 1e-10,
            max_cut_rounds: 200,
        }
    }

    /// Largest surrogate objective over an evenly spaced grid of every
    /// interior entry, each point evaluated from scratch.
    fn grid_maximum(path: &PathHamiltonian, proj: &Projectors, sched: &Schedule, reach: f64, steps: usize) -> f64 {
        let n = sched.intervals();
        let cells: Vec<(usize, usize)> = (1..n).flat_map(|i| (0..sched.n_terms()).map(move |j| (j, i))).collect();
        let mut best = f64::NEG_INFINITY;
        let mut idx = vec![0usize; cells.len()];
        loop {
            let mut trial = sched.clone();
            for (&(j, i), &k) in cells.iter().zip(&idx) {
                trial.set(j, i, -reach + 2.0 * reach * k as f64 / steps as f64);
            }
            let (e0, e1) = surrogate_bounds(path, proj, &trial).unwrap();
            let worst = e0.iter().zip(&e1).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min);
            best = best.max(worst);
            let mut d = 0;
            while d < cells.len() && idx[d] == steps {
                idx[d] = 0;
                d += 1;
            }
            if d == cells.len() {
                return best;
            }
            idx[d] += 1;
        }
    }

    #[test]
    fn one_qubit_linear_program_hits_the_best_corner() {
        // one interior point and p = 1: the surrogate is affine in (A_x, A_z),
        // so its maximum over the box sits at a corner of the grid
        let inst = QuboInstance::new(1, vec![0.3], std::iter::empty(), 0).unwrap();
        let sched = Schedule::linear(1, 2, 1.0, 1.0).unwrap();
        let (path, proj) = setup(&inst, &sched, 1);
        let sol = solve_subproblem(&path, &proj, &sched, &wide(10.0)).unwrap();
        let oracle = grid_maximum(&path, &proj, &sched, 0.5, 4);
        assert!((sol.objective - oracle).abs() < 1e-12, "{} vs {oracle}", sol.objective);
        for j in 0..2 {
            assert!((sol.schedule.value(j, 1).abs() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn one_qubit_four_interval_program_matches_grid_search() {
        // cap 0.2 against a slew step of 0.5: the slew rows never bind, the
        // feasible set is a box and its corners are on the grid
        let inst = QuboInstance::new(1, vec![-0.4], std::iter::empty(), 0).unwrap();
        let sched = Schedule::linear(1, 4, 0.2, 2.0).unwrap();
        let (path, proj) = setup(&inst, &sched, 1);
        let sol = solve_subproblem(&path, &proj, &sched, &wide(10.0)).unwrap();
        let oracle = grid_maximum(&path, &proj, &sched, 0.2, 2);
        assert!((sol.objective - oracle).abs() < 1e-6, "{} vs {oracle}", sol.objective);
        assert!(sol.objective >= sol.incumbent_objective);
    }

    #[test]
    fn two_qubit_cuts_reach_the_grid_optimum() {
        // p = 2: the excited bound is the smaller eigenvalue of a 2x2 block,
        // concave in A; the cutting-plane optimum must beat every grid point
        let inst = QuboInstance::random(2, 5).unwrap();
        let sched = Schedule::linear(2, 2, 1.0, 1.0).unwrap();
        let (path, proj) = setup(&inst, &sched, 2);
        let sol = solve_subproblem(&path, &proj, &sched, &wide(10.0)).unwrap();
        let oracle = grid_maximum(&path, &proj, &sched, 0.5, 10);
        assert!(sol.objective >= oracle - 1e-9, "{} < {oracle}", sol.objective);
        assert!(sol.lmi_min_eigenvalue >= -1e-8);
        assert!(sol.schedule.validate().is_empty());
    }

    #[test]
    fn larger_trust_regions_never_do_worse() {
        let inst = QuboInstance::random(3, 8).unwrap();
        let sched = Schedule::linear(3, 10, 1.0, 2.5).unwrap();
        let (path, proj) = setup(&inst, &sched, 3);
        let mut last = f64::NEG_INFINITY;
        for eta in [0.0, 0.01, 0.05, 0.2, 1.0] {
            let sol = solve_subproblem(&path, &proj, &sched, &wide(eta)).unwrap();
            assert!(sol.objective >= last - 1e-9, "eta {eta}: {} < {last}", sol.objective);
            assert!(sol.schedule.max_abs_difference(&sched) <= eta + 1e-12);
            last = sol.objective;
        }
    }

    #[test]
    fn projector_columns_are_orthonormal() {
        let inst = QuboInstance::random(3, 3).unwrap();
        let sched = Schedule::linear(3, 6, 1.0, 2.5).unwrap();
        let (_, proj) = setup(&inst, &sched, 3);
        assert_eq!(proj.width(), 3);
        for i in 1..6 {
            let mut cols = vec![proj.ground(i)];
            cols.extend(proj.excited(i).iter().map(|v| v.as_slice()));
            for a in 0..cols.len() {
                for b in 0..cols.len() {
                    let d: f64 = cols[a].iter().zip(cols[b]).map(|(x, y)| x * y).sum();
                    assert!((d - if a == b { 1.0 } else { 0.0 }).abs() < 1e-10);
                }
            }
        }
    }
}

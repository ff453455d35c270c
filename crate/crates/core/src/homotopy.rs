//! Predictor-corrector path tracking, total-degree and monodromy solvers,
//! and the CC degree and variety degree drivers built on them.

use std::cmp::Ordering;
use std::fmt;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ccsystem::{
    assemble_cc_system, assemble_degree_system, assemble_with_matrix, monodromy_seed, projection_indices, random_complex,
    random_complex_symmetric, random_hamiltonian,
};
use crate::combinatorics::IndexSet;
use crate::error::{FockError, Result};
use crate::expparam::{amplitude_pairs, numeric_inverse};
use crate::multipoly::{CPoly, FrozenSystem, Var};
use crate::truncation::{dimension, is_linear, LevelSet};

type C = Complex64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub newton_tol: f64,
    pub max_corrector_iters: usize,
    /// Relative size of the last corrector update for a step to count as converged.
    pub corrector_tol: f64,
    /// Relative bound on the first corrector update; larger means the predictor left the path.
    pub corrector_trust: f64,
    pub max_refine_iters: usize,
    pub divergence: f64,
    pub dedup_tol: f64,
    pub real_tol: f64,
    pub residual_tol: f64,
    pub singular_cond: f64,
    pub stall_limit: usize,
    pub max_loops: usize,
    pub max_steps: usize,
    pub max_bezout: u128,
    /// Above this Bezout number `Auto` switches to monodromy.
    pub total_degree_limit: u128,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            initial_step: 0.05,
            max_step: 0.1,
            min_step: 1e-7,
            newton_tol: 1e-12,
            max_corrector_iters: 3,
            corrector_tol: 1e-9,
            corrector_trust: 1e-3,
            max_refine_iters: 20,
            divergence: 1e8,
            dedup_tol: 1e-8,
            real_tol: 1e-6,
            residual_tol: 1e-9,
            singular_cond: 1e12,
            stall_limit: 5,
            max_loops: 500,
            max_steps: 200_000,
            max_bezout: 1_000_000,
            total_degree_limit: 5000,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            self.initial_step,
            self.max_step,
            self.min_step,
            self.newton_tol,
            self.corrector_tol,
            self.corrector_trust,
            self.divergence,
            self.dedup_tol,
            self.real_tol,
            self.residual_tol,
        ];
        if pos.iter().any(|&x| !(x > 0.0)) {
            return Err(FockError::Shape("tracker tolerances must be positive".into()));
        }
        if self.min_step >= self.initial_step || self.max_corrector_iters == 0 {
            return Err(FockError::Shape("need min_step < initial_step and at least one corrector iteration".into()));
        }
        Ok(())
    }
}

/// A square system `f(x) = 0` with Jacobian.
pub trait SquareSystem: Sync {
    fn nvars(&self) -> usize;
    fn eval_jac(&self, x: &[C]) -> (DVector<C>, DMatrix<C>);

    fn eval(&self, x: &[C]) -> DVector<C> {
        self.eval_jac(x).0
    }
}

impl SquareSystem for FrozenSystem {
    fn nvars(&self) -> usize {
        self.unknowns.len()
    }

    fn eval_jac(&self, x: &[C]) -> (DVector<C>, DMatrix<C>) {
        (self.evaluate(x), self.jacobian(x))
    }

    fn eval(&self, x: &[C]) -> DVector<C> {
        self.evaluate(x)
    }
}

/// `H(x, s)` with `∂H/∂x` and `∂H/∂s`; tracked from `s = 1` to `s = 0`.
pub trait Homotopy: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[C], s: f64) -> (DVector<C>, DMatrix<C>, DVector<C>);
}

fn max_abs(v: &DVector<C>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn vnorm(x: &[C]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NewtonStatus {
    Converged,
    Singular,
    NotConverged,
}

#[derive(Clone, Debug)]
pub struct NewtonResult {
    pub point: Vec<C>,
    pub residual: f64,
    pub condition: f64,
    pub iterations: usize,
    pub status: NewtonStatus,
    /// Residual after each accepted step, starting with the initial one.
    pub history: Vec<f64>,
}

/// The undamped Newton update `−J⁻¹ f` at `x`.
pub fn newton_step<S: SquareSystem + ?Sized>(sys: &S, x: &[C]) -> Option<Vec<C>> {
    let (f, j) = sys.eval_jac(x);
    j.lu().solve(&(-f)).map(|d| d.iter().copied().collect())
}

/// `σ_max / σ_min` of the Jacobian.
pub fn condition_number(j: &DMatrix<C>) -> f64 {
    let sv = j.clone().singular_values();
    let lo = sv.min();
    if lo == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / lo
    }
}

/// Damped Newton: each step is halved until the residual decreases.
pub fn newton_refine<S: SquareSystem + ?Sized>(sys: &S, point: &[C], cfg: &TrackerConfig) -> NewtonResult {
    let mut x = point.to_vec();
    let (mut f, mut j) = sys.eval_jac(&x);
    let mut res = max_abs(&f);
    let mut history = vec![res];
    let mut iterations = 0;
    let mut singular = false;
    while iterations < cfg.max_refine_iters && res > cfg.newton_tol {
        let Some(dx) = j.clone().lu().solve(&(-&f)) else {
            singular = true;
            break;
        };
        let mut lam = 1.0;
        let mut accepted = None;
        while lam > 1e-3 {
            let xt: Vec<C> = x.iter().zip(dx.iter()).map(|(a, b)| a + b * lam).collect();
            let (ft, jt) = sys.eval_jac(&xt);
            let rt = max_abs(&ft);
            if rt < res {
                accepted = Some((xt, ft, jt, rt));
                break;
            }
            lam /= 2.0;
        }
        let Some((xt, ft, jt, rt)) = accepted else { break };
        iterations += 1;
        let step = dx.norm() * lam;
        x = xt;
        f = ft;
        j = jt;
        res = rt;
        history.push(res);
        if step <= 1e-15 * (1.0 + vnorm(&x)) {
            break;
        }
    }
    let condition = condition_number(&j);
    let status = if singular || condition > cfg.singular_cond {
        NewtonStatus::Singular
    } else if res <= cfg.residual_tol {
        NewtonStatus::Converged
    } else {
        NewtonStatus::NotConverged
    };
    NewtonResult { point: x, residual: res, condition, iterations, status, history }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathStatus {
    Success,
    Diverged,
    Failed,
}

#[derive(Clone, Debug)]
pub struct PathEnd {
    pub x: Vec<C>,
    pub s: f64,
    pub status: PathStatus,
    pub steps: usize,
}

fn velocity<H: Homotopy + ?Sized>(hom: &H, x: &[C], s: f64) -> Option<DVector<C>> {
    let (_, j, hs) = hom.eval(x, s);
    j.lu().solve(&(-hs))
}

fn shifted(x: &[C], v: &DVector<C>, h: f64) -> Vec<C> {
    x.iter().zip(v.iter()).map(|(a, b)| a + b * h).collect()
}

/// Fourth-order Runge-Kutta prediction of `x(s − ds)`.
fn predict<H: Homotopy + ?Sized>(hom: &H, x: &[C], s: f64, ds: f64) -> Option<Vec<C>> {
    let k1 = velocity(hom, x, s)?;
    let k2 = velocity(hom, &shifted(x, &k1, -ds / 2.0), s - ds / 2.0)?;
    let k3 = velocity(hom, &shifted(x, &k2, -ds / 2.0), s - ds / 2.0)?;
    let k4 = velocity(hom, &shifted(x, &k3, -ds), s - ds)?;
    let v = (k1 + k2 * C::new(2.0, 0.0) + k3 * C::new(2.0, 0.0) + k4) / C::new(6.0, 0.0);
    Some(shifted(x, &v, -ds))
}

fn correct<H: Homotopy + ?Sized>(hom: &H, mut x: Vec<C>, s: f64, cfg: &TrackerConfig) -> Option<Vec<C>> {
    for it in 0..cfg.max_corrector_iters {
        let (f, j, _) = hom.eval(&x, s);
        let dx = j.lu().solve(&(-f))?;
        let scale = 1.0 + vnorm(&x);
        let size = dx.norm();
        x.iter_mut().zip(dx.iter()).for_each(|(a, b)| *a += b);
        if it == 0 && size > cfg.corrector_trust * scale {
            return None;
        }
        if size <= cfg.corrector_tol * scale {
            return Some(x);
        }
    }
    None
}

/// Tracks one path from `s = 1` to `s = 0` with adaptive steps.
pub fn track<H: Homotopy + ?Sized>(hom: &H, start: &[C], cfg: &TrackerConfig) -> PathEnd {
    let mut x = start.to_vec();
    let mut s = 1.0f64;
    let mut h = cfg.initial_step;
    let mut streak = 0;
    let mut steps = 0;
    while s > 0.0 {
        if steps >= cfg.max_steps {
            return PathEnd { x, s, status: PathStatus::Failed, steps };
        }
        steps += 1;
        let ds = h.min(s);
        let s1 = if ds >= s { 0.0 } else { s - ds };
        match predict(hom, &x, s, s - s1).and_then(|xp| correct(hom, xp, s1, cfg)) {
            Some(xn) => {
                x = xn;
                s = s1;
                streak += 1;
                if streak >= 4 {
                    h = (h * 1.5).min(cfg.max_step);
                    streak = 0;
                }
                if vnorm(&x) > cfg.divergence {
                    return PathEnd { x, s, status: PathStatus::Diverged, steps };
                }
            }
            None => {
                h /= 2.0;
                streak = 0;
                if h < cfg.min_step {
                    return PathEnd { x, s, status: PathStatus::Failed, steps };
                }
            }
        }
    }
    PathEnd { x, s, status: PathStatus::Success, steps }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub point: Vec<C>,
    pub residual: f64,
    pub condition: f64,
    pub real: bool,
    pub singular: bool,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub unknowns: Vec<String>,
    pub solutions: Vec<Solution>,
    pub method: String,
    pub paths: usize,
    pub diverged: usize,
    pub failed: usize,
    pub loops: usize,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn real_count(&self) -> usize {
        self.solutions.iter().filter(|s| s.real).count()
    }

    pub fn singular_count(&self) -> usize {
        self.solutions.iter().filter(|s| s.singular).count()
    }

    /// Every non-real point has its conjugate in the set.
    pub fn conjugate_closed(&self, tol: f64) -> bool {
        self.solutions.iter().filter(|s| !s.real).all(|s| {
            let c: Vec<C> = s.point.iter().map(|z| z.conj()).collect();
            self.solutions.iter().any(|o| same_point(&o.point, &c, tol))
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "method": self.method,
            "count": self.len(),
            "real": self.real_count(),
            "singular": self.singular_count(),
            "paths": self.paths,
            "diverged": self.diverged,
            "failed": self.failed,
            "loops": self.loops,
            "unknowns": self.unknowns,
            "solutions": self.solutions.iter().map(|s| serde_json::json!({
                "point": s.point.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "residual": s.residual,
                "condition": s.condition,
                "real": s.real,
                "singular": s.singular,
            })).collect::<Vec<_>>(),
        })
    }

    /// One row per solution: each unknown as `re`/`im` columns, then residual and real flag.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut head: Vec<String> = Vec::new();
        for u in &self.unknowns {
            head.push(format!("{u}.re"));
            head.push(format!("{u}.im"));
        }
        head.push("residual".into());
        head.push("real".into());
        out.push_str(&head.join(","));
        out.push('\n');
        for s in &self.solutions {
            let mut row: Vec<String> = Vec::new();
            for z in &s.point {
                row.push(format!("{:e}", z.re));
                row.push(format!("{:e}", z.im));
            }
            row.push(format!("{:e}", s.residual));
            row.push(s.real.to_string());
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn same_point(a: &[C], b: &[C], tol: f64) -> bool {
    let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
    a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol * scale)
}

fn cmp_points(a: &[C], b: &[C]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Refines candidate points on `sys`, keeps those with small residual, and
/// merges duplicates in input order.
fn collect_solutions<S: SquareSystem + ?Sized>(sys: &S, candidates: &[Vec<C>], cfg: &TrackerConfig) -> Vec<Solution> {
    let refined: Vec<NewtonResult> = candidates.par_iter().map(|x| newton_refine(sys, x, cfg)).collect();
    let mut kept: Vec<Solution> = Vec::new();
    for r in refined {
        if r.residual > cfg.residual_tol || vnorm(&r.point) > cfg.divergence || r.point.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            continue;
        }
        if let Some(k) = kept.iter_mut().find(|k| same_point(&k.point, &r.point, cfg.dedup_tol)) {
            k.multiplicity += 1;
            continue;
        }
        let real = r.point.iter().all(|z| z.im.abs() <= cfg.real_tol);
        kept.push(Solution {
            point: r.point,
            residual: r.residual,
            condition: r.condition,
            real,
            singular: r.status == NewtonStatus::Singular,
            multiplicity: 1,
        });
    }
    kept.sort_by(|a, b| cmp_points(&a.point, &b.point));
    kept
}

/// `(1 − s) F(X) + s γ G(X)` on the homogenized system, with a fixed random
/// affine patch as the last equation.
struct TotalDegreeHomotopy {
    target: Vec<CPoly>,
    degrees: Vec<u32>,
    gamma: C,
    patch: Vec<C>,
}

fn shift_vars(p: &CPoly) -> CPoly {
    let mut q = p.clone();
    for t in &mut q.terms {
        for v in &mut t.vars {
            v.0 += 1;
        }
    }
    q
}

impl Homotopy for TotalDegreeHomotopy {
    fn dim(&self) -> usize {
        self.patch.len()
    }

    fn eval(&self, x: &[C], s: f64) -> (DVector<C>, DMatrix<C>, DVector<C>) {
        let n1 = x.len();
        let mut f = DVector::zeros(n1);
        let mut j = DMatrix::zeros(n1, n1);
        let mut hs = DVector::zeros(n1);
        let mut g = vec![C::zero(); n1];
        let sg = self.gamma * s;
        let a = C::new(1.0 - s, 0.0);
        for (i, p) in self.target.iter().enumerate() {
            g.iter_mut().for_each(|v| *v = C::zero());
            let fv = p.eval_grad(x, &mut g);
            let d = self.degrees[i];
            let (xi, x0) = (x[i + 1], x[0]);
            let gv = xi.powu(d) - x0.powu(d);
            f[i] = a * fv + sg * gv;
            hs[i] = self.gamma * gv - fv;
            for (k, gk) in g.iter().enumerate() {
                j[(i, k)] = a * gk;
            }
            let df = C::new(d as f64, 0.0);
            j[(i, i + 1)] += sg * df * xi.powu(d - 1);
            j[(i, 0)] -= sg * df * x0.powu(d - 1);
        }
        let last = n1 - 1;
        f[last] = self.patch.iter().zip(x).map(|(a, b)| a * b).sum::<C>() - C::one();
        for k in 0..n1 {
            j[(last, k)] = self.patch[k];
        }
        (f, j, hs)
    }
}

fn unit_gamma<R: Rng>(rng: &mut R) -> C {
    C::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Tracks every path of the total-degree start system in projective space.
pub fn total_degree_solve(sys: &FrozenSystem, cfg: &TrackerConfig, seed: u64) -> Result<SolutionSet> {
    cfg.validate()?;
    if !sys.is_square() {
        return Err(FockError::Shape(format!("{} equations in {} unknowns", sys.polys.len(), sys.nvars())));
    }
    let bezout = sys.bezout();
    if bezout > cfg.max_bezout {
        return Err(FockError::Capacity(format!("{bezout} start paths exceed the limit {}; use monodromy", cfg.max_bezout)));
    }
    let n = sys.nvars();
    let degrees = sys.degrees();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let gamma = unit_gamma(&mut rng);
    let patch: Vec<C> = (0..=n).map(|_| random_complex(&mut rng)).collect();
    let target: Vec<CPoly> = sys.polys.iter().zip(&degrees).map(|(p, &d)| shift_vars(p).homogenize(0, d)).collect();
    let hom = TotalDegreeHomotopy { target, degrees: degrees.clone(), gamma, patch };
    let paths = bezout as usize;
    let ends: Vec<PathEnd> = (0..paths)
        .into_par_iter()
        .map(|mut p| {
            let mut x = vec![C::one(); n + 1];
            for (i, &d) in degrees.iter().enumerate() {
                let k = p % d as usize;
                p /= d as usize;
                x[i + 1] = C::from_polar(1.0, std::f64::consts::TAU * k as f64 / d as f64);
            }
            let scale = C::one() / hom.patch.iter().zip(&x).map(|(a, b)| a * b).sum::<C>();
            x.iter_mut().for_each(|v| *v *= scale);
            track(&hom, &x, cfg)
        })
        .collect();
    let mut candidates = Vec::new();
    let (mut diverged, mut failed) = (0, 0);
    for e in &ends {
        let x0 = e.x[0];
        let rest = vnorm(&e.x[1..]);
        // paths stalling near the hyperplane x0 = 0 are heading to infinity
        let near_infinity = x0.norm() <= 1e-3 * rest;
        match e.status {
            PathStatus::Diverged => diverged += 1,
            PathStatus::Failed if near_infinity => diverged += 1,
            PathStatus::Failed => failed += 1,
            PathStatus::Success if x0.norm() <= rest / cfg.divergence => diverged += 1,
            PathStatus::Success => {}
        }
        if e.status != PathStatus::Diverged && x0.norm() > rest / cfg.divergence {
            candidates.push(e.x[1..].iter().map(|v| v / x0).collect());
        }
    }
    let solutions = collect_solutions(sys, &candidates, cfg);
    Ok(SolutionSet { unknowns: sys.unknowns.clone(), solutions, method: "total-degree".into(), paths, diverged, failed, loops: 0 })
}

/// `f_i(x; P) = Σ_K P_iK φ_K(x)`: systems linear in a coefficient matrix.
#[derive(Clone, Debug)]
pub struct LinearFamily {
    pub unknowns: Vec<String>,
    pub basis: Vec<CPoly>,
    pub rows: usize,
}

impl LinearFamily {
    /// Values of `φ` and their gradients (one row per basis element).
    pub fn eval_basis(&self, x: &[C]) -> (DVector<C>, DMatrix<C>) {
        let n = x.len();
        let mut phi = DVector::zeros(self.basis.len());
        let mut grad = DMatrix::zeros(self.basis.len(), n);
        let mut g = vec![C::zero(); n];
        for (k, p) in self.basis.iter().enumerate() {
            g.iter_mut().for_each(|v| *v = C::zero());
            phi[k] = p.eval_grad(x, &mut g);
            for (i, gi) in g.iter().enumerate() {
                grad[(k, i)] = *gi;
            }
        }
        (phi, grad)
    }

    pub fn at<'a>(&'a self, params: &'a DMatrix<C>) -> FamilyMember<'a> {
        FamilyMember { family: self, params }
    }
}

pub struct FamilyMember<'a> {
    family: &'a LinearFamily,
    params: &'a DMatrix<C>,
}

impl SquareSystem for FamilyMember<'_> {
    fn nvars(&self) -> usize {
        self.family.unknowns.len()
    }

    fn eval_jac(&self, x: &[C]) -> (DVector<C>, DMatrix<C>) {
        let (phi, grad) = self.family.eval_basis(x);
        (self.params * phi, self.params * grad)
    }
}

/// Straight segment `P(s) = s·P_start + (1 − s)·P_end`.
struct Segment<'a> {
    family: &'a LinearFamily,
    start: &'a DMatrix<C>,
    end: &'a DMatrix<C>,
    diff: DMatrix<C>,
}

impl<'a> Segment<'a> {
    fn new(family: &'a LinearFamily, start: &'a DMatrix<C>, end: &'a DMatrix<C>) -> Self {
        Segment { family, start, end, diff: start - end }
    }
}

impl Homotopy for Segment<'_> {
    fn dim(&self) -> usize {
        self.family.unknowns.len()
    }

    fn eval(&self, x: &[C], s: f64) -> (DVector<C>, DMatrix<C>, DVector<C>) {
        let (phi, grad) = self.family.eval_basis(x);
        let p = self.start * C::new(s, 0.0) + self.end * C::new(1.0 - s, 0.0);
        (&p * &phi, &p * grad, &self.diff * phi)
    }
}

/// Tracks `x` along `start → end` and refines it at `end`.
fn transport(family: &LinearFamily, start: &DMatrix<C>, end: &DMatrix<C>, x: &[C], cfg: &TrackerConfig) -> Option<Vec<C>> {
    let e = track(&Segment::new(family, start, end), x, cfg);
    if e.status != PathStatus::Success {
        return None;
    }
    let r = newton_refine(&family.at(end), &e.x, cfg);
    (r.residual <= cfg.residual_tol && r.status != NewtonStatus::Singular).then_some(r.point)
}

/// Runs triangle loops based at `base`, adding new endpoints to `known`, until
/// `stall_limit` loops bring nothing new or `goal` points are known.
fn grow_by_loops(
    family: &LinearFamily,
    base: &DMatrix<C>,
    known: &mut Vec<Vec<C>>,
    sampler: &ParamSampler<'_>,
    cfg: &TrackerConfig,
    rng: &mut ChaCha20Rng,
    goal: usize,
) -> usize {
    let mut stall = 0;
    let mut loops = 0;
    while stall < cfg.stall_limit && loops < cfg.max_loops && known.len() < goal {
        loops += 1;
        let p1 = sampler(rng);
        let p2 = sampler(rng);
        let ends: Vec<Option<Vec<C>>> = known
            .par_iter()
            .map(|x| {
                let y = transport(family, base, &p1, x, cfg)?;
                let z = transport(family, &p1, &p2, &y, cfg)?;
                transport(family, &p2, base, &z, cfg)
            })
            .collect();
        let before = known.len();
        for x in ends.into_iter().flatten() {
            if !known.iter().any(|k| same_point(k, &x, cfg.dedup_tol)) {
                known.push(x);
            }
        }
        stall = if known.len() > before { 0 } else { stall + 1 };
    }
    loops
}

pub type ParamSampler<'a> = dyn Fn(&mut ChaCha20Rng) -> DMatrix<C> + Sync + 'a;

/// Populates the solutions at `start` by random triangle loops, then tracks
/// them to `target`.
pub fn monodromy_solve(
    family: &LinearFamily,
    start: &DMatrix<C>,
    seeds: &[Vec<C>],
    target: &DMatrix<C>,
    sampler: &ParamSampler<'_>,
    cfg: &TrackerConfig,
    seed: u64,
) -> Result<SolutionSet> {
    cfg.validate()?;
    let base = family.at(start);
    let mut known: Vec<Vec<C>> = Vec::new();
    for x in seeds {
        let r = base.eval(x);
        if max_abs(&r) > 1e-8 {
            return Err(FockError::RejectedSeed(format!("seed residual {:.3e} at the start parameters", max_abs(&r))));
        }
        let x = newton_refine(&base, x, cfg).point;
        if !known.iter().any(|k| same_point(k, &x, cfg.dedup_tol)) {
            known.push(x);
        }
    }
    if known.is_empty() {
        return Err(FockError::RejectedSeed("no seed solutions".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut loops = grow_by_loops(family, start, &mut known, sampler, cfg, &mut rng, usize::MAX);
    let seg = Segment::new(family, start, target);
    let ends: Vec<PathEnd> = known.par_iter().map(|x| track(&seg, x, cfg)).collect();
    let diverged = ends.iter().filter(|e| e.status == PathStatus::Diverged).count();
    let failed = ends.iter().filter(|e| e.status == PathStatus::Failed).count();
    // paths can fail or merge on the last leg; recover the missing points by
    // further loops based at the target
    let end_system = family.at(target);
    let mut found: Vec<Vec<C>> = Vec::new();
    for e in ends.iter().filter(|e| e.status == PathStatus::Success) {
        let x = newton_refine(&end_system, &e.x, cfg).point;
        if !found.iter().any(|k| same_point(k, &x, cfg.dedup_tol)) {
            found.push(x);
        }
    }
    if !found.is_empty() && found.len() < known.len() {
        loops += grow_by_loops(family, target, &mut found, sampler, cfg, &mut rng, known.len());
    }
    let solutions = collect_solutions(&end_system, &found, cfg);
    Ok(SolutionSet { unknowns: family.unknowns.clone(), solutions, method: "monodromy".into(), paths: known.len(), diverged, failed, loops })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMethod {
    #[default]
    Auto,
    Eigen,
    TotalDegree,
    Monodromy,
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMethod::Auto => "auto",
            SolveMethod::Eigen => "eigen",
            SolveMethod::TotalDegree => "total-degree",
            SolveMethod::Monodromy => "monodromy",
        })
    }
}

impl std::str::FromStr for SolveMethod {
    type Err = FockError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(SolveMethod::Auto),
            "eigen" => Ok(SolveMethod::Eigen),
            "total-degree" => Ok(SolveMethod::TotalDegree),
            "monodromy" => Ok(SolveMethod::Monodromy),
            _ => Err(FockError::Parse { pos: 0, msg: format!("unknown method {s:?}") }),
        }
    }
}

/// Derived seeds so that the Hamiltonian, tracker and loops draw independently.
fn sub_seed(seed: u64, salt: u64) -> u64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(salt);
    rng.gen()
}

/// Solutions of the CC system for the Hamiltonian `random_hamiltonian(n, seed)`.
pub fn cc_solve(d: usize, n: usize, sigma: &LevelSet, cfg: &TrackerConfig, seed: u64, method: SolveMethod) -> Result<SolutionSet> {
    let h = random_hamiltonian(n, seed)?;
    let sys = assemble_cc_system(&h, d, n, sigma)?;
    let method = match method {
        SolveMethod::Auto if is_linear(sigma, d, n) => SolveMethod::Eigen,
        SolveMethod::Auto if sys.frozen().bezout() <= cfg.total_degree_limit => SolveMethod::TotalDegree,
        SolveMethod::Auto => SolveMethod::Monodromy,
        m => m,
    };
    match method {
        SolveMethod::Eigen => {
            if !is_linear(sigma, d, n) {
                return Err(FockError::Family("the eigenvalue method needs a linear level set".into()));
            }
            let proj = projection_indices(d, n, sigma);
            let sub = DMatrix::from_fn(proj.len(), proj.len(), |a, b| h.matrix[(proj[a], proj[b])]);
            let eig = SymmetricEigen::new(sub);
            let reference = proj.iter().position(|&r| r == IndexSet::range(d).rank()).expect("reference is projected");
            let pairs = amplitude_pairs(d, n, sigma);
            let mut candidates = Vec::new();
            for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
                let v = eig.eigenvectors.column(i);
                if v[reference].abs() < 1e-14 {
                    continue;
                }
                let mut psi = vec![C::zero(); 1 << n];
                for (a, &r) in proj.iter().enumerate() {
                    psi[r] = C::new(v[a] / v[reference], 0.0);
                }
                let t = numeric_inverse(&psi, d, n, &pairs)?;
                let mut x = vec![C::new(lambda, 0.0)];
                x.extend(pairs.iter().map(|&(a, b)| t[&Var::t(a, b)]));
                candidates.push(x);
            }
            let frozen = sys.frozen();
            let solutions = collect_solutions(&frozen, &candidates, cfg);
            Ok(SolutionSet { unknowns: frozen.unknowns, solutions, method: "eigen".into(), paths: proj.len(), diverged: 0, failed: 0, loops: 0 })
        }
        SolveMethod::TotalDegree => total_degree_solve(&sys.frozen(), cfg, sub_seed(seed, 1)),
        SolveMethod::Monodromy | SolveMethod::Auto => {
            let triple = monodromy_seed(d, n, sigma, sub_seed(seed, 2))?;
            let family = sys.family();
            let start = sys.family_params(&triple.hamiltonian);
            let target = sys.family_params(&h.to_complex());
            let dim = 1usize << n;
            let sampler = |rng: &mut ChaCha20Rng| sys.family_params(&random_complex_symmetric(dim, rng));
            monodromy_solve(&family, &start, &[triple.point()], &target, &sampler, cfg, sub_seed(seed, 3))
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub count: usize,
    pub real: usize,
    pub paths: usize,
    pub diverged: usize,
    pub failed: usize,
    pub loops: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CcDegreeReport {
    pub d: usize,
    pub n: usize,
    pub sigma: String,
    pub dimension: usize,
    pub method: String,
    /// `None` when the seeds disagree.
    pub ccdeg: Option<usize>,
    pub runs: Vec<SeedRun>,
}

impl CcDegreeReport {
    pub fn require_consensus(&self) -> Result<usize> {
        self.ccdeg.ok_or_else(|| {
            let counts: Vec<String> = self.runs.iter().map(|r| format!("seed {} → {}", r.seed, r.count)).collect();
            FockError::Inconclusive(counts.join(", "))
        })
    }
}

fn resolve_method(d: usize, n: usize, sigma: &LevelSet, cfg: &TrackerConfig, seed: u64, method: SolveMethod) -> Result<SolveMethod> {
    if method != SolveMethod::Auto {
        return Ok(method);
    }
    if is_linear(sigma, d, n) {
        return Ok(SolveMethod::Eigen);
    }
    let sys = assemble_cc_system(&random_hamiltonian(n, seed)?, d, n, sigma)?;
    Ok(if sys.frozen().bezout() <= cfg.total_degree_limit { SolveMethod::TotalDegree } else { SolveMethod::Monodromy })
}

/// Solves for each Hamiltonian seed and reports the common count.
pub fn cc_degree(d: usize, n: usize, sigma: &LevelSet, cfg: &TrackerConfig, seeds: &[u64], method: SolveMethod) -> Result<CcDegreeReport> {
    Ok(cc_degree_with_sets(d, n, sigma, cfg, seeds, method)?.0)
}

/// Same as [`cc_degree`], also returning the solution set of every seed.
pub fn cc_degree_with_sets(
    d: usize,
    n: usize,
    sigma: &LevelSet,
    cfg: &TrackerConfig,
    seeds: &[u64],
    method: SolveMethod,
) -> Result<(CcDegreeReport, Vec<SolutionSet>)> {
    if seeds.is_empty() {
        return Err(FockError::Shape("at least one Hamiltonian seed is needed".into()));
    }
    let method = resolve_method(d, n, sigma, cfg, seeds[0], method)?;
    let mut runs = Vec::new();
    let mut sets = Vec::new();
    for &seed in seeds {
        let clock = Instant::now();
        let set = cc_solve(d, n, sigma, cfg, seed, method)?;
        runs.push(SeedRun {
            seed,
            count: set.len(),
            real: set.real_count(),
            paths: set.paths,
            diverged: set.diverged,
            failed: set.failed,
            loops: set.loops,
            seconds: clock.elapsed().as_secs_f64(),
        });
        sets.push(set);
    }
    let ccdeg = runs.iter().all(|r| r.count == runs[0].count).then_some(runs[0].count);
    let report = CcDegreeReport { d, n, sigma: sigma.to_string(), dimension: dimension(sigma, d, n), method: method.to_string(), ccdeg, runs };
    Ok((report, sets))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VarietyDegreeReport {
    pub d: usize,
    pub n: usize,
    pub sigma: String,
    pub seed: u64,
    pub degree: usize,
    pub method: String,
    pub paths: usize,
    pub seconds: f64,
}

/// `deg V_σ` as the number of points on a random codimension-`dim σ` slice.
pub fn variety_degree(d: usize, n: usize, sigma: &LevelSet, cfg: &TrackerConfig, seed: u64, method: SolveMethod) -> Result<VarietyDegreeReport> {
    let clock = Instant::now();
    let sys = assemble_degree_system(sigma, d, n, seed)?;
    let method = match method {
        SolveMethod::Auto | SolveMethod::Eigen if sys.frozen().bezout() <= cfg.total_degree_limit => SolveMethod::TotalDegree,
        SolveMethod::Auto | SolveMethod::Eigen => SolveMethod::Monodromy,
        m => m,
    };
    let set = match method {
        SolveMethod::Monodromy => {
            let family = sys.family();
            let (start, t) = sys.seed_slice(sub_seed(seed, 4));
            let (rows, cols) = sys.gamma.shape();
            let sampler = |rng: &mut ChaCha20Rng| DMatrix::from_fn(rows, cols, |_, _| random_complex(rng));
            monodromy_solve(&family, &start, &[t], &sys.gamma, &sampler, cfg, sub_seed(seed, 5))?
        }
        _ => total_degree_solve(&sys.frozen(), cfg, sub_seed(seed, 6))?,
    };
    Ok(VarietyDegreeReport {
        d,
        n,
        sigma: sigma.to_string(),
        seed,
        degree: set.len(),
        method: set.method.clone(),
        paths: set.paths,
        seconds: clock.elapsed().as_secs_f64(),
    })
}

/// `ccdeg ≤ (dim + 1) · deg`.
pub fn upper_bound_holds(ccdeg: usize, dim: usize, degree: usize) -> bool {
    ccdeg <= (dim + 1) * degree
}

/// A seeded complex symmetric matrix of size `2^n`, for callers building
/// their own parameter loops.
pub fn random_symmetric_params(n: usize, seed: u64) -> DMatrix<C> {
    random_complex_symmetric(1 << n, &mut ChaCha20Rng::seed_from_u64(seed))
}

/// Builds the CC system for an arbitrary complex symmetric matrix and
/// evaluates it at a point.
pub fn cc_residual(h: &DMatrix<C>, d: usize, n: usize, sigma: &LevelSet, x: &[C]) -> Result<f64> {
    let sys = assemble_with_matrix(h, d, n, sigma)?;
    Ok(max_abs(&sys.frozen().evaluate(x)))
}

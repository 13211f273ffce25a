//! Factorization of two nonsingular cones sharing a valuation vector into a
//! common cone, by star subdivisions along the valuation on both sides.
//!
//! The procedure recurses on dimension: subdivide `tau` into `sigma`, align a
//! generator `w_1` of `sigma` as `w_1 = u_1 - u_2`, factor the images in the
//! quotient by `w_1`, lift both quotient traces, then finish on the faces
//! `<w_1, w_i>` and `<w_1, w_2>`.

mod align;
mod dependent;
mod verify;
mod walk;


use std::cell::Cell;
use std::rc::Rc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ResultExt};
use crate::formal_real::Sign;
use crate::lattice::{
    star_subdivide, LatticeVector, ProjectionContext, Side, StepRecord, TraceStep, UnimodularCone, ValuationVector,
};
use align::Aligner;
use walk::{matching_permutation, Walk};

pub use dependent::{factor_dependent, reduce_dependent, ColumnOp, Reduction};
pub use verify::{replay, verify_trace, VerifyReport, Violation};

pub const DEFAULT_GUARD: u64 = 1_000_000;

/// How the valuation must sit in every cone of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Containment {
    /// In the interior.
    #[default]
    Strict,
    /// Anywhere in the closed cone (rationally dependent valuations).
    Relaxed,
}

/// Both subdivision sequences and the common final cone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorizationTrace {
    pub sigma_steps: Vec<TraceStep>,
    pub tau_steps: Vec<TraceStep>,
    pub final_cone: UnimodularCone,
    #[serde(default)]
    pub mode: Containment,
}

impl FactorizationTrace {
    pub fn star_count(steps: &[TraceStep]) -> usize {
        steps.iter().filter(|s| s.as_star().is_some()).count()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FactorOptions {
    /// Maximum number of steps per loop.
    pub guard: u64,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions { guard: DEFAULT_GUARD }
    }
}

/// The coefficient row `a` after every step of one alignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignRun {
    pub dim: usize,
    pub history: Vec<Vec<BigInt>>,
}

impl AlignRun {
    fn max_abs(a: &[BigInt]) -> BigInt {
        a.iter().map(|x| x.abs()).max().unwrap_or_default()
    }

    pub fn max_abs_non_increasing(&self) -> bool {
        self.history
            .windows(2)
            .all(|w| Self::max_abs(&w[1]) <= Self::max_abs(&w[0]))
    }

    /// Final row is `(1, -1, 0, ..., 0)`.
    pub fn ends_aligned(&self) -> bool {
        let Some(last) = self.history.last() else {
            return false;
        };
        last.len() >= 2
            && last[0].is_one()
            && last[1] == -BigInt::one()
            && last[2..].iter().all(Zero::is_zero)
    }
}

#[derive(Debug, Clone, Default)]
pub struct FactorLog {
    pub align_runs: Vec<AlignRun>,
}

/// Step budget; guards made with [`Guard::stage`] draw from the same count.
#[derive(Debug, Clone)]
pub(crate) struct Guard {
    limit: u64,
    count: Rc<Cell<u64>>,
    stage: &'static str,
}

impl Default for Guard {
    fn default() -> Self {
        Guard::new(DEFAULT_GUARD, "factorization")
    }
}

impl Guard {
    pub fn new(limit: u64, stage: &'static str) -> Self {
        Guard {
            limit,
            count: Rc::new(Cell::new(0)),
            stage,
        }
    }

    pub fn stage(&self, stage: &'static str) -> Guard {
        Guard {
            limit: self.limit,
            count: self.count.clone(),
            stage,
        }
    }

    pub fn tick(&mut self, n: u64) -> Result<()> {
        self.count.set(self.count.get().saturating_add(n));
        if self.count.get() > self.limit {
            Err(Error::IterationGuardExceeded {
                guard: self.limit,
                stage: self.stage,
            })
        } else {
            Ok(())
        }
    }
}

/// Trial budget for each alignment option.
const PROBE_GUARD: u64 = 20_000;

struct AlignChoice {
    swap: bool,
    axis: usize,
    aligned: Walk,
    run: AlignRun,
}

fn max_entry(gens: &[LatticeVector]) -> BigInt {
    gens.iter()
        .flat_map(|g| g.entries().iter().map(Signed::abs))
        .max()
        .unwrap_or_default()
}

struct Solution {
    sigma_steps: Vec<TraceStep>,
    tau_steps: Vec<TraceStep>,
    rho: UnimodularCone,
}

/// Runs factorizations and collects per-run diagnostics.
#[derive(Debug, Default)]
pub struct Factorizer {
    options: FactorOptions,
    log: FactorLog,
    budget: Guard,
}

impl Factorizer {
    pub fn new(options: FactorOptions) -> Self {
        Factorizer {
            budget: Guard::new(options.guard, "factorization"),
            options,
            log: FactorLog::default(),
        }
    }

    pub fn log(&self) -> &FactorLog {
        &self.log
    }

    pub fn take_log(&mut self) -> FactorLog {
        std::mem::take(&mut self.log)
    }

    /// Common refinement of `tau` and `sigma` along a valuation with rationally
    /// independent coordinates, interior to both cones.
    pub fn factor(
        &mut self,
        tau: &UnimodularCone,
        sigma: &UnimodularCone,
        v: &ValuationVector,
    ) -> Result<FactorizationTrace> {
        self.budget = Guard::new(self.options.guard, "factorization");
        self.factor_within_budget(tau, sigma, v)
    }

    fn factor_within_budget(
        &mut self,
        tau: &UnimodularCone,
        sigma: &UnimodularCone,
        v: &ValuationVector,
    ) -> Result<FactorizationTrace> {
        let sol = self.solve(tau, sigma, v)?;
        Ok(FactorizationTrace {
            sigma_steps: sol.sigma_steps,
            tau_steps: sol.tau_steps,
            final_cone: sol.rho,
            mode: Containment::Strict,
        })
    }

    fn check_dims(tau: &UnimodularCone, sigma: &UnimodularCone, v: &ValuationVector) -> Result<usize> {
        let n = sigma.dim();
        for found in [tau.dim(), v.dim()] {
            if found != n {
                return Err(Error::DimensionMismatch { expected: n, found });
            }
        }
        Ok(n)
    }

    fn solve(&mut self, tau: &UnimodularCone, sigma: &UnimodularCone, v: &ValuationVector) -> Result<Solution> {
        let n = Self::check_dims(tau, sigma, v)?;
        let t = Walk::strict(Side::Tau, tau, v)?;
        let s = Walk::strict(Side::Sigma, sigma, v)?;
        // `inner` is subdivided into `outer`; either cone may play that role.
        let (mut inner, mut outer) = (t, s);
        if n == 1 {
            if inner.gens != outer.gens {
                return Err(Error::RelationBroken("one-dimensional cones differ".into()));
            }
        } else if matching_permutation(&outer.gens, &inner.gens).is_none() {
            if n == 2 {
                let target = outer.cone();
                self.ensure_subcone_walk(&mut inner, &target, self.budget.stage("ensure_subcone"))
                    .context(|| "subdividing tau into sigma".into())?;
                let target = [inner.gens[0].clone(), inner.gens[1].clone()];
                self.dim2_face(&mut outer, 0, 1, &target)
                    .context(|| "two-dimensional factorization".into())?;
            } else {
                let choice = self
                    .choose_alignment(&inner, &outer)
                    .context(|| "aligning".into())?;
                if choice.swap {
                    std::mem::swap(&mut inner, &mut outer);
                }
                inner = choice.aligned;
                if choice.axis != 0 {
                    let perm: Vec<usize> = std::iter::once(choice.axis)
                        .chain((0..n).filter(|&k| k != choice.axis))
                        .collect();
                    outer.permute(&perm)?;
                }
                self.log.align_runs.push(choice.run);
                self.solve_aligned(&mut inner, &mut outer, n)
                    .context(|| format!("factoring in dimension {n}"))?;
            }
        }
        let perm = matching_permutation(&outer.gens, &inner.gens)
            .ok_or_else(|| Error::RelationBroken("final cones differ".into()))?;
        outer.permute(&perm)?;
        let (t, s) = if inner.side == Side::Tau { (inner, outer) } else { (outer, inner) };
        Ok(Solution {
            rho: t.cone(),
            sigma_steps: s.steps,
            tau_steps: t.steps,
        })
    }

    /// Which cone to subdivide into the other and which generator of the
    /// latter to align to are free. Every option is probed under a small guard
    /// and the one leaving the smallest generators is kept; this keeps the
    /// later unit-step stages (cleanup, two-dimensional faces) short.
    fn choose_alignment(&mut self, t: &Walk, s: &Walk) -> Result<AlignChoice> {
        let n = t.dim();
        let probe = self.options.guard.min(PROBE_GUARD);
        let mut best: Option<(BigInt, AlignChoice)> = None;
        for swap in [false, true] {
            let (inner, outer) = if swap { (s, t) } else { (t, s) };
            let mut inner = inner.clone();
            if self
                .ensure_subcone_walk(&mut inner, &outer.cone(), Guard::new(probe, "ensure_subcone"))
                .is_err()
            {
                continue;
            }
            for axis in 0..n {
                let mut aligned = inner.clone();
                let Ok(run) = Aligner::new(&mut aligned, &outer.gens[axis], Guard::new(probe, "align")).run() else {
                    continue;
                };
                let size = max_entry(&aligned.gens);
                if best.as_ref().is_none_or(|(b, _)| size < *b) {
                    best = Some((size, AlignChoice { swap, axis, aligned, run }));
                }
            }
        }
        if let Some((_, choice)) = best {
            // Probe steps end up in the trace, so they count against the budget.
            let before = if choice.swap { s.steps.len() } else { t.steps.len() };
            self.budget.stage("align").tick((choice.aligned.steps.len() - before) as u64)?;
            return Ok(choice);
        }
        let mut aligned = t.clone();
        self.ensure_subcone_walk(&mut aligned, &s.cone(), self.budget.stage("ensure_subcone"))?;
        let run = Aligner::new(&mut aligned, &s.gens[0], self.budget.stage("align")).run()?;
        Ok(AlignChoice {
            swap: false,
            axis: 0,
            aligned,
            run,
        })
    }

    /// Subdivides `tau` along `v` until every generator lies in `sigma`. Each
    /// step takes the two generators with the largest coordinates of `v` (a
    /// Brun step), which shrinks `tau` towards the ray of `v`.
    fn ensure_subcone_walk(&mut self, t: &mut Walk, sigma: &UnimodularCone, mut guard: Guard) -> Result<()> {
        while !t.gens.iter().all(|g| sigma.contains_vector(g)) {
            guard.tick(1)?;
            let (mut hi, mut lo) = (0, 1);
            if t.coords[lo].compare(&t.coords[hi])? == Sign::Positive {
                std::mem::swap(&mut hi, &mut lo);
            }
            for k in 2..t.dim() {
                if t.coords[k].compare(&t.coords[hi])? == Sign::Positive {
                    lo = hi;
                    hi = k;
                } else if t.coords[k].compare(&t.coords[lo])? == Sign::Positive {
                    lo = k;
                }
            }
            t.star(hi, lo)?;
        }
        Ok(())
    }

    /// Subdivides `sigma` at the sum of its generators `a` and `b` along `v`
    /// until those two generators are exactly `target` (in some order).
    fn dim2_face(&mut self, s: &mut Walk, a: usize, b: usize, target: &[LatticeVector; 2]) -> Result<()> {
        // Coordinates of the targets in the face basis, updated per step.
        let mut coords: Vec<[BigInt; 2]> = Vec::with_capacity(2);
        for x in target {
            let c = s.lattice_coordinates(x);
            if c.iter().enumerate().any(|(k, ck)| k != a && k != b && !ck.is_zero()) {
                return Err(Error::RelationBroken(format!("{x} is not in the face")));
            }
            coords.push([c[a].clone(), c[b].clone()]);
        }
        let mut guard = self.budget.stage("dim2_direct");
        let done = |s: &Walk| {
            (s.gens[a] == target[0] && s.gens[b] == target[1]) || (s.gens[a] == target[1] && s.gens[b] == target[0])
        };
        while !done(s) {
            guard.tick(1)?;
            let r = s.star(a, b)?;
            // x = x_a g_a + x_b g_b; replacing g_r by g_a + g_b shifts x_other by -x_r.
            let (ri, oi) = if r == a { (0, 1) } else { (1, 0) };
            for c in coords.iter_mut() {
                let d = c[ri].clone();
                c[oi] -= d;
                if c[oi].is_negative() {
                    return Err(Error::RelationBroken("two-dimensional subdivision left the target cone".into()));
                }
            }
        }
        Ok(())
    }

    /// Recursion step once `w1 = s.gens[0] = t.gens[0] - t.gens[1]` and `t` lies in `s`.
    fn solve_aligned(&mut self, t: &mut Walk, s: &mut Walk, n: usize) -> Result<()> {
        let w1 = s.gens[0].clone();
        let ctx = ProjectionContext::new(&s.cone(), vec![0])?;
        let mut qmap: Vec<usize> = std::iter::once(0).chain(2..n).collect();
        let qtau = UnimodularCone::new(qmap.iter().map(|&k| ctx.project_vector(&t.gens[k])).collect())
            .context(|| "projected tau".into())?;
        let qsigma = ctx.projected_sigma();
        let qv = ValuationVector::new(s.coords[1..].to_vec())?;
        let sub = self.solve(&qtau, &qsigma, &qv)?;

        let mut pair = (0usize, 1usize);
        let mut guard = self.budget.stage("lift");
        for step in &sub.tau_steps {
            guard.tick(1)?;
            match step {
                TraceStep::Permute { perm } => {
                    qmap = perm.iter().map(|&k| qmap[k]).collect();
                }
                TraceStep::Star(rec) => lift_star(t, &mut pair, &qmap, rec, &w1)?,
            }
        }
        for step in &sub.sigma_steps {
            match step {
                TraceStep::Permute { perm } => {
                    let lifted: Vec<usize> = std::iter::once(0).chain(perm.iter().map(|&k| k + 1)).collect();
                    s.permute(&lifted)?;
                }
                TraceStep::Star(rec) => {
                    // The quotient coordinates are the lifted ones without the axis.
                    s.star_forced(rec.pair.0 + 1, rec.pair.1 + 1, rec.replaced + 1);
                }
            }
        }

        let rho = sub.rho.generators();
        for (k, r) in rho.iter().enumerate() {
            if ctx.project_vector(&t.gens[qmap[k]]) != *r || ctx.project_vector(&s.gens[k + 1]) != *r {
                return Err(Error::RelationBroken(format!("lifted cones do not project onto quotient generator {k}")));
            }
        }

        // u_i = alpha_i w_1 + w_i for the non-relation generators.
        let kp = qmap
            .iter()
            .position(|&k| k == pair.0)
            .ok_or_else(|| Error::RelationBroken("relation generator lost".into()))?;
        for (k, &ti) in qmap.iter().enumerate() {
            if k == kp {
                continue;
            }
            let si = k + 1;
            let alpha = s.lattice_coordinates(&t.gens[ti])[0].clone();
            if alpha.is_negative() {
                return Err(Error::RelationBroken(format!("generator {ti} of tau is outside sigma")));
            }
            let times = alpha.to_u64().unwrap_or(u64::MAX);
            let mut guard = self.budget.stage("face cleanup");
            guard.tick(times)?;
            for _ in 0..times {
                let r = s.star(0, si)?;
                if r != si {
                    return Err(Error::RelationBroken(format!("cleanup subdivision replaced the axis instead of {si}")));
                }
            }
            if s.gens[si] != t.gens[ti] {
                return Err(Error::RelationBroken(format!("cleanup did not reach generator {ti}")));
            }
        }
        let target = [t.gens[pair.0].clone(), t.gens[pair.1].clone()];
        self.dim2_face(s, 0, kp + 1, &target)
    }
}

/// Lifts one quotient star subdivision to `tau`, keeping `w1 = u_p - u_q` for
/// `pair = (p, q)`. `qmap[k]` is the generator of `tau` over quotient generator `k`
/// (for the relation pair, `p`).
fn lift_star(
    t: &mut Walk,
    pair: &mut (usize, usize),
    qmap: &[usize],
    rec: &StepRecord,
    w1: &LatticeVector,
) -> Result<()> {
    let (qi, qj) = rec.pair;
    let (ti, tj) = (qmap[qi], qmap[qj]);
    if ti != pair.0 && tj != pair.0 {
        // Quotient coordinates of these two generators equal the lifted ones.
        t.star_forced(ti, tj, qmap[rec.replaced]);
        return Ok(());
    }
    let (kp, kj) = if ti == pair.0 { (qi, qj) } else { (qj, qi) };
    let j = qmap[kj];
    let pair_replaced = lift_pair_step(t, pair, j)?;
    let expected = if pair_replaced { kp } else { kj };
    if rec.replaced != expected {
        return Err(Error::RelationBroken(format!(
            "lifted subdivision disagrees with the quotient at generator {j}"
        )));
    }
    if t.gens[pair.0].sub(&t.gens[pair.1]) != *w1 {
        return Err(Error::RelationBroken("w1 = u_p - u_q no longer holds".into()));
    }
    Ok(())
}

/// Subdivides at `z' = u_q + u_j`, then (if `u_j` survived) at `z'' = u_p + u_j`.
/// Returns whether the quotient generator of the relation pair was replaced.
fn lift_pair_step(t: &mut Walk, pair: &mut (usize, usize), j: usize) -> Result<bool> {
    let (p, q) = *pair;
    if t.star(q, j)? == j {
        // z' replaced u_j: the quotient already shows the subdivided cone.
        return Ok(false);
    }
    if t.star(p, j)? == p {
        Ok(true)
    } else {
        // u_j became z'' and now pairs with z' = u_q.
        *pair = (j, q);
        Ok(false)
    }
}

/// Factors with default options.
pub fn factor(tau: &UnimodularCone, sigma: &UnimodularCone, v: &ValuationVector) -> Result<FactorizationTrace> {
    Factorizer::default().factor(tau, sigma, v)
}

/// Subdivides `tau` along `v` until it lies inside `sigma`.
pub fn ensure_subcone(
    tau: &UnimodularCone,
    sigma: &UnimodularCone,
    v: &ValuationVector,
    options: FactorOptions,
) -> Result<(UnimodularCone, Vec<TraceStep>)> {
    Factorizer::check_dims(tau, sigma, v)?;
    let mut t = Walk::strict(Side::Tau, tau, v)?;
    Walk::strict(Side::Sigma, sigma, v)?;
    Factorizer::new(options).ensure_subcone_walk(&mut t, sigma, Guard::new(options.guard, "ensure_subcone"))?;
    Ok((t.cone(), t.steps))
}

/// Two-dimensional direct factorization: subdivides `sigma` until it equals `tau`
/// (which must lie inside it); ends with a reordering when needed.
pub fn dim2_direct(
    tau: &UnimodularCone,
    sigma: &UnimodularCone,
    v: &ValuationVector,
    options: FactorOptions,
) -> Result<Vec<TraceStep>> {
    let n = Factorizer::check_dims(tau, sigma, v)?;
    if n != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: n });
    }
    if !sigma.contains_cone(tau) {
        return Err(Error::RelationBroken("tau is not contained in sigma".into()));
    }
    Walk::strict(Side::Tau, tau, v)?;
    let mut s = Walk::strict(Side::Sigma, sigma, v)?;
    let target = [tau.generators()[0].clone(), tau.generators()[1].clone()];
    Factorizer::new(options).dim2_face(&mut s, 0, 1, &target)?;
    let perm = matching_permutation(&s.gens, tau.generators()).expect("face equals target");
    s.permute(&perm)?;
    Ok(s.steps)
}

/// Subdivides `tau` along `v` until `target = u_1 - u_2`.
pub fn align(
    tau: &UnimodularCone,
    v: &ValuationVector,
    target: &LatticeVector,
    options: FactorOptions,
) -> Result<(UnimodularCone, Vec<TraceStep>, AlignRun)> {
    let mut t = Walk::strict(Side::Tau, tau, v)?;
    let run = Aligner::new(&mut t, target, Guard::new(options.guard, "align")).run()?;
    Ok((t.cone(), t.steps, run))
}

/// The two generators introduced when lifting a quotient subdivision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftStep {
    pub j: usize,
    /// `u_2 + u_j`
    pub z_prime: LatticeVector,
    /// `u_1 + u_j`
    pub z_double_prime: LatticeVector,
}

/// Lifts the star subdivision of the quotient of `tau` by `w = u_1 - u_2` at the
/// image of `u_1 + u_j` (`j >= 2`, zero-based). The result again has `w` as the
/// difference of its first two generators, and its image is the quotient subdivision.
pub fn lift_tau_step(
    tau: &UnimodularCone,
    j: usize,
    v: &ValuationVector,
) -> Result<(UnimodularCone, Vec<TraceStep>, LiftStep)> {
    let n = tau.dim();
    if j < 2 || j >= n {
        return Err(Error::InvalidPair { i: 0, j, dim: n });
    }
    let gens = tau.generators();
    let w1 = gens[0].sub(&gens[1]);
    let lift = LiftStep {
        j,
        z_prime: gens[1].add(&gens[j]),
        z_double_prime: gens[0].add(&gens[j]),
    };
    let mut t = Walk::strict(Side::Tau, tau, v)?;
    let mut pair = (0, 1);
    lift_pair_step(&mut t, &mut pair, j)?;
    if pair.0 != 0 {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(0, pair.0);
        t.permute(&perm)?;
    }
    if t.gens[0].sub(&t.gens[1]) != w1 {
        return Err(Error::RelationBroken("relation not re-established".into()));
    }
    // Quotient in the basis pi(u_1), pi(u_3), ..., pi(u_n) of the original tau.
    let project = |c: Vec<BigInt>| -> LatticeVector {
        let mut out = vec![&c[0] + &c[1]];
        out.extend(c[2..].iter().cloned());
        LatticeVector::new(out)
    };
    let b = crate::lattice::cone_coordinates(v, tau)?.into_coords();
    let mut qb = vec![b[0].try_add(&b[1])?];
    qb.extend(b[2..].iter().cloned());
    let (expected, _) = star_subdivide(&UnimodularCone::identity(n - 1), 0, j - 1, &ValuationVector::new(qb)?, Side::Tau)?;
    let image: Vec<LatticeVector> = std::iter::once(0)
        .chain(2..n)
        .map(|k| project(tau.lattice_coordinates(&t.gens[k])))
        .collect();
    if matching_permutation(&image, expected.generators()).is_none() {
        return Err(Error::RelationBroken("lift does not project onto the quotient subdivision".into()));
    }
    Ok((t.cone(), t.steps, lift))
}

//! Valuations with rationally dependent (or zero) coordinates.
//!
//! Column operations `b_L -= b_S` reduce the coordinates until the nonzero
//! ones are rationally independent. Both cones then share the face spanned by
//! the support; it is factored as in the independent case, and the rest is
//! handled in the quotient by that face along an auxiliary independent vector.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::walk::{matching_permutation, Walk};
use super::{Containment, FactorizationTrace, Factorizer, Guard};
use crate::error::{Error, Result};
use crate::formal_real::{coefficient_rank, FormalReal, RealBasis, Sign};
use crate::lattice::matrix::left_kernel_vector;
use crate::lattice::{
    contains_valuation, interior_intersects, interior_witness, LatticeVector, Side, TraceStep, UnimodularCone,
    ValuationVector,
};

/// `b[target] -= b[source]`, realized by the star subdivision at the sum of
/// the two generators that replaces generator `source`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnOp {
    pub target: usize,
    pub source: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub ops: Vec<ColumnOp>,
    /// Number of nonzero entries left; they are rationally independent.
    pub m: usize,
    /// `order[k]` is the index of the entry moved to position `k`: the support
    /// first, each part in increasing index order.
    pub order: Vec<usize>,
    pub reduced: Vec<FormalReal>,
}

fn support(b: &[FormalReal]) -> Vec<usize> {
    (0..b.len()).filter(|&k| !b[k].is_zero()).collect()
}

/// Candidate operations `(target, source)` for the current entries, best first,
/// or `None` when the nonzero entries are already independent.
///
/// A primitive rational relation `lambda` among the nonzero entries has
/// entries of both signs. Each pair with opposite signs yields one operation
/// (the larger entry loses the smaller one, the lower index on ties); pairs are
/// ranked by the size of the relation it leaves, `sum |lambda|` after
/// `lambda_S += lambda_L`, then lexicographically.
fn candidate_ops(b: &[FormalReal]) -> Result<Option<Vec<(ColumnOp, bool)>>> {
    let supp = support(b);
    let rows: Vec<Vec<BigRational>> = supp.iter().map(|&k| b[k].coeffs().to_vec()).collect();
    if coefficient_rank(&supp.iter().map(|&k| b[k].clone()).collect::<Vec<_>>()) == supp.len() {
        return Ok(None);
    }
    let lambda = left_kernel_vector(&rows).expect("dependent rows have a relation");
    let mut ranked = Vec::new();
    for x in 0..supp.len() {
        for y in x + 1..supp.len() {
            if lambda[x].is_zero() || lambda[y].is_zero() || lambda[x].signum() == lambda[y].signum() {
                continue;
            }
            let (i, j) = (supp[x], supp[y]);
            let sign = b[i].compare(&b[j])?;
            let (l, s) = if sign == Sign::Negative { (y, x) } else { (x, y) };
            let mut after = lambda.clone();
            let bump = after[l].clone();
            after[s] += bump;
            let size: BigInt = after.iter().map(Signed::abs).sum();
            let op = ColumnOp {
                target: supp[l],
                source: supp[s],
            };
            ranked.push((size, (i, j), op, sign == Sign::Zero));
        }
    }
    ranked.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(Some(ranked.into_iter().map(|(_, _, op, tie)| (op, tie)).collect()))
}

fn support_order(b: &[FormalReal]) -> Vec<usize> {
    let supp = support(b);
    let rest = (0..b.len()).filter(|&k| b[k].is_zero());
    supp.iter().copied().chain(rest).collect()
}

/// Reduces nonnegative coordinates by column operations until the nonzero
/// entries are rationally independent.
pub fn reduce_dependent(b: &[FormalReal], guard: u64) -> Result<Reduction> {
    let mut b = b.to_vec();
    for (index, x) in b.iter().enumerate() {
        if x.sign()? == Sign::Negative {
            return Err(Error::NotContained { side: Side::Sigma }.context(format!("entry {index} is negative")));
        }
    }
    if b.iter().all(FormalReal::is_zero) {
        return Err(Error::DegenerateValuation { index: 0 });
    }
    let mut guard = Guard::new(guard, "reduce_dependent");
    let mut ops = Vec::new();
    while let Some(cands) = candidate_ops(&b)? {
        guard.tick(1)?;
        let (op, _) = cands[0];
        b[op.target] = b[op.target].try_sub(&b[op.source])?;
        ops.push(op);
    }
    let order = support_order(&b);
    let m = support(&b).len();
    let reduced = order.iter().map(|&k| b[k].clone()).collect();
    Ok(Reduction { ops, m, order, reduced })
}

/// A vector with rationally independent coordinates in the interiors of both
/// cones, close to a rational interior point.
pub(crate) fn independent_interior_vector(a: &UnimodularCone, b: &UnimodularCone) -> Result<ValuationVector> {
    let n = a.dim();
    let x = interior_witness(a.generators(), b.generators()).ok_or(Error::DisjointInteriors)?;
    let basis: Arc<RealBasis> = RealBasis::default_sqrt(n + 1);
    let mut eps = BigRational::one();
    for _ in 0..512 {
        let ambient = (0..n)
            .map(|k| {
                let mut c = vec![BigRational::zero(); n + 1];
                c[0] = x[k].clone();
                c[k + 1] = eps.clone();
                FormalReal::from_coeffs(&basis, c)
            })
            .collect::<Result<Vec<_>>>()?;
        let v = ValuationVector::new(ambient)?;
        if strictly_inside(a, &v)? && strictly_inside(b, &v)? {
            return Ok(v);
        }
        eps /= BigInt::from(2);
    }
    Err(Error::PrecisionExhausted {
        digits: basis.precision_digits(),
    })
}

fn strictly_inside(cone: &UnimodularCone, v: &ValuationVector) -> Result<bool> {
    for c in crate::lattice::cone_coordinates(v, cone)?.into_coords() {
        if c.sign()? != Sign::Positive {
            return Ok(false);
        }
    }
    Ok(true)
}

impl Factorizer {
    /// Factorization along a valuation that may have rationally dependent or
    /// zero coordinates. Subdivisions keep `v` in the closed cones and keep the
    /// interiors of the two cones meeting.
    pub fn factor_dependent(
        &mut self,
        tau: &UnimodularCone,
        sigma: &UnimodularCone,
        v: &ValuationVector,
    ) -> Result<FactorizationTrace> {
        self.budget = Guard::new(self.options.guard, "factorization");
        let n = Self::check_dims(tau, sigma, v)?;
        for (side, cone) in [(Side::Sigma, sigma), (Side::Tau, tau)] {
            if !contains_valuation(cone, v)? {
                return Err(Error::NotContained { side });
            }
        }
        if !interior_intersects(sigma.generators(), tau.generators()) {
            return Err(Error::DisjointInteriors);
        }
        if v.is_zero() {
            let v1 = independent_interior_vector(sigma, tau)?;
            let mut trace = self.factor_within_budget(tau, sigma, &v1)?;
            trace.mode = Containment::Relaxed;
            return Ok(trace);
        }

        let mut t = Walk::relaxed(Side::Tau, tau, v)?;
        let mut s = Walk::relaxed(Side::Sigma, sigma, v)?;
        self.reduce_walk(&mut t, &s.gens)?;
        self.reduce_walk(&mut s, &t.gens)?;
        let m = support(&t.coords).len();
        if m != support(&s.coords).len() {
            return Err(Error::RelationBroken("reduced supports have different sizes".into()));
        }
        if m == n {
            // Independent from the start: no operation was applied.
            return self.factor_within_budget(tau, sigma, v);
        }
        t.permute(&support_order(&t.coords))?;
        s.permute(&support_order(&s.coords))?;

        self.factor_face(&mut t, &mut s, m)?;
        self.factor_quotient(&mut t, &mut s, m)?;
        self.cleanup_common_face(&mut t, &mut s, m)?;

        let perm = matching_permutation(&s.gens, &t.gens)
            .ok_or_else(|| Error::RelationBroken("final cones differ".into()))?;
        s.permute(&perm)?;
        Ok(FactorizationTrace {
            final_cone: t.cone(),
            sigma_steps: s.steps,
            tau_steps: t.steps,
            mode: Containment::Relaxed,
        })
    }

    /// Column operations on one side, each a star subdivision along `v`. On a
    /// tie either cone contains `v`; the first (by replaced index) whose
    /// interior still meets the other cone is kept.
    fn reduce_walk(&mut self, w: &mut Walk, other: &[LatticeVector]) -> Result<()> {
        let mut guard = self.budget.stage("reduce_dependent");
        while let Some(cands) = candidate_ops(&w.coords)? {
            guard.tick(1)?;
            let (op, tie) = cands[0];
            let mut replaced = vec![op.source];
            if tie {
                replaced.push(op.target);
                replaced.sort_unstable();
            }
            let g = w.gens[op.target].add(&w.gens[op.source]);
            let r = replaced
                .into_iter()
                .find(|&r| {
                    let mut gens = w.gens.clone();
                    gens[r] = g.clone();
                    interior_intersects(&gens, other)
                })
                .ok_or(Error::DisjointInteriors)?;
            w.star_forced(op.target, op.source, r);
        }
        Ok(())
    }

    /// Makes the first `m` generators of both sides equal by factoring inside
    /// the face they span.
    fn factor_face(&mut self, t: &mut Walk, s: &mut Walk, m: usize) -> Result<()> {
        if m == 1 {
            return if t.gens[0] == s.gens[0] {
                Ok(())
            } else {
                Err(Error::RelationBroken("supporting rays differ".into()))
            };
        }
        let n = t.dim();
        let coords_in_sigma = |x: &LatticeVector| -> Result<LatticeVector> {
            let c = s.lattice_coordinates(x);
            if c[m..].iter().any(|x| !x.is_zero()) {
                return Err(Error::RelationBroken("reduced faces span different subspaces".into()));
            }
            Ok(LatticeVector::new(c[..m].to_vec()))
        };
        let tau_m = UnimodularCone::new(t.gens[..m].iter().map(coords_in_sigma).collect::<Result<_>>()?)?;
        let v_m = ValuationVector::new(s.coords[..m].to_vec())?;
        let sub = self.factor_within_budget(&tau_m, &UnimodularCone::identity(m), &v_m)?;
        let extend = |perm: &[usize]| -> Vec<usize> { perm.iter().copied().chain(m..n).collect() };
        for (w, steps) in [(&mut *t, &sub.tau_steps), (&mut *s, &sub.sigma_steps)] {
            for step in steps {
                match step {
                    TraceStep::Star(rec) => w.star_forced(rec.pair.0, rec.pair.1, rec.replaced),
                    TraceStep::Permute { perm } => w.permute(&extend(perm))?,
                }
            }
        }
        if t.gens[..m] != s.gens[..m] {
            return Err(Error::RelationBroken("face factorization did not agree".into()));
        }
        Ok(())
    }

    /// Factors the images in the quotient by the common face along an
    /// independent vector from both interiors, and lifts the steps. Both lifted
    /// generators of each step have coordinate zero, so either cone contains `v`.
    fn factor_quotient(&mut self, t: &mut Walk, s: &mut Walk, m: usize) -> Result<()> {
        let n = t.dim();
        let project = |x: &LatticeVector| LatticeVector::new(s.lattice_coordinates(x)[m..].to_vec());
        let q_tau = UnimodularCone::new(t.gens[m..].iter().map(project).collect())?;
        let q_sigma = UnimodularCone::identity(n - m);
        let q_v = independent_interior_vector(&q_sigma, &q_tau)?;
        let sub = self.factor_within_budget(&q_tau, &q_sigma, &q_v)?;
        let extend = |perm: &[usize]| -> Vec<usize> { (0..m).chain(perm.iter().map(|&k| k + m)).collect() };
        for (w, steps) in [(&mut *t, &sub.tau_steps), (&mut *s, &sub.sigma_steps)] {
            for step in steps {
                match step {
                    TraceStep::Star(rec) => w.star_forced(rec.pair.0 + m, rec.pair.1 + m, rec.replaced + m),
                    TraceStep::Permute { perm } => w.permute(&extend(perm))?,
                }
            }
        }
        Ok(())
    }

    /// Now `u_k = w_k + sum_i alpha_i w_i` over the face generators `w_i`;
    /// subdividing at `w_i + w_k` on one side or the other removes `alpha_i`.
    fn cleanup_common_face(&mut self, t: &mut Walk, s: &mut Walk, m: usize) -> Result<()> {
        let n = t.dim();
        let mut guard = self.budget.stage("face cleanup");
        for k in m..n {
            let alpha = s.lattice_coordinates(&t.gens[k]);
            if !alpha[k].is_one() || alpha[m..].iter().enumerate().any(|(j, a)| j + m != k && !a.is_zero()) {
                return Err(Error::RelationBroken(format!("generator {k} does not project correctly")));
            }
            for (i, a) in alpha[..m].iter().enumerate() {
                let times = a.abs().to_u64().unwrap_or(u64::MAX);
                guard.tick(times)?;
                let w = if a.is_positive() { &mut *s } else { &mut *t };
                for _ in 0..times {
                    w.star_forced(i, k, k);
                }
            }
        }
        if t.gens != s.gens {
            return Err(Error::RelationBroken("cleanup did not reach a common cone".into()));
        }
        Ok(())
    }
}

/// Factors with default options, allowing dependent or zero valuations.
pub fn factor_dependent(tau: &UnimodularCone, sigma: &UnimodularCone, v: &ValuationVector) -> Result<FactorizationTrace> {
    Factorizer::default().factor_dependent(tau, sigma, v)
}

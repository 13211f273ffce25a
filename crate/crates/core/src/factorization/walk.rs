use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::formal_real::{FormalReal, Sign};
use crate::lattice::{cone_coordinates, check_permutation, LatticeVector, Side, StepRecord, TraceStep, UnimodularCone, ValuationVector};

/// A cone being subdivided along a fixed valuation, with the valuation's
/// coordinates in the current generator basis kept up to date incrementally.
#[derive(Debug, Clone)]
pub(crate) struct Walk {
    pub side: Side,
    pub gens: Vec<LatticeVector>,
    pub coords: Vec<FormalReal>,
    pub steps: Vec<TraceStep>,
}

impl Walk {
    /// Strict: every coordinate of `v` must be positive.
    pub fn strict(side: Side, cone: &UnimodularCone, v: &ValuationVector) -> Result<Self> {
        let w = Self::relaxed(side, cone, v)?;
        for (index, c) in w.coords.iter().enumerate() {
            match c.sign()? {
                Sign::Positive => {}
                Sign::Zero => return Err(Error::DegenerateValuation { index }),
                Sign::Negative => return Err(Error::NotContained { side }),
            }
        }
        Ok(w)
    }

    /// Relaxed: `v` may lie on the boundary.
    pub fn relaxed(side: Side, cone: &UnimodularCone, v: &ValuationVector) -> Result<Self> {
        let coords = cone_coordinates(v, cone)?.into_coords();
        Ok(Walk {
            side,
            gens: cone.generators().to_vec(),
            coords,
            steps: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.gens.len()
    }

    pub fn cone(&self) -> UnimodularCone {
        UnimodularCone::new_unchecked(self.gens.clone())
    }

    /// Star subdivision at `g_i + g_j` keeping the cone that contains the
    /// valuation strictly. Returns the replaced index.
    pub fn star(&mut self, i: usize, j: usize) -> Result<usize> {
        let replaced = match self.coords[j].compare(&self.coords[i])? {
            Sign::Positive => i,
            Sign::Negative => j,
            Sign::Zero => return Err(Error::AmbiguousChoice { i, j }),
        };
        self.star_forced(i, j, replaced);
        Ok(replaced)
    }

    /// Star subdivision with a choice the caller has already certified.
    pub fn star_forced(&mut self, i: usize, j: usize, replaced: usize) {
        debug_assert!(i != j && (replaced == i || replaced == j));
        let other = if replaced == i { j } else { i };
        let g = self.gens[i].add(&self.gens[j]);
        let shifted = self.coords[other]
            .try_sub(&self.coords[replaced])
            .expect("walk coordinates share one basis");
        self.coords[other] = shifted;
        self.gens[replaced] = g.clone();
        self.steps.push(TraceStep::Star(StepRecord {
            side: self.side,
            pair: (i.min(j), i.max(j)),
            replaced,
            new_generator: g,
        }));
    }

    /// New generator `k` is old generator `perm[k]`. Identity permutations are not recorded.
    pub fn permute(&mut self, perm: &[usize]) -> Result<()> {
        check_permutation(perm, self.dim())?;
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(());
        }
        self.gens = perm.iter().map(|&k| self.gens[k].clone()).collect();
        self.coords = perm.iter().map(|&k| self.coords[k].clone()).collect();
        self.steps.push(TraceStep::Permute { perm: perm.to_vec() });
        Ok(())
    }

    /// Integer coordinates of `x` in the current generator basis.
    pub fn lattice_coordinates(&self, x: &LatticeVector) -> Vec<BigInt> {
        self.cone().lattice_coordinates(x)
    }
}

/// Permutation taking `from` (as an ordered list) to `to`: `to[k] = from[perm[k]]`.
pub(crate) fn matching_permutation(from: &[LatticeVector], to: &[LatticeVector]) -> Option<Vec<usize>> {
    let mut used = vec![false; from.len()];
    to.iter()
        .map(|g| {
            let k = from.iter().enumerate().position(|(k, f)| !used[k] && f == g)?;
            used[k] = true;
            Some(k)
        })
        .collect()
}

//! Subdividing `tau` along `v` until a generator `w` of `sigma` satisfies
//! `w = u_1 - u_2` for two generators of `tau`.
//!
//! State is the integer row `a` (coordinates of `w` in the `tau` basis) and the
//! real row `b` (coordinates of `v`). Subtracting column `i` from column `j` is
//! the star subdivision at `u_i + u_j` that replaces `u_i`; it is along `v`
//! exactly when `b_j > b_i`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::walk::Walk;
use super::{AlignRun, Guard};
use crate::error::{Error, Result};
use crate::formal_real::{floor_ratio, Sign};
use crate::lattice::LatticeVector;

pub(crate) struct Aligner<'a> {
    walk: &'a mut Walk,
    a: Vec<BigInt>,
    run: AlignRun,
    guard: Guard,
}

impl<'a> Aligner<'a> {
    pub fn new(walk: &'a mut Walk, target: &LatticeVector, guard: Guard) -> Self {
        let a = walk.lattice_coordinates(target);
        let run = AlignRun {
            dim: walk.dim(),
            history: vec![a.clone()],
        };
        Aligner {
            walk,
            a,
            run,
            guard,
        }
    }

    /// Runs until `a` reads `(1, -1)` on two columns and zero elsewhere, then
    /// reorders so that the relation is `w = u_1 - u_2`.
    ///
    /// While three or more entries are nonzero, the three-column process runs
    /// on the last three of them.
    /// With two nonzero entries left, a zero column is brought in as in the
    /// three-dimensional argument; with one, `a_p = 1` and one more column is
    /// paired with it.
    pub fn run(mut self) -> Result<AlignRun> {
        let n = self.a.len();
        if n < 3 {
            return Err(Error::DimensionMismatch { expected: 3, found: n });
        }
        let (p, q) = loop {
            let nz = self.nonzero();
            if let [i, j] = nz.as_slice() {
                let (i, j) = (*i, *j);
                if self.a[i].signum() == self.a[j].signum() {
                    return Err(Error::RelationBroken(format!(
                        "remaining coefficients {} and {} have equal signs",
                        self.a[i], self.a[j]
                    )));
                }
                if self.a[i].abs().is_one() && self.a[j].abs().is_one() {
                    break if self.a[i].is_positive() { (i, j) } else { (j, i) };
                }
            }
            match nz.as_slice() {
                [p] => {
                    let p = *p;
                    if !self.a[p].is_one() {
                        return Err(Error::RelationBroken(format!("lone coefficient {} is not 1", self.a[p])));
                    }
                    let q = (0..n).find(|&k| k != p).expect("n >= 3");
                    // b_p - k b_q stays positive for k steps, then b_q exceeds it.
                    if self.walk.coords[p].compare(&self.walk.coords[q])? == Sign::Positive {
                        let k = floor_ratio(&self.walk.coords[p], &self.walk.coords[q])?;
                        self.subtract(q, p, &k)?;
                    }
                    self.subtract(p, q, &BigInt::one())?;
                    break (p, q);
                }
                [i, j] => {
                    let (i, j) = (*i, *j);
                    let small = if self.a[i].abs() > self.a[j].abs() { j } else { i };
                    let spare = (0..n).find(|&k| self.a[k].is_zero()).expect("n >= 3");
                    // Make a_spare = -a_small so that it shares the sign of the other entry.
                    if self.walk.coords[small].compare(&self.walk.coords[spare])? == Sign::Positive {
                        let k = floor_ratio(&self.walk.coords[small], &self.walk.coords[spare])?;
                        self.subtract(spare, small, &k)?;
                    }
                    self.subtract(small, spare, &BigInt::one())?;
                }
                [] => return Err(Error::RelationBroken("target is zero".into())),
                _ => {
                    let triple = [nz[nz.len() - 3], nz[nz.len() - 2], nz[nz.len() - 1]];
                    self.triple_step(triple)?;
                }
            }
        };
        let mut perm = vec![p, q];
        perm.extend((0..n).filter(|&k| k != p && k != q));
        self.walk.permute(&perm)?;
        self.a = perm.iter().map(|&k| self.a[k].clone()).collect();
        self.run.history.push(self.a.clone());
        Ok(self.run)
    }

    fn nonzero(&self) -> Vec<usize> {
        (0..self.a.len()).filter(|&k| !self.a[k].is_zero()).collect()
    }

    /// Subtract column `from` from column `to`, `times` times.
    fn subtract(&mut self, from: usize, to: usize, times: &BigInt) -> Result<()> {
        let times = times
            .to_u64()
            .ok_or(Error::IterationGuardExceeded {
                guard: self.guard.limit,
                stage: self.guard.stage,
            })?;
        self.guard.tick(times)?;
        for _ in 0..times {
            self.walk.star_forced(from, to, from);
            let d = self.a[from].clone();
            self.a[to] -= d;
            self.run.history.push(self.a.clone());
        }
        Ok(())
    }

    /// One batch of the three-column process: the pair with equal signs, the
    /// column with smaller `b` subtracted from the other while `a_to` keeps
    /// its sign and `b_to` stays larger.
    fn triple_step(&mut self, triple: [usize; 3]) -> Result<()> {
        let pairs = [(triple[0], triple[1]), (triple[0], triple[2]), (triple[1], triple[2])];
        let (i, j) = *pairs
            .iter()
            .find(|(i, j)| self.a[*i].signum() == self.a[*j].signum())
            .expect("three nonzero integers include two of equal sign");
        let (from, to) = match self.walk.coords[j].compare(&self.walk.coords[i])? {
            Sign::Positive => (i, j),
            Sign::Negative => (j, i),
            Sign::Zero => return Err(Error::AmbiguousChoice { i, j }),
        };
        let keeps_sign = Integer::div_ceil(&self.a[to].abs(), &self.a[from].abs());
        let batch = floor_ratio(&self.walk.coords[to], &self.walk.coords[from])?.min(keeps_sign);
        self.subtract(from, to, &batch)
    }
}

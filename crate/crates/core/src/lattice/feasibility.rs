//! Exact feasibility of `sum_i l_i a_i = sum_j m_j b_j` with all `l_i, m_j > 0`,
//! i.e. whether the relative interiors of two simplicial cones meet.
//!
//! Strict positivity is homogeneous, so it is replaced by `l, m >= 1`. Equalities
//! are solved by elimination, the remaining inequalities by Fourier-Motzkin.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::matrix::rref;

/// `coef . z >= rhs`
#[derive(Debug, Clone, PartialEq, Eq)]
struct Ineq {
    coef: Vec<BigRational>,
    rhs: BigRational,
}

impl Ineq {
    /// Positive rescaling to primitive integer form.
    fn normalized(self) -> Ineq {
        let denom = self
            .coef
            .iter()
            .chain(std::iter::once(&self.rhs))
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coef
            .iter()
            .chain(std::iter::once(&self.rhs))
            .map(|c| c.numer() * (&denom / c.denom()))
            .collect();
        let g = ints[..ints.len() - 1].iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        let g = if g.is_zero() { BigInt::one() } else { g };
        let scale = BigRational::new(denom, g);
        Ineq {
            coef: self.coef.iter().map(|c| c * &scale).collect(),
            rhs: &self.rhs * &scale,
        }
    }
}

fn dedup(ineqs: Vec<Ineq>) -> Vec<Ineq> {
    let mut best: HashMap<Vec<BigRational>, BigRational> = HashMap::new();
    let mut order = Vec::new();
    for q in ineqs {
        let q = q.normalized();
        match best.get_mut(&q.coef) {
            Some(rhs) => {
                if q.rhs > *rhs {
                    *rhs = q.rhs;
                }
            }
            None => {
                order.push(q.coef.clone());
                best.insert(q.coef, q.rhs);
            }
        }
    }
    order
        .into_iter()
        .map(|coef| {
            let rhs = best.remove(&coef).expect("inserted");
            Ineq { coef, rhs }
        })
        .collect()
}

fn eliminate(system: &[Ineq], var: usize) -> Vec<Ineq> {
    let mut out = Vec::new();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for q in system {
        if q.coef[var].is_zero() {
            out.push(q.clone());
        } else if q.coef[var].is_positive() {
            pos.push(q);
        } else {
            neg.push(q);
        }
    }
    for p in &pos {
        for q in &neg {
            let fp = -q.coef[var].clone();
            let fq = p.coef[var].clone();
            let coef = p
                .coef
                .iter()
                .zip(&q.coef)
                .map(|(a, b)| a * &fp + b * &fq)
                .collect();
            out.push(Ineq {
                coef,
                rhs: &p.rhs * &fp + &q.rhs * &fq,
            });
        }
    }
    dedup(out)
}

/// Solves `Fz >= r` by Fourier-Motzkin; returns a point if feasible.
fn solve(initial: Vec<Ineq>, nvars: usize) -> Option<Vec<BigRational>> {
    let mut stages = vec![dedup(initial)];
    for var in 0..nvars {
        let next = eliminate(stages.last().expect("nonempty"), var);
        stages.push(next);
    }
    if stages[nvars].iter().any(|q| q.rhs.is_positive()) {
        return None;
    }
    let mut z = vec![BigRational::zero(); nvars];
    for var in (0..nvars).rev() {
        let mut lo: Option<BigRational> = None;
        let mut hi: Option<BigRational> = None;
        for q in &stages[var] {
            let c = &q.coef[var];
            if c.is_zero() {
                continue;
            }
            let rest: BigRational = q
                .coef
                .iter()
                .zip(&z)
                .enumerate()
                .filter(|(k, _)| *k != var)
                .map(|(_, (a, b))| a * b)
                .sum();
            let bound = (&q.rhs - rest) / c;
            if c.is_positive() {
                if lo.as_ref().is_none_or(|l| bound > *l) {
                    lo = Some(bound);
                }
            } else if hi.as_ref().is_none_or(|h| bound < *h) {
                hi = Some(bound);
            }
        }
        z[var] = match (lo, hi) {
            (Some(l), Some(h)) => (l + h) / BigRational::from_integer(2.into()),
            (Some(l), None) => l,
            (None, Some(h)) => h,
            (None, None) => BigRational::zero(),
        };
    }
    Some(z)
}

/// A rational point in the intersection of the relative interiors of the cones
/// spanned by `a` and `b`, or `None` when they do not meet.
pub fn interior_witness(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Option<Vec<BigRational>> {
    let n = a.first().or(b.first()).map_or(0, Vec::len);
    let ka = a.len();
    let nv = ka + b.len();
    // Columns: l_1..l_ka, m_1..m_kb.
    let mut eq: Vec<Vec<BigRational>> = (0..n)
        .map(|row| {
            a.iter()
                .map(|g| BigRational::from_integer(g[row].clone()))
                .chain(b.iter().map(|g| BigRational::from_integer(-g[row].clone())))
                .collect()
        })
        .collect();
    let pivots = rref(&mut eq);
    let free: Vec<usize> = (0..nv).filter(|c| !pivots.contains(c)).collect();
    let nf = free.len();
    // Each variable as an affine function of the free variables: here linear.
    let as_free = |var: usize| -> Vec<BigRational> {
        if let Some(k) = free.iter().position(|&f| f == var) {
            (0..nf).map(|j| if j == k { BigRational::one() } else { BigRational::zero() }).collect()
        } else {
            let r = pivots.iter().position(|&p| p == var).expect("pivot");
            free.iter().map(|&f| -eq[r][f].clone()).collect()
        }
    };
    let ineqs: Vec<Ineq> = (0..nv)
        .map(|var| Ineq {
            coef: as_free(var),
            rhs: BigRational::one(),
        })
        .collect();
    let z = solve(ineqs, nf)?;
    let lambdas: Vec<BigRational> = (0..ka)
        .map(|var| as_free(var).iter().zip(&z).map(|(c, x)| c * x).sum())
        .collect();
    Some(
        (0..n)
            .map(|row| {
                a.iter()
                    .zip(&lambdas)
                    .map(|(g, l)| l * BigRational::from_integer(g[row].clone()))
                    .sum()
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn strictly_inside(gens: &[Vec<BigInt>], x: &[BigRational]) -> bool {
        // Square, full-rank generator lists only.
        let m: Vec<Vec<BigInt>> = super::super::matrix::transpose(gens);
        let inv = super::super::matrix::rational_inverse(&m).unwrap();
        inv.iter()
            .all(|row| row.iter().zip(x).map(|(a, b)| a * b).sum::<BigRational>().is_positive())
    }

    #[test]
    fn witnesses() {
        let a = vs(&[&[1, 0], &[0, 1]]);
        let w = interior_witness(&a, &a).unwrap();
        assert!(strictly_inside(&a, &w));

        let b = vs(&[&[0, 1], &[-1, 0]]);
        assert!(interior_witness(&a, &b).is_none());

        let c = vs(&[&[1, 1], &[0, 1]]);
        let w = interior_witness(&a, &c).unwrap();
        assert!(strictly_inside(&a, &w) && strictly_inside(&c, &w));
    }

    #[test]
    fn faces() {
        let a = vs(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let ray = vs(&[&[1, 1, 1]]);
        assert!(interior_witness(&a, &ray).is_some());
        let edge = vs(&[&[1, 0, 0]]);
        assert!(interior_witness(&a, &edge).is_none());
        let face = vs(&[&[1, 0, 0], &[0, 1, 0]]);
        assert!(interior_witness(&face, &vs(&[&[1, 2, 0]])).is_some());
        assert!(interior_witness(&face, &vs(&[&[1, 2, 1]])).is_none());
    }
}

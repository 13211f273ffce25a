//! Small dense exact matrices over the integers and the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

/// Determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: IntMatrix = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Inverse of a square integer matrix over the rationals, `None` if singular.
pub fn rational_inverse(m: &[Vec<BigInt>]) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigRational> = row.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let (pivot_row, row) = if r < col {
                    let (lo, hi) = a.split_at_mut(col);
                    (&hi[0], &mut lo[r])
                } else {
                    let (lo, hi) = a.split_at_mut(r);
                    (&lo[col], &mut hi[0])
                };
                for (x, p) in row.iter_mut().zip(pivot_row.iter()) {
                    if !p.is_zero() {
                        *x -= &f * p;
                    }
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Integer inverse of a unimodular matrix.
pub fn unimodular_inverse(m: &[Vec<BigInt>]) -> Option<IntMatrix> {
    let inv = rational_inverse(m)?;
    inv.into_iter()
        .map(|row| {
            row.into_iter()
                .map(|x| if x.is_integer() { Some(x.to_integer()) } else { None })
                .collect()
        })
        .collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn mat_vec(m: &[Vec<BigInt>], x: &[BigInt]) -> Vec<BigInt> {
    m.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> IntMatrix {
    let bt = transpose(b);
    a.iter()
        .map(|row| bt.iter().map(|col| row.iter().zip(col).map(|(x, y)| x * y).sum()).collect())
        .collect()
}

pub fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(rows: &mut [Vec<BigRational>]) -> Vec<usize> {
    let mut pivots = Vec::new();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    if !p.is_zero() {
                        *x -= &f * p;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rational_rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    rref(&mut rows).len()
}

/// A nonzero primitive integer vector `lambda` with `sum_i lambda_i rows_i = 0`,
/// or `None` when the rows are linearly independent. The first nonzero entry is positive.
pub fn left_kernel_vector(rows: &[Vec<BigRational>]) -> Option<Vec<BigInt>> {
    // Kernel of the transpose.
    let k = rows.len();
    let mut t = transpose(rows);
    if t.is_empty() {
        return if k > 0 { Some(unit_vector(k, 0)) } else { None };
    }
    let pivots = rref(&mut t);
    let free = (0..k).find(|c| !pivots.contains(c))?;
    let mut x = vec![BigRational::zero(); k];
    x[free] = BigRational::one();
    for (row, &pc) in t.iter().zip(&pivots) {
        x[pc] = -row[free].clone();
    }
    Some(primitive_integer(&x))
}

fn unit_vector(n: usize, i: usize) -> Vec<BigInt> {
    (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()
}

/// Scales a nonzero rational vector to a primitive integer vector whose first nonzero entry is positive.
pub fn primitive_integer(x: &[BigRational]) -> Vec<BigInt> {
    let denom = x.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = x.iter().map(|c| c.numer() * (&denom / c.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    let first_neg = ints.iter().find(|v| !v.is_zero()).is_some_and(|v| v.is_negative());
    ints.into_iter()
        .map(|v| {
            let v = if g.is_zero() { v } else { v / &g };
            if first_neg {
                -v
            } else {
                v
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn determinants() {
        assert_eq!(determinant(&identity(4)), BigInt::one());
        assert_eq!(determinant(&m(&[&[1, 1], &[0, 1]])), BigInt::one());
        assert_eq!(determinant(&m(&[&[2, 0], &[0, 1]])), BigInt::from(2));
        assert_eq!(determinant(&m(&[&[0, 1], &[1, 0]])), BigInt::from(-1));
        assert_eq!(determinant(&m(&[&[0, 1, 2], &[1, 0, 3], &[4, -3, 8]])), BigInt::from(-2));
        assert_eq!(determinant(&m(&[&[1, 2], &[2, 4]])), BigInt::zero());
    }

    #[test]
    fn unimodular_inverse_is_integral() {
        let a = m(&[&[2, 1, 0], &[1, 1, 0], &[3, 2, 1]]);
        let inv = unimodular_inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity(3));
        assert!(unimodular_inverse(&m(&[&[2, 0], &[0, 1]])).is_none());
    }

    #[test]
    fn kernel_vector() {
        let q = |x: i64| BigRational::from_integer(x.into());
        let rows = vec![vec![q(0), q(1), q(1)], vec![q(0), q(0), q(1)], vec![q(0), q(1), q(0)]];
        let lam = left_kernel_vector(&rows).unwrap();
        assert_eq!(lam, vec![BigInt::from(1), BigInt::from(-1), BigInt::from(-1)]);
        let indep = vec![vec![q(1), q(0)], vec![q(0), q(1)]];
        assert!(left_kernel_vector(&indep).is_none());
    }
}

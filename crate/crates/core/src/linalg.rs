//! Exact rank and determinant by fraction-free (Bareiss) elimination.
//!
//! Rational rows are scaled to integers first. Elimination runs in `i128`
//! with checked arithmetic and restarts in `BigInt` on overflow.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::Q;

/// Multiplies every row by the lcm of its denominators.
pub fn integer_rows(rows: &[Vec<Q>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|row| {
            let l = row
                .iter()
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter().map(|x| x.numer() * (&l / x.denom())).collect()
        })
        .collect()
}

fn to_i128(m: &[Vec<BigInt>]) -> Option<Vec<Vec<i128>>> {
    m.iter()
        .map(|r| r.iter().map(|x| x.to_i128()).collect::<Option<Vec<_>>>())
        .collect()
}

fn rank_i128(mut a: Vec<Vec<i128>>) -> Option<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut k = 0;
    let mut prev: i128 = 1;
    for c in 0..cols {
        if k == rows {
            break;
        }
        let Some(p) = (k..rows).find(|&r| a[r][c] != 0) else {
            continue;
        };
        a.swap(k, p);
        let piv = a[k][c];
        for i in k + 1..rows {
            let lead = a[i][c];
            for j in c + 1..cols {
                let x = piv.checked_mul(a[i][j])?;
                let y = lead.checked_mul(a[k][j])?;
                a[i][j] = x.checked_sub(y)? / prev;
            }
            a[i][c] = 0;
        }
        prev = piv;
        k += 1;
    }
    Some(k)
}

fn rank_big(mut a: Vec<Vec<BigInt>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut k = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        if k == rows {
            break;
        }
        let Some(p) = (k..rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(k, p);
        let piv = a[k][c].clone();
        for i in k + 1..rows {
            let lead = a[i][c].clone();
            for j in c + 1..cols {
                let v = (&piv * &a[i][j] - &lead * &a[k][j]) / &prev;
                a[i][j] = v;
            }
            a[i][c] = BigInt::zero();
        }
        prev = piv;
        k += 1;
    }
    k
}

pub fn rank_int(m: &[Vec<BigInt>]) -> usize {
    if let Some(small) = to_i128(m) {
        if let Some(r) = rank_i128(small) {
            return r;
        }
    }
    rank_big(m.to_vec())
}

/// Rank of a rational matrix given as rows.
pub fn rank(rows: &[Vec<Q>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    rank_int(&integer_rows(rows))
}

/// Determinant of a square integer matrix.
pub fn det_int(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n), "det of a non-square matrix");
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.to_vec();
    let mut neg = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return BigInt::zero();
        };
        if p != k {
            a.swap(k, p);
            neg = !neg;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[k][k] * &a[i][j] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if neg {
        -d
    } else {
        d
    }
}

pub fn det(m: &[Vec<Q>]) -> Q {
    let n = m.len();
    // row scaling multiplies the determinant; undo it afterwards
    let mut scale = BigInt::one();
    let ints: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            scale *= &l;
            row.iter().map(|x| x.numer() * (&l / x.denom())).collect()
        })
        .collect();
    debug_assert_eq!(ints.len(), n);
    Q::new(det_int(&ints), scale)
}

/// Rank of the differences `p_i - p_0`.
pub fn affine_rank(points: &[&[Q]]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let base = points[0];
    let diffs: Vec<Vec<Q>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    rank(&diffs)
}

pub fn affinely_independent(points: &[&[Q]]) -> bool {
    points.is_empty() || affine_rank(points) == points.len() - 1
}

/// Sign of an integer determinant, used by tests as a cheap cross-check.
pub fn det_sign(m: &[Vec<BigInt>]) -> i8 {
    let d = det_int(m);
    if d.is_zero() {
        0
    } else if d.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use proptest::prelude::*;

    fn bi(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    // cofactor expansion, exponential but obviously right
    fn det_naive(m: &[Vec<BigInt>]) -> BigInt {
        let n = m.len();
        if n == 0 {
            return BigInt::one();
        }
        let mut acc = BigInt::zero();
        for c in 0..n {
            let minor: Vec<Vec<BigInt>> = m[1..]
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != c)
                        .map(|(_, x)| x.clone())
                        .collect()
                })
                .collect();
            let t = &m[0][c] * det_naive(&minor);
            if c % 2 == 0 {
                acc += t;
            } else {
                acc -= t;
            }
        }
        acc
    }

    #[test]
    fn small_determinants() {
        assert_eq!(det_int(&bi(&[&[1, 2], &[3, 4]])), BigInt::from(-2));
        assert_eq!(det_int(&bi(&[&[0, 1], &[1, 0]])), BigInt::from(-1));
        assert_eq!(det_int(&bi(&[&[2, 4], &[1, 2]])), BigInt::zero());
        let m = vec![vec![q(1, 2), qi(0)], vec![qi(0), q(2, 3)]];
        assert_eq!(det(&m), q(1, 3));
    }

    #[test]
    fn rank_examples() {
        let m = vec![
            vec![qi(1), qi(2), qi(3)],
            vec![qi(2), qi(4), qi(6)],
            vec![qi(0), qi(1), q(1, 2)],
        ];
        assert_eq!(rank(&m), 2);
        assert_eq!(rank(&[vec![qi(0), qi(0)]]), 0);
    }

    #[test]
    fn big_entries_fall_back() {
        let x = i64::MAX;
        let m = bi(&[&[x, x - 1, 3], &[x - 2, x, 5], &[1, x, x]]);
        assert_eq!(det_int(&m), det_naive(&m));
        assert_eq!(rank_int(&m), 3);
    }

    #[test]
    fn affine_independence() {
        let a = [qi(0), qi(0)];
        let b = [qi(1), qi(0)];
        let c = [qi(2), qi(0)];
        let d = [qi(0), qi(1)];
        assert!(!affinely_independent(&[&a, &b, &c]));
        assert!(affinely_independent(&[&a, &b, &d]));
    }

    proptest! {
        #[test]
        fn bareiss_matches_cofactor(v in proptest::collection::vec(-50i64..50, 16)) {
            let m: Vec<Vec<BigInt>> = v.chunks(4).map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
            prop_assert_eq!(det_int(&m), det_naive(&m));
            let full = !det_naive(&m).is_zero();
            prop_assert_eq!(rank_int(&m) == 4, full);
        }

        #[test]
        fn rank_is_transpose_invariant(v in proptest::collection::vec(-3i64..3, 12)) {
            let m: Vec<Vec<BigInt>> = v.chunks(4).map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
            let t: Vec<Vec<BigInt>> = (0..4).map(|j| (0..3).map(|i| m[i][j].clone()).collect()).collect();
            prop_assert_eq!(rank_int(&m), rank_int(&t));
        }
    }
}

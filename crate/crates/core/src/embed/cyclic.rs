use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::Q;

/// A vector of `(Q^d)^n`, stored as `n` blocks of length `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicVector {
    pub blocks: Vec<Vec<Q>>,
}

impl CyclicVector {
    pub fn from_flat(v: &[Q], d: usize) -> Result<Self> {
        if d == 0 || !v.len().is_multiple_of(d) {
            return Err(Error::input(format!("length {} is not a multiple of d = {d}", v.len())));
        }
        Ok(CyclicVector { blocks: v.chunks(d).map(|c| c.to_vec()).collect() })
    }

    pub fn flat(&self) -> Vec<Q> {
        self.blocks.iter().flatten().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// Periodic extension to `n1` blocks: block `k` is block `k mod n2`.
pub fn cyclic_repeat(v: &CyclicVector, n1: usize) -> Result<CyclicVector> {
    let n2 = v.len();
    if n2 == 0 || n1 < n2 {
        return Err(Error::input(format!("cannot repeat {n2} blocks into {n1}")));
    }
    Ok(CyclicVector { blocks: (0..n1).map(|k| v.blocks[k % n2].clone()).collect() })
}

/// Rotation by `l` blocks: block `k` becomes block `(k + l) mod n`.
pub fn cyclic_shift(v: &CyclicVector, l: i64) -> CyclicVector {
    let n = v.len() as i64;
    if n == 0 {
        return v.clone();
    }
    CyclicVector {
        blocks: (0..n)
            .map(|k| v.blocks[(k + l).rem_euclid(n) as usize].clone())
            .collect(),
    }
}

/// Whether blocks with congruent indices mod `n` agree, and the largest
/// deviation of a coordinate from its class mean.
pub fn v_subspace_membership(z: &[Q], n: usize, d: usize) -> Result<(bool, Q)> {
    if n == 0 {
        return Err(Error::input("n must be positive"));
    }
    let v = CyclicVector::from_flat(z, d)?;
    let mut sums = vec![vec![Q::zero(); d]; n];
    let mut counts = vec![0usize; n];
    for (k, b) in v.blocks.iter().enumerate() {
        counts[k % n] += 1;
        for c in 0..d {
            sums[k % n][c] += &b[c];
        }
    }
    let mut worst = Q::zero();
    for (k, b) in v.blocks.iter().enumerate() {
        let cnt = Q::from_integer(BigInt::from(counts[k % n]));
        for c in 0..d {
            let mean = &sums[k % n][c] / &cnt;
            let dev = if b[c] > mean { &b[c] - &mean } else { &mean - &b[c] };
            if dev > worst {
                worst = dev;
            }
        }
    }
    Ok((worst.is_zero(), worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn cv(v: &[i64], d: usize) -> CyclicVector {
        CyclicVector::from_flat(&v.iter().map(|&x| qi(x)).collect::<Vec<_>>(), d).unwrap()
    }

    #[test]
    fn repeat_and_shift() {
        let v = cv(&[1, 2], 1);
        assert_eq!(cyclic_repeat(&v, 5).unwrap().flat(), cv(&[1, 2, 1, 2, 1], 1).flat());
        assert!(cyclic_repeat(&v, 1).is_err());
        let w = cv(&[1, 2, 3], 1);
        assert_eq!(cyclic_shift(&w, 1).flat(), cv(&[2, 3, 1], 1).flat());
        assert_eq!(cyclic_shift(&w, -1).flat(), cv(&[3, 1, 2], 1).flat());
    }

    #[test]
    fn membership() {
        let z: Vec<Q> = [1, 2, 1, 2].iter().map(|&x| qi(x)).collect();
        assert_eq!(v_subspace_membership(&z, 2, 1).unwrap(), (true, qi(0)));
        let z: Vec<Q> = [1, 2, 2, 2].iter().map(|&x| qi(x)).collect();
        assert_eq!(v_subspace_membership(&z, 2, 1).unwrap(), (false, q(1, 2)));
        assert!(v_subspace_membership(&z, 2, 3).is_err());
    }
}

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Sparse polynomial with integer coefficients; a monomial is a sorted
/// list of `(variable, exponent)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Vec<(usize, u32)>, BigInt>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: i64) -> Self {
        let mut p = Poly::zero();
        if c != 0 {
            p.terms.insert(Vec::new(), BigInt::from(c));
        }
        p
    }

    pub fn var(i: usize) -> Self {
        let mut p = Poly::zero();
        p.terms.insert(vec![(i, 1)], BigInt::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn add_term(&mut self, m: Vec<(usize, u32)>, c: BigInt) {
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut r = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                r.add_term(mul_mono(ma, mb), ca * cb);
            }
        }
        r
    }

    /// Value at an integer point.
    pub fn eval(&self, t: &[BigInt]) -> BigInt {
        let mut acc = BigInt::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for &(i, e) in m {
                v *= num_traits::pow(t[i].clone(), e as usize);
            }
            acc += v;
        }
        acc
    }
}

fn mul_mono(a: &[(usize, u32)], b: &[(usize, u32)]) -> Vec<(usize, u32)> {
    let mut out: BTreeMap<usize, u32> = a.iter().copied().collect();
    for &(i, e) in b {
        *out.entry(i).or_insert(0) += e;
    }
    out.into_iter().collect()
}

/// Determinant by permutation expansion; fine for the small sizes used.
pub fn det(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut total = Poly::zero();
    permute(&mut idx, 0, &mut |perm, sign| {
        let mut term = Poly::constant(sign);
        for (r, &c) in perm.iter().enumerate() {
            term = term.mul(&m[r][c]);
            if term.is_zero() {
                return;
            }
        }
        total = total.add(&term);
    }, 1);
    total
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize], i64), sign: i64) {
    if k == v.len() {
        f(v, sign);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f, if i == k { sign } else { -sign });
        v.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let x = Poly::var(0);
        let y = Poly::var(1);
        let p = x.add(&y).mul(&x.sub(&y));
        // x^2 - y^2
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.eval(&[BigInt::from(3), BigInt::from(2)]), BigInt::from(5));
        assert!(x.sub(&x).is_zero());
    }

    #[test]
    fn symbolic_det() {
        let x = Poly::var(0);
        let y = Poly::var(1);
        let m = vec![vec![x.clone(), y.clone()], vec![y.clone(), x.clone()]];
        let d = det(&m);
        assert_eq!(d.eval(&[BigInt::from(2), BigInt::from(1)]), BigInt::from(3));
        let m = vec![vec![x.clone(), x.clone()], vec![y.clone(), y.clone()]];
        assert!(det(&m).is_zero());
    }
}

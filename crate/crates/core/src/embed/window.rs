//! Anchor index for the floor/ceil progression lemma.
//!
//! `nvals[k]` holds `n(T^s x)` for `s = k - 3M/2`, so the slice covers
//! `s in [-3M/2, M/2 - 1]` and has length `2M`.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::rational::{ceil_i, floor_i, mod_floor, Q};

fn check_shape(nvals: &[Q], m: usize) -> Result<()> {
    if m == 0 || !m.is_multiple_of(2) {
        return Err(Error::input("M must be a positive even integer"));
    }
    if nvals.len() != 2 * m {
        return Err(Error::input(format!("expected {} values on [-3M/2, M/2-1]", 2 * m)));
    }
    Ok(())
}

fn breaks(nvals: &[Q]) -> Vec<usize> {
    (0..nvals.len() - 1)
        .filter(|&k| nvals[k + 1] != &nvals[k] + Q::one())
        .collect()
}

fn residue(x: &BigInt, m: usize) -> i64 {
    mod_floor(x, &BigInt::from(m)).to_i64().expect("residue below M")
}

/// The three conditions at a candidate `r` (given as an index, not a slot).
pub fn window_conditions(nvals: &[Q], m: usize, r: i64) -> Result<bool> {
    check_shape(nvals, m)?;
    let h = (3 * m / 2) as i64;
    if r < -h || r > 0 {
        return Ok(false);
    }
    let at = |s: i64| &nvals[(s + h) as usize];
    let f0 = residue(&floor_i(at(r)), m);
    let c0 = residue(&ceil_i(at(r)), m);
    if f0 > (m / 2) as i64 {
        return Ok(false);
    }
    for s in r..r + (m / 2) as i64 {
        if residue(&floor_i(at(s)), m) != f0 + s - r || residue(&ceil_i(at(s)), m) != c0 + s - r {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every admissible `r` in `[-3M/2, 0]`, by direct scan.
pub fn window_index_oracle(nvals: &[Q], m: usize) -> Result<Vec<i64>> {
    check_shape(nvals, m)?;
    let h = (3 * m / 2) as i64;
    let mut out = Vec::new();
    for r in -h..=0 {
        if window_conditions(nvals, m, r)? {
            out.push(r);
        }
    }
    Ok(out)
}

/// Takes the longer break-free run `[a, b]` (at least `M` long), a `k` in
/// it with `floor(n_k) = 0 mod M`, and sets `r = k` when `M/2` steps fit
/// after `k`, else `r = k - M/2 - 1`.
pub fn find_window_index(nvals: &[Q], m: usize) -> Result<i64> {
    check_shape(nvals, m)?;
    let br = breaks(nvals);
    if br.len() > 1 {
        return Err(Error::pre(format!("{} breaks, at most one is allowed", br.len())));
    }
    let last = nvals.len() - 1;
    let (a, b) = match br.first() {
        None => (0, last),
        Some(&j) if j + 1 >= last - j => (0, j),
        Some(&j) => (j + 1, last),
    };
    let k = (a..=b)
        .find(|&k| residue(&floor_i(&nvals[k]), m) == 0)
        .ok_or_else(|| Error::Assertion("no multiple of M in a run of length M".into()))?;
    let slot = if b + 1 - k >= m / 2 { k } else { k - m / 2 - 1 };
    let r = slot as i64 - (3 * m / 2) as i64;
    if !window_conditions(nvals, m, r)? {
        return Err(Error::Assertion(format!("constructed r = {r} fails the conditions")));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn arith(m: usize, start: Q) -> Vec<Q> {
        (0..2 * m as i64).map(|i| &start + qi(i)).collect()
    }

    #[test]
    fn arithmetic_sequences() {
        for m in [2usize, 4, 8] {
            for start in [qi(0), q(1, 3), qi(-5), q(7, 2)] {
                let v = arith(m, start);
                let r = find_window_index(&v, m).unwrap();
                assert!(window_conditions(&v, m, r).unwrap());
                assert!(window_index_oracle(&v, m).unwrap().contains(&r));
            }
        }
    }

    #[test]
    fn breaks_left_and_two() {
        let m = 4;
        let mut v = arith(m, q(1, 2));
        v[0] = qi(100);
        let r = find_window_index(&v, m).unwrap();
        assert!(window_conditions(&v, m, r).unwrap());
        v[5] = qi(-40);
        assert!(matches!(find_window_index(&v, m), Err(Error::Precondition(_))));
    }

    #[test]
    fn second_case_used() {
        // run of slots 0..=9 holds -7..=2: the only zero is at slot 7, 3 steps short
        let m = 8;
        let mut v: Vec<Q> = (0..10).map(|i| qi(i - 7)).collect();
        v.extend((0..6).map(|i| qi(101 + i)));
        let r = find_window_index(&v, m).unwrap();
        assert_eq!(r, 2 - 12);
    }
}

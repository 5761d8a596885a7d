//! Exact feasibility of `A x = b, x >= 0` by a phase-one simplex with
//! Bland's rule, over rationals.

use num_traits::{Signed, Zero};

use crate::rational::Q;

pub fn feasible(a: &[Vec<Q>], b: &[Q]) -> bool {
    let m = a.len();
    if m == 0 {
        return true;
    }
    let n = a[0].len();
    // tableau columns: n originals, m artificials, then rhs
    let width = n + m + 1;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row = vec![Q::zero(); width];
        for j in 0..n {
            row[j] = if flip { -a[i][j].clone() } else { a[i][j].clone() };
        }
        row[n + i] = Q::from_integer(1.into());
        row[width - 1] = if flip { -b[i].clone() } else { b[i].clone() };
        t.push(row);
    }
    // objective: minimise the sum of artificials, written as reduced costs
    let mut obj = vec![Q::zero(); width];
    for row in &t {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[width - 1] -= &row[width - 1];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    loop {
        let Some(enter) = (0..n + m).find(|&j| obj[j].is_negative()) else { break };
        let mut leave: Option<(usize, Q)> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // the phase-one objective is bounded below by zero
        let (r, _) = leave.expect("phase one cannot be unbounded");
        let piv = t[r][enter].clone();
        for x in t[r].iter_mut() {
            *x /= &piv;
        }
        let prow = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && !row[enter].is_zero() {
                let f = row[enter].clone();
                for j in 0..width {
                    row[j] -= &f * &prow[j];
                }
            }
        }
        if !obj[enter].is_zero() {
            let f = obj[enter].clone();
            for j in 0..width {
                obj[j] -= &f * &prow[j];
            }
        }
        basis[r] = enter;
    }
    obj[width - 1].is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn simple_systems() {
        // x + y = 1, x - y = 0
        let a = vec![vec![qi(1), qi(1)], vec![qi(1), qi(-1)]];
        assert!(feasible(&a, &[qi(1), qi(0)]));
        // x + y = -1 has no nonnegative solution
        assert!(!feasible(&[vec![qi(1), qi(1)]], &[qi(-1)]));
        // x - y = 1/2, x + y = 1/4 needs y < 0
        let a = vec![vec![qi(1), qi(-1)], vec![qi(1), qi(1)]];
        assert!(!feasible(&a, &[q(1, 2), q(-1, 4)]));
        assert!(feasible(&a, &[q(1, 4), q(1, 2)]));
    }
}

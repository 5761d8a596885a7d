//! Matrices whose entries are drawn from a few shared random values.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::poly::{det as poly_det, Poly};
use crate::error::{Error, Result};
use crate::linalg::{det_int, rank_int};

/// Entry `(i, j)` names which random value `t_s` goes there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternMatrix {
    rows: Vec<Vec<usize>>,
}

impl PatternMatrix {
    pub fn new(rows: Vec<Vec<usize>>) -> Result<Self> {
        let w = rows.first().map_or(0, |r| r.len());
        if rows.is_empty() || w == 0 || rows.iter().any(|r| r.len() != w) {
            return Err(Error::input("pattern must be a non-empty rectangle"));
        }
        if rows.iter().flatten().any(|&s| s == 0) {
            return Err(Error::input("symbols are numbered from 1"));
        }
        Ok(PatternMatrix { rows })
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn height(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.rows[0].len()
    }

    pub fn symbols(&self) -> usize {
        self.rows.iter().flatten().copied().max().unwrap_or(0)
    }

    fn no_repeats(&self) -> Result<()> {
        for (i, r) in self.rows.iter().enumerate() {
            for j in 0..r.len() {
                if r[..j].contains(&r[j]) {
                    return Err(Error::pre(format!("symbol {} repeats in row {i}", r[j])));
                }
            }
        }
        for j in 0..self.width() {
            for i in 0..self.height() {
                if (0..i).any(|k| self.rows[k][j] == self.rows[i][j]) {
                    return Err(Error::pre(format!("symbol {} repeats in column {j}", self.rows[i][j])));
                }
            }
        }
        Ok(())
    }

    pub fn check_square(&self) -> Result<()> {
        if self.height() != self.width() {
            return Err(Error::pre("pattern is not square"));
        }
        self.no_repeats()
    }

    pub fn check_affine(&self) -> Result<usize> {
        let h = self.height();
        if self.width() != h + 1 || h.is_multiple_of(2) {
            return Err(Error::pre("affine pattern must have shape (2k-1) x 2k"));
        }
        self.no_repeats()?;
        let mut count: HashMap<usize, usize> = HashMap::new();
        for &s in self.rows.iter().flatten() {
            *count.entry(s).or_default() += 1;
        }
        if let Some((s, _)) = count.iter().find(|(_, &c)| c > 2) {
            return Err(Error::pre(format!("symbol {s} appears more than twice")));
        }
        Ok(self.width() / 2)
    }

    pub fn instantiate(&self, t: &[BigInt]) -> Vec<Vec<BigInt>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&s| t[s - 1].clone()).collect())
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!(self.rows)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let rows = v
            .as_array()
            .ok_or_else(|| Error::input("pattern must be an array of rows"))?
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Error::input("pattern row must be an array"))?
                    .iter()
                    .map(|x| {
                        x.as_u64()
                            .map(|x| x as usize)
                            .ok_or_else(|| Error::input("pattern symbols are positive integers"))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        PatternMatrix::new(rows)
    }
}

/// How the values `t_1, ..., t_r` are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    /// Independent and uniform in `1..=10^6`.
    Uniform,
    /// One uniform value repeated; a deliberately degenerate choice.
    AllEqual,
}

impl Sampler {
    fn draw(&self, rng: &mut ChaCha8Rng, r: usize) -> Vec<BigInt> {
        match self {
            Sampler::Uniform => (0..r).map(|_| BigInt::from(rng.gen_range(1..=1_000_000u32))).collect(),
            Sampler::AllEqual => {
                let v = BigInt::from(rng.gen_range(1..=1_000_000u32));
                vec![v; r]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternReport {
    pub trials: usize,
    pub degenerate: usize,
}

impl PatternReport {
    pub fn to_json(&self) -> Value {
        json!({"trials": self.trials, "degenerate": self.degenerate})
    }
}

/// Samples the values and counts singular instances.
pub fn pattern_generic_invertibility(m: &PatternMatrix, trials: usize, seed: u64) -> Result<PatternReport> {
    pattern_generic_invertibility_with(m, trials, seed, Sampler::Uniform)
}

pub fn pattern_generic_invertibility_with(
    m: &PatternMatrix,
    trials: usize,
    seed: u64,
    sampler: Sampler,
) -> Result<PatternReport> {
    m.check_square()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degenerate = 0;
    for _ in 0..trials {
        let t = sampler.draw(&mut rng, m.symbols());
        if det_int(&m.instantiate(&t)).is_zero() {
            degenerate += 1;
        }
    }
    Ok(PatternReport { trials, degenerate })
}

fn column_differences(a: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let w = a[0].len();
    // rows of the result are the vectors c_j - c_0, j >= 1
    (1..w)
        .map(|j| a.iter().map(|row| &row[j] - &row[0]).collect())
        .collect()
}

/// Samples the values and counts instances whose columns are affinely
/// dependent.
pub fn pattern_generic_affine(m: &PatternMatrix, trials: usize, seed: u64, sampler: Sampler) -> Result<PatternReport> {
    m.check_affine()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let need = m.height();
    let mut degenerate = 0;
    for _ in 0..trials {
        let t = sampler.draw(&mut rng, m.symbols());
        if rank_int(&column_differences(&m.instantiate(&t))) < need {
            degenerate += 1;
        }
    }
    Ok(PatternReport { trials, degenerate })
}

fn symbolic(m: &PatternMatrix) -> Vec<Vec<Poly>> {
    m.rows
        .iter()
        .map(|r| r.iter().map(|&s| Poly::var(s - 1)).collect())
        .collect()
}

/// The determinant as a polynomial in the symbols is not identically zero.
pub fn symbolic_det_nonvanishing(m: &PatternMatrix) -> Result<bool> {
    m.check_square()?;
    if m.height() > 6 {
        return Err(Error::budget("symbolic expansion is limited to size 6"));
    }
    Ok(!poly_det(&symbolic(m)).is_zero())
}

/// Symbolic version of the affine check: the matrix of column differences
/// has a non-zero polynomial determinant.
pub fn symbolic_affine_nonvanishing(m: &PatternMatrix) -> Result<bool> {
    m.check_affine()?;
    if m.height() > 5 {
        return Err(Error::budget("symbolic expansion is limited to 5 rows"));
    }
    let a = symbolic(m);
    let w = m.width();
    let d: Vec<Vec<Poly>> = (1..w)
        .map(|j| a.iter().map(|row| row[j].sub(&row[0])).collect())
        .collect();
    Ok(!poly_det(&d).is_zero())
}

fn fill<R: Rng + ?Sized>(rng: &mut R, h: usize, w: usize, r: usize, max_uses: usize) -> Option<Vec<Vec<usize>>> {
    let mut rows = vec![vec![0usize; w]; h];
    let mut uses = vec![0usize; r + 1];
    for i in 0..h {
        for j in 0..w {
            let ok: Vec<usize> = (1..=r)
                .filter(|&s| uses[s] < max_uses && !rows[i][..j].contains(&s) && !(0..i).any(|k| rows[k][j] == s))
                .collect();
            if ok.is_empty() {
                return None;
            }
            let s = ok[rng.gen_range(0..ok.len())];
            rows[i][j] = s;
            uses[s] += 1;
        }
    }
    Some(rows)
}

/// Random `n x n` pattern without repeats in rows or columns.
pub fn random_square_pattern<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PatternMatrix {
    for _ in 0..64 {
        let r = rng.gen_range(n..=2 * n + 1);
        if let Some(rows) = fill(rng, n, n, r, usize::MAX) {
            return PatternMatrix::new(rows).expect("filled");
        }
    }
    // 2n - 1 symbols always leave a free choice
    let rows = fill(rng, n, n, 2 * n - 1, usize::MAX).expect("enough symbols");
    PatternMatrix::new(rows).expect("filled")
}

/// Random `(2k-1) x 2k` pattern, each symbol used at most twice.
pub fn random_affine_pattern<R: Rng + ?Sized>(rng: &mut R, k: usize) -> PatternMatrix {
    let (h, w) = (2 * k - 1, 2 * k);
    for _ in 0..64 {
        let r = h * w / 2 + rng.gen_range(0..=k);
        if let Some(rows) = fill(rng, h, w, r, 2) {
            return PatternMatrix::new(rows).expect("filled");
        }
    }
    let rows = fill(rng, h, w, h * w, 1).expect("all symbols distinct");
    PatternMatrix::new(rows).expect("filled")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_row_symbol_rejected() {
        let m = PatternMatrix::new(vec![vec![1, 1], vec![2, 3]]).unwrap();
        assert!(pattern_generic_invertibility(&m, 10, 0).is_err());
    }

    #[test]
    fn latin_square_is_generic() {
        let m = PatternMatrix::new(vec![vec![1, 2], vec![2, 1]]).unwrap();
        let r = pattern_generic_invertibility(&m, 200, 3).unwrap();
        assert_eq!(r.degenerate, 0);
        assert!(symbolic_det_nonvanishing(&m).unwrap());
        // equal values make it singular
        let r = pattern_generic_invertibility_with(&m, 20, 3, Sampler::AllEqual).unwrap();
        assert_eq!(r.degenerate, 20);
    }

    #[test]
    fn affine_pattern() {
        let m = PatternMatrix::new(vec![vec![1, 2, 3, 4], vec![2, 1, 4, 5], vec![6, 3, 5, 1]]);
        // symbol 1 three times
        assert!(m.unwrap().check_affine().is_err());
        let m = PatternMatrix::new(vec![vec![1, 2, 3, 4], vec![2, 1, 4, 5], vec![6, 3, 5, 7]]).unwrap();
        assert_eq!(m.check_affine().unwrap(), 2);
        assert_eq!(pattern_generic_affine(&m, 100, 1, Sampler::Uniform).unwrap().degenerate, 0);
        assert_eq!(pattern_generic_affine(&m, 10, 1, Sampler::AllEqual).unwrap().degenerate, 10);
        assert!(symbolic_affine_nonvanishing(&m).unwrap());
    }

    #[test]
    fn random_patterns_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 1..=6 {
            random_square_pattern(&mut rng, n).check_square().unwrap();
        }
        for k in 1..=3 {
            random_affine_pattern(&mut rng, k).check_affine().unwrap();
        }
    }
}

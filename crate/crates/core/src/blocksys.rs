//! Staged block subshifts `X_n` of `[0,1]^Z` with prescribed mean
//! dimension, over an `m`-symbol discretization of `[0,1]`.
//!
//! Stage `n` is a block pattern `B_n` of length `q_n`; each cell is free or
//! fixed. `X_n` is the set of concatenations of `B_n`-blocks aligned at
//! multiples of `q_n`. Stage `n+1` repeats `B_n` `q_{n+1}/q_n` times and
//! overwrites the last `2L_{n+1}` cells with a word `y` of `X_n` that
//! contains every `(2r_{n+1}+1)`-word of `X_n`.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{pow2_neg, q_from_json, q_to_json, Q};

/// Cap on pattern and word lengths.
pub const CELL_LIMIT: usize = 1 << 26;
/// Cap on enumerated window fillings per stage.
pub const VOCAB_LIMIT: u64 = 1 << 22;
/// Stand-in `a` once the expansion of `1/r` is exact.
pub const DEFAULT_SENTINEL: u64 = 1_000_000;

const DIGITS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyz";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Free,
    Fixed(u8),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPattern {
    cells: Vec<Cell>,
    alphabet: usize,
}

impl BlockPattern {
    pub fn new(cells: Vec<Cell>, alphabet: usize) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::input("a block pattern needs at least one cell"));
        }
        check_alphabet(alphabet)?;
        if cells.iter().any(|c| matches!(c, Cell::Fixed(s) if *s as usize >= alphabet)) {
            return Err(Error::input("fixed symbol outside the alphabet"));
        }
        Ok(BlockPattern { cells, alphabet })
    }

    pub fn free(q: usize, alphabet: usize) -> Result<Self> {
        Self::new(vec![Cell::Free; q], alphabet)
    }

    pub fn q(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Number of free cells, the dimension of `B_n` in the continuum model.
    pub fn dim(&self) -> usize {
        self.cells.iter().filter(|c| **c == Cell::Free).count()
    }

    pub fn matches(&self, word: &[u8]) -> bool {
        word.len() == self.q()
            && self
                .cells
                .iter()
                .zip(word)
                .all(|(c, s)| match c {
                    Cell::Free => true,
                    Cell::Fixed(f) => f == s,
                })
    }

    /// `*` for free cells, base-36 digits for fixed ones.
    pub fn encode(&self) -> String {
        self.cells
            .iter()
            .map(|c| match c {
                Cell::Free => '*',
                Cell::Fixed(s) => DIGITS[*s as usize] as char,
            })
            .collect()
    }
}

fn check_alphabet(m: usize) -> Result<()> {
    if m == 0 || m > DIGITS.len() {
        return Err(Error::input(format!("alphabet resolution must be in 1..={}", DIGITS.len())));
    }
    Ok(())
}

pub fn encode_word(w: &[u8]) -> String {
    w.iter().map(|&s| DIGITS[s as usize] as char).collect()
}

pub fn decode_word(s: &str, alphabet: usize) -> Result<Vec<u8>> {
    s.bytes()
        .map(|b| match DIGITS.iter().position(|&d| d == b) {
            Some(i) if i < alphabet => Ok(i as u8),
            _ => Err(Error::input(format!("symbol {:?} outside the alphabet", b as char))),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageParams {
    pub n: usize,
    pub q: usize,
    pub l: usize,
    /// Agreement radius `r_n = n + 1` used when `y` was built.
    pub r_window: usize,
    pub a: u64,
    pub y_word: Vec<u8>,
    pub pattern: BlockPattern,
}

/// Greedy expansion `1/r = prod (1 + 1/a_k)`, stopping early once exact.
/// Returns the `a_k` and the residual `1/r / prod`.
pub fn choose_a_sequence(r: &Q, stages: usize) -> Result<(Vec<u64>, Q)> {
    if *r <= Q::zero() || *r >= Q::one() {
        return Err(Error::input(format!("target r = {r} must lie in (0,1)")));
    }
    let mut rho = Q::one() / r;
    let mut a = Vec::new();
    while a.len() < stages && !rho.is_one() {
        let gap = Q::one() / (&rho - Q::one());
        let ak = gap.ceil().to_integer();
        let ak: u64 = u64::try_from(ak).map_err(|_| Error::Overflow("a_k does not fit in 64 bits".into()))?;
        rho /= Q::one() + Q::new(1.into(), ak.into());
        a.push(ak);
    }
    Ok((a, rho))
}

pub fn product_ratio(a: &[u64]) -> Q {
    a.iter().map(|&x| Q::new(x.into(), (x + 1).into())).product()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSystem {
    target_r: Q,
    alphabet: usize,
    a_seq: Vec<u64>,
    residual: Q,
    sentinel: u64,
    stages: Vec<StageParams>,
}

impl BlockSystem {
    /// Stage 0 only: `q_0 = 1`, one free cell.
    pub fn new(target_r: Q, alphabet: usize, max_stages: usize) -> Result<Self> {
        check_alphabet(alphabet)?;
        let (a_seq, residual) = choose_a_sequence(&target_r, max_stages)?;
        let stage0 = StageParams {
            n: 0,
            q: 1,
            l: 0,
            r_window: 0,
            a: 0,
            y_word: Vec::new(),
            pattern: BlockPattern::free(1, alphabet)?,
        };
        Ok(BlockSystem { target_r, alphabet, a_seq, residual, sentinel: DEFAULT_SENTINEL, stages: vec![stage0] })
    }

    /// Builds stages `1..=stages`, stopping once the expansion of `1/r` is
    /// exact.
    pub fn build(target_r: Q, stages: usize, alphabet: usize) -> Result<Self> {
        let mut sys = Self::new(target_r, alphabet, stages)?;
        while sys.stages.len() <= sys.a_seq.len() {
            sys.advance_stage(false)?;
        }
        Ok(sys)
    }

    pub fn with_sentinel(mut self, sentinel: u64) -> Self {
        self.sentinel = sentinel.max(1);
        self
    }

    pub fn target_r(&self) -> &Q {
        &self.target_r
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn a_sequence(&self) -> &[u64] {
        &self.a_seq
    }

    pub fn residual(&self) -> &Q {
        &self.residual
    }

    pub fn exact(&self) -> bool {
        self.residual.is_one()
    }

    pub fn stages(&self) -> &[StageParams] {
        &self.stages
    }

    /// Index of the last built stage.
    pub fn depth(&self) -> usize {
        self.stages.len().saturating_sub(1)
    }

    pub fn stage(&self, n: usize) -> Result<&StageParams> {
        self.stages
            .get(n)
            .ok_or_else(|| Error::pre(format!("stage {n} is not built (depth {})", self.depth())))
    }

    /// Builds the next stage. Once the `a`-sequence is used up, the
    /// sentinel is used if `allow_sentinel`, otherwise this is an error.
    pub fn advance_stage(&mut self, allow_sentinel: bool) -> Result<&StageParams> {
        let prev = self
            .stages
            .last()
            .ok_or_else(|| Error::pre("stage 0 is not initialized"))?
            .clone();
        let n1 = prev.n + 1;
        let a = match self.a_seq.get(prev.n) {
            Some(&a) => a,
            None if allow_sentinel => self.sentinel,
            None => return Err(Error::pre("the a-sequence is exhausted")),
        };
        let r = n1 + 1;
        let y = enumeration_word(&prev.pattern, 2 * r + 1)?;
        let q = prev.q;
        let mut l = r.div_ceil(q).max(1) * q;
        while 2 * l < y.len() {
            l += q;
        }
        let mut y = y;
        while y.len() < 2 * l {
            y.extend(prev.pattern.cells.iter().map(|c| match c {
                Cell::Free => 0,
                Cell::Fixed(s) => *s,
            }));
        }
        let big_q = (a as u128 + 1) * 2 * l as u128;
        if big_q > CELL_LIMIT as u128 {
            return Err(Error::budget(format!("q_{n1} = {big_q} exceeds the cell budget")));
        }
        let big_q = big_q as usize;
        let mut cells: Vec<Cell> = prev.pattern.cells.iter().copied().cycle().take(big_q).collect();
        for (c, &s) in cells[big_q - 2 * l..].iter_mut().zip(&y) {
            *c = Cell::Fixed(s);
        }
        let pattern = BlockPattern::new(cells, self.alphabet)?;
        self.stages.push(StageParams { n: n1, q: big_q, l, r_window: r, a, y_word: y, pattern });
        Ok(self.stages.last().expect("just pushed"))
    }

    /// `dim(B_n) / q_n`.
    pub fn free_dim_ratio(&self, n: usize) -> Result<Q> {
        let s = self.stage(n)?;
        Ok(Q::new(s.pattern.dim().into(), s.q.into()))
    }

    /// `prod_{i<=n} a_i/(a_i+1)` over the stage parameters.
    pub fn product_formula(&self, n: usize) -> Result<Q> {
        self.stage(n)?;
        Ok(product_ratio(&self.stages[1..=n].iter().map(|s| s.a).collect::<Vec<_>>()))
    }

    /// `I_n = intersection of R_i, i = 1..=n`, with
    /// `R_i = {j : j mod q_i < q_i - 2L_i}`.
    pub fn index_set(&self, n: usize) -> Result<CongruenceIndexSet> {
        self.stage(n)?;
        CongruenceIndexSet::new(self.stages[1..=n].iter().map(|s| (s.q as u64, (s.q - 2 * s.l - 1) as u64)).collect())
    }

    /// `d * prod a_k/(a_k+1)` over built stages, with `d = 1`.
    pub fn lower_bound_mdim(&self) -> Q {
        product_ratio(&self.stages.iter().skip(1).map(|s| s.a).collect::<Vec<_>>())
    }

    /// `1/k + (k-1)/k * dim(B_n)/q_n`.
    pub fn upper_bound_mdim(&self, n: usize, k: u64) -> Result<Q> {
        if k == 0 {
            return Err(Error::input("k must be at least 1"));
        }
        let f = self.free_dim_ratio(n)?;
        let k = Q::from_integer(k.into());
        Ok(Q::one() / &k + (&k - Q::one()) / &k * f)
    }

    /// Both bounds times `m`; the upper one is taken at its limit in `k`.
    pub fn power_bound_scaling(&self, m: u64) -> Result<(Q, Q)> {
        if m == 0 {
            return Err(Error::input("m must be at least 1"));
        }
        let m = Q::from_integer(m.into());
        Ok((&m * self.lower_bound_mdim(), m * self.free_dim_ratio(self.depth())?))
    }

    pub fn phi_membership(&self, word: &[u8], n: usize) -> Result<bool> {
        let s = self.stage(n)?;
        if !word.len().is_multiple_of(s.q) {
            return Err(Error::input(format!("word length {} is not a multiple of q_{n} = {}", word.len(), s.q)));
        }
        Ok(word.chunks(s.q).all(|c| s.pattern.matches(c)))
    }

    /// Aligned window of `X_n` with uniformly random free cells.
    pub fn sample_config(&self, n: usize, len: usize, seed: u64) -> Result<Vec<u8>> {
        let s = self.stage(n)?;
        if len > CELL_LIMIT {
            return Err(Error::budget("window exceeds the cell budget"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..len)
            .map(|i| match s.pattern.cells[i % s.q] {
                Cell::Free => rng.gen_range(0..self.alphabet) as u8,
                Cell::Fixed(f) => f,
            })
            .collect())
    }

    /// Samples pairs `x'`, `x` of `X_{n+1}` and looks for `k` with
    /// `|k| <= L_{n+1} - r_{n+1}` and `d(x', sigma^k x) <= 2^-n`, shifting
    /// around the copy of `y` in the middle block of `x`.
    pub fn minimality_probe(&self, n: usize, trials: usize, seed: u64) -> Result<ProbeReport> {
        let next = self.stage(n + 1)?;
        let len = 3 * next.q;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = next.r_window + 2;
        let mut report = ProbeReport {
            stage: n + 1,
            trials,
            successes: 0,
            worst_distance: Q::zero(),
            tolerance: pow2_neg(n as u32),
            radius: next.r_window,
            truncation: w,
        };
        // Only the cells the probe reads are drawn: 2w+1 around c in x',
        // and the shift range around the middle y copy in x.
        let span = next.l - next.r_window;
        let centre = 2 * next.q - next.l;
        let lo = centre - span - w;
        for _ in 0..trials {
            let c = rng.gen_range(w..len - w);
            let xp = self.fill(next, c - w, 2 * w + 1, &mut rng);
            let x = self.fill(next, lo, 2 * (span + w) + 1, &mut rng);
            if let Some((_, d)) = self.match_near(next, &xp, &x, centre - lo) {
                if d <= report.tolerance {
                    report.successes += 1;
                }
                if d > report.worst_distance {
                    report.worst_distance = d;
                }
            }
        }
        Ok(report)
    }

    /// Cells `start..start+len` of a random point of `X` at stage `s`,
    /// aligned so that position 0 starts a block.
    fn fill(&self, s: &StageParams, start: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
        (start..start + len)
            .map(|i| match s.pattern.cells[i % s.q] {
                Cell::Free => rng.gen_range(0..self.alphabet) as u8,
                Cell::Fixed(f) => f,
            })
            .collect()
    }

    /// One probe: `x'` centred at `c` against `x`, which must be an aligned
    /// word of `X_{n+1}` of at least two blocks. Returns the `k` of least
    /// `|k|` whose `r`-window agrees and the exact truncated distance plus tail.
    pub fn probe_pair(&self, n: usize, xp: &[u8], c: usize, x: &[u8]) -> Result<Option<(i64, Q)>> {
        let next = self.stage(n + 1)?;
        let w = next.r_window + 2;
        if 2 * w + 1 > xp.len() || c < w || c + w >= xp.len() {
            return Err(Error::input("window too short to evaluate the metric to the required precision"));
        }
        if x.len() < 2 * next.q || !self.phi_membership(&x[..x.len() / next.q * next.q], n + 1)? {
            return Err(Error::input(format!("x is not in X_{}", n + 1)));
        }
        // y copy at the end of the block that ends at q, or 2q when it fits
        let block_end = if x.len() >= 3 * next.q { 2 * next.q } else { next.q };
        Ok(self.match_near(next, &xp[c - w..=c + w], x, block_end - next.l))
    }

    /// `xp` has length `2w+1` with its centre at `w`; shifts of `x` around
    /// `centre` are tried in order of increasing `|k|`.
    fn match_near(&self, next: &StageParams, xp: &[u8], x: &[u8], centre: usize) -> Option<(i64, Q)> {
        let r = next.r_window;
        let w = r + 2;
        let span = (next.l - r) as i64;
        let scale = if self.alphabet > 1 { Q::new(1.into(), ((self.alphabet - 1) as i64).into()) } else { Q::zero() };
        for k in (0..=2 * span).map(|j| if j % 2 == 0 { -j / 2 } else { (j + 1) / 2 }) {
            let p = centre as i64 + k;
            if p < w as i64 || p as usize + w >= x.len() {
                continue;
            }
            let p = p as usize;
            if (0..=2 * r).all(|i| xp[w + i - r] == x[p + i - r]) {
                let mut d = Q::zero();
                for i in 0..=2 * w {
                    let diff = (xp[i] as i64 - x[p + i - w] as i64).abs();
                    if diff != 0 {
                        let off = (i as i64 - w as i64).unsigned_abs() as u32;
                        d += pow2_neg(off) * Q::from_integer(diff.into()) * &scale;
                    }
                }
                d += pow2_neg(w as u32 - 1);
                return Some((k, d));
            }
        }
        None
    }

    /// Stage parameters, formulas and bounds; patterns are left out since
    /// they follow from the `y` words.
    pub fn to_json(&self) -> Value {
        let stages: Vec<Value> = self
            .stages
            .iter()
            .map(|s| {
                json!({
                    "n": s.n,
                    "q": s.q,
                    "L": s.l,
                    "r_window": s.r_window,
                    "a": s.a,
                    "free_cells": s.pattern.dim(),
                    "free_dim_ratio": q_to_json(&Q::new(s.pattern.dim().into(), s.q.into())),
                    "y_word": encode_word(&s.y_word),
                })
            })
            .collect();
        let depth = self.depth();
        json!({
            "target_r": q_to_json(&self.target_r),
            "alphabet": self.alphabet,
            "a": self.a_seq,
            "residual": q_to_json(&self.residual),
            "exact": self.exact(),
            "sentinel": self.sentinel,
            "stage0": "q_0 = 1 with one free cell",
            "stages": stages,
            "lower_bound": q_to_json(&self.lower_bound_mdim()),
            "upper_bound_limit": q_to_json(&self.free_dim_ratio(depth).expect("depth is built")),
        })
    }

    /// Rebuilds patterns from the stored `y` words and re-checks every
    /// recurrence.
    pub fn from_json(v: &Value) -> Result<Self> {
        let target_r = q_from_json(v.get("target_r").ok_or_else(|| Error::input("missing \"target_r\""))?)?;
        let alphabet = v
            .get("alphabet")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::input("missing \"alphabet\""))? as usize;
        let stages = v
            .get("stages")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::input("missing \"stages\""))?;
        let a_len = v.get("a").and_then(Value::as_array).map_or(stages.len().saturating_sub(1), |a| a.len());
        let mut sys = Self::new(target_r, alphabet, a_len)?;
        if let Some(s) = v.get("sentinel").and_then(Value::as_u64) {
            sys.sentinel = s.max(1);
        }
        if stages.is_empty() {
            return Err(Error::input("no stages"));
        }
        for (i, sv) in stages.iter().enumerate().skip(1) {
            let field = |k: &str| {
                sv.get(k)
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::input(format!("stage {i}: missing {k:?}")))
            };
            let y = decode_word(
                sv.get("y_word").and_then(Value::as_str).ok_or_else(|| Error::input("missing \"y_word\""))?,
                alphabet,
            )?;
            let a = field("a")?;
            let allow = a == sys.sentinel && sys.a_seq.get(i - 1).is_none();
            let built = sys.advance_stage(allow)?.clone();
            if built.a != a || built.q as u64 != field("q")? || built.l as u64 != field("L")? || built.y_word != y {
                return Err(Error::input(format!("stage {i} does not match its reconstruction")));
            }
        }
        Ok(sys)
    }
}

/// A word of `X_n` (a concatenation of `pattern` blocks) in which every
/// `w`-word of `X_n` occurs. Targets uncovered words one at a time and
/// fills the remaining free cells greedily with symbols that complete a
/// new word.
fn enumeration_word(pattern: &BlockPattern, w: usize) -> Result<Vec<u8>> {
    let m = pattern.alphabet as u64;
    let q = pattern.q();
    m.checked_pow(w as u32).ok_or_else(|| Error::budget("window words do not fit in 64 bits"))?;
    let code = |ws: &[u8]| ws.iter().fold(0u64, |acc, &s| acc * m + s as u64);
    // one representative offset per distinct window signature
    let mut sigs: HashSet<Vec<Cell>> = HashSet::new();
    let mut vocab: HashMap<u64, usize> = HashMap::new();
    let mut work = 0u64;
    for o in 0..q {
        let sig: Vec<Cell> = (0..w).map(|i| pattern.cells[(o + i) % q]).collect();
        if !sigs.insert(sig.clone()) {
            continue;
        }
        let free: Vec<usize> = (0..w).filter(|&i| sig[i] == Cell::Free).collect();
        let count = m.checked_pow(free.len() as u32).unwrap_or(u64::MAX);
        work = work.saturating_add(count);
        if work > VOCAB_LIMIT {
            return Err(Error::budget(format!(
                "alphabet resolution {m} needs more than {VOCAB_LIMIT} window fillings at width {w}"
            )));
        }
        let mut word: Vec<u8> = sig
            .iter()
            .map(|c| match c {
                Cell::Fixed(s) => *s,
                Cell::Free => 0,
            })
            .collect();
        for mut idx in 0..count {
            for &f in free.iter().rev() {
                word[f] = (idx % m) as u8;
                idx /= m;
            }
            vocab.entry(code(&word)).or_insert(o);
        }
    }
    let mut uncovered: BTreeSet<u64> = vocab.keys().copied().collect();
    let mut y: Vec<Option<u8>> = Vec::new();
    let template: Vec<Option<u8>> = pattern
        .cells
        .iter()
        .map(|c| match c {
            Cell::Fixed(s) => Some(*s),
            Cell::Free => None,
        })
        .collect();
    let mut out: Vec<u8> = Vec::new();
    while let Some(&target) = uncovered.first() {
        let o = vocab[&target];
        let base = y.len();
        let blocks = (o + w).div_ceil(q);
        if base + blocks * q > CELL_LIMIT {
            return Err(Error::budget("enumeration word exceeds the cell budget"));
        }
        for _ in 0..blocks {
            y.extend_from_slice(&template);
        }
        let mut t = target;
        for i in (0..w).rev() {
            let s = (t % m) as u8;
            t /= m;
            debug_assert!(y[base + o + i].is_none_or(|f| f == s));
            y[base + o + i] = Some(s);
        }
        for p in base..y.len() {
            if y[p].is_none() {
                let mut pick = 0u8;
                if p + 1 >= w {
                    for s in (0..m as u8).rev() {
                        out.truncate(p);
                        out.push(s);
                        if uncovered.contains(&code(&out[p + 1 - w..])) {
                            pick = s;
                            break;
                        }
                    }
                }
                y[p] = Some(pick);
            }
            out.truncate(p);
            out.push(y[p].expect("assigned"));
            if p + 1 >= w {
                uncovered.remove(&code(&out[p + 1 - w..]));
            }
        }
    }
    Ok(out)
}

/// Integers whose residue mod each `q_i` lies in `[0, hi_i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongruenceIndexSet {
    constraints: Vec<(u64, u64)>,
}

impl CongruenceIndexSet {
    pub fn new(constraints: Vec<(u64, u64)>) -> Result<Self> {
        for (i, &(q, hi)) in constraints.iter().enumerate() {
            if q == 0 || hi >= q {
                return Err(Error::input(format!("constraint {i}: need 0 <= hi < q")));
            }
            if i > 0 && constraints[i - 1].0 >= q {
                return Err(Error::input("moduli must be strictly increasing"));
            }
        }
        Ok(CongruenceIndexSet { constraints })
    }

    pub fn constraints(&self) -> &[(u64, u64)] {
        &self.constraints
    }

    pub fn contains(&self, i: i64) -> bool {
        self.constraints
            .iter()
            .all(|&(q, hi)| (i.rem_euclid(q as i64) as u64) <= hi)
    }

    /// `|I cap [0, N)| / N` by direct count.
    pub fn index_density(&self, n: u64) -> Result<Q> {
        if n == 0 {
            return Err(Error::input("N must be at least 1"));
        }
        if n > CELL_LIMIT as u64 {
            return Err(Error::budget("N exceeds the counting budget"));
        }
        let count = (0..n as i64).filter(|&i| self.contains(i)).count();
        Ok(Q::new(count.into(), n.into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub stage: usize,
    pub trials: usize,
    pub successes: usize,
    pub worst_distance: Q,
    pub tolerance: Q,
    pub radius: usize,
    pub truncation: usize,
}

impl ProbeReport {
    pub fn holds(&self) -> bool {
        self.successes == self.trials
    }

    pub fn to_json(&self) -> Value {
        json!({
            "stage": self.stage,
            "trials": self.trials,
            "successes": self.successes,
            "worst_distance": q_to_json(&self.worst_distance),
            "tolerance": q_to_json(&self.tolerance),
            "radius": self.radius,
            "truncation": self.truncation,
            "metric": "sum 2^-|i| |x_i - y_i| over [-W, W] plus tail 2^(1-W)",
            "holds": self.holds(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn a_sequences() {
        assert_eq!(choose_a_sequence(&q(1, 2), 5).unwrap(), (vec![1], Q::one()));
        assert_eq!(choose_a_sequence(&q(1, 3), 5).unwrap().0, vec![1, 2]);
        assert_eq!(choose_a_sequence(&q(2, 3), 5).unwrap().0, vec![2]);
        assert_eq!(choose_a_sequence(&q(7, 10), 5).unwrap().0, vec![3, 14]);
        let (a, rho) = choose_a_sequence(&q(5, 7), 1).unwrap();
        assert_eq!(a, vec![3]);
        assert!(rho > Q::one());
        assert!(choose_a_sequence(&Q::one(), 3).is_err());
    }

    #[test]
    fn index_density_examples() {
        assert_eq!(CongruenceIndexSet::new(vec![]).unwrap().index_density(10).unwrap(), Q::one());
        assert_eq!(CongruenceIndexSet::new(vec![(4, 2)]).unwrap().index_density(4).unwrap(), q(3, 4));
    }

    #[test]
    fn half_system() {
        let sys = BlockSystem::build(q(1, 2), 2, 2).unwrap();
        assert_eq!(sys.depth(), 1);
        let s = sys.stage(1).unwrap();
        assert_eq!(s.a, 1);
        assert_eq!(s.pattern.dim(), s.q - 2 * s.l);
        assert_eq!(sys.free_dim_ratio(0).unwrap(), Q::one());
        assert_eq!(sys.free_dim_ratio(1).unwrap(), q(1, 2));
        assert_eq!(sys.index_set(1).unwrap().index_density(s.q as u64).unwrap(), q(1, 2));
        assert_eq!(sys.lower_bound_mdim(), q(1, 2));
        assert_eq!(sys.upper_bound_mdim(1, 100).unwrap(), q(101, 200));
        assert_eq!(sys.upper_bound_mdim(1, 1).unwrap(), Q::one());
        assert_eq!(sys.power_bound_scaling(2).unwrap(), (Q::one(), Q::one()));
        let back = BlockSystem::from_json(&sys.to_json()).unwrap();
        assert_eq!(back, sys);
    }

    #[test]
    fn third_system_and_recurrence() {
        let sys = BlockSystem::build(q(1, 3), 5, 2).unwrap();
        assert_eq!(sys.depth(), 2);
        assert_eq!(sys.free_dim_ratio(2).unwrap(), q(1, 3));
        for n in 0..sys.depth() {
            let (s, t) = (sys.stage(n).unwrap(), sys.stage(n + 1).unwrap());
            assert_eq!(t.l % s.q, 0);
            assert_eq!((t.q - 2 * t.l) % t.l, 0);
            assert_eq!(t.pattern.dim() * s.q, s.pattern.dim() * (t.q - 2 * t.l));
        }
        assert_eq!(sys.power_bound_scaling(3).unwrap().0, Q::one());
    }

    #[test]
    fn enumeration_covers_every_word() {
        let p = BlockPattern::new(vec![Cell::Free, Cell::Free, Cell::Fixed(1), Cell::Free], 2).unwrap();
        let w = 5;
        let y = enumeration_word(&p, w).unwrap();
        assert_eq!(y.len() % p.q(), 0);
        assert!(y.chunks(p.q()).all(|c| p.matches(c)));
        let long: Vec<u8> = (0..4 * 64)
            .map(|i| match p.cells[i % 4] {
                Cell::Fixed(s) => s,
                Cell::Free => ((i * 7 / 3) % 2) as u8,
            })
            .collect();
        let found: HashSet<&[u8]> = y.windows(w).collect();
        for win in long.windows(w) {
            assert!(found.contains(win));
        }
    }

    #[test]
    fn membership_and_sampling() {
        let sys = BlockSystem::build(q(1, 2), 1, 2).unwrap();
        let q1 = sys.stage(1).unwrap().q;
        let x = sys.sample_config(1, 2 * q1, 5).unwrap();
        assert!(sys.phi_membership(&x, 1).unwrap());
        assert!(sys.phi_membership(&x, 0).unwrap());
        let mut bad = x.clone();
        let fixed = sys.stage(1).unwrap().pattern.cells().iter().position(|c| *c != Cell::Free).unwrap();
        bad[fixed] ^= 1;
        assert!(!sys.phi_membership(&bad, 1).unwrap());
        assert!(sys.phi_membership(&x[..q1 - 1], 1).is_err());
        let y = sys.sample_config(1, q1, 6).unwrap();
        for (i, c) in sys.stage(1).unwrap().pattern.cells().iter().enumerate() {
            if *c != Cell::Free {
                assert_eq!(x[i], y[i]);
            }
        }
        let one = BlockSystem::build(q(1, 2), 1, 1).unwrap();
        assert!(one.sample_config(1, 4, 1).unwrap().iter().all(|&s| s == 0));
    }

    #[test]
    fn probe_stage_one() {
        let sys = BlockSystem::build(q(1, 2), 1, 2).unwrap();
        let r = sys.minimality_probe(0, 100, 9).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(r.worst_distance <= Q::one());
        let q1 = sys.stage(1).unwrap().q;
        let x = sys.sample_config(1, 3 * q1, 1).unwrap();
        let c = 2 * q1 - sys.stage(1).unwrap().l;
        let (k, d) = sys.probe_pair(0, &x, c, &x).unwrap().unwrap();
        assert_eq!(k, 0);
        assert_eq!(d, pow2_neg(3));
        let mut bad = x.clone();
        let fixed = sys.stage(1).unwrap().pattern.cells().iter().position(|c| *c != Cell::Free).unwrap();
        bad[fixed] ^= 1;
        assert!(sys.probe_pair(0, &x, c, &bad).unwrap_err().detail().contains("not in X_1"));
    }
}

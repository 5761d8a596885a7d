//! Box covers of the unit cube, the face condition, exact orders through
//! the coordinate arrangement, and the fixed-point witness construction.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::rational::{q, q_from_json, q_to_f64, q_to_json, Q};

/// A closed axis-aligned box inside `[0,1]^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cuboid {
    pub lo: Vec<Q>,
    pub hi: Vec<Q>,
}

impl Cuboid {
    pub fn new(lo: Vec<Q>, hi: Vec<Q>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::input("box bounds must have the same positive length"));
        }
        for (a, b) in lo.iter().zip(&hi) {
            if a.is_negative() || *b > Q::one() || a > b {
                return Err(Error::input(format!("box bounds [{a}, {b}] leave [0,1]")));
            }
        }
        Ok(Cuboid { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| a <= v && v <= b)
    }

    pub fn contains_open(&self, x: &[Q]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| a < v && v < b)
    }

    pub fn diameter_squared(&self) -> Q {
        self.lo
            .iter()
            .zip(&self.hi)
            .fold(Q::zero(), |acc, (a, b)| acc + (b - a) * (b - a))
    }

    pub fn side_max(&self) -> Q {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| b - a)
            .max()
            .unwrap_or_else(Q::zero)
    }

    fn to_json(&self) -> Value {
        json!({
            "lo": self.lo.iter().map(q_to_json).collect::<Vec<_>>(),
            "hi": self.hi.iter().map(q_to_json).collect::<Vec<_>>(),
        })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let read = |key: &str| -> Result<Vec<Q>> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::input(format!("box: missing {key:?}")))?
                .iter()
                .map(q_from_json)
                .collect()
        };
        Cuboid::new(read("lo")?, read("hi")?)
    }
}

/// How a box owns its boundary when multiplicities are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semantics {
    Closed,
    /// Open relative to the cube: faces on `x_k = 0` or `x_k = 1` stay.
    Open,
}

/// Named boxes covering the cube minus optional open holes.
///
/// Holes let a fixture describe a region that is not the whole cube; all
/// coverage and order computations are restricted to the complement.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxCover {
    n: usize,
    names: Vec<String>,
    boxes: Vec<Cuboid>,
    holes: Vec<Cuboid>,
}

impl BoxCover {
    pub fn new(n: usize, members: Vec<(String, Cuboid)>) -> Result<Self> {
        Self::with_holes(n, members, Vec::new())
    }

    pub fn with_holes(n: usize, members: Vec<(String, Cuboid)>, holes: Vec<Cuboid>) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("dimension must be at least 1"));
        }
        let mut sorted: BTreeMap<String, Cuboid> = BTreeMap::new();
        for (name, b) in members {
            if b.dim() != n {
                return Err(Error::input(format!("box {name:?} has dimension {}", b.dim())));
            }
            if sorted.insert(name.clone(), b).is_some() {
                return Err(Error::input(format!("duplicate box name {name:?}")));
            }
        }
        if holes.iter().any(|h| h.dim() != n) {
            return Err(Error::input("hole of the wrong dimension"));
        }
        let (names, boxes) = sorted.into_iter().unzip();
        let c = BoxCover { n, names, boxes, holes };
        let arr = Arrangement::new(&c, Semantics::Closed)?;
        if let Some(cell) = arr.uncovered_cell() {
            return Err(Error::input(format!(
                "not a cover: point {} is in no box",
                fmt_point(&arr.sample_point(&cell))
            )));
        }
        Ok(c)
    }

    pub fn from_boxes(n: usize, boxes: Vec<Cuboid>) -> Result<Self> {
        let w = boxes.len().to_string().len();
        let members = boxes
            .into_iter()
            .enumerate()
            .map(|(i, b)| (format!("U{:0w$}", i + 1), b))
            .collect();
        BoxCover::new(n, members)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn boxes(&self) -> &[Cuboid] {
        &self.boxes
    }

    pub fn holes(&self) -> &[Cuboid] {
        &self.holes
    }

    pub fn in_domain(&self, x: &[Q]) -> bool {
        !self.holes.iter().any(|h| h.contains_open(x))
    }

    /// Largest squared Euclidean diameter of a box.
    pub fn mesh_squared(&self) -> Q {
        self.boxes.iter().map(Cuboid::diameter_squared).max().unwrap_or_else(Q::zero)
    }

    /// Largest side of any box, i.e. the mesh in the sup metric.
    pub fn mesh_sup(&self) -> Q {
        self.boxes.iter().map(Cuboid::side_max).max().unwrap_or_else(Q::zero)
    }

    pub fn to_json(&self) -> Value {
        let mut b = Map::new();
        for (n, x) in self.names.iter().zip(&self.boxes) {
            b.insert(n.clone(), x.to_json());
        }
        let mut v = json!({"n": self.n, "boxes": Value::Object(b)});
        if !self.holes.is_empty() {
            let mut h = Map::new();
            for (i, x) in self.holes.iter().enumerate() {
                h.insert(format!("H{}", i + 1), x.to_json());
            }
            v["holes"] = Value::Object(h);
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::input("box cover: missing \"n\""))? as usize;
        let boxes = v
            .get("boxes")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::input("box cover: missing \"boxes\" object"))?;
        let mut members = Vec::new();
        for (name, b) in boxes {
            members.push((name.clone(), Cuboid::from_json(b)?));
        }
        let mut holes = Vec::new();
        if let Some(h) = v.get("holes") {
            let h = h
                .as_object()
                .ok_or_else(|| Error::input("box cover: \"holes\" must be an object"))?;
            for b in h.values() {
                holes.push(Cuboid::from_json(b)?);
            }
        }
        BoxCover::with_holes(n, members, holes)
    }
}

fn fmt_point(x: &[Q]) -> String {
    let parts: Vec<String> = x.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// No box touches two opposite faces.
pub fn face_condition(c: &BoxCover) -> bool {
    face_violations(c).is_empty()
}

/// `(box name, axis)` pairs where a box spans the whole axis.
pub fn face_violations(c: &BoxCover) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    for (name, b) in c.names.iter().zip(&c.boxes) {
        for k in 0..c.n {
            if b.lo[k].is_zero() && b.hi[k].is_one() {
                out.push((name.clone(), k));
            }
        }
    }
    out
}

const CELL_LIMIT: usize = 50_000_000;

/// The product decomposition of the cube induced by all box coordinates.
/// Along each axis the atoms alternate between breakpoints (even index)
/// and the open intervals between them (odd index); multiplicity is
/// constant on every product of atoms.
struct Arrangement {
    n: usize,
    cuts: Vec<Vec<Q>>,
    shape: Vec<usize>,
    counts: Vec<u32>,
    hole: Vec<u32>,
}

impl Arrangement {
    fn new(c: &BoxCover, sem: Semantics) -> Result<Self> {
        let n = c.n;
        let mut cuts: Vec<Vec<Q>> = Vec::with_capacity(n);
        for k in 0..n {
            let mut s: BTreeSet<Q> = BTreeSet::new();
            s.insert(Q::zero());
            s.insert(Q::one());
            for b in c.boxes.iter().chain(&c.holes) {
                for v in [&b.lo[k], &b.hi[k]] {
                    if !v.is_negative() && *v <= Q::one() {
                        s.insert(v.clone());
                    }
                }
            }
            cuts.push(s.into_iter().collect());
        }
        let shape: Vec<usize> = cuts.iter().map(|c| 2 * c.len() - 1).collect();
        let total = shape
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
            .filter(|&t| t <= CELL_LIMIT)
            .ok_or_else(|| Error::budget("box arrangement has too many cells"))?;
        let mut arr = Arrangement { n, cuts, shape, counts: vec![0; total], hole: vec![0; total] };
        let mut counts = vec![0i64; total];
        for b in &c.boxes {
            if let Some(r) = arr.atom_range(b, sem) {
                arr.add_box(&mut counts, &r);
            }
        }
        arr.prefix(&mut counts);
        arr.counts = counts.iter().map(|&v| v as u32).collect();
        if !c.holes.is_empty() {
            let mut h = vec![0i64; total];
            for b in &c.holes {
                if let Some(r) = arr.open_range(b) {
                    arr.add_box(&mut h, &r);
                }
            }
            arr.prefix(&mut h);
            arr.hole = h.iter().map(|&v| v as u32).collect();
        }
        Ok(arr)
    }

    fn pos(&self, k: usize, v: &Q) -> usize {
        self.cuts[k].binary_search(v).expect("coordinate is a breakpoint")
    }

    fn atom_range(&self, b: &Cuboid, sem: Semantics) -> Option<Vec<(usize, usize)>> {
        match sem {
            Semantics::Closed => Some(
                (0..self.n)
                    .map(|k| (2 * self.pos(k, &b.lo[k]), 2 * self.pos(k, &b.hi[k])))
                    .collect(),
            ),
            Semantics::Open => {
                let mut r = Vec::with_capacity(self.n);
                for k in 0..self.n {
                    let (a, z) = (self.pos(k, &b.lo[k]), self.pos(k, &b.hi[k]));
                    let s = if b.lo[k].is_zero() { 0 } else { 2 * a + 1 };
                    let last = self.shape[k] - 1;
                    let e = if b.hi[k].is_one() { last } else { (2 * z).checked_sub(1)? };
                    if s > e {
                        return None;
                    }
                    r.push((s, e));
                }
                Some(r)
            }
        }
    }

    fn open_range(&self, b: &Cuboid) -> Option<Vec<(usize, usize)>> {
        let mut r = Vec::with_capacity(self.n);
        for k in 0..self.n {
            let s = 2 * self.pos(k, &b.lo[k]) + 1;
            let e = (2 * self.pos(k, &b.hi[k])).checked_sub(1)?;
            if s > e {
                return None;
            }
            r.push((s, e));
        }
        Some(r)
    }

    fn strides(&self) -> Vec<usize> {
        let mut st = vec![1; self.n];
        for k in (0..self.n.saturating_sub(1)).rev() {
            st[k] = st[k + 1] * self.shape[k + 1];
        }
        st
    }

    // difference-array corners of the hyper-rectangle
    fn add_box(&self, diff: &mut [i64], r: &[(usize, usize)]) {
        let st = self.strides();
        'corner: for mask in 0u32..(1 << self.n) {
            let mut idx = 0;
            let mut sign = 1i64;
            for k in 0..self.n {
                let v = if mask >> k & 1 == 1 {
                    sign = -sign;
                    r[k].1 + 1
                } else {
                    r[k].0
                };
                if v >= self.shape[k] {
                    continue 'corner;
                }
                idx += v * st[k];
            }
            diff[idx] += sign;
        }
    }

    fn prefix(&self, a: &mut [i64]) {
        let st = self.strides();
        for k in 0..self.n {
            for idx in 0..a.len() {
                let coord = (idx / st[k]) % self.shape[k];
                if coord > 0 {
                    a[idx] += a[idx - st[k]];
                }
            }
        }
    }

    fn unflatten(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for k in (0..self.n).rev() {
            out[k] = idx % self.shape[k];
            idx /= self.shape[k];
        }
        out
    }

    fn domain_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.counts.len()).filter(|&i| self.hole[i] == 0)
    }

    fn uncovered_cell(&self) -> Option<Vec<usize>> {
        self.domain_cells()
            .find(|&i| self.counts[i] == 0)
            .map(|i| self.unflatten(i))
    }

    fn max_cell(&self) -> Option<(usize, Vec<usize>)> {
        self.domain_cells()
            .max_by_key(|&i| (self.counts[i], std::cmp::Reverse(i)))
            .map(|i| (self.counts[i] as usize, self.unflatten(i)))
    }

    fn sample_point(&self, cell: &[usize]) -> Vec<Q> {
        let two = Q::from_integer(BigInt::from(2));
        cell.iter()
            .enumerate()
            .map(|(k, &a)| {
                if a % 2 == 0 {
                    self.cuts[k][a / 2].clone()
                } else {
                    (&self.cuts[k][a / 2] + &self.cuts[k][a / 2 + 1]) / &two
                }
            })
            .collect()
    }
}

/// Order over the domain, with a point where it is attained.
#[derive(Debug, Clone)]
pub struct OrderReport {
    pub order: usize,
    pub witness: Vec<Q>,
    pub cells: usize,
}

pub fn order_report(c: &BoxCover, sem: Semantics) -> Result<OrderReport> {
    let arr = Arrangement::new(c, sem)?;
    if let Some(cell) = arr.uncovered_cell() {
        return Err(Error::input(format!(
            "not a cover under this semantics: point {} is in no box",
            fmt_point(&arr.sample_point(&cell))
        )));
    }
    let (m, cell) = arr.max_cell().ok_or_else(|| Error::input("empty domain"))?;
    Ok(OrderReport { order: m - 1, witness: arr.sample_point(&cell), cells: arr.counts.len() })
}

/// Exact order for closed boxes.
pub fn exact_order(c: &BoxCover) -> Result<usize> {
    Ok(order_report(c, Semantics::Closed)?.order)
}

/// Staggered bricks: layers along the last axis, each layer a brick cover
/// one dimension down, with breakpoints shifted so that adjacent layers
/// never share an interior breakpoint on any axis. Bricks are inflated a
/// little so the open version also covers. Order is exactly `n`.
pub fn brick_cover(n: usize, eps: &Q) -> Result<BoxCover> {
    if n == 0 {
        return Err(Error::input("dimension must be at least 1"));
    }
    if !eps.is_positive() || *eps >= Q::one() {
        return Err(Error::input("eps must lie in (0, 1)"));
    }
    let nn = Q::from_integer(BigInt::from(n));
    let grow = Q::one() + q(1, 1i64 << (n + 1));
    let eps2 = eps * eps;
    let mut k: i64 = 2;
    loop {
        let h = q(1, k);
        let side = &h * &grow;
        if &nn * &side * &side <= eps2 {
            break;
        }
        k += 1;
        if k > 1 << 20 {
            return Err(Error::budget("eps too small for a brick cover"));
        }
    }
    let h = q(1, k);
    let eta = &h / Q::from_integer(BigInt::from(1i64 << (n + 2)));
    // breakpoints of axis `axis` in shift family `f`
    let family = |axis: usize, f: usize| -> Vec<Q> {
        let parts = 1i64 << (n - 1 - axis);
        let shift = &h * q(f as i64, parts);
        let mut v = vec![Q::zero()];
        let mut x = if shift.is_zero() { h.clone() } else { shift };
        while x < Q::one() {
            v.push(x.clone());
            x += &h;
        }
        v.push(Q::one());
        v
    };
    let mut boxes: Vec<Cuboid> = Vec::new();
    let mut lo = vec![Q::zero(); n];
    let mut hi = vec![Q::zero(); n];
    fill_bricks(n - 1, 0, &family, &eta, &mut lo, &mut hi, &mut boxes);
    let w = boxes.len().to_string().len();
    let members = boxes
        .into_iter()
        .enumerate()
        .map(|(i, b)| (format!("B{:0w$}", i + 1), b))
        .collect();
    BoxCover::new(n, members)
}

#[allow(clippy::too_many_arguments)]
fn fill_bricks(
    axis: usize,
    fam: usize,
    family: &dyn Fn(usize, usize) -> Vec<Q>,
    eta: &Q,
    lo: &mut Vec<Q>,
    hi: &mut Vec<Q>,
    out: &mut Vec<Cuboid>,
) {
    let cuts = family(axis, fam);
    for (j, w) in cuts.windows(2).enumerate() {
        lo[axis] = (&w[0] - eta).max(Q::zero());
        hi[axis] = (&w[1] + eta).min(Q::one());
        if axis == 0 {
            out.push(Cuboid { lo: lo.clone(), hi: hi.clone() });
        } else {
            // parity of the layer index picks the next family bit
            fill_bricks(axis - 1, 2 * fam + (j % 2), family, eta, lo, hi, out);
        }
    }
}

/// Result of [`exhaustive_min_order`].
#[derive(Debug, Clone)]
pub struct ExhaustiveResult {
    pub min_order: usize,
    /// Set label of every grid cell, row-major.
    pub labels: Vec<usize>,
    pub explored: u64,
}

/// Smallest order of a cover of the cube by at most `max_sets` unions of
/// closed grid cells subject to the face condition.
///
/// Letting a cell belong to several sets never lowers the order, so it is
/// enough to enumerate labelings of cells, up to renaming of labels.
pub fn exhaustive_min_order(n: usize, grid: usize, max_sets: usize) -> Result<ExhaustiveResult> {
    exhaustive_min_order_capped(n, grid, max_sets, 50_000_000)
}

pub fn exhaustive_min_order_capped(n: usize, grid: usize, max_sets: usize, ceiling: u64) -> Result<ExhaustiveResult> {
    if !(1..=2).contains(&n) {
        return Err(Error::input("exhaustive search supports n = 1 or n = 2"));
    }
    if grid == 0 || max_sets == 0 {
        return Err(Error::input("grid and max_sets must be positive"));
    }
    let cells = grid.pow(n as u32);
    let est = (max_sets as f64).powi(cells as i32);
    if est > ceiling as f64 * 24.0 {
        return Err(Error::budget(format!(
            "enumeration ceiling exceeded: about {est:.3e} labelings"
        )));
    }
    // which faces each cell touches: bit 2k for x_k = 0, bit 2k+1 for x_k = 1
    let coords = |c: usize| -> Vec<usize> {
        let mut v = vec![0; n];
        let mut c = c;
        for k in (0..n).rev() {
            v[k] = c % grid;
            c /= grid;
        }
        v
    };
    let touch: Vec<u32> = (0..cells)
        .map(|c| {
            let x = coords(c);
            let mut m = 0;
            for k in 0..n {
                if x[k] == 0 {
                    m |= 1 << (2 * k);
                }
                if x[k] + 1 == grid {
                    m |= 1 << (2 * k + 1);
                }
            }
            m
        })
        .collect();
    let verts = (grid + 1).pow(n as u32);
    let incident: Vec<Vec<usize>> = (0..verts)
        .map(|v| {
            let mut p = vec![0; n];
            let mut t = v;
            for k in (0..n).rev() {
                p[k] = t % (grid + 1);
                t /= grid + 1;
            }
            let mut out = Vec::new();
            for mask in 0u32..(1 << n) {
                let mut idx = 0;
                let mut ok = true;
                for k in 0..n {
                    let c = if mask >> k & 1 == 1 { p[k] as isize - 1 } else { p[k] as isize };
                    if c < 0 || c >= grid as isize {
                        ok = false;
                        break;
                    }
                    idx = idx * grid + c as usize;
                }
                if ok {
                    out.push(idx);
                }
            }
            out
        })
        .collect();
    let mut st = Search {
        cells,
        max_sets,
        touch,
        incident,
        labels: vec![0; cells],
        set_touch: vec![0; max_sets],
        best: None,
        explored: 0,
        ceiling,
    };
    st.go(0, 0)?;
    match st.best {
        Some((ord, labels)) => Ok(ExhaustiveResult { min_order: ord, labels, explored: st.explored }),
        None => Err(Error::pre("no admissible cover: every labeling breaks the face condition")),
    }
}

struct Search {
    cells: usize,
    max_sets: usize,
    touch: Vec<u32>,
    incident: Vec<Vec<usize>>,
    labels: Vec<usize>,
    set_touch: Vec<u32>,
    best: Option<(usize, Vec<usize>)>,
    explored: u64,
    ceiling: u64,
}

impl Search {
    fn go(&mut self, i: usize, used: usize) -> Result<()> {
        if i == self.cells {
            self.explored += 1;
            if self.explored > self.ceiling {
                return Err(Error::budget("enumeration ceiling exceeded"));
            }
            let ord = self.order();
            if self.best.as_ref().is_none_or(|(b, _)| ord < *b) {
                self.best = Some((ord, self.labels.clone()));
            }
            return Ok(());
        }
        let limit = (used + 1).min(self.max_sets);
        for lab in 0..limit {
            let before = self.set_touch[lab];
            let after = before | self.touch[i];
            // opposite faces are adjacent bits 2k, 2k+1
            if after & (after >> 1) & 0x5555_5555 != 0 {
                continue;
            }
            self.set_touch[lab] = after;
            self.labels[i] = lab;
            self.go(i + 1, used.max(lab + 1))?;
            self.set_touch[lab] = before;
        }
        Ok(())
    }

    fn order(&self) -> usize {
        let mut worst = 0;
        let mut seen = Vec::with_capacity(8);
        for inc in &self.incident {
            seen.clear();
            for &c in inc {
                let l = self.labels[c];
                if !seen.contains(&l) {
                    seen.push(l);
                }
            }
            worst = worst.max(seen.len());
        }
        worst - 1
    }
}

/// Options for [`lebesgue_witness`].
#[derive(Debug, Clone)]
pub struct WitnessOptions {
    /// Margin for the inflated boxes; `None` picks a quarter of the
    /// smallest gap between breakpoints.
    pub inflation: Option<Q>,
    pub tolerance: f64,
    pub omega_budget: usize,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions { inflation: None, tolerance: 1e-9, omega_budget: 100_000 }
    }
}

#[derive(Debug, Clone)]
pub struct WitnessReport {
    /// Corner of the cube assigned to each box.
    pub vertices: Vec<(String, Vec<u8>)>,
    pub inflation: Q,
    pub omega: Vec<f64>,
    pub omega_clearance: f64,
    pub min_displacement: f64,
    pub argmin: Vec<Q>,
    pub evaluated: usize,
    pub skipped: usize,
    pub supports: Vec<Vec<String>>,
}

/// Runs the partition-of-unity construction that turns a face-condition
/// cover of order below `n` into a map of the cube to its boundary with
/// no fixed point, and measures how far that map moves lattice points.
///
/// Each box gets the corner `S` with `S_k = 1` iff it meets `x_k = 0`;
/// `phi` blends the corners with tent weights on slightly inflated boxes,
/// and `psi` pushes `phi(x)` radially from a point `omega` outside the
/// image onto the boundary.
pub fn lebesgue_witness(c: &BoxCover, grid: usize, seed: u64) -> Result<WitnessReport> {
    lebesgue_witness_with(c, grid, seed, &WitnessOptions::default())
}

pub fn lebesgue_witness_with(c: &BoxCover, grid: usize, seed: u64, opt: &WitnessOptions) -> Result<WitnessReport> {
    let n = c.n;
    if grid == 0 {
        return Err(Error::input("grid must be positive"));
    }
    if !face_condition(c) {
        return Err(Error::pre("hypothesis not refutable: the face condition fails"));
    }
    let ord = exact_order(c)?;
    if ord >= n {
        return Err(Error::pre(format!(
            "hypothesis not refutable: order {ord} is not below n = {n}"
        )));
    }
    let mu = match &opt.inflation {
        Some(m) => m.clone(),
        None => {
            let mut gap: Option<Q> = None;
            for k in 0..n {
                let mut s: BTreeSet<Q> = [Q::zero(), Q::one()].into_iter().collect();
                for b in c.boxes.iter().chain(&c.holes) {
                    s.insert(b.lo[k].clone());
                    s.insert(b.hi[k].clone());
                }
                let v: Vec<Q> = s.into_iter().collect();
                for w in v.windows(2) {
                    let d = &w[1] - &w[0];
                    if gap.as_ref().is_none_or(|g| d < *g) {
                        gap = Some(d);
                    }
                }
            }
            gap.expect("at least one gap") / Q::from_integer(BigInt::from(4))
        }
    };
    if !mu.is_positive() {
        return Err(Error::input("inflation must be positive"));
    }
    let inflated: Vec<Cuboid> = c
        .boxes
        .iter()
        .map(|b| Cuboid {
            lo: b.lo.iter().map(|v| (v - &mu).max(Q::zero())).collect(),
            hi: b.hi.iter().map(|v| (v + &mu).min(Q::one())).collect(),
        })
        .collect();
    let grown = BoxCover { n, names: c.names.clone(), boxes: inflated, holes: c.holes.clone() };
    if !face_condition(&grown) {
        return Err(Error::pre("inflation breaks the face condition; pass a smaller margin"));
    }
    if exact_order(&grown)? >= n {
        return Err(Error::pre("inflation raises the order to n; pass a smaller margin"));
    }
    let corners: Vec<Vec<u8>> = grown
        .boxes
        .iter()
        .map(|b| b.lo.iter().map(|v| u8::from(v.is_zero())).collect())
        .collect();
    let supports = supports(&grown)?;

    let omega = find_omega(&supports, &corners, n, seed, opt)?;
    let (omega, clearance) = omega;

    let mut min_disp = f64::INFINITY;
    let mut argmin = vec![Q::zero(); n];
    let mut evaluated = 0;
    let mut skipped = 0;
    let g = grid as i64;
    let total = grid.pow(n as u32);
    for idx in 0..total {
        let mut t = idx;
        let mut x = vec![Q::zero(); n];
        for k in (0..n).rev() {
            x[k] = q((t % grid) as i64, g);
            t /= grid;
        }
        if !c.in_domain(&x) {
            skipped += 1;
            continue;
        }
        let phi = blend(&c.boxes, &mu, &corners, &x)
            .ok_or_else(|| Error::Assertion(format!("no weight at {}", fmt_point(&x))))?;
        let psi = radial(&omega, &phi)?;
        let d = x
            .iter()
            .zip(&psi)
            .map(|(a, b)| (q_to_f64(a) - b).abs())
            .fold(0.0f64, f64::max);
        evaluated += 1;
        if d < min_disp {
            min_disp = d;
            argmin = x;
        }
    }
    Ok(WitnessReport {
        vertices: c.names.iter().cloned().zip(corners).collect(),
        inflation: mu,
        omega,
        omega_clearance: clearance,
        min_displacement: min_disp,
        argmin,
        evaluated,
        skipped,
        supports: supports
            .iter()
            .map(|s| s.iter().map(|&i| c.names[i].clone()).collect())
            .collect(),
    })
}

// maximal sets of boxes sharing a domain point
fn supports(c: &BoxCover) -> Result<Vec<Vec<usize>>> {
    let arr = Arrangement::new(c, Semantics::Closed)?;
    let ranges: Vec<Vec<(usize, usize)>> = c
        .boxes
        .iter()
        .map(|b| arr.atom_range(b, Semantics::Closed).expect("closed ranges exist"))
        .collect();
    if arr.counts.len().saturating_mul(c.boxes.len()) > CELL_LIMIT {
        return Err(Error::budget("too many cells to list supports"));
    }
    let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
    for i in arr.domain_cells() {
        let cell = arr.unflatten(i);
        let s: Vec<usize> = (0..c.boxes.len())
            .filter(|&b| cell.iter().zip(&ranges[b]).all(|(&a, &(lo, hi))| lo <= a && a <= hi))
            .collect();
        all.insert(s);
    }
    let list: Vec<Vec<usize>> = all.into_iter().collect();
    Ok(list
        .iter()
        .filter(|s| !list.iter().any(|t| t.len() > s.len() && s.iter().all(|x| t.contains(x))))
        .cloned()
        .collect())
}

fn blend(boxes: &[Cuboid], mu: &Q, corners: &[Vec<u8>], x: &[Q]) -> Option<Vec<f64>> {
    let mut w = Vec::with_capacity(boxes.len());
    let mut total = Q::zero();
    for b in boxes {
        // sup-distance to the complement of the open inflated box
        let mut d: Option<Q> = None;
        for k in 0..x.len() {
            let a = &x[k] - &b.lo[k] + mu;
            let z = &b.hi[k] + mu - &x[k];
            let m = if a < z { a } else { z };
            if d.as_ref().is_none_or(|v| m < *v) {
                d = Some(m);
            }
        }
        let d = d.unwrap_or_else(Q::zero).max(Q::zero());
        total += &d;
        w.push(d);
    }
    if total.is_zero() {
        return None;
    }
    let n = x.len();
    let mut phi = vec![Q::zero(); n];
    for (wi, s) in w.iter().zip(corners) {
        for k in 0..n {
            if s[k] == 1 {
                phi[k] += wi;
            }
        }
    }
    Some(phi.iter().map(|v| q_to_f64(&(v / &total))).collect())
}

fn radial(omega: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    let v: Vec<f64> = p.iter().zip(omega).map(|(a, b)| a - b).collect();
    let norm = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if norm < 1e-12 {
        return Err(Error::Assertion("phi(x) hit omega".into()));
    }
    let mut t = f64::INFINITY;
    for k in 0..v.len() {
        if v[k].abs() > 1e-12 * norm {
            let target = if v[k] > 0.0 { 1.0 } else { 0.0 };
            t = t.min((target - omega[k]) / v[k]);
        }
    }
    Ok(omega
        .iter()
        .zip(&v)
        .map(|(o, d)| (o + t * d).clamp(0.0, 1.0))
        .collect())
}

fn primes(k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut c = 2u64;
    while out.len() < k {
        if (2..c).take_while(|d| d * d <= c).all(|d| !c.is_multiple_of(d)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

// Kronecker points frac(j * sqrt(p_k)), starting at an offset from the seed
fn find_omega(supports: &[Vec<usize>], corners: &[Vec<u8>], n: usize, seed: u64, opt: &WitnessOptions) -> Result<(Vec<f64>, f64)> {
    let alpha: Vec<f64> = primes(n).iter().map(|&p| (p as f64).sqrt().fract()).collect();
    let start = seed % 1_000_003;
    for j in 0..opt.omega_budget as u64 {
        let t = (start + j + 1) as f64;
        let w: Vec<f64> = alpha.iter().map(|a| (t * a).fract()).collect();
        let edge = w.iter().fold(f64::INFINITY, |m, &x| m.min(x).min(1.0 - x));
        if edge <= opt.tolerance {
            continue;
        }
        let mut clear = edge;
        for s in supports {
            let pts: Vec<Vec<f64>> = s.iter().map(|&i| corners[i].iter().map(|&b| b as f64).collect()).collect();
            clear = clear.min(dist_to_affine_hull(&w, &pts));
            if clear <= opt.tolerance {
                break;
            }
        }
        if clear > opt.tolerance {
            return Ok((w, clear));
        }
    }
    Err(Error::budget("no admissible omega found within the budget"))
}

/// Euclidean distance from `x` to the affine hull of `pts`.
fn dist_to_affine_hull(x: &[f64], pts: &[Vec<f64>]) -> f64 {
    let base = &pts[0];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in &pts[1..] {
        let mut v: Vec<f64> = p.iter().zip(base).map(|(a, b)| a - b).collect();
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= d * bi;
            }
        }
        let len = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if len > 1e-12 {
            basis.push(v.iter().map(|a| a / len).collect());
        }
    }
    let mut r: Vec<f64> = x.iter().zip(base).map(|(a, b)| a - b).collect();
    for b in &basis {
        let d: f64 = r.iter().zip(b).map(|(a, c)| a * c).sum();
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri -= d * bi;
        }
    }
    r.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Face-condition cover of the square minus two small holes, of order 1
/// on what remains. Used to exercise [`lebesgue_witness`].
pub fn punctured_square_fixture() -> BoxCover {
    let b = |lo: [Q; 2], hi: [Q; 2]| Cuboid::new(lo.to_vec(), hi.to_vec()).expect("valid box");
    let z = Q::zero;
    let o = Q::one;
    let members = vec![
        ("A".to_string(), b([z(), z()], [q(1, 2), q(1, 2)])),
        ("B".to_string(), b([q(1, 2), z()], [o(), q(1, 2)])),
        ("C".to_string(), b([z(), q(1, 2)], [q(3, 4), o()])),
        ("D".to_string(), b([q(3, 4), q(1, 2)], [o(), o()])),
    ];
    let holes = vec![
        b([q(7, 16), q(7, 16)], [q(9, 16), q(9, 16)]),
        b([q(11, 16), q(7, 16)], [q(13, 16), q(9, 16)]),
    ];
    BoxCover::with_holes(2, members, holes).expect("fixture covers its domain")
}

/// Count of boxes containing `x`, straight from the definition.
pub fn multiplicity_at(c: &BoxCover, x: &[Q]) -> usize {
    c.boxes.iter().filter(|b| b.contains(x)).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    fn bx(lo: &[Q], hi: &[Q]) -> Cuboid {
        Cuboid::new(lo.to_vec(), hi.to_vec()).unwrap()
    }

    #[test]
    fn halves_of_segment() {
        let c = BoxCover::from_boxes(1, vec![bx(&[qi(0)], &[q(1, 2)]), bx(&[q(1, 2)], &[qi(1)])]).unwrap();
        assert_eq!(exact_order(&c).unwrap(), 1);
        assert!(face_condition(&c));
        // the open version leaves 1/2 uncovered
        assert!(order_report(&c, Semantics::Open).is_err());
    }

    #[test]
    fn whole_cube_fails_face_condition() {
        let c = BoxCover::from_boxes(2, vec![bx(&[qi(0), qi(0)], &[qi(1), qi(1)])]).unwrap();
        assert!(!face_condition(&c));
        assert_eq!(face_violations(&c).len(), 2);
    }

    #[test]
    fn shrunk_quadrants_are_not_a_cover() {
        let a = q(2, 5);
        let b = q(3, 5);
        let boxes = vec![
            bx(&[qi(0), qi(0)], &[a.clone(), a.clone()]),
            bx(&[b.clone(), qi(0)], &[qi(1), a.clone()]),
            bx(&[qi(0), b.clone()], &[a.clone(), qi(1)]),
            bx(&[b.clone(), b.clone()], &[qi(1), qi(1)]),
        ];
        let e = BoxCover::from_boxes(2, boxes).unwrap_err();
        assert!(e.to_string().contains("not a cover"));
    }

    #[test]
    fn quadrants_meet_in_four() {
        let h = q(1, 2);
        let boxes = vec![
            bx(&[qi(0), qi(0)], &[h.clone(), h.clone()]),
            bx(&[h.clone(), qi(0)], &[qi(1), h.clone()]),
            bx(&[qi(0), h.clone()], &[h.clone(), qi(1)]),
            bx(&[h.clone(), h.clone()], &[qi(1), qi(1)]),
        ];
        let c = BoxCover::from_boxes(2, boxes).unwrap();
        let r = order_report(&c, Semantics::Closed).unwrap();
        assert_eq!(r.order, 3);
        assert_eq!(r.witness, vec![h.clone(), h]);
    }

    #[test]
    fn bricks_have_order_n() {
        for n in 1..=3 {
            let c = brick_cover(n, &q(1, 4)).unwrap();
            assert_eq!(exact_order(&c).unwrap(), n, "n = {n}");
            assert!(face_condition(&c));
            assert!(c.mesh_squared() <= q(1, 16));
            assert_eq!(order_report(&c, Semantics::Open).unwrap().order, n);
        }
        let c = brick_cover(1, &q(1, 2)).unwrap();
        assert_eq!(exact_order(&c).unwrap(), 1);
        assert!(brick_cover(2, &qi(1)).is_err());
        assert!(brick_cover(0, &q(1, 2)).is_err());
    }

    #[test]
    fn exhaustive_small_cases() {
        assert_eq!(exhaustive_min_order(1, 4, 3).unwrap().min_order, 1);
        assert_eq!(exhaustive_min_order(2, 2, 4).unwrap().min_order, 3);
        assert_eq!(exhaustive_min_order(2, 3, 4).unwrap().min_order, 2);
        let e = exhaustive_min_order(1, 4, 1).unwrap_err();
        assert!(e.to_string().contains("no admissible cover"));
        assert!(matches!(exhaustive_min_order_capped(2, 8, 6, 1000), Err(Error::Budget(_))));
    }

    #[test]
    fn witness_on_fixture() {
        let c = punctured_square_fixture();
        assert_eq!(exact_order(&c).unwrap(), 1);
        let r = lebesgue_witness(&c, 64, 1).unwrap();
        assert!(r.min_displacement > 1e-6, "{}", r.min_displacement);
        assert_eq!(r.evaluated + r.skipped, 64 * 64);
        assert!(r.omega_clearance > 1e-9);
    }

    #[test]
    fn witness_refuses_bricks() {
        let c = brick_cover(2, &q(1, 2)).unwrap();
        let e = lebesgue_witness(&c, 8, 0).unwrap_err();
        assert!(e.to_string().contains("not refutable"));
    }

    #[test]
    fn affine_distance() {
        let d = dist_to_affine_hull(&[0.5, 0.5], &[vec![0.0, 0.0], vec![1.0, 0.0]]);
        assert!((d - 0.5).abs() < 1e-12);
        let d = dist_to_affine_hull(&[0.5, 0.5], &[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(d < 1e-12);
    }
}

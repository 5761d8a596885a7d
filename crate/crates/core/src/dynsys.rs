//! Finite permutation systems: markers, the random-walk construction of
//! Rokhlin towers, periodic dimension, and separated index sets.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Map, Value};

use crate::cover::json_id;
use crate::error::{Error, Result};
use crate::rational::{q_to_json, Q};

/// A bijection of a finite set.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePermSystem {
    ids: Vec<String>,
    t: Vec<usize>,
    inv: Vec<usize>,
}

impl FinitePermSystem {
    pub fn new(ids: Vec<String>, t: Vec<usize>) -> Result<Self> {
        if ids.len() != t.len() {
            return Err(Error::input("map length differs from the number of points"));
        }
        let mut inv = vec![usize::MAX; t.len()];
        for (x, &y) in t.iter().enumerate() {
            if y >= t.len() {
                return Err(Error::input(format!("T({}) is not a point", ids[x])));
            }
            if inv[y] != usize::MAX {
                return Err(Error::input(format!("T is not a bijection: {} has two preimages", ids[y])));
            }
            inv[y] = x;
        }
        let mut seen = BTreeSet::new();
        for id in &ids {
            if !seen.insert(id) {
                return Err(Error::input(format!("duplicate point {id:?}")));
            }
        }
        Ok(FinitePermSystem { ids, t, inv })
    }

    /// Disjoint cycles with the given lengths; points are numbered in
    /// order and `T` advances along each cycle.
    pub fn from_cycle_lengths(lengths: &[usize]) -> Result<Self> {
        let mut t = Vec::new();
        for &len in lengths {
            if len == 0 {
                return Err(Error::input("cycle of length 0"));
            }
            let base = t.len();
            t.extend((0..len).map(|i| base + (i + 1) % len));
        }
        let ids = (0..t.len()).map(|i| i.to_string()).collect();
        FinitePermSystem::new(ids, t)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, lengths: &[usize]) -> Result<Self> {
        let total: usize = lengths.iter().sum();
        let mut labels: Vec<usize> = (0..total).collect();
        labels.shuffle(rng);
        let mut t = vec![0; total];
        let mut k = 0;
        for &len in lengths {
            let cyc = &labels[k..k + len];
            for i in 0..len {
                t[cyc[i]] = cyc[(i + 1) % len];
            }
            k += len;
        }
        let ids = (0..total).map(|i| i.to_string()).collect();
        FinitePermSystem::new(ids, t)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn t(&self, x: usize) -> usize {
        self.t[x]
    }

    pub fn t_inv(&self, x: usize) -> usize {
        self.inv[x]
    }

    /// `T^i x` for any integer `i`.
    pub fn iterate(&self, mut x: usize, i: i64) -> usize {
        if i >= 0 {
            for _ in 0..i {
                x = self.t[x];
            }
        } else {
            for _ in 0..(-i) {
                x = self.inv[x];
            }
        }
        x
    }

    /// Cycles, each starting at its smallest point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for s in 0..self.len() {
            if seen[s] {
                continue;
            }
            let mut c = Vec::new();
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                c.push(x);
                x = self.t[x];
            }
            out.push(c);
        }
        out
    }

    pub fn image(&self, set: &BTreeSet<usize>, i: i64) -> BTreeSet<usize> {
        set.iter().map(|&x| self.iterate(x, i)).collect()
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (x, &y) in self.t.iter().enumerate() {
            m.insert(self.ids[x].clone(), json!(self.ids[y]));
        }
        json!({"points": self.ids, "T": Value::Object(m)})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let ids: Vec<String> = v
            .get("points")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::input("system: missing \"points\""))?
            .iter()
            .map(json_id)
            .collect::<Result<_>>()?;
        let map = v
            .get("T")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::input("system: missing \"T\" object"))?;
        let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut t = Vec::with_capacity(ids.len());
        for id in &ids {
            let y = json_id(
                map.get(id)
                    .ok_or_else(|| Error::input(format!("T is not defined at {id:?}")))?,
            )?;
            t.push(
                *index
                    .get(y.as_str())
                    .ok_or_else(|| Error::input(format!("T({id}) = {y:?} is not a point")))?,
            );
        }
        FinitePermSystem::new(ids, t)
    }

    pub fn resolve(&self, names: &[String]) -> Result<BTreeSet<usize>> {
        names
            .iter()
            .map(|n| self.index_of(n).ok_or_else(|| Error::input(format!("unknown point {n:?}"))))
            .collect()
    }
}

/// `F` is an `n`-marker: `F` and `T^i F` are disjoint for `1 <= i < n`,
/// and finitely many forward images of `F` cover the system.
pub fn is_marker(sys: &FinitePermSystem, f: &BTreeSet<usize>, n: usize) -> Result<bool> {
    if n == 0 {
        return Err(Error::input("n must be at least 1"));
    }
    if f.iter().any(|&x| x >= sys.len()) {
        return Err(Error::input("marker point outside the system"));
    }
    let mut img: Vec<usize> = f.iter().copied().collect();
    for _ in 1..n {
        for x in img.iter_mut() {
            *x = sys.t(*x);
        }
        if img.iter().any(|x| f.contains(x)) {
            return Ok(false);
        }
    }
    Ok(marker_return_bound(sys, f).is_some())
}

/// Smallest `m` with `T F ∪ ... ∪ T^m F` equal to the whole system.
pub fn marker_return_bound(sys: &FinitePermSystem, f: &BTreeSet<usize>) -> Option<usize> {
    let mut worst = 0;
    for c in sys.cycles() {
        let len = c.len();
        let marks: Vec<usize> = (0..len).filter(|&i| f.contains(&c[i])).collect();
        if marks.is_empty() {
            return None;
        }
        // gap from the previous mark, counted forwards
        for w in 0..marks.len() {
            let a = marks[w];
            let b = marks[(w + 1) % marks.len()];
            let gap = if marks.len() == 1 { len } else { (b + len - a) % len };
            worst = worst.max(gap);
        }
    }
    Some(worst)
}

/// Greedy marker: on each cycle, marks separated by gaps in `[n, 2n-1]`.
/// `None` when some cycle is shorter than `n`.
pub fn find_marker(sys: &FinitePermSystem, n: usize) -> Option<BTreeSet<usize>> {
    if n == 0 {
        return None;
    }
    let mut f = BTreeSet::new();
    for c in sys.cycles() {
        let len = c.len();
        if len < n {
            return None;
        }
        let k = len / n;
        let extra = len - k * n;
        let mut pos = 0;
        for j in 0..k {
            f.insert(c[pos]);
            pos += n + usize::from(j < extra);
        }
    }
    Some(f)
}

/// Stopping probabilities `rho: X -> [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StopRate {
    pub rho: Vec<Q>,
}

impl StopRate {
    pub fn indicator(sys: &FinitePermSystem, f: &BTreeSet<usize>) -> Self {
        StopRate {
            rho: (0..sys.len())
                .map(|x| if f.contains(&x) { Q::one() } else { Q::zero() })
                .collect(),
        }
    }

    /// One on `F`, the constant `level` on `U \ F`, zero elsewhere.
    pub fn ramp(sys: &FinitePermSystem, f: &BTreeSet<usize>, u: &BTreeSet<usize>, level: &Q) -> Self {
        StopRate {
            rho: (0..sys.len())
                .map(|x| {
                    if f.contains(&x) {
                        Q::one()
                    } else if u.contains(&x) {
                        level.clone()
                    } else {
                        Q::zero()
                    }
                })
                .collect(),
        }
    }

    /// One on `F`; on `U \ F` values rise linearly `1/(k+1), ..., k/(k+1)`.
    pub fn linear_ramp(sys: &FinitePermSystem, f: &BTreeSet<usize>, u: &BTreeSet<usize>) -> Self {
        let rest: Vec<usize> = u.iter().copied().filter(|x| !f.contains(x)).collect();
        let den = BigInt::from(rest.len() + 1);
        let mut rho = StopRate::indicator(sys, f).rho;
        for (j, &x) in rest.iter().enumerate() {
            rho[x] = Q::new(BigInt::from(j + 1), den.clone());
        }
        StopRate { rho }
    }

    pub fn validate(&self, sys: &FinitePermSystem) -> Result<()> {
        if self.rho.len() != sys.len() {
            return Err(Error::input("stop rate has the wrong length"));
        }
        if self.rho.iter().any(|r| r.is_negative() || *r > Q::one()) {
            return Err(Error::input("stop rate must take values in [0, 1]"));
        }
        Ok(())
    }
}

/// Expected number of steps `f` of the backward walk that stops at `x`
/// with probability `rho(x)`: `f(x) = 1 + (1 - rho(x)) f(T^{-1} x)`,
/// solved exactly cycle by cycle.
pub fn rokhlin_expected_steps(sys: &FinitePermSystem, rate: &StopRate) -> Result<Vec<Q>> {
    rate.validate(sys)?;
    let mut f = vec![Q::zero(); sys.len()];
    for c in sys.cycles() {
        let len = c.len();
        // f(c_i) = a + b f(c_0) after walking forward from c_0
        let mut a = Q::zero();
        let mut b = Q::one();
        for i in 1..=len {
            let x = c[i % len];
            let keep = Q::one() - &rate.rho[x];
            a = Q::one() + &keep * &a;
            b = &keep * &b;
        }
        let denom = Q::one() - &b;
        if denom.is_zero() {
            return Err(Error::pre(format!(
                "stop rate vanishes on the whole cycle through {}",
                sys.ids[c[0]]
            )));
        }
        let f0 = a / denom;
        f[c[0]] = f0.clone();
        let mut prev = f0;
        for &x in &c[1..] {
            let v = Q::one() + (Q::one() - &rate.rho[x]) * &prev;
            f[x] = v.clone();
            prev = v;
        }
    }
    Ok(f)
}

/// Points where `f` fails to grow by one along the orbit.
pub fn rokhlin_defect(sys: &FinitePermSystem, f: &[Q]) -> BTreeSet<usize> {
    (0..sys.len())
        .filter(|&x| f[sys.t(x)] != &f[x] + Q::one())
        .collect()
}

#[derive(Debug, Clone)]
pub struct RokhlinReport {
    pub f: Vec<Q>,
    pub defect: BTreeSet<usize>,
    /// The defect lies in `T^{-1} U`.
    pub contained: bool,
    /// `E ∩ T^i E` is empty for `1 <= i < n`.
    pub separated: bool,
}

impl RokhlinReport {
    pub fn holds(&self) -> bool {
        self.contained && self.separated
    }

    pub fn to_json(&self, sys: &FinitePermSystem) -> Value {
        let mut f = Map::new();
        for (x, v) in self.f.iter().enumerate() {
            f.insert(sys.ids[x].clone(), q_to_json(v));
        }
        json!({
            "f": Value::Object(f),
            "defect": self.defect.iter().map(|&x| sys.ids[x].clone()).collect::<Vec<_>>(),
            "defect_in_preimage_of_U": self.contained,
            "defect_separated": self.separated,
        })
    }
}

/// Checks the hypotheses (`F ⊆ U`, `U` disjoint from `T^i U` for
/// `0 < i < n`, `F` an `n`-marker) one by one, then builds `f` and tests
/// the two conclusions. The walk only restarts where the next point stops
/// it, so the defect sits in the preimage `T^{-1} U`.
pub fn rokhlin_property_check(
    sys: &FinitePermSystem,
    n: usize,
    f_set: &BTreeSet<usize>,
    u: &BTreeSet<usize>,
    rate: Option<&StopRate>,
) -> Result<RokhlinReport> {
    if n == 0 {
        return Err(Error::input("n must be at least 1"));
    }
    if !f_set.is_subset(u) {
        return Err(Error::pre("F is not contained in U"));
    }
    for i in 1..n as i64 {
        if !sys.image(u, i).is_disjoint(u) {
            return Err(Error::pre(format!("U meets T^{i} U")));
        }
    }
    if !is_marker(sys, f_set, n)? {
        return Err(Error::pre(format!("F is not a {n}-marker")));
    }
    let own;
    let rate = match rate {
        Some(r) => {
            for x in 0..sys.len() {
                let inside = u.contains(&x);
                if f_set.contains(&x) && !r.rho[x].is_one() {
                    return Err(Error::pre("stop rate must be 1 on F"));
                }
                if !inside && !r.rho[x].is_zero() {
                    return Err(Error::pre("stop rate must vanish outside U"));
                }
            }
            r
        }
        None => {
            own = StopRate::indicator(sys, f_set);
            &own
        }
    };
    let f = rokhlin_expected_steps(sys, rate)?;
    let defect = rokhlin_defect(sys, &f);
    let pre_u = sys.image(u, -1);
    let contained = defect.is_subset(&pre_u);
    let separated = (1..n as i64).all(|i| sys.image(&defect, i).is_disjoint(&defect));
    Ok(RokhlinReport { f, defect, contained, separated })
}

/// Linear growth rule for periodic dimension: `dim H_k = k d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthRule {
    Linear { d: usize },
}

impl GrowthRule {
    pub fn parse(s: &str) -> Result<Self> {
        let d = s
            .strip_prefix("linear:d=")
            .ok_or_else(|| Error::input(format!("unknown rule {s:?}")))?;
        Ok(GrowthRule::Linear {
            d: d.parse().map_err(|_| Error::input(format!("bad rule parameter in {s:?}")))?,
        })
    }

    fn dim(&self, k: usize) -> usize {
        match self {
            GrowthRule::Linear { d } => k * d,
        }
    }
}

/// Dimensions of the sets `H_k` of points of least period `k`, either
/// tabulated or by rule. Missing table entries mean `H_k` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicSystemDescriptor {
    pub dims: BTreeMap<usize, usize>,
    pub rule: Option<GrowthRule>,
}

impl SymbolicSystemDescriptor {
    pub fn full_shift(d: usize) -> Self {
        SymbolicSystemDescriptor { dims: BTreeMap::new(), rule: Some(GrowthRule::Linear { d }) }
    }

    pub fn table(dims: BTreeMap<usize, usize>) -> Self {
        SymbolicSystemDescriptor { dims, rule: None }
    }

    pub fn dim_h(&self, k: usize) -> Option<usize> {
        match self.rule {
            Some(r) => Some(r.dim(k)),
            None => self.dims.get(&k).copied(),
        }
    }

    fn known_up_to(&self) -> Option<usize> {
        match self.rule {
            Some(_) => None,
            None => Some(self.dims.keys().next_back().copied().unwrap_or(0)),
        }
    }

    /// The same system viewed under `T^m`: a point of least period `j`
    /// has least period `j / gcd(j, m)` for the power.
    pub fn power(&self, m: usize, k_max: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::input("power must be positive"));
        }
        let need = m
            .checked_mul(k_max)
            .ok_or_else(|| Error::input("m * k_max overflows"))?;
        if let Some(top) = self.known_up_to() {
            if top < need {
                return Err(Error::pre(format!(
                    "reindexing rule missing: periods known up to {top}, need {need}"
                )));
            }
        }
        let mut dims = BTreeMap::new();
        for j in 1..=need {
            let k = j / j.gcd(&m);
            if k > k_max {
                continue;
            }
            if let Some(d) = self.dim_h(j) {
                let e = dims.entry(k).or_insert(d);
                *e = (*e).max(d);
            }
        }
        Ok(SymbolicSystemDescriptor::table(dims))
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (k, d) in &self.dims {
            m.insert(k.to_string(), json!(d));
        }
        let mut v = json!({"dims_H": Value::Object(m)});
        if let Some(GrowthRule::Linear { d }) = self.rule {
            v["rule"] = json!(format!("linear:d={d}"));
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let mut dims = BTreeMap::new();
        if let Some(m) = v.get("dims_H") {
            let m = m
                .as_object()
                .ok_or_else(|| Error::input("descriptor: \"dims_H\" must be an object"))?;
            for (k, d) in m {
                let k: usize = k
                    .parse()
                    .ok()
                    .filter(|&k| k > 0)
                    .ok_or_else(|| Error::input(format!("descriptor: bad period {k:?}")))?;
                let d = d
                    .as_u64()
                    .ok_or_else(|| Error::input("descriptor: dimensions must be non-negative integers"))?;
                dims.insert(k, d as usize);
            }
        }
        let rule = match v.get("rule") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(GrowthRule::parse(s)?),
            Some(other) => return Err(Error::input(format!("descriptor: bad rule {other}"))),
        };
        Ok(SymbolicSystemDescriptor { dims, rule })
    }
}

/// `max_{k <= k_max} dim(P_k) / k`, where `P_k` collects the points of
/// period at most `k`.
pub fn perdim(descr: &SymbolicSystemDescriptor, k_max: usize) -> Result<Q> {
    if k_max == 0 {
        return Err(Error::input("k_max must be positive"));
    }
    let mut best = Q::zero();
    let mut running: Option<usize> = None;
    for k in 1..=k_max {
        if let Some(d) = descr.dim_h(k) {
            running = Some(running.map_or(d, |r| r.max(d)));
        }
        if let Some(r) = running {
            let v = Q::new(BigInt::from(r), BigInt::from(k));
            if v > best {
                best = v;
            }
        }
    }
    Ok(best)
}

/// `(perdim` of the `m`-th power, `m * perdim)`; the first never exceeds
/// the second.
pub fn perdim_power_bound(descr: &SymbolicSystemDescriptor, m: usize, k_max: usize) -> Result<(Q, Q)> {
    let p = descr.power(m, k_max)?;
    let lhs = perdim(&p, k_max)?;
    let rhs = perdim(descr, k_max.checked_mul(m).expect("checked in power"))? * Q::from_integer(BigInt::from(m));
    Ok((lhs, rhs))
}

/// How two points `x`, `y` relate for [`distinct_indices`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitRelation {
    DistinctOrbits,
    /// `y = T^offset x`; `period` is the least period of `x` if finite.
    SameOrbit { offset: i64, period: Option<u64> },
}

/// `2n + 1` indices `I` such that the points `T^i x`, `T^i y` for `i` in
/// `I` are pairwise distinct.
pub fn distinct_indices(rel: OrbitRelation, n: usize) -> Result<Vec<i64>> {
    let size = 2 * n + 1;
    match rel {
        OrbitRelation::DistinctOrbits => Ok((0..size as i64).collect()),
        OrbitRelation::SameOrbit { offset, period: None } => {
            if offset == 0 {
                return Err(Error::input("x and y coincide"));
            }
            let step = offset.abs() + 1;
            Ok((0..size as i64).map(|k| k * step).collect())
        }
        OrbitRelation::SameOrbit { offset, period: Some(p) } => {
            if p <= 6 * n as u64 {
                return Err(Error::pre(format!(
                    "hypothesis P_{{6n}}=∅ violated: period {p} <= {}",
                    6 * n
                )));
            }
            let p = p as i64;
            let l = offset.rem_euclid(p);
            if l == 0 {
                return Err(Error::input("x and y coincide"));
            }
            // each chosen i rules out i, i + l and i - l modulo p
            let mut banned = vec![false; p as usize];
            let mut out = Vec::with_capacity(size);
            let mut cand = 0i64;
            while out.len() < size {
                while banned[cand as usize] {
                    cand += 1;
                }
                out.push(cand);
                for s in [0, l, p - l] {
                    banned[((cand + s) % p) as usize] = true;
                }
            }
            Ok(out)
        }
    }
}

/// Replays the indices on an explicit model of the orbit and checks that
/// all `2(2n + 1)` points differ.
pub fn replay_distinct(rel: OrbitRelation, idx: &[i64]) -> bool {
    let mut seen: BTreeSet<(u8, i64)> = BTreeSet::new();
    match rel {
        OrbitRelation::DistinctOrbits => {
            for &i in idx {
                seen.insert((0, i));
                seen.insert((1, i));
            }
        }
        OrbitRelation::SameOrbit { offset, period } => {
            let span = idx.iter().map(|i| i.abs()).max().unwrap_or(0) + offset.abs() + 1;
            let len = period.map_or(2 * span as usize + 1, |p| p as usize);
            let sys = FinitePermSystem::from_cycle_lengths(&[len]).expect("positive length");
            let x = 0usize;
            let y = sys.iterate(x, offset);
            for &i in idx {
                seen.insert((0, sys.iterate(x, i) as i64));
                seen.insert((0, sys.iterate(y, i) as i64));
            }
        }
    }
    seen.len() == 2 * idx.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn three_cycle_walk() {
        let sys = FinitePermSystem::from_cycle_lengths(&[3]).unwrap();
        let f_set = set(&[0]);
        let rate = StopRate::indicator(&sys, &f_set);
        let f = rokhlin_expected_steps(&sys, &rate).unwrap();
        assert_eq!(f, vec![qi(1), qi(2), qi(3)]);
        let e = rokhlin_defect(&sys, &f);
        assert_eq!(e, set(&[2]));
        assert!(is_marker(&sys, &f_set, 3).unwrap());
        let r = rokhlin_property_check(&sys, 3, &f_set, &f_set, None).unwrap();
        assert!(r.holds());
    }

    #[test]
    fn zero_rate_cycle_rejected() {
        let sys = FinitePermSystem::from_cycle_lengths(&[2, 3]).unwrap();
        let rate = StopRate::indicator(&sys, &set(&[0]));
        assert!(rokhlin_expected_steps(&sys, &rate).is_err());
    }

    #[test]
    fn marker_checks() {
        let sys = FinitePermSystem::from_cycle_lengths(&[7, 4]).unwrap();
        assert!(find_marker(&sys, 5).is_none());
        let f = find_marker(&sys, 3).unwrap();
        assert!(is_marker(&sys, &f, 3).unwrap());
        assert!(!is_marker(&sys, &set(&[0, 1]), 2).unwrap());
        // no mark on the second cycle
        assert!(!is_marker(&sys, &set(&[0]), 2).unwrap());
    }

    #[test]
    fn ramp_rates() {
        let sys = FinitePermSystem::from_cycle_lengths(&[6]).unwrap();
        let f = set(&[0]);
        let u = set(&[0, 3]);
        let r = rokhlin_property_check(&sys, 3, &f, &u, Some(&StopRate::ramp(&sys, &f, &u, &q(1, 2)))).unwrap();
        assert!(r.holds());
        let lr = StopRate::linear_ramp(&sys, &f, &u);
        assert_eq!(lr.rho[3], q(1, 2));
        assert!(rokhlin_property_check(&sys, 3, &f, &u, Some(&lr)).unwrap().holds());
        let bad_u = set(&[0, 1]);
        assert!(rokhlin_property_check(&sys, 3, &f, &bad_u, None).is_err());
    }

    #[test]
    fn perdim_examples() {
        let d: BTreeMap<usize, usize> = [(1, 3), (2, 0)].into_iter().collect();
        let descr = SymbolicSystemDescriptor::table(d);
        assert_eq!(perdim(&descr, 2).unwrap(), qi(3));
        for d in 1..=3 {
            let fs = SymbolicSystemDescriptor::full_shift(d);
            assert_eq!(perdim(&fs, 12).unwrap(), qi(d as i64));
        }
        let (lhs, rhs) = perdim_power_bound(&SymbolicSystemDescriptor::full_shift(1), 3, 10).unwrap();
        assert_eq!(rhs, qi(3));
        assert_eq!(lhs, qi(3));
        assert!(perdim_power_bound(&descr, 3, 2).is_err());
    }

    #[test]
    fn index_examples() {
        let idx = distinct_indices(OrbitRelation::SameOrbit { offset: 1, period: None }, 1).unwrap();
        assert_eq!(idx, vec![0, 2, 4]);
        assert_eq!(distinct_indices(OrbitRelation::DistinctOrbits, 2).unwrap(), vec![0, 1, 2, 3, 4]);
        let rel = OrbitRelation::SameOrbit { offset: 3, period: Some(13) };
        let idx = distinct_indices(rel, 2).unwrap();
        assert_eq!(idx.len(), 5);
        assert!(replay_distinct(rel, &idx));
        let e = distinct_indices(OrbitRelation::SameOrbit { offset: 1, period: Some(12) }, 2).unwrap_err();
        assert!(e.to_string().contains("P_{6n}=∅"));
    }

    #[test]
    fn json_roundtrip() {
        let sys = FinitePermSystem::from_cycle_lengths(&[2, 3]).unwrap();
        assert_eq!(FinitePermSystem::from_json(&sys.to_json()).unwrap(), sys);
        let d = SymbolicSystemDescriptor::full_shift(2);
        assert_eq!(SymbolicSystemDescriptor::from_json(&d.to_json()).unwrap(), d);
    }
}

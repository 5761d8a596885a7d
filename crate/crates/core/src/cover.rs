//! Finite ground sets and open covers of them.
//!
//! A finite set carries the discrete topology, so every subset is open and a
//! cover is just a named family of non-empty subsets whose union is the
//! whole set. Points are addressed by index; ids are kept for I/O.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::rational::{q_from_json, q_to_json, Q};

#[derive(Debug, Clone, PartialEq)]
pub struct GroundSet {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    metric: Option<Vec<Vec<Q>>>,
}

impl GroundSet {
    pub fn new<S: Into<String>>(ids: impl IntoIterator<Item = S>) -> Result<Self> {
        let ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::input(format!("duplicate point id {id:?}")));
            }
        }
        Ok(GroundSet { ids, index, metric: None })
    }

    /// Attaches a distance table indexed like `ids`.
    pub fn with_metric(mut self, metric: Vec<Vec<Q>>) -> Result<Self> {
        let n = self.ids.len();
        if metric.len() != n || metric.iter().any(|r| r.len() != n) {
            return Err(Error::input(format!("metric must be {n}x{n}")));
        }
        for i in 0..n {
            if !metric[i][i].is_zero() {
                return Err(Error::input(format!("metric: d({0},{0}) != 0", self.ids[i])));
            }
            for j in 0..n {
                if metric[i][j].is_negative() {
                    return Err(Error::input("metric has a negative entry"));
                }
                if metric[i][j] != metric[j][i] {
                    return Err(Error::input(format!(
                        "metric is not symmetric at ({}, {})",
                        self.ids[i], self.ids[j]
                    )));
                }
            }
        }
        self.metric = Some(metric);
        Ok(self)
    }

    /// Integers `0..n` as ids.
    pub fn range(n: usize) -> Self {
        GroundSet::new((0..n).map(|i| i.to_string())).expect("distinct ids")
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn metric(&self) -> Option<&Vec<Vec<Q>>> {
        self.metric.as_ref()
    }

    pub fn distance(&self, i: usize, j: usize) -> Option<&Q> {
        self.metric.as_ref().map(|m| &m[i][j])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    ground: Arc<GroundSet>,
    names: Vec<String>,
    sets: Vec<Vec<usize>>,
}

impl Cover {
    /// Builds a cover from named index sets.
    ///
    /// Members are sorted by name. A set that repeats an earlier one is
    /// dropped, so the family has no duplicates.
    pub fn new(ground: Arc<GroundSet>, members: Vec<(String, Vec<usize>)>) -> Result<Self> {
        let mut by_name: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        for (name, pts) in members {
            if pts.is_empty() {
                return Err(Error::input(format!("cover member {name:?} is empty")));
            }
            if let Some(&p) = pts.iter().find(|&&p| p >= ground.len()) {
                return Err(Error::input(format!("point index {p} outside the ground set")));
            }
            if by_name.insert(name.clone(), pts.into_iter().collect()).is_some() {
                return Err(Error::input(format!("duplicate member name {name:?}")));
            }
        }
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut names = Vec::new();
        let mut sets = Vec::new();
        for (name, pts) in by_name {
            let v: Vec<usize> = pts.into_iter().collect();
            if seen.insert(v.clone()) {
                names.push(name);
                sets.push(v);
            }
        }
        let mut hit = vec![false; ground.len()];
        for s in &sets {
            for &p in s {
                hit[p] = true;
            }
        }
        if let Some(p) = hit.iter().position(|h| !h) {
            return Err(Error::input(format!(
                "not a cover: point {:?} lies in no member",
                ground.id(p)
            )));
        }
        Ok(Cover { ground, names, sets })
    }

    /// Same as [`Cover::new`] but with point ids instead of indices.
    pub fn from_ids<N, I, S>(ground: Arc<GroundSet>, members: impl IntoIterator<Item = (N, I)>) -> Result<Self>
    where
        N: Into<String>,
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out = Vec::new();
        for (name, ids) in members {
            let mut pts = Vec::new();
            for id in ids {
                let id = id.as_ref();
                let p = ground
                    .index_of(id)
                    .ok_or_else(|| Error::input(format!("unknown point id {id:?}")))?;
                pts.push(p);
            }
            out.push((name.into(), pts));
        }
        Cover::new(ground, out)
    }

    /// Anonymous members named `U1`, `U2`, ...
    pub fn from_sets(ground: Arc<GroundSet>, sets: Vec<Vec<usize>>) -> Result<Self> {
        let width = sets.len().to_string().len();
        let members = sets
            .into_iter()
            .enumerate()
            .map(|(i, s)| (format!("U{:0width$}", i + 1), s))
            .collect();
        Cover::new(ground, members)
    }

    pub fn ground(&self) -> &Arc<GroundSet> {
        &self.ground
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn set(&self, i: usize) -> &[usize] {
        &self.sets[i]
    }

    pub fn member_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Indices of the members containing point `p`.
    pub fn members_at(&self, p: usize) -> Vec<usize> {
        (0..self.sets.len())
            .filter(|&i| self.sets[i].binary_search(&p).is_ok())
            .collect()
    }

    /// Number of members containing `p`, minus one.
    pub fn order_at(&self, p: usize) -> Result<usize> {
        if p >= self.ground.len() {
            return Err(Error::input(format!("point index {p} outside the ground set")));
        }
        Ok(self.multiplicities()[p] - 1)
    }

    pub fn order_at_id(&self, id: &str) -> Result<usize> {
        let p = self
            .ground
            .index_of(id)
            .ok_or_else(|| Error::input(format!("point {id:?} not in the ground set")))?;
        self.order_at(p)
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        let mut m = vec![0; self.ground.len()];
        for s in &self.sets {
            for &p in s {
                m[p] += 1;
            }
        }
        m
    }

    pub fn order(&self) -> usize {
        self.multiplicities().into_iter().max().unwrap_or(1).saturating_sub(1)
    }

    /// Max pairwise distance inside any member.
    pub fn mesh(&self) -> Result<Q> {
        let metric = self
            .ground
            .metric()
            .ok_or_else(|| Error::pre("mesh needs a metric on the ground set"))?;
        let mut best = Q::zero();
        for s in &self.sets {
            for (k, &a) in s.iter().enumerate() {
                for &b in &s[k + 1..] {
                    if metric[a][b] > best {
                        best = metric[a][b].clone();
                    }
                }
            }
        }
        Ok(best)
    }

    pub fn to_json(&self) -> Value {
        let mut sets = Map::new();
        for (n, s) in self.names.iter().zip(&self.sets) {
            let ids: Vec<Value> = s.iter().map(|&p| json!(self.ground.id(p))).collect();
            sets.insert(n.clone(), Value::Array(ids));
        }
        let mut obj = Map::new();
        obj.insert("ground".into(), json!(self.ground.ids()));
        if let Some(m) = self.ground.metric() {
            let rows: Vec<Value> = m
                .iter()
                .map(|r| Value::Array(r.iter().map(q_to_json).collect()))
                .collect();
            obj.insert("metric".into(), Value::Array(rows));
        }
        obj.insert("sets".into(), Value::Object(sets));
        Value::Object(obj)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let ground_v = v
            .get("ground")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::input("cover: missing \"ground\" array"))?;
        let ids: Vec<String> = ground_v.iter().map(json_id).collect::<Result<_>>()?;
        let mut ground = GroundSet::new(ids)?;
        if let Some(m) = v.get("metric") {
            let rows = m
                .as_array()
                .ok_or_else(|| Error::input("cover: \"metric\" must be an array of rows"))?;
            let mut table = Vec::with_capacity(rows.len());
            for r in rows {
                let r = r
                    .as_array()
                    .ok_or_else(|| Error::input("cover: metric row must be an array"))?;
                table.push(r.iter().map(q_from_json).collect::<Result<Vec<_>>>()?);
            }
            ground = ground.with_metric(table)?;
        }
        let sets = v
            .get("sets")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::input("cover: missing \"sets\" object"))?;
        let ground = Arc::new(ground);
        let mut members = Vec::new();
        for (name, pts) in sets {
            let pts = pts
                .as_array()
                .ok_or_else(|| Error::input(format!("cover: member {name:?} must be an array")))?;
            let mut idx = Vec::new();
            for p in pts {
                let id = json_id(p)?;
                idx.push(
                    ground
                        .index_of(&id)
                        .ok_or_else(|| Error::input(format!("member {name:?} uses unknown point {id:?}")))?,
                );
            }
            members.push((name.clone(), idx));
        }
        Cover::new(ground, members)
    }
}

/// Point ids may be written as JSON strings or integers.
pub(crate) fn json_id(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(Error::input(format!("point id must be a string or number, got {other}"))),
    }
}

fn same_ground(a: &Cover, b: &Cover) -> Result<()> {
    if Arc::ptr_eq(&a.ground, &b.ground) || a.ground.ids == b.ground.ids {
        Ok(())
    } else {
        Err(Error::input("covers live on different ground sets"))
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
    }
    true
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Whether every member of `beta` sits inside some member of `alpha`.
pub fn refines(beta: &Cover, alpha: &Cover) -> Result<bool> {
    same_ground(beta, alpha)?;
    Ok(beta
        .sets
        .iter()
        .all(|b| alpha.sets.iter().any(|a| is_subset(b, a))))
}

/// Common refinement by pairwise intersections; empty ones are dropped.
pub fn join(alpha: &Cover, beta: &Cover) -> Result<Cover> {
    same_ground(alpha, beta)?;
    let mut members = Vec::new();
    for (na, a) in alpha.names.iter().zip(&alpha.sets) {
        for (nb, b) in beta.names.iter().zip(&beta.sets) {
            let c = intersect(a, b);
            if !c.is_empty() {
                members.push((format!("{na}&{nb}"), c));
            }
        }
    }
    Cover::new(alpha.ground.clone(), members)
}

/// Preimage cover along `f`, where `f[i]` is the image in `cover`'s ground
/// of point `i` of `domain`.
pub fn pullback(cover: &Cover, domain: Arc<GroundSet>, f: &[usize]) -> Result<Cover> {
    if f.len() != domain.len() {
        return Err(Error::input(format!(
            "map defined on {} points, domain has {}",
            f.len(),
            domain.len()
        )));
    }
    if f.iter().any(|&y| y >= cover.ground.len()) {
        return Err(Error::input("map sends a point outside the target ground set"));
    }
    let mut members = Vec::new();
    for (name, s) in cover.names.iter().zip(&cover.sets) {
        let pre: Vec<usize> = (0..f.len()).filter(|&i| s.binary_search(&f[i]).is_ok()).collect();
        if !pre.is_empty() {
            members.push((name.clone(), pre));
        }
    }
    Cover::new(domain, members)
}

/// [`pullback`] with the map given on ids. Every domain point needs an image.
pub fn pullback_ids(cover: &Cover, domain: Arc<GroundSet>, f: &HashMap<String, String>) -> Result<Cover> {
    let mut idx = Vec::with_capacity(domain.len());
    for id in domain.ids() {
        let y = f
            .get(id)
            .ok_or_else(|| Error::input(format!("map is not total: no image for {id:?}")))?;
        idx.push(
            cover
                .ground
                .index_of(y)
                .ok_or_else(|| Error::input(format!("image {y:?} of {id:?} is not in the target")))?,
        );
    }
    pullback(cover, domain, &idx)
}

/// Given `gamma` refining `alpha` and a choice `phi` of a containing
/// `alpha` member for each `gamma` member, merges the fibres of `phi`.
/// The result refines `alpha` and has one member per used `alpha` name.
pub fn merge_refinement(alpha: &Cover, gamma: &Cover, phi: &HashMap<String, String>) -> Result<Cover> {
    same_ground(alpha, gamma)?;
    let mut fibres: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (gn, gs) in gamma.names.iter().zip(&gamma.sets) {
        let an = phi
            .get(gn)
            .ok_or_else(|| Error::input(format!("phi has no value on {gn:?}")))?;
        let ai = alpha
            .member_index(an)
            .ok_or_else(|| Error::input(format!("phi({gn}) = {an:?} is not a member of alpha")))?;
        if !is_subset(gs, &alpha.sets[ai]) {
            return Err(Error::input(format!("phi is inconsistent: {gn:?} is not inside {an:?}")));
        }
        fibres.entry(ai).or_default().extend(gs.iter().copied());
    }
    let members = fibres
        .into_iter()
        .map(|(ai, pts)| (alpha.names[ai].clone(), pts.into_iter().collect()))
        .collect();
    Cover::new(alpha.ground.clone(), members)
}

/// A stream of candidate refinements of a fixed cover.
pub trait RefinementSource {
    fn next_refinement(&mut self, alpha: &Cover) -> Option<Cover>;
}

impl<F: FnMut(&Cover) -> Option<Cover>> RefinementSource for F {
    fn next_refinement(&mut self, alpha: &Cover) -> Option<Cover> {
        self(alpha)
    }
}

/// Yields the cover by singletons, once.
#[derive(Debug, Default)]
pub struct Singletons {
    done: bool,
}

impl RefinementSource for Singletons {
    fn next_refinement(&mut self, alpha: &Cover) -> Option<Cover> {
        if self.done {
            return None;
        }
        self.done = true;
        let g = alpha.ground.clone();
        let members = (0..g.len()).map(|p| (format!("{{{}}}", g.id(p)), vec![p])).collect();
        Cover::new(g, members).ok()
    }
}

/// Enumerates the partitions obtained by sending each point to one of the
/// members that contain it, in mixed-radix order.
#[derive(Debug, Default)]
pub struct Assignments {
    counter: Option<Vec<usize>>,
    exhausted: bool,
}

impl RefinementSource for Assignments {
    fn next_refinement(&mut self, alpha: &Cover) -> Option<Cover> {
        if self.exhausted {
            return None;
        }
        let choices: Vec<Vec<usize>> = (0..alpha.ground.len()).map(|p| alpha.members_at(p)).collect();
        let counter = match &mut self.counter {
            None => self.counter.insert(vec![0; choices.len()]),
            Some(c) => {
                let mut k = 0;
                loop {
                    if k == c.len() {
                        self.exhausted = true;
                        return None;
                    }
                    c[k] += 1;
                    if c[k] < choices[k].len() {
                        break;
                    }
                    c[k] = 0;
                    k += 1;
                }
                c
            }
        };
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (p, &c) in counter.iter().enumerate() {
            groups.entry(choices[p][c]).or_default().push(p);
        }
        let members = groups
            .into_iter()
            .map(|(m, pts)| (alpha.names[m].clone(), pts))
            .collect();
        Cover::new(alpha.ground.clone(), members).ok()
    }
}

/// Smallest order among `alpha` and up to `budget` refinements drawn from
/// `source`. Any finite cover has a refinement of order 0, so this only
/// says something about the search, not about `alpha`.
pub fn d_upper(alpha: &Cover, source: &mut dyn RefinementSource, budget: usize) -> Result<usize> {
    let mut best = alpha.order();
    for _ in 0..budget {
        let Some(beta) = source.next_refinement(alpha) else { break };
        if !refines(&beta, alpha)? {
            return Err(Error::input("generator produced a cover that does not refine alpha"));
        }
        best = best.min(beta.order());
        if best == 0 {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn g(ids: &[&str]) -> Arc<GroundSet> {
        Arc::new(GroundSet::new(ids.iter().copied()).unwrap())
    }

    fn cov(gr: &Arc<GroundSet>, m: &[(&str, &[&str])]) -> Cover {
        Cover::from_ids(gr.clone(), m.iter().map(|(n, s)| (*n, s.iter().copied()))).unwrap()
    }

    #[test]
    fn order_of_small_cover() {
        let gr = g(&["1", "2", "3"]);
        let c = cov(&gr, &[("A", &["1", "2"]), ("B", &["2", "3"]), ("C", &["2"])]);
        assert_eq!(c.order_at_id("2").unwrap(), 2);
        assert_eq!(c.order_at_id("1").unwrap(), 0);
        assert_eq!(c.order(), 2);
        assert!(c.order_at_id("9").is_err());
    }

    #[test]
    fn rejects_non_covers_and_empties() {
        let gr = g(&["1", "2", "3"]);
        let e = Cover::from_ids(gr.clone(), [("A", vec!["1", "2"])]).unwrap_err();
        assert!(e.to_string().contains("not a cover"));
        let e = Cover::new(gr, vec![("A".into(), vec![0, 1, 2]), ("B".into(), vec![])]).unwrap_err();
        assert!(e.to_string().contains("empty"));
    }

    #[test]
    fn duplicates_collapse() {
        let gr = g(&["1", "2"]);
        let c = cov(&gr, &[("A", &["1", "2"]), ("B", &["2", "1"])]);
        assert_eq!(c.len(), 1);
        assert_eq!(c.order(), 0);
    }

    #[test]
    fn join_example() {
        let gr = g(&["1", "2", "3"]);
        let a = cov(&gr, &[("A1", &["1", "2"]), ("A2", &["2", "3"])]);
        let b = cov(&gr, &[("B1", &["1"]), ("B2", &["2", "3"])]);
        let j = join(&a, &b).unwrap();
        let mut sets: Vec<Vec<usize>> = j.sets().to_vec();
        sets.sort();
        assert_eq!(sets, vec![vec![0], vec![1], vec![1, 2]]);
        assert!(refines(&j, &a).unwrap());
        assert!(refines(&j, &b).unwrap());
    }

    #[test]
    fn mesh_example_and_missing_metric() {
        let gr = GroundSet::new(["0", "1/2", "1"])
            .unwrap()
            .with_metric(vec![
                vec![qi(0), q(1, 2), qi(1)],
                vec![q(1, 2), qi(0), q(1, 2)],
                vec![qi(1), q(1, 2), qi(0)],
            ])
            .unwrap();
        let gr = Arc::new(gr);
        let c = cov(&gr, &[("L", &["0", "1/2"]), ("R", &["1/2", "1"])]);
        assert_eq!(c.mesh().unwrap(), q(1, 2));
        let plain = g(&["a"]);
        let c = cov(&plain, &[("A", &["a"])]);
        assert!(matches!(c.mesh(), Err(Error::Precondition(_))));
    }

    #[test]
    fn asymmetric_metric_rejected() {
        let r = GroundSet::new(["a", "b"])
            .unwrap()
            .with_metric(vec![vec![qi(0), qi(1)], vec![qi(2), qi(0)]]);
        assert!(r.is_err());
    }

    #[test]
    fn pullback_example() {
        let target = g(&["1", "2"]);
        let c = cov(&target, &[("A", &["1"]), ("B", &["1", "2"])]);
        let dom = g(&["a", "b"]);
        let f: HashMap<String, String> = [("a", "1"), ("b", "2")]
            .iter()
            .map(|(x, y)| (x.to_string(), y.to_string()))
            .collect();
        let p = pullback_ids(&c, dom.clone(), &f).unwrap();
        assert_eq!(p.sets(), &[vec![0], vec![0, 1]]);
        assert_eq!(p.order_at_id("a").unwrap(), 1);
        let mut partial = f.clone();
        partial.remove("b");
        assert!(pullback_ids(&c, dom, &partial).unwrap_err().to_string().contains("not total"));
    }

    #[test]
    fn merge_example() {
        let gr = g(&["1", "2", "3"]);
        let alpha = cov(&gr, &[("U", &["1", "2"]), ("V", &["2", "3"])]);
        let gamma = cov(&gr, &[("G1", &["1"]), ("G2", &["2"]), ("G3", &["3"])]);
        let phi: HashMap<String, String> = [("G1", "U"), ("G2", "U"), ("G3", "V")]
            .iter()
            .map(|(x, y)| (x.to_string(), y.to_string()))
            .collect();
        let m = merge_refinement(&alpha, &gamma, &phi).unwrap();
        assert_eq!(m.sets(), &[vec![0, 1], vec![2]]);
        assert!(refines(&m, &alpha).unwrap());
        let mut bad = phi.clone();
        bad.insert("G1".into(), "V".into());
        assert!(merge_refinement(&alpha, &gamma, &bad).is_err());
    }

    #[test]
    fn d_upper_sources() {
        let gr = g(&["1", "2", "3"]);
        let alpha = cov(&gr, &[("U", &["1", "2"]), ("V", &["2", "3"])]);
        assert_eq!(d_upper(&alpha, &mut Singletons::default(), 4).unwrap(), 0);
        assert_eq!(d_upper(&alpha, &mut Assignments::default(), 1).unwrap(), 0);
        assert_eq!(d_upper(&alpha, &mut Singletons::default(), 0).unwrap(), 1);
        let coarse = cov(&gr, &[("W", &["1", "2", "3"])]);
        let mut bogus = move |_: &Cover| Some(coarse.clone());
        assert!(d_upper(&alpha, &mut bogus, 1).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let gr = g(&["1", "2", "3"]);
        let c = cov(&gr, &[("A", &["1", "2"]), ("B", &["2", "3"])]);
        let back = Cover::from_json(&c.to_json()).unwrap();
        assert_eq!(back.sets(), c.sets());
        assert_eq!(back.names(), c.names());
    }
}

//! Partitions of unity on point clouds and the sampled maps
//! `F = sum_U rho_U w_U` with generic block vectors `w_U`.

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::cyclic::{cyclic_repeat, cyclic_shift, v_subspace_membership, CyclicVector};
use super::{sup_dist, PointCloud};
use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::rational::{q_to_json, random_between, Q};

/// Weights `rho_U(x)` for every point `x` and member `U`, with an anchor
/// `q_U` in each member where `rho_U` equals one.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionOfUnity {
    weights: Vec<Vec<Q>>,
    anchors: Vec<usize>,
    sets: Vec<Vec<usize>>,
    order: usize,
}

// Kuhn's augmenting paths: one distinct point per member
fn match_anchors(sets: &[Vec<usize>], npoints: usize) -> Option<Vec<usize>> {
    fn augment(u: usize, sets: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &p in &sets[u] {
            if seen[p] {
                continue;
            }
            seen[p] = true;
            if owner[p].is_none_or(|v| augment(v, sets, owner, seen)) {
                owner[p] = Some(u);
                return true;
            }
        }
        false
    }
    let mut owner: Vec<Option<usize>> = vec![None; npoints];
    for u in 0..sets.len() {
        let mut seen = vec![false; npoints];
        if !augment(u, sets, &mut owner, &mut seen) {
            return None;
        }
    }
    let mut anchors = vec![0; sets.len()];
    for (p, o) in owner.iter().enumerate() {
        if let Some(u) = o {
            anchors[*u] = p;
        }
    }
    Some(anchors)
}

impl PartitionOfUnity {
    /// Tent weights: `rho_U(x)` is proportional to the sup distance from
    /// `x` to the points outside `U` and to the other anchors. That keeps
    /// supports inside members and makes `rho_U(q_U) = 1`.
    pub fn tent(cloud: &PointCloud, cover: &Cover, anchors: Option<Vec<usize>>) -> Result<Self> {
        let n = cloud.len();
        if cover.ground().len() != n {
            return Err(Error::input("cover and cloud have different sizes"));
        }
        let sets = cover.sets().to_vec();
        let anchors = match anchors {
            Some(a) => {
                if a.len() != sets.len() {
                    return Err(Error::input("one anchor per member is required"));
                }
                for (u, &p) in a.iter().enumerate() {
                    if sets[u].binary_search(&p).is_err() {
                        return Err(Error::input(format!("anchor of {:?} is outside it", cover.names()[u])));
                    }
                }
                if a.iter().collect::<BTreeSet<_>>().len() != a.len() {
                    return Err(Error::input("anchors must be distinct"));
                }
                a
            }
            None => match_anchors(&sets, n)
                .ok_or_else(|| Error::pre("members do not admit distinct anchors"))?,
        };
        let mut raw = vec![vec![Q::zero(); sets.len()]; n];
        for (u, s) in sets.iter().enumerate() {
            let mut blockers: Vec<usize> = (0..n).filter(|p| s.binary_search(p).is_err()).collect();
            blockers.extend(anchors.iter().enumerate().filter(|&(v, _)| v != u).map(|(_, &p)| p));
            for &x in s {
                let d = blockers
                    .iter()
                    .map(|&b| cloud.dist(x, b))
                    .min()
                    .unwrap_or_else(Q::one);
                raw[x][u] = d;
            }
        }
        let mut weights = raw;
        for (x, row) in weights.iter_mut().enumerate() {
            let total: Q = row.iter().sum();
            if !total.is_positive() {
                return Err(Error::pre(format!("point {x} gets no weight")));
            }
            for w in row.iter_mut() {
                *w /= &total;
            }
        }
        let p = PartitionOfUnity { weights, anchors, sets, order: cover.order() };
        p.validate()?;
        Ok(p)
    }

    /// Non-negative, sums to one, supported in members, one at anchors.
    pub fn validate(&self) -> Result<()> {
        for (x, row) in self.weights.iter().enumerate() {
            if row.iter().any(|w| w.is_negative()) {
                return Err(Error::Assertion("negative weight".into()));
            }
            if !row.iter().sum::<Q>().is_one() {
                return Err(Error::Assertion(format!("weights at point {x} do not sum to one")));
            }
            for (u, w) in row.iter().enumerate() {
                if !w.is_zero() && self.sets[u].binary_search(&x).is_err() {
                    return Err(Error::Assertion("weight outside its member".into()));
                }
            }
        }
        for (u, &a) in self.anchors.iter().enumerate() {
            if !self.weights[a][u].is_one() {
                return Err(Error::Assertion("anchor weight is not one".into()));
            }
        }
        Ok(())
    }

    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    pub fn weights(&self) -> &[Vec<Q>] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Members with positive weight at `x`.
    pub fn support(&self, x: usize) -> Vec<usize> {
        (0..self.sets.len()).filter(|&u| self.weights[x][u].is_positive()).collect()
    }

    pub fn members_of(&self, x: usize) -> Vec<usize> {
        (0..self.sets.len()).filter(|&u| self.sets[u].binary_search(&x).is_ok()).collect()
    }

    /// `x -> sum_U rho_U(x) v_U`.
    pub fn combine(&self, v: &[Vec<Q>]) -> Vec<Vec<Q>> {
        let len = v.first().map_or(0, |w| w.len());
        self.weights
            .iter()
            .map(|row| {
                let mut out = vec![Q::zero(); len];
                for (w, vu) in row.iter().zip(v) {
                    if !w.is_zero() {
                        for (o, c) in out.iter_mut().zip(vu) {
                            *o += w * c;
                        }
                    }
                }
                out
            })
            .collect()
    }
}

/// A partition of unity with target vectors `v_U` of `blocks` blocks.
#[derive(Debug, Clone)]
pub struct PouSpec<'a> {
    pub pou: &'a PartitionOfUnity,
    pub targets: Vec<Vec<Q>>,
    pub blocks: usize,
}

/// Which genericity constraint the sampled vectors must satisfy.
#[derive(Debug, Clone, PartialEq)]
pub enum PouLemma {
    /// Windowed convex combinations separate points outside a common
    /// member; `s` sets the window length `4s`.
    Approx1 { s: usize, lambdas: Vec<Q> },
    /// `F_1(x) != F_2(y)` repeated to `n_1` blocks.
    Approx2,
    /// `F(x) != F(y)` rotated by `l` blocks.
    Approx3 { l: usize },
    /// Blocks `1..N` of `F(x)` avoid the `n`-periodic subspace.
    Approx4 { n: usize },
}

impl PouLemma {
    pub fn name(&self) -> &'static str {
        match self {
            PouLemma::Approx1 { .. } => "approx1",
            PouLemma::Approx2 => "approx2",
            PouLemma::Approx3 { .. } => "approx3",
            PouLemma::Approx4 { .. } => "approx4",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PouOptions {
    pub seed: u64,
    pub max_resamples: usize,
    /// Non-anchor points added to the verification set.
    pub extra_points: usize,
}

impl Default for PouOptions {
    fn default() -> Self {
        PouOptions { seed: 0, max_resamples: 200, extra_points: 6 }
    }
}

#[derive(Debug, Clone)]
pub struct PouMapReport {
    pub lemma: &'static str,
    pub orders: Vec<usize>,
    pub resamples: usize,
    pub checks: usize,
    pub anchor_deviation: Q,
    pub extension: bool,
    /// Smallest distance to the periodic subspace (approx4 only).
    pub min_distance: Option<Q>,
    pub w: Vec<Vec<Q>>,
    pub values: Vec<Vec<Q>>,
}

impl PouMapReport {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "lemma": self.lemma,
            "orders": self.orders,
            "resamples": self.resamples,
            "checks": self.checks,
            "anchor_deviation": q_to_json(&self.anchor_deviation),
            "extension": self.extension,
        });
        if let Some(d) = &self.min_distance {
            v["min_distance"] = q_to_json(d);
        }
        v
    }
}

fn verification_points(pou: &PartitionOfUnity, extra: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut pts: BTreeSet<usize> = pou.anchors.iter().copied().collect();
    let mut rest: Vec<usize> = (0..pou.len()).filter(|p| !pts.contains(p)).collect();
    rest.shuffle(rng);
    pts.extend(rest.into_iter().take(extra));
    pts.into_iter().collect()
}

fn check_targets(spec: &PouSpec, d: usize) -> Result<()> {
    if spec.targets.len() != spec.pou.sets.len() {
        return Err(Error::input("one target vector per member is required"));
    }
    let len = spec.blocks * d;
    for t in &spec.targets {
        if t.len() != len {
            return Err(Error::input(format!("target vectors must have {len} coordinates")));
        }
        if t.iter().any(|x| x.is_negative() || *x > Q::one()) {
            return Err(Error::input("targets must lie in [0,1]"));
        }
    }
    Ok(())
}

fn blocks_of(v: &[Q], d: usize, from: usize, to: usize) -> &[Q] {
    &v[from * d..to * d]
}

/// Samples `w_U` within `eps` of `v_U` (on a `2^-20` grid, clipped to
/// `[0,1]`) until the chosen constraint holds on the verification points,
/// and returns `F = sum rho_U w_U`. Since `rho_U(q_U) = 1`, `F(q_U) = w_U`,
/// and `F(x)` is a convex combination of the `F(q_U)` with `x in U`.
pub fn pou_map_builder(
    lemma: &PouLemma,
    d: usize,
    primary: &PouSpec,
    secondary: Option<&PouSpec>,
    eps: &Q,
    opt: &PouOptions,
) -> Result<PouMapReport> {
    if d == 0 || primary.blocks == 0 {
        return Err(Error::input("block size and block count must be positive"));
    }
    if !eps.is_positive() {
        return Err(Error::input("eps must be positive"));
    }
    check_targets(primary, d)?;
    let ord = primary.pou.order;
    let blocks = primary.blocks;
    let mut orders = vec![ord];
    let mut extension = false;
    match lemma {
        PouLemma::Approx1 { s, lambdas } => {
            if *s == 0 || ord >= s * d {
                return Err(Error::pre(format!("order {ord} must be below S*d = {}", s * d)));
            }
            if blocks < 4 * s + 1 {
                return Err(Error::pre(format!("need N >= 4S + 1 = {} blocks", 4 * s + 1)));
            }
            if lambdas.is_empty() || lambdas.iter().any(|l| !l.is_positive() || *l > Q::one()) {
                return Err(Error::input("lambda values must lie in (0, 1]"));
            }
        }
        PouLemma::Approx2 => {
            let sec = secondary.ok_or_else(|| Error::input("approx2 needs a second cover"))?;
            check_targets(sec, d)?;
            let o2 = sec.pou.order;
            orders.push(o2);
            if blocks < sec.blocks {
                return Err(Error::pre("n1 must be at least n2"));
            }
            if 2 * ord >= d * blocks || 2 * o2 >= d * sec.blocks {
                return Err(Error::pre("each order must be below d*n_i/2"));
            }
        }
        PouLemma::Approx3 { l } => {
            if 2 * ord >= d * blocks {
                return Err(Error::pre(format!("order {ord} must be below d*n/2")));
            }
            if *l >= blocks {
                return Err(Error::input(format!("shift l = {l} must be below n = {blocks}")));
            }
            extension = *l == 0;
        }
        PouLemma::Approx4 { n } => {
            if *n == 0 || blocks < 2 {
                return Err(Error::input("approx4 needs n >= 1 and N >= 2"));
            }
            if blocks < n + 1 || 2 * (ord + 1) > (blocks - 1 - n) * d {
                return Err(Error::pre(format!(
                    "need ord + 1 <= (N - 1 - n) d / 2 with ord = {ord}"
                )));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
    let pts1 = verification_points(primary.pou, opt.extra_points, &mut rng);
    let pts2 = secondary.map(|s| verification_points(s.pou, opt.extra_points, &mut rng));
    let f2 = secondary.map(|s| s.pou.combine(&s.targets));
    let zero = Q::zero();
    let one = Q::one();
    for attempt in 0..=opt.max_resamples {
        let w: Vec<Vec<Q>> = primary
            .targets
            .iter()
            .map(|v| {
                v.iter()
                    .map(|x| {
                        let lo = (x - eps).max(zero.clone());
                        let hi = (x + eps).min(one.clone());
                        random_between(&mut rng, &lo, &hi, 20)
                    })
                    .collect()
            })
            .collect();
        let values = primary.pou.combine(&w);
        let mut checks = 0usize;
        let mut min_distance = None;
        let ok = match lemma {
            PouLemma::Approx2 => {
                let f2 = f2.as_ref().expect("checked");
                let mut ok = true;
                'pairs: for &x in &pts1 {
                    for &y in pts2.as_ref().expect("checked") {
                        checks += 1;
                        let rep = cyclic_repeat(&CyclicVector::from_flat(&f2[y], d)?, blocks)?;
                        if values[x] == rep.flat() {
                            ok = false;
                            break 'pairs;
                        }
                    }
                }
                ok
            }
            PouLemma::Approx3 { l } => {
                let mut ok = true;
                'pairs3: for &x in &pts1 {
                    for &y in &pts1 {
                        if *l == 0 && x == y {
                            continue;
                        }
                        checks += 1;
                        let sh = cyclic_shift(&CyclicVector::from_flat(&values[y], d)?, *l as i64);
                        if values[x] == sh.flat() {
                            ok = false;
                            break 'pairs3;
                        }
                    }
                }
                ok
            }
            PouLemma::Approx4 { n } => {
                let mut ok = true;
                let mut best: Option<Q> = None;
                for &x in &pts1 {
                    checks += 1;
                    let z = blocks_of(&values[x], d, 1, blocks);
                    let (inside, dist) = v_subspace_membership(z, *n, d)?;
                    if inside {
                        ok = false;
                        break;
                    }
                    if best.as_ref().is_none_or(|b| dist < *b) {
                        best = Some(dist);
                    }
                }
                min_distance = best;
                ok
            }
            PouLemma::Approx1 { s, lambdas } => {
                let win = 4 * s;
                let mut ok = true;
                'outer: for l in 0..blocks - win {
                    for lam in lambdas {
                        let rest = &one - lam;
                        let mut seen: HashMap<Vec<Q>, Vec<usize>> = HashMap::new();
                        for &x in &pts1 {
                            for &y in &pts1 {
                                checks += 1;
                                let a = blocks_of(&values[x], d, l, l + win);
                                let b = blocks_of(&values[y], d, l + 1, l + 1 + win);
                                let key: Vec<Q> = a.iter().zip(b).map(|(p, q)| lam * p + &rest * q).collect();
                                seen.entry(key).or_default().push(x);
                            }
                        }
                        for xs in seen.values() {
                            for &x in xs {
                                for &x2 in xs {
                                    if x != x2 && !share_member(primary.pou, x, x2) {
                                        ok = false;
                                        break 'outer;
                                    }
                                }
                            }
                        }
                    }
                }
                ok
            }
        };
        if ok {
            let anchor_deviation = primary
                .pou
                .anchors
                .iter()
                .enumerate()
                .map(|(u, &a)| sup_dist(&values[a], &primary.targets[u]))
                .max()
                .unwrap_or_default();
            if anchor_deviation >= *eps {
                return Err(Error::Assertion("anchor bound failed".into()));
            }
            return Ok(PouMapReport {
                lemma: lemma.name(),
                orders,
                resamples: attempt,
                checks,
                anchor_deviation,
                extension,
                min_distance,
                w,
                values,
            });
        }
    }
    Err(Error::budget(format!(
        "no admissible sample in {} attempts",
        opt.max_resamples + 1
    )))
}

fn share_member(pou: &PartitionOfUnity, x: usize, y: usize) -> bool {
    pou.sets
        .iter()
        .any(|s| s.binary_search(&x).is_ok() && s.binary_search(&y).is_ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::GroundSet;
    use crate::rational::{q, qi};
    use std::sync::Arc;

    fn line(n: i64) -> PointCloud {
        PointCloud::new((0..n).map(|i| vec![q(i, n - 1)]).collect()).unwrap()
    }

    fn chain_cover(n: usize, width: usize, step: usize) -> Cover {
        let mut sets = Vec::new();
        let mut s = 0;
        while s < n {
            sets.push((s..(s + width).min(n)).collect());
            if s + width >= n {
                break;
            }
            s += step;
        }
        Cover::from_sets(Arc::new(GroundSet::range(n)), sets).unwrap()
    }

    #[test]
    fn tent_partition_properties() {
        let cloud = line(12);
        let cover = chain_cover(12, 4, 3);
        let p = PartitionOfUnity::tent(&cloud, &cover, None).unwrap();
        p.validate().unwrap();
        assert_eq!(p.order(), 1);
        for x in 0..12 {
            let s = p.support(x);
            assert!(!s.is_empty());
            assert!(s.iter().all(|u| p.members_of(x).contains(u)));
        }
    }

    #[test]
    fn approx2_one_set_covers() {
        let cloud = line(3);
        let g = Arc::new(GroundSet::range(3));
        let c1 = Cover::from_sets(g.clone(), vec![vec![0, 1, 2]]).unwrap();
        let p1 = PartitionOfUnity::tent(&cloud, &c1, None).unwrap();
        let p2 = p1.clone();
        let t = vec![vec![q(1, 2); 3]];
        let s1 = PouSpec { pou: &p1, targets: t.clone(), blocks: 1 };
        let s2 = PouSpec { pou: &p2, targets: t, blocks: 1 };
        let r = pou_map_builder(&PouLemma::Approx2, 3, &s1, Some(&s2), &q(1, 10), &PouOptions::default()).unwrap();
        assert!(r.anchor_deviation < q(1, 10));
        assert_ne!(r.values[0], vec![q(1, 2); 3]);
    }

    #[test]
    fn approx3_and_extension_flag() {
        let cloud = line(10);
        let cover = chain_cover(10, 3, 2);
        let p = PartitionOfUnity::tent(&cloud, &cover, None).unwrap();
        let targets = vec![vec![q(1, 2); 6]; cover.len()];
        let spec = PouSpec { pou: &p, targets, blocks: 3 };
        let r = pou_map_builder(&PouLemma::Approx3 { l: 1 }, 2, &spec, None, &q(1, 8), &PouOptions::default()).unwrap();
        assert!(!r.extension);
        // points lying in a single member share the weight vector, so l = 0 cannot hold here
        assert!(matches!(
            pou_map_builder(&PouLemma::Approx3 { l: 0 }, 2, &spec, None, &q(1, 8), &PouOptions::default()),
            Err(Error::Budget(_))
        ));
        let small = line(3);
        let singles = Cover::from_sets(Arc::new(GroundSet::range(3)), vec![vec![0], vec![1], vec![2]]).unwrap();
        let ps = PartitionOfUnity::tent(&small, &singles, None).unwrap();
        let spec0 = PouSpec { pou: &ps, targets: vec![vec![q(1, 2); 2]; 3], blocks: 1 };
        let r = pou_map_builder(&PouLemma::Approx3 { l: 0 }, 2, &spec0, None, &q(1, 8), &PouOptions::default()).unwrap();
        assert!(r.extension);
        // order 1 with d = 1, n = 2 breaks ord < dn/2
        let thin = PouSpec { pou: &p, targets: vec![vec![q(1, 2); 2]; cover.len()], blocks: 2 };
        assert!(pou_map_builder(&PouLemma::Approx3 { l: 1 }, 1, &thin, None, &q(1, 8), &PouOptions::default()).is_err());
    }

    #[test]
    fn approx4_singleton_cover() {
        let cloud = PointCloud::new(vec![vec![qi(0)]]).unwrap();
        let cover = Cover::from_sets(Arc::new(GroundSet::range(1)), vec![vec![0]]).unwrap();
        let p = PartitionOfUnity::tent(&cloud, &cover, None).unwrap();
        let spec = PouSpec { pou: &p, targets: vec![vec![q(1, 2); 8]], blocks: 8 };
        let r = pou_map_builder(&PouLemma::Approx4 { n: 2 }, 1, &spec, None, &q(1, 4), &PouOptions::default()).unwrap();
        assert!(r.min_distance.unwrap().is_positive());
    }

    #[test]
    fn approx1_small() {
        let cloud = line(8);
        let cover = chain_cover(8, 3, 2);
        let p = PartitionOfUnity::tent(&cloud, &cover, None).unwrap();
        let d = 2;
        let blocks = 6;
        let spec = PouSpec { pou: &p, targets: vec![vec![q(1, 2); d * blocks]; cover.len()], blocks };
        let lam = vec![q(1, 4), q(1, 2), q(3, 4), qi(1)];
        let r = pou_map_builder(&PouLemma::Approx1 { s: 1, lambdas: lam }, d, &spec, None, &q(1, 8), &PouOptions::default())
            .unwrap();
        assert!(r.checks > 0);
    }
}

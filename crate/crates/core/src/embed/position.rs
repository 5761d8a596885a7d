//! General position, perturbations, and epsilon-injective maps.

use std::collections::HashMap;

use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::pou::PartitionOfUnity;
use super::{sup_dist, PointCloud};
use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::linalg::{affine_rank, rank};
use crate::rational::{q_to_json, random_between, random_unit, Q};

const SUBSET_LIMIT: u64 = 20_000_000;

fn binom(n: usize, k: usize) -> u64 {
    let k = k.min(n - k.min(n));
    let mut r: u64 = 1;
    for i in 0..k {
        r = r.saturating_mul((n - i) as u64) / (i as u64 + 1);
    }
    r
}

/// Calls `f` on every `k`-subset of `0..n` until it returns `false`.
fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if k > n {
        return true;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return false;
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] < i + n - k) else {
            return true;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every set of at most `m + 1` points is affinely independent, where
/// `m` is the ambient dimension.
pub fn is_general_position(points: &[Vec<Q>]) -> Result<bool> {
    let n = points.len();
    if n == 0 {
        return Ok(true);
    }
    let m = points[0].len();
    let k = n.min(m + 1);
    if binom(n, k) > SUBSET_LIMIT {
        return Err(Error::budget("too many subsets to check general position"));
    }
    let mut ok = true;
    for_each_subset(n, k, &mut |s| {
        let pts: Vec<&[Q]> = s.iter().map(|&i| points[i].as_slice()).collect();
        ok = affine_rank(&pts) + 1 == pts.len();
        ok
    });
    Ok(ok)
}

/// Moves each point by less than `eps` in the sup norm so that the whole
/// family ends up in general position. Points are placed one at a time,
/// each avoiding the affine hulls of the previously placed ones.
pub fn perturb_general_position(points: &[Vec<Q>], eps: &Q, seed: u64) -> Result<Vec<Vec<Q>>> {
    if !eps.is_positive() {
        return Err(Error::input("eps must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed: Vec<Vec<Q>> = Vec::with_capacity(points.len());
    let m = points.first().map_or(0, |p| p.len());
    let neg = -eps.clone();
    for p in points {
        let k = placed.len().min(m);
        if binom(placed.len(), k) > SUBSET_LIMIT {
            return Err(Error::budget("too many subsets to keep general position"));
        }
        let mut done = false;
        for _ in 0..1000 {
            let cand: Vec<Q> = p.iter().map(|x| x + random_between(&mut rng, &neg, eps, 20)).collect();
            let mut ok = true;
            for_each_subset(placed.len(), k, &mut |s| {
                let mut pts: Vec<&[Q]> = s.iter().map(|&i| placed[i].as_slice()).collect();
                pts.push(&cand);
                ok = affine_rank(&pts) + 1 == pts.len();
                ok
            });
            if ok {
                placed.push(cand);
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::budget("could not place a point in general position"));
        }
    }
    Ok(placed)
}

#[derive(Debug, Clone)]
pub struct EpsInjectiveReport {
    pub g: Vec<Vec<Q>>,
    pub anchors: Vec<usize>,
    pub vertices: Vec<Vec<Q>>,
    /// `max_x |f(x) - g(x)|` in the sup norm.
    pub deviation: Q,
    pub pairs_checked: usize,
    /// Distinct points with equal images.
    pub collisions: usize,
    /// Collisions at distance `>= eps`.
    pub violations: usize,
}

impl EpsInjectiveReport {
    pub fn holds(&self, delta: &Q) -> bool {
        self.violations == 0 && self.deviation <= *delta
    }

    pub fn to_json(&self) -> Value {
        json!({
            "deviation": q_to_json(&self.deviation),
            "pairs_checked": self.pairs_checked,
            "collisions": self.collisions,
            "violations": self.violations,
            "anchors": self.anchors,
        })
    }
}

/// Builds `g = sum rho_i q_i`, where the `q_i` are general-position
/// perturbations of `f` at one anchor per member. Checks that `g` only
/// identifies points closer than `eps` and stays within `delta` of `f`.
pub fn eps_injective_map(
    cloud: &PointCloud,
    cover: &Cover,
    f: &[Vec<Q>],
    eps: &Q,
    delta: &Q,
    seed: u64,
) -> Result<EpsInjectiveReport> {
    if f.len() != cloud.len() || cover.ground().len() != cloud.len() {
        return Err(Error::input("cloud, cover and map must share the same points"));
    }
    let m = f.first().map_or(0, |v| v.len());
    let ord = cover.order();
    if m < 2 * ord + 1 {
        return Err(Error::pre(format!("target dimension {m} is below 2*order+1 = {}", 2 * ord + 1)));
    }
    let half = delta / Q::from_integer(2.into());
    for (name, s) in cover.names().iter().zip(cover.sets()) {
        for (i, &a) in s.iter().enumerate() {
            for &b in &s[i + 1..] {
                if cloud.dist(a, b) >= *eps {
                    return Err(Error::pre(format!("member {name:?} has diameter >= eps")));
                }
                if sup_dist(&f[a], &f[b]) > half {
                    return Err(Error::pre(format!("f oscillates by more than delta/2 on {name:?}")));
                }
            }
        }
    }
    let pou = PartitionOfUnity::tent(cloud, cover, None)?;
    let base: Vec<Vec<Q>> = pou.anchors().iter().map(|&a| f[a].clone()).collect();
    // strictly inside delta/2 so the bound below stays <= delta
    let vertices = perturb_general_position(&base, &half, seed)?;
    let g = pou.combine(&vertices);
    let deviation = g
        .iter()
        .zip(f)
        .map(|(a, b)| sup_dist(a, b))
        .max()
        .unwrap_or_default();
    let mut groups: HashMap<&Vec<Q>, Vec<usize>> = HashMap::new();
    for (x, v) in g.iter().enumerate() {
        groups.entry(v).or_default().push(x);
    }
    let mut collisions = 0;
    let mut violations = 0;
    for xs in groups.values() {
        for (i, &a) in xs.iter().enumerate() {
            for &b in &xs[i + 1..] {
                if cloud.point(a) == cloud.point(b) {
                    continue;
                }
                collisions += 1;
                if cloud.dist(a, b) >= *eps {
                    violations += 1;
                }
            }
        }
    }
    let n = cloud.len();
    Ok(EpsInjectiveReport {
        g,
        anchors: pou.anchors().to_vec(),
        vertices,
        deviation,
        pairs_checked: n * n.saturating_sub(1) / 2,
        collisions,
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpanMode {
    Linear,
    Affine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanReport {
    pub trials: usize,
    pub failures: usize,
}

/// Adds `s` random vectors of `[0,1]^m` to an independent family and
/// counts how often independence is lost.
pub fn generic_span_extension(vs: &[Vec<Q>], s: usize, mode: SpanMode, trials: usize, seed: u64) -> Result<SpanReport> {
    let m = vs
        .first()
        .map(|v| v.len())
        .ok_or_else(|| Error::input("need at least one starting vector"))?;
    if vs.iter().any(|v| v.len() != m) {
        return Err(Error::input("vectors have different lengths"));
    }
    let r = vs.len();
    match mode {
        SpanMode::Linear => {
            if r + s > m {
                return Err(Error::pre(format!("r + s = {} exceeds m = {m}", r + s)));
            }
            if rank(vs) != r {
                return Err(Error::pre("starting vectors are linearly dependent"));
            }
        }
        SpanMode::Affine => {
            if r + s > m + 1 {
                return Err(Error::pre(format!("r + s = {} exceeds m + 1 = {}", r + s, m + 1)));
            }
            let pts: Vec<&[Q]> = vs.iter().map(|v| v.as_slice()).collect();
            if affine_rank(&pts) + 1 != r {
                return Err(Error::pre("starting points are affinely dependent"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let mut all = vs.to_vec();
        for _ in 0..s {
            all.push((0..m).map(|_| random_unit(&mut rng, 20)).collect());
        }
        let ok = match mode {
            SpanMode::Linear => rank(&all) == r + s,
            SpanMode::Affine => {
                let pts: Vec<&[Q]> = all.iter().map(|v| v.as_slice()).collect();
                affine_rank(&pts) + 1 == r + s
            }
        };
        if !ok {
            failures += 1;
        }
    }
    Ok(SpanReport { trials, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::GroundSet;
    use crate::rational::{q, qi};
    use std::sync::Arc;

    #[test]
    fn subsets_enumerated() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, &mut |s| {
            seen.push(s.to_vec());
            true
        });
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[5], vec![2, 3]);
        let mut count = 0;
        for_each_subset(3, 3, &mut |_| {
            count += 1;
            true
        });
        assert_eq!(count, 1);
    }

    #[test]
    fn collinear_points_fixed_by_perturbation() {
        let pts: Vec<Vec<Q>> = (0..5).map(|i| vec![qi(i), qi(0)]).collect();
        assert!(!is_general_position(&pts).unwrap());
        let moved = perturb_general_position(&pts, &q(1, 10), 4).unwrap();
        assert!(is_general_position(&moved).unwrap());
        for (a, b) in pts.iter().zip(&moved) {
            assert!(sup_dist(a, b) < q(1, 10));
        }
    }

    #[test]
    fn span_extension() {
        let vs = vec![vec![qi(1), qi(0), qi(0)]];
        let r = generic_span_extension(&vs, 2, SpanMode::Linear, 50, 1).unwrap();
        assert_eq!(r.failures, 0);
        assert!(generic_span_extension(&vs, 3, SpanMode::Linear, 5, 1).is_err());
        assert_eq!(generic_span_extension(&vs, 3, SpanMode::Affine, 20, 1).unwrap().failures, 0);
    }

    #[test]
    fn eps_injective_on_a_segment() {
        let n = 40;
        let pts: Vec<Vec<Q>> = (0..n).map(|i| vec![q(i, n - 1)]).collect();
        let cloud = PointCloud::new(pts.clone()).unwrap();
        let g = Arc::new(GroundSet::range(n as usize));
        // intervals of width 3/13 starting every 2/13, order 1
        let mut sets = Vec::new();
        let mut start = Q::from_integer(0.into());
        while start < qi(1) {
            let end = &start + q(3, 13);
            let s: Vec<usize> = (0..n as usize).filter(|&i| pts[i][0] >= start && pts[i][0] < end).collect();
            if !s.is_empty() {
                sets.push(s);
            }
            start += q(2, 13);
        }
        let cover = Cover::from_sets(g, sets).unwrap();
        assert_eq!(cover.order(), 1);
        let f: Vec<Vec<Q>> = pts.iter().map(|p| vec![&p[0] / qi(8), qi(0), q(1, 2)]).collect();
        let r = eps_injective_map(&cloud, &cover, &f, &q(1, 4), &q(1, 10), 7).unwrap();
        assert!(r.holds(&q(1, 10)), "{r:?}");
        // too small a target dimension
        let f2: Vec<Vec<Q>> = pts.iter().map(|p| vec![&p[0] / qi(8), qi(0)]).collect();
        assert!(eps_injective_map(&cloud, &cover, &f2, &q(1, 4), &q(1, 10), 7).is_err());
    }
}

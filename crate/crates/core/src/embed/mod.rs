//! Embedding tools: window maps, general position, generic matrices,
//! partition-of-unity approximations and block-sequence utilities.

mod cyclic;
mod pattern;
mod poly;
mod position;
mod pou;
mod sphere;
mod window;

pub use cyclic::{cyclic_repeat, cyclic_shift, v_subspace_membership, CyclicVector};
pub use pattern::{
    pattern_generic_affine, pattern_generic_invertibility, random_affine_pattern, random_square_pattern,
    symbolic_affine_nonvanishing, symbolic_det_nonvanishing, PatternMatrix, PatternReport, Sampler,
};
pub use poly::Poly;
pub use position::{
    eps_injective_map, generic_span_extension, is_general_position, perturb_general_position, EpsInjectiveReport,
    SpanMode, SpanReport,
};
pub use pou::{pou_map_builder, PartitionOfUnity, PouLemma, PouMapReport, PouOptions, PouSpec};
pub use sphere::{sphere_demo, SphereReport};
pub use window::{find_window_index, window_conditions, window_index_oracle};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::Q;

/// Finitely many points of `Q^k` with the sup metric.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec<Q>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<Q>>) -> Result<Self> {
        let k = points.first().map_or(0, |p| p.len());
        if points.iter().any(|p| p.len() != k) {
            return Err(Error::input("points of a cloud must share one dimension"));
        }
        Ok(PointCloud { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    pub fn point(&self, i: usize) -> &[Q] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<Q>] {
        &self.points
    }

    pub fn dist(&self, i: usize, j: usize) -> Q {
        sup_dist(&self.points[i], &self.points[j])
    }

    /// Sup-metric distance table, for building a metric ground set.
    pub fn metric(&self) -> Vec<Vec<Q>> {
        (0..self.len())
            .map(|i| (0..self.len()).map(|j| self.dist(i, j)).collect())
            .collect()
    }
}

pub fn sup_dist(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |m, (x, y)| {
        let d = if x > y { x - y } else { y - x };
        if d > m {
            d
        } else {
            m
        }
    })
}

/// Inverse of a partial injective map given as `t[x] = Some(y)`.
fn invert(t: &[Option<usize>]) -> Result<Vec<Option<usize>>> {
    let mut inv = vec![None; t.len()];
    for (x, y) in t.iter().enumerate() {
        if let Some(y) = *y {
            if y >= t.len() {
                return Err(Error::input("map leaves the cloud"));
            }
            if inv[y].replace(x).is_some() {
                return Err(Error::input("map is not injective"));
            }
        }
    }
    Ok(inv)
}

fn step(t: &[Option<usize>], inv: &[Option<usize>], x: usize, i: i64) -> Option<usize> {
    let mut p = x;
    if i >= 0 {
        for _ in 0..i {
            p = t[p]?;
        }
    } else {
        for _ in 0..(-i) {
            p = inv[p]?;
        }
    }
    Some(p)
}

/// `x -> (f(T^lo x), ..., f(T^hi x))` on every point, where `t` is a
/// partial injective map of the cloud and `f[x]` is a vector.
pub fn window_map(t: &[Option<usize>], f: &[Vec<Q>], lo: i64, hi: i64) -> Result<Vec<Vec<Q>>> {
    if t.len() != f.len() {
        return Err(Error::input("map and function have different domains"));
    }
    if lo > hi {
        return Err(Error::input("empty window"));
    }
    let inv = invert(t)?;
    let mut out = Vec::with_capacity(t.len());
    for x in 0..t.len() {
        let mut v = Vec::new();
        for i in lo..=hi {
            let p = step(t, &inv, x, i).ok_or_else(|| {
                Error::input(format!("range exceeds available orbit data: T^{i} undefined at point {x}"))
            })?;
            v.extend(f[p].iter().cloned());
        }
        out.push(v);
    }
    Ok(out)
}

/// Pairs `(x, y)` and the first `i` in `[lo, hi]` with
/// `f(T^i x) != f(T^i y)`; `None` marks a pair the window cannot separate.
pub fn embedding_criterion(
    t: &[Option<usize>],
    f: &[Vec<Q>],
    lo: i64,
    hi: i64,
    pairs: &[(usize, usize)],
) -> Result<Vec<Option<i64>>> {
    let inv = invert(t)?;
    let mut out = Vec::with_capacity(pairs.len());
    for &(x, y) in pairs {
        let mut found = None;
        for i in lo..=hi {
            let (Some(a), Some(b)) = (step(t, &inv, x, i), step(t, &inv, y, i)) else {
                return Err(Error::input(format!("range exceeds available orbit data at T^{i}")));
            };
            if f[a] != f[b] {
                found = Some(i);
                break;
            }
        }
        out.push(found);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    #[test]
    fn window_on_a_cycle() {
        let t = vec![Some(1), Some(2), Some(0)];
        let f = vec![vec![qi(0)], vec![qi(1)], vec![qi(0)]];
        let w = window_map(&t, &f, -1, 1).unwrap();
        assert_eq!(w[0], vec![qi(0), qi(0), qi(1)]);
        let sep = embedding_criterion(&t, &f, 0, 1, &[(0, 2), (0, 1)]).unwrap();
        assert_eq!(sep, vec![Some(1), Some(0)]);
        let partial = vec![Some(1), None, None];
        assert!(window_map(&partial, &f, 0, 2).is_err());
    }
}

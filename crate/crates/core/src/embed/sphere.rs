//! The reflection of the sphere through its equator and its explicit
//! equivariant map into the shift on `([0,1]^2)^Z`.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::window_map;
use crate::error::{Error, Result};
use crate::rational::{qi, random_between, Q};

/// Half-width of the stored window `[-W, W]`.
const WINDOW: i64 = 4;

#[derive(Debug, Clone)]
pub struct SphereReport {
    pub samples: usize,
    pub window: i64,
    pub equivariance_failures: usize,
    pub window_map_mismatches: usize,
    pub pairs_checked: u64,
    pub injectivity_failures: u64,
    pub equator_points: usize,
    pub seed: u64,
}

impl SphereReport {
    pub fn holds(&self) -> bool {
        self.equivariance_failures == 0 && self.window_map_mismatches == 0 && self.injectivity_failures == 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "samples": self.samples,
            "window": [-self.window, self.window],
            "equivariance_failures": self.equivariance_failures,
            "window_map_mismatches": self.window_map_mismatches,
            "pairs_checked": self.pairs_checked,
            "injectivity_failures": self.injectivity_failures,
            "equator_points": self.equator_points,
            "seed": self.seed,
            "holds": self.holds(),
        })
    }
}

/// Inverse stereographic projection from the north pole.
fn lift(u: &Q, v: &Q) -> Vec<Q> {
    let s = u * u + v * v;
    let den = &s + Q::one();
    vec![qi(2) * u / &den, qi(2) * v / &den, (&s - Q::one()) / &den]
}

fn reflect(x: &[Q]) -> Vec<Q> {
    vec![x[0].clone(), x[1].clone(), -x[2].clone()]
}

/// `f(x) = ((x1 + x3 + 2)/4, (x2 + 2)/4)`.
fn observable(x: &[Q]) -> Vec<Q> {
    let four = qi(4);
    vec![(&x[0] + &x[2] + qi(2)) / &four, (&x[1] + qi(2)) / four]
}

/// `Phi(x)_i` pairs `x1 + x3` for even `i` and `x1 - x3` for odd `i`.
fn phi(x: &[Q], i: i64) -> Vec<Q> {
    if i.rem_euclid(2) == 0 {
        observable(x)
    } else {
        observable(&reflect(x))
    }
}

pub fn sphere_demo(samples: usize, seed: u64) -> Result<SphereReport> {
    if samples < 2 {
        return Err(Error::input("at least two samples are needed"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<Vec<Q>> = vec![vec![qi(0), qi(0), qi(1)], vec![qi(0), qi(0), qi(-1)], vec![qi(1), qi(0), qi(0)]];
    let (lo, hi) = (qi(-3), qi(3));
    while pts.len() < samples {
        let u = random_between(&mut rng, &lo, &hi, 10);
        let v = random_between(&mut rng, &lo, &hi, 10);
        let p = lift(&u, &v);
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    pts.truncate(samples);
    for p in &pts {
        let r: Q = p.iter().map(|c| c * c).sum();
        if !r.is_one() {
            return Err(Error::Assertion("sample off the sphere".into()));
        }
    }

    let mut equivariance_failures = 0;
    for x in &pts {
        let sx = reflect(x);
        if (-WINDOW..WINDOW).any(|i| phi(&sx, i) != phi(x, i + 1)) {
            equivariance_failures += 1;
        }
    }

    // cloud = samples followed by the reflections of the off-equator ones, T = s
    let n = pts.len();
    let mut cloud = pts.clone();
    cloud.extend(pts.iter().filter(|p| !p[2].is_zero()).map(|p| reflect(p)));
    let mut tmap = vec![None; cloud.len()];
    let mut k = n;
    let mut equator_points = 0;
    for (i, p) in pts.iter().enumerate() {
        if p[2].is_zero() {
            tmap[i] = Some(i);
            equator_points += 1;
        } else {
            tmap[i] = Some(k);
            tmap[k] = Some(i);
            k += 1;
        }
    }
    let f: Vec<Vec<Q>> = cloud.iter().map(|x| observable(x)).collect();
    let w = window_map(&tmap, &f, -WINDOW, WINDOW)?;
    let mut window_map_mismatches = 0;
    for (x, row) in cloud.iter().zip(&w) {
        let expect: Vec<Q> = (-WINDOW..=WINDOW).flat_map(|i| phi(x, i)).collect();
        if *row != expect {
            window_map_mismatches += 1;
        }
    }

    let mut groups: HashMap<Vec<Q>, u64> = HashMap::new();
    for x in &pts {
        let mut key = phi(x, 0);
        key.extend(phi(x, 1));
        *groups.entry(key).or_default() += 1;
    }
    let injectivity_failures = groups.values().map(|&c| c * (c - 1) / 2).sum();
    let m = n as u64;
    Ok(SphereReport {
        samples: n,
        window: WINDOW,
        equivariance_failures,
        window_map_mismatches,
        pairs_checked: m * (m - 1) / 2,
        injectivity_failures,
        equator_points,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_holds() {
        let r = sphere_demo(150, 3).unwrap();
        assert!(r.holds(), "{:?}", r);
        assert!(r.pairs_checked >= 10_000);
    }

    #[test]
    fn equator_constant_and_poles_swapped() {
        let e = vec![qi(1), qi(0), qi(0)];
        assert!((-3..3).all(|i| phi(&e, i) == phi(&e, i + 1)));
        let north = vec![qi(0), qi(0), qi(1)];
        let south = vec![qi(0), qi(0), qi(-1)];
        assert_eq!(phi(&north, 0), phi(&south, 1));
        assert_eq!(phi(&north, 1), phi(&south, 0));
    }
}

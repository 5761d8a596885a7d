//! The acceptance suite: thirteen checks run on seeded random instances
//! and fixtures, each with a runtime budget.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::blocksys::BlockSystem;
use crate::cover::{Cover, GroundSet};
use crate::cube::{brick_cover, exact_order, exhaustive_min_order, face_condition, lebesgue_witness, punctured_square_fixture};
use crate::dynsys::{
    distinct_indices, find_marker, perdim, perdim_power_bound, replay_distinct, rokhlin_property_check,
    FinitePermSystem, OrbitRelation, SymbolicSystemDescriptor,
};
use crate::embed::{
    eps_injective_map, find_window_index, pattern_generic_affine, pattern_generic_invertibility, random_affine_pattern,
    random_square_pattern, sphere_demo, symbolic_affine_nonvanishing, symbolic_det_nonvanishing, window_conditions,
    window_index_oracle, PointCloud, Sampler,
};
use crate::error::{Error, Result};
use crate::rational::{q, qi, Q};
use crate::simplicial::{nerve, star_cover, AbstractComplex};

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub covers: usize,
    pub complexes: usize,
    pub witness_grid: usize,
    pub probe_trials: usize,
    pub rokhlin_systems: usize,
    pub distinct_cases: usize,
    pub patterns: usize,
    pub pattern_trials: usize,
    pub sphere_samples: usize,
    pub n1_sequences: usize,
    pub descriptors: usize,
    /// Criterion ids to run; empty runs all.
    pub only: Vec<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 1,
            covers: 50,
            complexes: 20,
            witness_grid: 64,
            probe_trials: 100,
            rokhlin_systems: 100,
            distinct_cases: 200,
            patterns: 100,
            pattern_trials: 100,
            sphere_samples: 150,
            n1_sequences: 1000,
            descriptors: 50,
            only: Vec::new(),
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("covers", self.covers),
            ("complexes", self.complexes),
            ("witness_grid", self.witness_grid),
            ("probe_trials", self.probe_trials),
            ("rokhlin_systems", self.rokhlin_systems),
            ("distinct_cases", self.distinct_cases),
            ("patterns", self.patterns),
            ("pattern_trials", self.pattern_trials),
            ("sphere_samples", self.sphere_samples),
            ("n1_sequences", self.n1_sequences),
            ("descriptors", self.descriptors),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::input(format!("{name} must be positive")));
            }
        }
        if self.sphere_samples < 2 {
            return Err(Error::input("sphere_samples must be at least 2"));
        }
        if let Some(bad) = self.only.iter().find(|&&i| !(1..=CRITERIA.len()).contains(&i)) {
            return Err(Error::input(format!("no criterion {bad}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Duration,
}

impl CriterionResult {
    pub fn within_time(&self) -> bool {
        self.elapsed < self.limit
    }

    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} {}: {} [{:.3}s / {}s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.limit.as_secs()
        )
    }

    pub fn to_json(&self, timing: bool) -> Value {
        let mut v = json!({
            "id": self.id,
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "limit_s": self.limit.as_secs(),
        });
        if timing {
            v["elapsed_s"] = json!(self.elapsed.as_secs_f64());
        }
        v
    }
}

type Check = fn(&VerifyConfig, &mut ChaCha8Rng) -> Result<(bool, String)>;

const CRITERIA: [(&str, u64, Check); 13] = [
    ("nerve dimension equals cover order", 1, nerve_order),
    ("star cover order equals complex dimension", 1, star_order),
    ("cube dimension witnesses", 60, cube_witnesses),
    ("Lebesgue witness displacement", 10, witness),
    ("block system identities", 30, block_identities),
    ("minimality probe", 30, minimality),
    ("Rokhlin towers from markers", 5, rokhlin),
    ("distinct index lemma", 1, distinct),
    ("generic pattern matrices", 30, patterns),
    ("epsilon-injective map", 10, menger),
    ("sphere reflection demo", 5, sphere),
    ("window index lemma", 5, window_index),
    ("periodic dimension calculators", 1, perdim_suite),
];

pub fn criterion_count() -> usize {
    CRITERIA.len()
}

/// Runs one criterion; budget errors and failed checks come back as a
/// failing result, other errors are returned.
pub fn run_criterion(id: usize, cfg: &VerifyConfig) -> Result<CriterionResult> {
    let (name, secs, check) = *CRITERIA
        .get(id.wrapping_sub(1))
        .ok_or_else(|| Error::input(format!("no criterion {id}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(1000).wrapping_add(id as u64));
    let start = Instant::now();
    let outcome = check(cfg, &mut rng);
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(secs);
    let (ok, detail) = match outcome {
        Ok(r) => r,
        Err(e @ (Error::Input(_) | Error::Overflow(_))) => return Err(e),
        Err(e) => (false, format!("{}: {}", e.kind(), e.detail())),
    };
    let passed = ok && elapsed < limit;
    let detail = if ok && !passed { format!("{detail}; over the time budget") } else { detail };
    Ok(CriterionResult { id, name, passed, detail, elapsed, limit })
}

pub fn verify_all(cfg: &VerifyConfig) -> Result<Vec<CriterionResult>> {
    cfg.validate()?;
    (1..=CRITERIA.len())
        .filter(|i| cfg.only.is_empty() || cfg.only.contains(i))
        .map(|i| run_criterion(i, cfg))
        .collect()
}

fn random_cover(rng: &mut ChaCha8Rng) -> Result<Cover> {
    let n = rng.gen_range(1..=10);
    let k = rng.gen_range(1..=6);
    let mut sets: Vec<BTreeSet<usize>> = (0..k)
        .map(|_| (0..n).filter(|_| rng.gen_bool(0.35)).collect())
        .collect();
    for p in 0..n {
        if !sets.iter().any(|s| s.contains(&p)) {
            let j = rng.gen_range(0..k);
            sets[j].insert(p);
        }
    }
    let sets: Vec<Vec<usize>> = sets.into_iter().filter(|s| !s.is_empty()).map(|s| s.into_iter().collect()).collect();
    Cover::from_sets(Arc::new(GroundSet::range(n)), sets)
}

fn nerve_order(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut bad = 0;
    for _ in 0..cfg.covers {
        let c = random_cover(rng)?;
        if nerve(&c).dimension() != c.order() as isize {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{}/{} covers agree", cfg.covers - bad, cfg.covers)))
}

fn random_complex(rng: &mut ChaCha8Rng) -> Result<AbstractComplex> {
    let n = rng.gen_range(1..=8);
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let facets: Vec<Vec<String>> = (0..rng.gen_range(1..=5))
        .map(|_| {
            let size = rng.gen_range(1..=n.min(4));
            let mut idx: Vec<usize> = (0..n).collect();
            for i in 0..size {
                let j = rng.gen_range(i..n);
                idx.swap(i, j);
            }
            idx[..size].iter().map(|&i| names[i].clone()).collect()
        })
        .collect();
    AbstractComplex::from_ids(&names, &facets)
}

fn star_order(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut bad = 0;
    for _ in 0..cfg.complexes {
        let k = random_complex(rng)?;
        if star_cover(&k).order() as isize != k.dimension() {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{}/{} complexes agree", cfg.complexes - bad, cfg.complexes)))
}

fn cube_witnesses(_: &VerifyConfig, _: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let eps = q(1, 4);
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 1..=3 {
        let c = brick_cover(n, &eps)?;
        let order = exact_order(&c)?;
        let fine = order == n && face_condition(&c) && c.mesh_squared() <= &eps * &eps;
        ok &= fine;
        parts.push(format!("brick n={n}: {} boxes, order {order}", c.len()));
    }
    let one = exhaustive_min_order(1, 4, 3)?.min_order;
    let two = exhaustive_min_order(2, 2, 4)?.min_order;
    ok &= one == 1 && two >= 2;
    parts.push(format!("exhaustive (1,4,3) = {one}, (2,2,4) = {two}"));
    Ok((ok, parts.join("; ")))
}

fn witness(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let c = punctured_square_fixture();
    let r = lebesgue_witness(&c, cfg.witness_grid, rng.gen())?;
    Ok((
        r.min_displacement > 1e-6,
        format!(
            "order {} cover, min displacement {:.6} over {} lattice points",
            exact_order(&c)?,
            r.min_displacement,
            r.evaluated
        ),
    ))
}

fn block_identities(_: &VerifyConfig, _: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [q(1, 2), q(1, 3), q(2, 3), q(7, 10)] {
        let sys = BlockSystem::build(r.clone(), 5, 2)?;
        for n in 0..=sys.depth() {
            let f = sys.free_dim_ratio(n)?;
            let s = sys.stage(n)?;
            ok &= f == sys.product_formula(n)?;
            ok &= sys.index_set(n)?.index_density(s.q as u64)? == f;
            if n > 0 {
                let p = sys.stage(n - 1)?;
                ok &= s.pattern.dim() * p.q == p.pattern.dim() * (s.q - 2 * s.l);
            }
            for k in [1u64, 2, 7, 100] {
                let gap = sys.upper_bound_mdim(n, k)? - &f;
                ok &= gap == (Q::one() - &f) / Q::from_integer(k.into());
            }
        }
        if sys.exact() {
            ok &= sys.lower_bound_mdim() == r;
        }
        let qs: Vec<String> = sys.stages().iter().map(|s| s.q.to_string()).collect();
        parts.push(format!("r={r}: a={:?} q=[{}] lower {}", sys.a_sequence(), qs.join(","), sys.lower_bound_mdim()));
    }
    Ok((ok, parts.join("; ")))
}

fn minimality(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let sys = BlockSystem::build(q(1, 2), 1, 2)?;
    let r = sys.minimality_probe(0, cfg.probe_trials, rng.gen())?;
    Ok((
        r.holds(),
        format!("{}/{} within {}, worst {}", r.successes, r.trials, r.tolerance, r.worst_distance),
    ))
}

fn rokhlin(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut ok = 0;
    let mut literal = 0;
    for i in 0..cfg.rokhlin_systems {
        let n = [2usize, 3, 5][i % 3];
        let lengths: Vec<usize> = (0..rng.gen_range(1..=5)).map(|_| rng.gen_range(n..=5 * n)).collect();
        let sys = FinitePermSystem::random(rng, &lengths)?;
        let Some(f) = find_marker(&sys, n) else { continue };
        let rep = rokhlin_property_check(&sys, n, &f, &f, None)?;
        if rep.holds() {
            ok += 1;
        }
        if rep.defect.is_subset(&sys.image(&f, 1)) {
            literal += 1;
        }
    }
    let total = cfg.rokhlin_systems;
    Ok((
        ok == total,
        format!("{ok}/{total} systems: marker found, E_f in T^-1 U and separated; E_f in T(U) literally on {literal}/{total}"),
    ))
}

fn distinct(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut ok = 0;
    for _ in 0..cfg.distinct_cases {
        let n = rng.gen_range(1..=6);
        let p = rng.gen_range(6 * n as u64 + 1..=6 * n as u64 + 60);
        let l = rng.gen_range(1..p as i64);
        let rel = OrbitRelation::SameOrbit { offset: l, period: Some(p) };
        let idx = distinct_indices(rel, n)?;
        if idx.len() == 2 * n + 1 && replay_distinct(rel, &idx) {
            ok += 1;
        }
    }
    Ok((ok == cfg.distinct_cases, format!("{ok}/{} replays give 2(2n+1) distinct points", cfg.distinct_cases)))
}

fn patterns(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut singular = 0;
    let mut degenerate = 0;
    let mut symbolic = 0;
    let mut symbolic_bad = 0;
    for i in 0..cfg.patterns {
        let size = 1 + i % 6;
        let m = random_square_pattern(rng, size);
        singular += pattern_generic_invertibility(&m, cfg.pattern_trials, rng.gen())?.degenerate;
        if size <= 3 {
            symbolic += 1;
            if !symbolic_det_nonvanishing(&m)? {
                symbolic_bad += 1;
            }
        }
        let k = 1 + i % 3;
        let a = random_affine_pattern(rng, k);
        degenerate += pattern_generic_affine(&a, cfg.pattern_trials, rng.gen(), Sampler::Uniform)?.degenerate;
        if a.height() <= 3 {
            symbolic += 1;
            if !symbolic_affine_nonvanishing(&a)? {
                symbolic_bad += 1;
            }
        }
    }
    Ok((
        singular == 0 && degenerate == 0 && symbolic_bad == 0,
        format!(
            "{} square and {} affine patterns x {} trials: {singular} singular, {degenerate} degenerate; symbolic {}/{symbolic} nonzero",
            cfg.patterns,
            cfg.patterns,
            cfg.pattern_trials,
            symbolic - symbolic_bad
        ),
    ))
}

fn menger(_: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let n = 200usize;
    let cloud = PointCloud::new((0..n as i64).map(|j| vec![q(j, 199)]).collect())?;
    let mut sets = Vec::new();
    let mut s = 0;
    while s < n {
        sets.push((s..(s + 18).min(n)).collect());
        s += 15;
    }
    let cover = Cover::from_sets(Arc::new(GroundSet::range(n)), sets)?;
    let eps = q(1, 10);
    let delta = q(1, 20);
    let f: Vec<Vec<Q>> = cloud
        .points()
        .iter()
        .map(|p| {
            let t = &p[0];
            vec![t / qi(4), t * t / qi(8), q(1, 2)]
        })
        .collect();
    let r = eps_injective_map(&cloud, &cover, &f, &eps, &delta, rng.gen())?;
    Ok((
        r.holds(&delta) && cover.order() == 1,
        format!(
            "order {} cover of {} points, {} pairs, {} collisions, {} violations, deviation {}",
            cover.order(),
            n,
            r.pairs_checked,
            r.collisions,
            r.violations,
            r.deviation
        ),
    ))
}

fn sphere(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let r = sphere_demo(cfg.sphere_samples, rng.gen())?;
    Ok((
        r.holds(),
        format!(
            "{} samples, {} equivariance failures, {} injectivity failures over {} pairs",
            r.samples, r.equivariance_failures, r.injectivity_failures, r.pairs_checked
        ),
    ))
}

fn window_index(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut agree = 0;
    for i in 0..cfg.n1_sequences {
        let m = [4usize, 8, 16][i % 3];
        let start = q(rng.gen_range(-200..200), rng.gen_range(1..=4));
        let mut v: Vec<Q> = (0..2 * m as i64).map(|k| &start + qi(k)).collect();
        if rng.gen_bool(0.7) {
            let j = rng.gen_range(0..2 * m - 1);
            let mut jump = q(rng.gen_range(-50..50), rng.gen_range(1..=3));
            if jump == Q::one() {
                jump = qi(2);
            }
            let shift = &v[j] + jump - &v[j + 1];
            for x in v.iter_mut().skip(j + 1) {
                *x += &shift;
            }
        }
        let oracle = window_index_oracle(&v, m)?;
        if let Ok(r) = find_window_index(&v, m) {
            if window_conditions(&v, m, r)? && oracle.contains(&r) {
                agree += 1;
            }
        }
    }
    Ok((
        agree == cfg.n1_sequences,
        format!("{agree}/{} sequences: index found, conditions hold, oracle agrees", cfg.n1_sequences),
    ))
}

fn perdim_suite(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut ok = true;
    for d in 1..=3 {
        ok &= perdim(&SymbolicSystemDescriptor::full_shift(d), 12)? == qi(d as i64);
    }
    let k_max = 8;
    let mut mono = 0;
    let mut power = 0;
    for _ in 0..cfg.descriptors {
        let mut dims = BTreeMap::new();
        let mut sub = BTreeMap::new();
        for k in 1..=3 * k_max {
            if rng.gen_bool(0.8) {
                let d = rng.gen_range(0..=2 * k);
                dims.insert(k, d);
                if rng.gen_bool(0.7) {
                    sub.insert(k, rng.gen_range(0..=d));
                }
            }
        }
        dims.entry(3 * k_max).or_insert(0);
        let x = SymbolicSystemDescriptor::table(dims);
        let y = SymbolicSystemDescriptor::table(sub);
        if perdim(&y, k_max)? <= perdim(&x, k_max)? {
            mono += 1;
        }
        let m = rng.gen_range(1..=3);
        let (lhs, rhs) = perdim_power_bound(&x, m, k_max)?;
        if lhs <= rhs {
            power += 1;
        }
    }
    let n = cfg.descriptors;
    ok &= mono == n && power == n;
    Ok((ok, format!("full shifts d=1..3 exact; monotone {mono}/{n}; power bound {power}/{n}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_is_usage_error() {
        let cfg = VerifyConfig { probe_trials: 0, ..VerifyConfig::default() };
        assert!(matches!(verify_all(&cfg), Err(Error::Input(_))));
        let cfg = VerifyConfig { only: vec![14], ..VerifyConfig::default() };
        assert!(verify_all(&cfg).is_err());
    }

    #[test]
    fn cheap_criteria_pass() {
        let cfg = VerifyConfig { only: vec![1, 2, 8, 13], ..VerifyConfig::default() };
        for r in verify_all(&cfg).unwrap() {
            assert!(r.passed, "{}", r.line());
        }
    }
}

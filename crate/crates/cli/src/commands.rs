use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use meandim::blocksys::BlockSystem;
use meandim::cover::{self, Assignments, Cover, GroundSet, RefinementSource, Singletons};
use meandim::cube::{self, BoxCover, Semantics};
use meandim::dynsys::{self, FinitePermSystem, OrbitRelation, StopRate, SymbolicSystemDescriptor};
use meandim::embed::{self, PartitionOfUnity, PatternMatrix, PointCloud, PouLemma, PouOptions, PouSpec, Sampler};
use meandim::rational::{parse_q, q, q_from_json, q_to_f64, q_to_json, qi};
use meandim::simplicial::{self, AbstractComplex, GeometricComplex};
use meandim::verify::{self, VerifyConfig};
use meandim::Q;

use crate::report::{CliError, Outcome};
use crate::{BlocksysOp, Command, ComplexOp, CoverOp, CubeOp, Ctx, DynsysOp, EmbedOp, VerifyArgs};

type Res = Result<Outcome, CliError>;

pub fn run(cmd: &Command, ctx: &mut Ctx) -> Res {
    match cmd {
        Command::Cover(op) => cover_cmd(op, ctx),
        Command::Complex(op) => complex_cmd(op, ctx),
        Command::Cube(op) => cube_cmd(op, ctx),
        Command::Blocksys(op) => blocksys_cmd(op, ctx),
        Command::Dynsys(op) => dynsys_cmd(op, ctx),
        Command::Embed(op) => embed_cmd(op, ctx),
        Command::Verify(a) => verify_cmd(a, ctx),
    }
}

/// Reads a JSON file. A full report is accepted in place of its result.
fn load(ctx: &mut Ctx, path: &Path) -> Result<Value, CliError> {
    let shown = path.display().to_string();
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(CliError::not_found(&shown)),
        Err(e) => return Err(CliError::io(&shown, e)),
    };
    let v: Value = serde_json::from_slice(&bytes).map_err(|e| CliError::parse(&shown, e.to_string()))?;
    ctx.inputs.push(bytes);
    if v.get("schema").and_then(Value::as_str) == Some(crate::report::SCHEMA) {
        if let Some(r) = v.get("result") {
            return Ok(r.clone());
        }
    }
    Ok(v)
}

/// Parses with `f`, tagging errors with the file they came from.
fn load_as<T>(ctx: &mut Ctx, path: &Path, f: impl FnOnce(&Value) -> meandim::Result<T>) -> Result<T, CliError> {
    let v = load(ctx, path)?;
    f(&v).map_err(|e| CliError::from(e).in_file(&path.display().to_string()))
}

fn rational(s: &str, what: &str) -> Result<Q, CliError> {
    parse_q(s).map_err(|e| CliError::usage(format!("{what}: {}", e.detail())))
}

fn csv<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| CliError::usage(format!("{what}: cannot parse {x:?}"))))
        .collect()
}

fn ids(s: &str) -> Vec<String> {
    s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
}

fn cover_cmd(op: &CoverOp, ctx: &mut Ctx) -> Res {
    Ok(match op {
        CoverOp::Order { file, point } => {
            let c = load_as(ctx, file, Cover::from_json)?;
            match point {
                Some(p) => Outcome::new(json!({"point": p, "order_at": c.order_at_id(p)?})),
                None => {
                    let mut mult = Map::new();
                    for (p, m) in c.ground().ids().iter().zip(c.multiplicities()) {
                        mult.insert(p.clone(), json!(m));
                    }
                    Outcome::new(json!({"order": c.order(), "multiplicities": mult, "members": c.len()}))
                }
            }
        }
        CoverOp::Mesh { file } => {
            let c = load_as(ctx, file, Cover::from_json)?;
            Outcome::new(json!({"mesh": q_to_json(&c.mesh()?)}))
        }
        CoverOp::Join { a, b } => {
            let a = load_as(ctx, a, Cover::from_json)?;
            let b = load_as(ctx, b, Cover::from_json)?;
            let j = cover::join(&a, &b)?;
            let refines_both = cover::refines(&j, &a)? && cover::refines(&j, &b)?;
            let bound = j.order() <= a.order() + b.order() + a.order() * b.order();
            let mut v = j.to_json();
            v["order"] = json!(j.order());
            Outcome::new(v)
                .check("join refines both covers", refines_both)
                .check("order(join) <= (ord a + 1)(ord b + 1) - 1", bound)
        }
        CoverOp::Refines { beta, alpha } => {
            let b = load_as(ctx, beta, Cover::from_json)?;
            let a = load_as(ctx, alpha, Cover::from_json)?;
            Outcome::new(json!({"refines": cover::refines(&b, &a)?}))
        }
        CoverOp::Pullback { cover: cf, map } => {
            let c = load_as(ctx, cf, Cover::from_json)?;
            let m = load(ctx, map)?;
            let shown = map.display().to_string();
            let domain: Vec<String> = m
                .get("domain")
                .and_then(Value::as_array)
                .ok_or_else(|| CliError::parse(&shown, "missing \"domain\" array"))?
                .iter()
                .map(|x| x.as_str().map(String::from).unwrap_or_else(|| x.to_string()))
                .collect();
            let f: HashMap<String, String> = m
                .get("f")
                .and_then(Value::as_object)
                .ok_or_else(|| CliError::parse(&shown, "missing \"f\" object"))?
                .iter()
                .map(|(k, v)| (k.clone(), v.as_str().map(String::from).unwrap_or_else(|| v.to_string())))
                .collect();
            let g = Arc::new(GroundSet::new(domain)?);
            let p = cover::pullback_ids(&c, g, &f)?;
            let mut v = p.to_json();
            v["order"] = json!(p.order());
            Outcome::new(v).check("order does not increase", p.order() <= c.order())
        }
        CoverOp::Merge { alpha, gamma, phi } => {
            let a = load_as(ctx, alpha, Cover::from_json)?;
            let g = load_as(ctx, gamma, Cover::from_json)?;
            let p = load(ctx, phi)?;
            let phi: HashMap<String, String> = p
                .as_object()
                .ok_or_else(|| CliError::parse(&phi.display().to_string(), "assignment must be an object"))?
                .iter()
                .map(|(k, v)| (k.clone(), v.as_str().map(String::from).unwrap_or_else(|| v.to_string())))
                .collect();
            let m = cover::merge_refinement(&a, &g, &phi)?;
            let ok = cover::refines(&m, &a)? && m.order() <= g.order();
            let mut v = m.to_json();
            v["order"] = json!(m.order());
            Outcome::new(v).check("merged cover refines alpha with order at most order(gamma)", ok)
        }
        CoverOp::DUpper { file, budget, generator } => {
            let c = load_as(ctx, file, Cover::from_json)?;
            let budget = ctx.config.num("budget", *budget, 10_000)?;
            let mut source: Box<dyn RefinementSource> = match generator.as_str() {
                "assignments" => Box::new(Assignments::default()),
                "singletons" => Box::new(Singletons::default()),
                g => return Err(CliError::usage(format!("unknown generator {g:?}"))),
            };
            let d = cover::d_upper(&c, source.as_mut(), budget)?;
            Outcome::new(json!({"d_upper": d, "order": c.order(), "budget": budget, "generator": generator}))
                .check("d_upper <= order", d <= c.order())
        }
    })
}

fn geometric(ctx: &mut Ctx, file: &Path) -> Result<GeometricComplex, CliError> {
    let v = load(ctx, file)?;
    let shown = file.display().to_string();
    if v.get("coords").is_some() {
        GeometricComplex::from_json(&v, false).map_err(|e| CliError::from(e).in_file(&shown))
    } else {
        let k = AbstractComplex::from_json(&v).map_err(|e| CliError::from(e).in_file(&shown))?;
        Ok(simplicial::realize(&k))
    }
}

fn complex_cmd(op: &ComplexOp, ctx: &mut Ctx) -> Res {
    Ok(match op {
        ComplexOp::Dim { file } => {
            let k = load_as(ctx, file, AbstractComplex::from_json)?;
            Outcome::new(json!({"dimension": k.dimension(), "f_vector": simplicial::f_vector(&k)}))
        }
        ComplexOp::Nerve { cover } => {
            let c = load_as(ctx, cover, Cover::from_json)?;
            let k = simplicial::nerve(&c);
            let mut v = k.to_json();
            v["dimension"] = json!(k.dimension());
            v["cover_order"] = json!(c.order());
            Outcome::new(v).check("dimension of nerve equals order", k.dimension() == c.order() as isize)
        }
        ComplexOp::Stars { file, eps: None } => {
            let k = load_as(ctx, file, AbstractComplex::from_json)?;
            let s = simplicial::star_cover(&k);
            let mut v = s.to_json();
            v["order"] = json!(s.order());
            v["dimension"] = json!(k.dimension());
            Outcome::new(v).check("star cover order equals dimension", s.order() as isize == k.dimension())
        }
        ComplexOp::Stars { file, eps: Some(eps) } => {
            let eps = rational(eps, "--eps")?;
            let g = geometric(ctx, file)?;
            let b = simplicial::dim_upper_via_stars(&g, &eps)?;
            let order = b.cover.order();
            Outcome::new(json!({
                "dimension": b.dimension,
                "subdivisions": b.subdivisions,
                "complex_mesh_squared": q_to_json(&b.complex_mesh_squared),
                "star_mesh_squared": q_to_json(&b.star_mesh_squared),
                "eps": q_to_json(&eps),
                "order": order,
                "cover": b.cover.to_json(),
            }))
            .check("star cover order equals dimension", order == b.dimension)
            .check("star mesh below eps", b.star_mesh_squared < &eps * &eps)
        }
        ComplexOp::Subdivide { file, times } => {
            let mut g = geometric(ctx, file)?;
            let before = g.mesh_squared();
            for _ in 0..*times {
                g = simplicial::barycentric_subdivide(&g);
            }
            let after = g.mesh_squared();
            let mut v = g.to_json();
            v["mesh_squared"] = q_to_json(&after);
            Outcome::new(v).check("mesh does not grow", after <= before)
        }
        ComplexOp::Mesh { file } => {
            let g = geometric(ctx, file)?;
            let m2 = g.mesh_squared();
            Outcome::new(json!({
                "mesh_squared": q_to_json(&m2),
                "mesh": q_to_f64(&m2).sqrt(),
                "mesh_tolerance": 1e-12,
            }))
        }
    })
}

fn cube_cmd(op: &CubeOp, ctx: &mut Ctx) -> Res {
    Ok(match op {
        CubeOp::Order { file, semantics } => {
            let c = load_as(ctx, file, BoxCover::from_json)?;
            let sem = match semantics.as_str() {
                "closed" => Semantics::Closed,
                "open" => Semantics::Open,
                s => return Err(CliError::usage(format!("unknown semantics {s:?}"))),
            };
            let r = cube::order_report(&c, sem)?;
            Outcome::new(json!({
                "order": r.order,
                "witness": r.witness.iter().map(q_to_json).collect::<Vec<_>>(),
                "cells": r.cells,
                "semantics": semantics,
            }))
        }
        CubeOp::FaceCheck { file } => {
            let c = load_as(ctx, file, BoxCover::from_json)?;
            let v: Vec<Value> = cube::face_violations(&c)
                .into_iter()
                .map(|(n, axis)| json!({"box": n, "axis": axis}))
                .collect();
            Outcome::new(json!({"face_condition": v.is_empty(), "violations": v}))
        }
        CubeOp::Brick { n, eps } => {
            let eps = rational(eps, "--eps")?;
            let c = cube::brick_cover(*n, &eps)?;
            let order = cube::exact_order(&c)?;
            let face = cube::face_condition(&c);
            let mesh2 = c.mesh_squared();
            let mut v = c.to_json();
            v["order"] = json!(order);
            v["face_condition"] = json!(face);
            v["mesh_squared"] = q_to_json(&mesh2);
            Outcome::new(v)
                .check("order equals n", order == *n)
                .check("face condition", face)
                .check("mesh at most eps", mesh2 <= &eps * &eps)
        }
        CubeOp::LebesgueWitness { file, grid } => {
            let c = match file {
                Some(f) => load_as(ctx, f, BoxCover::from_json)?,
                None => cube::punctured_square_fixture(),
            };
            let grid = ctx.config.num("grid", *grid, 64)?;
            let seed = ctx.seed()?;
            let opt = cube::WitnessOptions::default();
            let r = cube::lebesgue_witness_with(&c, grid, seed, &opt)?;
            let verts: Vec<Value> = r.vertices.iter().map(|(n, s)| json!({"box": n, "corner": s})).collect();
            Outcome::new(json!({
                "fixture": file.is_none(),
                "order": cube::exact_order(&c)?,
                "grid": grid,
                "vertices": verts,
                "inflation": q_to_json(&r.inflation),
                "omega": r.omega,
                "omega_clearance": r.omega_clearance,
                "min_displacement": r.min_displacement,
                "argmin": r.argmin.iter().map(q_to_json).collect::<Vec<_>>(),
                "evaluated": r.evaluated,
                "skipped_in_holes": r.skipped,
                "tolerance": opt.tolerance,
            }))
            .check("min displacement above tolerance", r.min_displacement > opt.tolerance)
            .seeded(seed)
        }
        CubeOp::Exhaustive { n, grid, max_sets } => {
            let r = cube::exhaustive_min_order(*n, *grid, *max_sets)?;
            Outcome::new(json!({"min_order": r.min_order, "labels": r.labels, "explored": r.explored}))
        }
    })
}

fn blocksys_checks(sys: &BlockSystem) -> Result<Vec<(String, bool)>, CliError> {
    let mut ok_ratio = true;
    let mut ok_density = true;
    let mut ok_rec = true;
    for n in 0..=sys.depth() {
        let f = sys.free_dim_ratio(n)?;
        ok_ratio &= f == sys.product_formula(n)?;
        ok_density &= sys.index_set(n)?.index_density(sys.stage(n)?.q as u64)? == f;
        if n > 0 {
            let (p, s) = (sys.stage(n - 1)?, sys.stage(n)?);
            ok_rec &= s.pattern.dim() * p.q == p.pattern.dim() * (s.q - 2 * s.l);
        }
    }
    let mut out = vec![
        ("free ratio equals product formula".to_string(), ok_ratio),
        ("index density equals free ratio".to_string(), ok_density),
        ("free cell recurrence".to_string(), ok_rec),
    ];
    if sys.exact() {
        out.push(("lower bound equals r".to_string(), &sys.lower_bound_mdim() == sys.target_r()));
    }
    Ok(out)
}

fn blocksys_cmd(op: &BlocksysOp, ctx: &mut Ctx) -> Res {
    match op {
        BlocksysOp::Build { r, stages, alphabet } => {
            let r = rational(r, "--r")?;
            let sys = BlockSystem::build(r, *stages, *alphabet)?;
            let mut o = Outcome::new(sys.to_json());
            o.assertions = blocksys_checks(&sys)?;
            if let Some(s) = ctx.seed_flag.or(ctx.config.get("seed").and_then(|s| s.parse().ok())) {
                o = o.seeded(s);
            }
            Ok(o)
        }
        BlocksysOp::Bounds { file, k, power } => {
            let sys = load_as(ctx, file, BlockSystem::from_json)?;
            let ks: Vec<u64> = csv(k, "--k")?;
            let mut upper = Vec::new();
            for n in 0..=sys.depth() {
                for &k in &ks {
                    upper.push(json!({"n": n, "k": k, "bound": q_to_json(&sys.upper_bound_mdim(n, k)?)}));
                }
            }
            let (pl, pu) = sys.power_bound_scaling(*power)?;
            let lower = sys.lower_bound_mdim();
            let limit = sys.free_dim_ratio(sys.depth())?;
            let mut o = Outcome::new(json!({
                "lower_bound": q_to_json(&lower),
                "upper_bound_limit": q_to_json(&limit),
                "upper_bounds": upper,
                "power": power,
                "power_scaled": [q_to_json(&pl), q_to_json(&pu)],
                "target_r": q_to_json(sys.target_r()),
                "exact": sys.exact(),
            }));
            o.assertions = blocksys_checks(&sys)?;
            Ok(o.check("lower bound at most upper limit", lower <= limit))
        }
        BlocksysOp::Probe { file, trials, n } => {
            let sys = load_as(ctx, file, BlockSystem::from_json)?;
            let trials = ctx.config.num("trials", *trials, 100)?;
            if trials == 0 {
                return Err(CliError::usage("trials must be positive"));
            }
            if sys.depth() == 0 {
                return Err(CliError::usage("the system has no stage to probe"));
            }
            let n = n.unwrap_or(sys.depth() - 1);
            let seed = ctx.seed()?;
            let r = sys.minimality_probe(n, trials, seed)?;
            Ok(Outcome::new(r.to_json()).check("every trial finds a close shift", r.holds()).seeded(seed))
        }
    }
}

fn dynsys_cmd(op: &DynsysOp, ctx: &mut Ctx) -> Res {
    Ok(match op {
        DynsysOp::Random { lengths } => {
            let lengths: Vec<usize> = csv(lengths, "--lengths")?;
            let seed = ctx.seed()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sys = FinitePermSystem::random(&mut rng, &lengths)?;
            Outcome::new(sys.to_json()).seeded(seed)
        }
        DynsysOp::Marker { file, n, set } => {
            let sys = load_as(ctx, file, FinitePermSystem::from_json)?;
            let names = |f: &BTreeSet<usize>| f.iter().map(|&x| sys.ids()[x].clone()).collect::<Vec<_>>();
            match set {
                Some(s) => {
                    let f = sys.resolve(&ids(s))?;
                    let ok = dynsys::is_marker(&sys, &f, *n)?;
                    Outcome::new(json!({
                        "marker": names(&f),
                        "is_marker": ok,
                        "return_bound": dynsys::marker_return_bound(&sys, &f),
                    }))
                }
                None => match dynsys::find_marker(&sys, *n) {
                    Some(f) => {
                        let ok = dynsys::is_marker(&sys, &f, *n)?;
                        Outcome::new(json!({
                            "marker": names(&f),
                            "is_marker": ok,
                            "return_bound": dynsys::marker_return_bound(&sys, &f),
                        }))
                        .check("found set is a marker", ok)
                    }
                    None => Outcome::new(json!({"marker": Value::Null, "reason": format!("some cycle is shorter than {n}")})),
                },
            }
        }
        DynsysOp::Rokhlin { file, n, marker, u, ramp } => {
            let sys = load_as(ctx, file, FinitePermSystem::from_json)?;
            let f = match marker {
                Some(m) => sys.resolve(&ids(m))?,
                None => dynsys::find_marker(&sys, *n)
                    .ok_or_else(|| CliError::from(meandim::Error::pre(format!("no {n}-marker: a cycle is shorter than {n}"))))?,
            };
            let uset = match u {
                Some(u) => sys.resolve(&ids(u))?,
                None => f.clone(),
            };
            let rate = ramp.then(|| StopRate::linear_ramp(&sys, &f, &uset));
            let r = dynsys::rokhlin_property_check(&sys, *n, &f, &uset, rate.as_ref())?;
            let mut v = r.to_json(&sys);
            v["marker"] = json!(f.iter().map(|&x| sys.ids()[x].clone()).collect::<Vec<_>>());
            v["u"] = json!(uset.iter().map(|&x| sys.ids()[x].clone()).collect::<Vec<_>>());
            Outcome::new(v)
                .check("defect inside T^-1 U", r.contained)
                .check("defect disjoint from its first n-1 images", r.separated)
        }
        DynsysOp::Perdim { file, k_max, power } => {
            let d = load_as(ctx, file, SymbolicSystemDescriptor::from_json)?;
            let p = dynsys::perdim(&d, *k_max)?;
            match power {
                None => Outcome::new(json!({"perdim": q_to_json(&p), "k_max": k_max})),
                Some(m) => {
                    let (lhs, rhs) = dynsys::perdim_power_bound(&d, *m, *k_max)?;
                    Outcome::new(json!({
                        "perdim": q_to_json(&p),
                        "k_max": k_max,
                        "power": m,
                        "perdim_power": q_to_json(&lhs),
                        "m_times_perdim": q_to_json(&rhs),
                    }))
                    .check("perdim(T^m) <= m perdim(T)", lhs <= rhs)
                }
            }
        }
        DynsysOp::Indices { n, offset, period } => {
            let rel = match offset {
                None => OrbitRelation::DistinctOrbits,
                Some(o) => OrbitRelation::SameOrbit { offset: *o, period: *period },
            };
            let idx = dynsys::distinct_indices(rel, *n)?;
            let ok = dynsys::replay_distinct(rel, &idx);
            Outcome::new(json!({"indices": idx, "count": idx.len()})).check("replayed points are distinct", ok)
        }
    })
}

fn q_rows(v: &Value, what: &str) -> meandim::Result<Vec<Vec<Q>>> {
    v.as_array()
        .ok_or_else(|| meandim::Error::input(format!("{what} must be an array of vectors")))?
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| meandim::Error::input(format!("{what}: each entry must be an array")))?
                .iter()
                .map(q_from_json)
                .collect()
        })
        .collect()
}

fn field<'a>(v: &'a Value, k: &str) -> meandim::Result<&'a Value> {
    v.get(k).ok_or_else(|| meandim::Error::input(format!("missing {k:?}")))
}

/// `{"U1": [0, 1], ...}` over point indices `0..n`.
fn index_cover(v: &Value, n: usize) -> meandim::Result<Cover> {
    let m = v.as_object().ok_or_else(|| meandim::Error::input("cover must map names to point lists"))?;
    let mut members = Vec::new();
    for (name, pts) in m {
        let pts = pts
            .as_array()
            .ok_or_else(|| meandim::Error::input(format!("member {name:?} must be an array")))?
            .iter()
            .map(|p| match p {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect::<Vec<_>>();
        members.push((name.clone(), pts));
    }
    Cover::from_ids(Arc::new(GroundSet::range(n)), members)
}

struct PouInput {
    cloud: PointCloud,
    d: usize,
    eps: Q,
    primary: (Cover, Vec<Vec<Q>>, usize),
    secondary: Option<(Cover, Vec<Vec<Q>>, usize)>,
}

fn pou_part(v: &Value, n: usize, d: usize) -> meandim::Result<(Cover, Vec<Vec<Q>>, usize)> {
    let cover = index_cover(field(v, "cover")?, n)?;
    let blocks = field(v, "blocks")?
        .as_u64()
        .ok_or_else(|| meandim::Error::input("\"blocks\" must be a positive integer"))? as usize;
    let targets = match v.get("targets") {
        None => vec![vec![q(1, 2); blocks * d]; cover.len()],
        Some(t) => {
            let t = t.as_object().ok_or_else(|| meandim::Error::input("\"targets\" must map member names to vectors"))?;
            cover
                .names()
                .iter()
                .map(|name| {
                    let row = t.get(name).ok_or_else(|| meandim::Error::input(format!("no target for {name:?}")))?;
                    Ok(q_rows(&json!([row]), "targets")?.remove(0))
                })
                .collect::<meandim::Result<_>>()?
        }
    };
    Ok((cover, targets, blocks))
}

fn pou_input(v: &Value) -> meandim::Result<PouInput> {
    let cloud = PointCloud::new(q_rows(field(v, "points")?, "points")?)?;
    let d = field(v, "d")?.as_u64().ok_or_else(|| meandim::Error::input("\"d\" must be a positive integer"))? as usize;
    let eps = q_from_json(field(v, "eps")?)?;
    let n = cloud.len();
    let primary = pou_part(field(v, "primary")?, n, d)?;
    let secondary = v.get("secondary").map(|s| pou_part(s, n, d)).transpose()?;
    Ok(PouInput { cloud, d, eps, primary, secondary })
}

/// Points, cover, map values, eps, delta.
type MengerInput = (PointCloud, Cover, Vec<Vec<Q>>, Q, Q);

fn menger_fixture() -> meandim::Result<MengerInput> {
    let n = 200usize;
    let cloud = PointCloud::new((0..n as i64).map(|j| vec![q(j, 199)]).collect())?;
    let sets: Vec<Vec<usize>> = (0..n).step_by(15).map(|s| (s..(s + 18).min(n)).collect()).collect();
    let cover = Cover::from_sets(Arc::new(GroundSet::range(n)), sets)?;
    let f = cloud
        .points()
        .iter()
        .map(|p| vec![&p[0] / qi(4), &p[0] * &p[0] / qi(8), q(1, 2)])
        .collect();
    Ok((cloud, cover, f, q(1, 10), q(1, 20)))
}

fn embed_cmd(op: &EmbedOp, ctx: &mut Ctx) -> Res {
    Ok(match op {
        EmbedOp::GeneralPosition { file, perturb } => {
            let v = load(ctx, file)?;
            let shown = file.display().to_string();
            let pts = q_rows(v.get("points").unwrap_or(&v), "points").map_err(|e| CliError::from(e).in_file(&shown))?;
            let before = embed::is_general_position(&pts)?;
            match perturb {
                None => Outcome::new(json!({"general_position": before, "points": pts.len()})),
                Some(eps) => {
                    let eps = rational(eps, "--perturb")?;
                    let seed = ctx.seed()?;
                    let moved = embed::perturb_general_position(&pts, &eps, seed)?;
                    let after = embed::is_general_position(&moved)?;
                    let disp = pts.iter().zip(&moved).map(|(a, b)| embed::sup_dist(a, b)).max().unwrap_or_default();
                    let rows: Vec<Value> = moved.iter().map(|p| json!(p.iter().map(q_to_json).collect::<Vec<_>>())).collect();
                    Outcome::new(json!({
                        "general_position_before": before,
                        "general_position": after,
                        "max_displacement": q_to_json(&disp),
                        "points": rows,
                    }))
                    .check("perturbed points in general position", after)
                    .check("displacement below eps", disp < eps)
                    .seeded(seed)
                }
            }
        }
        EmbedOp::Window { file, lo, hi } => {
            let v = load(ctx, file)?;
            let shown = file.display().to_string();
            let parse = || -> meandim::Result<_> {
                let t: Vec<Option<usize>> = field(&v, "T")?
                    .as_array()
                    .ok_or_else(|| meandim::Error::input("\"T\" must be an array of indices or nulls"))?
                    .iter()
                    .map(|x| x.as_u64().map(|y| y as usize))
                    .collect();
                let f = q_rows(field(&v, "f")?, "f")?;
                let pairs: Vec<(usize, usize)> = match v.get("pairs") {
                    None => Vec::new(),
                    Some(p) => p
                        .as_array()
                        .ok_or_else(|| meandim::Error::input("\"pairs\" must be an array"))?
                        .iter()
                        .map(|pr| match pr.as_array().map(|a| (a.first().and_then(Value::as_u64), a.get(1).and_then(Value::as_u64))) {
                            Some((Some(a), Some(b))) => Ok((a as usize, b as usize)),
                            _ => Err(meandim::Error::input("each pair must be [x, y]")),
                        })
                        .collect::<meandim::Result<_>>()?,
                };
                Ok((t, f, pairs))
            };
            let (t, f, pairs) = parse().map_err(|e| CliError::from(e).in_file(&shown))?;
            let w = embed::window_map(&t, &f, *lo, *hi)?;
            let sep = embed::embedding_criterion(&t, &f, *lo, *hi, &pairs)?;
            let rows: Vec<Value> = w.iter().map(|r| json!(r.iter().map(q_to_json).collect::<Vec<_>>())).collect();
            Outcome::new(json!({"window": [lo, hi], "values": rows, "separating_index": sep}))
                .check("every pair separated", sep.iter().all(Option::is_some))
        }
        EmbedOp::Menger { file } => {
            let seed = ctx.seed()?;
            let (cloud, cover, f, eps, delta) = match file {
                None => menger_fixture()?,
                Some(p) => {
                    let v = load(ctx, p)?;
                    let shown = p.display().to_string();
                    let parse = || -> meandim::Result<_> {
                        let cloud = PointCloud::new(q_rows(field(&v, "points")?, "points")?)?;
                        let cover = index_cover(field(&v, "cover")?, cloud.len())?;
                        let f = q_rows(field(&v, "f")?, "f")?;
                        Ok((cloud, cover, f, q_from_json(field(&v, "eps")?)?, q_from_json(field(&v, "delta")?)?))
                    };
                    parse().map_err(|e| CliError::from(e).in_file(&shown))?
                }
            };
            let r = embed::eps_injective_map(&cloud, &cover, &f, &eps, &delta, seed)?;
            let mut v = r.to_json();
            v["eps"] = q_to_json(&eps);
            v["delta"] = q_to_json(&delta);
            v["order"] = json!(cover.order());
            Outcome::new(v)
                .check("equal images only for points closer than eps", r.violations == 0)
                .check("sup distance to f at most delta", r.deviation <= delta)
                .seeded(seed)
        }
        EmbedOp::PatternTest { file, random, affine, trials } => {
            let seed = ctx.seed()?;
            let trials = ctx.config.num("trials", *trials, 100)?;
            if trials == 0 {
                return Err(CliError::usage("trials must be positive"));
            }
            let m = match (file, random) {
                (Some(p), None) => load_as(ctx, p, PatternMatrix::from_json)?,
                (None, Some(size)) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    if *size == 0 {
                        return Err(CliError::usage("--random needs a positive size"));
                    }
                    if *affine {
                        embed::random_affine_pattern(&mut rng, *size)
                    } else {
                        embed::random_square_pattern(&mut rng, *size)
                    }
                }
                _ => return Err(CliError::usage("give either a pattern file or --random SIZE")),
            };
            let (r, symbolic) = if *affine {
                m.check_affine()?;
                let r = embed::pattern_generic_affine(&m, trials, seed, Sampler::Uniform)?;
                let s = if m.height() <= 5 { Some(embed::symbolic_affine_nonvanishing(&m)?) } else { None };
                (r, s)
            } else {
                m.check_square()?;
                let r = embed::pattern_generic_invertibility(&m, trials, seed)?;
                let s = if m.height() <= 6 { Some(embed::symbolic_det_nonvanishing(&m)?) } else { None };
                (r, s)
            };
            let mut v = r.to_json();
            v["pattern"] = m.to_json();
            v["symbolic_nonzero"] = json!(symbolic);
            v["sampler"] = json!("uniform 1..=1000000");
            let mut o = Outcome::new(v).check("no degenerate sample", r.degenerate == 0).seeded(seed);
            if let Some(s) = symbolic {
                o = o.check("symbolic determinant not identically zero", s);
            }
            o
        }
        EmbedOp::Pou { file, lemma, s, l, n, lambdas } => {
            let seed = ctx.seed()?;
            let inp = load_as(ctx, file, pou_input)?;
            let lemma = match lemma.as_str() {
                "approx1" => PouLemma::Approx1 {
                    s: s.ok_or_else(|| CliError::usage("approx1 needs --s"))?,
                    lambdas: lambdas.split(',').map(|x| rational(x.trim(), "--lambdas")).collect::<Result<_, _>>()?,
                },
                "approx2" => PouLemma::Approx2,
                "approx3" => PouLemma::Approx3 { l: l.ok_or_else(|| CliError::usage("approx3 needs --l"))? },
                "approx4" => PouLemma::Approx4 { n: n.ok_or_else(|| CliError::usage("approx4 needs --n"))? },
                other => return Err(CliError::usage(format!("unknown lemma {other:?}"))),
            };
            let p1 = PartitionOfUnity::tent(&inp.cloud, &inp.primary.0, None)?;
            let spec1 = PouSpec { pou: &p1, targets: inp.primary.1.clone(), blocks: inp.primary.2 };
            let p2 = inp.secondary.as_ref().map(|s| PartitionOfUnity::tent(&inp.cloud, &s.0, None)).transpose()?;
            let spec2 = match (&p2, &inp.secondary) {
                (Some(p), Some(s)) => Some(PouSpec { pou: p, targets: s.1.clone(), blocks: s.2 }),
                _ => None,
            };
            let opt = PouOptions { seed, ..PouOptions::default() };
            let r = embed::pou_map_builder(&lemma, inp.d, &spec1, spec2.as_ref(), &inp.eps, &opt)?;
            let mut v = r.to_json();
            v["verification"] = json!("anchors plus a seeded sample of points; lambda grid for approx1");
            v["values"] = json!(r.values.iter().map(|x| x.iter().map(q_to_json).collect::<Vec<_>>()).collect::<Vec<_>>());
            Outcome::new(v).check("anchor deviation below eps", r.anchor_deviation < inp.eps).seeded(seed)
        }
        EmbedOp::N1Find { m, values } => {
            let vals: Vec<Q> = values.split(',').map(|x| rational(x.trim(), "--values")).collect::<Result<_, _>>()?;
            let r = embed::find_window_index(&vals, *m)?;
            let oracle = embed::window_index_oracle(&vals, *m)?;
            let ok = embed::window_conditions(&vals, *m, r)?;
            Outcome::new(json!({"r": r, "oracle": oracle}))
                .check("conditions hold at r", ok)
                .check("oracle contains r", oracle.contains(&r))
        }
        EmbedOp::SphereDemo { samples } => {
            let seed = ctx.seed()?;
            let samples = ctx.config.num("samples", *samples, 150)?;
            let r = embed::sphere_demo(samples, seed)?;
            Outcome::new(r.to_json())
                .check("equivariance", r.equivariance_failures == 0 && r.window_map_mismatches == 0)
                .check("injectivity of the first two coordinates", r.injectivity_failures == 0)
                .seeded(seed)
        }
    })
}

fn verify_cmd(a: &VerifyArgs, ctx: &mut Ctx) -> Res {
    let c = &ctx.config;
    let d = VerifyConfig::default();
    let cfg = VerifyConfig {
        seed: c.num("seed", ctx.seed_flag, d.seed)?,
        covers: c.num("covers", None, d.covers)?,
        complexes: c.num("complexes", None, d.complexes)?,
        witness_grid: c.num("witness_grid", None, d.witness_grid)?,
        probe_trials: c.num("probe_trials", None, c.num("trials", None, d.probe_trials)?)?,
        rokhlin_systems: c.num("rokhlin_systems", None, d.rokhlin_systems)?,
        distinct_cases: c.num("distinct_cases", None, d.distinct_cases)?,
        patterns: c.num("patterns", None, d.patterns)?,
        pattern_trials: c.num("pattern_trials", None, c.num("trials", None, d.pattern_trials)?)?,
        sphere_samples: c.num("sphere_samples", None, d.sphere_samples)?,
        n1_sequences: c.num("n1_sequences", None, d.n1_sequences)?,
        descriptors: c.num("descriptors", None, d.descriptors)?,
        only: match &a.only {
            Some(s) => csv(s, "--only")?,
            None => Vec::new(),
        },
    };
    let timing = c.flag("timing", false)?;
    let results = verify::verify_all(&cfg)?;
    let rows: Vec<Value> = results.iter().map(|r| r.to_json(timing)).collect();
    let mut o = Outcome::new(json!({"criteria": rows, "count": verify::criterion_count()})).seeded(cfg.seed);
    for r in &results {
        eprintln!("{}", r.line());
        o = o.check(&format!("criterion {}: {}", r.id, r.name), r.passed);
    }
    Ok(o)
}

//! Abstract and geometric simplicial complexes, nerves and star covers.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use crate::cover::{json_id, Cover, GroundSet};
use crate::error::{Error, Result};
use crate::linalg::affinely_independent;
use crate::lp;
use crate::rational::{q_from_json, q_to_json, Q};

/// Sorted vertex indices.
pub type Simplex = Vec<usize>;

/// A complex stored by its maximal simplexes.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractComplex {
    vertices: Vec<String>,
    facets: Vec<Simplex>,
}

fn subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

/// Keeps only inclusion-maximal sets, sorted.
fn maximal(mut sets: Vec<Simplex>) -> Vec<Simplex> {
    for s in sets.iter_mut() {
        s.sort_unstable();
        s.dedup();
    }
    sets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut out: Vec<Simplex> = Vec::new();
    for s in sets {
        if !out.iter().any(|f| subset(&s, f)) {
            out.push(s);
        }
    }
    out.sort();
    out
}

impl AbstractComplex {
    /// Downward closure of `simplexes` on the given vertices. Vertices that
    /// appear in no simplex become isolated 0-simplexes.
    pub fn new<S: Into<String>>(vertices: impl IntoIterator<Item = S>, simplexes: Vec<Simplex>) -> Result<Self> {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for v in &vertices {
            if !seen.insert(v.as_str()) {
                return Err(Error::input(format!("duplicate vertex {v:?}")));
            }
        }
        let n = vertices.len();
        let mut used = vec![false; n];
        for s in &simplexes {
            if s.is_empty() {
                return Err(Error::input("empty simplex"));
            }
            for &v in s {
                if v >= n {
                    return Err(Error::input(format!("vertex index {v} out of range")));
                }
                used[v] = true;
            }
        }
        let mut all = simplexes;
        all.extend((0..n).filter(|&v| !used[v]).map(|v| vec![v]));
        Ok(AbstractComplex { vertices, facets: maximal(all) })
    }

    pub fn from_ids<S: AsRef<str>>(vertices: &[S], simplexes: &[Vec<S>]) -> Result<Self> {
        let idx: HashMap<&str, usize> = vertices.iter().enumerate().map(|(i, v)| (v.as_ref(), i)).collect();
        let mut sx = Vec::new();
        for s in simplexes {
            let mut t = Vec::new();
            for v in s {
                t.push(
                    *idx.get(v.as_ref())
                        .ok_or_else(|| Error::input(format!("unknown vertex {:?}", v.as_ref())))?,
                );
            }
            sx.push(t);
        }
        AbstractComplex::new(vertices.iter().map(|v| v.as_ref().to_string()), sx)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Simplex] {
        &self.facets
    }

    /// Largest simplex size minus one; `-1` only for the empty complex.
    pub fn dimension(&self) -> isize {
        self.facets.iter().map(|f| f.len() as isize).max().unwrap_or(0) - 1
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        let mut s = s.to_vec();
        s.sort_unstable();
        self.facets.iter().any(|f| subset(&s, f))
    }

    /// Every simplex, ordered by size then lexicographically.
    pub fn simplexes(&self) -> Vec<Simplex> {
        let mut set: HashSet<Simplex> = HashSet::new();
        for f in &self.facets {
            let k = f.len();
            for mask in 1u64..(1u64 << k) {
                set.insert((0..k).filter(|i| mask >> i & 1 == 1).map(|i| f[i]).collect());
            }
        }
        let mut v: Vec<Simplex> = set.into_iter().collect();
        v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        v
    }

    pub fn label(&self, s: &[usize]) -> String {
        let names: Vec<&str> = s.iter().map(|&v| self.vertices[v].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn to_json(&self) -> Value {
        let facets: Vec<Value> = self
            .facets
            .iter()
            .map(|f| Value::Array(f.iter().map(|&v| json!(self.vertices[v])).collect()))
            .collect();
        json!({"vertices": self.vertices, "facets": facets})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let verts = v
            .get("vertices")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::input("complex: missing \"vertices\" array"))?
            .iter()
            .map(json_id)
            .collect::<Result<Vec<_>>>()?;
        let facets = v
            .get("facets")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::input("complex: missing \"facets\" array"))?;
        let mut sx = Vec::new();
        for f in facets {
            let f = f
                .as_array()
                .ok_or_else(|| Error::input("complex: facet must be an array"))?;
            sx.push(f.iter().map(json_id).collect::<Result<Vec<_>>>()?);
        }
        AbstractComplex::from_ids(&verts, &sx)
    }
}

/// A complex with rational vertex coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricComplex {
    complex: AbstractComplex,
    coords: Vec<Vec<Q>>,
}

impl GeometricComplex {
    /// Checks affine independence of every facet. With `strict`, also
    /// checks that any two facets meet exactly in their common face.
    pub fn new(complex: AbstractComplex, coords: Vec<Vec<Q>>, strict: bool) -> Result<Self> {
        if coords.len() != complex.vertices.len() {
            return Err(Error::input("one coordinate vector per vertex is required"));
        }
        let dim = coords.first().map_or(0, |c| c.len());
        if coords.iter().any(|c| c.len() != dim) {
            return Err(Error::input("coordinate vectors have different lengths"));
        }
        for f in &complex.facets {
            let pts: Vec<&[Q]> = f.iter().map(|&v| coords[v].as_slice()).collect();
            if !affinely_independent(&pts) {
                return Err(Error::input(format!(
                    "simplex {} is not affinely independent",
                    complex.label(f)
                )));
            }
        }
        let g = GeometricComplex { complex, coords };
        if strict {
            let fs = &g.complex.facets;
            for i in 0..fs.len() {
                for j in i + 1..fs.len() {
                    if !g.meet_properly(&fs[i], &fs[j]) {
                        return Err(Error::input(format!(
                            "simplexes {} and {} intersect outside their common face",
                            g.complex.label(&fs[i]),
                            g.complex.label(&fs[j])
                        )));
                    }
                }
            }
        }
        Ok(g)
    }

    // a point of F with weight on F \ G that also lies in G breaks the rule;
    // search for one as a cone feasibility problem
    fn meet_properly(&self, f: &[usize], g: &[usize]) -> bool {
        let own: Vec<usize> = f.iter().copied().filter(|v| g.binary_search(v).is_err()).collect();
        if own.is_empty() {
            return true;
        }
        let dim = self.coords[0].len();
        let cols = f.len() + g.len();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for k in 0..dim {
            let mut row = Vec::with_capacity(cols);
            row.extend(f.iter().map(|&v| self.coords[v][k].clone()));
            row.extend(g.iter().map(|&v| -self.coords[v][k].clone()));
            a.push(row);
            b.push(Q::zero());
        }
        let mut sums = vec![Q::one(); f.len()];
        sums.extend(std::iter::repeat_n(-Q::one(), g.len()));
        a.push(sums);
        b.push(Q::zero());
        let mut w = vec![Q::zero(); cols];
        for (i, v) in f.iter().enumerate() {
            if own.contains(v) {
                w[i] = Q::one();
            }
        }
        a.push(w);
        b.push(Q::one());
        !lp::feasible(&a, &b)
    }

    pub fn complex(&self) -> &AbstractComplex {
        &self.complex
    }

    pub fn coords(&self) -> &[Vec<Q>] {
        &self.coords
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.first().map_or(0, |c| c.len())
    }

    pub fn barycenter(&self, s: &[usize]) -> Vec<Q> {
        barycenter(&self.coords, s)
    }

    /// Largest squared edge length over all facets.
    pub fn mesh_squared(&self) -> Q {
        mesh_squared(&self.coords, &self.complex.facets)
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.complex.to_json();
        let mut c = Map::new();
        for (name, x) in self.complex.vertices.iter().zip(&self.coords) {
            c.insert(name.clone(), Value::Array(x.iter().map(q_to_json).collect()));
        }
        v["coords"] = Value::Object(c);
        v
    }

    pub fn from_json(v: &Value, strict: bool) -> Result<Self> {
        let complex = AbstractComplex::from_json(v)?;
        let c = v
            .get("coords")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::input("complex: geometric operations need \"coords\""))?;
        let mut coords = Vec::new();
        for name in &complex.vertices {
            let x = c
                .get(name)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::input(format!("complex: no coordinates for vertex {name:?}")))?;
            coords.push(x.iter().map(q_from_json).collect::<Result<Vec<_>>>()?);
        }
        GeometricComplex::new(complex, coords, strict)
    }
}

fn barycenter(coords: &[Vec<Q>], s: &[usize]) -> Vec<Q> {
    let k = Q::from_integer(BigInt::from(s.len()));
    let dim = coords[s[0]].len();
    (0..dim)
        .map(|c| s.iter().fold(Q::zero(), |acc, &v| acc + &coords[v][c]) / &k)
        .collect()
}

fn dist2(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| {
        let d = x - y;
        acc + &d * &d
    })
}

fn mesh_squared(coords: &[Vec<Q>], facets: &[Simplex]) -> Q {
    let mut best = Q::zero();
    let mut done: HashSet<(usize, usize)> = HashSet::new();
    for f in facets {
        for (i, &a) in f.iter().enumerate() {
            for &b in &f[i + 1..] {
                if done.insert((a, b)) {
                    let d = dist2(&coords[a], &coords[b]);
                    if d > best {
                        best = d;
                    }
                }
            }
        }
    }
    best
}

/// Nerve of a cover: one vertex per member, a simplex for every
/// subfamily with a common point.
pub fn nerve(cover: &Cover) -> AbstractComplex {
    let n = cover.ground().len();
    let sx: Vec<Simplex> = (0..n).map(|p| cover.members_at(p)).collect();
    AbstractComplex::new(cover.names().iter().cloned(), sx).expect("member names are distinct")
}

/// Standard realization: vertex `i` goes to the basis vector `e_i`.
pub fn realize(k: &AbstractComplex) -> GeometricComplex {
    let n = k.vertices.len();
    let coords = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect();
    GeometricComplex::new(k.clone(), coords, false).expect("basis vectors are independent")
}

/// Star cover on the barycenter model: the ground set has one point per
/// simplex, and the member for vertex `s` holds the simplexes containing it.
pub fn star_cover(k: &AbstractComplex) -> Cover {
    star_cover_of(&k.vertices, &k.simplexes(), |s| k.label(s))
}

fn star_cover_of(vertices: &[String], simplexes: &[Simplex], label: impl Fn(&[usize]) -> String) -> Cover {
    let ground = Arc::new(GroundSet::new(simplexes.iter().map(|s| label(s))).expect("labels are distinct"));
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    for (p, s) in simplexes.iter().enumerate() {
        for &v in s {
            members[v].push(p);
        }
    }
    let named = vertices.iter().cloned().zip(members).collect();
    Cover::new(ground, named).expect("every barycenter lies in some star")
}

fn subdivide_raw(coords: &[Vec<Q>], facets: &[Simplex]) -> (Vec<Simplex>, Vec<Vec<Q>>, Vec<Simplex>) {
    let mut index: HashMap<Simplex, usize> = HashMap::new();
    let mut simplexes: Vec<Simplex> = Vec::new();
    let mut new_facets = Vec::new();
    for f in facets {
        let mut perm = f.clone();
        for_each_permutation(&mut perm, &mut |order| {
            let mut chain = Vec::with_capacity(order.len());
            let mut prefix: Simplex = Vec::with_capacity(order.len());
            for &v in order {
                prefix.push(v);
                let mut key = prefix.clone();
                key.sort_unstable();
                let next = simplexes.len();
                let id = *index.entry(key.clone()).or_insert_with(|| {
                    simplexes.push(key);
                    next
                });
                chain.push(id);
            }
            chain.sort_unstable();
            new_facets.push(chain);
        });
    }
    let new_coords = simplexes.iter().map(|s| barycenter(coords, s)).collect();
    (simplexes, new_coords, new_facets)
}

// Heap's algorithm
fn for_each_permutation(v: &mut [usize], f: &mut dyn FnMut(&[usize])) {
    let n = v.len();
    let mut c = vec![0usize; n];
    f(v);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                v.swap(0, i);
            } else {
                v.swap(c[i], i);
            }
            f(v);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Barycentric subdivision. New vertices are the barycenters of the old
/// simplexes, new simplexes are chains under inclusion.
pub fn barycentric_subdivide(g: &GeometricComplex) -> GeometricComplex {
    let (simplexes, coords, facets) = subdivide_raw(&g.coords, &g.complex.facets);
    let mut taken = HashSet::new();
    let names: Vec<String> = simplexes
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let joined: Vec<&str> = s.iter().map(|&v| g.complex.vertices[v].as_str()).collect();
            let mut name = joined.join("+");
            if name.len() > 24 {
                name = format!("#{k}");
            }
            while !taken.insert(name.clone()) {
                name.push('\'');
            }
            name
        })
        .collect();
    let complex = AbstractComplex { vertices: names, facets: maximal(facets) };
    GeometricComplex { complex, coords }
}

/// Result of [`dim_upper_via_stars`].
#[derive(Debug, Clone)]
pub struct StarBound {
    pub dimension: usize,
    pub subdivisions: usize,
    pub complex_mesh_squared: Q,
    /// Largest squared distance between barycenters sharing a star.
    pub star_mesh_squared: Q,
    pub cover: Cover,
}

/// Subdivides until twice the mesh is at most `eps`, then returns the star
/// cover of the result. Its order equals the dimension and its mesh is at
/// most `eps`, so it bounds the covering dimension from above.
pub fn dim_upper_via_stars(g: &GeometricComplex, eps: &Q) -> Result<StarBound> {
    dim_upper_via_stars_with_budget(g, eps, 2_000_000)
}

pub fn dim_upper_via_stars_with_budget(g: &GeometricComplex, eps: &Q, max_facets: usize) -> Result<StarBound> {
    if !eps.is_positive() {
        return Err(Error::input("eps must be positive"));
    }
    let eps2 = eps * eps;
    let four = Q::from_integer(BigInt::from(4));
    let mut coords = g.coords.clone();
    let mut facets = g.complex.facets.clone();
    let mut rounds = 0;
    let mut mesh2 = mesh_squared(&coords, &facets);
    while &four * &mesh2 > eps2 {
        let growth: usize = facets.iter().map(|f| (1..=f.len()).product::<usize>()).sum();
        if growth > max_facets {
            return Err(Error::budget(format!(
                "subdivision {} would create {growth} simplexes",
                rounds + 1
            )));
        }
        let (_, c, f) = subdivide_raw(&coords, &facets);
        coords = c;
        facets = f;
        rounds += 1;
        mesh2 = mesh_squared(&coords, &facets);
    }
    let base = AbstractComplex {
        vertices: (0..coords.len()).map(|i| format!("v{i}")).collect(),
        facets: maximal(facets),
    };
    let simplexes = base.simplexes();
    let bary: Vec<Vec<Q>> = simplexes.iter().map(|s| barycenter(&coords, s)).collect();
    let cover = star_cover_of(&base.vertices, &simplexes, |s| {
        let parts: Vec<String> = s.iter().map(|v| v.to_string()).collect();
        format!("b{}", parts.join("."))
    });
    let star_mesh_squared = set_diameter_squared(&bary, cover.sets());
    Ok(StarBound {
        dimension: base.dimension().max(0) as usize,
        subdivisions: rounds,
        complex_mesh_squared: mesh2,
        star_mesh_squared,
        cover,
    })
}

/// Max squared distance within any of the index sets. Uses scaled `i128`
/// coordinates when they fit.
fn set_diameter_squared(points: &[Vec<Q>], sets: &[Vec<usize>]) -> Q {
    let l = points
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scaled: Option<Vec<Vec<i128>>> = points
        .iter()
        .map(|p| {
            p.iter()
                .map(|x| (x.numer() * (&l / x.denom())).to_i128().filter(|v| v.abs() < 1 << 60))
                .collect()
        })
        .collect();
    if let Some(pts) = scaled {
        let mut best: i128 = 0;
        let mut ok = true;
        'outer: for s in sets {
            for (i, &a) in s.iter().enumerate() {
                for &b in &s[i + 1..] {
                    let mut d: i128 = 0;
                    for (x, y) in pts[a].iter().zip(&pts[b]) {
                        let t = x - y;
                        match t.checked_mul(t).and_then(|t2| d.checked_add(t2)) {
                            Some(v) => d = v,
                            None => {
                                ok = false;
                                break 'outer;
                            }
                        }
                    }
                    best = best.max(d);
                }
            }
        }
        if ok {
            return Q::new(BigInt::from(best), &l * &l);
        }
    }
    let mut best = Q::zero();
    for s in sets {
        for (i, &a) in s.iter().enumerate() {
            for &b in &s[i + 1..] {
                let d = dist2(&points[a], &points[b]);
                if d > best {
                    best = d;
                }
            }
        }
    }
    best
}

/// Counts of simplexes by dimension, handy for reports.
pub fn f_vector(k: &AbstractComplex) -> Vec<usize> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for s in k.simplexes() {
        *counts.entry(s.len() - 1).or_default() += 1;
    }
    counts.into_values().collect()
}

/// Vertices of `k` that lie in at least one simplex of dimension `d`.
pub fn vertices_in_dimension(k: &AbstractComplex, d: usize) -> BTreeSet<usize> {
    k.facets.iter().filter(|f| f.len() > d).flatten().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn example() -> AbstractComplex {
        let v = ["1", "2", "3", "4"];
        let s: Vec<Vec<&str>> = vec![
            vec!["1", "2"],
            vec!["2", "3"],
            vec!["3", "4"],
            vec!["2", "4"],
            vec!["2", "3", "4"],
        ];
        AbstractComplex::from_ids(&v, &s).unwrap()
    }

    #[test]
    fn dimension_of_example() {
        let k = example();
        assert_eq!(k.dimension(), 2);
        assert_eq!(k.facets().len(), 2);
        assert!(k.contains(&[2, 3]));
        assert!(!k.contains(&[0, 2]));
        assert_eq!(f_vector(&k), vec![4, 4, 1]);
    }

    #[test]
    fn isolated_vertices_kept() {
        let k = AbstractComplex::new(["a", "b"], vec![vec![0]]).unwrap();
        assert_eq!(k.facets(), &[vec![0], vec![1]]);
        assert_eq!(k.dimension(), 0);
    }

    #[test]
    fn star_cover_order_is_dimension() {
        let k = example();
        assert_eq!(star_cover(&k).order(), 2);
        assert_eq!(star_cover(&k).len(), 4);
    }

    fn triangle() -> GeometricComplex {
        let k = AbstractComplex::new(["a", "b", "c"], vec![vec![0, 1, 2]]).unwrap();
        let c = vec![vec![qi(0), qi(0)], vec![qi(1), qi(0)], vec![qi(0), qi(1)]];
        GeometricComplex::new(k, c, true).unwrap()
    }

    #[test]
    fn subdivision_of_triangle() {
        let t = triangle();
        let s = barycentric_subdivide(&t);
        assert_eq!(s.complex().facets().len(), 6);
        assert_eq!(s.complex().vertices().len(), 7);
        assert_eq!(s.complex().dimension(), 2);
        // contraction by 2/3 on squared lengths means a factor 4/9
        assert!(s.mesh_squared() <= t.mesh_squared() * q(4, 9));
    }

    #[test]
    fn collinear_simplex_rejected() {
        let k = AbstractComplex::new(["a", "b", "c"], vec![vec![0, 1, 2]]).unwrap();
        let c = vec![vec![qi(0)], vec![qi(1)], vec![qi(2)]];
        assert!(GeometricComplex::new(k, c, false).is_err());
    }

    #[test]
    fn crossing_segments_rejected_when_strict() {
        let k = AbstractComplex::new(["a", "b", "c", "d"], vec![vec![0, 1], vec![2, 3]]).unwrap();
        let c = vec![
            vec![qi(0), qi(0)],
            vec![qi(1), qi(1)],
            vec![qi(0), qi(1)],
            vec![qi(1), qi(0)],
        ];
        assert!(GeometricComplex::new(k.clone(), c.clone(), false).is_ok());
        assert!(GeometricComplex::new(k, c, true).is_err());
        // two triangles sharing an edge are fine
        let k = AbstractComplex::new(["a", "b", "c", "d"], vec![vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        let c = vec![
            vec![qi(0), qi(0)],
            vec![qi(1), qi(0)],
            vec![qi(0), qi(1)],
            vec![qi(1), qi(1)],
        ];
        assert!(GeometricComplex::new(k, c, true).is_ok());
    }

    #[test]
    fn realization_uses_basis() {
        let g = realize(&example());
        assert_eq!(g.ambient_dim(), 4);
        assert_eq!(g.mesh_squared(), qi(2));
    }

    #[test]
    fn star_bound_on_segment() {
        let k = AbstractComplex::new(["a", "b"], vec![vec![0, 1]]).unwrap();
        let g = GeometricComplex::new(k, vec![vec![qi(0)], vec![qi(1)]], false).unwrap();
        let b = dim_upper_via_stars(&g, &q(1, 2)).unwrap();
        assert_eq!(b.dimension, 1);
        assert_eq!(b.cover.order(), 1);
        assert!(b.subdivisions >= 1);
        assert!(b.star_mesh_squared <= q(1, 4));
    }

    #[test]
    fn star_bound_on_triangle() {
        let b = dim_upper_via_stars(&triangle(), &q(1, 4)).unwrap();
        assert_eq!(b.dimension, 2);
        assert_eq!(b.cover.order(), 2);
        assert!(b.star_mesh_squared <= q(1, 16));
        assert!(dim_upper_via_stars(&triangle(), &qi(0)).is_err());
    }
}

use std::sync::Arc;

use proptest::prelude::*;

use meandim::blocksys::{choose_a_sequence, product_ratio, BlockSystem, CongruenceIndexSet};
use meandim::cover::{join, pullback, refines, Cover, GroundSet};
use meandim::embed::{cyclic_repeat, cyclic_shift, CyclicVector};
use meandim::rational::{parse_q, q, q_to_json};
use meandim::simplicial::{nerve, star_cover, AbstractComplex};
use meandim::Q;

fn cover_strategy(n: usize) -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::btree_set(0..n, 1..=n), 1..6).prop_map(move |sets| {
        let mut sets: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        // make sure every point is covered
        for p in 0..n {
            if !sets.iter().any(|s| s.contains(&p)) {
                let k = p % sets.len();
                sets[k].push(p);
            }
        }
        for s in &mut sets {
            s.sort_unstable();
        }
        sets
    })
}

fn make(n: usize, sets: Vec<Vec<usize>>) -> Cover {
    Cover::from_sets(Arc::new(GroundSet::range(n)), sets).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn join_order_bound(a in cover_strategy(7), b in cover_strategy(7)) {
        let (a, b) = (make(7, a), make(7, b));
        let j = join(&a, &b).unwrap();
        prop_assert!(refines(&j, &a).unwrap());
        prop_assert!(refines(&j, &b).unwrap());
        prop_assert!(j.order() < (a.order() + 1) * (b.order() + 1));
    }

    #[test]
    fn pullback_never_raises_order(sets in cover_strategy(6), f in prop::collection::vec(0usize..6, 1..9)) {
        let c = make(6, sets);
        let dom = Arc::new(GroundSet::range(f.len()));
        let p = pullback(&c, dom, &f).unwrap();
        prop_assert!(p.order() <= c.order());
        for (x, &fx) in f.iter().enumerate() {
            prop_assert!(p.order_at(x).unwrap() <= c.order_at(fx).unwrap());
        }
        // each member is the full preimage of some member of c
        for m in p.sets() {
            let hit = c.sets().iter().any(|s| {
                let pre: Vec<usize> = (0..f.len()).filter(|&i| s.contains(&f[i])).collect();
                &pre == m
            });
            prop_assert!(hit);
        }
    }

    #[test]
    fn nerve_dimension_is_order(sets in cover_strategy(6)) {
        let c = make(6, sets);
        let k = nerve(&c);
        prop_assert_eq!(k.dimension(), c.order() as isize);
    }

    #[test]
    fn star_order_is_dimension(facets in prop::collection::vec(prop::collection::btree_set(0usize..6, 1..4), 1..5)) {
        let names: Vec<String> = (0..6).map(|i| format!("v{i}")).collect();
        let facets: Vec<Vec<String>> = facets
            .into_iter()
            .map(|f| f.into_iter().map(|i| names[i].clone()).collect())
            .collect();
        let used: std::collections::BTreeSet<String> = facets.iter().flatten().cloned().collect();
        let used: Vec<String> = used.into_iter().collect();
        let k = AbstractComplex::from_ids(&used, &facets).unwrap();
        prop_assert_eq!(star_cover(&k).order() as isize, k.dimension());
    }

    #[test]
    fn shift_and_repeat(vals in prop::collection::vec(-20i64..20, 1..5), d in 1usize..3, l in -9i64..9, m in -9i64..9, times in 1usize..4) {
        let flat: Vec<Q> = vals.iter().cycle().take(vals.len() * d).map(|&x| q(x, 3)).collect();
        let v = CyclicVector::from_flat(&flat, d).unwrap();
        let n = v.len() as i64;
        prop_assert_eq!(cyclic_shift(&cyclic_shift(&v, l), m), cyclic_shift(&v, l + m));
        prop_assert_eq!(cyclic_shift(&v, n), v.clone());
        let r = cyclic_repeat(&v, v.len() * times).unwrap();
        prop_assert_eq!(cyclic_shift(&r, n), r.clone());
        prop_assert_eq!(cyclic_repeat(&cyclic_shift(&v, l), v.len() * times).unwrap(), cyclic_shift(&r, l));
    }

    #[test]
    fn a_sequence_brackets_r(num in 1i64..40, extra in 1i64..40, stages in 1usize..6) {
        let r = q(num, num + extra);
        let (a, residual) = choose_a_sequence(&r, stages).unwrap();
        prop_assert!(a.len() <= stages);
        prop_assert!(a.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(residual >= Q::from_integer(1.into()));
        prop_assert_eq!(product_ratio(&a), &r * &residual);
        prop_assert!(product_ratio(&a) >= r);
    }

    #[test]
    fn index_density_of_one_constraint(q_mod in 2u64..12, hi_frac in 0u64..100, periods in 1u64..5) {
        let hi = hi_frac % q_mod;
        let set = CongruenceIndexSet::new(vec![(q_mod, hi)]).unwrap();
        let n = q_mod * periods;
        let direct = (0..n as i64).filter(|&i| set.contains(i)).count() as i64;
        prop_assert_eq!(set.index_density(n).unwrap(), q(direct, n as i64));
        prop_assert_eq!(set.index_density(n).unwrap(), q(hi as i64 + 1, q_mod as i64));
    }
}

#[test]
fn built_systems_satisfy_their_identities() {
    for r in ["1/2", "1/3", "2/3", "7/10", "3/4"] {
        let target = parse_q(r).unwrap();
        let sys = BlockSystem::build(target.clone(), 3, 2).unwrap();
        for n in 0..=sys.depth() {
            let f = sys.free_dim_ratio(n).unwrap();
            assert_eq!(f, sys.product_formula(n).unwrap(), "r = {r}, n = {n}");
            let s = sys.stage(n).unwrap();
            assert_eq!(sys.index_set(n).unwrap().index_density(s.q as u64).unwrap(), f, "r = {r}, n = {n}");
            assert!(sys.upper_bound_mdim(n, 1000).unwrap() >= sys.lower_bound_mdim());
        }
        if sys.exact() {
            assert_eq!(&sys.lower_bound_mdim(), sys.target_r(), "r = {r}");
            assert_eq!(q_to_json(&sys.free_dim_ratio(sys.depth()).unwrap()), q_to_json(&target));
        }
    }
}

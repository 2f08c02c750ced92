use eci_core::dsl::{parse_named_statement, parse_statement, render_named};
use eci_core::lattice::{join, submasks, NamedStatement, ReductionRegistry, Statement, Universe, VarKind, VarSet};
use proptest::prelude::*;

const STOCH: [&str; 4] = ["X", "Y", "Z", "W"];
const DEC: [&str; 2] = ["Theta", "Phi"];

fn universe() -> Universe {
    let mut u = Universe::stochastic(&STOCH).unwrap();
    for d in DEC {
        u.declare(d, VarKind::Decision).unwrap();
    }
    u.declare_complementary(&DEC).unwrap();
    u
}

fn varset(u: &Universe) -> impl Strategy<Value = VarSet> {
    let (s, d) = (u.stoch_mask(), u.dec_mask());
    (0..=s, 0..=d).prop_map(move |(a, b)| VarSet::new(a & s, b & d))
}

#[test]
fn join_laws_by_enumeration() {
    let u = universe();
    let all: Vec<VarSet> =
        submasks(u.stoch_mask()).flat_map(|a| submasks(u.dec_mask()).map(move |b| VarSet::new(a, b))).collect();
    for &a in &all {
        assert_eq!(join(a, a), a);
        for &b in &all {
            assert_eq!(join(a, b), join(b, a));
            assert!(a.is_subset(join(a, b)));
            for &c in all.iter().step_by(3) {
                assert_eq!(join(join(a, b), c), join(a, join(b, c)));
            }
        }
    }
}

fn registry_pairs() -> impl Strategy<Value = Vec<(usize, usize)>> {
    proptest::collection::vec((0..STOCH.len(), 0..STOCH.len()), 0..6)
}

proptest! {
    #[test]
    fn reduction_is_a_quasiorder(pairs in registry_pairs(), a in 0u64..16, b in 0u64..16, c in 0u64..16) {
        let mut u = Universe::stochastic(&STOCH).unwrap();
        let mut reg = ReductionRegistry::new();
        for (w, y) in pairs {
            u.declare_reduction(STOCH[w], STOCH[y]).unwrap();
            reg.insert(STOCH[w], STOCH[y]);
        }
        let (a, b, c) = (VarSet::new(a, 0), VarSet::new(b, 0), VarSet::new(c, 0));
        prop_assert!(u.is_reduction(a, a));
        if u.is_reduction(a, b) && u.is_reduction(b, c) {
            prop_assert!(u.is_reduction(a, c));
        }
        // The registry's own path search agrees with the saturated masks.
        prop_assert_eq!(u.is_reduction(a, b), reg.is_reduction(&u.names_of(a), &u.names_of(b)));
    }

    #[test]
    fn canonicalize_is_idempotent(
        l in proptest::collection::vec(0..6usize, 0..5),
        r in proptest::collection::vec(0..6usize, 0..5),
        c in proptest::collection::vec(0..6usize, 0..5),
    ) {
        let u = universe();
        let names: Vec<&str> = STOCH.iter().chain(DEC.iter()).copied().collect();
        let pick = |v: &[usize]| v.iter().map(|&i| names[i]).collect::<Vec<_>>();
        let raw = NamedStatement::new(&pick(&l), &pick(&r), &pick(&c));
        let once = u.canonicalize(&raw).unwrap();
        prop_assert_eq!(u.canonicalize(&u.to_named(&once)).unwrap(), once);
        // Same variables per slot, duplicates and order aside.
        let set = |v: &[String]| v.iter().cloned().collect::<std::collections::BTreeSet<_>>();
        prop_assert_eq!(set(&u.to_named(&once).left), set(&raw.left));
        prop_assert_eq!(set(&u.to_named(&once).cond), set(&raw.cond));
    }

    #[test]
    fn render_parse_round_trip(l in varset(&universe()), r in varset(&universe()), c in varset(&universe())) {
        let u = universe();
        let s = Statement::new(l, r, c);
        prop_assume!(!l.is_empty() && !r.is_empty() && u.well_formed(&s, true));
        prop_assert_eq!(parse_statement(&u.render(&s), &u).unwrap(), s);
        let named = u.to_named(&s);
        prop_assert_eq!(parse_named_statement(&render_named(&named)).unwrap(), named);
    }
}

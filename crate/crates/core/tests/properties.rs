use proptest::prelude::*;

use ko7::measure::{delta_flag, dm_less, kappa_m, lex3_less, measure3, tau, NatMultiset};
use ko7::normalize::{is_normal_form_safe, normalize_safe};
use ko7::rewrite::{root_steps_safe, witness_is_sound, RelationKind};
use ko7::term::{Position, Symbol, Term};

fn arb_term() -> impl Strategy<Value = Term> {
    let leaf = Just(Term::Void);
    leaf.prop_recursive(6, 40, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Term::Delta(Box::new(a))),
            inner.clone().prop_map(|a| Term::Integrate(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::Merge(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::App(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(a, b, c)| Term::RecD(
                Box::new(a),
                Box::new(b),
                Box::new(c)
            )),
            (inner.clone(), inner).prop_map(|(a, b)| Term::EqW(Box::new(a), Box::new(b))),
        ]
    })
}

fn positions(t: &Term) -> Vec<Position> {
    let mut out = vec![Position::root()];
    for (i, c) in t.children().into_iter().enumerate() {
        out.extend(positions(c).into_iter().map(|p| p.under(i)));
    }
    out
}

fn count(t: &Term, sym: Symbol) -> u64 {
    t.subterms().iter().filter(|s| s.symbol() == sym).count() as u64
}

/// The multiset order straight from its definition: `x` arises from `y` by
/// removing a nonempty `X` and adding `Y`, each element of `Y` below some
/// element of `X`.
fn dm_by_definition(x: &[u64], y: &[u64]) -> bool {
    let n = y.len();
    (1u32..(1 << n)).any(|mask| {
        let (removed, kept): (Vec<_>, Vec<_>) = (0..n).partition(|i| mask & (1 << i) != 0);
        let removed: Vec<u64> = removed.into_iter().map(|i| y[i]).collect();
        let mut rest = x.to_vec();
        for i in kept {
            match rest.iter().position(|v| *v == y[i]) {
                Some(p) => {
                    rest.swap_remove(p);
                }
                None => return false,
            }
        }
        rest.iter().all(|a| removed.iter().any(|b| a < b))
    })
}

/// For a total base order the multiset order is the lexicographic order on
/// descending sortings, a proper prefix being smaller.
fn dm_by_sorting(x: &[u64], y: &[u64]) -> bool {
    let desc = |v: &[u64]| {
        let mut v = v.to_vec();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    };
    desc(x) < desc(y)
}

#[test]
fn dm_matches_definition_exhaustively() {
    let mut all: Vec<Vec<u64>> = vec![vec![]];
    for len in 1..=3 {
        for code in 0..3u64.pow(len) {
            let v: Vec<u64> = (0..len).map(|i| code / 3u64.pow(i) % 3).collect();
            if v.windows(2).all(|w| w[0] <= w[1]) {
                all.push(v);
            }
        }
    }
    for x in &all {
        for y in &all {
            let ms = |v: &Vec<u64>| v.iter().copied().collect::<NatMultiset>();
            let got = dm_less(&ms(x), &ms(y));
            assert_eq!(got, dm_by_definition(x, y), "{x:?} < {y:?}");
            assert_eq!(got, dm_by_sorting(x, y), "{x:?} < {y:?}");
        }
    }
}

proptest! {
    #[test]
    fn dm_matches_sorting(x in prop::collection::vec(0u64..12, 0..8),
                          y in prop::collection::vec(0u64..12, 0..8)) {
        let (mx, my): (NatMultiset, NatMultiset) = (x.iter().copied().collect(), y.iter().copied().collect());
        prop_assert_eq!(dm_less(&mx, &my), dm_by_sorting(&x, &y));
        prop_assert!(!(dm_less(&mx, &my) && dm_less(&my, &mx)));
    }

    #[test]
    fn render_parse_round_trip(t in arb_term()) {
        let s = t.to_string();
        prop_assert_eq!(s.parse::<Term>().unwrap(), t.clone());
        let spaced = s.replace(' ', "  \n ").replace('(', "( ");
        prop_assert_eq!(spaced.parse::<Term>().unwrap(), t.clone());
        let json = serde_json::to_string(&t).unwrap();
        prop_assert_eq!(serde_json::from_str::<Term>(&json).unwrap(), t);
    }

    #[test]
    fn replace_at_inverts_subterm_at(t in arb_term(), pick in any::<prop::sample::Index>()) {
        let ps = positions(&t);
        prop_assert_eq!(ps.len(), t.size());
        let p = &ps[pick.index(ps.len())];
        let sub = t.subterm_at(p).unwrap().clone();
        prop_assert_eq!(&t.replace_at(p, sub.clone()).unwrap(), &t);
        let swapped = t.replace_at(p, Term::Void).unwrap();
        prop_assert_eq!(swapped.size(), t.size() - sub.size() + 1);
        prop_assert_eq!(swapped.subterm_at(p).unwrap(), &Term::Void);
    }

    #[test]
    fn measure_components_by_counting(t in arb_term()) {
        prop_assert_eq!(tau(&t), t.size() as u64 + 2 * count(&t, Symbol::EqW));
        let recs: NatMultiset = t.subterms().iter()
            .filter(|s| s.symbol() == Symbol::RecD)
            .map(|s| tau(s))
            .collect();
        prop_assert_eq!(kappa_m(&t), recs);
        let flag = t.symbol() == Symbol::RecD && t.children()[2].symbol() == Symbol::Delta;
        prop_assert_eq!(delta_flag(&t), flag as u8);
    }

    #[test]
    fn safe_steps_decrease_on_larger_terms(t in arb_term()) {
        for w in root_steps_safe(&t) {
            prop_assert!(witness_is_sound(&w));
            prop_assert!(lex3_less(&measure3(&w.result), &measure3(&w.source)), "{}", w);
        }
        for w in RelationKind::SafeCtx.steps(&t) {
            prop_assert!(witness_is_sound(&w));
        }
        let tr = normalize_safe(&t).unwrap();
        prop_assert!(tr.is_well_formed());
        prop_assert!(is_normal_form_safe(&tr.final_term));
        prop_assert!(tr.len() as u64 <= tau(&t));
    }
}

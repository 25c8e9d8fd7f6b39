use proptest::prelude::*;
use stab::atm::sugar::{bit, pi1, pi2, proj, tuple};
use stab::atm::{
    atm_oracle, atm_oracle_strict, church, church_value, compile, Action, AtmSpec, Combinators, Kind, Library,
    MachineState, Move, Poly,
};
use stab::corpus::{agree, random_programs, Program};
use stab::machine::{BContext, Frame, MContext};
use stab::report::run_report;
use stab::syntax::{leftmost_redex, name, normalize, redexes, step, Term};
use stab::types::{check_simulation, subject_reduce, Elaborator, Type};
use std::collections::{BTreeMap, HashSet};

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::zero()),
        Just(Term::one()),
        prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::var),
    ];
    leaf.prop_recursive(5, 40, 3, |inner| {
        prop_oneof![
            (prop::sample::select(vec!["x", "y", "z"]), inner.clone()).prop_map(|(x, b)| Term::lam(x, b)),
            (inner.clone(), inner.clone()).prop_map(|(m, n)| Term::app(m, n)),
            (inner.clone(), inner.clone(), inner).prop_map(|(c, a, b)| Term::ite(c, a, b)),
        ]
    })
}

fn program(seed: u64, max_size: usize) -> Program {
    random_programs(seed, 1, max_size).pop().expect("generator found a program")
}

/// Every boolean reachable by some reduction order.
fn all_normal_forms(t: &Term, limit: usize) -> HashSet<String> {
    let mut seen = HashSet::new();
    let mut out = HashSet::new();
    let mut todo = vec![t.clone()];
    while let Some(t) = todo.pop() {
        if seen.len() > limit || !seen.insert(t.to_string()) {
            continue;
        }
        let rs = redexes(&t);
        if rs.is_empty() {
            out.insert(t.to_string());
        }
        for r in rs {
            todo.push(step(&t, &r).unwrap());
        }
    }
    out
}

fn random_spec(kinds: Vec<u8>, initial: u8, moves: Vec<(u8, u8, bool)>) -> AtmSpec {
    let code = |n: u8| vec![(n >> 1) & 1, n & 1];
    let kind = |k: u8| [Kind::Accept, Kind::Reject, Kind::Universal, Kind::Existential][k as usize];
    let states: BTreeMap<_, _> = (0..4).map(|n| (code(n), kind(kinds[n as usize]))).collect();
    let mut delta: [BTreeMap<_, _>; 2] = Default::default();
    let mut it = moves.into_iter();
    for s in 0..4u8 {
        if states[&code(s)].is_final() {
            continue;
        }
        for d in delta.iter_mut() {
            for read in 0..2 {
                let (write, next, right) = it.next().unwrap();
                let dir = if right { Move::Right } else { Move::Left };
                d.insert((code(s), read), Action { write, next: code(next), dir });
            }
        }
    }
    let spec = AtmSpec { q_bits: 2, states, initial: code(initial), delta };
    spec.validate().unwrap();
    spec
}

fn spec_strategy() -> impl Strategy<Value = AtmSpec> {
    (
        prop::collection::vec(0u8..4, 4),
        0u8..4,
        prop::collection::vec((0u8..2, 0u8..4, any::<bool>()), 16),
    )
        .prop_map(|(k, i, m)| random_spec(k, i, m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn size_is_positive_and_additive(t in term()) {
        use stab::TermKind::*;
        let expect = match t.kind() {
            Var(_) | Zero | One => 1,
            Lam(_, b) => b.size() + 1,
            App(m, n) => m.size() + n.size(),
            If(c, a, b) => c.size() + a.size() + b.size() + 1,
        };
        prop_assert!(t.size() >= 1);
        prop_assert_eq!(t.size(), expect);
    }

    #[test]
    fn printing_round_trips(t in term()) {
        let back = stab::syntax::parse_term(&t.to_string()).unwrap();
        prop_assert!(back.alpha_eq(&t));
    }

    #[test]
    fn sliced_occurrences_never_exceed_occurrences(t in term()) {
        for x in ["x", "y", "z"] {
            prop_assert!(t.sliced_occurrences(x) <= t.count_occurrences(x));
        }
    }

    #[test]
    fn bcontext_size_is_the_filled_size(frames in prop::collection::vec((term(), term(), prop::collection::vec(term(), 0..3)), 0..4)) {
        let c = BContext::from_frames(frames.into_iter().map(|(a, b, s)| Frame::new(a, b, s)));
        let filled = c.fill(Term::var("hole")).size();
        prop_assert_eq!(c.size(), if c.is_empty() { 0 } else { filled });
    }

    #[test]
    fn closure_of_closed_assignments(vals in prop::collection::vec(0u8..2, 1..5), pick in 0usize..5) {
        let a = MContext::from_entries(vals.iter().enumerate().map(|(i, b)| (name(&format!("v{i}")), Term::boolean(*b == 0))));
        let i = pick % vals.len();
        prop_assert_eq!(a.closure(&Term::var(&format!("v{i}"))), Term::boolean(vals[i] == 0));
        prop_assert_eq!(a.size(), 2 * vals.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn typed_programs_meet_every_bound(seed in any::<u64>()) {
        let p = program(seed, 60);
        p.derivation.validate().unwrap();
        prop_assert!(agree(&p, 1_000_000).is_ok());
        let r = run_report(&p.derivation, 1_000_000).unwrap();
        prop_assert!(r.all_ok(), "{}\n{}", p.derivation.term, r);
        prop_assert!(r.space_s.unwrap() <= r.space.unwrap());
        prop_assert!(r.space.unwrap() as u128 <= r.bound);
    }

    #[test]
    fn subject_reduction_does_not_raise_the_weight(seed in any::<u64>()) {
        let p = program(seed, 40);
        let r = p.derivation.rank() as u128;
        let mut d = p.derivation.clone();
        while let Some(pos) = leftmost_redex(&d.term) {
            prop_assert!(matches!(check_simulation(&d.term, &pos), Ok(1) | Ok(2)));
            let next = subject_reduce(&d, &pos).unwrap();
            next.validate().unwrap();
            prop_assert_eq!(&next.ty, &d.ty);
            prop_assert!(next.weight(r) <= d.weight(r));
            if pos.is_head() {
                prop_assert!(next.weight(r) < d.weight(r));
            }
            d = next;
        }
        prop_assert!(d.term.as_bool().is_some());
    }

    #[test]
    fn every_reduction_order_gives_the_same_boolean(seed in any::<u64>()) {
        let p = program(seed, 12);
        let nf = normalize(&p.derivation.term, 10_000).unwrap();
        let all = all_normal_forms(&p.derivation.term, 5_000);
        prop_assert_eq!(all.len(), 1);
        prop_assert!(all.contains(&nf.to_string()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn numeral_arithmetic(m in 0u64..6, n in 0u64..6) {
        let mut lib = Library::new();
        let (a, b) = (lib.numeral(m, 1).unwrap(), lib.numeral(n, 1).unwrap());
        let add = lib.add(1, 1).unwrap();
        let mul = lib.mul(1, 1).unwrap();
        let value = |lib: &mut Library, t| {
            let d = lib.infer(&t).unwrap();
            church_value(&normalize(&d.term, 1_000_000).unwrap())
        };
        let sum = stab::atm::sugar::app(add, [a.clone(), b.clone()]);
        prop_assert_eq!(value(&mut lib, sum), Some(m + n));
        let prod = stab::atm::sugar::app(mul, [a, b]);
        prop_assert_eq!(value(&mut lib, prod), Some(m * n));
        prop_assert_eq!(church(m).size() as u64, m + 3);
    }

    #[test]
    fn polynomials_evaluate(coeffs in prop::collection::vec(0u64..3, 1..4), n in 0u64..4) {
        let p = Poly::new(coeffs);
        let mut lib = Library::new();
        let pt = lib.poly(&p).unwrap();
        let num = lib.numeral(n, 1).unwrap();
        let d = lib.infer(&stab::atm::sugar::app(pt, [num])).unwrap();
        d.validate().unwrap();
        prop_assert_eq!(church_value(&normalize(&d.term, 1_000_000).unwrap()), Some(p.eval(n)));
    }

    #[test]
    fn projections_of_tuples(bits in prop::collection::vec(0u8..2, 2..6), i in 0usize..6) {
        let n = bits.len();
        let i = i % n;
        let t = tuple(bits.iter().map(|&b| bit(b)).collect());
        let mut el = Elaborator::new();
        let d = el.check_closed(&proj(t.clone(), i, n), &Type::Bool).unwrap();
        prop_assert_eq!(normalize(&d.term, 1000).unwrap(), Term::boolean(bits[i] == 0));
        if n == 2 {
            let d1 = el.check_closed(&pi1(t.clone()), &Type::Bool).unwrap();
            let d2 = el.check_closed(&pi2(t), &Type::Bool).unwrap();
            prop_assert_eq!(normalize(&d1.term, 1000).unwrap(), Term::boolean(bits[0] == 0));
            prop_assert_eq!(normalize(&d2.term, 1000).unwrap(), Term::boolean(bits[1] == 0));
        }
    }

    #[test]
    fn strict_oracle_agrees_when_defined(spec in spec_strategy(), input in prop::collection::vec(0u8..2, 0..5), fuel in 0u64..8) {
        if let Ok(b) = atm_oracle_strict(&spec, &input, fuel) {
            prop_assert_eq!(atm_oracle(&spec, &input, fuel), b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn combinator_transitions_follow_the_machine(spec in spec_strategy(), tape in prop::collection::vec(0u8..2, 0..4), pos in 0usize..5) {
        let mut c = Combinators::new(&spec).unwrap();
        for (name, d) in c.all() {
            prop_assert!(d.validate().is_ok(), "{}", name);
        }
        let pos = pos % (tape.len() + 1);
        for state in spec.states.keys().filter(|s| !spec.kind(s).is_final()) {
            let s = MachineState { tape: tape.clone(), pos, state: state.clone() };
            for j in 0..2 {
                let want = s.successor(&spec, j).unwrap();
                let (got, kind) = c.transition(j, &s).unwrap();
                prop_assert_eq!(&got, &want);
                prop_assert_eq!(kind, spec.kind(&want.state));
            }
        }
    }

    #[test]
    fn compiled_machines_match_the_oracle(spec in spec_strategy(), inputs in prop::collection::vec(prop::collection::vec(0u8..2, 0..4), 4)) {
        let poly = Poly::new(vec![0, 1]);
        let mut c = compile(&spec, &poly).unwrap();
        prop_assert_eq!(c.eval.degree() >= 1, true);
        for input in inputs {
            let d = c.program(&input);
            let got = stab::machine::eval_big(&d.term).unwrap().0;
            prop_assert_eq!(got, atm_oracle(&spec, &input, input.len() as u64), "{:?}", input);
        }
    }
}

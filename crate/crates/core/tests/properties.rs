use mrlc::codec::encode;
use mrlc::constructions::construct_optimized;
use mrlc::format::{parse_code, serialize_code};
use mrlc::gf2::{make_field, FieldDescriptor, FieldElement};
use mrlc::topology::{CodeInstance, LocalTopology};
use mrlc::verification::{
    check_witness, is_independent, is_weakly_independent, verify_mr, verify_mr_oracle, Scalars,
};
use proptest::prelude::*;

fn el(v: u64) -> FieldElement {
    FieldElement::from_bits(v)
}

fn field_and_elements(n: usize) -> impl Strategy<Value = (FieldDescriptor, Vec<FieldElement>)> {
    (1u32..=64).prop_flat_map(move |t| {
        let field = make_field(t, None).unwrap();
        let mask = field.mask();
        proptest::collection::vec(any::<u64>().prop_map(move |v| el(v & mask)), n)
            .prop_map(move |xs| (field.clone(), xs))
    })
}

fn tower() -> impl Strategy<Value = (u32, u32)> {
    (1u32..=64).prop_flat_map(|t| {
        let divisors: Vec<u32> = (1..=t).filter(|r| t % r == 0).collect();
        proptest::sample::select(divisors).prop_map(move |r| (t, r))
    })
}

/// Every sub-multiset of at most `t` members, as a plain XOR over GF(2).
fn brute_zero_sum(set: &[FieldElement], t: usize) -> bool {
    (1u32..1 << set.len()).any(|mask| {
        mask.count_ones() as usize <= t
            && (0..set.len())
                .filter(|i| mask >> i & 1 == 1)
                .fold(0, |acc, i| acc ^ set[i].bits())
                == 0
    })
}

proptest! {
    #[test]
    fn ring_axioms((f, xs) in field_and_elements(3)) {
        let (a, b, c) = (xs[0], xs[1], xs[2]);
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, b + c), f.mul(a, b) + f.mul(a, c));
        prop_assert_eq!(f.mul(a, FieldElement::ONE), a);
        prop_assert!(f.contains(f.mul(a, b)));
    }

    #[test]
    fn inverses((f, xs) in field_and_elements(1)) {
        let a = xs[0];
        match f.inv(a) {
            Some(inv) => prop_assert_eq!(f.mul(a, inv), FieldElement::ONE),
            None => prop_assert!(a.is_zero()),
        }
    }

    #[test]
    fn frobenius_is_an_automorphism((f, xs) in field_and_elements(2), j in 0u64..130) {
        let (a, b) = (xs[0], xs[1]);
        prop_assert_eq!(f.frobenius_power(a + b, j), f.frobenius_power(a, j) + f.frobenius_power(b, j));
        prop_assert_eq!(f.frobenius_power(f.mul(a, b), j), f.mul(f.frobenius_power(a, j), f.frobenius_power(b, j)));
        prop_assert_eq!(f.frobenius_power(a, f.degree() as u64), a);
        prop_assert_eq!(f.frobenius_power(a, 1), f.mul(a, a));
    }

    #[test]
    fn subfield_coordinates((t, r) in tower(), seed in any::<(u64, u64)>()) {
        let f = make_field(t, Some(r)).unwrap();
        let sub = f.subfield().unwrap();
        let (a, b) = (el(seed.0 & f.mask()), el(seed.1 & f.mask()));
        let da = f.decompose_over_subfield(a).unwrap();
        prop_assert_eq!(da.len(), (t / r) as usize);
        prop_assert_eq!(f.compose_over_subfield(&da).unwrap(), a);
        let db = f.decompose_over_subfield(b).unwrap();
        let dab = f.decompose_over_subfield(a + b).unwrap();
        for i in 0..da.len() {
            prop_assert_eq!(dab[i], da[i] + db[i]);
        }
        // the embedding is a ring homomorphism landing on Frobenius fixed points
        let small = sub.field();
        let (x, y) = (el(seed.0 & small.mask()), el(seed.1 & small.mask()));
        prop_assert_eq!(sub.embed(small.mul(x, y)), f.mul(sub.embed(x), sub.embed(y)));
        prop_assert_eq!(sub.embed(x + y), sub.embed(x) + sub.embed(y));
        prop_assert_eq!(f.frobenius_power(sub.embed(x), r as u64), sub.embed(x));
        prop_assert_eq!(sub.project(sub.embed(x)), Some(x));
    }

    #[test]
    fn binary_independence_matches_enumeration(
        raw in proptest::collection::vec(0u64..64, 0..12),
        t in 1usize..7,
    ) {
        let f = make_field(6, None).unwrap();
        let set: Vec<FieldElement> = raw.into_iter().map(el).collect();
        let verdict = is_independent(&f, &set, t, Scalars::Binary).unwrap();
        prop_assert_eq!(verdict.is_independent(), !brute_zero_sum(&set, t));
        if let Some(w) = verdict.witness() {
            prop_assert!(w.len() <= t);
            prop_assert_eq!(w.iter().fold(0, |acc, &i| acc ^ set[i].bits()), 0);
            // smallest witness size
            prop_assert!(!brute_zero_sum(&set, w.len() - 1));
        }
    }

    #[test]
    fn weak_independence_matches_enumeration(
        raw in proptest::collection::vec(0u64..32, 0..11),
        t in 2usize..7,
    ) {
        let set: Vec<FieldElement> = raw.into_iter().map(el).collect();
        let brute = (1u32..1 << set.len()).any(|mask| {
            let size = mask.count_ones() as usize;
            (2..=t).contains(&size)
                && (0..set.len()).filter(|i| mask >> i & 1 == 1).fold(0, |acc, i| acc ^ set[i].bits()) == 0
        });
        let verdict = is_weakly_independent(&set, t);
        prop_assert_eq!(verdict.is_independent(), !brute);
        if let Some(w) = verdict.witness() {
            prop_assert!(w.len() >= 2 && w.len() <= t);
            prop_assert_eq!(w.iter().fold(0, |acc, &i| acc ^ set[i].bits()), 0);
        }
    }

    #[test]
    fn independence_is_monotone(
        raw in proptest::collection::vec(0u64..256, 1..10),
        t in 1usize..6,
        subfield in any::<bool>(),
    ) {
        let f = make_field(8, Some(2)).unwrap();
        let over = if subfield { Scalars::Subfield } else { Scalars::Binary };
        let set: Vec<FieldElement> = raw.into_iter().map(el).collect();
        if is_independent(&f, &set, t, over).unwrap().is_independent() {
            for smaller in 0..t {
                prop_assert!(is_independent(&f, &set, smaller, over).unwrap().is_independent());
            }
        }
        // independence over a subfield implies it over GF(2)
        if is_independent(&f, &set, t, Scalars::Subfield).unwrap().is_independent() {
            prop_assert!(is_independent(&f, &set, t, Scalars::Binary).unwrap().is_independent());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn verifiers_agree_and_witnesses_recheck(
        raw in proptest::collection::vec(any::<u64>(), 9),
        q in 2u32..6,
    ) {
        let topo = LocalTopology::local(4, 2, 2).unwrap();
        let f = make_field(q, None).unwrap();
        let alphas = raw.iter().map(|&v| el(v & f.mask())).collect();
        let code = CodeInstance::new(topo, f, alphas).unwrap();
        let fast = verify_mr(&code).unwrap();
        let oracle = verify_mr_oracle(&code).unwrap();
        prop_assert_eq!(fast.status, oracle.status);
        for v in [&fast, &oracle] {
            if let Some(w) = &v.witness {
                prop_assert!(check_witness(&code, w));
            }
        }
    }

    #[test]
    fn encoding_is_linear(a in proptest::collection::vec(0u64..16, 6), b in proptest::collection::vec(0u64..16, 6)) {
        let code = construct_optimized(6, 2, 2).unwrap();
        let da: Vec<FieldElement> = a.into_iter().map(el).collect();
        let db: Vec<FieldElement> = b.into_iter().map(el).collect();
        let sum: Vec<FieldElement> = da.iter().zip(&db).map(|(&x, &y)| x + y).collect();
        let wa = encode(&code, &da).unwrap();
        let wb = encode(&code, &db).unwrap();
        prop_assert_eq!(wa.add(&wb), encode(&code, &sum).unwrap());
    }

    #[test]
    fn files_round_trip(raw in proptest::collection::vec(any::<u64>(), 12), t in 1u32..=64) {
        let topo = LocalTopology::local(6, 3, 3).unwrap();
        let f = make_field(t, None).unwrap();
        let alphas = raw.iter().map(|&v| el(v & f.mask())).collect();
        let code = CodeInstance::new(topo, f, alphas).unwrap();
        let text = serialize_code(&code);
        let parsed = parse_code(&text).unwrap();
        prop_assert_eq!(serialize_code(&parsed), text);
        prop_assert_eq!(parsed, code);
    }
}

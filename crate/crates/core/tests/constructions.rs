use mrlc::constructions::{
    basic_generator_set, basic_parameters, combine_sets, construct_basic, construct_optimized,
    derive_data_local, optimized_generator_set, optimized_parameters, standard_s1,
};
use mrlc::gf2::{make_field, FieldElement};
use mrlc::topology::{CodeInstance, CodeKind, LocalTopology};
use mrlc::verification::{
    check_witness, is_independent, verify_data_local_mr, verify_mr, verify_mr_oracle, Independence,
    Scalars,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID: [(usize, usize, usize); 6] = [
    (4, 2, 2),
    (6, 2, 2),
    (6, 3, 3),
    (8, 2, 3),
    (12, 3, 3),
    (9, 3, 2),
];

fn valid_grid() -> Vec<(usize, usize, usize)> {
    GRID.into_iter()
        .filter(|&(k, r, h)| (k + h) % r == 0)
        .collect()
}

#[test]
fn grid_filter_drops_the_indivisible_points() {
    assert_eq!(
        valid_grid(),
        vec![(4, 2, 2), (6, 2, 2), (6, 3, 3), (12, 3, 3)]
    );
    assert!(construct_basic(8, 2, 3).is_err());
    assert!(construct_optimized(9, 3, 2).is_err());
}

#[test]
fn both_constructions_pass_both_verifiers() {
    for (k, r, h) in valid_grid() {
        for code in [
            construct_basic(k, r, h).unwrap(),
            construct_optimized(k, r, h).unwrap(),
        ] {
            let fast = verify_mr(&code).unwrap();
            let oracle = verify_mr_oracle(&code).unwrap();
            assert!(
                fast.is_mr(),
                "({k},{r},{h}) degree {}",
                code.field().degree()
            );
            assert!(
                oracle.is_mr(),
                "({k},{r},{h}) degree {}",
                code.field().degree()
            );
        }
    }
}

#[test]
fn optimized_never_needs_a_larger_field() {
    for (k, r, h) in valid_grid() {
        let (_, tb) = basic_parameters(k, r, h).unwrap();
        let (_, to) = optimized_parameters(k, r, h).unwrap();
        assert!(to <= tb, "({k},{r},{h}): {to} > {tb}");
    }
    assert_eq!(basic_parameters(60, 4, 4).unwrap().1, 28);
    assert_eq!(optimized_parameters(60, 4, 4).unwrap(), (4, 16));
}

#[test]
fn basic_set_is_2h_wise_independent() {
    for (k, r, h) in valid_grid() {
        let report = basic_generator_set(k, r, h).unwrap();
        let field = make_field(report.field_degree, None).unwrap();
        assert_eq!(
            is_independent(&field, &report.alphas, 2 * h, Scalars::Binary).unwrap(),
            Independence::Independent,
            "({k},{r},{h})"
        );
    }
}

#[test]
fn optimized_s2_is_h_wise_independent_over_the_subfield() {
    for (k, r, h) in valid_grid().into_iter().chain([(60, 4, 4), (7, 2, 5)]) {
        let report = optimized_generator_set(k, r, h).unwrap();
        let field = make_field(report.field_degree, Some(r as u32)).unwrap();
        assert!(
            is_independent(&field, &report.s2, h, Scalars::Subfield)
                .unwrap()
                .is_independent(),
            "({k},{r},{h})"
        );
    }
}

#[test]
fn combine_reproduces_optimized() {
    for (k, r, h) in valid_grid().into_iter().chain([(60, 4, 4)]) {
        let report = optimized_generator_set(k, r, h).unwrap();
        let field = make_field(report.field_degree, Some(r as u32)).unwrap();
        let combined = combine_sets(&field, &report.s1, &report.s2, r, h).unwrap();
        assert_eq!(combined, construct_optimized(k, r, h).unwrap());
        assert_eq!(report.s1, standard_s1(r));
    }
}

#[test]
fn example_parameters() {
    let code = construct_optimized(60, 4, 4).unwrap();
    let topo = code.topology();
    assert_eq!(
        (topo.groups(), topo.len(), code.field().degree()),
        (16, 80, 16)
    );
    assert_eq!(topo.len() - topo.redundancy(), 60);
}

#[test]
fn data_local_reductions_verify() {
    for (k, r, h) in [(6, 2, 2), (5, 2, 3), (4, 2, 2), (12, 3, 3)] {
        for local in [
            construct_basic(k, r, h).unwrap(),
            construct_optimized(k, r, h).unwrap(),
        ] {
            let dl = derive_data_local(&local, None).unwrap();
            let topo = dl.topology();
            assert_eq!(topo.kind(), CodeKind::DataLocal);
            let k2 = k / r * r;
            assert_eq!(topo.len(), k2 + k2 / r + h);
            assert!(verify_data_local_mr(&dl).unwrap().is_mr(), "({k},{r},{h})");
        }
    }
}

#[test]
fn zero_heavy_column_breaks_data_local_mr() {
    let dl = derive_data_local(&construct_optimized(4, 2, 2).unwrap(), None).unwrap();
    let mut alphas = dl.alphas().to_vec();
    *alphas.last_mut().unwrap() = FieldElement::ZERO;
    let broken = dl.with_alphas(alphas).unwrap();
    let verdict = verify_data_local_mr(&broken).unwrap();
    assert!(!verdict.is_mr());
    assert!(check_witness(&broken, verdict.witness.as_ref().unwrap()));
}

#[test]
fn data_local_h1_with_distinct_coefficients() {
    let topo = LocalTopology::data_local(4, 2, 1).unwrap();
    let field = make_field(4, None).unwrap();
    // data coefficients distinct within each group, heavy coefficient outside
    // every pairwise sum
    let alphas = [1u64, 2, 4, 8, 3].map(FieldElement::from_bits).to_vec();
    let code = CodeInstance::new(topo, field, alphas).unwrap();
    assert!(verify_data_local_mr(&code).unwrap().is_mr());
}

fn random_instance(k: usize, r: usize, h: usize, q: u32, rng: &mut ChaCha8Rng) -> CodeInstance {
    let topo = LocalTopology::local(k, r, h).unwrap();
    let field = make_field(q, None).unwrap();
    let mask = field.mask();
    let alphas = (0..topo.alpha_count())
        .map(|_| FieldElement::from_bits(rng.gen::<u64>() & mask))
        .collect();
    CodeInstance::new(topo, field, alphas).unwrap()
}

#[test]
fn verifiers_agree_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut mr, mut not_mr) = (0, 0);
    for (k, r, h) in valid_grid() {
        for i in 0..25u32 {
            let code = random_instance(k, r, h, 3 + i % 4, &mut rng);
            let fast = verify_mr(&code).unwrap();
            let oracle = verify_mr_oracle(&code).unwrap();
            assert_eq!(
                fast.status,
                oracle.status,
                "({k},{r},{h}) {:?}",
                code.alphas()
            );
            if let Some(w) = &fast.witness {
                assert!(check_witness(&code, w));
                assert!(check_witness(&code, oracle.witness.as_ref().unwrap()));
            }
            if fast.is_mr() {
                mr += 1;
            } else {
                not_mr += 1;
            }
        }
    }
    assert!(mr > 0 && not_mr > 0, "mr={mr} not_mr={not_mr}");
}

#[test]
fn adversarial_gf4_instance_fails_both() {
    let topo = LocalTopology::local(4, 2, 2).unwrap();
    let field = make_field(2, None).unwrap();
    let alphas = [1u64, 2, 3, 1, 2, 3, 1, 2, 3]
        .map(FieldElement::from_bits)
        .to_vec();
    let code = CodeInstance::new(topo, field, alphas).unwrap();
    assert!(!verify_mr(&code).unwrap().is_mr());
    assert!(!verify_mr_oracle(&code).unwrap().is_mr());
}

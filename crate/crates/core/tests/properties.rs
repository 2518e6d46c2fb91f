mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regcover::canon::canonical_form;
use regcover::covering::{quotient_unchecked, verify_certificate, Certificate};
use regcover::generators as gen;
use regcover::ivmatch::{parse_instance, random_instance, serialize_instance, solve_bruteforce, solve_iv_matching, verify_solution};
use regcover::meta::{regular_cover_check, MetaOptions};
use regcover::multigraph::{parse_graph, serialize_graph, Multigraph};
use regcover::oracle::oracle_regular_cover;
use regcover::perm::{semiregular_subgroups_of_order, DEFAULT_BUDGET};

fn random_graph(seed: u64, max_n: usize) -> Multigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_n);
    let extra = rng.gen_range(0..=2 * n);
    gen::random_connected_planar(n, extra, &mut rng)
}

fn opts() -> MetaOptions {
    MetaOptions { parallel: false, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_quotient_is_found_with_a_valid_certificate(seed in any::<u64>()) {
        let g = random_graph(seed, 12);
        let n = g.num_vertices();
        for k in (2..=n).filter(|k| n % k == 0) {
            for sub in semiregular_subgroups_of_order(&g, k, DEFAULT_BUDGET).unwrap() {
                let (h, _) = quotient_unchecked(&g, &sub).unwrap();
                let r = regular_cover_check(&g, &h, &opts()).unwrap();
                let cert = r.certificate.expect("quotient not recognised");
                prop_assert_eq!(cert.k, k);
                prop_assert!(verify_certificate(&g, &h, &cert).is_ok());
            }
        }
    }

    #[test]
    fn meta_agrees_with_oracle_on_mutations(seed in any::<u64>()) {
        let g = random_graph(seed, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
        let n = g.num_vertices();
        for k in (2..=n).filter(|k| n % k == 0) {
            for sub in semiregular_subgroups_of_order(&g, k, DEFAULT_BUDGET).unwrap() {
                let (h, _) = quotient_unchecked(&g, &sub).unwrap();
                let Some(m) = common::mutate(&h, &mut rng) else { continue };
                let a = regular_cover_check(&g, &m, &opts()).unwrap().certificate;
                let b = oracle_regular_cover(&g, &m, DEFAULT_BUDGET).unwrap();
                prop_assert_eq!(a.is_some(), b.is_some());
                if let Some(c) = a {
                    prop_assert!(verify_certificate(&g, &m, &c).is_ok());
                }
            }
        }
    }

    #[test]
    fn mutation_keeps_counts(seed in any::<u64>()) {
        let h = random_graph(seed, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Some(m) = common::mutate(&h, &mut rng) {
            prop_assert_eq!(m.num_vertices(), h.num_vertices());
            prop_assert_eq!(m.num_darts(), h.num_darts());
            prop_assert!(m.is_connected());
            prop_assert_ne!(canonical_form(&m, None).cert, canonical_form(&h, None).cert);
        }
    }

    #[test]
    fn graph_text_round_trip(seed in any::<u64>()) {
        let g = random_graph(seed, 12);
        let back = parse_graph(&serialize_graph(&g)).unwrap();
        prop_assert_eq!(canonical_form(&g, None).cert, canonical_form(&back, None).cert);
    }

    #[test]
    fn certificate_json_round_trip(seed in any::<u64>()) {
        let g = random_graph(seed, 10);
        let n = g.num_vertices();
        if let Some(k) = (2..=n).find(|k| n % k == 0) {
            if let Some(sub) = semiregular_subgroups_of_order(&g, k, DEFAULT_BUDGET).unwrap().into_iter().next() {
                let (h, _) = quotient_unchecked(&g, &sub).unwrap();
                let cert = regular_cover_check(&g, &h, &opts()).unwrap().certificate.unwrap();
                let back = Certificate::from_json(&cert.to_json()).unwrap();
                prop_assert!(verify_certificate(&g, &h, &back).is_ok());
            }
        }
    }

    #[test]
    fn reduction_expansion_commutes(seed in any::<u64>()) {
        let g = random_graph(seed, 10);
        let n = g.num_vertices();
        for k in (2..=n).filter(|k| n % k == 0) {
            for sub in semiregular_subgroups_of_order(&g, k, DEFAULT_BUDGET).unwrap() {
                let got = common::reduce_quotient_expand(&g, &sub);
                let (direct, _) = quotient_unchecked(&g, &sub).unwrap();
                prop_assert_eq!(canonical_form(&got, None).cert, canonical_form(&direct, None).cert);
            }
        }
    }

    #[test]
    fn iv_solver_matches_bruteforce(seed in any::<u64>(), planted in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = if planted {
            std::iter::repeat_with(|| common::planted_iv_instance(&mut rng, 6))
                .find(|i| i.num_vertices() <= 20)
                .unwrap()
        } else {
            random_instance(&mut rng, 16, 6)
        };
        let a = solve_iv_matching(&inst, 10_000_000).unwrap();
        let b = solve_bruteforce(&inst, 100_000_000).unwrap();
        prop_assert_eq!(a.is_some(), b.is_some());
        if planted {
            prop_assert!(a.is_some());
        }
        if let Some(s) = a {
            prop_assert!(verify_solution(&inst, &s).is_ok());
        }
    }

    #[test]
    fn iv_text_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 16, 6);
        prop_assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
    }
}

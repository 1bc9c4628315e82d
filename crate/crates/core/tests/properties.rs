mod common;

use proptest::prelude::*;
use wiretap_bounds::bounds::{message_upper_bound, tau_algorithm1, tau_bruteforce, Limits, Tau};
use wiretap_bounds::code::{
    construct_code, decode, derive_rates, encode, mutual_information_oracle, verify_security_rank,
};
use wiretap_bounds::field::smallest_prime_above;
use wiretap_bounds::network::DEFAULT_CUT_LIMIT;

use common::Instance;

fn instance(seed: u64, covered: bool) -> Instance {
    let mut rng = common::seeded(seed);
    if covered {
        common::random_covered_dag(&mut rng)
    } else {
        common::random_dag(&mut rng)
    }
}

fn with_sets(inst: &Instance, wiretap: Vec<u32>) -> Instance {
    let mut out = inst.clone();
    out.spec.wiretap_sets = wiretap
        .iter()
        .map(|&m| {
            (0..inst.edges.len())
                .filter(|&e| m >> e & 1 == 1)
                .map(|e| format!("e{}", e + 1))
                .collect()
        })
        .collect();
    out.wiretap = wiretap;
    out
}

fn tau(inst: &Instance) -> Tau {
    tau_bruteforce(&inst.network(), &Limits::default())
        .unwrap()
        .tau
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn min_cut_matches_subset_enumeration(seed in any::<u64>()) {
        let inst = instance(seed, false);
        let net = inst.network();
        for (k, &u) in inst.users.iter().enumerate() {
            prop_assert_eq!(net.min_cut_to(&[], net.users()[k]) as u32, common::min_cut_bruteforce(&inst, 0, u));
        }
    }

    #[test]
    fn minimal_cuts_are_exactly_the_minimal_blocking_sets(seed in any::<u64>()) {
        let inst = instance(seed, false);
        let net = inst.network();
        let listed: Vec<(u32, usize)> = net
            .enumerate_minimal_cuts(DEFAULT_CUT_LIMIT)
            .unwrap()
            .into_iter()
            .map(|c| {
                let user = inst.spec.users.iter().position(|u| *u == c.user).unwrap();
                (c.edges.iter().fold(0u32, |m, &e| m | 1 << e), user)
            })
            .collect();
        let cuts_user = |mask: u32, k: usize| !common::reachable(inst.num_nodes, &inst.edges, mask, 0)[inst.users[k]];
        let mut expected = Vec::new();
        for k in 0..inst.users.len() {
            for mask in 0..=inst.all_edges() {
                let minimal = cuts_user(mask, k)
                    && (0..inst.edges.len()).filter(|&e| mask >> e & 1 == 1).all(|e| !cuts_user(mask & !(1 << e), k));
                if minimal {
                    expected.push((mask, k));
                }
            }
        }
        let mut listed_sorted = listed.clone();
        listed_sorted.sort();
        listed_sorted.dedup();
        expected.sort();
        prop_assert_eq!(listed_sorted, expected);
    }

    #[test]
    fn adding_a_wiretap_set_never_helps_the_source(seed in any::<u64>(), extra in 1u32..1024) {
        let inst = instance(seed, seed % 2 == 0);
        let extra = extra & inst.all_edges();
        prop_assume!(extra != 0 && !inst.wiretap.contains(&extra));
        let mut sets = inst.wiretap.clone();
        sets.push(extra);
        let stronger = with_sets(&inst, sets);
        prop_assert!(tau(&stronger) >= tau(&inst));
        prop_assert!(
            message_upper_bound(&stronger.network()).bound_logq <= message_upper_bound(&inst.network()).bound_logq
        );
    }

    #[test]
    fn dominated_wiretap_sets_change_nothing(seed in any::<u64>(), pick in any::<u32>()) {
        let inst = instance(seed, true);
        let host = inst.wiretap[pick as usize % inst.wiretap.len()];
        let sub = host & pick.rotate_left(7);
        prop_assume!(sub != 0 && sub != host && !inst.wiretap.contains(&sub));
        let mut sets = inst.wiretap.clone();
        sets.push(sub);
        let padded = with_sets(&inst, sets);
        let (a, b) = (inst.network(), padded.network());
        prop_assert_eq!(tau(&padded), tau(&inst));
        prop_assert_eq!(
            tau_algorithm1(&b, &Limits::default()).unwrap().tau,
            tau_algorithm1(&a, &Limits::default()).unwrap().tau
        );
        prop_assert_eq!(message_upper_bound(&b).bound_logq, message_upper_bound(&a).bound_logq);
    }

    #[test]
    fn tau_positive_iff_tapped_edges_block(seed in any::<u64>()) {
        let inst = instance(seed, seed % 3 == 0);
        prop_assert_eq!(!tau(&inst).is_zero(), !common::wiretap_free_paths(&inst));
    }

    #[test]
    fn tau_unbounded_iff_one_set_blocks(seed in any::<u64>()) {
        let inst = instance(seed, seed % 3 == 0);
        let blocks = inst.wiretap.iter().any(|&w| common::is_blocking(&inst, w));
        prop_assert_eq!(tau(&inst) == Tau::Unbounded, blocks);
    }

    #[test]
    fn message_bound_matches_blocking_enumeration(seed in any::<u64>()) {
        let inst = instance(seed, seed % 2 == 1);
        prop_assume!(inst.edges.len() <= 9);
        prop_assert_eq!(message_upper_bound(&inst.network()).bound_logq as u32, common::cor2_bruteforce(&inst));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn larger_fields_keep_codes_optimal_and_secure(seed in any::<u64>(), bump in 0u64..3, symbols in any::<[u64; 16]>()) {
        let inst = common::random_point_to_point(&mut common::seeded(seed));
        let net = inst.network();
        let Ok(rate) = derive_rates(&net) else {
            return Ok(());
        };
        let mut q = smallest_prime_above(net.wiretap_sets().len() as u64);
        for _ in 0..bump {
            q = smallest_prime_above(q);
        }
        let code = construct_code(&net, &rate, q).unwrap();
        prop_assert_eq!(Tau::Finite(rate.key_to_message_ratio()), tau(&inst));
        prop_assert!(verify_security_rank(&code, &net).unwrap());
        let m: Vec<u64> = symbols[..code.w_total()].iter().map(|x| x % q).collect();
        let k: Vec<u64> = symbols[8..8 + code.g].iter().map(|x| x % q).collect();
        prop_assert_eq!(decode(&code, &encode(&code, &m, &k).unwrap()).unwrap(), m);
        for set in net.wiretap_sets() {
            let ids = net.edge_ids(set);
            if let Ok(o) = mutual_information_oracle(&code, &ids, 1 << 16) {
                prop_assert!(o.independent());
            }
        }
    }
}

#[test]
fn butterfly_message_bound() {
    let inst = common::butterfly(&[&[1], &[3], &[5, 6], &[5, 7], &[6, 7]]);
    // {e6, e7} removes both routes into U2
    assert_eq!(common::cor2_bruteforce(&inst), 0);
    let rep = message_upper_bound(&inst.network());
    assert_eq!(rep.bound_logq, 0);
    assert_eq!(rep.witness_wiretap, Some(4));
    let free = common::butterfly(&[]);
    assert_eq!(message_upper_bound(&free.network()).bound_logq, 2);
}

#[test]
fn butterfly_cut_queries() {
    let inst = common::butterfly(&[]);
    let net = inst.network();
    assert_eq!(net.min_cut(&[], "v5").unwrap(), 2);
    assert!(net.is_blocking_set(&[0, 1]).unwrap());
    assert!(common::is_blocking(&inst, 0b11));
    let cuts = net.enumerate_minimal_cuts(DEFAULT_CUT_LIMIT).unwrap();
    assert!(cuts.iter().any(|c| c.edges == [0, 1]));
    assert!(cuts.iter().any(|c| c.edges == [0, 4]));
}

mod common;

use mwrc::channel::{for_each_tuple, ChannelSpec};
use mwrc::document::{parse_channel, ChannelFile};
use mwrc::info::{
    conditional_entropy, entropy, is_robust_typical, mutual_information, Distribution, JointTable,
};
use mwrc::region::{constraint_slacks, InputDistribution};
use mwrc::sim::{run_trial, SimConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn normalized(raw: Vec<f64>) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

fn mass(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, len).prop_filter_map("non-zero", |raw| {
        (raw.iter().sum::<f64>() > 1e-6).then(|| normalized(raw))
    })
}

/// A joint law on three axes of sizes 2, 3, 2.
fn joint() -> impl Strategy<Value = JointTable> {
    mass(12).prop_map(|m| JointTable::new(vec![2, 3, 2], m).unwrap())
}

proptest! {
    #[test]
    fn entropy_is_concave(p in mass(4), q in mass(4), lambda in 0.0f64..=1.0) {
        let mix: Vec<f64> = p.iter().zip(&q).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        let h = |m: &[f64]| entropy(&Distribution::new(m.to_vec()).unwrap());
        prop_assert!(h(&mix) >= lambda * h(&p) + (1.0 - lambda) * h(&q) - 1e-9);
    }

    #[test]
    fn conditioning_never_increases_entropy(j in joint()) {
        let coarse = conditional_entropy(&j, &[0], &[1]).unwrap();
        let fine = conditional_entropy(&j, &[0], &[1, 2]).unwrap();
        prop_assert!(fine <= coarse + 1e-9);
    }

    #[test]
    fn chain_rule(j in joint()) {
        let h_ab = j.entropy_of(&[0, 1]).unwrap();
        let h_a = j.entropy_of(&[0]).unwrap();
        let h_b_given_a = conditional_entropy(&j, &[1], &[0]).unwrap();
        prop_assert!((h_ab - h_a - h_b_given_a).abs() < 1e-9);
    }

    #[test]
    fn mutual_information_is_symmetric(j in joint()) {
        let ab = mutual_information(&j, &[0], &[1, 2]).unwrap();
        let ba = mutual_information(&j, &[1, 2], &[0]).unwrap();
        prop_assert!((ab - ba).abs() < 1e-9);
    }

    #[test]
    fn uplink_is_total_and_stable(seed in any::<u64>()) {
        let spec = common::random_binary_spec(&mut ChaCha8Rng::seed_from_u64(seed));
        for_each_tuple(&spec.user_alphabets, |x| {
            let y = spec.apply_uplink(x).unwrap();
            assert!(y < spec.relay_output_size);
            assert_eq!(spec.apply_uplink(x).unwrap(), y);
        });
    }

    #[test]
    fn downlink_marginal_rows_sum_to_one(seed in any::<u64>()) {
        let spec = common::random_binary_spec(&mut ChaCha8Rng::seed_from_u64(seed));
        for user in 0..spec.num_users() {
            for row in spec.downlink_marginal(user).unwrap() {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn special_case_implies_injective(seed in any::<u64>()) {
        let spec = common::random_binary_spec(&mut ChaCha8Rng::seed_from_u64(seed));
        if spec.check_special_case().applies() {
            let mut seen = std::collections::BTreeSet::new();
            for_each_tuple(&spec.user_alphabets, |x| {
                assert!(seen.insert(spec.apply_uplink(x).unwrap()));
            });
        }
    }

    #[test]
    fn channel_file_round_trip(seed in any::<u64>()) {
        let spec = common::random_binary_spec(&mut ChaCha8Rng::seed_from_u64(seed));
        let text = ChannelFile::from_spec(&spec).to_json();
        prop_assert_eq!(parse_channel(&text).unwrap(), spec);
    }

    #[test]
    fn slacks_fall_as_rates_rise(seed in any::<u64>(), r1 in 0.0f64..1.0, r2 in 0.0f64..1.0, bump in 0.0f64..0.5) {
        let spec = common::random_binary_spec(&mut ChaCha8Rng::seed_from_u64(seed));
        let dist = InputDistribution::uniform(&spec);
        let low = constraint_slacks(&spec, &[r1, r2], &dist).unwrap();
        let high = constraint_slacks(&spec, &[r1 + bump, r2], &dist).unwrap();
        for ((_, a), (_, b)) in low.cuts().zip(high.cuts()) {
            prop_assert!(b <= a + 1e-12);
        }
    }
}

#[test]
fn robust_typicality_pass_rate_grows_with_n() {
    let reference = JointTable::new(vec![2, 2], vec![0.3, 0.2, 0.25, 0.25]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut rate = |n: usize| {
        let trials = 2000;
        let mut pass = 0;
        for _ in 0..trials {
            let (mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
            for _ in 0..n {
                let u: f64 = rng.random();
                let cell = match u {
                    u if u < 0.3 => 0,
                    u if u < 0.5 => 1,
                    u if u < 0.75 => 2,
                    _ => 3,
                };
                a.push(cell / 2);
                b.push(cell % 2);
            }
            if is_robust_typical(&[&a, &b], &reference, 0.1).unwrap() {
                pass += 1;
            }
        }
        pass as f64 / trials as f64
    };
    let (short, long) = (rate(100), rate(1000));
    assert!(long > short, "pass rate {short} at n=100, {long} at n=1000");
}

#[test]
fn trials_are_reproducible_from_seed_and_index() {
    let spec = ChannelSpec::xor_bsc(0.1).unwrap();
    let dist = InputDistribution::uniform(&spec);
    let config = SimConfig::new(spec, dist, vec![0.3, 0.3], 10);
    for t in [0, 5, 99] {
        assert_eq!(
            run_trial(&config, t).unwrap(),
            run_trial(&config, t).unwrap()
        );
    }
}

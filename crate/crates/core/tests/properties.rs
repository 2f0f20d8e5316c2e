//! Invariants checked over random inputs.

use proptest::prelude::*;
use ssk_noma::analytics::abep::{abep_u1, abep_u2, abep_u3, LinkParams};
use ssk_noma::analytics::capacity::{ergodic_capacity_noma_user, sum_rate};
use ssk_noma::analytics::fading::chi2_cdf;
use ssk_noma::analytics::outage::{outage_threshold_psi, sinr_cascade_outage};
use ssk_noma::channel::{transmit_noiseless, ChannelMatrix, SnrConfig};
use ssk_noma::constellation::{
    enumerate_sc_alphabet, format_bits, map_antenna, parse_bits, superpose, Modulation, PowerAllocation,
    UserConstellation,
};
use ssk_noma::detectors::SmDetector;
use ssk_noma::C64;

fn modulation() -> impl Strategy<Value = Modulation> {
    prop_oneof![
        Just(Modulation::Bpsk),
        Just(Modulation::Qpsk),
        Just(Modulation::Psk(8)),
        Just(Modulation::Qam(16)),
        Just(Modulation::Qam(64)),
    ]
}

/// Strictly decreasing coefficients summing to one.
fn power_allocation(max_layers: usize) -> impl Strategy<Value = PowerAllocation> {
    prop::collection::vec(1.0f64..100.0, 1..=max_layers).prop_filter_map("distinct", |mut w| {
        w.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if w.windows(2).any(|p| p[0] - p[1] < 1e-3) {
            return None;
        }
        let s: f64 = w.iter().sum();
        let mut c: Vec<f64> = w.iter().map(|x| x / s).collect();
        let rest: f64 = c[1..].iter().sum();
        c[0] = 1.0 - rest;
        PowerAllocation::new(c).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gray_labels_round_trip(m in modulation()) {
        let c = UserConstellation::new(m);
        for label in 0..c.order() {
            prop_assert_eq!(c.demap(c.symbol(label)), label);
            let bits = c.label_bits(label);
            prop_assert_eq!(c.gray_map(&bits).unwrap(), c.symbol(label));
        }
        prop_assert!((c.mean_energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn antenna_bits_round_trip(k in 1u32..7, v in 0usize..64) {
        let n = 1usize << k;
        let v = v % n;
        prop_assert_eq!(map_antenna(&format_bits(v, k), n).unwrap(), v);
        prop_assert_eq!(parse_bits(&format_bits(v, k)).unwrap(), v);
    }

    #[test]
    fn superposition_is_weighted_sum(pa in power_allocation(4), seed in any::<u64>()) {
        let q = UserConstellation::new(Modulation::Qpsk);
        let symbols: Vec<C64> = (0..pa.len()).map(|l| q.symbol(((seed >> (2 * l)) & 3) as usize)).collect();
        let want: C64 = symbols.iter().zip(pa.coefficients()).map(|(s, a)| s * a.sqrt()).sum();
        prop_assert!((superpose(&symbols, &pa).unwrap() - want).norm() < 1e-12);
        let consts = vec![q; pa.len()];
        let alpha = enumerate_sc_alphabet(&consts, &pa).unwrap();
        prop_assert!((alpha.mean_energy() - 1.0).abs() < 1e-12);
        let labels: Vec<usize> = (0..pa.len()).map(|l| ((seed >> (2 * l)) & 3) as usize).collect();
        prop_assert!((alpha.value(alpha.index_of(&labels)) - want).norm() < 1e-12);
        prop_assert_eq!(alpha.labels_of(alpha.index_of(&labels)), labels);
    }

    #[test]
    fn noiseless_joint_search_recovers_input(
        seed in any::<u64>(), v in 0usize..4, k in 0usize..16, db in -10.0f64..40.0, scale in 0.1f64..10.0,
    ) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let q = UserConstellation::new(Modulation::Qpsk);
        let pa = PowerAllocation::new(vec![0.8, 0.2]).unwrap();
        let alpha = enumerate_sc_alphabet(&[q.clone(), q], &pa).unwrap();
        let h = ChannelMatrix::sample(4, 2, scale, &mut rng);
        let snr = SnrConfig::from_db(db);
        let r = transmit_noiseless(h.column(v), alpha.value(k), snr);
        let d = SmDetector::new(&alpha).unwrap().detect(&r, &h, snr);
        prop_assert_eq!((d.antenna, d.sc_index), (v, k));
    }

    #[test]
    fn psi_grows_with_layer_and_target(
        pa in power_allocation(5), phi in prop::collection::vec(0.01f64..4.0, 5), bump in 0.0f64..2.0,
    ) {
        let phis = &phi[..pa.len()];
        let mut prev = 0.0;
        for layer in 0..pa.len() {
            let psi = outage_threshold_psi(layer, &pa, phis);
            prop_assert!(psi >= prev);
            prev = psi;
            let mut raised = phis.to_vec();
            raised[layer] += bump;
            prop_assert!(outage_threshold_psi(layer, &pa, &raised) >= psi);
        }
    }

    #[test]
    fn threshold_and_cascade_agree(
        pa in power_allocation(4), phi in prop::collection::vec(0.01f64..3.0, 4), g in 0.0f64..1e4,
    ) {
        let phis = &phi[..pa.len()];
        for layer in 0..pa.len() {
            let psi = outage_threshold_psi(layer, &pa, phis);
            // Stay clear of the boundary, where rounding may flip either test.
            prop_assume!((g - psi).abs() > 1e-9 * psi.max(1.0));
            prop_assert_eq!(g < psi, sinr_cascade_outage(g, layer, &pa, phis));
        }
    }

    #[test]
    fn chi2_cdf_is_a_distribution(n in 1usize..9, gb in 0.01f64..1e3, x in 0.0f64..1e4, y in 0.0f64..1e4) {
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        let (a, b) = (chi2_cdf(lo, n, gb), chi2_cdf(hi, n, gb));
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(a <= b + 1e-15);
    }

    #[test]
    fn error_rates_fall_with_snr(db in -10.0f64..40.0, step in 0.5f64..10.0, n in 1usize..5, a2 in 0.55f64..0.95) {
        let l = |d: f64, s: f64| LinkParams::new(10f64.powf(d / 10.0), s, n).unwrap();
        let a3 = 1.0 - a2;
        let (lo2, hi2) = (abep_u2(a2, a3, &l(db, 2.0)).unwrap(), abep_u2(a2, a3, &l(db + step, 2.0)).unwrap());
        prop_assert!(hi2 <= lo2 && lo2 <= 0.5);
        let (lo3, hi3) = (abep_u3(a2, a3, &l(db, 4.0)).unwrap(), abep_u3(a2, a3, &l(db + step, 4.0)).unwrap());
        prop_assert!(hi3 <= lo3 + 1e-15);
        let q = UserConstellation::new(Modulation::Qpsk);
        let pa = PowerAllocation::new(vec![a2, a3]).unwrap();
        let alpha = enumerate_sc_alphabet(&[q.clone(), q], &pa).unwrap();
        let (u1_lo, u1_hi) = (abep_u1(&alpha, 2, &l(db, 1.0)), abep_u1(&alpha, 2, &l(db + step, 1.0)));
        prop_assert!(u1_hi <= u1_lo && u1_lo <= 1.0);
    }

    #[test]
    fn rates_are_monotone_and_sum(pa in power_allocation(4), db in -10.0f64..40.0, n in 1usize..9) {
        let link = |d: f64, l: usize| LinkParams::new(10f64.powf(d / 10.0), 2f64.powi(l as i32 + 1), n).unwrap();
        let rates: Vec<f64> = (0..pa.len()).map(|l| ergodic_capacity_noma_user(l, &pa, &link(db, l)).unwrap()).collect();
        for (l, r) in rates.iter().enumerate() {
            prop_assert!(*r >= 0.0);
            let higher = ergodic_capacity_noma_user(l, &pa, &link(db + 3.0, l)).unwrap();
            prop_assert!(higher + 1e-12 >= *r);
        }
        let total: f64 = rates.iter().sum();
        prop_assert!((sum_rate(&rates) - total).abs() < 1e-12);
    }
}

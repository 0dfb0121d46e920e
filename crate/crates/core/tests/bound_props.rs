use decobound::bound::{beta_fals, dec_bound_limit_at_classical, dec_bound_quantum, TSIRELSON};
use decobound::entropy::{dec_from_hmin, dec_quantum, hmin_dual};
use decobound::quantum::{beta_max, BellDiagonalState};
use proptest::prelude::*;

fn bell_weights() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(0.0f64..1.0).prop_filter_map("nonzero total", |w| {
        let total: f64 = w.iter().sum();
        (total > 1e-6).then(|| w.map(|v| v / total))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bound_is_monotone_and_in_range(a in 0.0f64..TSIRELSON, b in 0.0f64..TSIRELSON) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let d_lo = dec_bound_quantum(lo).unwrap();
        let d_hi = dec_bound_quantum(hi).unwrap();
        prop_assert!((0.25 - 1e-12..=1.0).contains(&d_lo));
        prop_assert!(d_hi <= d_lo + 1e-12);
    }

    #[test]
    fn bound_holds_for_bell_diagonal(p in bell_weights()) {
        let state = BellDiagonalState::new(p).unwrap();
        let beta = beta_max(&state.to_state()).min(TSIRELSON);
        let dec = dec_quantum(&p).unwrap();
        prop_assert!(dec <= dec_bound_quantum(beta).unwrap() + 1e-9, "{p:?}: β = {beta}, Dec = {dec}");
    }

    #[test]
    fn dec_and_min_entropy_agree(p in bell_weights()) {
        let direct = 0.25 * p.iter().map(|v| v.sqrt()).sum::<f64>().powi(2);
        let via_entropy = dec_from_hmin(hmin_dual(&p).unwrap());
        prop_assert!((direct - via_entropy).abs() <= 1e-12);
        prop_assert!((dec_quantum(&p).unwrap() - direct).abs() <= 1e-12);
    }

    #[test]
    fn falsification_inverts_bound(beta in 2.01f64..TSIRELSON) {
        let dec = dec_bound_quantum(beta).unwrap();
        prop_assume!(dec < dec_bound_limit_at_classical());
        let back = beta_fals(dec).unwrap();
        prop_assert!((back - beta).abs() <= 1e-8, "{beta} -> {dec} -> {back}");
    }
}

use proptest::prelude::*;

use twtc_core::gaussian::{
    induced_dms_cov, mi_oracle, mi_profile, ChannelParams, MiProfile, MiQuantity, PowerSplit, Preset,
};
use twtc_core::keyrate::{key_rate_point, T_POINTS, reduce_dms, t_sweep, Chain, KeyRateEnvelope, ScalarDegradedSource};
use twtc_core::polytope::{project_fm, vertices_2d, vertices_nd, HalfspaceSystem, Polygon2};
use twtc_core::regions::{
    base_ledgers, corollary1_polygon, kg_augment, kx_polygon, key_exchange_ledger, multi_round_rate,
    projection_equivalence_check, KgConfig, RatePoint4, RateSplitLedger,
};
use twtc_core::sim::{
    exact_leakage, generate_code, one_time_pad, one_time_pad_decrypt, Alphabets, CodeParams, DmcSpec, PrefixSpec,
};

fn channel() -> impl Strategy<Value = (ChannelParams, PowerSplit)> {
    (0.05..4.0f64, 0.05..4.0f64, 0.0..5.0f64, 0.0..5.0f64, 0.05..20.0f64, 0.05..20.0f64, 0.0..1.0f64, 0.0..1.0f64)
        .prop_map(|(g1, g2, h1, h2, r1, r2, f1, f2)| {
            let p = ChannelParams::new(g1, g2, h1, h2, r1, r2).unwrap();
            let s = PowerSplit::new(&p, f1 * r1, f2 * r2).unwrap();
            (p, s)
        })
}

fn profile() -> impl Strategy<Value = MiProfile> {
    (0.0..3.0f64, 0.0..3.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.5f64)
        .prop_map(|(a1, a2, e1, e2, extra)| MiProfile::from_chain(a1, a2, e1, e2, e1 + e2 + extra).unwrap())
}

fn source() -> impl Strategy<Value = ScalarDegradedSource> {
    (0.01..20.0f64, 0.05..5.0f64, 0.1..5.0f64, 0.05..20.0f64)
        .prop_map(|(v, n, c, w)| ScalarDegradedSource::new(v, n, c, w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn closed_forms_match_covariance_oracle((p, s) in channel()) {
        let mi = mi_profile(&p, &s).unwrap();
        for q in MiQuantity::ALL {
            prop_assert!((q.of(&mi) - mi_oracle(&p, &s, q).unwrap()).abs() < 1e-9);
        }
        prop_assert!((mi.e12 - mi.e1 - mi.e2c).abs() < 1e-9);
        prop_assert!((mi.e12 - mi.e2 - mi.e1c).abs() < 1e-9);
    }

    #[test]
    fn profile_is_symmetric_under_user_swap((p, s) in channel()) {
        let a = mi_profile(&p, &s).unwrap().swapped();
        let b = mi_profile(&p.swapped(), &s.swapped()).unwrap();
        for q in MiQuantity::ALL {
            prop_assert!((q.of(&a) - q.of(&b)).abs() < 1e-12);
        }
    }

    #[test]
    fn projections_agree(mi in profile()) {
        prop_assert!(projection_equivalence_check(&mi));
    }

    #[test]
    fn cooperative_jamming_inside_key_exchange(mi in profile()) {
        prop_assert!(kx_polygon(&mi).contains_polygon(&corollary1_polygon(&mi), 1e-9));
    }

    #[test]
    fn ledger_conserves_rates(
        r in (0.0..2.0f64, 0.0..2.0f64, 0.0..2.0f64, 0.0..2.0f64),
        f in (0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64),
    ) {
        let (r1, r2, r1p, r2p) = r;
        let p = RatePoint4::new(r1, r2, r1p, r2p).unwrap();
        let (k1, k2) = (f.0 * r1, f.1 * r2);
        let (e2, e1) = (f.2 * k1.min(r2p), f.3 * k2.min(r1p));
        let l = RateSplitLedger { rs: [r1 - k1, r2 - k2], rk: [k1, k2], ro: [r1p - e1, r2p - e2], re: [e1, e2] };
        let (t1, t2) = key_exchange_ledger(&p, &l).unwrap();
        prop_assert!((t1 + t2 + l.unused_key() - (r1 + r2)).abs() < 1e-12);
        prop_assert!((t1 + t2 + k1 + k2 - (r1 + r2 + e1 + e2)).abs() < 1e-12);
    }

    #[test]
    fn ledger_budget_is_enforced(k in 0.0..1.0f64, over in 1e-6..1.0f64) {
        let p = RatePoint4::new(1.0, 1.0, 2.0, 2.0).unwrap();
        let l = RateSplitLedger { rs: [1.0 - k, 1.0], rk: [k, 0.0], ro: [2.0, 2.0 - k - over], re: [0.0, k + over] };
        prop_assert!(key_exchange_ledger(&p, &l).is_err());
    }

    #[test]
    fn public_rate_is_nonnegative_and_degraded_keys_exist(s in source(), lt in -6.0..6.0f64) {
        let pt = key_rate_point(&s, s.var_x * 10f64.powf(lt)).unwrap();
        prop_assert!(pt.rp >= -1e-12);
        if s.eve_noise / (s.eve_gain * s.eve_gain) >= s.noise_y {
            prop_assert!(pt.rk_raw >= -1e-12);
        }
    }

    #[test]
    fn key_rates_ignore_eavesdropper_scale(s in source(), lt in -6.0..6.0f64, k in 0.01..100.0f64) {
        let t = s.var_x * 10f64.powf(lt);
        let scaled = ScalarDegradedSource::new(s.var_x, s.noise_y, s.eve_gain * k, s.eve_noise * k * k).unwrap();
        let (a, b) = (key_rate_point(&s, t).unwrap(), key_rate_point(&scaled, t).unwrap());
        prop_assert!((a.rp - b.rp).abs() < 1e-9 && (a.rk - b.rk).abs() < 1e-9);
    }

    #[test]
    fn envelope_is_concave_nondecreasing_and_bounded(s in source()) {
        let env = KeyRateEnvelope::new(&s).unwrap();
        prop_assert_eq!(env.eval(0.0), 0.0);
        let b = env.breakpoints();
        for w in b.windows(2) {
            prop_assert!(w[1].1 >= w[0].1);
        }
        for w in b.windows(3) {
            let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
            prop_assert!(s2 <= s1 + 1e-9);
        }
        prop_assert!(env.max_key_rate() <= s.key_rate_ceiling() + 1e-9);
        for t in t_sweep(s.var_x, T_POINTS) {
            let pt = key_rate_point(&s, t).unwrap();
            prop_assert!(pt.rk <= env.eval(pt.rp.max(0.0)) + 1e-9);
        }
    }

    #[test]
    fn shared_budget_optimum(s in source(), budget in 0.0..5.0f64) {
        let env = KeyRateEnvelope::new(&s).unwrap();
        let k = env.max_key_shared_budget(budget);
        // brute force over the split of the budget
        let brute = (0..=2000)
            .map(|i| budget * i as f64 / 2000.0)
            .map(|p| env.eval(p).min(budget - p))
            .fold(0.0, f64::max);
        prop_assert!(k >= brute - 1e-9 && k <= brute + budget / 1000.0 + 1e-9);
    }

    #[test]
    fn key_generation_commutes_with_user_swap(f in 0.0..1.0f64) {
        let p = ChannelParams::preset(Preset::Fig5);
        let s = PowerSplit::new(&p, f, f).unwrap();
        let mi = mi_profile(&p, &s).unwrap();
        let dms = induced_dms_cov(&p, &s).unwrap();
        let (mi_sw, dms_sw) = (mi.swapped(), dms.swapped());
        for l in base_ledgers(&mi, 1) {
            for cfg in KgConfig::ALL {
                let a = kg_augment(&mi, &dms, &cfg, &l);
                let b = kg_augment(&mi_sw, &dms_sw, &cfg.swapped(), &l.swapped());
                match (a, b) {
                    (Ok(a), Ok(b)) => {
                        let mirrored = Polygon2::hull(b.vertices().iter().map(|&(x, y)| (y, x)).collect());
                        prop_assert!(a.approx_eq(&mirrored, 1e-9));
                    }
                    (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
                }
            }
        }
    }

    #[test]
    fn kg_never_loses_base_rates(f1 in 0.0..1.0f64, f2 in 0.0..1.0f64) {
        let p = ChannelParams::preset(Preset::Fig5);
        let s = PowerSplit::new(&p, f1, f2).unwrap();
        let mi = mi_profile(&p, &s).unwrap();
        let dms = induced_dms_cov(&p, &s).unwrap();
        for l in base_ledgers(&mi, 1) {
            for cfg in KgConfig::ALL {
                if let Ok(poly) = kg_augment(&mi, &dms, &cfg, &l) {
                    prop_assert!(poly.contains(l.effective(), 1e-9));
                    prop_assert!(kx_polygon(&mi).contains(l.effective(), 1e-9));
                }
            }
        }
    }

    #[test]
    fn projection_matches_vertex_shadow(
        rows in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.1..2.0f64), 1..6)
    ) {
        let mut sys = HalfspaceSystem::new(3).unwrap();
        for (a, b, c, d) in rows {
            sys = sys.le(&[a, b, c], d).unwrap();
        }
        // bounding box keeps everything finite
        for i in 0..3 {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            sys = sys.le(&e, 1.0).unwrap();
            e[i] = -1.0;
            sys = sys.le(&e, 1.0).unwrap();
        }
        let shadow = Polygon2::hull(vertices_nd(&sys).iter().map(|v| (v[0], v[1])).collect());
        let proj = vertices_2d(&project_fm(&sys, &[0, 1]).unwrap()).unwrap();
        prop_assert!(proj.approx_eq(&shadow, 1e-7));
    }

    #[test]
    fn hull_contains_its_points(pts in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..40)) {
        let h = Polygon2::hull(pts.clone());
        for p in &pts {
            prop_assert!(h.contains(*p, 1e-9));
        }
        prop_assert!(Polygon2::hull(h.vertices().to_vec()).approx_eq(&h, 1e-12));
    }

    #[test]
    fn leakage_bounds_and_determinism(
        seed in any::<u64>(),
        q in 0.0..0.5f64,
        counts in (1u64..3, 1u64..3, 1u64..3, 1u64..3),
        n in 1usize..4,
    ) {
        let a = Alphabets { x1: 2, x2: 2, y1: 1, y2: 1, z: 2 };
        let d = DmcSpec::from_fn(a, |x1, x2, _, _, z| if z == (x1 ^ x2) { 1.0 - q } else { q }).unwrap();
        let pre = PrefixSpec::identity(&d);
        let params = CodeParams {
            n, m1: counts.0, m1p: counts.1, m2: counts.2, m2p: counts.3,
            p_c1: vec![0.5, 0.5], p_c2: vec![0.5, 0.5], seed,
        };
        let code = generate_code(&params).unwrap();
        prop_assert_eq!(&code, &generate_code(&params).unwrap());
        let r = exact_leakage(&code, &d, &pre).unwrap();
        let cap = ((counts.0 * counts.2) as f64).log2();
        prop_assert!(r.leakage_bits >= 0.0 && r.leakage_bits <= cap + 1e-12);
        let mean = r.divergences.iter().sum::<f64>() / r.divergences.len() as f64;
        prop_assert!(mean >= r.leakage_bits - 1e-9);
    }

    #[test]
    fn pad_is_a_bijection(k in 1u64..1000, m in any::<u64>(), key in any::<u64>()) {
        let (m, key) = (m % k, key % k);
        let c = one_time_pad(m, key, k).unwrap();
        prop_assert!(c < k);
        prop_assert_eq!(one_time_pad_decrypt(c, key, k).unwrap(), m);
    }

    #[test]
    fn multi_round_approaches_steady_rate(first in 0.0..5.0f64, steady in 0.0..5.0f64, b in 1u64..10_000) {
        let r = multi_round_rate(first, steady, b).unwrap();
        prop_assert!((r - steady).abs() <= (first - steady).abs() / b as f64 + 1e-12);
    }
}

#[test]
fn chain_a_reduction_matches_closed_form() {
    let p = ChannelParams::new(1.0, 1.0, 3.0, 2.0, 1.0, 1.5).unwrap();
    let s = PowerSplit::new(&p, 0.4, 0.7).unwrap();
    let src = reduce_dms(&induced_dms_cov(&p, &s).unwrap(), Chain::A).unwrap();
    assert!((src.var_x - 0.4).abs() < 1e-12);
    assert!((src.noise_y - 1.0).abs() < 1e-12);
    assert!((src.eve_gain - 3f64.sqrt()).abs() < 1e-12);
    assert!((src.eve_noise - (2.0 * 0.7 + 1.0)).abs() < 1e-12);
}

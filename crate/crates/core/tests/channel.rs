use std::collections::BTreeMap;

use irs_jsce::channel::*;
use irs_jsce::scheduler::ScheduleMatrix;
use irs_jsce::semantic::{SemanticFrame, Superposition};
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex<f64>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn scenario_config(irs: Option<(usize, usize)>) -> ChannelConfig<f64> {
    let pos = [(1.13, 0.50), (-0.01, -0.21), (-1.10, -0.28), (0.19, 1.01), (0.20, 0.01)];
    ChannelConfig {
        positions: pos.iter().map(|&(x, y)| Position::new(x, y).unwrap()).collect(),
        irs_position: Position::new(0.0, 0.0).unwrap(),
        irs: irs.map(|(h, v)| UpaGeometry::new(h, v, 0.1).unwrap()),
        kappa: 10.0,
        noise_power: 0.1,
        transmit_power: 1.0,
        path_loss_exponent: 2.0,
    }
}

/// Mean and standard error of `xs`.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn superposition(frame: Vec<C>, components: Vec<(usize, Vec<C>)>) -> Superposition<f64> {
    Superposition {
        frame: SemanticFrame::new(frame),
        components: components.into_iter().map(|(d, s)| (d, SemanticFrame::new(s))).collect(),
    }
}

fn power(s: &[C]) -> f64 {
    s.iter().map(|x| x.norm_sqr()).sum::<f64>() / s.len() as f64
}

#[test]
fn position_rejects_non_finite() {
    assert!(Position::new(f64::NAN, 0.0).is_err());
    assert!(Position::new(0.0, f64::INFINITY).is_err());
    let p = Position::new(3.0, 4.0).unwrap();
    assert_eq!(p.distance(&Position::new(0.0, 0.0).unwrap()), 5.0);
}

#[test]
fn upa_spacing_is_half_wavelength() {
    let g = UpaGeometry::new(4, 2, 0.1).unwrap();
    assert_eq!(g.elements(), 8);
    assert_eq!(g.spacing(), 0.05);
    assert!(UpaGeometry::new(0, 3, 0.1).is_err());
    assert!(UpaGeometry::<f64>::new(2, 2, 0.0).is_err());
}

#[test]
fn rician_los_limit() {
    let g = UpaGeometry::new(3, 3, 0.1).unwrap();
    let los = los_component(1.3, 0.4, 0.0, &g).unwrap();
    let s = rician_sample(&los, 1e12, &mut rng(1)).unwrap();
    for (a, b) in s.iter().zip(&los) {
        assert!((a - b).norm() < 1e-5);
    }
    assert!(rician_sample(&los, -1.0, &mut rng(1)).is_err());
    assert!(rician_sample(&los, f64::NAN, &mut rng(1)).is_err());
}

#[test]
fn rician_pure_nlos_variance() {
    let los = vec![c(1.0, 0.0)];
    let mut r = rng(2);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| rician_sample(&los, 0.0, &mut r).unwrap()[0].norm_sqr())
        .collect();
    let (m, se) = mean_se(&draws);
    assert!((m - 1.0).abs() < 3.0 * se, "mean {m} se {se}");
}

#[test]
fn rician_power_normalization_at_kappa_ten() {
    let g = UpaGeometry::new(3, 3, 0.1).unwrap();
    let los = los_component(1.0, 0.9, 0.0, &g).unwrap();
    let mut r = rng(3);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| {
            let s = rician_sample(&los, 10.0, &mut r).unwrap();
            s.iter().map(|x| x.norm_sqr()).sum::<f64>() / 9.0
        })
        .collect();
    let (m, se) = mean_se(&draws);
    assert!((m - 1.0).abs() < 3.0 * se, "mean {m} se {se}");
}

#[test]
fn composite_scalar_examples() {
    let one = [c(1.0, 0.0)];
    let h = composite_channel(&one, &one, &IrsPhaseVector::continuous(vec![0.0]), c(0.5, 0.0)).unwrap();
    assert!((h - c(1.5, 0.0)).norm() < 1e-15);
    let h = composite_channel(&one, &one, &IrsPhaseVector::continuous(vec![std::f64::consts::PI]), c(0.0, 0.0)).unwrap();
    assert!((h - c(-1.0, 0.0)).norm() < 1e-15);
    assert!(composite_channel(&one, &[c(1.0, 0.0), c(0.0, 1.0)], &IrsPhaseVector::zeros(1), c(0.0, 0.0)).is_err());
    assert!(composite_channel(&one, &one, &IrsPhaseVector::zeros(2), c(0.0, 0.0)).is_err());
}

#[test]
fn composite_matches_summation() {
    let mut r = rng(4);
    let gr: Vec<C> = (0..8).map(|_| complex_gaussian(&mut r, 1.0)).collect();
    let gk: Vec<C> = (0..8).map(|_| complex_gaussian(&mut r, 1.0)).collect();
    let phi: Vec<f64> = (0..8).map(|_| r.random_range(0.0..std::f64::consts::TAU)).collect();
    let hd = c(0.3, -0.2);
    let mut want = hd;
    for n in 0..8 {
        want += gk[n] * C::from_polar(1.0, phi[n]) * gr[n].conj();
    }
    let got = composite_channel(&gr, &gk, &IrsPhaseVector::continuous(phi), hd).unwrap();
    assert!((got - want).norm() < 1e-12);
}

#[test]
fn generated_channel_is_reciprocal_and_path_lossed() {
    let cfg = scenario_config(Some((3, 3)));
    let ch = ChannelRealization::generate(&cfg, &mut rng(5)).unwrap();
    assert_eq!(ch.users(), 5);
    assert_eq!(ch.irs_elements(), 9);
    for r in 0..5 {
        for k in 0..5 {
            if r == k {
                continue;
            }
            assert_eq!(ch.direct(r, k), ch.direct(k, r));
            let d = cfg.positions[r].distance(&cfg.positions[k]);
            assert!((ch.direct(r, k).norm() - 1.0 / d).abs() < 1e-12);
        }
        assert_eq!(ch.elevation(r), 0.0);
        assert_eq!(ch.distance(r), cfg.positions[r].distance(&cfg.irs_position));
    }
    assert!(ch.composite(2, 2, &IrsPhaseVector::zeros(9)).is_err());
}

#[test]
fn direct_links_do_not_depend_on_surface_size() {
    let small = ChannelRealization::generate(&scenario_config(Some((2, 2))), &mut rng(6)).unwrap();
    let large = ChannelRealization::generate(&scenario_config(Some((5, 5))), &mut rng(6)).unwrap();
    let none = ChannelRealization::generate(&scenario_config(None), &mut rng(6)).unwrap();
    for r in 0..5 {
        for k in 0..5 {
            if r != k {
                assert_eq!(small.direct(r, k), large.direct(r, k));
                assert_eq!(small.direct(r, k), none.direct(r, k));
            }
        }
    }
    assert_eq!(none.irs_elements(), 0);
    assert_eq!(large.without_irs().irs_elements(), 0);
}

#[test]
fn generate_rejects_bad_layouts() {
    let mut cfg = scenario_config(None);
    cfg.positions[1] = cfg.positions[0];
    assert!(ChannelRealization::generate(&cfg, &mut rng(0)).is_err());
    let mut cfg = scenario_config(None);
    cfg.positions.truncate(1);
    assert!(ChannelRealization::generate(&cfg, &mut rng(0)).is_err());
    let mut cfg = scenario_config(None);
    cfg.transmit_power = 0.0;
    assert!(ChannelRealization::generate(&cfg, &mut rng(0)).is_err());
}

#[test]
fn composite_table_uses_cascade_weights() {
    let ch = ChannelRealization::generate(&scenario_config(Some((3, 3))), &mut rng(7)).unwrap();
    let phases = IrsPhaseVector::continuous((0..9).map(|n| 0.7 * n as f64).collect());
    let table = ch.composite_table(&phases).unwrap();
    for r in 0..5 {
        assert_eq!(*table.get(r, r), c(0.0, 0.0));
        for k in 0..5 {
            if r == k {
                continue;
            }
            let w = ch.cascade_weights(r, k);
            let want: C = w.iter().zip(phases.reflection()).map(|(a, e)| a * e).sum::<C>() + ch.direct(r, k);
            assert!((table.get(r, k) - want).norm() < 1e-12);
        }
    }
}

#[test]
fn sinr_single_pair() {
    let s = ScheduleMatrix::from_links(2, &[(0, 1)]).unwrap();
    let mut h = PairTable::filled(2, c(0.0, 0.0));
    h.set(0, 1, C::from_polar(0.1f64.sqrt(), 0.4));
    let frames: TransmitFrames<f64> =
        BTreeMap::from([(0, superposition(vec![c(1.0, 0.0), c(0.0, -1.0)], vec![(1, vec![c(1.0, 0.0), c(0.0, -1.0)])]))]);
    let t = sinr(&s, &h, &frames, 0.1, 1.0).unwrap();
    assert!((t.get(0, 1).unwrap() - 1.0).abs() < 1e-12);
    assert!(t.get(1, 0).is_err());
    assert!(t.get(7, 0).is_err());
    assert_eq!(t.entries().len(), 1);
}

#[test]
fn sinr_transmission_interference() {
    let s = ScheduleMatrix::from_links(3, &[(0, 2), (1, 2)]).unwrap();
    let mut h = PairTable::filled(3, c(0.0, 0.0));
    h.set(0, 2, c(0.6, 0.2));
    h.set(1, 2, c(-0.1, 0.5));
    let s0 = vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
    let s1 = vec![c(0.0, 0.0), c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.5)];
    let frames: TransmitFrames<f64> = BTreeMap::from([
        (0, superposition(s0.clone(), vec![(2, s0.clone())])),
        (1, superposition(s1.clone(), vec![(2, s1.clone())])),
    ]);
    let (sigma2, pt) = (0.05, 2.0);
    let t = sinr(&s, &h, &frames, sigma2, pt).unwrap();
    let it_at_02 = pt * h.get(1, 2).norm_sqr() * power(&s1);
    let it_at_12 = pt * h.get(0, 2).norm_sqr() * power(&s0);
    let want02 = pt * h.get(0, 2).norm_sqr() / (sigma2 + it_at_02);
    let want12 = pt * h.get(1, 2).norm_sqr() / (sigma2 + it_at_12);
    assert!((t.get(0, 2).unwrap() - want02).abs() < 1e-12);
    assert!((t.get(1, 2).unwrap() - want12).abs() < 1e-12);
}

#[test]
fn sinr_encoding_interference() {
    let s = ScheduleMatrix::from_links(3, &[(0, 1), (0, 2)]).unwrap();
    let mut h = PairTable::filled(3, c(0.0, 0.0));
    h.set(0, 1, c(0.4, 0.3));
    h.set(0, 2, c(0.2, -0.7));
    let a = vec![c(0.8, 0.0), c(0.0, 0.2), c(-0.3, 0.1)];
    let b = vec![c(0.1, 0.4), c(-0.6, 0.0), c(0.2, 0.2)];
    let sum: Vec<C> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    let frames: TransmitFrames<f64> = BTreeMap::from([(0, superposition(sum, vec![(1, a.clone()), (2, b.clone())]))]);
    let t = sinr(&s, &h, &frames, 0.1, 1.0).unwrap();
    let want1 = h.get(0, 1).norm_sqr() / (0.1 + h.get(0, 1).norm_sqr() * power(&b));
    let want2 = h.get(0, 2).norm_sqr() / (0.1 + h.get(0, 2).norm_sqr() * power(&a));
    assert!((t.get(0, 1).unwrap() - want1).abs() < 1e-12);
    assert!((t.get(0, 2).unwrap() - want2).abs() < 1e-12);
}

#[test]
fn sinr_rejects_missing_or_empty_frames() {
    let s = ScheduleMatrix::from_links(2, &[(0, 1)]).unwrap();
    let h = PairTable::filled(2, c(1.0, 0.0));
    assert!(sinr(&s, &h, &BTreeMap::new(), 0.1, 1.0).is_err());
    let empty: TransmitFrames<f64> = BTreeMap::from([(0, superposition(vec![], vec![(1, vec![])]))]);
    assert!(sinr(&s, &h, &empty, 0.1, 1.0).is_err());
    let wrong = PairTable::filled(3, c(1.0, 0.0));
    let frames: TransmitFrames<f64> = BTreeMap::from([(0, superposition(vec![c(1.0, 0.0)], vec![(1, vec![c(1.0, 0.0)])]))]);
    assert!(sinr(&s, &wrong, &frames, 0.1, 1.0).is_err());
}

#[test]
fn phase_activation_stays_in_range_and_quantizes() {
    let v = irs_phase_activation(&[-3.0f64, -0.2, 0.0, 0.4, 5.0]);
    assert!(v.phases().iter().all(|&p| (0.0..std::f64::consts::TAU).contains(&p)));
    assert!(!v.is_quantized());
    let q = v.quantize();
    assert!(q.is_quantized());
    assert!(IrsPhaseVector::<f64>::zeros(4).is_quantized());
}

proptest! {
    #[test]
    fn array_response_is_unit_modulus(az in -7.0f64..7.0, el in -7.0f64..7.0, h in 1usize..6, v in 1usize..6) {
        let g = UpaGeometry::new(h, v, 0.1).unwrap();
        let a = array_response(az, el, &g);
        prop_assert_eq!(a.len(), h * v);
        for x in a {
            prop_assert!((x.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quantization_is_binary_and_idempotent(raw in prop::collection::vec(-20.0f64..20.0, 1..32)) {
        let q = IrsPhaseVector::continuous(raw).quantize();
        for &p in q.phases() {
            prop_assert!(p == 0.0 || p == std::f64::consts::PI);
        }
        prop_assert_eq!(q.quantize(), q.clone());
        for e in q.reflection() {
            prop_assert!((e.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sinr_monotone_in_power_and_noise(
        h01 in 0.05f64..2.0,
        h21 in 0.05f64..2.0,
        pt in 0.1f64..5.0,
        sigma2 in 0.01f64..1.0,
        bump in 1.01f64..3.0,
    ) {
        let s = ScheduleMatrix::from_links(3, &[(0, 1), (2, 1)]).unwrap();
        let mut h = PairTable::filled(3, c(0.0, 0.0));
        h.set(0, 1, c(h01, 0.0));
        h.set(2, 1, c(0.0, h21));
        let unit = vec![c(1.0, 0.0), c(0.0, 1.0)];
        let frames: TransmitFrames<f64> = BTreeMap::from([
            (0, superposition(unit.clone(), vec![(1, unit.clone())])),
            (2, superposition(unit.clone(), vec![(1, unit.clone())])),
        ]);
        let base = sinr(&s, &h, &frames, sigma2, pt).unwrap().get(0, 1).unwrap();
        let louder = sinr(&s, &h, &frames, sigma2, pt * bump).unwrap().get(0, 1).unwrap();
        let noisier = sinr(&s, &h, &frames, sigma2 * bump, pt).unwrap().get(0, 1).unwrap();
        prop_assert!(louder > base);
        prop_assert!(noisier < base);
    }

    #[test]
    fn generated_direct_links_are_reciprocal(seed in any::<u64>()) {
        let ch = ChannelRealization::generate(&scenario_config(Some((2, 2))), &mut rng(seed)).unwrap();
        for r in 0..5 {
            for k in 0..5 {
                if r != k {
                    prop_assert_eq!(ch.direct(r, k), ch.direct(k, r));
                }
            }
        }
    }
}

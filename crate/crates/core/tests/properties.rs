use ppdepth::analysis::{score, RankReport};
use ppdepth::depth::{fit, CardinalityFit, DepthBreakdown, FitConfig};
use ppdepth::*;
use proptest::prelude::*;

fn domain() -> impl Strategy<Value = TimeDomain> {
    (-50.0..50.0f64, 0.01..100.0f64).prop_map(|(t1, span)| TimeDomain::new(t1, t1 + span).unwrap())
}

fn realization() -> impl Strategy<Value = Realization> {
    (domain(), prop::collection::vec(0.0..=1.0f64, 0..12)).prop_map(|(d, mut us)| {
        us.sort_by(f64::total_cmp);
        Realization::new(d, us.iter().map(|u| (d.t1() + u * d.span()).min(d.t2())).collect()).unwrap()
    })
}

fn dataset() -> impl Strategy<Value = Dataset> {
    (domain(), prop::collection::vec(prop::collection::vec(0.0..1.0f64, 0..8), 1..12)).prop_map(
        |(d, rows)| {
            let reals = rows
                .into_iter()
                .map(|mut us| {
                    us.sort_by(f64::total_cmp);
                    Realization::new(d, us.iter().map(|u| d.t1() + u * d.span()).collect()).unwrap()
                })
                .collect();
            Dataset::new(d, reals).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn iet_round_trip(s in realization()) {
        let u = s.to_iet();
        prop_assert_eq!(u.gaps().len(), s.cardinality() + 1);
        let back = u.to_realization();
        prop_assert_eq!(back.cardinality(), s.cardinality());
        let span = s.domain().span();
        for (a, b) in back.events().iter().zip(s.events()) {
            prop_assert!((a - b).abs() <= 1e-12 * (span + s.domain().t1().abs()));
        }
        let total: f64 = u.gaps().iter().sum();
        prop_assert!((total - span).abs() <= 1e-9 * span);
    }

    #[test]
    fn render_parse_round_trip(data in dataset()) {
        let text = data.render_with_header();
        let parsed = Dataset::parse(&text, sniff_domain(&text).unwrap()).unwrap();
        prop_assert_eq!(parsed, data);
    }

    #[test]
    fn weights_peak_at_one(counts in prop::collection::vec(0usize..15, 1..40), r in 0.01..20.0f64) {
        for model in [fit_empirical(&counts, None).unwrap(), fit_poisson_mle(&counts, None).unwrap()] {
            let ws: Vec<f64> = (0..=model.cap()).map(|k| model.weight(k, r)).collect();
            let max = ws.iter().copied().fold(0.0, f64::max);
            prop_assert!((max - 1.0).abs() < 1e-12);
            for a in 0..=model.cap() {
                for b in 0..=model.cap() {
                    if model.pmf(a) <= model.pmf(b) {
                        prop_assert!(ws[a] <= ws[b]);
                    }
                }
            }
        }
    }

    #[test]
    fn conditional_depth_bounds(s in realization()) {
        let d = hpp_conditional_depth(&s);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
        prop_assert_eq!(d == 0.0, s.to_iet().is_boundary());
    }

    #[test]
    fn ranking_ignores_input_order_and_monotone_transforms(data in dataset(), seed in 0u64..1000, power in 0.1..5.0f64) {
        let config = FitConfig { kind: ConditionalKind::Hpp, cardinality: CardinalityFit::Empirical, seed, ..FitConfig::default() };
        let model = fit(&data, &config).unwrap();
        let scores = score(&data, &model).unwrap();

        let n = data.len();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + seed as usize) % n).collect();
        if perm.iter().collect::<std::collections::BTreeSet<_>>().len() == n {
            let shuffled = Dataset::new(data.domain(), perm.iter().map(|&i| data.realizations()[i].clone()).collect()).unwrap();
            let other = score(&shuffled, &model).unwrap();
            for (j, &i) in perm.iter().enumerate() {
                prop_assert_eq!(other[j], scores[i]);
            }
        }

        let transformed: Vec<DepthBreakdown> = scores
            .iter()
            .map(|b| DepthBreakdown { depth: 3.0 * b.depth.powf(power) + 1.0, ..*b })
            .collect();
        let order = |r: RankReport| r.entries().iter().map(|e| e.index).collect::<Vec<_>>();
        prop_assert_eq!(order(RankReport::from_scores(&scores)), order(RankReport::from_scores(&transformed)));
    }

    #[test]
    fn model_json_round_trip(data in dataset(), r in 0.0..5.0f64) {
        let model = fit(&data, &FitConfig { kind: ConditionalKind::Hpp, r, ..FitConfig::default() }).unwrap();
        let back = DepthModel::from_json(&model.to_json().unwrap()).unwrap();
        for s in data.realizations() {
            prop_assert_eq!(back.depth(s).unwrap().to_bits(), model.depth(s).unwrap().to_bits());
        }
    }
}

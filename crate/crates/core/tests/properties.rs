mod common;

use std::collections::BTreeMap;

use kandinsky::dataset::{read_dataset, write_dataset, Dataset, DatasetRecord, Label};
use kandinsky::dsl::{EvalContext, Expr, Quant, QuantKind, Statement};
use kandinsky::gestalt::{cluster_by_proximity, is_circular_arrangement, is_symmetric, GestaltConfig};
use kandinsky::model::{quantize, validate_figure, Color, Figure, ObjectSpec, Shape, UniverseConfig};
use kandinsky::render::RenderStyle;
use kandinsky::sampler::{near_miss, sample_figure, stream_rng, Pattern, SamplerConfig, Stream};
use kandinsky::splits::{chernoff_divergence, Distribution};
use proptest::prelude::*;
use rand::seq::SliceRandom;

use common::{brute_force, random_selector, StatementGen};

fn small_universe() -> UniverseConfig {
    UniverseConfig { n_min: 1, n_max: 6, ..UniverseConfig::default() }
}

fn figure_from(seed: u64, u: &UniverseConfig) -> Figure {
    sample_figure(u, &SamplerConfig::default(), &mut stream_rng(seed, Stream::Figure, 0)).unwrap()
}

fn statement_from(seed: u64) -> (Expr, Statement) {
    let mut rng = stream_rng(seed, Stream::Challenge, 1);
    let e = StatementGen::default().statement(&mut rng, 3);
    let s = Statement::parse(&e.to_string()).unwrap();
    (e, s)
}

fn ctx() -> EvalContext {
    EvalContext::for_universe(&small_universe())
}

fn object() -> impl Strategy<Value = ObjectSpec> {
    (
        prop::sample::select(Shape::ALL.to_vec()),
        prop::sample::select(Color::ALL.to_vec()),
        0.02f64..0.2,
        0.0f64..1.0,
        0.0f64..1.0,
    )
        .prop_map(|(s, c, size, x, y)| ObjectSpec::new(s, c, size, x, y))
}

fn distribution(keys: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(0.0f64..1.0, keys).prop_filter_map("needs mass", |w| {
        let mut m = BTreeMap::new();
        for (i, v) in w.into_iter().enumerate() {
            if v > 0.01 {
                m.insert(format!("k{i}"), v);
            }
        }
        (!m.is_empty()).then(|| Distribution::from_counts(&m))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn evaluation_ignores_object_order(fseed in any::<u64>(), sseed in any::<u64>(), pseed in any::<u64>()) {
        let f = figure_from(fseed, &small_universe());
        let (_, s) = statement_from(sseed);
        let mut objs = f.objects.clone();
        objs.shuffle(&mut stream_rng(pseed, Stream::Figure, 9));
        prop_assert_eq!(s.evaluate(&f, &ctx()), s.evaluate(&Figure::new(objs), &ctx()));
    }

    #[test]
    fn evaluation_is_pure(fseed in any::<u64>(), sseed in any::<u64>()) {
        let f = figure_from(fseed, &small_universe());
        let before = f.clone();
        let (e, s) = statement_from(sseed);
        let first = s.evaluate(&f, &ctx());
        prop_assert_eq!(first, s.evaluate(&f, &ctx()));
        prop_assert_eq!(&f, &before);
        prop_assert_eq!(first, brute_force(&e, &f, ctx().small_big_threshold));
    }

    #[test]
    fn exists_is_not_forall_not(fseed in any::<u64>(), sseed in any::<u64>(), distinct in any::<bool>()) {
        let f = figure_from(fseed, &small_universe());
        let mut rng = stream_rng(sseed, Stream::Challenge, 2);
        let scope = ["q0".to_string(), "q1".to_string()];
        let body = StatementGen::default().expr(&mut rng, 2, &scope);
        let selector = random_selector(&mut rng);
        let quant = |kind, body| Expr::Quant(Box::new(Quant {
            kind,
            vars: vec!["q0".into(), "q1".into()],
            distinct,
            selector: selector.clone(),
            body,
        }));
        let exists = Statement::from_ast(quant(QuantKind::Exists, body.clone())).unwrap();
        let dual = Statement::from_ast(Expr::not(quant(QuantKind::Forall, Expr::not(body.clone())))).unwrap();
        prop_assert_eq!(exists.evaluate(&f, &ctx()), dual.evaluate(&f, &ctx()));
        let oracle = brute_force(&quant(QuantKind::Exists, body), &f, ctx().small_big_threshold);
        prop_assert_eq!(exists.evaluate(&f, &ctx()), oracle);
    }

    #[test]
    fn count_lower_bounds_survive_added_objects(fseed in any::<u64>(), k in 0u64..6, extra in object()) {
        let f = figure_from(fseed, &small_universe());
        let mut rng = stream_rng(fseed, Stream::Challenge, 3);
        let sel = random_selector(&mut rng);
        let s = Statement::parse(&format!("COUNT({sel}) >= {k}")).unwrap();
        let mut bigger = f.clone();
        bigger.objects.push(extra);
        prop_assert!(!s.evaluate(&f, &ctx()) || s.evaluate(&bigger, &ctx()));
    }

    #[test]
    fn statement_text_round_trips(sseed in any::<u64>()) {
        let (e, s) = statement_from(sseed);
        prop_assert_eq!(s.ast().to_string(), e.to_string());
        let again = Statement::parse(&s.ast().to_string()).unwrap();
        prop_assert_eq!(again.ast(), s.ast());
    }

    #[test]
    fn figures_round_trip_through_json(fseed in any::<u64>()) {
        let f = figure_from(fseed, &UniverseConfig::default());
        let json = serde_json::to_string(&f).unwrap();
        let back: Figure = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }

    #[test]
    fn quantize_is_idempotent(v in -10.0f64..10.0) {
        let q = quantize(v);
        prop_assert_eq!(quantize(q), q);
        prop_assert!((q - v).abs() <= 1e-11 * v.abs().max(1e-300));
    }

    #[test]
    fn chernoff_identity_and_swap_symmetry(p in distribution(5), q in distribution(5), alpha in 0.01f64..0.99) {
        let self_div = chernoff_divergence(&p, &p, alpha).unwrap();
        prop_assert!(self_div.abs() <= 1e-12);
        let d = chernoff_divergence(&p, &q, alpha).unwrap();
        let swapped = chernoff_divergence(&q, &p, 1.0 - alpha).unwrap();
        prop_assert!((d - swapped).abs() <= 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&d));
    }

    #[test]
    fn clusters_partition_the_objects(objs in prop::collection::vec(object(), 1..12)) {
        let clusters = cluster_by_proximity(&objs, &GestaltConfig::default());
        let mut seen: Vec<usize> = clusters.iter().flatten().copied().collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..objs.len()).collect::<Vec<_>>());
        prop_assert!(clusters.iter().all(|c| !c.is_empty()));
    }

    #[test]
    fn gestalt_ignores_quarter_turns_and_shifts(
        objs in prop::collection::vec(object(), 2..9),
        turns in 0usize..4,
        dx in -0.5f64..0.5,
        dy in -0.5f64..0.5,
    ) {
        let cfg = GestaltConfig::default();
        let moved: Vec<ObjectSpec> = objs
            .iter()
            .map(|o| {
                let (mut x, mut y) = (o.x, o.y);
                for _ in 0..turns {
                    (x, y) = (-y, x);
                }
                ObjectSpec { x: x + dx, y: y + dy, ..*o }
            })
            .collect();
        let a = is_circular_arrangement(&objs, &cfg);
        let b = is_circular_arrangement(&moved, &cfg);
        if let (Some(fa), Some(fb)) = (a.fit, b.fit) {
            // Skip inputs that sit on the acceptance boundary.
            let margin = (fa.rms_residual - cfg.circular_residual_tol * fa.radius).abs();
            if margin > 1e-9 {
                prop_assert_eq!(a.accepted, b.accepted);
            }
            prop_assert!((fa.radius - fb.radius).abs() <= 1e-9 * fa.radius.max(1.0));
        }
        let sa = is_symmetric(&objs, &cfg);
        let sb = is_symmetric(&moved, &cfg);
        if (sa.max_mismatch - cfg.symmetry_match_tol).abs() > 1e-9 {
            prop_assert_eq!(sa.symmetric, sb.symmetric);
        }
        let mut ca = cluster_by_proximity(&objs, &cfg);
        let mut cb = cluster_by_proximity(&moved, &cfg);
        ca.sort();
        cb.sort();
        prop_assert_eq!(ca, cb);
    }

    #[test]
    fn sampled_figures_are_valid(
        seed in any::<u64>(),
        n_min in 1usize..5,
        extra in 0usize..8,
        size_min in 0.02f64..0.08,
        spread in 0.0f64..0.08,
        min_gap in 0.0f64..0.02,
    ) {
        let u = UniverseConfig {
            n_min,
            n_max: n_min + extra,
            size_min,
            size_max: size_min + spread,
            min_gap,
            ..UniverseConfig::default()
        };
        let f = sample_figure(&u, &SamplerConfig::default(), &mut stream_rng(seed, Stream::Figure, 0)).unwrap();
        prop_assert!(validate_figure(&f, &u).is_ok());
        prop_assert!(common::geometry_ok(&f, u.min_gap, 1e-12));
    }

    #[test]
    fn near_misses_stay_valid(seed in any::<u64>()) {
        let u = small_universe();
        let p = Pattern::new("p", "EXISTS a IN objects : a.color = red", u.clone()).unwrap();
        let f = figure_from(seed, &u);
        prop_assume!(p.contains(&f));
        let mut rng = stream_rng(seed, Stream::NearMiss, 0);
        if let Ok((g, edits)) = near_miss(&p, &f, &mut rng, &SamplerConfig::default(), 1) {
            prop_assert!(validate_figure(&g, &u).is_ok());
            prop_assert!(!p.contains(&g));
            prop_assert_eq!(edits.len(), 1);
            prop_assert_eq!(common::single_edit_distance(&f, &g), Some(1));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn datasets_round_trip_through_disk(seed in any::<u64>(), n in 1usize..6) {
        let u = small_universe();
        let s = Statement::parse("COUNT(objects) >= 1").unwrap();
        let ctx = EvalContext::for_universe(&u);
        let records: Vec<DatasetRecord> = (0..n)
            .map(|i| {
                let f = sample_figure(&u, &SamplerConfig::default(), &mut stream_rng(seed, Stream::Figure, i as u64)).unwrap();
                assert!(s.evaluate(&f, &ctx));
                DatasetRecord::new("any", Label::True, i, seed, &f)
            })
            .collect();
        let ds = Dataset {
            statements: BTreeMap::from([("any".to_string(), s.source().to_string())]),
            context: ctx,
            records,
            edits: Vec::new(),
        };
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&ds, dir.path(), &RenderStyle::default()).unwrap();
        let back = read_dataset(dir.path()).unwrap();
        prop_assert_eq!(back, ds);
    }
}

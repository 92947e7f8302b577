use jsrec_core::analysis::{face_count, prob_boosted, prob_l1};
use jsrec_core::mmv::solve_l11;
use jsrec_core::recover::{
    boosted_l1, boosted_l1_cached, l11_cached, rembo_l1, rembo_l1_cached, rembo_l1_with, support_threshold,
    FixedWeights, PipelineSettings,
};
use jsrec_core::rng::gaussian_matrix;
use jsrec_core::support::sign_pattern_of;
use jsrec_core::{ProblemInstance, Rng};

#[test]
fn rembo_is_monotone_in_budget() {
    let settings = PipelineSettings::default();
    let mut late = 0;
    for t in 0..20 {
        let mut rng = Rng::new(41, t);
        let a = gaussian_matrix(10, 30, &mut rng);
        let support = rng.support(30, 4);
        let inst = ProblemInstance::gaussian_on_support(a, &support, 3, &mut rng);
        let mut first = None;
        for budget in 1..=8 {
            let rep = rembo_l1(&inst.a, &inst.b, budget, &mut Rng::new(9, t), &settings).unwrap();
            match first {
                None if rep.is_recovered() => first = rep.success_iteration(),
                None => assert_eq!(rep.iterations_used, budget),
                Some(k) => assert_eq!(rep.success_iteration(), Some(k), "trial {t} budget {budget}"),
            }
        }
        late += usize::from(first.is_some_and(|k| k > 1));
    }
    assert!(late > 0, "no instance needed more than one iteration");
}

#[test]
fn pipelines_agree_with_face_count_cache() {
    let settings = PipelineSettings::default();
    let mut rng = Rng::new(42, 0);
    let a = gaussian_matrix(20, 80, &mut rng);
    let support = rng.support(80, 8);
    let fc = face_count(&a, &support, &settings.solver).unwrap();
    let threshold = support_threshold(20, None);
    for t in 0..40 {
        let mut rng = Rng::new(43, t);
        let r = 1 + rng.below(4);
        let inst = ProblemInstance::gaussian_on_support(a.clone(), &support, r, &mut rng);

        let full = boosted_l1(&a, &inst.b, &settings).unwrap();
        let cached = boosted_l1_cached(&fc, &inst.x0, threshold).unwrap();
        assert_eq!(
            (full.is_recovered(), full.iterations_used),
            (cached.recovered, cached.iterations_used),
            "trial {t}"
        );

        let l11 = solve_l11(&a, &inst.b, &settings.solver).unwrap();
        assert_eq!(l11.recovers(&inst.x0, settings.solver.recovery_tol), l11_cached(&fc, &inst.x0).unwrap());

        let seed = Rng::new(44, t);
        let full = rembo_l1(&a, &inst.b, 5, &mut seed.clone(), &settings).unwrap();
        let cached = rembo_l1_cached(&fc, &inst.x0, 5, &mut seed.clone(), threshold).unwrap();
        assert_eq!(
            (full.is_recovered(), full.iterations_used),
            (cached.recovered, cached.iterations_used),
            "trial {t}"
        );
    }
}

#[test]
fn boosted_never_recovers_dead_support() {
    let settings = PipelineSettings::default();
    let mut dead = 0;
    for t in 0..30 {
        let mut rng = Rng::new(45, t);
        let a = gaussian_matrix(8, 20, &mut rng);
        let support = rng.support(20, 4);
        let fc = face_count(&a, &support, &settings.solver).unwrap();
        if fc.per_pattern.values().any(|&ok| ok) {
            continue;
        }
        dead += 1;
        let inst = ProblemInstance::gaussian_on_support(a.clone(), &support, 3, &mut rng);
        assert!(!boosted_l1(&a, &inst.b, &settings).unwrap().is_recovered(), "trial {t}");
    }
    assert!(dead > 0, "no support without surviving patterns");
}

#[test]
fn boosted_rate_matches_model() {
    let settings = PipelineSettings::default();
    let mut rng = Rng::new(46, 0);
    let a = gaussian_matrix(20, 80, &mut rng);
    let support = rng.support(80, 8);
    let p = prob_l1(&face_count(&a, &support, &settings.solver).unwrap());
    let r = 3;
    let trials = 200;
    let successes = (0..trials)
        .filter(|&t| {
            let mut rng = Rng::new(47, t);
            let inst = ProblemInstance::gaussian_on_support(a.clone(), &support, r, &mut rng);
            boosted_l1(&a, &inst.b, &settings).unwrap().is_recovered()
        })
        .count();
    let q = prob_boosted(p, r as u32);
    let sigma = (q * (1.0 - q) / trials as f64).sqrt();
    let rate = successes as f64 / trials as f64;
    assert!((rate - q).abs() <= 3.0 * sigma, "empirical {rate} vs model {q} (p = {p})");
}

/// A 6×15 instance that boosted ℓ1 cannot recover, but a weight vector found
/// by scanning directions can; ReMBo with enough random draws then succeeds.
#[test]
fn rembo_recovers_where_boosted_fails() {
    let settings = PipelineSettings::default();
    let mut found = false;
    for t in 0..200 {
        let mut rng = Rng::new(48, t);
        let a = gaussian_matrix(6, 15, &mut rng);
        let support = rng.support(15, 3);
        let fc = face_count(&a, &support, &settings.solver).unwrap();
        let inst = ProblemInstance::gaussian_on_support(a.clone(), &support, 2, &mut rng);
        if boosted_l1(&a, &inst.b, &settings).unwrap().is_recovered() {
            continue;
        }
        let good_w = (0..360).map(|k| (k as f64 * std::f64::consts::PI / 360.0).sin_cos()).find(|&(s, c)| {
            let v: Vec<f64> = (0..15).map(|j| inst.x0[(j, 0)] * c + inst.x0[(j, 1)] * s).collect();
            sign_pattern_of(&v, &support, 1e-9).ok().and_then(|p| fc.recovers(&p)) == Some(true)
        });
        let Some((s, c)) = good_w else { continue };
        let forced = rembo_l1_with(&a, &inst.b, 1, &mut FixedWeights::new(vec![vec![c, s]]), &settings).unwrap();
        assert!(forced.is_recovered(), "trial {t}");
        let random = rembo_l1(&a, &inst.b, 2000, &mut Rng::new(49, t), &settings).unwrap();
        assert!(random.is_recovered(), "trial {t}");
        let x = random.x().unwrap();
        assert!(x.max_abs_diff(&inst.x0).unwrap() <= settings.solver.recovery_tol);
        found = true;
        break;
    }
    assert!(found, "no instance where only a mixed weight recovers");
}

#[test]
fn weight_log_is_reproducible() {
    let settings = PipelineSettings { keep_weights: true, ..Default::default() };
    let mut rng = Rng::new(50, 0);
    let a = gaussian_matrix(8, 20, &mut rng);
    let inst = ProblemInstance::gaussian_on_support(a, &rng.support(20, 5), 3, &mut rng);
    let run = || rembo_l1(&inst.a, &inst.b, 6, &mut Rng::new(51, 0), &settings).unwrap();
    let (first, second) = (run(), run());
    assert_eq!(first, second);
    let log = first.weight_log.as_ref().unwrap();
    assert_eq!(log.len(), first.iterations_used);
    assert!(log.iter().all(|w| w.len() == 3));
}

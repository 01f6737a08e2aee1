use alps::baselines::{bo_minimize, de_minimize, nelder_mead, pso_minimize, random_search};
use alps::benchmarks::{make_target, ForwardModel, LogisticModel, OutOfBounds, SinusoidModel, SINUSOID_DEFAULT_TRUE};
use alps::domain::running_min;
use alps::search::{alps_run, AlpsConfig};
use alps::{ConvergenceTrace, ForestParams, Objective, Result, RngSeed};
use proptest::prelude::*;

type Minimizer = fn(&mut Objective<'_>, &alps::Bounds, usize, RngSeed) -> Result<ConvergenceTrace>;

const BASELINES: [(&str, Minimizer); 5] = [
    ("random", random_search),
    ("pso", pso_minimize),
    ("de", de_minimize),
    ("nelder_mead", nelder_mead),
    ("bo", bo_minimize),
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn baselines_spend_exactly_the_budget(budget in 10usize..40, seed in any::<u64>()) {
        // strict models reject any out-of-box design, so a clean run also
        // proves every proposal was inside the bounds
        let model = SinusoidModel::new(OutOfBounds::Strict);
        let target = make_target(&model, &SINUSOID_DEFAULT_TRUE).unwrap();
        for (name, run) in BASELINES {
            let mut obj = Objective::new(&model, target.clone(), budget).unwrap();
            let trace = run(&mut obj, model.bounds(), budget, RngSeed(seed)).unwrap();
            prop_assert_eq!(obj.evaluations(), budget, "{}", name);
            prop_assert_eq!(trace.len(), budget);
            prop_assert!(obj.ledger().records().iter().all(|r| model.bounds().contains(&r.design)));
            let eps: Vec<f64> = obj.ledger().discrepancies();
            prop_assert_eq!(&trace, &running_min(&eps).unwrap());
        }
    }

    #[test]
    fn alps_spends_exactly_the_budget(n_max in 5usize..30, n_batch in 1usize..8, seed in any::<u64>()) {
        let model = LogisticModel::default();
        let target = make_target(&model, &[700.0, 300.0, 0.3]).unwrap();
        let cfg = AlpsConfig {
            n_batch,
            n_s: 60,
            n_max,
            forest: ForestParams { n_trees: 5, ..Default::default() },
            ..Default::default()
        };
        let r = alps_run(&target, &model, model.bounds(), &cfg, RngSeed(seed)).unwrap();
        prop_assert_eq!(r.ledger.len(), n_max);
        prop_assert!(r.ledger.records().iter().all(|rec| model.bounds().contains(&rec.design)));
        let best = r.ledger.discrepancies().into_iter().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(r.best.discrepancy, best);
    }
}

#[test]
fn alps_reaches_a_realizable_target() {
    let model = SinusoidModel::default();
    let target = make_target(&model, &SINUSOID_DEFAULT_TRUE).unwrap();
    let cfg = AlpsConfig {
        n_max: 150,
        ..Default::default()
    };
    let r = alps_run(&target, &model, model.bounds(), &cfg, RngSeed(5)).unwrap();
    let first = r.ledger.records()[0].discrepancy;
    assert!(r.best.discrepancy < 0.25 * first, "{} vs {first}", r.best.discrepancy);
}

//! 100-trial baseline campaigns checked against reference bands.
//! Slow; run with `cargo test --release -p alps --test baseline_bands -- --ignored`.

use alps::harness::{run_campaign, BenchmarkSpec, CampaignConfig, Optimizer};

fn final_mean(benchmark: &str, optimizer: Optimizer) -> (f64, f64) {
    let cfg = CampaignConfig {
        optimizer,
        benchmark: BenchmarkSpec::named(benchmark),
        seed: 7,
        ..Default::default()
    };
    let f = run_campaign(&cfg).unwrap().summary.final_stats;
    (f.mean, f.std)
}

#[test]
#[ignore]
fn random_logistic_band() {
    let (mean, _) = final_mean("logistic", Optimizer::Random);
    assert!((30.0..=60.0).contains(&mean), "{mean}");
}

#[test]
#[ignore]
fn de_logistic_band() {
    let (mean, _) = final_mean("logistic", Optimizer::De);
    assert!((25.0..=60.0).contains(&mean), "{mean}");
}

#[test]
#[ignore]
fn pso_sinusoid_band() {
    let (mean, _) = final_mean("sinusoid", Optimizer::Pso);
    assert!((0.25..=0.55).contains(&mean), "{mean}");
}

#[test]
#[ignore]
fn nelder_mead_sinusoid_band() {
    let (mean, std) = final_mean("sinusoid", Optimizer::NelderMead);
    assert!((0.15..=0.55).contains(&mean), "{mean}");
    assert!(std >= 0.15, "{std}");
}

#[test]
#[ignore]
fn bo_sinusoid_band() {
    let (mean, _) = final_mean("sinusoid", Optimizer::Bo);
    assert!((0.20..=0.45).contains(&mean), "{mean}");
}

use alps::benchmarks::{
    inconel_bounds, load_dataset, rfpca_train, synthetic_emissivity_dataset, ForwardModel, RfPcaModel, TrainOptions,
};
use alps::harness::{run_campaign, BenchmarkSpec, CampaignConfig, Optimizer};
use alps::{ForestParams, RngSeed};

#[test]
fn train_save_and_search_against_photonic_targets() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    let data = synthetic_emissivity_dataset(300, 120, RngSeed(1));
    data.write_csv(std::fs::File::create(&csv).unwrap()).unwrap();
    assert_eq!(load_dataset(&csv).unwrap().len(), 300);

    let opts = TrainOptions {
        forest: ForestParams {
            n_trees: 40,
            max_depth: Some(10),
            ..Default::default()
        },
        bounds: Some(inconel_bounds()),
        ..Default::default()
    };
    let (model, report) = rfpca_train(&csv, &opts).unwrap();
    assert_eq!((report.n_train, report.n_test), (225, 75));
    assert!(report.test_rmse.unwrap() < 0.05);
    let path = dir.path().join("model.json");
    model.save(&path).unwrap();
    let loaded = RfPcaModel::load(&path).unwrap();
    assert_eq!(loaded.output_dim(), 120);

    for target in ["tpv", "near_perfect"] {
        let cfg = CampaignConfig {
            optimizer: Optimizer::Alps,
            benchmark: BenchmarkSpec {
                name: "rfpca".into(),
                model: Some(path.clone()),
                target: Some(target.into()),
                ..Default::default()
            },
            trials: 2,
            budget: 20,
            out: Some(dir.path().join(target)),
            ..Default::default()
        };
        let r = run_campaign(&cfg).unwrap();
        assert!(r.summary.final_stats.max <= 1.0);
        assert!(dir.path().join(target).join("convergence.svg").exists());
    }
}

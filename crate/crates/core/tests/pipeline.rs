use evclass::classifier::{bayes_preclassify, evidential_classify, fit_gaussians, PipelineConfig};
use evclass::mass_model::MassModelConfig;
use evclass::pipeline::run_scene;
use evclass::synth::{generate_scene, FieldGrid, SceneSpec};

fn small(seed: u64) -> SceneSpec {
    SceneSpec {
        width: 64,
        height: 64,
        field_grid: FieldGrid { rows: 4, cols: 4 },
        seed,
        ..SceneSpec::default()
    }
}

#[test]
fn noiseless_scene_is_recovered_exactly() {
    let spec = SceneSpec {
        noise_sigma: 0.0,
        // blended boundary pixels match no class mean
        mixed_boundary: false,
        ..small(3)
    };
    let (raster, truth) = generate_scene(&spec).unwrap();
    let model = fit_gaussians(&raster, &truth, &spec.frame).unwrap();
    assert_eq!(bayes_preclassify(&raster, &model).unwrap(), truth);
}

#[test]
fn scene_runs_are_reproducible() {
    let config = (PipelineConfig::default(), MassModelConfig::default());
    let a = run_scene(&small(4), 0.3, &config.0, &config.1).unwrap();
    let b = run_scene(&small(4), 0.3, &config.0, &config.1).unwrap();
    assert_eq!(a.refined, b.refined);
    assert_eq!(a.report, b.report);
    assert_eq!(a.model.to_json().unwrap(), b.model.to_json().unwrap());
    assert_eq!(a.evidential_table.to_csv(), b.evidential_table.to_csv());
}

#[test]
fn refinement_helps_and_reaches_a_fixpoint() {
    let config = PipelineConfig::default();
    let run = run_scene(&small(2), 0.3, &config, &MassModelConfig::default()).unwrap();
    assert!(run.outcome.evidential_accuracy > run.outcome.bayes_accuracy);
    assert!(run.report.final_regions < run.report.initial_regions);
    let again = evidential_classify(&run.raster, &run.refined, &run.model, &config).unwrap();
    assert_eq!(again.labels, run.refined);
    assert_eq!(again.report.merge_events, 0);
}

use std::fs;
use std::path::Path;

use cadet_core::bev::{import_stack, preset};
use cadet_core::kitti_io::{KittiLayout, Part};
use cadet_core::pipeline::{
    cmd_project, cmd_rasterize, cmd_stats, cmd_validate, generate_dataset, read_manifest, GenerateConfig,
    PipelineError, CONFIG_FILE,
};

fn generate(dir: &Path, samples: usize, seed: u64) {
    let cfg = GenerateConfig {
        samples,
        reset_interval: 4,
        seed,
        ..GenerateConfig::default()
    };
    generate_dataset(&cfg, dir).unwrap();
}

#[test]
fn single_sample_has_one_file_per_part() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), 1, 5);
    let layout = KittiLayout::new(dir.path());
    for part in Part::ALL {
        assert_eq!(fs::read_dir(layout.dir(part)).unwrap().count(), 1, "{part:?}");
    }
    assert!(dir.path().join(CONFIG_FILE).is_file());
}

#[test]
fn generated_dataset_is_clean_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), 12, 11);
    let report = cmd_validate(dir.path()).unwrap();
    assert!(report.is_clean(), "{:?}", report.violations);
    assert_eq!(report.samples_checked, 12);

    let manifest = read_manifest(dir.path()).unwrap();
    let stats = cmd_stats(dir.path()).unwrap();
    assert_eq!(stats.count("Car"), manifest.rows.iter().map(|r| r.cars).sum::<usize>());
    assert_eq!(
        stats.count("Pedestrian"),
        manifest.rows.iter().map(|r| r.pedestrians).sum::<usize>()
    );
    assert_eq!(stats.objects_per_image.iter().sum::<usize>(), 12);

    let train = fs::read_to_string(dir.path().join("train.txt")).unwrap();
    let val = fs::read_to_string(dir.path().join("val.txt")).unwrap();
    assert_eq!(train.lines().count(), 8);
    assert_eq!(val.lines().count(), 4);
    assert_eq!(val.lines().next(), Some("000004"));
}

#[test]
fn rasterize_and_project_generated_samples() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), 3, 2);
    let out = dir.path().join("bev");
    let r = cmd_rasterize(dir.path(), &preset("max_min_density").unwrap(), Some(0..3), &out).unwrap();
    assert_eq!((r.samples, r.layers), (3, 3));
    let (stack, _) = import_stack(&out.join("000002.bin"), &out.join("000002.txt")).unwrap();
    assert_eq!(stack.layers.len(), 3);
    assert!(stack.layers[2].iter().any(|v| *v > 0.0));

    let png = dir.path().join("overlay.png");
    cmd_project(dir.path(), 1, &png).unwrap();
    assert!(png.is_file());
}

#[test]
fn violations_are_reported_with_paths() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), 3, 8);
    let layout = KittiLayout::new(dir.path());
    fs::remove_file(layout.path(Part::Calib, 1)).unwrap();
    fs::write(
        layout.path(Part::Label, 2),
        "Car 0.00 0 0.00 300.00 100.00 200.00 150.00 1.50 1.80 4.20 1.00 1.70 15.00 0.00\n",
    )
    .unwrap();
    let report = cmd_validate(dir.path()).unwrap();
    assert_eq!(report.violations.len(), 2, "{:?}", report.violations);
    assert_eq!(report.violations[0].path, layout.path(Part::Calib, 1));
    assert_eq!(report.violations[1].path, layout.path(Part::Label, 2));
    assert!(report.violations[1].message.contains("inverted"));
}

#[test]
fn corrupt_scan_names_the_sample() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), 2, 8);
    let layout = KittiLayout::new(dir.path());
    fs::write(layout.path(Part::Velodyne, 1), [0u8; 33]).unwrap();
    let err = cmd_rasterize(dir.path(), &preset("default").unwrap(), None, &dir.path().join("bev")).unwrap_err();
    assert!(matches!(err, PipelineError::Sample { index: 1, .. }), "{err}");
    assert!(err.to_string().contains("16-byte"));
    assert_eq!(err.exit_code(), 1);
}

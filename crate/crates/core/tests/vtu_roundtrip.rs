mod common;

use common::vtu_roundtrip;
use hpfem::poisson::{ManufacturedSolution, Problem, ProblemKind};
use hpfem::vtu::{Paraview, ParaviewConfig};

#[test]
fn exported_values_match_evaluation() {
    for vlevel in 0..=2 {
        for (kind, p) in [(ProblemKind::Galerkin, 2), (ProblemKind::PrimalDpg, 1), (ProblemKind::UwDpg, 2)] {
            let d = vtu_roundtrip(kind, p, vlevel).unwrap();
            assert!(d < 1e-12, "{kind:?} vlevel {vlevel}: {d}");
        }
    }
}

#[test]
fn series_writes_numbered_files_and_pvd() {
    let dir = tempfile::tempdir().unwrap();
    let pr = Problem::new(ProblemKind::Galerkin, Some(ManufacturedSolution::Linear), 1);
    let mut m = pr.brick_mesh([1; 3], [0.0; 3], [1.0; 3], 1).unwrap();
    pr.solve(&mut m, &common::dense()).unwrap();
    let mut cfg = ParaviewConfig::new(dir.path(), 1);
    cfg.time = Some(0.0);
    let mut pv = Paraview::new(cfg).unwrap();
    let a = pv.export(&m, &pr.physics, "run").unwrap();
    let b = pv.export(&m, &pr.physics, "run").unwrap();
    assert!(a.ends_with("run_00000.vtu") && b.ends_with("run_00001.vtu"));
    let pvd = std::fs::read_to_string(dir.path().join("run.pvd")).unwrap();
    let doc = roxmltree::Document::parse(&pvd).unwrap();
    let files: Vec<_> = doc
        .descendants()
        .filter(|n| n.has_tag_name("DataSet"))
        .map(|n| n.attribute("file").unwrap().to_string())
        .collect();
    assert_eq!(files, ["run_00000.vtu", "run_00001.vtu"]);
}

#[test]
fn missing_directory_rejected() {
    assert!(Paraview::new(ParaviewConfig::new("/nonexistent/hpfem-out", 0)).is_err());
}

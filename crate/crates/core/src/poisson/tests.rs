use super::*;
use crate::assembly::SolverKind;
use crate::masterel::dof_count;
use crate::mesh::KREF_ISO;

fn opts() -> SolverOptions {
    SolverOptions {
        solver: SolverKind::Dense,
        ..Default::default()
    }
}

fn unit_mesh(problem: &Problem, n: usize, p: u32) -> Mesh {
    problem.brick_mesh([n; 3], [0.0; 3], [1.0; 3], p).unwrap()
}

fn irregular_mesh(problem: &Problem, p: u32) -> Mesh {
    let mut m = unit_mesh(problem, 2, p);
    let first = m.elem_order()[0];
    m.refine_element(first, KREF_ISO).unwrap();
    m.close_mesh().unwrap();
    assert!(m.is_one_irregular());
    m
}

#[test]
fn sources_match_laplacian() {
    let h = 1e-3;
    let pts = [[0.3, 0.6, 0.2], [0.48, 0.5, 0.51], [0.9, 0.1, 0.7]];
    for sol in [
        ManufacturedSolution::Linear,
        ManufacturedSolution::Quadratic,
        ManufacturedSolution::Smooth,
        ManufacturedSolution::BoundaryLayer,
    ] {
        for x in pts {
            let mut lap = 0.0;
            for d in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[d] += h;
                xm[d] -= h;
                lap += (sol.u(xp) - 2.0 * sol.u(x) + sol.u(xm)) / (h * h);
                let fd = (sol.u(xp) - sol.u(xm)) / (2.0 * h);
                assert!((fd - sol.grad(x)[d]).abs() < 1e-3 * (1.0 + fd.abs()), "{sol:?} grad");
            }
            let f = sol.source(x);
            assert!((f + lap).abs() < 1e-5 * (1.0 + f.abs()) + 2e-3 * f.abs(), "{sol:?} {f} {lap}");
        }
    }
    assert_eq!(ManufacturedSolution::Quadratic.source([0.1, 0.2, 0.3]), -6.0);
    let u = ManufacturedSolution::Smooth;
    let x = [0.2, 0.3, 0.4];
    assert!((u.source(x) - 3.0 * PI * PI * u.u(x)).abs() < 1e-14);
    assert_eq!(Problem::new(ProblemKind::Galerkin, None, 1).source_term(x), 0.0);
}

#[test]
fn galerkin_trilinear_element() {
    let p = Problem::new(ProblemKind::Galerkin, Some(ManufacturedSolution::Quadratic), 1);
    let m = unit_mesh(&p, 1, 1);
    let ab = elem_galerkin(&m, m.elem_order()[0], &p).unwrap();
    let k = &ab.aloc[0][0];
    assert_eq!(k.nrows(), 8);
    for i in 0..8 {
        assert!((k[(i, i)] - 1.0 / 3.0).abs() < 1e-14);
        assert!(k.row(i).sum().abs() < 1e-13);
        // f = -6, so each entry is -6/8
        assert!((ab.bloc[0][i] + 0.75).abs() < 1e-14);
    }
    assert_eq!(k.transpose(), *k);
}

#[test]
fn uw_test_space_size() {
    let p = Problem::new(ProblemKind::UwDpg, None, 1);
    let m = unit_mesh(&p, 1, 2);
    let (sys, sizes) = dpg_element_system(&m, m.elem_order()[0], &p).unwrap();
    let n = dof_count(Space::H1, OrderTriple::iso(3)) + dof_count(Space::HDiv, OrderTriple::iso(3));
    assert_eq!(n, 172);
    assert_eq!(sys.ntest, 172);
    // trace H1 (27-1), face fluxes 6*4, L2 8, L2x3 24
    assert_eq!(sizes, vec![26, 24, 8, 24]);
}

#[test]
fn galerkin_rejects_residual() {
    let p = Problem::new(ProblemKind::Galerkin, None, 1);
    let m = unit_mesh(&p, 1, 1);
    assert!(matches!(elem_residual(&m, m.elem_order()[0], &p), Err(Error::Unsupported(_))));
    assert!(matches!(compute_exact_error(&m, &p), Err(Error::Unsupported(_))));
}

fn saddle_oracle(kind: ProblemKind) {
    let p = Problem::new(kind, Some(ManufacturedSolution::Smooth), 1);
    let geom = GeometryFile {
        points: vec![
            [0.0, 0.0, 0.0],
            [1.1, 0.1, 0.0],
            [1.0, 0.9, 0.1],
            [-0.1, 1.0, 0.0],
            [0.0, 0.1, 1.0],
            [1.0, 0.0, 1.2],
            [1.1, 1.0, 0.9],
            [0.0, 1.1, 1.0],
        ],
        elems: vec![[0, 1, 2, 3, 4, 5, 6, 7]],
        bfaces: vec![],
    };
    let m = p.mesh(&geom, OrderTriple::iso(2)).unwrap();
    let mdle = m.elem_order()[0];
    let (sys, _) = dpg_element_system(&m, mdle, &p).unwrap();
    let c = condense_dpg(&sys).unwrap();
    let (nt, n) = (sys.ntest, sys.ntrial);
    let mut s = DMatrix::zeros(nt + n + 1, nt + n + 1);
    s.view_mut((0, 0), (nt, nt)).copy_from(&sys.gram.to_dense());
    s.view_mut((0, nt), (nt, n + 1)).copy_from(&sys.stiff_all);
    s.view_mut((nt, 0), (n + 1, nt)).copy_from(&sys.stiff_all.transpose());
    // Schur complement of the saddle system with respect to the test block
    let g = s.view((0, 0), (nt, nt)).into_owned();
    let ginv = g.clone().lu().try_inverse().unwrap();
    let bt = s.view((0, nt), (nt, n + 1)).into_owned();
    let schur = bt.transpose() * ginv * &bt;
    let scale = schur.amax();
    assert!((&c - &schur).amax() / scale < 1e-10, "{kind:?}");
    assert_eq!(c.transpose(), c);
}

#[test]
fn primal_matches_saddle_oracle() {
    saddle_oracle(ProblemKind::PrimalDpg);
}

#[test]
fn uw_matches_saddle_oracle() {
    saddle_oracle(ProblemKind::UwDpg);
}

#[test]
fn uw_gram_spd() {
    use crate::dpg::packed_cholesky;
    let p = Problem::new(ProblemKind::UwDpg, None, 1);
    for order in 1..=3 {
        let m = p
            .mesh(
                &GeometryFile {
                    points: vec![
                        [0.0, 0.0, 0.0],
                        [0.8, 0.1, 0.0],
                        [1.0, 1.2, 0.1],
                        [0.1, 0.9, 0.0],
                        [0.0, 0.1, 0.7],
                        [1.0, 0.0, 1.1],
                        [1.1, 1.0, 1.0],
                        [0.0, 1.0, 1.2],
                    ],
                    elems: vec![[0, 1, 2, 3, 4, 5, 6, 7]],
                    bfaces: vec![],
                },
                OrderTriple::iso(order),
            )
            .unwrap();
        let (sys, _) = dpg_element_system(&m, m.elem_order()[0], &p).unwrap();
        packed_cholesky(&sys.gram).unwrap();
    }
}

fn check_linear(problem: &Problem, m: &mut Mesh) {
    problem.solve(m, &opts()).unwrap();
    let e = compute_exact_error(m, problem).unwrap();
    assert!(e.l2 < 1e-9 && e.h1 < 1e-9, "{:?}: {e:?}", problem.kind);
    if problem.kind.is_dpg() {
        let r: f64 = residuals(m, problem).unwrap().iter().map(|r| r.1).sum();
        assert!(r < 1e-12, "{:?} residual {r}", problem.kind);
    }
}

#[test]
fn patch_tests_single_element() {
    let lin = Some(ManufacturedSolution::Linear);
    for (kind, p) in [(ProblemKind::Galerkin, 1), (ProblemKind::PrimalDpg, 1), (ProblemKind::UwDpg, 2)] {
        let pr = Problem::new(kind, lin, 1);
        let mut m = unit_mesh(&pr, 1, p);
        check_linear(&pr, &mut m);
    }
}

#[test]
fn patch_tests_irregular_mesh() {
    let lin = Some(ManufacturedSolution::Linear);
    for (kind, p) in [(ProblemKind::Galerkin, 1), (ProblemKind::PrimalDpg, 1), (ProblemKind::UwDpg, 2)] {
        let pr = Problem::new(kind, lin, 1);
        let mut m = irregular_mesh(&pr, p);
        check_linear(&pr, &mut m);
    }
}

#[test]
fn uw_flux_patch() {
    let pr = Problem::new(ProblemKind::UwDpg, Some(ManufacturedSolution::Linear), 1);
    let mut m = unit_mesh(&pr, 1, 2);
    pr.solve(&mut m, &opts()).unwrap();
    let mdle = m.elem_order()[0];
    let sigma = gather_solution(&m, mdle, 3).unwrap();
    // L2 basis starts with the constant; higher coefficients vanish
    let l2 = ShapeLayout::new(Space::L2, &ElementOrder::uniform(2)).unwrap();
    let s = l2.eval([0.3, 0.7, 0.2]);
    let mut v = [0.0; 3];
    for k in 0..s.val.len() {
        for d in 0..3 {
            v[d] += sigma[3 * k + d] * s.val[k];
        }
    }
    for (d, e) in [1.0, 0.0, 0.0].iter().enumerate() {
        assert!((v[d] - e).abs() < 1e-9, "{v:?}");
    }
}

#[test]
fn quadratic_in_space_for_p2() {
    let sol = Some(ManufacturedSolution::Quadratic);
    for kind in [ProblemKind::Galerkin, ProblemKind::PrimalDpg] {
        let pr = Problem::new(kind, sol, 1);
        let mut m = unit_mesh(&pr, 2, 2);
        pr.solve(&mut m, &opts()).unwrap();
        let e = compute_exact_error(&m, &pr).unwrap();
        assert!(e.h1 < 1e-9, "{kind:?} {e:?}");
    }
}

#[test]
fn zero_solution_error_is_norm() {
    let pr = Problem::new(ProblemKind::Galerkin, Some(ManufacturedSolution::Smooth), 1);
    let mut m = unit_mesh(&pr, 2, 3);
    for id in 1..=m.nrnods() {
        let n = m.node_nfun(id, 0);
        m.set_dofs(id, 0, vec![0.0; n]).unwrap();
    }
    let e = compute_exact_error(&m, &pr).unwrap();
    // ||u||^2 = 1/8, |u|_1^2 = 3 π^2 / 8
    assert!((e.l2 - (0.125f64).sqrt()).abs() < 1e-4);
    assert!((e.h1 - (3.0 * PI * PI / 8.0).sqrt()).abs() < 1e-3);
}

#[test]
fn smooth_convergence_galerkin() {
    let pr = Problem::new(ProblemKind::Galerkin, Some(ManufacturedSolution::Smooth), 1);
    let mut errs = Vec::new();
    for n in [2, 4] {
        let mut m = unit_mesh(&pr, n, 1);
        pr.solve(&mut m, &opts()).unwrap();
        errs.push(compute_exact_error(&m, &pr).unwrap().h1);
    }
    let rate = (errs[0] / errs[1]).log2();
    assert!((0.8..1.3).contains(&rate), "rate {rate}");
}

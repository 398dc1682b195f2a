//! Checks shared by the integration tests and the acceptance target.
#![allow(dead_code)]

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hpfem::adapt::{adaptive_loop, select, AdaptiveHistory, ErrorSummary, MarkingConfig, MarkingStrategy};
use hpfem::assembly::{SolverKind, SolverOptions};
use hpfem::conformity::{evaluate_solution, gather_solution, update_gdof};
use hpfem::dpg::condense_dpg;
use hpfem::masterel::{
    face_param, gauss_legendre_1d, gauss_quadrature_3d, ElementOrder, OrderTriple, ShapeLayout, ShapeSet, Space,
};
use hpfem::mesh::{GeometryFile, Mesh, NodeId, NodeKind, NodeStatus, PrefRule, RefinementKind, KREF_ISO};
use hpfem::poisson::{
    compute_exact_error, dpg_element_system, residuals, ExactError, ManufacturedSolution, Problem, ProblemKind,
};
use hpfem::vtu::{upscale_samples, vtu_document, ParaviewConfig};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dense() -> SolverOptions {
    SolverOptions {
        solver: SolverKind::Dense,
        ..Default::default()
    }
}

/// One distorted trilinear hexahedron.
pub fn distorted_hex() -> GeometryFile {
    GeometryFile {
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
    }
}

// ---- exact sequence

#[derive(Debug, Default, Clone, Copy)]
pub struct SequenceErrors {
    pub curl_grad: f64,
    pub div_curl: f64,
    pub grad_in_hcurl: f64,
    pub curl_in_hdiv: f64,
    pub div_in_l2: f64,
}

impl SequenceErrors {
    pub fn null_max(&self) -> f64 {
        self.curl_grad.max(self.div_curl)
    }

    pub fn span_max(&self) -> f64 {
        self.grad_in_hcurl.max(self.curl_in_hdiv).max(self.div_in_l2)
    }
}

fn shift(x: [f64; 3], d: usize, h: f64) -> [f64; 3] {
    let mut y = x;
    y[d] += h;
    y
}

/// Central differences of a vector field given per function at a point:
/// `jac[i][a][b] = d f_i[a] / d x_b`.
fn fd_jacobian(field: impl Fn([f64; 3]) -> Vec<[f64; 3]>, x: [f64; 3], h: f64) -> Vec<[[f64; 3]; 3]> {
    let mut jac: Vec<[[f64; 3]; 3]> = Vec::new();
    for b in 0..3 {
        let fp = field(shift(x, b, h));
        let fm = field(shift(x, b, -h));
        if jac.is_empty() {
            jac = vec![[[0.0; 3]; 3]; fp.len()];
        }
        for (i, (p, m)) in fp.iter().zip(&fm).enumerate() {
            for a in 0..3 {
                jac[i][a][b] = (p[a] - m[a]) / (2.0 * h);
            }
        }
    }
    jac
}

/// Max over columns of the least-squares residual of `b` in the span of `a`,
/// relative to the largest entry of `b`.
fn span_residual(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let svd = a.clone().svd(true, true);
    let x = svd.solve(b, 1e-12).expect("svd solve");
    let r = a * x - b;
    r.amax() / b.amax().max(1.0)
}

/// Null-space and span-containment errors of the discrete sequence at one order.
pub fn exact_sequence_errors(order: [u32; 3], npts: usize, seed: u64) -> SequenceErrors {
    let eo = ElementOrder::from_middle(OrderTriple::from_array(order));
    let h1 = ShapeLayout::new(Space::H1, &eo).unwrap();
    let hc = ShapeLayout::new(Space::HCurl, &eo).unwrap();
    let hd = ShapeLayout::new(Space::HDiv, &eo).unwrap();
    let l2 = ShapeLayout::new(Space::L2, &eo).unwrap();
    let mut r = rng(seed);
    let pts: Vec<[f64; 3]> = (0..npts)
        .map(|_| std::array::from_fn(|_| r.gen_range(0.01..0.99)))
        .collect();
    let h = 1e-5;
    let mut e = SequenceErrors::default();
    let (n1, nc, nd, nl) = (h1.nrdof(), hc.nrdof(), hd.nrdof(), l2.nrdof());
    let mut a_c = DMatrix::zeros(3 * npts, nc);
    let mut b_g = DMatrix::zeros(3 * npts, n1);
    let mut a_d = DMatrix::zeros(3 * npts, nd);
    let mut b_c = DMatrix::zeros(3 * npts, nc);
    let mut a_l = DMatrix::zeros(npts, nl);
    let mut b_d = DMatrix::zeros(npts, nd);
    for (k, &x) in pts.iter().enumerate() {
        let jg = fd_jacobian(|y| h1.eval(y).deriv, x, h);
        for j in &jg {
            let curl = [j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]];
            e.curl_grad = curl.iter().fold(e.curl_grad, |m, v| m.max(v.abs()));
        }
        let jc = fd_jacobian(|y| hc.eval(y).deriv, x, h);
        for j in &jc {
            e.div_curl = e.div_curl.max((j[0][0] + j[1][1] + j[2][2]).abs());
        }
        let s1: ShapeSet = h1.eval(x);
        let sc = hc.eval(x);
        let sd = hd.eval(x);
        let sl = l2.eval(x);
        for d in 0..3 {
            for i in 0..n1 {
                b_g[(3 * k + d, i)] = s1.deriv[i][d];
            }
            for i in 0..nc {
                a_c[(3 * k + d, i)] = sc.vec_val[i][d];
                b_c[(3 * k + d, i)] = sc.deriv[i][d];
            }
            for i in 0..nd {
                a_d[(3 * k + d, i)] = sd.vec_val[i][d];
            }
        }
        for i in 0..nl {
            a_l[(k, i)] = sl.val[i];
        }
        for i in 0..nd {
            b_d[(k, i)] = sd.div[i];
        }
    }
    e.grad_in_hcurl = span_residual(&a_c, &b_g);
    e.curl_in_hdiv = span_residual(&a_d, &b_c);
    e.div_in_l2 = span_residual(&a_l, &b_d);
    e
}

// ---- quadrature

/// Largest error over all monomials `x^a y^b z^c`, `a,b,c <= 2n-1`, for
/// the n-point tensor rule on the unit cube.
pub fn quadrature_error(n: usize) -> f64 {
    let (pts, wts) = gauss_legendre_1d(n).unwrap();
    let mut err: f64 = 0.0;
    for k in 0..2 * n {
        let s: f64 = pts.iter().zip(&wts).map(|(x, w)| w * x.powi(k as i32)).sum();
        err = err.max((s - 1.0 / (k as f64 + 1.0)).abs());
    }
    let q = gauss_quadrature_3d([n; 3]).unwrap();
    for a in 0..2 * n as i32 {
        for b in 0..2 * n as i32 {
            for c in 0..2 * n as i32 {
                let s: f64 = q
                    .points
                    .iter()
                    .zip(&q.weights)
                    .map(|(p, w)| w * p[0].powi(a) * p[1].powi(b) * p[2].powi(c))
                    .sum();
                let exact = 1.0 / ((a + 1) * (b + 1) * (c + 1)) as f64;
                err = err.max((s - exact).abs());
            }
        }
    }
    err
}

// ---- patch tests

pub fn irregular_unit_mesh(problem: &Problem, p: u32) -> Mesh {
    let mut m = problem.brick_mesh([2; 3], [0.0; 3], [1.0; 3], p).unwrap();
    let first = m.elem_order()[0];
    m.refine_element(first, KREF_ISO).unwrap();
    m.close_mesh().unwrap();
    update_gdof(&mut m);
    m
}

/// Exact error of `u = x` after a solve (for UW the first slot is the
/// error in the recovered flux `sigma`).
pub fn patch_error(kind: ProblemKind, p: u32, irregular: bool) -> ExactError {
    let pr = Problem::new(kind, Some(ManufacturedSolution::Linear), 1);
    let mut m = if irregular {
        irregular_unit_mesh(&pr, p)
    } else {
        pr.brick_mesh([1; 3], [0.0; 3], [1.0; 3], p).unwrap()
    };
    pr.solve(&mut m, &dense()).unwrap();
    compute_exact_error(&m, &pr).unwrap()
}

// ---- convergence

/// Exact errors on the 1, 2 and 4 per-direction unit cube meshes.
pub fn uniform_errors(kind: ProblemKind, p: u32, levels: usize) -> Vec<ExactError> {
    let pr = Problem::new(kind, Some(ManufacturedSolution::Smooth), 1);
    let mut m = pr.brick_mesh([1; 3], [0.0; 3], [1.0; 3], p).unwrap();
    let mut out = Vec::new();
    for l in 0..levels {
        if l > 0 {
            m.global_refinement(RefinementKind::Href).unwrap();
            update_gdof(&mut m);
        }
        pr.solve(&mut m, &SolverOptions::default()).unwrap();
        out.push(compute_exact_error(&m, &pr).unwrap());
    }
    out
}

pub fn rate(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

// ---- DPG oracle

/// Relative difference between `condense_dpg` and the Schur complement of
/// the explicitly assembled saddle-point matrix.
pub fn saddle_oracle_difference(kind: ProblemKind, p: u32, dp: u32) -> f64 {
    let pr = Problem::new(kind, Some(ManufacturedSolution::Smooth), dp);
    let m = pr.mesh(&distorted_hex(), OrderTriple::iso(p)).unwrap();
    let (sys, _) = dpg_element_system(&m, m.elem_order()[0], &pr).unwrap();
    let c = condense_dpg(&sys).unwrap();
    let (nt, n) = (sys.ntest, sys.ntrial);
    let mut saddle = DMatrix::zeros(nt + n + 1, nt + n + 1);
    saddle.view_mut((0, 0), (nt, nt)).copy_from(&sys.gram.to_dense());
    saddle.view_mut((0, nt), (nt, n + 1)).copy_from(&sys.stiff_all);
    saddle.view_mut((nt, 0), (n + 1, nt)).copy_from(&sys.stiff_all.transpose());
    // eliminate the test block: S = 0 - B^T G^{-1} B, condensed = -S
    let g = saddle.view((0, 0), (nt, nt)).into_owned();
    let b = saddle.view((0, nt), (nt, n + 1)).into_owned();
    let bt = saddle.view((nt, 0), (n + 1, nt)).into_owned();
    let z = saddle.view((nt, nt), (n + 1, n + 1)).into_owned();
    let s = z - bt * g.lu().solve(&b).unwrap();
    (&c + &s).amax() / s.amax()
}

// ---- static condensation

/// Largest difference between the solutions with and without condensation.
pub fn istc_difference(n: [usize; 3], p: u32) -> f64 {
    let pr = Problem::new(ProblemKind::Galerkin, Some(ManufacturedSolution::Smooth), 1);
    let mut sol = Vec::new();
    for istc in [true, false] {
        let mut m = pr.brick_mesh(n, [0.0; 3], [1.0; 3], p).unwrap();
        pr.solve(&mut m, &SolverOptions { istc, ..dense() }).unwrap();
        let mut all = Vec::new();
        for &e in m.elem_order() {
            all.extend(gather_solution(&m, e, 0).unwrap());
        }
        sol.push(all);
    }
    assert_eq!(sol[0].len(), sol[1].len());
    sol[0].iter().zip(&sol[1]).fold(0.0, |d, (a, b)| d.max((a - b).abs()))
}

// ---- conformity across hanging faces

pub fn bbox(m: &Mesh, e: NodeId) -> ([f64; 3], [f64; 3]) {
    let x = m.element_xnod(e);
    let lo = std::array::from_fn(|d| x.iter().map(|v| v[d]).fold(f64::MAX, f64::min));
    let hi = std::array::from_fn(|d| x.iter().map(|v| v[d]).fold(f64::MIN, f64::max));
    (lo, hi)
}

#[derive(Debug, Default, Clone, Copy)]
pub struct JumpReport {
    pub constrained_faces: usize,
    pub samples: usize,
    pub max_jump: f64,
}

/// Solve on a locally refined brick mesh and compare values from both sides
/// of every constrained face at `npts` random points each.
pub fn hanging_face_jumps(p: u32, npts: usize, seed: u64) -> JumpReport {
    let pr = Problem::new(ProblemKind::Galerkin, Some(ManufacturedSolution::Smooth), 1);
    let mut m = irregular_unit_mesh(&pr, p);
    pr.solve(&mut m, &dense()).unwrap();
    let mut r = rng(seed);
    let mut rep = JumpReport::default();
    let elems = m.elem_order().to_vec();
    let boxes: Vec<_> = elems.iter().map(|&e| bbox(&m, e)).collect();
    for (ia, &a) in elems.iter().enumerate() {
        let closure = m.node(a).closure().to_vec();
        for f in 0..6 {
            if !matches!(m.status(closure[20 + f]), NodeStatus::Constrained(_)) {
                continue;
            }
            rep.constrained_faces += 1;
            for _ in 0..npts {
                let (xi, _) = face_param(f + 1, [r.gen(), r.gen()]).unwrap();
                let (lo, hi) = boxes[ia];
                let x: [f64; 3] = std::array::from_fn(|d| lo[d] + xi[d] * (hi[d] - lo[d]));
                let ua = evaluate_solution(&m, a, 0, xi).unwrap()[0];
                for (ib, &b) in elems.iter().enumerate() {
                    let (lb, hb) = boxes[ib];
                    let inside = (0..3).all(|d| x[d] >= lb[d] - 1e-12 && x[d] <= hb[d] + 1e-12);
                    if b == a || !inside {
                        continue;
                    }
                    let xb = std::array::from_fn(|d| ((x[d] - lb[d]) / (hb[d] - lb[d])).clamp(0.0, 1.0));
                    let ub = evaluate_solution(&m, b, 0, xb).unwrap()[0];
                    rep.samples += 1;
                    rep.max_jump = rep.max_jump.max((ua - ub).abs());
                }
            }
        }
    }
    rep
}

// ---- marking oracles

pub fn greedy_oracle(v: &[(NodeId, f64)], perc: f64) -> Vec<NodeId> {
    let max = v.iter().map(|e| e.1).fold(0.0, f64::max);
    v.iter().filter(|e| e.1 > perc * max).map(|e| e.0).collect()
}

/// Smallest prefix of the sorted indicators whose sum exceeds `perc` of the
/// total, found by trying every prefix length.
pub fn doerfler_oracle(v: &[(NodeId, f64)], perc: f64) -> Vec<NodeId> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let total: f64 = v.iter().map(|e| e.1).sum();
    for k in 1..=s.len() {
        let sum: f64 = s[..k].iter().map(|e| e.1).sum();
        if sum > perc * total {
            return s[..k].iter().map(|e| e.0).collect();
        }
    }
    s.iter().map(|e| e.0).collect()
}

pub fn random_indicators(r: &mut ChaCha8Rng) -> Vec<(NodeId, f64)> {
    let n = r.gen_range(1..=200);
    let ties = r.gen_bool(0.3);
    let mut ids: Vec<NodeId> = (1..=4 * n).collect();
    for i in 0..n {
        let j = r.gen_range(i..ids.len());
        ids.swap(i, j);
    }
    ids[..n]
        .iter()
        .map(|&id| {
            let v = if ties { r.gen_range(0..5) as f64 } else { r.gen::<f64>().powi(3) };
            (id, v)
        })
        .collect()
}

/// Compare library marking with the oracles; `Err` describes the first mismatch.
pub fn check_marking(v: &[(NodeId, f64)], perc: f64) -> Result<(), String> {
    let summary = ErrorSummary::new(v.to_vec());
    let g = select(&summary, &MarkingConfig::new(MarkingStrategy::Greedy, perc).unwrap()).unwrap();
    if g != greedy_oracle(v, perc) {
        return Err(format!("greedy mismatch for perc {perc}"));
    }
    let d = select(&summary, &MarkingConfig::new(MarkingStrategy::Doerfler, perc).unwrap()).unwrap();
    if d != doerfler_oracle(v, perc) {
        return Err(format!("doerfler mismatch for perc {perc}"));
    }
    // minimal prefix: dropping the last marked element falls below the bulk
    let val = |id: NodeId| v.iter().find(|e| e.0 == id).unwrap().1;
    let total: f64 = v.iter().map(|e| e.1).sum();
    let sum: f64 = d.iter().map(|&id| val(id)).sum();
    let short: f64 = d[..d.len() - 1].iter().map(|&id| val(id)).sum();
    if d.len() < v.len() && sum <= perc * total {
        return Err("doerfler set does not reach the bulk".into());
    }
    if short > perc * total {
        return Err("doerfler set is not minimal".into());
    }
    let min_marked = d.iter().map(|&id| val(id)).fold(f64::MAX, f64::min);
    if v.iter().any(|e| !d.contains(&e.0) && e.1 > min_marked) {
        return Err("doerfler set skips a larger indicator".into());
    }
    Ok(())
}

// ---- adaptivity

pub struct AdaptiveOutcome {
    pub history: AdaptiveHistory,
    pub initial: Mesh,
}

/// Boundary-layer problem with UW DPG and Dörfler marking.
pub fn boundary_layer_run(n: [usize; 3], p: u32, dp: u32, steps: usize) -> AdaptiveOutcome {
    let pr = Problem::new(ProblemKind::UwDpg, Some(ManufacturedSolution::BoundaryLayer), dp);
    let mut m = pr.brick_mesh(n, [0.0; 3], [1.0; 3], p).unwrap();
    let initial = m.clone();
    let mk = MarkingConfig::new(MarkingStrategy::Doerfler, 0.5).unwrap();
    let opts = SolverOptions {
        store_stc: true,
        ..Default::default()
    };
    let history = adaptive_loop(&mut m, &pr, &mk, 0.0, steps, &opts, |_, _| Ok(())).unwrap();
    AdaptiveOutcome { history, initial }
}

/// Fraction of the first marked set whose elements touch the slab `x in [lo, hi]`.
pub fn marked_in_slab(out: &AdaptiveOutcome, lo: f64, hi: f64) -> (usize, usize) {
    let first = &out.history.marked[0];
    let inside = first
        .iter()
        .filter(|&&e| {
            let (a, b) = bbox(&out.initial, e);
            b[0] >= lo && a[0] <= hi
        })
        .count();
    (inside, first.len())
}

// ---- effectivity

/// `(global residual, exact H1 error)` over `levels` uniform meshes.
pub fn effectivity(kind: ProblemKind, p: u32, levels: usize) -> Vec<(f64, f64)> {
    let pr = Problem::new(kind, Some(ManufacturedSolution::Smooth), 1);
    let mut m = pr.brick_mesh([1; 3], [0.0; 3], [1.0; 3], p).unwrap();
    let opts = SolverOptions {
        store_stc: true,
        ..Default::default()
    };
    let mut out = Vec::new();
    for l in 0..levels {
        if l > 0 {
            m.global_refinement(RefinementKind::Href).unwrap();
            update_gdof(&mut m);
        }
        pr.solve(&mut m, &opts).unwrap();
        let r: f64 = residuals(&m, &pr).unwrap().iter().map(|e| e.1).sum();
        let e = compute_exact_error(&m, &pr).unwrap();
        out.push((r.sqrt(), e.h1));
    }
    out
}

// ---- VTU round trip

fn parse_values(node: roxmltree::Node) -> Vec<f64> {
    node.text()
        .unwrap_or("")
        .split_whitespace()
        .map(|t| t.parse().expect("numeric token"))
        .collect()
}

/// Largest difference between exported point data and direct evaluation,
/// after checking the document structure. `Err` describes a malformed file.
pub fn vtu_roundtrip(kind: ProblemKind, p: u32, vlevel: u32) -> Result<f64, String> {
    let pr = Problem::new(kind, Some(ManufacturedSolution::Smooth), 1);
    let mut geom = GeometryFile::brick([2, 1, 1], [0.0; 3], [1.0; 3]);
    geom.points[1] = [0.55, -0.05, 0.05];
    geom.points[10] = [0.45, 1.05, 1.0];
    let mut m = pr.mesh(&geom, OrderTriple::iso(p)).unwrap();
    pr.solve(&mut m, &dense()).unwrap();
    let cfg = ParaviewConfig::new(std::env::temp_dir(), vlevel);
    let text = vtu_document(&m, &pr.physics, &cfg).map_err(|e| e.to_string())?;
    let doc = roxmltree::Document::parse(&text).map_err(|e| format!("xml: {e}"))?;
    let root = doc.root_element();
    if root.tag_name().name() != "VTKFile" || root.attribute("type") != Some("UnstructuredGrid") {
        return Err("root is not an UnstructuredGrid VTKFile".into());
    }
    let piece = doc
        .descendants()
        .find(|n| n.has_tag_name("Piece"))
        .ok_or("no Piece")?;
    let npts: usize = piece.attribute("NumberOfPoints").ok_or("NumberOfPoints")?.parse().map_err(|_| "NumberOfPoints")?;
    let ncells: usize = piece.attribute("NumberOfCells").ok_or("NumberOfCells")?.parse().map_err(|_| "NumberOfCells")?;
    let lattice = upscale_samples(vlevel).map_err(|e| e.to_string())?;
    let nel = m.nreles();
    if npts != nel * lattice.points.len() || ncells != nel * lattice.cells.len() {
        return Err(format!("counts {npts}/{ncells} do not match the lattice"));
    }
    let array = |section: &str, name: Option<&str>| -> Result<Vec<f64>, String> {
        let sec = piece.children().find(|n| n.has_tag_name(section)).ok_or(format!("no {section}"))?;
        let node = sec
            .children()
            .filter(|n| n.has_tag_name("DataArray"))
            .find(|n| name.is_none() || n.attribute("Name") == name)
            .ok_or(format!("no array {name:?} in {section}"))?;
        Ok(parse_values(node))
    };
    let points = array("Points", None)?;
    let conn = array("Cells", Some("connectivity"))?;
    let offsets = array("Cells", Some("offsets"))?;
    let types = array("Cells", Some("types"))?;
    if points.len() != 3 * npts || conn.len() != 8 * ncells || offsets.len() != ncells || types.len() != ncells {
        return Err("array lengths inconsistent".into());
    }
    if conn.iter().any(|&c| c < 0.0 || c as usize >= npts) || types.iter().any(|&t| t != 12.0) {
        return Err("bad connectivity or cell type".into());
    }
    if offsets.iter().enumerate().any(|(i, &o)| o as usize != 8 * (i + 1)) {
        return Err("bad offsets".into());
    }
    let mut fields = Vec::new();
    for (a, attr) in pr.physics.attrs.iter().enumerate() {
        if m.attr_layout()[a].is_trace {
            continue;
        }
        for c in 0..attr.ncomp {
            fields.push((a, c, array("PointData", Some(&format!("{}_{}", attr.nickname, c + 1)))?));
        }
    }
    let mut diff: f64 = 0.0;
    for (k, &e) in m.elem_order().iter().enumerate() {
        let info = m.element_info(e).unwrap();
        for (j, &xi) in lattice.points.iter().enumerate() {
            let idx = k * lattice.points.len() + j;
            let g = hpfem::geometry::element_geometry(&info.xnod, xi).unwrap();
            for d in 0..3 {
                diff = diff.max((points[3 * idx + d] - g.x[d]).abs());
            }
            for (a, c, vals) in &fields {
                let v = evaluate_solution(&m, e, *a, xi).unwrap()[*c];
                diff = diff.max((vals[idx] - v).abs());
            }
        }
    }
    Ok(diff)
}

// ---- mesh structure fuzz

/// Active middles found by scanning every node: unrefined middles whose
/// ancestors are all refined middles reaching an initial element.
fn brute_active(m: &Mesh) -> BTreeSet<NodeId> {
    (1..=m.nrnods())
        .filter(|&id| {
            let n = m.node(id);
            if n.kind != NodeKind::Middle || n.is_refined() {
                return false;
            }
            let mut cur = id;
            loop {
                match m.node(cur).father {
                    None => return cur <= m.nrelis(),
                    Some(f) => {
                        let fnode = m.node(f);
                        if fnode.kind != NodeKind::Middle || !fnode.sons.contains(&cur) {
                            return false;
                        }
                        cur = f;
                    }
                }
            }
        })
        .collect()
}

/// Structural invariants of the current mesh; `Err` names the first failure.
pub fn check_mesh(m: &Mesh, volume: f64) -> Result<(), String> {
    let order = m.elem_order();
    let set: BTreeSet<NodeId> = order.iter().copied().collect();
    if set.len() != order.len() {
        return Err("traversal repeats an element".into());
    }
    if set != brute_active(m) {
        return Err("traversal differs from the set of active middles".into());
    }
    if m.nreles() != order.len() || m.nrnods() != m.nodes().len() || m.nrelis() != m.elems.len() {
        return Err("counters inconsistent".into());
    }
    let vol: f64 = order
        .iter()
        .map(|&e| {
            let (lo, hi) = bbox(m, e);
            (0..3).map(|d| hi[d] - lo[d]).product::<f64>()
        })
        .sum();
    if (vol - volume).abs() > 1e-12 * volume {
        return Err(format!("active elements cover volume {vol}, expected {volume}"));
    }
    let mut users = vec![0u32; m.nrnods()];
    for &e in order {
        for &n in m.node(e).closure() {
            users[n - 1] += 1;
        }
    }
    for id in 1..=m.nrnods() {
        if m.usage(id) != users[id - 1] {
            return Err(format!("usage count of node {id} is {} not {}", m.usage(id), users[id - 1]));
        }
        if (users[id - 1] == 0) != (m.status(id) == NodeStatus::Unused) {
            return Err(format!("status of node {id} disagrees with its usage"));
        }
    }
    if !m.is_one_irregular() {
        return Err("mesh is not 1-irregular".into());
    }
    // neighbours sharing at least an edge segment differ by at most one level
    let boxes: Vec<_> = order.iter().map(|&e| (bbox(m, e), m.level(e))).collect();
    for (i, ((la, ha), lva)) in boxes.iter().enumerate() {
        for ((lb, hb), lvb) in &boxes[i + 1..] {
            let overlap: Vec<f64> = (0..3).map(|d| ha[d].min(hb[d]) - la[d].max(lb[d])).collect();
            if overlap.iter().any(|&o| o < -1e-12) {
                continue;
            }
            let dims = overlap.iter().filter(|&&o| o > 1e-12).count();
            if dims >= 1 && lva.abs_diff(*lvb) > 1 {
                return Err(format!("levels {lva} and {lvb} meet across a face or edge"));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub enum MeshOp {
    Refine(usize),
    GlobalPref,
    LocalPref(usize, bool),
    GlobalHref,
}

/// Apply a sequence of operations to a small brick mesh, checking the
/// invariants after each one. Index arguments pick an active element modulo
/// the current element count.
pub fn fuzz_sequence(n: [usize; 3], p: u32, ops: &[MeshOp]) -> Result<(), String> {
    let pr = Problem::new(ProblemKind::Galerkin, None, 1);
    let mut m = pr.brick_mesh(n, [0.0; 3], [1.0; 3], p).map_err(|e| e.to_string())?;
    check_mesh(&m, 1.0)?;
    for op in ops {
        let pick = |m: &Mesh, k: usize| m.elem_order()[k % m.nreles()];
        let res = match *op {
            MeshOp::Refine(k) => {
                let e = pick(&m, k);
                m.refine_element(e, KREF_ISO).and_then(|_| m.close_mesh())
            }
            MeshOp::GlobalPref => {
                if m.nodes().iter().any(|nd| nd.kind == NodeKind::Middle && nd.order_array().iter().any(|&q| q >= 4)) {
                    Ok(())
                } else {
                    m.global_refinement(RefinementKind::Pref)
                }
            }
            MeshOp::LocalPref(k, max) => {
                let e = pick(&m, k);
                if m.node(e).order_array().iter().any(|&q| q >= 5) {
                    Ok(())
                } else {
                    m.execute_pref(&[e], if max { PrefRule::Max } else { PrefRule::Min })
                }
            }
            MeshOp::GlobalHref => {
                if m.nreles() > 64 {
                    Ok(())
                } else {
                    m.global_refinement(RefinementKind::Href)
                }
            }
        };
        res.map_err(|e| format!("{op:?}: {e}"))?;
        check_mesh(&m, 1.0).map_err(|e| format!("after {op:?}: {e}"))?;
    }
    Ok(())
}

pub fn random_ops(r: &mut ChaCha8Rng, len: usize) -> Vec<MeshOp> {
    (0..len)
        .map(|_| match r.gen_range(0..10) {
            0..=5 => MeshOp::Refine(r.gen()),
            6 => MeshOp::GlobalPref,
            7 | 8 => MeshOp::LocalPref(r.gen(), r.gen()),
            _ => MeshOp::GlobalHref,
        })
        .collect()
}

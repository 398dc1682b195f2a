//! Poisson problem: manufactured solutions and the element routines of the
//! standard Galerkin, primal DPG and ultraweak DPG discretizations.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::assembly::{assemble_and_solve, AlocBloc, SolveReport, SolverOptions};
use crate::conformity::{gather_solution, local_nfun, update_ddof};
use crate::dpg::{condense_dpg, dpg_residual, DpgElementSystem, PackedSym};
use crate::error::{Error, Result};
use crate::exec::{try_map_ordered, ExecMode};
use crate::geometry::{element_geometry, face_geometry0, piola_transform, GeometryData};
use crate::masterel::{
    face_param0, face_tangents, gauss_quadrature_2d, gauss_quadrature_3d, quadrature_counts, ElementOrder,
    OrderTriple, ShapeLayout, ShapeSet, Space, NFACE,
};
use crate::mesh::{BcAssignment, GeometryFile, Mesh, NodeId};
use crate::physics::{PhysicsAttr, PhysicsTable};

const LAYER_EPS: f64 = 0.05;

/// Exact solutions with their gradient and source `f = -Δu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManufacturedSolution {
    /// `u = x`
    Linear,
    /// `u = x^2 + y^2 + z^2`
    Quadratic,
    /// `u = sin(πx) sin(πy) sin(πz)`
    Smooth,
    /// `u = x + tanh((x - 1/2)/ε) sin(πy) sin(πz)`, ε = 0.05
    BoundaryLayer,
}

impl ManufacturedSolution {
    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "linear" => Some(Self::Linear),
            "quadratic" => Some(Self::Quadratic),
            "smooth" => Some(Self::Smooth),
            "layer" | "boundary_layer" | "boundary-layer" => Some(Self::BoundaryLayer),
            _ => None,
        }
    }

    pub fn u(&self, x: [f64; 3]) -> f64 {
        match self {
            Self::Linear => x[0],
            Self::Quadratic => x[0] * x[0] + x[1] * x[1] + x[2] * x[2],
            Self::Smooth => (PI * x[0]).sin() * (PI * x[1]).sin() * (PI * x[2]).sin(),
            Self::BoundaryLayer => {
                x[0] + ((x[0] - 0.5) / LAYER_EPS).tanh() * (PI * x[1]).sin() * (PI * x[2]).sin()
            }
        }
    }

    pub fn grad(&self, x: [f64; 3]) -> [f64; 3] {
        match self {
            Self::Linear => [1.0, 0.0, 0.0],
            Self::Quadratic => [2.0 * x[0], 2.0 * x[1], 2.0 * x[2]],
            Self::Smooth => {
                let s = [0, 1, 2].map(|d| (PI * x[d]).sin());
                let c = [0, 1, 2].map(|d| (PI * x[d]).cos());
                [PI * c[0] * s[1] * s[2], PI * s[0] * c[1] * s[2], PI * s[0] * s[1] * c[2]]
            }
            Self::BoundaryLayer => {
                let t = ((x[0] - 0.5) / LAYER_EPS).tanh();
                let (sy, cy) = (PI * x[1]).sin_cos();
                let (sz, cz) = (PI * x[2]).sin_cos();
                [
                    1.0 + (1.0 - t * t) / LAYER_EPS * sy * sz,
                    t * PI * cy * sz,
                    t * PI * sy * cz,
                ]
            }
        }
    }

    /// `f = -Δu`
    pub fn source(&self, x: [f64; 3]) -> f64 {
        match self {
            Self::Linear => 0.0,
            Self::Quadratic => -6.0,
            Self::Smooth => 3.0 * PI * PI * self.u(x),
            Self::BoundaryLayer => {
                let t = ((x[0] - 0.5) / LAYER_EPS).tanh();
                let s = (PI * x[1]).sin() * (PI * x[2]).sin();
                s * (2.0 * t * (1.0 - t * t) / (LAYER_EPS * LAYER_EPS) + 2.0 * PI * PI * t)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Galerkin,
    PrimalDpg,
    UwDpg,
}

impl ProblemKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "galerkin" => Some(Self::Galerkin),
            "primal" => Some(Self::PrimalDpg),
            "uw" | "ultraweak" => Some(Self::UwDpg),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Galerkin => "galerkin",
            Self::PrimalDpg => "primal",
            Self::UwDpg => "uw",
        }
    }

    pub fn is_dpg(&self) -> bool {
        *self != Self::Galerkin
    }

    pub fn physics(&self) -> PhysicsTable {
        let attrs = match self {
            Self::Galerkin => vec![PhysicsAttr::new("field", Space::H1, 1)],
            Self::PrimalDpg => vec![
                PhysicsAttr::new("field", Space::H1, 1),
                PhysicsAttr::new("flux", Space::HDiv, 1).trace(),
            ],
            Self::UwDpg => vec![
                PhysicsAttr::new("trace", Space::H1, 1).trace(),
                PhysicsAttr::new("flux", Space::HDiv, 1).trace(),
                PhysicsAttr::new("field", Space::L2, 1),
                PhysicsAttr::new("sigma", Space::L2, 3),
            ],
        };
        PhysicsTable::new(100_000, attrs).expect("built-in physics tables are valid")
    }

    /// The attribute carrying the Dirichlet data.
    pub fn dirichlet_attr(&self) -> usize {
        0
    }
}

/// Problem configuration shared by the element routines.
#[derive(Debug, Clone)]
pub struct Problem {
    pub kind: ProblemKind,
    pub physics: PhysicsTable,
    /// Manufactured solution (NEXACT=1); `None` means `f = 0`, `u0 = 0`.
    pub exact: Option<ManufacturedSolution>,
    /// Test-space enrichment Δp.
    pub dp: u32,
    pub exec: ExecMode,
}

impl Problem {
    pub fn new(kind: ProblemKind, exact: Option<ManufacturedSolution>, dp: u32) -> Self {
        Self {
            kind,
            physics: kind.physics(),
            exact,
            dp,
            exec: ExecMode::default(),
        }
    }

    pub fn source_term(&self, x: [f64; 3]) -> f64 {
        self.exact.map_or(0.0, |s| s.source(x))
    }

    pub fn dirichlet_data(&self, x: [f64; 3]) -> (f64, [f64; 3]) {
        self.exact.map_or((0.0, [0.0; 3]), |s| (s.u(x), s.grad(x)))
    }

    /// Mesh with Dirichlet conditions on every boundary face.
    pub fn mesh(&self, geom: &GeometryFile, order: OrderTriple) -> Result<Mesh> {
        let bcs: Vec<BcAssignment> = (0..=9)
            .map(|id| BcAssignment::dirichlet(id, self.kind.dirichlet_attr()))
            .collect();
        Mesh::generate(geom, &self.physics, order, &bcs)
    }

    pub fn brick_mesh(&self, n: [usize; 3], lo: [f64; 3], hi: [f64; 3], p: u32) -> Result<Mesh> {
        self.mesh(&GeometryFile::brick(n, lo, hi), OrderTriple::iso(p))
    }

    /// Element matrices for the configured discretization.
    pub fn element(&self, mesh: &Mesh, mdle: NodeId) -> Result<AlocBloc> {
        match self.kind {
            ProblemKind::Galerkin => elem_galerkin(mesh, mdle, self),
            ProblemKind::PrimalDpg | ProblemKind::UwDpg => elem_dpg(mesh, mdle, self),
        }
    }

    /// Interpolate Dirichlet data, assemble and solve.
    pub fn solve(&self, mesh: &mut Mesh, opts: &SolverOptions) -> Result<SolveReport> {
        update_ddof(mesh, &self.physics, &|x| self.dirichlet_data(x))?;
        let mut opts = opts.clone();
        if self.kind.is_dpg() {
            opts.istc = true;
        }
        let f = |m: &Mesh, e: NodeId| self.element(m, e);
        assemble_and_solve(mesh, &self.physics, &f, &opts)
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Value and gradient rows of H1 functions at quadrature point `k`.
fn fill_h1_rows(f: &mut DMatrix<f64>, s: &ShapeSet, k: usize, nq: usize, sw: f64) {
    for i in 0..s.nrdof {
        f[(k, i)] = sw * s.val[i];
        for c in 0..3 {
            f[((1 + c) * nq + k, i)] = sw * s.deriv[i][c];
        }
    }
}

fn physical(layout: &ShapeLayout, xi: [f64; 3], g: &GeometryData) -> ShapeSet {
    piola_transform(&layout.eval(xi), g)
}

/// Enriched test order: element order plus Δp in every direction.
fn enriched_order(order: &ElementOrder, dp: u32) -> ElementOrder {
    ElementOrder::from_middle(OrderTriple::from_array(order.max_per_direction()).add(dp))
}

/// Stiffness `(∇u,∇v)` and load `(f,v)`.
pub fn elem_galerkin(mesh: &Mesh, mdle: NodeId, problem: &Problem) -> Result<AlocBloc> {
    let info = mesh.element_info(mdle)?;
    let layout = ShapeLayout::new(Space::H1, &info.norder)?;
    let n = layout.nrdof();
    let mut ab = AlocBloc::zeros(&[n]);
    ab.itest[0] = true;
    ab.itrial[0] = true;
    let q = gauss_quadrature_3d(quadrature_counts(info.norder.max_per_direction(), 0))?;
    let (k, b) = (&mut ab.aloc[0][0], &mut ab.bloc[0]);
    for (&xi, &w) in q.points.iter().zip(&q.weights) {
        let g = element_geometry(&info.xnod, xi)?;
        let s = physical(&layout, xi, &g);
        let wa = w * g.rjac;
        let f = problem.source_term(g.x);
        for i in 0..n {
            b[i] += f * s.val[i] * wa;
            for j in i..n {
                k[(i, j)] += dot(s.deriv[i], s.deriv[j]) * wa;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            k[(i, j)] = k[(j, i)];
        }
    }
    Ok(ab)
}

/// Per-attribute local dof counts of the trial attributes.
fn trial_sizes(mesh: &Mesh, order: &ElementOrder) -> Result<Vec<usize>> {
    mesh.attr_layout()
        .iter()
        .map(|a| Ok(local_nfun(&ShapeLayout::new(a.space, order)?, a.is_trace) * a.ncomp))
        .collect()
}

/// The element DPG system: Gram matrix of the enriched broken test space and
/// `[B | B^ | l]`; trial dofs are blocked by attribute.
pub fn dpg_element_system(mesh: &Mesh, mdle: NodeId, problem: &Problem) -> Result<(DpgElementSystem, Vec<usize>)> {
    match problem.kind {
        ProblemKind::PrimalDpg => primal_system(mesh, mdle, problem),
        ProblemKind::UwDpg => uw_system(mesh, mdle, problem),
        ProblemKind::Galerkin => Err(Error::Unsupported("DPG system for the Galerkin problem".into())),
    }
}

fn primal_system(mesh: &Mesh, mdle: NodeId, problem: &Problem) -> Result<(DpgElementSystem, Vec<usize>)> {
    let info = mesh.element_info(mdle)?;
    let enr = enriched_order(&info.norder, problem.dp);
    let test = ShapeLayout::new(Space::H1, &enr)?;
    let tu = ShapeLayout::new(Space::H1, &info.norder)?;
    let ts = ShapeLayout::new(Space::HDiv, &info.norder)?;
    let sizes = trial_sizes(mesh, &info.norder)?;
    let (nv, nu, ns) = (test.nrdof(), sizes[0], sizes[1]);
    let mut sys = DpgElementSystem::new(nv, nu + ns);
    let eo = enr.max_per_direction();

    let q = gauss_quadrature_3d(quadrature_counts(eo, 0))?;
    let nq = q.points.len();
    let mut fv = DMatrix::zeros(4 * nq, nv);
    let mut fu = DMatrix::zeros(3 * nq, nu);
    let mut fl = DMatrix::zeros(nq, 1);
    for (k, (&xi, &w)) in q.points.iter().zip(&q.weights).enumerate() {
        let g = element_geometry(&info.xnod, xi)?;
        let sw = (w * g.rjac).sqrt();
        fill_h1_rows(&mut fv, &physical(&test, xi, &g), k, nq, sw);
        let u = physical(&tu, xi, &g);
        for j in 0..nu {
            for c in 0..3 {
                fu[(c * nq + k, j)] = sw * u.deriv[j][c];
            }
        }
        fl[(k, 0)] = sw * problem.source_term(g.x);
    }
    sys.gram = PackedSym::from_dense(&(fv.transpose() * &fv));
    let grad_v = fv.rows(nq, 3 * nq);
    sys.stiff_all.columns_mut(0, nu).copy_from(&(grad_v.transpose() * &fu));
    sys.stiff_all
        .column_mut(nu + ns)
        .copy_from(&(fv.rows(0, nq).transpose() * &fl).column(0));
    for face in 0..NFACE {
        let (t1, t2) = face_tangents(face);
        let q = gauss_quadrature_2d([eo[t1] as usize + 1, eo[t2] as usize + 1])?;
        for (&t, &w) in q.points.iter().zip(&q.weights) {
            let bg = face_geometry0(&info.xnod, face, t)?;
            let xi = face_param0(face, t).0;
            let v = test.eval(xi);
            let s = physical(&ts, xi, &bg.geo);
            let wb = w * bg.bjac;
            for j in 0..ns {
                let sn = dot(s.vec_val[j], bg.rn);
                if sn == 0.0 {
                    continue;
                }
                for i in 0..nv {
                    sys.stiff_all[(i, nu + j)] -= sn * v.val[i] * wb;
                }
            }
        }
    }
    Ok((sys, sizes))
}

fn uw_system(mesh: &Mesh, mdle: NodeId, problem: &Problem) -> Result<(DpgElementSystem, Vec<usize>)> {
    let info = mesh.element_info(mdle)?;
    let enr = enriched_order(&info.norder, problem.dp);
    let tv = ShapeLayout::new(Space::H1, &enr)?;
    let tt = ShapeLayout::new(Space::HDiv, &enr)?;
    let lh = ShapeLayout::new(Space::H1, &info.norder)?;
    let ld = ShapeLayout::new(Space::HDiv, &info.norder)?;
    let l2 = ShapeLayout::new(Space::L2, &info.norder)?;
    let sizes = trial_sizes(mesh, &info.norder)?;
    let (nv, nt) = (tv.nrdof(), tt.nrdof());
    let (n1, n2, n3, n4) = (sizes[0], sizes[1], sizes[2], sizes[3]);
    let (o2, o3, o4) = (n1, n1 + n2, n1 + n2 + n3);
    let ntrial = n1 + n2 + n3 + n4;
    let mut sys = DpgElementSystem::new(nv + nt, ntrial);
    let eo = enr.max_per_direction();

    let q = gauss_quadrature_3d(quadrature_counts(eo, 0))?;
    let nq = q.points.len();
    // rows: one block of nq quadrature points per feature, scaled by sqrt(w |J|)
    let mut fv = DMatrix::zeros(4 * nq, nv);
    let mut ftau = DMatrix::zeros(3 * nq, nt);
    let mut fdiv = DMatrix::zeros(nq, nt);
    let mut fphi = DMatrix::zeros(nq, n3);
    let mut fl = DMatrix::zeros(nq, 1);
    for (k, (&xi, &w)) in q.points.iter().zip(&q.weights).enumerate() {
        let g = element_geometry(&info.xnod, xi)?;
        let sw = (w * g.rjac).sqrt();
        fill_h1_rows(&mut fv, &physical(&tv, xi, &g), k, nq, sw);
        let tau = physical(&tt, xi, &g);
        for j in 0..nt {
            for c in 0..3 {
                ftau[(c * nq + k, j)] = sw * tau.vec_val[j][c];
            }
            fdiv[(k, j)] = sw * tau.div[j];
        }
        let phi = physical(&l2, xi, &g);
        for j in 0..n3 {
            fphi[(k, j)] = sw * phi.val[j];
        }
        fl[(k, 0)] = sw * problem.source_term(g.x);
    }
    // adjoint graph norm: |v|^2 + |∇v + τ|^2 + |div τ|^2 + |τ|^2
    let gvv = fv.transpose() * &fv;
    let gvt = fv.rows(nq, 3 * nq).transpose() * &ftau;
    let gtt = (ftau.transpose() * &ftau) * 2.0 + (fdiv.transpose() * &fdiv);
    let mut gram = DMatrix::zeros(nv + nt, nv + nt);
    gram.view_mut((0, 0), (nv, nv)).copy_from(&gvv);
    gram.view_mut((0, nv), (nv, nt)).copy_from(&gvt);
    gram.view_mut((nv, nv), (nt, nt)).copy_from(&gtt);
    sys.gram = PackedSym::from_dense(&gram);
    // (σ, ∇v + τ) and (u, div τ)
    for c in 0..3 {
        let bv = fv.rows((1 + c) * nq, nq).tr_mul(&fphi);
        let bt = ftau.rows(c * nq, nq).transpose() * &fphi;
        for k in 0..n3 {
            sys.stiff_all
                .view_mut((0, o4 + 3 * k + c), (nv, 1))
                .copy_from(&bv.column(k));
            sys.stiff_all
                .view_mut((nv, o4 + 3 * k + c), (nt, 1))
                .copy_from(&bt.column(k));
        }
    }
    sys.stiff_all
        .view_mut((nv, o3), (nt, n3))
        .copy_from(&(fdiv.transpose() * &fphi));
    sys.stiff_all
        .view_mut((0, ntrial), (nv, 1))
        .copy_from(&(fv.rows(0, nq).transpose() * &fl));
    for face in 0..NFACE {
        let (t1, t2) = face_tangents(face);
        let q = gauss_quadrature_2d([eo[t1] as usize + 1, eo[t2] as usize + 1])?;
        for (&t, &w) in q.points.iter().zip(&q.weights) {
            let bg = face_geometry0(&info.xnod, face, t)?;
            let xi = face_param0(face, t).0;
            let v = tv.eval(xi);
            let tau = physical(&tt, xi, &bg.geo);
            let uh = lh.eval(xi);
            let sh = physical(&ld, xi, &bg.geo);
            let wb = w * bg.bjac;
            for j in 0..n2 {
                let sn = dot(sh.vec_val[j], bg.rn);
                if sn == 0.0 {
                    continue;
                }
                for i in 0..nv {
                    sys.stiff_all[(i, o2 + j)] -= sn * v.val[i] * wb;
                }
            }
            for j in 0..n1 {
                let u = uh.val[j];
                if u == 0.0 {
                    continue;
                }
                for i in 0..nt {
                    sys.stiff_all[(nv + i, j)] -= u * dot(tau.vec_val[i], bg.rn) * wb;
                }
            }
        }
    }
    Ok((sys, sizes))
}

/// Condensed DPG element matrices scattered into attribute blocks.
pub fn elem_dpg(mesh: &Mesh, mdle: NodeId, problem: &Problem) -> Result<AlocBloc> {
    let (sys, sizes) = dpg_element_system(mesh, mdle, problem)?;
    let c = condense_dpg(&sys)?;
    Ok(scatter_condensed(&c, &sizes))
}

fn scatter_condensed(c: &DMatrix<f64>, sizes: &[usize]) -> AlocBloc {
    let n = c.nrows() - 1;
    let mut ab = AlocBloc::zeros(sizes);
    ab.itest.iter_mut().for_each(|f| *f = true);
    ab.itrial.iter_mut().for_each(|f| *f = true);
    let offs: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    for a in 0..sizes.len() {
        for b in 0..sizes.len() {
            ab.aloc[a][b].copy_from(&c.view((offs[a], offs[b]), (sizes[a], sizes[b])));
        }
        ab.bloc[a].copy_from(&c.view((offs[a], n), (sizes[a], 1)));
    }
    ab
}

pub fn elem_primal_dpg(mesh: &Mesh, mdle: NodeId, problem: &Problem) -> Result<AlocBloc> {
    if problem.kind != ProblemKind::PrimalDpg {
        return Err(Error::Contract("primal DPG routine called for another problem".into()));
    }
    elem_dpg(mesh, mdle, problem)
}

pub fn elem_uw_dpg(mesh: &Mesh, mdle: NodeId, problem: &Problem) -> Result<AlocBloc> {
    if problem.kind != ProblemKind::UwDpg {
        return Err(Error::Contract("ultraweak DPG routine called for another problem".into()));
    }
    elem_dpg(mesh, mdle, problem)
}

/// Squared element residual `||U^{-T}(l - [B|B^] w)||^2` of the stored solution.
pub fn elem_residual(mesh: &Mesh, mdle: NodeId, problem: &Problem) -> Result<f64> {
    if !problem.kind.is_dpg() {
        return Err(Error::Unsupported("the Galerkin problem has no built-in residual".into()));
    }
    let (sys, sizes) = dpg_element_system(mesh, mdle, problem)?;
    let mut w = Vec::with_capacity(sys.ntrial);
    for a in 0..sizes.len() {
        w.extend(gather_solution(mesh, mdle, a)?);
    }
    dpg_residual(&sys, &w)
}

/// Squared residuals of all active elements, in natural order.
pub fn residuals(mesh: &Mesh, problem: &Problem) -> Result<Vec<(NodeId, f64)>> {
    let els = mesh.elem_order().to_vec();
    let r = try_map_ordered(problem.exec, &els, |&m| elem_residual(mesh, m, problem))?;
    Ok(els.into_iter().zip(r).collect())
}

/// Exact error of the stored solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactError {
    /// `|u - u_h|_1` (ultraweak: `||σ_h - ∇u||`).
    pub h1: f64,
    /// `||u - u_h||`
    pub l2: f64,
    /// `(mdle, h1^2, l2^2)` per element.
    pub per_element: Vec<(NodeId, f64, f64)>,
}

fn element_exact_error(mesh: &Mesh, mdle: NodeId, problem: &Problem, sol: ManufacturedSolution) -> Result<(f64, f64)> {
    let info = mesh.element_info(mdle)?;
    let q = gauss_quadrature_3d(quadrature_counts(info.norder.max_per_direction(), 1))?;
    let (mut e1, mut e0) = (0.0, 0.0);
    match problem.kind {
        ProblemKind::Galerkin | ProblemKind::PrimalDpg => {
            let layout = ShapeLayout::new(Space::H1, &info.norder)?;
            let c = gather_solution(mesh, mdle, 0)?;
            for (&xi, &w) in q.points.iter().zip(&q.weights) {
                let g = element_geometry(&info.xnod, xi)?;
                let s = physical(&layout, xi, &g);
                let mut u = 0.0;
                let mut du = [0.0; 3];
                for (k, ck) in c.iter().enumerate() {
                    u += ck * s.val[k];
                    for d in 0..3 {
                        du[d] += ck * s.deriv[k][d];
                    }
                }
                let ge = sol.grad(g.x);
                let wa = w * g.rjac;
                e0 += (sol.u(g.x) - u).powi(2) * wa;
                e1 += (0..3).map(|d| (ge[d] - du[d]).powi(2)).sum::<f64>() * wa;
            }
        }
        ProblemKind::UwDpg => {
            let layout = ShapeLayout::new(Space::L2, &info.norder)?;
            let cu = gather_solution(mesh, mdle, 2)?;
            let cs = gather_solution(mesh, mdle, 3)?;
            for (&xi, &w) in q.points.iter().zip(&q.weights) {
                let g = element_geometry(&info.xnod, xi)?;
                let s = physical(&layout, xi, &g);
                let mut u = 0.0;
                let mut sg = [0.0; 3];
                for (k, phi) in s.val.iter().enumerate() {
                    u += cu[k] * phi;
                    for d in 0..3 {
                        sg[d] += cs[3 * k + d] * phi;
                    }
                }
                let ge = sol.grad(g.x);
                let wa = w * g.rjac;
                e0 += (sol.u(g.x) - u).powi(2) * wa;
                e1 += (0..3).map(|d| (ge[d] - sg[d]).powi(2)).sum::<f64>() * wa;
            }
        }
    }
    Ok((e1, e0))
}

pub fn compute_exact_error(mesh: &Mesh, problem: &Problem) -> Result<ExactError> {
    let sol = problem
        .exact
        .ok_or_else(|| Error::Unsupported("exact error requires a manufactured solution (NEXACT=1)".into()))?;
    let els = mesh.elem_order().to_vec();
    let errs = try_map_ordered(problem.exec, &els, |&m| element_exact_error(mesh, m, problem, sol))?;
    let per_element: Vec<(NodeId, f64, f64)> = els.iter().zip(&errs).map(|(&m, &(a, b))| (m, a, b)).collect();
    Ok(ExactError {
        h1: errs.iter().map(|e| e.0).sum::<f64>().sqrt(),
        l2: errs.iter().map(|e| e.1).sum::<f64>().sqrt(),
        per_element,
    })
}

#[cfg(test)]
mod tests;

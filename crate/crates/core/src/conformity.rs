//! Constrained approximation on 1-irregular meshes: constraint coefficients
//! for hanging nodes, the modified element, solution gathering, Dirichlet
//! interpolation and geometry dof updates.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{element_geometry, piola_transform};
use crate::masterel::{gauss_legendre_1d, h1_basis_1d, shifted_legendre, ShapeLayout, Space, NNODE};
use crate::mesh::{Mesh, NodeId, NodeKind, NodeStatus};
use crate::physics::PhysicsTable;

/// Position of a constrained node inside its refined father.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintCase {
    /// Half `k` (0 or 1) of a bisected edge.
    EdgeHalf(u8),
    EdgeMidVertex,
    /// Quadrant `k` (0..4) of a quadrisected face, counterclockwise from `(0,0)`.
    FaceQuadrant(u8),
    /// Interior edge `k` (0..4) of a quadrisected face.
    FaceInteriorEdge(u8),
    FaceCenter,
}

impl ConstraintCase {
    /// Case of the son at position `pos` in its father's son list.
    pub fn from_son_position(father: NodeKind, pos: usize) -> Option<Self> {
        match (father, pos) {
            (NodeKind::Edge, 0 | 1) => Some(Self::EdgeHalf(pos as u8)),
            (NodeKind::Edge, 2) => Some(Self::EdgeMidVertex),
            (NodeKind::Face, 0..=3) => Some(Self::FaceQuadrant(pos as u8)),
            (NodeKind::Face, 4..=7) => Some(Self::FaceInteriorEdge(pos as u8 - 4)),
            (NodeKind::Face, 8) => Some(Self::FaceCenter),
            _ => None,
        }
    }

    fn on_edge(self) -> bool {
        matches!(self, Self::EdgeHalf(_) | Self::EdgeMidVertex)
    }
}

/// Orders of the parent entity and (faces) of its four edges, bottom, right,
/// top, left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParentOrder {
    Edge(u32),
    Face { p: [u32; 2], edges: [u32; 4] },
}

impl ParentOrder {
    /// Order of the child node the constraint produces.
    pub fn child_order(&self, case: ConstraintCase) -> u32 {
        match *self {
            ParentOrder::Edge(p) => match case {
                ConstraintCase::EdgeMidVertex => 0,
                _ => p,
            },
            ParentOrder::Face { p, edges } => {
                let m1 = p[0].max(edges[0]).max(edges[2]);
                let m2 = p[1].max(edges[1]).max(edges[3]);
                match case {
                    ConstraintCase::FaceQuadrant(_) => 10 * m1 + m2,
                    ConstraintCase::FaceInteriorEdge(0 | 2) => m2,
                    ConstraintCase::FaceInteriorEdge(_) => m1,
                    _ => 0,
                }
            }
        }
    }
}

/// Child own functions expressed through the parent closure functions.
/// Columns are blocked by parent closure node: vertices, edges, the parent.
#[derive(Debug, Clone)]
pub struct ConstraintMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major coefficients.
    pub data: Vec<f64>,
    /// Function count per parent closure node (2+1 for edges, 4+4+1 for faces).
    pub col_blocks: Vec<usize>,
}

impl ConstraintMatrix {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

type CacheKey = (Space, ConstraintCase, ParentOrder);

fn cache() -> &'static RwLock<HashMap<CacheKey, Arc<ConstraintMatrix>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<ConstraintMatrix>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

// ---- 1D/2D entity bases (traces of element functions on an edge or face)

fn h1_edge_closure(p: u32, s: f64) -> Vec<f64> {
    let (mut v, mut d) = (Vec::new(), Vec::new());
    h1_basis_1d(p as usize, s, &mut v, &mut d);
    v
}

/// H1 face closure basis: 4 vertices, bottom/right/top/left edge bubbles,
/// then face bubbles with `i` slowest.
fn h1_face_closure(p: [u32; 2], edges: [u32; 4], t: [f64; 2]) -> Vec<f64> {
    let pmax = p.iter().chain(&edges).copied().max().unwrap_or(1) as usize;
    let (mut a, mut da, mut b, mut db) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    h1_basis_1d(pmax, t[0], &mut a, &mut da);
    h1_basis_1d(pmax, t[1], &mut b, &mut db);
    let mut out = vec![a[0] * b[0], a[1] * b[0], a[1] * b[1], a[0] * b[1]];
    for k in 2..=edges[0] as usize {
        out.push(a[k] * b[0]);
    }
    for k in 2..=edges[1] as usize {
        out.push(a[1] * b[k]);
    }
    for k in 2..=edges[2] as usize {
        out.push(a[k] * b[1]);
    }
    for k in 2..=edges[3] as usize {
        out.push(a[0] * b[k]);
    }
    for i in 2..=p[0] as usize {
        for j in 2..=p[1] as usize {
            out.push(a[i] * b[j]);
        }
    }
    out
}

fn hdiv_face(p: [u32; 2], t: [f64; 2]) -> Vec<f64> {
    let (mut a, mut da, mut b, mut db) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    shifted_legendre(p[0] as usize, t[0], &mut a, &mut da);
    shifted_legendre(p[1] as usize, t[1], &mut b, &mut db);
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in &a {
        for y in &b {
            out.push(x * y);
        }
    }
    out
}

/// Least-squares (L2) fit of `target` samples by `basis` samples.
fn project(basis: &[Vec<f64>], weights: &[f64], target: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nb = basis[0].len();
    let nt = target[0].len();
    let mut g = DMatrix::<f64>::zeros(nb, nb);
    let mut r = DMatrix::<f64>::zeros(nb, nt);
    for ((phi, w), f) in basis.iter().zip(weights).zip(target) {
        for i in 0..nb {
            for j in 0..nb {
                g[(i, j)] += w * phi[i] * phi[j];
            }
            for j in 0..nt {
                r[(i, j)] += w * phi[i] * f[j];
            }
        }
    }
    let chol = g
        .cholesky()
        .ok_or_else(|| Error::Contract("singular child basis in constraint projection".into()))?;
    Ok(chol.solve(&r))
}

fn gauss_1d(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    gauss_legendre_1d(n.clamp(1, crate::masterel::MAX_GAUSS))
}

fn compute_constraint(space: Space, case: ConstraintCase, parent: ParentOrder) -> Result<ConstraintMatrix> {
    if case.on_edge() != matches!(parent, ParentOrder::Edge(_)) {
        return Err(Error::Unsupported(format!(
            "constraint case {case:?} for parent {parent:?}"
        )));
    }
    let child = parent.child_order(case);
    match space {
        Space::HCurl => {
            return Err(Error::Unsupported("H(curl) constraints".into()));
        }
        Space::L2 => {
            return Ok(ConstraintMatrix {
                rows: 0,
                cols: 0,
                data: Vec::new(),
                col_blocks: Vec::new(),
            })
        }
        _ => {}
    }
    let (col_blocks, parent_eval): (Vec<usize>, Box<dyn Fn([f64; 2]) -> Vec<f64>>) = match (space, parent) {
        (Space::H1, ParentOrder::Edge(p)) => (
            vec![1, 1, p as usize - 1],
            Box::new(move |t: [f64; 2]| h1_edge_closure(p, t[0])),
        ),
        (Space::H1, ParentOrder::Face { p, edges }) => {
            let mut b = vec![1, 1, 1, 1];
            b.extend(edges.iter().map(|&e| e as usize - 1));
            b.push((p[0] as usize - 1) * (p[1] as usize - 1));
            (b, Box::new(move |t| h1_face_closure(p, edges, t)))
        }
        (Space::HDiv, ParentOrder::Edge(_)) => (vec![0, 0, 0], Box::new(|_| Vec::new())),
        (Space::HDiv, ParentOrder::Face { p, .. }) => (
            vec![0, 0, 0, 0, 0, 0, 0, 0, (p[0] * p[1]) as usize],
            Box::new(move |t| hdiv_face(p, t).into_iter().map(|v| 0.25 * v).collect()),
        ),
        _ => unreachable!(),
    };
    let cols: usize = col_blocks.iter().sum();
    let point = |t: [f64; 2]| -> Result<ConstraintMatrix> {
        let v = parent_eval(t);
        Ok(ConstraintMatrix {
            rows: 1,
            cols,
            data: v,
            col_blocks: col_blocks.clone(),
        })
    };
    let empty = || ConstraintMatrix {
        rows: 0,
        cols,
        data: Vec::new(),
        col_blocks: col_blocks.clone(),
    };
    if space == Space::HDiv && !matches!(case, ConstraintCase::FaceQuadrant(_)) {
        return Ok(empty());
    }
    match case {
        ConstraintCase::EdgeMidVertex => point([0.5, 0.0]),
        ConstraintCase::FaceCenter => point([0.5, 0.5]),
        ConstraintCase::EdgeHalf(_) | ConstraintCase::FaceInteriorEdge(_) => {
            // child is a segment; map s -> parent parameters
            let map: Box<dyn Fn(f64) -> [f64; 2]> = match case {
                ConstraintCase::EdgeHalf(k) => Box::new(move |s| [(k as f64 + s) / 2.0, 0.0]),
                ConstraintCase::FaceInteriorEdge(0) => Box::new(|s| [0.5, s / 2.0]),
                ConstraintCase::FaceInteriorEdge(1) => Box::new(|s| [0.5 + s / 2.0, 0.5]),
                ConstraintCase::FaceInteriorEdge(2) => Box::new(|s| [0.5, 0.5 + s / 2.0]),
                ConstraintCase::FaceInteriorEdge(_) => Box::new(|s| [s / 2.0, 0.5]),
                _ => unreachable!(),
            };
            let (pts, wts) = gauss_1d(child as usize + 2)?;
            let basis: Vec<Vec<f64>> = pts.iter().map(|&s| h1_edge_closure(child, s)).collect();
            let target: Vec<Vec<f64>> = pts.iter().map(|&s| parent_eval(map(s))).collect();
            let coef = project(&basis, &wts, &target)?;
            let rows = child as usize - 1;
            let mut data = Vec::with_capacity(rows * cols);
            for r in 0..rows {
                for c in 0..cols {
                    data.push(coef[(2 + r, c)]);
                }
            }
            Ok(ConstraintMatrix {
                rows,
                cols,
                data,
                col_blocks,
            })
        }
        ConstraintCase::FaceQuadrant(k) => {
            let (a, b) = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)][k as usize];
            let m = [child / 10, child % 10];
            let me = m[0].max(m[1]);
            let (pts, wts) = gauss_1d(me as usize + 2)?;
            let mut basis = Vec::new();
            let mut target = Vec::new();
            let mut w = Vec::new();
            for (s1, w1) in pts.iter().zip(&wts) {
                for (s2, w2) in pts.iter().zip(&wts) {
                    let child_vals = match space {
                        Space::H1 => h1_face_closure(m, [me; 4], [*s1, *s2]),
                        _ => hdiv_face(m, [*s1, *s2]),
                    };
                    basis.push(child_vals);
                    target.push(parent_eval([(a + s1) / 2.0, (b + s2) / 2.0]));
                    w.push(w1 * w2);
                }
            }
            let coef = project(&basis, &w, &target)?;
            let (skip, rows) = match space {
                Space::H1 => (
                    4 + 4 * (me as usize - 1),
                    (m[0] as usize - 1) * (m[1] as usize - 1),
                ),
                _ => (0, (m[0] * m[1]) as usize),
            };
            let mut data = Vec::with_capacity(rows * cols);
            for r in 0..rows {
                for c in 0..cols {
                    data.push(coef[(skip + r, c)]);
                }
            }
            Ok(ConstraintMatrix {
                rows,
                cols,
                data,
                col_blocks,
            })
        }
    }
}

/// Coefficients of the child's own functions in terms of the parent closure
/// functions, computed by L2 projection on the child sub-entity and cached.
pub fn constraint_coefficients(
    space: Space,
    case: ConstraintCase,
    parent: ParentOrder,
) -> Result<Arc<ConstraintMatrix>> {
    let key = (space, case, parent);
    if let Some(c) = cache().read().expect("constraint cache poisoned").get(&key) {
        return Ok(c.clone());
    }
    let c = Arc::new(compute_constraint(space, case, parent)?);
    cache()
        .write()
        .expect("constraint cache poisoned")
        .entry(key)
        .or_insert(c.clone());
    Ok(c)
}

// ---- expansion of node functions onto free nodes

/// One row of an expansion: `(free node, function index in node, coefficient)`.
type ExpRow = Vec<(NodeId, usize, f64)>;

fn node_nfun_space(mesh: &Mesh, id: NodeId, space: Space, is_trace: bool) -> usize {
    let n = mesh.node(id);
    if is_trace && n.kind == NodeKind::Middle {
        return 0;
    }
    crate::masterel::node_dof_count(space, n.kind, n.order_array())
}

fn parent_order(mesh: &Mesh, p: NodeId) -> ParentOrder {
    let n = mesh.node(p);
    match n.kind {
        NodeKind::Edge => ParentOrder::Edge(n.order),
        _ => {
            let a = n.order_array();
            let c = n.closure();
            ParentOrder::Face {
                p: [a[0], a[1]],
                edges: [0, 1, 2, 3].map(|k| mesh.node(c[4 + k]).order),
            }
        }
    }
}

struct Expander<'a> {
    mesh: &'a Mesh,
    space: Space,
    is_trace: bool,
    memo: HashMap<NodeId, Arc<Vec<ExpRow>>>,
}

impl<'a> Expander<'a> {
    fn new(mesh: &'a Mesh, space: Space, is_trace: bool) -> Self {
        Self {
            mesh,
            space,
            is_trace,
            memo: HashMap::new(),
        }
    }

    fn expand(&mut self, id: NodeId) -> Result<Arc<Vec<ExpRow>>> {
        if let Some(e) = self.memo.get(&id) {
            return Ok(e.clone());
        }
        let nfun = node_nfun_space(self.mesh, id, self.space, self.is_trace);
        let rows: Vec<ExpRow> = match self.mesh.status(id) {
            NodeStatus::Free => (0..nfun).map(|k| vec![(id, k, 1.0)]).collect(),
            NodeStatus::Constrained(p) if nfun == 0 => {
                let _ = p;
                Vec::new()
            }
            NodeStatus::Constrained(p) => {
                let pn = self.mesh.node(p);
                let pos = pn
                    .sons
                    .iter()
                    .position(|&s| s == id)
                    .ok_or_else(|| Error::Mesh(format!("node {id} not among sons of {p}")))?;
                let case = ConstraintCase::from_son_position(pn.kind, pos)
                    .ok_or_else(|| Error::Unsupported(format!("constraint of node {id} by {p}")))?;
                let k = constraint_coefficients(self.space, case, parent_order(self.mesh, p))?;
                if k.rows != nfun {
                    return Err(Error::Contract(format!(
                        "node {id}: {nfun} functions but constraint has {} rows",
                        k.rows
                    )));
                }
                let mut closure: Vec<NodeId> = pn.closure().to_vec();
                closure.push(p);
                let mut out: Vec<ExpRow> = vec![Vec::new(); nfun];
                let mut col = 0;
                for (q, &nq) in closure.iter().zip(&k.col_blocks) {
                    if nq == 0 {
                        continue;
                    }
                    if node_nfun_space(self.mesh, *q, self.space, self.is_trace) != nq {
                        return Err(Error::Contract(format!("order mismatch on parent closure node {q}")));
                    }
                    let eq = self.expand(*q)?;
                    for l in 0..nq {
                        for (r, row) in out.iter_mut().enumerate() {
                            let c = k.get(r, col + l);
                            if c.abs() < 1e-15 {
                                continue;
                            }
                            row.extend(eq[l].iter().map(|&(n, f, v)| (n, f, v * c)));
                        }
                    }
                    col += nq;
                }
                for row in out.iter_mut() {
                    merge_row(row);
                }
                out
            }
            NodeStatus::Irregular(a) => {
                return Err(Error::Irregularity(format!(
                    "node {id} is constrained through ancestor {a} more than one level up"
                )))
            }
            NodeStatus::Unused => {
                return Err(Error::State(format!("node {id} is not used by an active element")))
            }
        };
        let rows = Arc::new(rows);
        self.memo.insert(id, rows.clone());
        Ok(rows)
    }
}

fn merge_row(row: &mut ExpRow) {
    row.sort_by_key(|&(n, f, _)| (n, f));
    let mut out: ExpRow = Vec::with_capacity(row.len());
    for &(n, f, v) in row.iter() {
        match out.last_mut() {
            Some(last) if last.0 == n && last.1 == f => last.2 += v,
            _ => out.push((n, f, v)),
        }
    }
    *row = out;
}

// ---- modified element

/// Modified element data for one attribute.
#[derive(Debug, Clone)]
pub struct ModifiedAttr {
    pub attr: usize,
    pub space: Space,
    pub ncomp: usize,
    /// Element-local dofs (functions x components).
    pub nrdof_local: usize,
    /// Free nodes carrying the modified dofs.
    pub nodes: Vec<NodeId>,
    /// Offset of each node's block in the modified dof vector.
    pub offsets: Vec<usize>,
    pub nrdof_mod: usize,
    /// Expansion local = C * modified.
    pub c: DMatrix<f64>,
    pub dirichlet: Vec<bool>,
    pub bubble: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct ModifiedElement {
    pub mdle: NodeId,
    pub attrs: Vec<ModifiedAttr>,
}

/// Number of element-local functions of an attribute.
pub fn local_nfun(layout: &ShapeLayout, is_trace: bool) -> usize {
    if is_trace {
        layout.nrdof_interface()
    } else {
        layout.nrdof()
    }
}

fn modified_attr(mesh: &Mesh, mdle: NodeId, attr: usize) -> Result<ModifiedAttr> {
    let a = mesh.attr_layout()[attr];
    let order = mesh.element_order(mdle);
    let layout = ShapeLayout::new(a.space, &order)?;
    let nodes27 = mesh.element_nodes(mdle);
    let mut exp = Expander::new(mesh, a.space, a.is_trace);
    let mut node_rows: Vec<Arc<Vec<ExpRow>>> = Vec::with_capacity(NNODE);
    let mut free: Vec<NodeId> = Vec::new();
    let mut seen: HashMap<NodeId, usize> = HashMap::new();
    for (i, &id) in nodes27.iter().enumerate() {
        let range = &layout.node_ranges[i];
        let nfun = if a.is_trace && i == NNODE - 1 { 0 } else { range.len() };
        let rows = exp.expand(id)?;
        if rows.len() != nfun {
            return Err(Error::Contract(format!(
                "element {mdle}: node {id} has {} functions, layout expects {nfun}",
                rows.len()
            )));
        }
        for row in rows.iter() {
            for &(n, _, _) in row {
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(n) {
                    e.insert(free.len());
                    free.push(n);
                }
            }
        }
        node_rows.push(rows);
    }
    let nc = a.ncomp;
    let mut offsets = Vec::with_capacity(free.len());
    let mut total = 0;
    for &n in &free {
        offsets.push(total);
        total += node_nfun_space(mesh, n, a.space, a.is_trace) * nc;
    }
    let nloc = local_nfun(&layout, a.is_trace) * nc;
    let mut c = DMatrix::<f64>::zeros(nloc, total);
    let mut f = 0;
    for rows in &node_rows {
        for row in rows.iter() {
            for &(n, k, v) in row {
                let base = offsets[seen[&n]] + k * nc;
                for comp in 0..nc {
                    c[(f * nc + comp, base + comp)] += v;
                }
            }
            f += 1;
        }
    }
    let off = mesh.comp_offset(attr);
    let mut dirichlet = vec![false; total];
    let mut bubble = vec![false; total];
    for (j, &n) in free.iter().enumerate() {
        let node = mesh.node(n);
        let nf = node_nfun_space(mesh, n, a.space, a.is_trace);
        for k in 0..nf {
            for comp in 0..nc {
                let d = offsets[j] + k * nc + comp;
                dirichlet[d] = node.bcond[off + comp] == 1 && node.kind != NodeKind::Middle;
                bubble[d] = n == mdle;
            }
        }
    }
    Ok(ModifiedAttr {
        attr,
        space: a.space,
        ncomp: nc,
        nrdof_local: nloc,
        nodes: free,
        offsets,
        nrdof_mod: total,
        c,
        dirichlet,
        bubble,
    })
}

/// Modified element for all attributes.
pub fn modified_element(mesh: &Mesh, mdle: NodeId) -> Result<ModifiedElement> {
    mesh.element_info(mdle)?;
    let attrs = (0..mesh.attr_layout().len())
        .map(|a| modified_attr(mesh, mdle, a))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModifiedElement { mdle, attrs })
}

/// Own-function coefficients of any node in use, constrained nodes
/// synthesized from their parents (`nfun * ncomp` values).
pub fn node_coefficients(mesh: &Mesh, id: NodeId, attr: usize) -> Result<Vec<f64>> {
    let a = mesh.attr_layout()[attr];
    let mut exp = Expander::new(mesh, a.space, a.is_trace);
    let rows = exp.expand(id)?;
    let nc = a.ncomp;
    let mut out = vec![0.0; rows.len() * nc];
    for (r, row) in rows.iter().enumerate() {
        for &(n, k, v) in row {
            let d = stored_dofs(mesh, n, attr)?;
            for comp in 0..nc {
                out[r * nc + comp] += v * d[k * nc + comp];
            }
        }
    }
    Ok(out)
}

fn stored_dofs(mesh: &Mesh, n: NodeId, attr: usize) -> Result<&[f64]> {
    mesh.node(n).dofs[attr]
        .as_deref()
        .ok_or_else(|| Error::State(format!("node {n} has no solution dofs for attribute {attr}")))
}

/// Element-local coefficient vector of an attribute (functions x components).
pub fn gather_solution(mesh: &Mesh, mdle: NodeId, attr: usize) -> Result<Vec<f64>> {
    mesh.element_info(mdle)?;
    let ma = modified_attr(mesh, mdle, attr)?;
    gather_with(mesh, &ma)
}

/// Physical value of an attribute at master point `xi`: one scalar per
/// component, or three values per component for vector spaces.
pub fn evaluate_solution(mesh: &Mesh, mdle: NodeId, attr: usize, xi: [f64; 3]) -> Result<Vec<f64>> {
    let info = mesh.element_info(mdle)?;
    let lay = mesh.attr_layout()[attr];
    if lay.is_trace {
        return Err(Error::Unsupported("point evaluation of a trace attribute".into()));
    }
    let coef = gather_solution(mesh, mdle, attr)?;
    let layout = ShapeLayout::new(lay.space, &info.norder)?;
    let g = element_geometry(&info.xnod, xi)?;
    let set = piola_transform(&layout.eval(xi), &g);
    let nc = lay.ncomp;
    let mut out = Vec::with_capacity(3 * nc);
    for c in 0..nc {
        if lay.space.is_vector() {
            let mut v = [0.0; 3];
            for (i, s) in set.vec_val.iter().enumerate() {
                for d in 0..3 {
                    v[d] += coef[i * nc + c] * s[d];
                }
            }
            out.extend_from_slice(&v);
        } else {
            out.push(set.val.iter().enumerate().map(|(i, s)| coef[i * nc + c] * s).sum());
        }
    }
    Ok(out)
}

pub(crate) fn gather_with(mesh: &Mesh, ma: &ModifiedAttr) -> Result<Vec<f64>> {
    let mut u = DVector::<f64>::zeros(ma.nrdof_mod);
    for (j, &n) in ma.nodes.iter().enumerate() {
        let d = stored_dofs(mesh, n, ma.attr)?;
        for (k, v) in d.iter().enumerate() {
            u[ma.offsets[j] + k] = *v;
        }
    }
    Ok((&ma.c * u).iter().copied().collect())
}

// ---- Dirichlet data and geometry dofs

/// Dirichlet data: value and gradient at a physical point.
pub type DirichletFn<'a> = &'a (dyn Fn([f64; 3]) -> (f64, [f64; 3]) + Sync);

/// Projection-based interpolation of H1 Dirichlet data onto all free
/// Dirichlet nodes (vertex values, then edge and face H1-seminorm
/// projections of the remainder).
pub fn update_ddof(mesh: &mut Mesh, physics: &PhysicsTable, data: DirichletFn) -> Result<()> {
    let layout = mesh.attr_layout().to_vec();
    for (attr, a) in layout.iter().enumerate() {
        let off = mesh.comp_offset(attr);
        let has_bc = (1..=mesh.nrnods()).any(|id| {
            let n = mesh.node(id);
            n.kind != NodeKind::Middle && n.bcond[off..off + a.ncomp].contains(&1)
        });
        if !has_bc {
            continue;
        }
        if a.space != Space::H1 {
            return Err(Error::Unsupported(format!(
                "Dirichlet data for {:?} attribute {}",
                a.space, physics.attrs[attr].nickname
            )));
        }
        let homogeneous = physics.attrs.get(attr).is_some_and(|p| p.homogeneous_dirichlet);
        for kind in [NodeKind::Vertex, NodeKind::Edge, NodeKind::Face] {
            for id in 1..=mesh.nrnods() {
                let n = mesh.node(id);
                if n.kind != kind || mesh.status(id) != NodeStatus::Free {
                    continue;
                }
                let mask: Vec<bool> = (0..a.ncomp).map(|c| n.bcond[off + c] == 1).collect();
                if !mask.contains(&true) {
                    continue;
                }
                let nf = mesh.node_nfun(id, attr);
                let vals = if homogeneous {
                    vec![0.0; nf]
                } else {
                    match kind {
                        NodeKind::Vertex => vec![data(n.coords).0],
                        NodeKind::Edge => edge_projection(mesh, id, attr, data)?,
                        _ => face_projection(mesh, id, attr, data)?,
                    }
                };
                let mut dofs = mesh.node(id).dofs[attr]
                    .clone()
                    .unwrap_or_else(|| vec![0.0; nf * a.ncomp]);
                for k in 0..nf {
                    for c in 0..a.ncomp {
                        if mask[c] {
                            dofs[k * a.ncomp + c] = vals[k];
                        }
                    }
                }
                mesh.set_dofs(id, attr, dofs)?;
            }
        }
    }
    Ok(())
}

/// First-component own coefficients of a closure node (vertex or edge).
fn closure_values(mesh: &Mesh, id: NodeId, attr: usize) -> Result<Vec<f64>> {
    let nc = mesh.attr_layout()[attr].ncomp;
    let all = node_coefficients(mesh, id, attr)?;
    Ok(all.iter().step_by(nc).copied().collect())
}

fn solve_small(g: DMatrix<f64>, r: DVector<f64>) -> Result<Vec<f64>> {
    if g.nrows() == 0 {
        return Ok(Vec::new());
    }
    let chol = g
        .cholesky()
        .ok_or_else(|| Error::Contract("singular projection matrix".into()))?;
    Ok(chol.solve(&r).iter().copied().collect())
}

fn edge_projection(mesh: &Mesh, id: NodeId, attr: usize, data: DirichletFn) -> Result<Vec<f64>> {
    let n = mesh.node(id);
    let p = n.order;
    let nb = p as usize - 1;
    let v = [n.closure()[0], n.closure()[1]];
    let x0 = mesh.node(v[0]).coords;
    let x1 = mesh.node(v[1]).coords;
    let u0 = closure_values(mesh, v[0], attr)?[0];
    let u1 = closure_values(mesh, v[1], attr)?[0];
    let (pts, wts) = gauss_1d(p as usize + 2)?;
    let mut g = DMatrix::<f64>::zeros(nb, nb);
    let mut r = DVector::<f64>::zeros(nb);
    let (mut val, mut der) = (Vec::new(), Vec::new());
    for (s, w) in pts.iter().zip(&wts) {
        let x: [f64; 3] = std::array::from_fn(|d| x0[d] + s * (x1[d] - x0[d]));
        let (_, grad) = data(x);
        let du: f64 = (0..3).map(|d| grad[d] * (x1[d] - x0[d])).sum();
        let rem = du - (u1 - u0);
        h1_basis_1d(p as usize, *s, &mut val, &mut der);
        for i in 0..nb {
            for j in 0..nb {
                g[(i, j)] += w * der[2 + i] * der[2 + j];
            }
            r[i] += w * der[2 + i] * rem;
        }
    }
    solve_small(g, r)
}

fn face_projection(mesh: &Mesh, id: NodeId, attr: usize, data: DirichletFn) -> Result<Vec<f64>> {
    let n = mesh.node(id);
    let [p1, p2, _] = n.order_array();
    let c = n.closure().to_vec();
    let xv: Vec<[f64; 3]> = c[..4].iter().map(|&v| mesh.node(v).coords).collect();
    let edges: [u32; 4] = [0, 1, 2, 3].map(|k| mesh.node(c[4 + k]).order);
    // lift coefficients in closure order: 4 vertices then 4 edges
    let mut lift = Vec::new();
    for &q in &c[..8] {
        lift.extend(closure_values(mesh, q, attr)?);
    }
    let pmax = [p1, p2].iter().chain(&edges).copied().max().unwrap_or(1) as usize;
    let nb1 = p1 as usize - 1;
    let nb2 = p2 as usize - 1;
    let nb = nb1 * nb2;
    let (pts, wts) = gauss_1d(pmax + 2)?;
    let mut g = DMatrix::<f64>::zeros(nb, nb);
    let mut r = DVector::<f64>::zeros(nb);
    let (mut a, mut da, mut b, mut db) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (t1, w1) in pts.iter().zip(&wts) {
        for (t2, w2) in pts.iter().zip(&wts) {
            let w = w1 * w2;
            h1_basis_1d(pmax, *t1, &mut a, &mut da);
            h1_basis_1d(pmax, *t2, &mut b, &mut db);
            // bilinear face map and its tangents
            let bl = [a[0] * b[0], a[1] * b[0], a[1] * b[1], a[0] * b[1]];
            let d1 = [da[0] * b[0], da[1] * b[0], da[1] * b[1], da[0] * b[1]];
            let d2 = [a[0] * db[0], a[1] * db[0], a[1] * db[1], a[0] * db[1]];
            let mut x = [0.0; 3];
            let mut xt = [[0.0; 3]; 2];
            for k in 0..4 {
                for d in 0..3 {
                    x[d] += bl[k] * xv[k][d];
                    xt[0][d] += d1[k] * xv[k][d];
                    xt[1][d] += d2[k] * xv[k][d];
                }
            }
            let (_, grad) = data(x);
            let mut gt = [0.0; 2];
            for q in 0..2 {
                gt[q] = (0..3).map(|d| grad[d] * xt[q][d]).sum();
            }
            // gradient of the lift
            let mut lg = [0.0; 2];
            let mut li = 0;
            let mut add = |g1: f64, g2: f64, coef: f64| {
                lg[0] += coef * g1;
                lg[1] += coef * g2;
            };
            for k in 0..4 {
                add(d1[k], d2[k], lift[li]);
                li += 1;
            }
            for k in 2..=edges[0] as usize {
                add(da[k] * b[0], a[k] * db[0], lift[li]);
                li += 1;
            }
            for k in 2..=edges[1] as usize {
                add(da[1] * b[k], a[1] * db[k], lift[li]);
                li += 1;
            }
            for k in 2..=edges[2] as usize {
                add(da[k] * b[1], a[k] * db[1], lift[li]);
                li += 1;
            }
            for k in 2..=edges[3] as usize {
                add(da[0] * b[k], a[0] * db[k], lift[li]);
                li += 1;
            }
            let rem = [gt[0] - lg[0], gt[1] - lg[1]];
            let mut bg = Vec::with_capacity(nb);
            for i in 2..=p1 as usize {
                for j in 2..=p2 as usize {
                    bg.push([da[i] * b[j], a[i] * db[j]]);
                }
            }
            for i in 0..nb {
                for j in 0..nb {
                    g[(i, j)] += w * (bg[i][0] * bg[j][0] + bg[i][1] * bg[j][1]);
                }
                r[i] += w * (bg[i][0] * rem[0] + bg[i][1] * rem[1]);
            }
        }
    }
    solve_small(g, r)
}

/// Recompute coordinates of vertices created by refinement from their
/// father entity (edge midpoint, face center, element center).
pub fn update_gdof(mesh: &mut Mesh) {
    for id in 1..=mesh.nrnods() {
        let n = mesh.node(id);
        if n.kind != NodeKind::Vertex {
            continue;
        }
        let Some(f) = n.father else { continue };
        let fc = mesh.node(f).closure();
        let nv = match mesh.node(f).kind {
            NodeKind::Edge => 2,
            NodeKind::Face => 4,
            _ => 8,
        };
        let mut x = [0.0; 3];
        for &v in &fc[..nv] {
            let c = mesh.node(v).coords;
            for d in 0..3 {
                x[d] += c[d] / nv as f64;
            }
        }
        mesh.node_mut(id).coords = x;
    }
}

//! Global assembly with constrained approximation, Dirichlet elimination,
//! static condensation of bubbles, sparse solve and bubble recovery.

use nalgebra::{DMatrix, DVector};

use crate::conformity::{modified_element, ModifiedElement};
use crate::error::{Error, Result};
use crate::exec::{try_map_ordered, ExecMode};
use crate::mesh::{Mesh, NodeId, NodeKind, NodeStatus};
use crate::physics::PhysicsTable;

/// Element matrices in attribute blocks.
#[derive(Debug, Clone)]
pub struct AlocBloc {
    pub itest: Vec<bool>,
    pub itrial: Vec<bool>,
    /// `aloc[i][j]`: test attribute `i` x trial attribute `j`.
    pub aloc: Vec<Vec<DMatrix<f64>>>,
    pub bloc: Vec<DVector<f64>>,
}

impl AlocBloc {
    /// All-zero blocks for the given per-attribute local dof counts.
    pub fn zeros(sizes: &[usize]) -> Self {
        let n = sizes.len();
        Self {
            itest: vec![false; n],
            itrial: vec![false; n],
            aloc: (0..n)
                .map(|i| (0..n).map(|j| DMatrix::zeros(sizes[i], sizes[j])).collect())
                .collect(),
            bloc: sizes.iter().map(|&s| DVector::zeros(s)).collect(),
        }
    }

    pub fn nr_physa(&self) -> usize {
        self.bloc.len()
    }
}

/// Element routine: mesh snapshot and middle node to element matrices.
pub type ElemFn<'a> = &'a (dyn Fn(&Mesh, NodeId) -> Result<AlocBloc> + Sync);

// ---- static condensation

/// Factors retained for bubble recovery.
#[derive(Debug, Clone)]
pub struct StcFactors {
    pub bubble: Vec<usize>,
    pub interface: Vec<usize>,
    kbb: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    kbi: DMatrix<f64>,
    bb: DVector<f64>,
}

impl StcFactors {
    /// `u_b = K_bb^{-1} (b_b - K_bi u_i)`.
    pub fn recover(&self, ui: &[f64]) -> Vec<f64> {
        let ui = DVector::from_column_slice(ui);
        let rhs = &self.bb - &self.kbi * ui;
        self.kbb.solve(&rhs).iter().copied().collect()
    }
}

#[derive(Debug, Clone)]
pub struct CondensedLocal {
    pub k: DMatrix<f64>,
    pub b: DVector<f64>,
    pub factors: Option<StcFactors>,
}

/// Eliminate the dofs flagged in `bubble` by a Schur complement.
pub fn static_condense(k: &DMatrix<f64>, b: &DVector<f64>, bubble: &[bool], store: bool) -> Result<CondensedLocal> {
    let n = k.nrows();
    if k.ncols() != n || b.len() != n || bubble.len() != n {
        return Err(Error::Dimension("static condensation input sizes".into()));
    }
    let bi: Vec<usize> = (0..n).filter(|&i| bubble[i]).collect();
    let ii: Vec<usize> = (0..n).filter(|&i| !bubble[i]).collect();
    if bi.is_empty() {
        return Ok(CondensedLocal {
            k: k.clone(),
            b: b.clone(),
            factors: None,
        });
    }
    let kbb = k.select_rows(&bi).select_columns(&bi);
    let kbi = k.select_rows(&bi).select_columns(&ii);
    let kib = k.select_rows(&ii).select_columns(&bi);
    let kii = k.select_rows(&ii).select_columns(&ii);
    let bb = b.select_rows(&bi);
    let bi_vec = b.select_rows(&ii);
    let chol = kbb
        .cholesky()
        .ok_or_else(|| Error::Condensation("bubble block is not positive definite".into()))?;
    let x = chol.solve(&kbi);
    let y = chol.solve(&bb);
    let kc = kii - &kib * x;
    let bc = bi_vec - &kib * y;
    Ok(CondensedLocal {
        k: kc,
        b: bc,
        factors: store.then_some(StcFactors {
            bubble: bi,
            interface: ii,
            kbb: chol,
            kbi,
            bb,
        }),
    })
}

// ---- sparse system and solvers

/// Compressed-row sparse matrix plus right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl SparseSystem {
    /// Build from coordinate triplets, summing duplicates.
    pub fn from_triplets(n: usize, mut trip: Vec<(usize, usize, f64)>, rhs: Vec<f64>) -> Self {
        trip.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::with_capacity(trip.len());
        let mut vals: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in trip {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            col_idx,
            vals,
            rhs,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.col_idx[k]];
            }
            y[i] = s;
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&k| self.col_idx[k] == i)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                a[(i, self.col_idx[k])] += self.vals[k];
            }
        }
        a
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let a = self.to_dense();
        let scale = a.amax().max(f64::MIN_POSITIVE);
        (&a - a.transpose()).amax() / scale
    }

    /// `max |A x - b|` over all rows.
    pub fn residual_inf(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y.iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgInfo {
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients; stops at relative residual `tol`.
pub fn cg_solve(sys: &SparseSystem, tol: f64, maxit: usize) -> Result<(Vec<f64>, CgInfo)> {
    let n = sys.n;
    let bnorm = sys.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, CgInfo { iterations: 0, residual: 0.0 }));
    }
    let dinv: Vec<f64> = sys
        .diag()
        .iter()
        .map(|&d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = sys.rhs.clone();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    let mut res = 1.0;
    for it in 1..=maxit {
        sys.matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::Solve { iterations: it, residual: res });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
        if res <= tol {
            return Ok((x, CgInfo { iterations: it, residual: res }));
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solve {
        iterations: maxit,
        residual: res,
    })
}

/// Dense Cholesky (LU fallback) solve.
pub fn dense_solve(sys: &SparseSystem) -> Result<Vec<f64>> {
    let a = sys.to_dense();
    let b = DVector::from_column_slice(&sys.rhs);
    if let Some(ch) = a.clone().cholesky() {
        return Ok(ch.solve(&b).iter().copied().collect());
    }
    a.lu()
        .solve(&b)
        .map(|x| x.iter().copied().collect())
        .ok_or(Error::Solve {
            iterations: 0,
            residual: f64::INFINITY,
        })
}

// ---- assembly driver

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    /// Dense for at most [`DENSE_LIMIT`] dofs, CG otherwise.
    Auto,
    Cg,
    Dense,
}

pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub solver: SolverKind,
    pub tol: f64,
    pub maxit: usize,
    /// ISTC_FLAG: condense bubbles before assembly.
    pub istc: bool,
    /// STORE_STC: keep Schur factors for recovery.
    pub store_stc: bool,
    /// Symmetry hint: 'H' (Hermitian/symmetric), 'G' (general), 'P' (SPD).
    pub symmetry: char,
    pub exec: ExecMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            solver: SolverKind::Auto,
            tol: 1e-12,
            maxit: 20000,
            istc: true,
            store_stc: false,
            symmetry: 'H',
            exec: ExecMode::default(),
        }
    }
}

/// Role of one dof of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Dirichlet,
    Global(usize),
    Bubble,
}

/// Global numbering: nodes in id order, enabled attributes in order,
/// functions then components.
#[derive(Debug, Clone)]
pub struct Numbering {
    slots: Vec<Vec<Vec<Slot>>>,
    pub ndof: usize,
}

impl Numbering {
    pub fn new(mesh: &Mesh, enabled: &[bool], istc: bool) -> Self {
        let layout = mesh.attr_layout();
        let mut slots = vec![Vec::new(); mesh.nrnods()];
        let mut ndof = 0;
        for id in 1..=mesh.nrnods() {
            let node = mesh.node(id);
            let mut per_attr = vec![Vec::new(); layout.len()];
            if mesh.status(id) == NodeStatus::Free {
                for (a, l) in layout.iter().enumerate() {
                    if !enabled[a] {
                        continue;
                    }
                    let off = mesh.comp_offset(a);
                    let nf = mesh.node_nfun(id, a);
                    let mut s = Vec::with_capacity(nf * l.ncomp);
                    for _ in 0..nf {
                        for c in 0..l.ncomp {
                            let slot = if node.kind == NodeKind::Middle {
                                if istc {
                                    Slot::Bubble
                                } else {
                                    ndof += 1;
                                    Slot::Global(ndof - 1)
                                }
                            } else if node.bcond[off + c] == 1 {
                                Slot::Dirichlet
                            } else {
                                ndof += 1;
                                Slot::Global(ndof - 1)
                            };
                            s.push(slot);
                        }
                    }
                    per_attr[a] = s;
                }
            }
            slots[id - 1] = per_attr;
        }
        Self { slots, ndof }
    }

    fn slot(&self, node: NodeId, attr: usize, k: usize) -> Slot {
        self.slots[node - 1][attr][k]
    }

    /// Global index of a node dof, if it is a global unknown.
    pub fn global(&self, node: NodeId, attr: usize, k: usize) -> Option<usize> {
        match self.slots[node - 1].get(attr)?.get(k)? {
            Slot::Global(g) => Some(*g),
            _ => None,
        }
    }
}

/// Per-element condensed contribution.
#[derive(Debug, Clone)]
struct ElemContribution {
    gidx: Vec<usize>,
    k: DMatrix<f64>,
    b: DVector<f64>,
    factors: Option<StcFactors>,
}

/// Modified element matrix over enabled attributes, with dof roles.
struct ModifiedSystem {
    k: DMatrix<f64>,
    b: DVector<f64>,
    /// (attr, node, dof index in node) per modified dof
    map: Vec<(usize, NodeId, usize)>,
}

fn modified_system(
    mesh: &Mesh,
    me: &ModifiedElement,
    ab: &AlocBloc,
    enabled: &[bool],
) -> Result<ModifiedSystem> {
    let na = me.attrs.len();
    if ab.nr_physa() != na || ab.itest.len() != na || ab.itrial.len() != na || ab.aloc.len() != na {
        return Err(Error::Contract(format!(
            "element {}: element routine returned {} attribute blocks, expected {na}",
            me.mdle,
            ab.nr_physa()
        )));
    }
    let mut offs = vec![0; na + 1];
    for a in 0..na {
        offs[a + 1] = offs[a] + if enabled[a] { me.attrs[a].nrdof_mod } else { 0 };
    }
    let n = offs[na];
    let mut k = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    for i in 0..na {
        if !enabled[i] || !ab.itest[i] {
            continue;
        }
        let ci = &me.attrs[i].c;
        if ab.bloc[i].len() != ci.nrows() {
            return Err(Error::Contract(format!(
                "element {}: load block {i} has {} rows, expected {}",
                me.mdle,
                ab.bloc[i].len(),
                ci.nrows()
            )));
        }
        let ident_i = ci.is_square() && ci.is_identity(0.0);
        let bi = if ident_i { ab.bloc[i].clone() } else { ci.tr_mul(&ab.bloc[i]) };
        b.rows_mut(offs[i], bi.len()).copy_from(&bi);
        for j in 0..na {
            if !enabled[j] || !ab.itrial[j] {
                continue;
            }
            let cj = &me.attrs[j].c;
            let blk = &ab.aloc[i][j];
            if blk.nrows() != ci.nrows() || blk.ncols() != cj.nrows() {
                return Err(Error::Contract(format!(
                    "element {}: block ({i},{j}) is {}x{}, expected {}x{}",
                    me.mdle,
                    blk.nrows(),
                    blk.ncols(),
                    ci.nrows(),
                    cj.nrows()
                )));
            }
            let ident_j = cj.is_square() && cj.is_identity(0.0);
            let kij = match (ident_i, ident_j) {
                (true, true) => blk.clone(),
                (true, false) => blk * cj,
                (false, true) => ci.transpose() * blk,
                (false, false) => ci.transpose() * (blk * cj),
            };
            k.view_mut((offs[i], offs[j]), (kij.nrows(), kij.ncols()))
                .copy_from(&kij);
        }
    }
    let mut map = Vec::with_capacity(n);
    for (a, ma) in me.attrs.iter().enumerate() {
        if !enabled[a] {
            continue;
        }
        for (j, &node) in ma.nodes.iter().enumerate() {
            let nf = mesh.node_nfun(node, a) * ma.ncomp;
            for d in 0..nf {
                map.push((a, node, d));
            }
            debug_assert_eq!(ma.offsets[j] + nf, ma.offsets.get(j + 1).copied().unwrap_or(ma.nrdof_mod));
        }
    }
    Ok(ModifiedSystem { k, b, map })
}

fn dirichlet_value(mesh: &Mesh, node: NodeId, attr: usize, d: usize) -> Result<f64> {
    mesh.node(node).dofs[attr]
        .as_ref()
        .map(|v| v[d])
        .ok_or_else(|| Error::State(format!("Dirichlet dofs of node {node} not set (run update_ddof)")))
}

/// Element contribution after Dirichlet elimination and condensation.
fn element_contribution(
    mesh: &Mesh,
    mdle: NodeId,
    elem_fn: ElemFn,
    enabled: &[bool],
    num: &Numbering,
    store: bool,
) -> Result<(ElemContribution, Vec<(usize, NodeId, usize)>, Vec<usize>, Vec<f64>)> {
    let me = modified_element(mesh, mdle)?;
    let ab = elem_fn(mesh, mdle)?;
    let ms = modified_system(mesh, &me, &ab, enabled)?;
    let mut known = Vec::new();
    let mut free = Vec::new();
    let mut bubble = Vec::new();
    for (i, &(a, node, d)) in ms.map.iter().enumerate() {
        match num.slot(node, a, d) {
            Slot::Dirichlet => known.push(i),
            Slot::Global(_) => free.push(i),
            Slot::Bubble => bubble.push(i),
        }
    }
    let ud: Vec<f64> = known
        .iter()
        .map(|&i| {
            let (a, node, d) = ms.map[i];
            dirichlet_value(mesh, node, a, d)
        })
        .collect::<Result<_>>()?;
    // keep = free followed by bubble
    let keep: Vec<usize> = free.iter().chain(&bubble).copied().collect();
    let kkk = ms.k.select_rows(&keep).select_columns(&keep);
    let mut bk = ms.b.select_rows(&keep);
    if !known.is_empty() {
        let kkd = ms.k.select_rows(&keep).select_columns(&known);
        bk -= kkd * DVector::from_column_slice(&ud);
    }
    let is_bubble: Vec<bool> = (0..keep.len()).map(|i| i >= free.len()).collect();
    let cond = static_condense(&kkk, &bk, &is_bubble, store)?;
    let gidx: Vec<usize> = free
        .iter()
        .map(|&i| {
            let (a, node, d) = ms.map[i];
            match num.slot(node, a, d) {
                Slot::Global(g) => g,
                _ => unreachable!(),
            }
        })
        .collect();
    Ok((
        ElemContribution {
            gidx,
            k: cond.k,
            b: cond.b,
            factors: if store { cond.factors } else { None },
        },
        ms.map,
        bubble,
        ud,
    ))
}

/// Assembled global system with the data needed for storing the solution.
pub struct Assembled {
    pub system: SparseSystem,
    pub numbering: Numbering,
    contributions: Vec<ElemContribution>,
    elements: Vec<NodeId>,
}

pub fn assemble(
    mesh: &Mesh,
    physics: &PhysicsTable,
    elem_fn: ElemFn,
    opts: &SolverOptions,
) -> Result<Assembled> {
    let enabled: Vec<bool> = physics.attrs.iter().map(|a| a.enabled).collect();
    if enabled.len() != mesh.attr_layout().len() {
        return Err(Error::Contract("physics table does not match the mesh".into()));
    }
    let num = Numbering::new(mesh, &enabled, opts.istc);
    let elements = mesh.elem_order().to_vec();
    let contributions = try_map_ordered(opts.exec, &elements, |&m| {
        element_contribution(mesh, m, elem_fn, &enabled, &num, opts.store_stc).map(|r| r.0)
    })?;
    let mut trip = Vec::new();
    let mut rhs = vec![0.0; num.ndof];
    for c in &contributions {
        for (a, &ga) in c.gidx.iter().enumerate() {
            rhs[ga] += c.b[a];
            for (b, &gb) in c.gidx.iter().enumerate() {
                trip.push((ga, gb, c.k[(a, b)]));
            }
        }
    }
    let system = SparseSystem::from_triplets(num.ndof, trip, rhs);
    Ok(Assembled {
        system,
        numbering: num,
        contributions,
        elements,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub ndof: usize,
    pub nreles: usize,
    pub iterations: usize,
    pub residual: f64,
}

pub fn solve_system(sys: &SparseSystem, opts: &SolverOptions) -> Result<(Vec<f64>, CgInfo)> {
    let dense = match opts.solver {
        SolverKind::Dense => true,
        SolverKind::Cg => false,
        SolverKind::Auto => sys.n <= DENSE_LIMIT,
    };
    if dense {
        let x = dense_solve(sys)?;
        let bn = sys.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let res = sys.residual_inf(&x) / bn;
        Ok((x, CgInfo { iterations: 1, residual: res }))
    } else {
        cg_solve(sys, opts.tol, opts.maxit)
    }
}

/// Assemble, solve, and store all dofs (interface and recovered bubbles).
pub fn assemble_and_solve(
    mesh: &mut Mesh,
    physics: &PhysicsTable,
    elem_fn: ElemFn,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    let asm = assemble(mesh, physics, elem_fn, opts)?;
    let (x, info) = solve_system(&asm.system, opts)?;
    log::info!(
        "solved {} dofs on {} elements ({} iterations, residual {:.3e})",
        asm.numbering.ndof,
        asm.elements.len(),
        info.iterations,
        info.residual
    );
    let enabled: Vec<bool> = physics.attrs.iter().map(|a| a.enabled).collect();
    // interface dofs
    for id in 1..=mesh.nrnods() {
        for a in 0..enabled.len() {
            let slots = &asm.numbering.slots[id - 1][a];
            if slots.is_empty() || !slots.iter().any(|s| matches!(s, Slot::Global(_))) {
                continue;
            }
            let mut v = mesh.node(id).dofs[a].clone().unwrap_or_else(|| vec![0.0; slots.len()]);
            if v.len() != slots.len() {
                v = vec![0.0; slots.len()];
            }
            for (k, s) in slots.iter().enumerate() {
                if let Slot::Global(g) = s {
                    v[k] = x[*g];
                }
            }
            mesh.set_dofs(id, a, v)?;
        }
    }
    // bubbles
    let snapshot: &Mesh = mesh;
    let num = &asm.numbering;
    let recovered = try_map_ordered(opts.exec, &(0..asm.elements.len()).collect::<Vec<_>>(), |&e| {
        recover_element(snapshot, elem_fn, &enabled, num, asm.elements[e], &asm.contributions[e], &x)
    })?;
    for (m, vals) in asm.elements.iter().zip(recovered) {
        for (a, v) in vals {
            mesh.set_dofs(*m, a, v)?;
        }
    }
    Ok(SolveReport {
        ndof: asm.numbering.ndof,
        nreles: asm.elements.len(),
        iterations: info.iterations,
        residual: info.residual,
    })
}

/// Bubble dofs of one element, per attribute with a bubble block.
fn recover_element(
    mesh: &Mesh,
    elem_fn: ElemFn,
    enabled: &[bool],
    num: &Numbering,
    mdle: NodeId,
    contrib: &ElemContribution,
    x: &[f64],
) -> Result<Vec<(usize, Vec<f64>)>> {
    let has_bubbles = (0..enabled.len()).any(|a| {
        num.slots[mdle - 1]
            .get(a)
            .is_some_and(|s| s.contains(&Slot::Bubble))
    });
    if !has_bubbles {
        return Ok(Vec::new());
    }
    let ui: Vec<f64> = contrib.gidx.iter().map(|&g| x[g]).collect();
    let (ub, map, bubble) = match &contrib.factors {
        Some(f) => {
            // stored factors: the modified map is still needed for placement
            let me = modified_element(mesh, mdle)?;
            let map = bubble_map(mesh, &me, enabled, num);
            (f.recover(&ui), map.0, map.1)
        }
        None => {
            let (c, map, bubble, _) = element_contribution(mesh, mdle, elem_fn, enabled, num, true)?;
            let f = c
                .factors
                .ok_or_else(|| Error::Condensation("missing factors for recovery".into()))?;
            (f.recover(&ui), map, bubble)
        }
    };
    let mut out: Vec<(usize, Vec<f64>)> = Vec::new();
    for (k, &i) in bubble.iter().enumerate() {
        let (a, node, d) = map[i];
        debug_assert_eq!(node, mdle);
        let nd = mesh.node_nfun(mdle, a) * mesh.attr_layout()[a].ncomp;
        let pos = match out.iter().position(|(aa, _)| *aa == a) {
            Some(p) => p,
            None => {
                out.push((a, vec![0.0; nd]));
                out.len() - 1
            }
        };
        out[pos].1[d] = ub[k];
    }
    Ok(out)
}

fn bubble_map(
    mesh: &Mesh,
    me: &ModifiedElement,
    enabled: &[bool],
    num: &Numbering,
) -> (Vec<(usize, NodeId, usize)>, Vec<usize>) {
    let mut map = Vec::new();
    for (a, ma) in me.attrs.iter().enumerate() {
        if !enabled[a] {
            continue;
        }
        for &node in &ma.nodes {
            for d in 0..mesh.node_nfun(node, a) * ma.ncomp {
                map.push((a, node, d));
            }
        }
    }
    let bubble = (0..map.len())
        .filter(|&i| {
            let (a, node, d) = map[i];
            num.slot(node, a, d) == Slot::Bubble
        })
        .collect();
    (map, bubble)
}

/// Bubble dofs of a solved element recomputed from its interface solution.
pub fn recover_bubbles(
    mesh: &Mesh,
    physics: &PhysicsTable,
    elem_fn: ElemFn,
    mdle: NodeId,
) -> Result<Vec<(usize, Vec<f64>)>> {
    let enabled: Vec<bool> = physics.attrs.iter().map(|a| a.enabled).collect();
    let num = Numbering::new(mesh, &enabled, true);
    let (c, map, bubble, _) = element_contribution(mesh, mdle, elem_fn, &enabled, &num, true)?;
    // interface values straight from storage
    let ui: Vec<f64> = {
        let mut free = Vec::new();
        for &(a, node, d) in &map {
            if let Slot::Global(_) = num.slot(node, a, d) {
                let v = mesh.node(node).dofs[a]
                    .as_ref()
                    .ok_or_else(|| Error::State(format!("node {node} unsolved")))?;
                free.push(v[d]);
            }
        }
        free
    };
    let Some(f) = c.factors else {
        return Ok(Vec::new());
    };
    let ub = f.recover(&ui);
    let mut out: Vec<(usize, Vec<f64>)> = Vec::new();
    for (k, &i) in bubble.iter().enumerate() {
        let (a, _, d) = map[i];
        let nd = mesh.node_nfun(mdle, a) * mesh.attr_layout()[a].ncomp;
        let pos = match out.iter().position(|(aa, _)| *aa == a) {
            Some(p) => p,
            None => {
                out.push((a, vec![0.0; nd]));
                out.len() - 1
            }
        };
        out[pos].1[d] = ub[k];
    }
    Ok(out)
}

/// Write element-local coefficients of an attribute into the free nodes of
/// the element (constrained nodes are derived and not written).
pub fn store_solution(mesh: &mut Mesh, mdle: NodeId, attr: usize, dofs: &[f64]) -> Result<()> {
    let info = mesh.element_info(mdle)?;
    let a = mesh.attr_layout()[attr];
    let layout = crate::masterel::ShapeLayout::new(a.space, &info.norder)?;
    let nloc = crate::conformity::local_nfun(&layout, a.is_trace) * a.ncomp;
    if dofs.len() != nloc {
        return Err(Error::Dimension(format!(
            "element {mdle} attribute {attr}: expected {nloc} dofs, got {}",
            dofs.len()
        )));
    }
    for (i, &id) in info.nodes.iter().enumerate() {
        if mesh.status(id) != NodeStatus::Free {
            continue;
        }
        let r = &layout.node_ranges[i];
        if a.is_trace && i == crate::masterel::NNODE - 1 {
            continue;
        }
        let v = dofs[r.start * a.ncomp..r.end * a.ncomp].to_vec();
        if !v.is_empty() {
            mesh.set_dofs(id, attr, v)?;
        }
    }
    Ok(())
}

//! Node-based hp mesh: initial elements, node table with refinement trees,
//! natural-order traversal, h/p refinements and 1-irregularity closure.

mod geomfile;
mod refine;

use std::collections::HashMap;

pub use geomfile::GeometryFile;
pub use refine::{PrefRule, RefinementKind};

use crate::error::{Error, Result};
use crate::masterel::{
    edge_dir, face_tangents, node_dof_count, ElementOrder, OrderTriple, Space, EDGE_VERTS,
    FACE_EDGES, FACE_VERTS, NEDGE, NFACE, NNODE, NVERT,
};
use crate::physics::{decode_bc, PhysicsTable};

/// One-based node number; equals the position in the node table.
pub type NodeId = usize;

/// The only refinement flag accepted by [`Mesh::refine_element`].
pub const KREF_ISO: u32 = 111;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Vertex,
    Edge,
    Face,
    Middle,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    /// Encoded order: 0 (vertex), p (edge), 10*p1+p2 (face), 100*px+10*py+pz (middle).
    pub order: u32,
    pub active: bool,
    pub father: Option<NodeId>,
    /// Edge: `[e1, e2, vm]`. Face: `[q1..q4, ie1..ie4, vc]`. Middle: 8 son middles.
    pub sons: Vec<NodeId>,
    pub ref_kind: u32,
    /// Dirichlet mask per component (flat component index).
    pub bcond: Vec<u8>,
    /// Bitmask of supported attributes.
    pub case: u32,
    pub coords: [f64; 3],
    /// Solution coefficients per attribute, `nfun * ncomp` values, components innermost.
    pub dofs: Vec<Option<Vec<f64>>>,
    /// Edge: 2 vertices. Face: 4 vertices then bottom/right/top/left edges.
    /// Middle: the 27 element nodes.
    pub(crate) closure: Vec<NodeId>,
}

impl Node {
    /// Order triple of the node (`[p,0,0]` for edges, `[p1,p2,0]` for faces).
    pub fn order_array(&self) -> [u32; 3] {
        match self.kind {
            NodeKind::Vertex => [0; 3],
            NodeKind::Edge => [self.order, 0, 0],
            NodeKind::Face => [self.order / 10, self.order % 10, 0],
            NodeKind::Middle => [self.order / 100, (self.order / 10) % 10, self.order % 10],
        }
    }

    pub fn closure(&self) -> &[NodeId] {
        &self.closure
    }

    pub fn is_refined(&self) -> bool {
        !self.sons.is_empty()
    }
}

/// What the rest of the code needs to know about an attribute for storage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttrLayout {
    pub space: Space,
    pub ncomp: usize,
    pub is_trace: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    /// Zero-based initial element index.
    Element(usize),
    Boundary(u8),
}

#[derive(Debug, Clone)]
pub struct InitialElement {
    pub nodes: [NodeId; NNODE],
    pub neighbors: [Neighbor; NFACE],
    /// Supported attributes.
    pub phys: Vec<bool>,
    /// Encoded 6-digit face BC flags, one per flat component.
    pub bcond: Vec<u32>,
}

/// Boundary condition assignment: faces with `boundary_id` get `flag` for
/// component `comp` of attribute `attr`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BcAssignment {
    pub boundary_id: u8,
    pub attr: usize,
    pub comp: usize,
    pub flag: u8,
}

impl BcAssignment {
    pub fn dirichlet(boundary_id: u8, attr: usize) -> Self {
        Self {
            boundary_id,
            attr,
            comp: 0,
            flag: 1,
        }
    }
}

/// Usage state of a node with respect to the current active elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Unused,
    /// In use and carrying its own (global) dofs.
    Free,
    /// In use; trace determined by the (in use) father node.
    Constrained(NodeId),
    /// In use, father unused but a higher ancestor in use.
    Irregular(NodeId),
}

/// Snapshot of one active element.
#[derive(Debug, Clone)]
pub struct ElementInfo {
    pub mdle: NodeId,
    pub norder: ElementOrder,
    pub edge_orient: [u8; NEDGE],
    pub face_orient: [u8; NFACE],
    pub xnod: [[f64; 3]; NVERT],
    pub nodes: [NodeId; NNODE],
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub elems: Vec<InitialElement>,
    nodes: Vec<Node>,
    elem_order: Vec<NodeId>,
    pub maxnods: usize,
    attrs: Vec<AttrLayout>,
    nrindex: usize,
    edge_map: HashMap<[NodeId; 2], NodeId>,
    face_map: HashMap<[NodeId; 4], NodeId>,
    users: Vec<u32>,
    status: Vec<NodeStatus>,
    capacity_warned: bool,
}

fn sorted<const N: usize>(mut a: [NodeId; N]) -> [NodeId; N] {
    a.sort_unstable();
    a
}

impl Mesh {
    /// Build the node-based mesh from a parsed geometry file.
    pub fn generate(
        geom: &GeometryFile,
        physics: &PhysicsTable,
        initial_order: OrderTriple,
        bcs: &[BcAssignment],
    ) -> Result<Self> {
        initial_order.validate()?;
        physics.validate()?;
        let attrs: Vec<AttrLayout> = physics
            .attrs
            .iter()
            .map(|a| AttrLayout {
                space: a.space,
                ncomp: a.ncomp,
                is_trace: a.is_trace,
            })
            .collect();
        let nrelis = geom.elems.len();
        let mut mesh = Mesh {
            elems: Vec::with_capacity(nrelis),
            nodes: Vec::new(),
            elem_order: Vec::new(),
            maxnods: physics.maxnods,
            nrindex: physics.nrindex(),
            attrs,
            edge_map: HashMap::new(),
            face_map: HashMap::new(),
            users: Vec::new(),
            status: Vec::new(),
            capacity_warned: false,
        };
        let case = (1u32 << physics.nr_physa()) - 1;
        for _ in 0..nrelis {
            mesh.push_node(NodeKind::Middle, initial_order.encode(), None, [0.0; 3], case);
        }
        let vbase = mesh.nodes.len();
        for p in &geom.points {
            mesh.push_node(NodeKind::Vertex, 0, None, *p, case);
        }

        // face ownership, for neighbors and consistency checks
        let mut face_users: HashMap<[NodeId; 4], Vec<(usize, usize)>> = HashMap::new();
        let mut tri_map: HashMap<[NodeId; 3], [NodeId; 4]> = HashMap::new();
        let m = initial_order;
        for (iel, el) in geom.elems.iter().enumerate() {
            let v: [NodeId; 8] = el.map(|p| vbase + p + 1);
            let mut distinct = v.to_vec();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() != 8 {
                return Err(Error::Mesh(format!("element {} has repeated vertices", iel + 1)));
            }
            let mut nodes = [0; NNODE];
            nodes[..8].copy_from_slice(&v);
            for e in 0..NEDGE {
                let ev = [v[EDGE_VERTS[e][0]], v[EDGE_VERTS[e][1]]];
                let id = match mesh.edge_map.get(&sorted(ev)) {
                    Some(&id) => {
                        if mesh.nodes[id - 1].closure[..2] != ev {
                            return Err(Error::UnsupportedOrientation(format!(
                                "edge {} of element {} is traversed against its stored direction",
                                e + 1,
                                iel + 1
                            )));
                        }
                        id
                    }
                    None => mesh.create_edge(ev, m.get(edge_dir(e)), None, case),
                };
                nodes[8 + e] = id;
            }
            for f in 0..NFACE {
                let fv = FACE_VERTS[f].map(|k| v[k]);
                let key = sorted(fv);
                for skip in 0..4 {
                    let mut tri = [0; 3];
                    let mut k = 0;
                    for (i, &x) in key.iter().enumerate() {
                        if i != skip {
                            tri[k] = x;
                            k += 1;
                        }
                    }
                    if let Some(other) = tri_map.insert(tri, key) {
                        if other != key {
                            return Err(Error::Mesh(format!(
                                "face {} of element {} is inconsistent with a neighboring face",
                                f + 1,
                                iel + 1
                            )));
                        }
                    }
                }
                let (t1, t2) = face_tangents(f);
                let id = match mesh.face_map.get(&key) {
                    Some(&id) => {
                        if mesh.nodes[id - 1].closure[..4] != fv {
                            return Err(Error::UnsupportedOrientation(format!(
                                "face {} of element {} has a nonzero orientation",
                                f + 1,
                                iel + 1
                            )));
                        }
                        id
                    }
                    None => mesh.create_face(fv, [m.get(t1), m.get(t2)], None, case)?,
                };
                debug_assert!(FACE_EDGES[f]
                    .iter()
                    .zip(&mesh.nodes[id - 1].closure[4..])
                    .all(|(&e, &n)| nodes[8 + e] == n));
                nodes[20 + f] = id;
                let users = face_users.entry(key).or_default();
                users.push((iel, f));
                if users.len() > 2 {
                    return Err(Error::Mesh(format!(
                        "face {} of element {} is shared by more than two elements",
                        f + 1,
                        iel + 1
                    )));
                }
            }
            nodes[26] = iel + 1;
            mesh.nodes[iel].closure = nodes.to_vec();
            mesh.elems.push(InitialElement {
                nodes,
                neighbors: [Neighbor::Boundary(0); NFACE],
                phys: vec![true; physics.nr_physa()],
                bcond: vec![0; mesh.nrindex],
            });
        }
        for users in face_users.values() {
            if let [(a, fa), (b, fb)] = users[..] {
                mesh.elems[a].neighbors[fa] = Neighbor::Element(b);
                mesh.elems[b].neighbors[fb] = Neighbor::Element(a);
            }
        }
        for &(iel, f, id) in &geom.bfaces {
            if iel >= nrelis {
                return Err(Error::Mesh(format!("boundary face on missing element {}", iel + 1)));
            }
            match mesh.elems[iel].neighbors[f] {
                Neighbor::Element(_) => {
                    return Err(Error::Mesh(format!(
                        "face {} of element {} is interior and cannot carry a boundary id",
                        f + 1,
                        iel + 1
                    )))
                }
                Neighbor::Boundary(_) => mesh.elems[iel].neighbors[f] = Neighbor::Boundary(id),
            }
        }
        for bc in bcs {
            if bc.attr >= mesh.attrs.len() || bc.comp >= mesh.attrs[bc.attr].ncomp || bc.flag > 9 {
                return Err(Error::Config(format!("invalid boundary condition {bc:?}")));
            }
            let index = mesh.comp_offset(bc.attr) + bc.comp;
            mesh.set_face_flags(bc.boundary_id, index, bc.flag);
        }
        mesh.derive_dirichlet_masks();
        mesh.refresh();
        Ok(mesh)
    }

    /// Structured brick mesh, convenience wrapper around [`Mesh::generate`].
    pub fn brick(
        n: [usize; 3],
        lo: [f64; 3],
        hi: [f64; 3],
        physics: &PhysicsTable,
        order: OrderTriple,
        bcs: &[BcAssignment],
    ) -> Result<Self> {
        Self::generate(&GeometryFile::brick(n, lo, hi), physics, order, bcs)
    }

    // ---- node table

    fn push_node(
        &mut self,
        kind: NodeKind,
        order: u32,
        father: Option<NodeId>,
        coords: [f64; 3],
        case: u32,
    ) -> NodeId {
        self.nodes.push(Node {
            kind,
            order,
            active: true,
            father,
            sons: Vec::new(),
            ref_kind: 0,
            bcond: vec![0; self.nrindex],
            case,
            coords,
            dofs: vec![None; self.attrs.len()],
            closure: Vec::new(),
        });
        if self.nodes.len() > self.maxnods && !self.capacity_warned {
            log::warn!(
                "node table exceeds MAXNODS={} (growing on the fly)",
                self.maxnods
            );
            self.capacity_warned = true;
        }
        self.nodes.len()
    }

    pub(crate) fn create_edge(
        &mut self,
        v: [NodeId; 2],
        p: u32,
        father: Option<NodeId>,
        case: u32,
    ) -> NodeId {
        let id = self.push_node(NodeKind::Edge, p, father, [0.0; 3], case);
        self.nodes[id - 1].closure = v.to_vec();
        self.edge_map.insert(sorted(v), id);
        id
    }

    /// Face with vertices in parameter order `(0,0),(1,0),(1,1),(0,1)`.
    pub(crate) fn create_face(
        &mut self,
        v: [NodeId; 4],
        p: [u32; 2],
        father: Option<NodeId>,
        case: u32,
    ) -> Result<NodeId> {
        let edges = [[v[0], v[1]], [v[1], v[2]], [v[3], v[2]], [v[0], v[3]]];
        let mut closure = v.to_vec();
        for ev in edges {
            let e = self
                .find_edge(ev)
                .ok_or_else(|| Error::Mesh(format!("missing edge {ev:?} for new face")))?;
            closure.push(e);
        }
        let id = self.push_node(NodeKind::Face, 10 * p[0] + p[1], father, [0.0; 3], case);
        self.nodes[id - 1].closure = closure;
        self.face_map.insert(sorted(v), id);
        Ok(id)
    }

    pub(crate) fn find_edge(&self, v: [NodeId; 2]) -> Option<NodeId> {
        self.edge_map.get(&sorted(v)).copied()
    }

    pub(crate) fn find_face(&self, v: [NodeId; 4]) -> Option<NodeId> {
        self.face_map.get(&sorted(v)).copied()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id - 1]
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id - 1]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn nrnods(&self) -> usize {
        self.nodes.len()
    }

    pub fn nrelis(&self) -> usize {
        self.elems.len()
    }

    /// Number of active elements.
    pub fn nreles(&self) -> usize {
        self.elem_order.len()
    }

    /// Active middle nodes in natural order.
    pub fn elem_order(&self) -> &[NodeId] {
        &self.elem_order
    }

    pub fn attr_layout(&self) -> &[AttrLayout] {
        &self.attrs
    }

    pub fn nrindex(&self) -> usize {
        self.nrindex
    }

    pub fn comp_offset(&self, attr: usize) -> usize {
        self.attrs[..attr].iter().map(|a| a.ncomp).sum()
    }

    pub fn status(&self, id: NodeId) -> NodeStatus {
        self.status[id - 1]
    }

    /// Number of active elements referencing the node.
    pub fn usage(&self, id: NodeId) -> u32 {
        self.users[id - 1]
    }

    /// Number of shape functions the node owns for an attribute (per component).
    pub fn node_nfun(&self, id: NodeId, attr: usize) -> usize {
        let n = self.node(id);
        let a = self.attrs[attr];
        if a.is_trace && n.kind == NodeKind::Middle {
            return 0;
        }
        node_dof_count(a.space, n.kind, n.order_array())
    }

    pub(crate) fn set_dofs(&mut self, id: NodeId, attr: usize, values: Vec<f64>) -> Result<()> {
        let expect = self.node_nfun(id, attr) * self.attrs[attr].ncomp;
        if values.len() != expect {
            return Err(Error::Dimension(format!(
                "node {id} attribute {attr}: expected {expect} dofs, got {}",
                values.len()
            )));
        }
        self.nodes[id - 1].dofs[attr] = Some(values);
        Ok(())
    }

    /// Drop all stored solution coefficients.
    pub fn clear_solution(&mut self) {
        for n in &mut self.nodes {
            n.dofs.iter_mut().for_each(|d| *d = None);
        }
    }

    // ---- boundary conditions

    pub(crate) fn set_face_flags(&mut self, boundary_id: u8, index: usize, flag: u8) {
        for el in &mut self.elems {
            let mut digits = decode_bc(el.bcond[index]);
            for f in 0..NFACE {
                if el.neighbors[f] == Neighbor::Boundary(boundary_id) {
                    digits[f] = flag;
                }
            }
            el.bcond[index] = digits
                .iter()
                .rev()
                .fold(0, |acc, &d| acc * 10 + d as u32);
        }
    }

    /// Recompute per-node Dirichlet masks: initial nodes from the faces of
    /// initial elements flagged 1, refined nodes by inheritance from their
    /// father entity (zero for nodes interior to a middle).
    pub fn derive_dirichlet_masks(&mut self) {
        for n in &mut self.nodes {
            n.bcond.iter_mut().for_each(|b| *b = 0);
        }
        for iel in 0..self.elems.len() {
            let el = self.elems[iel].clone();
            for (c, &code) in el.bcond.iter().enumerate() {
                let digits = decode_bc(code);
                for f in 0..NFACE {
                    if digits[f] != 1 {
                        continue;
                    }
                    let face = el.nodes[20 + f];
                    let mut on_face = vec![face];
                    on_face.extend_from_slice(&self.nodes[face - 1].closure);
                    for id in on_face {
                        self.nodes[id - 1].bcond[c] = 1;
                    }
                }
            }
        }
        for i in 0..self.nodes.len() {
            if let Some(f) = self.nodes[i].father {
                let mask = match self.nodes[f - 1].kind {
                    NodeKind::Middle => vec![0; self.nrindex],
                    _ => self.nodes[f - 1].bcond.clone(),
                };
                self.nodes[i].bcond = mask;
            }
        }
    }

    // ---- traversal and bookkeeping

    /// Active middles, depth-first pre-order from the initial elements.
    pub fn traverse_active(&mut self) -> Vec<NodeId> {
        self.elem_order = self.natural_order();
        self.elem_order.clone()
    }

    fn natural_order(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = (1..=self.elems.len()).rev().collect();
        while let Some(m) = stack.pop() {
            let n = &self.nodes[m - 1];
            if n.sons.is_empty() {
                out.push(m);
            } else {
                stack.extend(n.sons.iter().rev());
            }
        }
        out
    }

    /// Recompute natural order, usage counts, node status, activation flags
    /// and the orders of constrained nodes.
    pub(crate) fn refresh(&mut self) {
        self.elem_order = self.natural_order();
        let nn = self.nodes.len();
        self.users = vec![0; nn];
        for &m in &self.elem_order {
            for &id in &self.nodes[m - 1].closure {
                self.users[id - 1] += 1;
            }
        }
        self.status = vec![NodeStatus::Unused; nn];
        for i in 0..nn {
            let n = &self.nodes[i];
            if self.users[i] == 0 {
                continue;
            }
            let mut st = NodeStatus::Free;
            if n.kind != NodeKind::Middle {
                if let Some(f) = n.father.filter(|&f| self.nodes[f - 1].kind != NodeKind::Middle) {
                    if self.users[f - 1] > 0 {
                        st = NodeStatus::Constrained(f);
                    } else if let Some(a) = self.used_ancestor(f) {
                        st = NodeStatus::Irregular(a);
                    }
                }
            }
            self.status[i] = st;
        }
        for i in 0..nn {
            self.nodes[i].active = match self.nodes[i].kind {
                NodeKind::Middle => self.nodes[i].sons.is_empty(),
                _ => self.status[i] == NodeStatus::Free,
            };
        }
        // constrained nodes take the order representable by their parent
        for i in 0..nn {
            if let NodeStatus::Constrained(p) = self.status[i] {
                let id = i + 1;
                let new = self.constrained_order(p, id);
                if new != self.nodes[i].order {
                    self.nodes[i].order = new;
                    self.nodes[i].dofs.iter_mut().for_each(|d| *d = None);
                }
            }
        }
    }

    /// First in-use non-middle ancestor, starting at `id` itself.
    fn used_ancestor(&self, id: NodeId) -> Option<NodeId> {
        let mut cur = Some(id);
        while let Some(c) = cur {
            let n = &self.nodes[c - 1];
            if n.kind == NodeKind::Middle {
                return None;
            }
            if self.users[c - 1] > 0 {
                return Some(c);
            }
            cur = n.father;
        }
        None
    }

    fn constrained_order(&self, parent: NodeId, child: NodeId) -> u32 {
        let p = &self.nodes[parent - 1];
        let c = &self.nodes[child - 1];
        if c.kind == NodeKind::Vertex {
            return 0;
        }
        match p.kind {
            NodeKind::Edge => p.order,
            NodeKind::Face => {
                let [p1, p2, _] = p.order_array();
                let o = |k: usize| self.nodes[p.closure[4 + k] - 1].order;
                let m1 = p1.max(o(0)).max(o(2));
                let m2 = p2.max(o(1)).max(o(3));
                let pos = p.sons.iter().position(|&s| s == child).unwrap_or(0);
                match pos {
                    0..=3 => 10 * m1 + m2,
                    4 | 6 => m2,
                    _ => m1,
                }
            }
            _ => c.order,
        }
    }

    /// Check the 1-irregularity invariant for the current active mesh.
    pub fn is_one_irregular(&self) -> bool {
        self.irregular_ancestors().is_empty()
    }

    /// In-use ancestors (beyond the father) of in-use nodes.
    pub(crate) fn irregular_ancestors(&self) -> Vec<NodeId> {
        let mut bad = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if self.users[i] == 0 || n.kind == NodeKind::Middle {
                continue;
            }
            let Some(f) = n.father else { continue };
            if self.nodes[f - 1].kind == NodeKind::Middle {
                continue;
            }
            if let Some(a) = self.nodes[f - 1].father.and_then(|g| self.used_ancestor(g)) {
                bad.push(a);
            }
        }
        bad.sort_unstable();
        bad.dedup();
        bad
    }

    // ---- element queries

    pub fn element_order(&self, mdle: NodeId) -> ElementOrder {
        let nodes = &self.nodes[mdle - 1].closure;
        let mut edges = [0; NEDGE];
        for (e, p) in edges.iter_mut().enumerate() {
            *p = self.nodes[nodes[8 + e] - 1].order;
        }
        let mut faces = [[0; 2]; NFACE];
        for (f, p) in faces.iter_mut().enumerate() {
            let a = self.nodes[nodes[20 + f] - 1].order_array();
            *p = [a[0], a[1]];
        }
        let a = self.nodes[mdle - 1].order_array();
        ElementOrder {
            edges,
            faces,
            middle: OrderTriple::from_array(a),
        }
    }

    pub fn element_nodes(&self, mdle: NodeId) -> [NodeId; NNODE] {
        let mut out = [0; NNODE];
        out.copy_from_slice(&self.nodes[mdle - 1].closure);
        out
    }

    pub fn element_xnod(&self, mdle: NodeId) -> [[f64; 3]; NVERT] {
        let c = &self.nodes[mdle - 1].closure;
        std::array::from_fn(|v| self.nodes[c[v] - 1].coords)
    }

    /// Snapshot of an active element (orders, zero orientations, vertex
    /// coordinates and node list).
    pub fn element_info(&self, mdle: NodeId) -> Result<ElementInfo> {
        if mdle == 0 || mdle > self.nodes.len() {
            return Err(Error::State(format!("node {mdle} does not exist")));
        }
        let n = &self.nodes[mdle - 1];
        if n.kind != NodeKind::Middle || !n.sons.is_empty() {
            return Err(Error::State(format!("node {mdle} is not an active middle node")));
        }
        Ok(ElementInfo {
            mdle,
            norder: self.element_order(mdle),
            edge_orient: [0; NEDGE],
            face_orient: [0; NFACE],
            xnod: self.element_xnod(mdle),
            nodes: self.element_nodes(mdle),
        })
    }

    /// Refinement level of a middle node (0 for initial elements).
    pub fn level(&self, mdle: NodeId) -> usize {
        let mut l = 0;
        let mut cur = self.nodes[mdle - 1].father;
        while let Some(f) = cur {
            l += 1;
            cur = self.nodes[f - 1].father;
        }
        l
    }

    /// Total number of global (free) dofs for the given attributes.
    pub fn count_free_dofs(&self, enabled: &[bool]) -> usize {
        let mut n = 0;
        for id in 1..=self.nodes.len() {
            if self.status[id - 1] != NodeStatus::Free {
                continue;
            }
            for (a, layout) in self.attrs.iter().enumerate() {
                if enabled.get(a).copied().unwrap_or(false) {
                    n += self.node_nfun(id, a) * layout.ncomp;
                }
            }
        }
        n
    }
}

use std::collections::BTreeSet;

use super::{Mesh, NodeId, NodeKind, NodeStatus, KREF_ISO};
use crate::error::{Error, Result};
use crate::masterel::{
    edge_dir, face_tangents, OrderTriple, EDGE_VERTS, FACE_NORMAL, FACE_VERTS, MAXP, NEDGE, NFACE,
    VERTEX_COORDS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefinementKind {
    /// Isotropic h-refinement of every active element.
    Href,
    /// Raise every order by one.
    Pref,
    /// Lower every order by one.
    Punref,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefRule {
    Min,
    Max,
}

fn avg(points: &[[f64; 3]]) -> [f64; 3] {
    let n = points.len() as f64;
    let mut c = [0.0; 3];
    for p in points {
        for d in 0..3 {
            c[d] += p[d] / n;
        }
    }
    c
}

impl Mesh {
    fn refine_edge(&mut self, e: NodeId) {
        if self.node(e).is_refined() {
            return;
        }
        let (v, p, case) = {
            let n = self.node(e);
            ([n.closure[0], n.closure[1]], n.order, n.case)
        };
        let x = avg(&[self.node(v[0]).coords, self.node(v[1]).coords]);
        let vm = self.push_node(NodeKind::Vertex, 0, Some(e), x, case);
        let e1 = self.create_edge([v[0], vm], p, Some(e), case);
        let e2 = self.create_edge([vm, v[1]], p, Some(e), case);
        let n = self.node_mut(e);
        n.sons = vec![e1, e2, vm];
        n.ref_kind = 1;
    }

    fn refine_face(&mut self, f: NodeId) -> Result<()> {
        if self.node(f).is_refined() {
            return Ok(());
        }
        let (closure, [p1, p2, _], case) = {
            let n = self.node(f);
            (n.closure.clone(), n.order_array(), n.case)
        };
        for k in 0..4 {
            self.refine_edge(closure[4 + k]);
        }
        let mid = |m: &Mesh, k: usize| m.node(closure[4 + k]).sons[2];
        let mut p = [[0usize; 3]; 3];
        p[0][0] = closure[0];
        p[2][0] = closure[1];
        p[2][2] = closure[2];
        p[0][2] = closure[3];
        p[1][0] = mid(self, 0);
        p[2][1] = mid(self, 1);
        p[1][2] = mid(self, 2);
        p[0][1] = mid(self, 3);
        let x = avg(&closure[..4].iter().map(|&v| self.node(v).coords).collect::<Vec<_>>());
        p[1][1] = self.push_node(NodeKind::Vertex, 0, Some(f), x, case);
        let ie = [
            self.create_edge([p[1][0], p[1][1]], p2, Some(f), case),
            self.create_edge([p[1][1], p[2][1]], p1, Some(f), case),
            self.create_edge([p[1][1], p[1][2]], p2, Some(f), case),
            self.create_edge([p[0][1], p[1][1]], p1, Some(f), case),
        ];
        let mut sons = Vec::with_capacity(9);
        for (a, b) in [(0, 0), (1, 0), (1, 1), (0, 1)] {
            let v = [p[a][b], p[a + 1][b], p[a + 1][b + 1], p[a][b + 1]];
            sons.push(self.create_face(v, [p1, p2], Some(f), case)?);
        }
        sons.extend_from_slice(&ie);
        sons.push(p[1][1]);
        let n = self.node_mut(f);
        n.sons = sons;
        n.ref_kind = 11;
        Ok(())
    }

    /// Isotropic refinement of an active element into 8 octants.
    pub fn refine_element(&mut self, mdle: NodeId, kref: u32) -> Result<()> {
        self.refine_element_raw(mdle, kref)?;
        self.refresh();
        Ok(())
    }

    pub(crate) fn refine_element_raw(&mut self, mdle: NodeId, kref: u32) -> Result<()> {
        if kref != KREF_ISO {
            return Err(Error::UnsupportedRefinement(kref));
        }
        if mdle == 0 || mdle > self.nrnods() {
            return Err(Error::State(format!("node {mdle} does not exist")));
        }
        {
            let n = self.node(mdle);
            if n.kind != NodeKind::Middle || n.is_refined() {
                return Err(Error::State(format!("node {mdle} is not an active middle node")));
            }
        }
        let nodes = self.element_nodes(mdle);
        let m = OrderTriple::from_array(self.node(mdle).order_array());
        let case = self.node(mdle).case;
        let first_new = self.nrnods() + 1;
        for e in 0..NEDGE {
            self.refine_edge(nodes[8 + e]);
        }
        for f in 0..NFACE {
            self.refine_face(nodes[20 + f])?;
        }

        // 3x3x3 lattice of vertices
        let mut lat = [[[0usize; 3]; 3]; 3];
        let center = {
            let x = avg(&self.element_xnod(mdle));
            self.push_node(NodeKind::Vertex, 0, Some(mdle), x, case)
        };
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let c = [i, j, k];
                    let ones: Vec<usize> = (0..3).filter(|&d| c[d] == 1).collect();
                    lat[i][j][k] = match ones.len() {
                        0 => {
                            let corner = c.map(|x| (x / 2) as u8);
                            nodes[crate::masterel::vertex_index(corner)]
                        }
                        1 => {
                            let d = ones[0];
                            let e = (0..NEDGE)
                                .find(|&e| {
                                    let v0 = VERTEX_COORDS[EDGE_VERTS[e][0]];
                                    edge_dir(e) == d
                                        && (0..3).all(|q| q == d || v0[q] as usize * 2 == c[q])
                                })
                                .expect("lattice edge");
                            self.node(nodes[8 + e]).sons[2]
                        }
                        2 => {
                            let n = (0..3).find(|&d| c[d] != 1).unwrap();
                            let f = (0..NFACE)
                                .find(|&f| FACE_NORMAL[f] == (n, (c[n] / 2) as u8))
                                .expect("lattice face");
                            self.node(nodes[20 + f]).sons[8]
                        }
                        _ => center,
                    };
                }
            }
        }
        let at = |c: [usize; 3]| lat[c[0]][c[1]][c[2]];

        // interior edges: center to face centers
        for f in 0..NFACE {
            let (n, side) = FACE_NORMAL[f];
            let mut c = [1; 3];
            c[n] = 2 * side as usize;
            let fc = at(c);
            let v = if side == 0 { [fc, center] } else { [center, fc] };
            self.create_edge(v, m.get(n), Some(mdle), case);
        }
        // interior faces
        for n in 0..3 {
            let (t1, t2) = match n {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            for b in 0..2 {
                for a in 0..2 {
                    let pt = |da: usize, db: usize| {
                        let mut c = [1; 3];
                        c[t1] = a + da;
                        c[t2] = b + db;
                        at(c)
                    };
                    let v = [pt(0, 0), pt(1, 0), pt(1, 1), pt(0, 1)];
                    self.create_face(v, [m.get(t1), m.get(t2)], Some(mdle), case)?;
                }
            }
        }
        // son middles in octant order
        let mut sons = Vec::with_capacity(8);
        for s in 0..8 {
            let o = VERTEX_COORDS[s].map(|x| x as usize);
            let verts: [NodeId; 8] = VERTEX_COORDS
                .map(|cv| at([o[0] + cv[0] as usize, o[1] + cv[1] as usize, o[2] + cv[2] as usize]));
            let mut closure = verts.to_vec();
            for ev in EDGE_VERTS {
                let id = self
                    .find_edge([verts[ev[0]], verts[ev[1]]])
                    .ok_or_else(|| Error::Mesh("missing son edge".into()))?;
                debug_assert_eq!(self.node(id).closure[..2], [verts[ev[0]], verts[ev[1]]]);
                closure.push(id);
            }
            for fv in FACE_VERTS {
                let v = fv.map(|k| verts[k]);
                let id = self
                    .find_face(v)
                    .ok_or_else(|| Error::Mesh("missing son face".into()))?;
                debug_assert_eq!(self.node(id).closure[..4], v);
                closure.push(id);
            }
            let id = self.push_node(NodeKind::Middle, m.encode(), Some(mdle), [0.0; 3], case);
            closure.push(id);
            self.node_mut(id).closure = closure;
            sons.push(id);
        }
        let mask = vec![0; self.nrindex()];
        let nn = self.nrnods();
        let n = self.node_mut(mdle);
        n.sons = sons;
        n.ref_kind = KREF_ISO;
        n.active = false;
        // new nodes inherit Dirichlet masks from their father entity
        for id in first_new..=nn {
            let father = self.node(id).father;
            let inherited = match father {
                Some(f) if self.node(f).kind != NodeKind::Middle => self.node(f).bcond.clone(),
                _ => mask.clone(),
            };
            self.node_mut(id).bcond = inherited;
        }
        Ok(())
    }

    /// Isotropic refinement flag of a middle node.
    pub fn get_isoref(&self, mdle: NodeId) -> Result<u32> {
        if mdle == 0 || mdle > self.nrnods() || self.node(mdle).kind != NodeKind::Middle {
            return Err(Error::Contract(format!("node {mdle} is not a middle node")));
        }
        Ok(KREF_ISO)
    }

    /// Refine coarse elements until the mesh is 1-irregular.
    pub fn close_mesh(&mut self) -> Result<()> {
        loop {
            let bad: BTreeSet<NodeId> = self.irregular_ancestors().into_iter().collect();
            if bad.is_empty() {
                return Ok(());
            }
            let targets: Vec<NodeId> = self
                .elem_order()
                .iter()
                .copied()
                .filter(|&m| self.node(m).closure.iter().any(|n| bad.contains(n)))
                .collect();
            if targets.is_empty() {
                return Err(Error::Mesh("mesh closure made no progress".into()));
            }
            log::debug!("close_mesh: refining {} elements", targets.len());
            for m in targets {
                self.refine_element_raw(m, KREF_ISO)?;
            }
            self.refresh();
        }
    }

    pub fn global_refinement(&mut self, kind: RefinementKind) -> Result<()> {
        match kind {
            RefinementKind::Href => {
                for m in self.elem_order().to_vec() {
                    self.refine_element_raw(m, KREF_ISO)?;
                }
            }
            RefinementKind::Pref | RefinementKind::Punref => {
                let up = kind == RefinementKind::Pref;
                for n in self.nodes() {
                    if n.kind == NodeKind::Vertex {
                        continue;
                    }
                    let a = n.order_array();
                    let k = match n.kind {
                        NodeKind::Edge => 1,
                        NodeKind::Face => 2,
                        _ => 3,
                    };
                    let bad = a[..k].iter().any(|&p| if up { p >= MAXP } else { p <= 1 });
                    if bad {
                        return Err(Error::Order(format!(
                            "cannot {} order {} (bounds 1..={MAXP})",
                            if up { "raise" } else { "lower" },
                            n.order
                        )));
                    }
                }
                for id in 1..=self.nrnods() {
                    let n = self.node_mut(id);
                    let delta: i64 = match n.kind {
                        NodeKind::Vertex => continue,
                        NodeKind::Edge => 1,
                        NodeKind::Face => 11,
                        NodeKind::Middle => 111,
                    };
                    n.order = (n.order as i64 + if up { delta } else { -delta }) as u32;
                    n.dofs.iter_mut().for_each(|d| *d = None);
                }
            }
        }
        self.refresh();
        Ok(())
    }

    /// Set middle orders, then propagate to faces and edges by the min or
    /// max rule over adjacent elements.
    pub fn adaptive_pref(&mut self, targets: &[(NodeId, OrderTriple)], rule: PrefRule) -> Result<()> {
        for &(m, p) in targets {
            p.validate()?;
            let n = self.node(m);
            if n.kind != NodeKind::Middle || n.is_refined() {
                return Err(Error::State(format!("node {m} is not an active middle node")));
            }
        }
        for &(m, p) in targets {
            let n = self.node_mut(m);
            if n.order != p.encode() {
                n.order = p.encode();
                n.dofs.iter_mut().for_each(|d| *d = None);
            }
        }
        self.enforce_rule(rule);
        self.refresh();
        Ok(())
    }

    /// Raise the listed elements isotropically by one.
    pub fn execute_pref(&mut self, mdles: &[NodeId], rule: PrefRule) -> Result<()> {
        let targets: Vec<(NodeId, OrderTriple)> = mdles
            .iter()
            .map(|&m| (m, OrderTriple::from_array(self.node(m).order_array()).add(1)))
            .collect();
        self.adaptive_pref(&targets, rule)
    }

    fn enforce_rule(&mut self, rule: PrefRule) {
        let nn = self.nrnods();
        // per node: (element middle order, local entity index)
        let mut adj: Vec<Vec<([u32; 3], usize)>> = vec![Vec::new(); nn];
        for &m in self.elem_order() {
            let p = self.node(m).order_array();
            let c = &self.node(m).closure;
            for e in 0..NEDGE {
                adj[c[8 + e] - 1].push((p, e));
            }
            for f in 0..NFACE {
                adj[c[20 + f] - 1].push((p, f));
            }
        }
        let pick = |a: u32, b: u32| match rule {
            PrefRule::Min => a.min(b),
            PrefRule::Max => a.max(b),
        };
        for id in 1..=nn {
            if self.status(id) != NodeStatus::Free {
                continue;
            }
            let kind = self.node(id).kind;
            if !matches!(kind, NodeKind::Edge | NodeKind::Face) {
                continue;
            }
            // the node and its same-kind descendants
            let mut family = vec![id];
            let mut k = 0;
            while k < family.len() {
                let n = self.node(family[k]);
                let nsub = if kind == NodeKind::Edge { 2 } else { 4 };
                if n.is_refined() {
                    family.extend_from_slice(&n.sons[..nsub]);
                }
                k += 1;
            }
            let mut acc: Option<[u32; 2]> = None;
            for &fid in &family {
                for &(p, loc) in &adj[fid - 1] {
                    let val = if kind == NodeKind::Edge {
                        [p[edge_dir(loc)], 0]
                    } else {
                        let (t1, t2) = face_tangents(loc);
                        [p[t1], p[t2]]
                    };
                    acc = Some(match acc {
                        None => val,
                        Some(a) => [pick(a[0], val[0]), pick(a[1], val[1])],
                    });
                }
            }
            if let Some(a) = acc {
                let new = if kind == NodeKind::Edge { a[0] } else { 10 * a[0] + a[1] };
                let n = self.node_mut(id);
                if n.order != new {
                    n.order = new;
                    n.dofs.iter_mut().for_each(|d| *d = None);
                }
            }
        }
    }
}

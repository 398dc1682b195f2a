//! Master hexahedron `[0,1]^3`, Gauss-Legendre quadrature and the
//! hierarchical exact-sequence shape functions (H1, H(curl), H(div), L2).
//!
//! Conventions used throughout the crate:
//!
//! * vertices (0-based) `v0..v7`: bottom quad `(0,0,0),(1,0,0),(1,1,0),(0,1,0)`
//!   counterclockwise, then the top quad in the same order;
//! * edges `e0..e3` bottom, `e4..e7` top, `e8..e11` vertical, each
//!   parametrized in the increasing coordinate direction;
//! * faces `z=0, z=1, y=0, x=1, y=1, x=0`, each parametrized by its two
//!   tangential coordinates in increasing axis order.
//!
//! Public functions that take a face number use the 1-based numbering of
//! the geometry file format.

use crate::error::{Error, Result};

/// Maximum polynomial order supported by the shape functions.
pub const MAXP: u32 = 9;

/// Maximum number of Gauss points per direction.
pub const MAX_GAUSS: usize = 16;

pub const NVERT: usize = 8;
pub const NEDGE: usize = 12;
pub const NFACE: usize = 6;
/// Vertices, edges, faces and the middle node of a brick.
pub const NNODE: usize = 27;

/// Energy space of a physics attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Space {
    H1,
    HCurl,
    HDiv,
    L2,
}

impl Space {
    /// Position in the exact sequence `H1 -> H(curl) -> H(div) -> L2`.
    pub fn rank(self) -> u8 {
        match self {
            Space::H1 => 0,
            Space::HCurl => 1,
            Space::HDiv => 2,
            Space::L2 => 3,
        }
    }

    pub fn is_vector(self) -> bool {
        matches!(self, Space::HCurl | Space::HDiv)
    }
}

/// Polynomial order per reference direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrderTriple {
    pub px: u32,
    pub py: u32,
    pub pz: u32,
}

impl OrderTriple {
    pub fn new(px: u32, py: u32, pz: u32) -> Self {
        Self { px, py, pz }
    }

    pub fn iso(p: u32) -> Self {
        Self::new(p, p, p)
    }

    pub fn get(&self, dir: usize) -> u32 {
        [self.px, self.py, self.pz][dir]
    }

    pub fn as_array(&self) -> [u32; 3] {
        [self.px, self.py, self.pz]
    }

    pub fn from_array(a: [u32; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    /// `100*px + 10*py + pz`
    pub fn encode(&self) -> u32 {
        100 * self.px + 10 * self.py + self.pz
    }

    pub fn decode(code: u32) -> Result<Self> {
        if code >= 1000 {
            return Err(Error::Order(format!("cannot decode order {code}")));
        }
        Ok(Self::new(code / 100, (code / 10) % 10, code % 10))
    }

    pub fn validate(&self) -> Result<()> {
        for p in self.as_array() {
            if !(1..=MAXP).contains(&p) {
                return Err(Error::Order(format!(
                    "order {} outside [1,{MAXP}]",
                    self.encode()
                )));
            }
        }
        Ok(())
    }

    pub fn max(&self) -> u32 {
        self.px.max(self.py).max(self.pz)
    }

    pub fn add(&self, dp: u32) -> Self {
        Self::new(self.px + dp, self.py + dp, self.pz + dp)
    }
}

// ---------------------------------------------------------------------------
// reference element tables

/// Vertex coordinates of the master hexahedron.
pub const VERTEX_COORDS: [[u8; 3]; NVERT] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Edge endpoints (start, end) in the direction of increasing coordinate.
pub const EDGE_VERTS: [[usize; 2]; NEDGE] = [
    [0, 1],
    [1, 2],
    [3, 2],
    [0, 3],
    [4, 5],
    [5, 6],
    [7, 6],
    [4, 7],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
];

/// Face vertices at face parameters `(0,0),(1,0),(1,1),(0,1)`.
pub const FACE_VERTS: [[usize; 4]; NFACE] = [
    [0, 1, 2, 3],
    [4, 5, 6, 7],
    [0, 1, 5, 4],
    [1, 2, 6, 5],
    [3, 2, 6, 7],
    [0, 3, 7, 4],
];

/// Face edges in face-local order: `t2=0`, `t1=1`, `t2=1`, `t1=0`.
pub const FACE_EDGES: [[usize; 4]; NFACE] = [
    [0, 1, 2, 3],
    [4, 5, 6, 7],
    [0, 9, 4, 8],
    [1, 10, 5, 9],
    [2, 10, 6, 11],
    [3, 11, 7, 8],
];

/// Normal direction and constant coordinate of each face.
pub const FACE_NORMAL: [(usize, u8); NFACE] = [(2, 0), (2, 1), (1, 0), (0, 1), (1, 1), (0, 0)];

/// Sign turning `dxdt1 x dxdt2` into the outward normal.
pub const FACE_NSIGN: [f64; NFACE] = [-1.0, 1.0, 1.0, 1.0, -1.0, -1.0];

/// Direction along which an edge runs.
pub fn edge_dir(e: usize) -> usize {
    let [a, b] = EDGE_VERTS[e];
    (0..3)
        .find(|&d| VERTEX_COORDS[a][d] != VERTEX_COORDS[b][d])
        .expect("edge endpoints differ")
}

/// Tangential directions `(t1, t2)` of a face.
pub fn face_tangents(f: usize) -> (usize, usize) {
    match FACE_NORMAL[f].0 {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Master vertex index for corner coordinates.
pub fn vertex_index(c: [u8; 3]) -> usize {
    VERTEX_COORDS
        .iter()
        .position(|v| *v == c)
        .expect("corner coordinates in {0,1}")
}

/// Affine embedding of face `face` (1..=6) of the master cube; returns the
/// master point and the tangent matrix `dxi/dt` (3x2).
pub fn face_param(face: usize, t: [f64; 2]) -> Result<([f64; 3], [[f64; 2]; 3])> {
    if !(1..=NFACE).contains(&face) {
        return Err(Error::Config(format!("invalid face index {face}")));
    }
    Ok(face_param0(face - 1, t))
}

pub(crate) fn face_param0(f: usize, t: [f64; 2]) -> ([f64; 3], [[f64; 2]; 3]) {
    let (n, c) = FACE_NORMAL[f];
    let (t1, t2) = face_tangents(f);
    let mut xi = [0.0; 3];
    xi[n] = c as f64;
    xi[t1] = t[0];
    xi[t2] = t[1];
    let mut dxidt = [[0.0; 2]; 3];
    dxidt[t1][0] = 1.0;
    dxidt[t2][1] = 1.0;
    (xi, dxidt)
}

// ---------------------------------------------------------------------------
// quadrature

/// Gauss-Legendre rule with `n` points on `[0,1]`.
pub fn gauss_legendre_1d(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(1..=MAX_GAUSS).contains(&n) {
        return Err(Error::Config(format!(
            "quadrature point count {n} outside [1,{MAX_GAUSS}]"
        )));
    }
    let mut pts = vec![0.0; n];
    let mut wts = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n {
        // Newton iteration on P_n starting from the Chebyshev-like guess
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, t);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        // map from [-1,1] to [0,1]
        pts[n - 1 - i] = 0.5 * (t + 1.0);
        wts[n - 1 - i] = 0.5 * w;
    }
    Ok((pts, wts))
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Tensor-product rule on the master cube.
#[derive(Debug, Clone)]
pub struct QuadratureRule3D {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

/// Tensor-product rule on the unit square (face parameters).
#[derive(Debug, Clone)]
pub struct QuadratureRule2D {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

pub fn gauss_quadrature_3d(counts: [usize; 3]) -> Result<QuadratureRule3D> {
    let rules = [
        gauss_legendre_1d(counts[0])?,
        gauss_legendre_1d(counts[1])?,
        gauss_legendre_1d(counts[2])?,
    ];
    let n = counts[0] * counts[1] * counts[2];
    let mut points = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (x, wx) in rules[0].0.iter().zip(&rules[0].1) {
        for (y, wy) in rules[1].0.iter().zip(&rules[1].1) {
            for (z, wz) in rules[2].0.iter().zip(&rules[2].1) {
                points.push([*x, *y, *z]);
                weights.push(wx * wy * wz);
            }
        }
    }
    Ok(QuadratureRule3D { points, weights })
}

pub fn gauss_quadrature_2d(counts: [usize; 2]) -> Result<QuadratureRule2D> {
    let r1 = gauss_legendre_1d(counts[0])?;
    let r2 = gauss_legendre_1d(counts[1])?;
    let mut points = Vec::with_capacity(counts[0] * counts[1]);
    let mut weights = Vec::with_capacity(counts[0] * counts[1]);
    for (s, ws) in r1.0.iter().zip(&r1.1) {
        for (t, wt) in r2.0.iter().zip(&r2.1) {
            points.push([*s, *t]);
            weights.push(ws * wt);
        }
    }
    Ok(QuadratureRule2D { points, weights })
}

/// Per-direction point count `p + 1 + dp`, clamped to the supported range.
pub fn quadrature_counts(order: [u32; 3], dp: u32) -> [usize; 3] {
    order.map(|p| ((p + 1 + dp) as usize).clamp(1, MAX_GAUSS))
}

// ---------------------------------------------------------------------------
// 1D bases

/// Shifted Legendre polynomials `L_k(2x-1)`, `k = 0..n`, and derivatives in `x`.
pub fn shifted_legendre(n: usize, x: f64, val: &mut Vec<f64>, der: &mut Vec<f64>) {
    val.clear();
    der.clear();
    if n == 0 {
        return;
    }
    let t = 2.0 * x - 1.0;
    val.push(1.0);
    der.push(0.0);
    if n == 1 {
        return;
    }
    val.push(t);
    der.push(2.0);
    for k in 2..n {
        let kf = k as f64;
        let v = ((2.0 * kf - 1.0) * t * val[k - 1] - (kf - 1.0) * val[k - 2]) / kf;
        // d/dx = 2 d/dt ; P_k' = P_{k-2}' + (2k-1) P_{k-1}
        let d = der[k - 2] + 2.0 * (2.0 * kf - 1.0) * val[k - 1];
        val.push(v);
        der.push(d);
    }
}

/// Hierarchical H1 basis `{1-x, x, chi_2, .., chi_p}` with
/// `chi_k(x) = int_0^x L_{k-1}(2s-1) ds`, and derivatives.
pub fn h1_basis_1d(p: usize, x: f64, val: &mut Vec<f64>, der: &mut Vec<f64>) {
    let mut lv = Vec::with_capacity(p + 1);
    let mut ld = Vec::with_capacity(p + 1);
    shifted_legendre(p + 1, x, &mut lv, &mut ld);
    val.clear();
    der.clear();
    val.push(1.0 - x);
    der.push(-1.0);
    val.push(x);
    der.push(1.0);
    for k in 2..=p {
        let kf = k as f64;
        // (P_k - P_{k-2}) / (2 (2k-1)) in t = 2x - 1
        val.push((lv[k] - lv[k - 2]) / (2.0 * (2.0 * kf - 1.0)));
        der.push(lv[k - 1]);
    }
}

// ---------------------------------------------------------------------------
// orders and shape function layout

/// Orders of all entities of one element: 12 edges, 6 faces `(p along t1,
/// p along t2)` and the middle node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ElementOrder {
    pub edges: [u32; NEDGE],
    pub faces: [[u32; 2]; NFACE],
    pub middle: OrderTriple,
}

impl ElementOrder {
    /// Order of a conforming element with all entities matching the middle.
    pub fn from_middle(m: OrderTriple) -> Self {
        let mut edges = [0; NEDGE];
        for (e, pe) in edges.iter_mut().enumerate() {
            *pe = m.get(edge_dir(e));
        }
        let mut faces = [[0; 2]; NFACE];
        for (f, pf) in faces.iter_mut().enumerate() {
            let (t1, t2) = face_tangents(f);
            *pf = [m.get(t1), m.get(t2)];
        }
        Self {
            edges,
            faces,
            middle: m,
        }
    }

    pub fn uniform(p: u32) -> Self {
        Self::from_middle(OrderTriple::iso(p))
    }

    pub fn validate(&self) -> Result<()> {
        self.middle.validate()?;
        let ok = |p: u32| (1..=MAXP).contains(&p);
        if !self.edges.iter().all(|&p| ok(p)) || !self.faces.iter().flatten().all(|&p| ok(p)) {
            return Err(Error::Order(format!("entity order outside [1,{MAXP}]")));
        }
        Ok(())
    }

    /// Largest order per direction over all entities.
    pub fn max_per_direction(&self) -> [u32; 3] {
        let mut m = self.middle.as_array();
        for (e, &p) in self.edges.iter().enumerate() {
            let d = edge_dir(e);
            m[d] = m[d].max(p);
        }
        for (f, p) in self.faces.iter().enumerate() {
            let (t1, t2) = face_tangents(f);
            m[t1] = m[t1].max(p[0]);
            m[t2] = m[t2].max(p[1]);
        }
        m
    }

    /// Encoded orders in node order (12 edges, 6 faces, middle).
    pub fn encoded(&self) -> [u32; 19] {
        let mut out = [0; 19];
        out[..NEDGE].copy_from_slice(&self.edges);
        for f in 0..NFACE {
            out[NEDGE + f] = 10 * self.faces[f][0] + self.faces[f][1];
        }
        out[18] = self.middle.encode();
        out
    }
}

/// Factor of a tensor-product shape function in one direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Factor {
    /// Index into the 1D H1 basis (0: `1-x`, 1: `x`, k>=2: bubble).
    H(u8),
    /// Index into the 1D L2 (shifted Legendre) basis.
    L(u8),
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TensorFn {
    /// Vector component carrying the function (0 for scalar spaces).
    pub comp: u8,
    pub f: [Factor; 3],
}

/// The ordered list of shape functions of one space at given entity orders,
/// grouped into per-node blocks.
#[derive(Debug, Clone)]
pub struct ShapeLayout {
    pub space: Space,
    pub(crate) fns: Vec<TensorFn>,
    /// Function ranges per local node (8 vertices, 12 edges, 6 faces, middle).
    pub node_ranges: [std::ops::Range<usize>; NNODE],
    max_h: [usize; 3],
    max_l: [usize; 3],
}

fn vertex_factor(c: u8) -> Factor {
    Factor::H(c)
}

impl ShapeLayout {
    pub fn new(space: Space, order: &ElementOrder) -> Result<Self> {
        order.validate()?;
        let mut fns: Vec<TensorFn> = Vec::new();
        let mut ranges: [std::ops::Range<usize>; NNODE] = std::array::from_fn(|_| 0..0);

        // vertices
        for (v, r) in ranges.iter_mut().enumerate().take(NVERT) {
            let start = fns.len();
            if space == Space::H1 {
                let c = VERTEX_COORDS[v];
                fns.push(TensorFn {
                    comp: 0,
                    f: [vertex_factor(c[0]), vertex_factor(c[1]), vertex_factor(c[2])],
                });
            }
            *r = start..fns.len();
        }
        // edges
        for e in 0..NEDGE {
            let start = fns.len();
            let d = edge_dir(e);
            let pe = order.edges[e] as u8;
            let c = VERTEX_COORDS[EDGE_VERTS[e][0]];
            let base = [vertex_factor(c[0]), vertex_factor(c[1]), vertex_factor(c[2])];
            match space {
                Space::H1 => {
                    for k in 2..=pe {
                        let mut f = base;
                        f[d] = Factor::H(k);
                        fns.push(TensorFn { comp: 0, f });
                    }
                }
                Space::HCurl => {
                    for k in 0..pe {
                        let mut f = base;
                        f[d] = Factor::L(k);
                        fns.push(TensorFn { comp: d as u8, f });
                    }
                }
                _ => {}
            }
            ranges[NVERT + e] = start..fns.len();
        }
        // faces
        for f in 0..NFACE {
            let start = fns.len();
            let (n, c) = FACE_NORMAL[f];
            let (t1, t2) = face_tangents(f);
            let [p1, p2] = order.faces[f].map(|p| p as u8);
            let mk = |a: Factor, b: Factor| {
                let mut fac = [Factor::H(0); 3];
                fac[n] = vertex_factor(c);
                fac[t1] = a;
                fac[t2] = b;
                fac
            };
            match space {
                Space::H1 => {
                    for i in 2..=p1 {
                        for j in 2..=p2 {
                            fns.push(TensorFn {
                                comp: 0,
                                f: mk(Factor::H(i), Factor::H(j)),
                            });
                        }
                    }
                }
                Space::HCurl => {
                    for i in 0..p1 {
                        for j in 2..=p2 {
                            fns.push(TensorFn {
                                comp: t1 as u8,
                                f: mk(Factor::L(i), Factor::H(j)),
                            });
                        }
                    }
                    for i in 2..=p1 {
                        for j in 0..p2 {
                            fns.push(TensorFn {
                                comp: t2 as u8,
                                f: mk(Factor::H(i), Factor::L(j)),
                            });
                        }
                    }
                }
                Space::HDiv => {
                    for i in 0..p1 {
                        for j in 0..p2 {
                            fns.push(TensorFn {
                                comp: n as u8,
                                f: mk(Factor::L(i), Factor::L(j)),
                            });
                        }
                    }
                }
                Space::L2 => {}
            }
            ranges[NVERT + NEDGE + f] = start..fns.len();
        }
        // interior
        let start = fns.len();
        let [px, py, pz] = order.middle.as_array().map(|p| p as u8);
        let p = [px, py, pz];
        match space {
            Space::H1 => {
                for i in 2..=px {
                    for j in 2..=py {
                        for k in 2..=pz {
                            fns.push(TensorFn {
                                comp: 0,
                                f: [Factor::H(i), Factor::H(j), Factor::H(k)],
                            });
                        }
                    }
                }
            }
            Space::HCurl | Space::HDiv => {
                for d in 0..3 {
                    // per direction: (lo, hi) index ranges and factor kind
                    let kind = |dir: usize, idx: u8| -> Factor {
                        let along = dir == d;
                        let l2 = (space == Space::HCurl) == along;
                        if l2 {
                            Factor::L(idx)
                        } else {
                            Factor::H(idx)
                        }
                    };
                    let range = |dir: usize| -> std::ops::RangeInclusive<u8> {
                        match kind(dir, 0) {
                            Factor::L(_) => 0..=p[dir] - 1,
                            Factor::H(_) => 2..=p[dir],
                        }
                    };
                    for i in range(0) {
                        for j in range(1) {
                            for k in range(2) {
                                fns.push(TensorFn {
                                    comp: d as u8,
                                    f: [kind(0, i), kind(1, j), kind(2, k)],
                                });
                            }
                        }
                    }
                }
            }
            Space::L2 => {
                for i in 0..px {
                    for j in 0..py {
                        for k in 0..pz {
                            fns.push(TensorFn {
                                comp: 0,
                                f: [Factor::L(i), Factor::L(j), Factor::L(k)],
                            });
                        }
                    }
                }
            }
        }
        ranges[NNODE - 1] = start..fns.len();

        let mut max_h = [1usize; 3];
        let mut max_l = [0usize; 3];
        for tf in &fns {
            for d in 0..3 {
                match tf.f[d] {
                    Factor::H(k) => max_h[d] = max_h[d].max(k as usize),
                    Factor::L(k) => max_l[d] = max_l[d].max(k as usize + 1),
                }
            }
        }
        Ok(Self {
            space,
            fns,
            node_ranges: ranges,
            max_h,
            max_l,
        })
    }

    pub fn nrdof(&self) -> usize {
        self.fns.len()
    }

    /// Number of functions excluding the interior (middle node) block.
    pub fn nrdof_interface(&self) -> usize {
        self.node_ranges[NNODE - 1].start
    }

    /// Evaluate all functions at a master point.
    pub fn eval(&self, xi: [f64; 3]) -> ShapeSet {
        let mut hv: [Vec<f64>; 3] = Default::default();
        let mut hd: [Vec<f64>; 3] = Default::default();
        let mut lv: [Vec<f64>; 3] = Default::default();
        let mut ld: [Vec<f64>; 3] = Default::default();
        for d in 0..3 {
            h1_basis_1d(self.max_h[d], xi[d], &mut hv[d], &mut hd[d]);
            shifted_legendre(self.max_l[d], xi[d], &mut lv[d], &mut ld[d]);
        }
        let n = self.fns.len();
        let mut set = ShapeSet::empty(self.space, n);
        for tf in &self.fns {
            let mut v = [0.0; 3];
            let mut dv = [0.0; 3];
            for d in 0..3 {
                match tf.f[d] {
                    Factor::H(k) => {
                        v[d] = hv[d][k as usize];
                        dv[d] = hd[d][k as usize];
                    }
                    Factor::L(k) => {
                        v[d] = lv[d][k as usize];
                        dv[d] = ld[d][k as usize];
                    }
                }
            }
            let g = v[0] * v[1] * v[2];
            let grad = [dv[0] * v[1] * v[2], v[0] * dv[1] * v[2], v[0] * v[1] * dv[2]];
            let c = tf.comp as usize;
            match self.space {
                Space::H1 => {
                    set.val.push(g);
                    set.deriv.push(grad);
                }
                Space::L2 => set.val.push(g),
                Space::HCurl => {
                    let mut e = [0.0; 3];
                    e[c] = g;
                    set.vec_val.push(e);
                    let mut ec = [0.0; 3];
                    ec[c] = 1.0;
                    set.deriv.push(cross(grad, ec));
                }
                Space::HDiv => {
                    let mut e = [0.0; 3];
                    e[c] = g;
                    set.vec_val.push(e);
                    set.div.push(grad[c]);
                }
            }
        }
        set
    }
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Values and derivatives of a full shape function set at one master point.
///
/// Scalar spaces fill `val`; vector spaces fill `vec_val`. `deriv` holds the
/// gradient (H1) or curl (H(curl)); `div` holds the divergence (H(div)).
#[derive(Debug, Clone)]
pub struct ShapeSet {
    pub space: Space,
    pub nrdof: usize,
    pub val: Vec<f64>,
    pub vec_val: Vec<[f64; 3]>,
    pub deriv: Vec<[f64; 3]>,
    pub div: Vec<f64>,
}

impl ShapeSet {
    fn empty(space: Space, n: usize) -> Self {
        let cap = |used: bool| if used { n } else { 0 };
        Self {
            space,
            nrdof: n,
            val: Vec::with_capacity(cap(matches!(space, Space::H1 | Space::L2))),
            vec_val: Vec::with_capacity(cap(space.is_vector())),
            deriv: Vec::with_capacity(cap(matches!(space, Space::H1 | Space::HCurl))),
            div: Vec::with_capacity(cap(space == Space::HDiv)),
        }
    }
}

/// Shape functions of `space` at `xi` for a uniform-in-entity element order.
/// Only zero orientation flags are supported.
pub fn shape_functions(
    space: Space,
    xi: [f64; 3],
    order: OrderTriple,
    edge_orients: &[u8; NEDGE],
    face_orients: &[u8; NFACE],
) -> Result<ShapeSet> {
    check_orientations(edge_orients, face_orients)?;
    order.validate()?;
    let layout = ShapeLayout::new(space, &ElementOrder::from_middle(order))?;
    Ok(layout.eval(xi))
}

pub fn check_orientations(edge_orients: &[u8; NEDGE], face_orients: &[u8; NFACE]) -> Result<()> {
    if edge_orients.iter().chain(face_orients.iter()).any(|&o| o != 0) {
        return Err(Error::UnsupportedOrientation(
            "only orientation 0 is implemented".into(),
        ));
    }
    Ok(())
}

/// Dimension of the space at a given (uniform) order.
pub fn dof_count(space: Space, order: OrderTriple) -> usize {
    let [px, py, pz] = order.as_array().map(|p| p as usize);
    match space {
        Space::H1 => (px + 1) * (py + 1) * (pz + 1),
        Space::HCurl => px * (py + 1) * (pz + 1) + (px + 1) * py * (pz + 1) + (px + 1) * (py + 1) * pz,
        Space::HDiv => (px + 1) * py * pz + px * (py + 1) * pz + px * py * (pz + 1),
        Space::L2 => px * py * pz,
    }
}

/// Number of functions owned by one node of the given kind.
///
/// `order` is the node's own order: ignored for vertices, `[p,_,_]` for
/// edges, `[p1,p2,_]` for faces and `[px,py,pz]` for middles.
pub fn node_dof_count(space: Space, kind: crate::mesh::NodeKind, order: [u32; 3]) -> usize {
    use crate::mesh::NodeKind;
    let [a, b, c] = order.map(|p| p as usize);
    match (space, kind) {
        (Space::H1, NodeKind::Vertex) => 1,
        (Space::H1, NodeKind::Edge) => a.saturating_sub(1),
        (Space::H1, NodeKind::Face) => a.saturating_sub(1) * b.saturating_sub(1),
        (Space::H1, NodeKind::Middle) => {
            a.saturating_sub(1) * b.saturating_sub(1) * c.saturating_sub(1)
        }
        (Space::HCurl, NodeKind::Edge) => a,
        (Space::HCurl, NodeKind::Face) => a * b.saturating_sub(1) + a.saturating_sub(1) * b,
        (Space::HCurl, NodeKind::Middle) => {
            a * b.saturating_sub(1) * c.saturating_sub(1)
                + a.saturating_sub(1) * b * c.saturating_sub(1)
                + a.saturating_sub(1) * b.saturating_sub(1) * c
        }
        (Space::HDiv, NodeKind::Face) => a * b,
        (Space::HDiv, NodeKind::Middle) => {
            a.saturating_sub(1) * b * c + a * b.saturating_sub(1) * c + a * b * c.saturating_sub(1)
        }
        (Space::L2, NodeKind::Middle) => a * b * c,
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_rule() {
        let q = gauss_quadrature_3d([1, 1, 1]).unwrap();
        assert_eq!(q.points, vec![[0.5, 0.5, 0.5]]);
        assert!((q.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_rule_nodes() {
        let q = gauss_quadrature_3d([2, 1, 1]).unwrap();
        let s = 3f64.sqrt() / 6.0;
        assert!((q.points[0][0] - (0.5 - s)).abs() < 1e-15);
        assert!((q.points[1][0] - (0.5 + s)).abs() < 1e-15);
        assert!((q.weights[0] - 0.5).abs() < 1e-15 && (q.weights[1] - 0.5).abs() < 1e-15);
        let cubic: f64 = q.points.iter().zip(&q.weights).map(|(p, w)| p[0].powi(3) * w).sum();
        assert!((cubic - 0.25).abs() < 1e-15);
    }

    #[test]
    fn xyz_squared_integral() {
        let q = gauss_quadrature_3d([3, 3, 3]).unwrap();
        let s: f64 = q
            .points
            .iter()
            .zip(&q.weights)
            .map(|(p, w)| (p[0] * p[1] * p[2]).powi(2) * w)
            .sum();
        assert!((s - 1.0 / 27.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_count_out_of_range() {
        assert!(matches!(gauss_quadrature_3d([0, 1, 1]), Err(Error::Config(_))));
        assert!(gauss_quadrature_3d([17, 1, 1]).is_err());
    }

    #[test]
    fn order_encoding() {
        let o = OrderTriple::new(2, 3, 4);
        assert_eq!(o.encode(), 234);
        assert_eq!(OrderTriple::decode(234).unwrap(), o);
        assert!(OrderTriple::new(0, 1, 1).validate().is_err());
        assert!(OrderTriple::new(10, 1, 1).validate().is_err());
    }

    #[test]
    fn dof_counts() {
        let o2 = OrderTriple::iso(2);
        assert_eq!(dof_count(Space::H1, o2), 27);
        assert_eq!(dof_count(Space::HCurl, o2), 54);
        assert_eq!(dof_count(Space::HDiv, o2), 36);
        assert_eq!(dof_count(Space::L2, OrderTriple::iso(1)), 1);
    }

    #[test]
    fn layout_matches_dof_count() {
        for p in 1..=4 {
            for space in [Space::H1, Space::HCurl, Space::HDiv, Space::L2] {
                let o = OrderTriple::new(p, (p % 3) + 1, 2);
                let l = ShapeLayout::new(space, &ElementOrder::from_middle(o)).unwrap();
                assert_eq!(l.nrdof(), dof_count(space, o), "{space:?} {o:?}");
            }
        }
    }

    #[test]
    fn trilinear_partition_of_unity() {
        let s = shape_functions(Space::H1, [0.3, 0.4, 0.5], OrderTriple::iso(1), &[0; 12], &[0; 6])
            .unwrap();
        assert_eq!(s.nrdof, 8);
        assert!((s.val.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonzero_orientation_rejected() {
        let mut eo = [0u8; 12];
        eo[3] = 1;
        let r = shape_functions(Space::H1, [0.5; 3], OrderTriple::iso(1), &eo, &[0; 6]);
        assert!(matches!(r, Err(Error::UnsupportedOrientation(_))));
        let r = shape_functions(Space::H1, [0.5; 3], OrderTriple::iso(10), &[0; 12], &[0; 6]);
        assert!(matches!(r, Err(Error::Order(_))));
    }

    #[test]
    fn face_param_examples() {
        let (xi, _) = face_param(1, [0.25, 0.75]).unwrap();
        assert_eq!(xi, [0.25, 0.75, 0.0]);
        let (xi, _) = face_param(2, [0.0, 0.0]).unwrap();
        assert_eq!(xi, [0.0, 0.0, 1.0]);
        let (xi, dxidt) = face_param(4, [0.3, 0.9]).unwrap();
        assert_eq!(xi[0], 1.0);
        assert_eq!(dxidt[0], [0.0, 0.0]);
        assert!(face_param(7, [0.0, 0.0]).is_err());
    }

    #[test]
    fn face_tables_consistent() {
        for f in 0..NFACE {
            let (n, c) = FACE_NORMAL[f];
            let (t1, t2) = face_tangents(f);
            for (k, &v) in FACE_VERTS[f].iter().enumerate() {
                let tc = [[0, 0], [1, 0], [1, 1], [0, 1]][k];
                let x = VERTEX_COORDS[v];
                assert_eq!(x[n], c);
                assert_eq!([x[t1], x[t2]], tc);
            }
            for (k, &e) in FACE_EDGES[f].iter().enumerate() {
                let [a, b] = EDGE_VERTS[e];
                let fv = FACE_VERTS[f];
                let expect = [[fv[0], fv[1]], [fv[1], fv[2]], [fv[3], fv[2]], [fv[0], fv[3]]][k];
                assert_eq!([a, b], expect, "face {f} edge {k}");
            }
        }
    }

    #[test]
    fn l2_basis_orthogonal() {
        let layout = ShapeLayout::new(Space::L2, &ElementOrder::uniform(2)).unwrap();
        assert_eq!(layout.nrdof(), 8);
        let q = gauss_quadrature_3d([4, 4, 4]).unwrap();
        let mut g = [[0.0; 8]; 8];
        for (x, w) in q.points.iter().zip(&q.weights) {
            let s = layout.eval(*x);
            for i in 0..8 {
                for j in 0..8 {
                    g[i][j] += s.val[i] * s.val[j] * w;
                }
            }
        }
        for i in 0..8 {
            for j in 0..8 {
                if i != j {
                    assert!(g[i][j].abs() < 1e-12);
                }
            }
        }
    }
}

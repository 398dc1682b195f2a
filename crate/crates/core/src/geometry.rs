//! Trilinear geometry maps and Piola transforms.

use crate::error::{Error, Result};
use crate::masterel::{self, cross, ShapeSet, Space, VERTEX_COORDS};

pub type Mat3 = [[f64; 3]; 3];

/// Geometry at one master point. `dxdxi[i][j] = dx_i/dxi_j`.
#[derive(Debug, Clone, Copy)]
pub struct GeometryData {
    pub x: [f64; 3],
    pub dxdxi: Mat3,
    pub dxidx: Mat3,
    pub rjac: f64,
}

/// Geometry at a boundary point, with outward normal and surface Jacobian.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryGeometryData {
    pub geo: GeometryData,
    pub rn: [f64; 3],
    pub bjac: f64,
    /// physical tangents `dx/dt` (3x2)
    pub dxdt: [[f64; 2]; 3],
}

fn det3(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

fn inv3(a: &Mat3, det: f64) -> Mat3 {
    let d = 1.0 / det;
    [
        [
            (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * d,
            (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * d,
            (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * d,
        ],
        [
            (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * d,
            (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * d,
            (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * d,
        ],
        [
            (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * d,
            (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * d,
            (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * d,
        ],
    ]
}

/// Trilinear map of the master cube onto the hexahedron with vertices
/// `xnod` (master vertex order).
pub fn element_geometry(xnod: &[[f64; 3]; 8], xi: [f64; 3]) -> Result<GeometryData> {
    let mut x = [0.0; 3];
    let mut dxdxi = [[0.0; 3]; 3];
    for (v, xv) in xnod.iter().enumerate() {
        let c = VERTEX_COORDS[v];
        let f = |d: usize| if c[d] == 1 { xi[d] } else { 1.0 - xi[d] };
        let df = |d: usize| if c[d] == 1 { 1.0 } else { -1.0 };
        let phi = f(0) * f(1) * f(2);
        let grad = [df(0) * f(1) * f(2), f(0) * df(1) * f(2), f(0) * f(1) * df(2)];
        for i in 0..3 {
            x[i] += xv[i] * phi;
            for j in 0..3 {
                dxdxi[i][j] += xv[i] * grad[j];
            }
        }
    }
    let rjac = det3(&dxdxi);
    let scale = dxdxi
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    if rjac <= 1e-14 * scale.powi(3) {
        return Err(Error::InvertedElement(rjac));
    }
    let dxidx = inv3(&dxdxi, rjac);
    Ok(GeometryData {
        x,
        dxdxi,
        dxidx,
        rjac,
    })
}

/// Geometry at face parameter `t` of face `face` (1..=6).
pub fn face_geometry(xnod: &[[f64; 3]; 8], face: usize, t: [f64; 2]) -> Result<BoundaryGeometryData> {
    if !(1..=6).contains(&face) {
        return Err(Error::Config(format!("invalid face index {face}")));
    }
    face_geometry0(xnod, face - 1, t)
}

pub(crate) fn face_geometry0(xnod: &[[f64; 3]; 8], f: usize, t: [f64; 2]) -> Result<BoundaryGeometryData> {
    let (xi, dxidt) = masterel::face_param0(f, t);
    let geo = element_geometry(xnod, xi)?;
    let mut dxdt = [[0.0; 2]; 3];
    for i in 0..3 {
        for k in 0..2 {
            dxdt[i][k] = (0..3).map(|j| geo.dxdxi[i][j] * dxidt[j][k]).sum();
        }
    }
    let t1 = [dxdt[0][0], dxdt[1][0], dxdt[2][0]];
    let t2 = [dxdt[0][1], dxdt[1][1], dxdt[2][1]];
    let c = cross(t1, t2);
    let bjac = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    let s = masterel::FACE_NSIGN[f] / bjac;
    Ok(BoundaryGeometryData {
        geo,
        rn: [c[0] * s, c[1] * s, c[2] * s],
        bjac,
        dxdt,
    })
}

/// `J^{-T} g`: physical gradient of an H1 function (also H(curl) values).
#[inline]
pub fn grad_to_physical(g: &GeometryData, v: [f64; 3]) -> [f64; 3] {
    let m = &g.dxidx;
    [
        m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
        m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
        m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
    ]
}

/// `J v / det J`: contravariant Piola (H(div) values, H(curl) curls).
#[inline]
pub fn contravariant(g: &GeometryData, v: [f64; 3]) -> [f64; 3] {
    let m = &g.dxdxi;
    let r = 1.0 / g.rjac;
    [
        (m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2]) * r,
        (m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2]) * r,
        (m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]) * r,
    ]
}

/// Map master shape values/derivatives to the physical element.
pub fn piola_transform(set: &ShapeSet, g: &GeometryData) -> ShapeSet {
    let mut out = set.clone();
    match set.space {
        Space::H1 => {
            for d in out.deriv.iter_mut() {
                *d = grad_to_physical(g, *d);
            }
        }
        Space::HCurl => {
            for v in out.vec_val.iter_mut() {
                *v = grad_to_physical(g, *v);
            }
            for c in out.deriv.iter_mut() {
                *c = contravariant(g, *c);
            }
        }
        Space::HDiv => {
            for v in out.vec_val.iter_mut() {
                *v = contravariant(g, *v);
            }
            for d in out.div.iter_mut() {
                *d /= g.rjac;
            }
        }
        Space::L2 => {
            for v in out.val.iter_mut() {
                *v /= g.rjac;
            }
        }
    }
    out
}

//! The hexahedral geometry file and a structured brick generator.
//!
//! ```text
//! HEXMESH 1
//! NPOINTS 8
//! 0 0 0
//! ...
//! NELEMS 1
//! 1 2 3 4 5 6 7 8
//! NBFACES 0
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::masterel::VERTEX_COORDS;

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryFile {
    pub points: Vec<[f64; 3]>,
    /// Zero-based point indices in master vertex order.
    pub elems: Vec<[usize; 8]>,
    /// `(elem, face, boundary id)`, elem and face zero-based.
    pub bfaces: Vec<(usize, usize, u8)>,
}

impl GeometryFile {
    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let perr = |line: usize, msg: String| Error::Parse {
            file: file.to_string(),
            line,
            msg,
        };
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| perr(0, format!("unexpected end of file, expected {what}")))
        };
        let keyword = |(ln, l): (usize, &str), key: &str| -> Result<usize> {
            let mut tok = l.split_whitespace();
            if tok.next() != Some(key) {
                return Err(perr(ln, format!("expected '{key}'")));
            }
            tok.next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| perr(ln, format!("expected integer after {key}")))
        };
        let version = keyword(next("HEXMESH")?, "HEXMESH")?;
        if version != 1 {
            return Err(perr(1, format!("unsupported HEXMESH version {version}")));
        }
        let np = keyword(next("NPOINTS")?, "NPOINTS")?;
        let mut points = Vec::with_capacity(np);
        for _ in 0..np {
            let (ln, l) = next("point")?;
            let v: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| perr(ln, format!("invalid coordinate: {e}")))?;
            if v.len() != 3 {
                return Err(perr(ln, "expected 3 coordinates".into()));
            }
            points.push([v[0], v[1], v[2]]);
        }
        let ne = keyword(next("NELEMS")?, "NELEMS")?;
        let mut elems = Vec::with_capacity(ne);
        for _ in 0..ne {
            let (ln, l) = next("element")?;
            let v: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| perr(ln, format!("invalid point index: {e}")))?;
            if v.len() != 8 {
                return Err(perr(ln, "expected 8 point indices".into()));
            }
            let mut el = [0; 8];
            for (k, &p) in v.iter().enumerate() {
                if p == 0 || p > np {
                    return Err(perr(ln, format!("point index {p} out of range 1..={np}")));
                }
                el[k] = p - 1;
            }
            elems.push(el);
        }
        let nb = keyword(next("NBFACES")?, "NBFACES")?;
        let mut bfaces = Vec::with_capacity(nb);
        for _ in 0..nb {
            let (ln, l) = next("boundary face")?;
            let v: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| perr(ln, format!("invalid boundary face: {e}")))?;
            if v.len() != 3 || v[0] == 0 || v[0] > ne || !(1..=6).contains(&v[1]) || v[2] > 9 {
                return Err(perr(ln, "expected '<elem> <face 1..6> <id 0..9>'".into()));
            }
            bfaces.push((v[0] - 1, v[1] - 1, v[2] as u8));
        }
        if let Some((ln, _)) = lines.next() {
            return Err(perr(ln, "trailing content".into()));
        }
        if elems.is_empty() {
            return Err(perr(0, "no elements".into()));
        }
        Ok(Self {
            points,
            elems,
            bfaces,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "HEXMESH 1");
        let _ = writeln!(s, "NPOINTS {}", self.points.len());
        for p in &self.points {
            let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
        }
        let _ = writeln!(s, "NELEMS {}", self.elems.len());
        for e in &self.elems {
            let idx: Vec<String> = e.iter().map(|i| (i + 1).to_string()).collect();
            let _ = writeln!(s, "{}", idx.join(" "));
        }
        let _ = writeln!(s, "NBFACES {}", self.bfaces.len());
        for (e, f, id) in &self.bfaces {
            let _ = writeln!(s, "{} {} {}", e + 1, f + 1, id);
        }
        s
    }

    /// Structured `nx x ny x nz` brick on the box `[lo, hi]`, x fastest.
    pub fn brick(n: [usize; 3], lo: [f64; 3], hi: [f64; 3]) -> Self {
        let [nx, ny, nz] = n;
        let id = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
        let mut points = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
        for k in 0..=nz {
            for j in 0..=ny {
                for i in 0..=nx {
                    let t = [i as f64 / nx as f64, j as f64 / ny as f64, k as f64 / nz as f64];
                    points.push(std::array::from_fn(|d| lo[d] + (hi[d] - lo[d]) * t[d]));
                }
            }
        }
        let mut elems = Vec::with_capacity(nx * ny * nz);
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    elems.push(VERTEX_COORDS.map(|c| {
                        id(i + c[0] as usize, j + c[1] as usize, k + c[2] as usize)
                    }));
                }
            }
        }
        Self {
            points,
            elems,
            bfaces: Vec::new(),
        }
    }

    pub fn unit_cube(n: usize) -> Self {
        Self::brick([n; 3], [0.0; 3], [1.0; 3])
    }
}

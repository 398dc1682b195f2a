//! Dense kernels for the DPG element system: packed Cholesky of the Gram
//! matrix, triangular solves, symmetric rank-k products and the condensed
//! Bubnov-Galerkin system.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetric matrix in upper column-packed storage, `k = j(j+1)/2 + i` for
/// `i <= j` (zero-based).
#[derive(Debug, Clone, PartialEq)]
pub struct PackedSym {
    pub n: usize,
    pub data: Vec<f64>,
}

#[inline]
pub fn nk(i: usize, j: usize) -> usize {
    if i <= j {
        j * (j + 1) / 2 + i
    } else {
        i * (i + 1) / 2 + j
    }
}

impl PackedSym {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[nk(i, j)]
    }

    /// Add to the entry `(i,j)`, `i <= j` expected.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[nk(i, j)] += v;
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        let mut p = Self::zeros(n);
        for j in 0..n {
            for i in 0..=j {
                p.data[nk(i, j)] = a[(i, j)];
            }
        }
        p
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

/// Dot product with four partial sums.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut s = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        s[0] += x[0] * y[0];
        s[1] += x[1] * y[1];
        s[2] += x[2] * y[2];
        s[3] += x[3] * y[3];
    }
    (s[0] + s[1]) + (s[2] + s[3]) + tail
}

#[inline]
fn col_start(j: usize) -> usize {
    j * (j + 1) / 2
}

/// Upper factor `U` (packed, same layout) with `U^T U = G`.
pub fn packed_cholesky(g: &PackedSym) -> Result<PackedSym> {
    let n = g.n;
    let mut u = g.clone();
    let d = &mut u.data;
    for j in 0..n {
        let cj = col_start(j);
        for i in 0..j {
            let ci = col_start(i);
            let s = d[cj + i] - dot(&d[ci..ci + i], &d[cj..cj + i]);
            d[cj + i] = s / d[ci + i];
        }
        let col = &d[cj..cj + j];
        let piv = d[cj + j] - dot(col, col);
        if piv <= 0.0 || !piv.is_finite() {
            return Err(Error::NotSpd { pivot: j + 1 });
        }
        d[cj + j] = piv.sqrt();
    }
    Ok(u)
}

/// Solve `U^T X = rhs` by forward substitution (columns independent).
pub fn packed_tri_solve(u: &PackedSym, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = u.n;
    if rhs.nrows() != n {
        return Err(Error::Dimension(format!(
            "triangular solve: factor is {n}x{n}, right-hand side has {} rows",
            rhs.nrows()
        )));
    }
    let mut x = rhs.clone();
    if n == 0 {
        return Ok(x);
    }
    for col in x.as_mut_slice().chunks_exact_mut(n) {
        for i in 0..n {
            let ci = col_start(i);
            let s = col[i] - dot(&u.data[ci..ci + i], &col[..i]);
            col[i] = s / u.data[ci + i];
        }
    }
    Ok(x)
}

/// `A^T A` computed on the upper triangle and mirrored.
pub fn syrk_upper_mirror(a: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.ncols();
    let mut c = DMatrix::zeros(m, m);
    let n = a.nrows();
    let data = a.as_slice();
    for j in 0..m {
        let cj = &data[j * n..(j + 1) * n];
        for i in 0..=j {
            c[(i, j)] = dot(&data[i * n..(i + 1) * n], cj);
        }
    }
    for j in 0..m {
        for i in j + 1..m {
            c[(i, j)] = c[(j, i)];
        }
    }
    c
}

/// Element DPG system: Gram matrix of the enriched test space and the
/// stiffness-plus-load block `[B | B^ | l]` (test dofs x (trial dofs + 1)).
#[derive(Debug, Clone)]
pub struct DpgElementSystem {
    pub ntest: usize,
    pub ntrial: usize,
    pub gram: PackedSym,
    pub stiff_all: DMatrix<f64>,
}

impl DpgElementSystem {
    pub fn new(ntest: usize, ntrial: usize) -> Self {
        Self {
            ntest,
            ntrial,
            gram: PackedSym::zeros(ntest),
            stiff_all: DMatrix::zeros(ntest, ntrial + 1),
        }
    }
}

/// Condensed system `B~^T B~`, `B~ = U^{-T} [B | B^ | l]`; the leading
/// `ntrial x ntrial` block is the stiffness, the last column the load.
pub fn condense_dpg(sys: &DpgElementSystem) -> Result<DMatrix<f64>> {
    if sys.stiff_all.nrows() != sys.ntest || sys.stiff_all.ncols() != sys.ntrial + 1 || sys.gram.n != sys.ntest {
        return Err(Error::Dimension("DPG element system sizes".into()));
    }
    if sys.ntest <= sys.ntrial {
        return Err(Error::Contract(format!(
            "test space ({}) must be larger than trial space ({})",
            sys.ntest, sys.ntrial
        )));
    }
    let u = packed_cholesky(&sys.gram)?;
    let bt = packed_tri_solve(&u, &sys.stiff_all)?;
    Ok(syrk_upper_mirror(&bt))
}

/// Residual `||U^{-T}(l - [B|B^] w)||^2` of a trial coefficient vector `w`.
pub fn dpg_residual(sys: &DpgElementSystem, w: &[f64]) -> Result<f64> {
    if w.len() != sys.ntrial {
        return Err(Error::Dimension(format!(
            "residual: {} trial coefficients, expected {}",
            w.len(),
            sys.ntrial
        )));
    }
    let u = packed_cholesky(&sys.gram)?;
    let mut r = DMatrix::zeros(sys.ntest, 1);
    for i in 0..sys.ntest {
        let mut s = sys.stiff_all[(i, sys.ntrial)];
        for (j, wj) in w.iter().enumerate() {
            s -= sys.stiff_all[(i, j)] * wj;
        }
        r[(i, 0)] = s;
    }
    let psi = packed_tri_solve(&u, &r)?;
    Ok(psi.iter().map(|v| v * v).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        &a * a.transpose() + DMatrix::identity(n, n) * n as f64
    }

    #[test]
    fn small_factors() {
        let u = packed_cholesky(&PackedSym { n: 1, data: vec![4.0] }).unwrap();
        assert_eq!(u.data, vec![2.0]);
        let g = PackedSym::from_dense(&DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 5.0]));
        let u = packed_cholesky(&g).unwrap();
        assert_eq!(u.data, vec![2.0, 1.0, 2.0]);
        let bad = PackedSym::from_dense(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]));
        assert!(matches!(packed_cholesky(&bad), Err(Error::NotSpd { pivot: 2 })));
    }

    #[test]
    fn triangular_solves() {
        let u = PackedSym { n: 2, data: vec![2.0, 1.0, 2.0] };
        let x = packed_tri_solve(&u, &DMatrix::from_column_slice(2, 1, &[4.0, 6.0])).unwrap();
        assert_eq!(x.as_slice(), &[2.0, 2.0]);
        let eye = PackedSym::from_dense(&DMatrix::identity(3, 3));
        let b = DMatrix::from_column_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(packed_tri_solve(&eye, &b).unwrap(), b);
        assert_eq!(packed_tri_solve(&eye, &DMatrix::zeros(3, 0)).unwrap().ncols(), 0);
        assert!(packed_tri_solve(&eye, &DMatrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn factor_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 5, 30, 200] {
            let g = random_spd(n, &mut rng);
            let u = packed_cholesky(&PackedSym::from_dense(&g)).unwrap();
            let ud = DMatrix::from_fn(n, n, |i, j| if i <= j { u.get(i, j) } else { 0.0 });
            let err = (ud.transpose() * &ud - &g).amax() / g.amax();
            assert!(err < 1e-12, "n={n} err={err}");
        }
    }

    #[test]
    fn scalar_condensation() {
        let mut s = DpgElementSystem::new(1, 0);
        s.gram.data[0] = 4.0;
        s.stiff_all[(0, 0)] = 8.0;
        // ntest must exceed ntrial; a 1x0 trial space still condenses the load
        let c = condense_dpg(&s).unwrap();
        assert!((c[(0, 0)] - 16.0).abs() < 1e-15);
        let mut s = DpgElementSystem::new(2, 1);
        s.gram = PackedSym::from_dense(&DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]));
        s.stiff_all = DMatrix::from_row_slice(2, 2, &[2.0, 8.0, 0.0, 0.0]);
        let c = condense_dpg(&s).unwrap();
        assert!((c[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((c[(0, 1)] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn saddle_point_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let (m, n) = (6, 3);
            let g = random_spd(m, &mut rng);
            let b = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
            let l = DMatrix::from_fn(m, 1, |_, _| rng.gen_range(-1.0..1.0));
            let mut sys = DpgElementSystem::new(m, n);
            sys.gram = PackedSym::from_dense(&g);
            sys.stiff_all.columns_mut(0, n).copy_from(&b);
            sys.stiff_all.column_mut(n).copy_from(&l.column(0));
            let c = condense_dpg(&sys).unwrap();
            // eliminate psi from [[G, B], [B^T, 0]] [psi; w] = [l; 0]
            let gi = g.clone().try_inverse().unwrap();
            let k = b.transpose() * &gi * &b;
            let f = b.transpose() * &gi * &l;
            assert!((c.view((0, 0), (n, n)) - &k).amax() < 1e-10);
            assert!((c.view((0, n), (n, 1)) - &f).amax() < 1e-10);
            let eig = c.view((0, 0), (n, n)).into_owned().symmetric_eigenvalues();
            assert!(eig.iter().all(|&e| e >= -1e-12));
            assert_eq!(c.transpose(), c);
        }
    }

    #[test]
    fn residual_vanishes_for_consistent_load() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (m, n) = (8, 3);
        let mut sys = DpgElementSystem::new(m, n);
        sys.gram = PackedSym::from_dense(&random_spd(m, &mut rng));
        let b = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
        let w = [0.3, -1.2, 2.0];
        let l = &b * nalgebra::DVector::from_column_slice(&w);
        sys.stiff_all.columns_mut(0, n).copy_from(&b);
        sys.stiff_all.column_mut(n).copy_from(&l);
        assert!(dpg_residual(&sys, &w).unwrap() < 1e-24);
        assert!(dpg_residual(&sys, &[0.0; 3]).unwrap() > 0.0);
    }
}

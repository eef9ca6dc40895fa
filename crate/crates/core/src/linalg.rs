//! Small dense complex linear algebra on top of `nalgebra`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::{DMatrix, DVector};

#[allow(unused_imports)]
use num_traits::Float;

use crate::{c64, CMat, Complex64, Error, Result};

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Induced 1-norm (max column sum).
pub fn norm1(m: &CMat) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `A⁻¹·B` by LU with partial pivoting.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    a.clone().lu().solve(b).ok_or_else(|| Error::Singular(format!("{}×{} system", a.nrows(), a.ncols())))
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    solve(a, &CMat::identity(a.nrows(), a.ncols()))
}

/// Matrix exponential by Padé(13) scaling and squaring.
pub fn expm(a: &CMat) -> CMat {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    let nrm = norm1(a);
    let s = if nrm > THETA13 { (nrm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a * c64(2f64.powi(-s), 0.0);
    let id = CMat::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let r = |x: f64| c64(x, 0.0);
    let u_in = &a6 * (&a6 * r(B[13]) + &a4 * r(B[11]) + &a2 * r(B[9]))
        + &a6 * r(B[7])
        + &a4 * r(B[5])
        + &a2 * r(B[3])
        + &id * r(B[1]);
    let u = &a * u_in;
    let v = &a6 * (&a6 * r(B[12]) + &a4 * r(B[10]) + &a2 * r(B[8]))
        + &a6 * r(B[6])
        + &a4 * r(B[4])
        + &a2 * r(B[2])
        + &id * r(B[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut e = solve(&q, &p).expect("Padé denominator is nonsingular for scaled input");
    for _ in 0..s {
        e = &e * &e;
    }
    e
}

/// Eigendecomposition `A = V·diag(λ)·V⁻¹` of a general complex matrix.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    pub vectors: CMat,
    pub inverse: CMat,
    /// `‖V‖₁·‖V⁻¹‖₁`.
    pub condition: f64,
}

/// General complex eigendecomposition via the Schur form and back substitution.
pub fn eigen(a: &CMat) -> Result<Eigen> {
    let n = a.nrows();
    let (q, t) = Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Singular(String::from("Schur iteration did not converge")))?
        .unpack();
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = max_abs(&t).max(1e-300);
    let mut y = CMat::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = c64(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = c64(0.0, 0.0);
            for j in i + 1..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - values[k];
            if d.norm() < f64::EPSILON * scale {
                d = c64(f64::EPSILON * scale, 0.0);
            }
            y[(i, k)] = -s / d;
        }
        let nrm = y.column(k).norm();
        y.column_mut(k).unscale_mut(nrm);
    }
    let vectors = &q * y;
    let inverse = inverse(&vectors)?;
    let condition = norm1(&vectors) * norm1(&inverse);
    Ok(Eigen { values, vectors, inverse, condition })
}

impl Eigen {
    /// `V·diag(f(λ))·V⁻¹`.
    pub fn apply_fn(&self, f: impl Fn(Complex64) -> Complex64) -> CMat {
        let mut left = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let mut col = left.column_mut(j);
            col *= f(l);
        }
        left * &self.inverse
    }
}

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and unitary eigenvectors.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let h = (a + a.adjoint()) * c64(0.5, 0.0);
    let se = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..se.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap_or(core::cmp::Ordering::Equal));
    let vals = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(a.nrows(), a.ncols(), |r, c| se.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// Eigendecomposition of a real symmetric matrix with ascending eigenvalues.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let se = SymmetricEigen::new(a.clone());
    let mut idx: Vec<usize> = (0..se.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap_or(core::cmp::Ordering::Equal));
    let vals = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(a.nrows(), a.ncols(), |r, c| se.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// Solves `A·X + X·B = C` through the Kronecker form `(I⊗A + Bᵀ⊗I)·vec(X) = vec(C)`.
pub fn sylvester(a: &CMat, b: &CMat, c: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let m = b.nrows();
    if a.ncols() != n || b.ncols() != m || c.nrows() != n || c.ncols() != m {
        return Err(Error::Dimension(String::from("Sylvester operands")));
    }
    let nm = n * m;
    let mut k = CMat::zeros(nm, nm);
    // vec is column-major: index (i, j) -> i + j n
    for j in 0..m {
        for i in 0..n {
            let row = i + j * n;
            for l in 0..n {
                k[(row, l + j * n)] += a[(i, l)];
            }
            for l in 0..m {
                k[(row, i + l * n)] += b[(l, j)];
            }
        }
    }
    let rhs = DVector::from_iterator(nm, (0..nm).map(|idx| c[(idx % n, idx / n)]));
    let lu = k.lu();
    let x = lu.solve(&rhs).ok_or_else(|| Error::Singular(String::from("Sylvester operator")))?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Singular(String::from("Sylvester operator")));
    }
    Ok(CMat::from_fn(n, m, |i, j| x[i + j * n]))
}

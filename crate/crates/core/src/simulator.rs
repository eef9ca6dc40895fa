//! Dense density-matrix emulation of circuit schedules under amplitude damping.
//!
//! An [`Operator`] on `n` qubits stores `4ⁿ` entries row-major, so the flat index is
//! `(row << n) | col`. Qubit `q` is bit `n−1−q` of the row and of the column index.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::circuit::{CircuitSchedule, Event, GateEvent, GateKind, Payload, U2, U4};
use crate::linalg::hermitian_eigen;
use crate::pauli::Pauli;
use crate::{c64, CMat, Complex64, Error, Result, DENSE_LIMIT};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Calls `f` on every index below `2^total` whose bits `lo < hi` are zero.
#[inline(always)]
fn for_bases2(total: usize, lo: usize, hi: usize, mut f: impl FnMut(usize)) {
    let (s0, s1) = (1usize << lo, 1usize << hi);
    let top = 1usize << total;
    let mut x = 0;
    while x < top {
        let mut y = x;
        while y < x + s1 {
            for i in y..y + s0 {
                f(i);
            }
            y += 2 * s0;
        }
        x += 2 * s1;
    }
}

/// Calls `f` on every index below `2^total` whose bits at the sorted positions `p` are zero.
#[inline(always)]
fn for_bases4(total: usize, p: [usize; 4], mut f: impl FnMut(usize)) {
    let s = [1usize << p[0], 1usize << p[1], 1usize << p[2], 1usize << p[3]];
    let top = 1usize << total;
    let mut x3 = 0;
    while x3 < top {
        let mut x2 = x3;
        while x2 < x3 + s[3] {
            let mut x1 = x2;
            while x1 < x2 + s[2] {
                let mut x0 = x1;
                while x0 < x1 + s[1] {
                    for i in x0..x0 + s[0] {
                        f(i);
                    }
                    x0 += 2 * s[0];
                }
                x1 += 2 * s[1];
            }
            x2 += 2 * s[2];
        }
        x3 += 2 * s[3];
    }
}

/// Nonzero entries of a 4×4 matrix, row by row.
struct Sparse4 {
    entries: [[(usize, Complex64); 4]; 4],
    len: [usize; 4],
}

impl Sparse4 {
    fn new(u: &U4) -> Self {
        let mut entries = [[(0, ZERO); 4]; 4];
        let mut len = [0; 4];
        for r in 0..4 {
            for k in 0..4 {
                if u[r][k] != ZERO {
                    entries[r][len[r]] = (k, u[r][k]);
                    len[r] += 1;
                }
            }
        }
        Sparse4 { entries, len }
    }

    #[inline(always)]
    fn row(&self, r: usize) -> &[(usize, Complex64)] {
        &self.entries[r][..self.len[r]]
    }
}

/// Amplitude damping on a 4×4 block for the qubit at local bit `m`.
#[inline(always)]
fn damp_block(m: &mut [[Complex64; 4]; 4], bit: usize, keep: f64) {
    let (p, s) = (1.0 - keep, keep.sqrt());
    for r0 in (0..4).filter(|r| r & bit == 0) {
        for c0 in (0..4).filter(|c| c & bit == 0) {
            let (r1, c1) = (r0 | bit, c0 | bit);
            let e = m[r1][c1];
            m[r0][c0] += e * p;
            m[r0][c1] *= s;
            m[r1][c0] *= s;
            m[r1][c1] = e * keep;
        }
    }
}

/// Square operator on a qubit register, acted on by superoperators `X → UXU†` and damping.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    n: usize,
    data: Vec<Complex64>,
}

impl Operator {
    pub fn zeros(n: usize) -> Result<Self> {
        if n > DENSE_LIMIT {
            return Err(Error::DenseLimit(n));
        }
        Ok(Operator { n, data: vec![ZERO; 1 << (2 * n)] })
    }

    /// Projector onto the computational basis state `index`.
    pub fn basis_projector(n: usize, index: usize) -> Result<Self> {
        let mut o = Self::zeros(n)?;
        if index >= 1 << n {
            return Err(Error::IndexOutOfRange { index, len: 1 << n });
        }
        o.data[(index << n) | index] = ONE;
        Ok(o)
    }

    pub fn from_matrix(m: &CMat) -> Result<Self> {
        let dim = m.nrows();
        if m.ncols() != dim || !dim.is_power_of_two() {
            return Err(Error::Dimension(format!("{}×{} is not a register operator", m.nrows(), m.ncols())));
        }
        let n = dim.trailing_zeros() as usize;
        let mut o = Self::zeros(n)?;
        for r in 0..dim {
            for c in 0..dim {
                o.data[(r << n) | c] = m[(r, c)];
            }
        }
        Ok(o)
    }

    pub fn to_matrix(&self) -> CMat {
        let dim = 1 << self.n;
        CMat::from_fn(dim, dim, |r, c| self.data[(r << self.n) | c])
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[(row << self.n) | col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.data[(i << self.n) | i]).sum()
    }

    pub fn scale(&mut self, s: Complex64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    fn check_qubit(&self, q: usize) -> Result<usize> {
        if q >= self.n {
            return Err(Error::IndexOutOfRange { index: q, len: self.n });
        }
        Ok(self.n - 1 - q)
    }

    /// `X → U X U†` for a single-qubit unitary, after amplitude damping with survival
    /// probability `keep` on the same qubit (`keep = 1` for none).
    pub fn apply_1q(&mut self, q: usize, u: &U2, keep: f64) -> Result<()> {
        let b = self.check_qubit(q)?;
        let n = self.n;
        let (cm, rm) = (1usize << b, 1usize << (n + b));
        let diag = u[0][1] == ZERO && u[1][0] == ZERO;
        let (p, s) = (1.0 - keep, keep.sqrt());
        let (u00, u01, u10, u11) = (u[0][0], u[0][1], u[1][0], u[1][1]);
        let (v00, v01, v10, v11) = (u00.conj(), u01.conj(), u10.conj(), u11.conj());
        assert_eq!(self.data.len(), 1 << (2 * n));
        let d = &mut self.data;
        if diag {
            let (f00, f01, f10, f11) = (u00 * v00, u00 * v11, u11 * v00, u11 * v11);
            let (g01, g10, g11) = (f01 * s, f10 * s, f11 * keep);
            for_bases2(2 * n, b, n + b, |i| {
                let e = d[i | rm | cm];
                d[i] = (d[i] + e * p) * f00;
                d[i | cm] *= g01;
                d[i | rm] *= g10;
                d[i | rm | cm] = e * g11;
            });
            return Ok(());
        }
        for_bases2(2 * n, b, n + b, |i| {
            let (i01, i10, i11) = (i | cm, i | rm, i | rm | cm);
            // SAFETY: `i` has bits `b` and `n+b` clear and is below `4ⁿ`, so all four indices are in range.
            let (mut a, mut bb, mut c, mut e) = unsafe { (*d.get_unchecked(i), *d.get_unchecked(i01), *d.get_unchecked(i10), *d.get_unchecked(i11)) };
            if keep != 1.0 {
                a += e * p;
                bb *= s;
                c *= s;
                e *= keep;
            }
            // T = U M
            let t00 = u00 * a + u01 * c;
            let t01 = u00 * bb + u01 * e;
            let t10 = u10 * a + u11 * c;
            let t11 = u10 * bb + u11 * e;
            // T U†
            unsafe {
                *d.get_unchecked_mut(i) = t00 * v00 + t01 * v01;
                *d.get_unchecked_mut(i01) = t00 * v10 + t01 * v11;
                *d.get_unchecked_mut(i10) = t10 * v00 + t11 * v01;
                *d.get_unchecked_mut(i11) = t10 * v10 + t11 * v11;
            }
        });
        Ok(())
    }

    /// Amplitude damping with survival probability `keep = 1 − p`: Kraus pair `diag(1, √keep)`, `√p·S⁻`.
    pub fn apply_damping(&mut self, q: usize, keep: f64) -> Result<()> {
        let b = self.check_qubit(q)?;
        if keep == 1.0 {
            return Ok(());
        }
        let n = self.n;
        let (cm, rm) = (1usize << b, 1usize << (n + b));
        let (p, s) = (1.0 - keep, keep.sqrt());
        let d = &mut self.data;
        for_bases2(2 * n, b, n + b, |i| {
            let e = d[i | rm | cm];
            d[i] += e * p;
            d[i | cm] *= s;
            d[i | rm] *= s;
            d[i | rm | cm] = e * keep;
        });
        Ok(())
    }

    /// Pauli X on qubit `q` on both sides.
    pub fn apply_x(&mut self, q: usize) -> Result<()> {
        let b = self.check_qubit(q)?;
        let n = self.n;
        let (cm, rm) = (1usize << b, 1usize << (n + b));
        let d = &mut self.data;
        for_bases2(2 * n, b, n + b, |i| {
            d.swap(i, i | rm | cm);
            d.swap(i | cm, i | rm);
        });
        Ok(())
    }

    fn two_bits(&self, a: usize, b: usize) -> Result<(usize, usize)> {
        let ba = self.check_qubit(a)?;
        let bb = self.check_qubit(b)?;
        if a == b {
            return Err(Error::InvalidArgument(format!("two-qubit gate on a repeated qubit {a}")));
        }
        Ok((ba, bb))
    }

    /// Controlled-Z.
    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        let mut u = [[ZERO; 4]; 4];
        for (k, row) in u.iter_mut().enumerate() {
            row[k] = if k == 3 { -ONE } else { ONE };
        }
        self.apply_2q_damped(a, b, &u, [1.0, 1.0])
    }

    /// CNOT with `control` and `target` on both sides.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        let mut u = [[ZERO; 4]; 4];
        for (k, j) in [0, 1, 3, 2].into_iter().enumerate() {
            u[k][j] = ONE;
        }
        self.apply_2q_damped(control, target, &u, [1.0, 1.0])
    }

    /// `X → UXU†` for a two-qubit unitary with `a` as the high bit of the 4×4 basis.
    pub fn apply_2q(&mut self, a: usize, b: usize, u: &U4) -> Result<()> {
        self.apply_2q_damped(a, b, u, [1.0, 1.0])
    }

    /// Damping with survival probabilities `keep` on `a` and `b`, then `X → UXU†`.
    pub fn apply_2q_damped(&mut self, a: usize, b: usize, u: &U4, keep: [f64; 2]) -> Result<()> {
        let (ba, bb) = self.two_bits(a, b)?;
        let n = self.n;
        let mut pos = [ba, bb, n + ba, n + bb];
        pos.sort_unstable();
        let rs = [0, 1usize << (n + bb), 1usize << (n + ba), (1usize << (n + ba)) | (1usize << (n + bb))];
        let cs = [0, 1usize << bb, 1usize << ba, (1usize << ba) | (1usize << bb)];
        let mut off = [0usize; 16];
        for r in 0..4 {
            for c in 0..4 {
                off[4 * r + c] = rs[r] | cs[c];
            }
        }
        assert_eq!(self.data.len(), 1 << (2 * n));
        let sp = Sparse4::new(u);
        let d = &mut self.data;
        if sp.len == [1; 4] {
            // One nonzero per row: out[r][c] = u[r][σr]·M[σr][σc]·conj(u[c][σc]).
            let mut src = [0usize; 16];
            let mut f = [ZERO; 16];
            for r in 0..4 {
                for c in 0..4 {
                    let ((kr, vr), (kc, vc)) = (sp.entries[r][0], sp.entries[c][0]);
                    src[4 * r + c] = 4 * kr + kc;
                    f[4 * r + c] = vr * vc.conj();
                }
            }
            for_bases4(2 * n, pos, |base| {
                let mut m = [[ZERO; 4]; 4];
                for r in 0..4 {
                    for c in 0..4 {
                        // SAFETY: `base` has the four gate bits clear and `off` only sets them.
                        m[r][c] = unsafe { *d.get_unchecked(base | off[4 * r + c]) };
                    }
                }
                if keep[0] != 1.0 {
                    damp_block(&mut m, 2, keep[0]);
                }
                if keep[1] != 1.0 {
                    damp_block(&mut m, 1, keep[1]);
                }
                for k in 0..16 {
                    unsafe { *d.get_unchecked_mut(base | off[k]) = f[k] * m[src[k] / 4][src[k] % 4] };
                }
            });
            return Ok(());
        }
        for_bases4(2 * n, pos, |base| {
            let mut m = [[ZERO; 4]; 4];
            for r in 0..4 {
                for c in 0..4 {
                    // SAFETY: as above.
                    m[r][c] = unsafe { *d.get_unchecked(base | off[4 * r + c]) };
                }
            }
            if keep[0] != 1.0 {
                damp_block(&mut m, 2, keep[0]);
            }
            if keep[1] != 1.0 {
                damp_block(&mut m, 1, keep[1]);
            }
            let mut t = [[ZERO; 4]; 4];
            for r in 0..4 {
                for &(k, v) in sp.row(r) {
                    for c in 0..4 {
                        t[r][c] += v * m[k][c];
                    }
                }
            }
            for c in 0..4 {
                let row = sp.row(c);
                for r in 0..4 {
                    let mut acc = ZERO;
                    for &(k, v) in row {
                        acc += t[r][k] * v.conj();
                    }
                    unsafe { *d.get_unchecked_mut(base | off[4 * r + c]) = acc };
                }
            }
        });
        Ok(())
    }

    /// `Tr(P_q · X)` for a single-qubit matrix `P` acting on qubit `q`.
    pub fn trace_with(&self, q: usize, p: &U2) -> Result<Complex64> {
        let b = self.check_qubit(q)?;
        let n = self.n;
        let bit = 1usize << b;
        let mut s = ZERO;
        for i0 in (0..1usize << n).filter(|i| i & bit == 0) {
            let i1 = i0 | bit;
            // Σ_{x,y} p[x][y] X[(y),(x)]
            s += p[0][0] * self.get(i0, i0) + p[0][1] * self.get(i1, i0) + p[1][0] * self.get(i0, i1) + p[1][1] * self.get(i1, i1);
        }
        Ok(s)
    }

    /// Left multiplication by a single-qubit matrix: `X → P_q X`.
    pub fn left_mul_1q(&mut self, q: usize, p: &U2) -> Result<()> {
        let b = self.check_qubit(q)?;
        let n = self.n;
        let rm = 1usize << (n + b);
        let d = &mut self.data;
        for i in (0..1usize << (2 * n)).filter(|i| i & rm == 0) {
            let (x0, x1) = (d[i], d[i | rm]);
            d[i] = p[0][0] * x0 + p[0][1] * x1;
            d[i | rm] = p[1][0] * x0 + p[1][1] * x1;
        }
        Ok(())
    }

    /// Reduced operator on `keep` (in the given order), tracing out every other qubit.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<CMat> {
        for &q in keep {
            self.check_qubit(q)?;
        }
        let n = self.n;
        let m = keep.len();
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let mut out = CMat::zeros(1 << m, 1 << m);
        let spread = |sub: usize, env: usize| {
            let mut idx = 0usize;
            for (j, &q) in keep.iter().enumerate() {
                if sub >> (m - 1 - j) & 1 == 1 {
                    idx |= 1 << (n - 1 - q);
                }
            }
            for (j, &q) in traced.iter().enumerate() {
                if env >> (traced.len() - 1 - j) & 1 == 1 {
                    idx |= 1 << (n - 1 - q);
                }
            }
            idx
        };
        for r in 0..1usize << m {
            for c in 0..1usize << m {
                let mut s = ZERO;
                for e in 0..1usize << traced.len() {
                    s += self.get(spread(r, e), spread(c, e));
                }
                out[(r, c)] = s;
            }
        }
        Ok(out)
    }
}

/// Normalized density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    /// `|0…0⟩⟨0…0|`.
    pub fn ground(n: usize) -> Result<Self> {
        Ok(DensityMatrix { op: Operator::basis_projector(n, 0)? })
    }

    pub fn from_operator(op: Operator) -> Result<Self> {
        let dm = DensityMatrix { op };
        let tr = dm.op.trace();
        if (tr - ONE).norm() > 1e-10 {
            return Err(Error::InvalidArgument(format!("trace {tr} is not 1")));
        }
        if dm.hermiticity_error() > 1e-10 {
            return Err(Error::InvalidArgument(String::from("operator is not Hermitian")));
        }
        Ok(dm)
    }

    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        if !psi.len().is_power_of_two() {
            return Err(Error::Dimension(format!("state of length {}", psi.len())));
        }
        let n = psi.len().trailing_zeros() as usize;
        let mut op = Operator::zeros(n)?;
        for r in 0..psi.len() {
            for c in 0..psi.len() {
                op.data[(r << n) | c] = psi[r] * psi[c].conj();
            }
        }
        DensityMatrix::from_operator(op)
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn operator_mut(&mut self) -> &mut Operator {
        &mut self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn n_qubits(&self) -> usize {
        self.op.n
    }

    pub fn trace(&self) -> Complex64 {
        self.op.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.op.dim();
        let mut e: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                e = e.max((self.op.get(r, c) - self.op.get(c, r).conj()).norm());
            }
        }
        e
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigen(&self.op.to_matrix()).0[0]
    }

    pub fn purity(&self) -> f64 {
        self.op.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_pure(&self, psi: &[Complex64]) -> f64 {
        let d = self.op.dim();
        let mut s = ZERO;
        for r in 0..d {
            for c in 0..d {
                s += psi[r].conj() * self.op.get(r, c) * psi[c];
            }
        }
        s.re
    }

    /// Occupation `⟨n_q⟩ = ⟨1|ρ_q|1⟩` of a qubit.
    pub fn occupation(&self, q: usize) -> Result<f64> {
        let p1 = [[ZERO, ZERO], [ZERO, ONE]];
        Ok(self.op.trace_with(q, &p1)?.re)
    }

    pub fn reduced(&self, keep: &[usize]) -> Result<CMat> {
        self.op.partial_trace(keep)
    }
}

/// Amplitude damping on noisy qubits with relaxation time `T1`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    pub t1: f64,
    pub noisy: Vec<bool>,
}

impl NoiseModel {
    pub fn new(t1: f64, noisy: Vec<bool>) -> Result<Self> {
        if !(t1 > 0.0) {
            return Err(Error::InvalidArgument(format!("T1 = {t1} must be positive")));
        }
        Ok(NoiseModel { t1, noisy })
    }

    /// Noise on the bath qubits of a schedule.
    pub fn for_schedule(sched: &CircuitSchedule, t1: f64) -> Result<Self> {
        Self::new(t1, sched.noisy.clone())
    }

    /// `p(Δt) = 1 − e^{−Δt/T1}`.
    pub fn probability(&self, dt: f64) -> f64 {
        if dt <= 0.0 {
            0.0
        } else if self.t1.is_infinite() {
            0.0
        } else {
            -(-dt / self.t1).exp_m1()
        }
    }

    /// `e^{−Δt/T1}`, the excited-state survival probability.
    pub fn survival(&self, dt: f64) -> f64 {
        if dt <= 0.0 || self.t1.is_infinite() {
            1.0
        } else {
            (-dt / self.t1).exp()
        }
    }

    pub fn is_noisy(&self, q: usize) -> bool {
        self.noisy.get(q).copied().unwrap_or(false)
    }
}

fn unitarity_error2(u: &U2) -> f64 {
    let mut e: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let s: Complex64 = (0..2).map(|k| u[i][k] * u[j][k].conj()).sum();
            e = e.max((s - if i == j { ONE } else { ZERO }).norm());
        }
    }
    e
}

fn unitarity_error4(u: &U4) -> f64 {
    let mut e: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let s: Complex64 = (0..4).map(|k| u[i][k] * u[j][k].conj()).sum();
            e = e.max((s - if i == j { ONE } else { ZERO }).norm());
        }
    }
    e
}

/// Checks payload shape and unitarity.
pub fn validate_gate(g: &GateEvent) -> Result<()> {
    let ok = matches!(
        (g.kind, &g.payload),
        (GateKind::SingleQubitUnitary, Payload::U2(_))
            | (GateKind::TwoQubitUnitary, Payload::U4(_))
            | (GateKind::ControlledPauli, Payload::Pauli { .. })
            | (GateKind::Cz | GateKind::Cnot | GateKind::X, Payload::None)
    );
    if !ok || g.qubits.len() != g.kind.arity() {
        return Err(Error::InvalidArgument(format!("malformed {} gate", g.kind.label())));
    }
    let e = match &g.payload {
        Payload::U2(u) => unitarity_error2(u),
        Payload::U4(u) => unitarity_error4(u),
        _ => 0.0,
    };
    if e > 1e-10 {
        return Err(Error::NotUnitary(e));
    }
    Ok(())
}

fn diag4(v: [Complex64; 4]) -> U4 {
    let mut u = [[ZERO; 4]; 4];
    for k in 0..4 {
        u[k][k] = v[k];
    }
    u
}

fn controlled_matrix(letter: Pauli, control_state: bool) -> U4 {
    let p = letter.matrix();
    let mut u = [[ZERO; 4]; 4];
    let (on, off) = if control_state { (2, 0) } else { (0, 2) };
    u[off][off] = ONE;
    u[off + 1][off + 1] = ONE;
    for i in 0..2 {
        for j in 0..2 {
            u[on + i][on + j] = p[i][j];
        }
    }
    u
}

/// Applies a gate after damping its qubits with survival probabilities `keep`.
fn apply_gate_damped(op: &mut Operator, g: &GateEvent, keep: [f64; 2]) -> Result<()> {
    match (&g.payload, g.kind) {
        (Payload::U2(u), _) => return op.apply_1q(g.qubits[0], u, keep[0]),
        (_, GateKind::X) if keep[0] != 1.0 => {
            let x = Pauli::X.matrix();
            return op.apply_1q(g.qubits[0], &x, keep[0]);
        }
        _ => {}
    }
    let u = match (&g.payload, g.kind) {
        (_, GateKind::X) => return op.apply_x(g.qubits[0]),
        (_, GateKind::Cz) => diag4([ONE, ONE, ONE, -ONE]),
        (_, GateKind::Cnot) => controlled_matrix(Pauli::X, true),
        (Payload::U4(u), _) => *u,
        (Payload::Pauli { letter, control_state }, _) => controlled_matrix(*letter, *control_state),
        _ => return Err(Error::InvalidArgument(format!("malformed {} gate", g.kind.label()))),
    };
    op.apply_2q_damped(g.qubits[0], g.qubits[1], &u, keep)
}

/// `ρ → UρU†` for one gate event.
pub fn apply_gate(rho: &mut DensityMatrix, g: &GateEvent) -> Result<()> {
    validate_gate(g)?;
    apply_gate_damped(&mut rho.op, g, [1.0, 1.0])
}

/// Amplitude damping of duration `dt` on `qubit`; no-op on noiseless qubits.
pub fn apply_damping(rho: &mut DensityMatrix, qubit: usize, dt: f64, nm: &NoiseModel) -> Result<()> {
    if !(dt >= 0.0) {
        return Err(Error::InvalidArgument(format!("negative duration {dt}")));
    }
    if !nm.is_noisy(qubit) {
        rho.op.check_qubit(qubit)?;
        return Ok(());
    }
    rho.op.apply_damping(qubit, nm.survival(dt))
}

/// Event-by-event evolution. With `lazy` set, damping accumulated on a qubit is applied only
/// when a gate next touches it (or on [`Evolution::flush`]), which gives the same state
/// because damping commutes with gates on other qubits.
#[derive(Clone, Debug)]
pub struct Evolution<'a> {
    nm: &'a NoiseModel,
    pending: Vec<f64>,
    lazy: bool,
}

impl<'a> Evolution<'a> {
    pub fn new(nm: &'a NoiseModel, n_qubits: usize, lazy: bool) -> Self {
        Evolution { nm, pending: vec![0.0; n_qubits], lazy }
    }

    fn take(&mut self, q: usize) -> f64 {
        let dt = core::mem::replace(&mut self.pending[q], 0.0);
        self.nm.survival(dt)
    }

    /// Adds `dt` of idle damping to every noisy qubit.
    pub fn idle(&mut self, op: &mut Operator, dt: f64) -> Result<()> {
        if !(dt >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative duration {dt}")));
        }
        for q in 0..self.pending.len() {
            if self.nm.is_noisy(q) {
                if self.lazy {
                    self.pending[q] += dt;
                } else {
                    op.apply_damping(q, self.nm.survival(dt))?;
                }
            }
        }
        Ok(())
    }

    pub fn gate(&mut self, op: &mut Operator, g: &GateEvent) -> Result<()> {
        validate_gate(g)?;
        if g.qubits.iter().any(|&q| q >= self.pending.len()) {
            return Err(Error::Dimension(format!("gate on qubits {:?} in a {}-qubit register", g.qubits, self.pending.len())));
        }
        let mut keep = [1.0; 2];
        if self.lazy {
            for (k, &q) in g.qubits.iter().enumerate() {
                keep[k] = self.take(q);
            }
        }
        apply_gate_damped(op, g, keep)?;
        self.idle(op, g.duration)
    }

    pub fn event(&mut self, op: &mut Operator, e: &Event) -> Result<()> {
        match e {
            Event::Gate(g) => self.gate(op, g),
            Event::Wait(d) => self.idle(op, *d),
        }
    }

    /// Applies all pending damping.
    pub fn flush(&mut self, op: &mut Operator) -> Result<()> {
        for q in 0..self.pending.len() {
            let keep = self.take(q);
            if keep != 1.0 {
                op.apply_damping(q, keep)?;
            }
        }
        Ok(())
    }
}

/// Runs a schedule from `|0…0⟩⟨0…0|`.
pub fn run_schedule(sched: &CircuitSchedule, nm: &NoiseModel) -> Result<DensityMatrix> {
    run_schedule_observed(sched, nm, true, |_, _| Ok(()))
}

/// Runs a schedule and hands the state to `observe` after every event. Observation forces the
/// eager damping order.
pub fn run_schedule_observed(
    sched: &CircuitSchedule,
    nm: &NoiseModel,
    lazy: bool,
    mut observe: impl FnMut(usize, &DensityMatrix) -> Result<()>,
) -> Result<DensityMatrix> {
    let mut rho = DensityMatrix::ground(sched.n_qubits)?;
    let mut ev = Evolution::new(nm, sched.n_qubits, lazy);
    for (i, e) in sched.events.iter().enumerate() {
        ev.event(&mut rho.op, e)?;
        if !lazy {
            observe(i, &rho)?;
        }
    }
    ev.flush(&mut rho.op)?;
    Ok(rho)
}

/// Dissipation rate `(T_trotter + T_wait)/(2·T1·τ)` realized by a schedule under `nm`.
pub fn dissipation_rate_check(sched: &CircuitSchedule, nm: &NoiseModel) -> Result<f64> {
    let m = sched.meta.as_ref().ok_or_else(|| Error::InvalidArgument(String::from("schedule has no timing metadata")))?;
    Ok((m.t_trotter + m.t_wait) / (2.0 * nm.t1 * m.tau))
}

/// Serializes a state as an 8-byte little-endian qubit count followed by `4ⁿ` little-endian
/// complex doubles, row-major.
pub fn state_to_bytes(rho: &DensityMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 16 * rho.op.data.len());
    out.extend_from_slice(&(rho.op.n as u64).to_le_bytes());
    for z in &rho.op.data {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn state_from_bytes(bytes: &[u8]) -> Result<DensityMatrix> {
    if bytes.len() < 8 {
        return Err(Error::Parse { line: 0, msg: String::from("missing qubit count") });
    }
    let n = u64::from_le_bytes(bytes[..8].try_into().expect("eight bytes")) as usize;
    if n > DENSE_LIMIT {
        return Err(Error::DenseLimit(n));
    }
    let len = 1usize << (2 * n);
    if bytes.len() != 8 + 16 * len {
        return Err(Error::Parse { line: 0, msg: format!("expected {} bytes, found {}", 8 + 16 * len, bytes.len()) });
    }
    let f = |k: usize| f64::from_le_bytes(bytes[8 + 8 * k..16 + 8 * k].try_into().expect("eight bytes"));
    let data = (0..len).map(|i| c64(f(2 * i), f(2 * i + 1))).collect();
    Ok(DensityMatrix { op: Operator { n, data } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::embed_single;

    fn sample(n: usize) -> Operator {
        let d = 1 << n;
        let m = CMat::from_fn(d, d, |r, c| c64(((r * 5 + c * 3) % 7) as f64 - 3.0, ((r + 2 * c) % 5) as f64 - 2.0));
        Operator::from_matrix(&m).unwrap()
    }

    fn close(a: &CMat, b: &CMat) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn one_qubit_kernel_matches_dense() {
        let h = crate::circuit::hadamard();
        for q in 0..3 {
            let mut o = sample(3);
            let m = o.to_matrix();
            o.apply_1q(q, &h, 1.0).unwrap();
            let u = embed_single(3, q, &h).unwrap();
            assert!(close(&o.to_matrix(), &(&u * m * u.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn two_qubit_kernel_matches_dense() {
        let u4 = crate::circuit::xx_yy_rotation(0.3, 1.0, -1.0);
        let m4 = CMat::from_fn(4, 4, |r, c| u4[r][c]);
        for (a, b) in [(0, 2), (2, 0), (1, 2)] {
            let mut o = sample(3);
            let m = o.to_matrix();
            o.apply_2q(a, b, &u4).unwrap();
            // dense embedding: permute qubits so that (a, b, rest)
            let mut u = CMat::zeros(8, 8);
            for r in 0..8usize {
                for c in 0..8usize {
                    let bit = |x: usize, q: usize| (x >> (2 - q)) & 1;
                    let rest = (0..3).filter(|&q| q != a && q != b).all(|q| bit(r, q) == bit(c, q));
                    if rest {
                        u[(r, c)] = m4[(2 * bit(r, a) + bit(r, b), 2 * bit(c, a) + bit(c, b))];
                    }
                }
            }
            assert!(close(&o.to_matrix(), &(&u * m * u.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn damping_textbook() {
        let mut rho = DensityMatrix::ground(1).unwrap();
        rho.op.apply_x(0).unwrap();
        rho.op.apply_damping(0, 0.7).unwrap();
        assert!((rho.op.get(1, 1).re - 0.7).abs() < 1e-15);
        assert!((rho.op.get(0, 0).re - 0.3).abs() < 1e-15);
    }
}

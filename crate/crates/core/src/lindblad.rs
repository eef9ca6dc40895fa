//! Exact Green's functions of quadratic fermionic Lindbladians.
//!
//! A free-fermion Lindbladian with Hamiltonian `Σ h_kl c_k†c_l`, gain jumps with rate
//! matrix Λ⁺ and loss jumps with rate matrix Λ⁻ is fully described by
//! `L = −ih − (Λ⁺ + Λ⁻)`. The one-particle density matrix `R_kl = ⟨c_l†c_k⟩` obeys
//! `dR/dt = LR + RL† + 2Λ⁺`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;


#[allow(unused_imports)]
use num_traits::Float;

use crate::bath::{ClosedBath, HybridizationSpec, Parity, PseudomodeBath};
use crate::linalg::{eigen, expm, hermitian_eigen, max_abs, symmetric_eigen, sylvester, Eigen};
use crate::quadrature::{integrate_with_points, Tolerance};
use crate::special::fermi;
use crate::{c64, CMat, Complex64, Error, Result};

/// Single-particle description `(h, Λ⁺, Λ⁻)` of a quadratic Lindbladian.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticLindblad {
    h: CMat,
    gain: CMat,
    loss: CMat,
}

impl QuadraticLindblad {
    pub fn new(h: CMat, gain: CMat, loss: CMat) -> Result<Self> {
        let n = h.nrows();
        for (name, m) in [("h", &h), ("Λ⁺", &gain), ("Λ⁻", &loss)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Dimension(format!("{name} is {}×{}, expected {n}×{n}", m.nrows(), m.ncols())));
            }
            if max_abs(&(m - m.adjoint())) > 1e-12 {
                return Err(Error::InvalidArgument(format!("{name} is not Hermitian")));
            }
        }
        for (name, m) in [("Λ⁺", &gain), ("Λ⁻", &loss)] {
            if n > 0 && hermitian_eigen(m).0[0] < -1e-10 {
                return Err(Error::InvalidArgument(format!("{name} is not positive semidefinite")));
            }
        }
        Ok(QuadraticLindblad { h, gain, loss })
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn h(&self) -> &CMat {
        &self.h
    }

    pub fn gain(&self) -> &CMat {
        &self.gain
    }

    pub fn loss(&self) -> &CMat {
        &self.loss
    }

    /// `L = −ih − (Λ⁺ + Λ⁻)`.
    pub fn l_matrix(&self) -> CMat {
        &self.h * c64(0.0, -1.0) - &self.gain - &self.loss
    }
}

/// Star-geometry Lindbladian of an impurity (index 0) coupled to pseudomodes (index `p + 1`).
pub fn build_lindblad(imp_energy: f64, bath: &PseudomodeBath) -> QuadraticLindblad {
    let n = bath.n_modes() + 1;
    let mut h = CMat::zeros(n, n);
    let mut gain = CMat::zeros(n, n);
    let mut loss = CMat::zeros(n, n);
    h[(0, 0)] = c64(imp_energy, 0.0);
    for p in 0..bath.n_modes() {
        let v = c64(bath.couplings[p], 0.0);
        h[(0, p + 1)] = v;
        h[(p + 1, 0)] = v;
        h[(p + 1, p + 1)] = c64(bath.energies[p], 0.0);
        match bath.parity[p] {
            Parity::Emitter => gain[(p + 1, p + 1)] = c64(bath.rate, 0.0),
            Parity::Absorber => loss[(p + 1, p + 1)] = c64(bath.rate, 0.0),
        }
    }
    QuadraticLindblad { h, gain, loss }
}

/// Impurity hopping onto a closed bath, as a Hermitian `(N_b+1)×(N_b+1)` matrix.
pub fn closed_hamiltonian(imp_energy: f64, bath: &ClosedBath) -> nalgebra::DMatrix<f64> {
    let n = bath.n_modes() + 1;
    let mut h = nalgebra::DMatrix::zeros(n, n);
    h[(0, 0)] = imp_energy;
    for p in 0..bath.n_modes() {
        h[(0, p + 1)] = bath.couplings[p];
        h[(p + 1, 0)] = bath.couplings[p];
        h[(p + 1, p + 1)] = bath.energies[p];
    }
    h
}

/// One-particle density matrix `R_kl = ⟨c_l†c_k⟩` of a steady state.
#[derive(Clone, Debug, PartialEq)]
pub struct SteadyRDM {
    pub r: CMat,
}

impl SteadyRDM {
    /// `‖RL† + LR + 2Λ⁺‖∞` (largest entry).
    pub fn residual(&self, ql: &QuadraticLindblad) -> f64 {
        let l = ql.l_matrix();
        max_abs(&(&self.r * l.adjoint() + &l * &self.r + &ql.gain * c64(2.0, 0.0)))
    }

    /// Impurity occupation `R_00`.
    pub fn occupation(&self) -> f64 {
        self.r[(0, 0)].re
    }
}

/// Solves `RL† + LR = −2Λ⁺`.
pub fn steady_state(ql: &QuadraticLindblad) -> Result<SteadyRDM> {
    let l = ql.l_matrix();
    let r = sylvester(&l, &l.adjoint(), &(&ql.gain * c64(-2.0, 0.0)))
        .map_err(|_| Error::Singular(String::from("steady state is not unique (undamped mode)")))?;
    let r = (&r + r.adjoint()) * c64(0.5, 0.0);
    Ok(SteadyRDM { r })
}

/// Initial one-particle density matrix with emitters filled and everything else empty.
pub fn initial_rdm(bath: &PseudomodeBath) -> CMat {
    let n = bath.n_modes() + 1;
    let mut r = CMat::zeros(n, n);
    for p in bath.emitters() {
        r[(p + 1, p + 1)] = c64(1.0, 0.0);
    }
    r
}

/// `e^{Lt}` for many times, from an eigendecomposition of `L` or, when the eigenvectors are
/// ill-conditioned, from Padé scaling and squaring at each time.
#[derive(Clone, Debug)]
pub struct Propagator {
    l: CMat,
    eig: Option<Eigen>,
}

impl Propagator {
    pub fn new(l: CMat) -> Self {
        let eig = eigen(&l).ok().filter(|e| e.condition <= 1e8);
        Propagator { l, eig }
    }

    pub fn is_diagonalized(&self) -> bool {
        self.eig.is_some()
    }

    pub fn exp(&self, t: f64) -> CMat {
        match &self.eig {
            Some(e) => e.apply_fn(|z| (z * t).exp()),
            None => expm(&(&self.l * c64(t, 0.0))),
        }
    }

    /// `[e^{Lt} x]_row` for many times at the cost of one eigen-solve.
    fn element_series(&self, row: usize, x: &CMat, times: &[f64]) -> Vec<Complex64> {
        match &self.eig {
            Some(e) => {
                let w = &e.inverse * x;
                times
                    .iter()
                    .map(|&t| (0..e.values.len()).map(|j| e.vectors[(row, j)] * (e.values[j] * t).exp() * w[(j, 0)]).sum())
                    .collect()
            }
            None => times.iter().map(|&t| (self.exp(t) * x)[(row, 0)]).collect(),
        }
    }
}

/// Green's function component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Component {
    Greater,
    Lesser,
    Retarded,
}

impl Component {
    pub fn label(self) -> &'static str {
        match self {
            Component::Greater => "greater",
            Component::Lesser => "lesser",
            Component::Retarded => "retarded",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "greater" => Some(Component::Greater),
            "lesser" => Some(Component::Lesser),
            "retarded" => Some(Component::Retarded),
            _ => None,
        }
    }
}

/// Where a Green's function series comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    ExactOriginal,
    ExactPm,
    ClosedBath,
    Circuit,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::ExactOriginal => "exact_original",
            Provenance::ExactPm => "exact_pm",
            Provenance::ClosedBath => "closed_bath",
            Provenance::Circuit => "circuit",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "exact_original" => Some(Provenance::ExactOriginal),
            "exact_pm" => Some(Provenance::ExactPm),
            "closed_bath" => Some(Provenance::ClosedBath),
            "circuit" => Some(Provenance::Circuit),
            _ => None,
        }
    }
}

/// Sampled impurity Green's function.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenSeries {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub component: Component,
    pub provenance: Provenance,
}

impl GreenSeries {
    pub fn new(times: Vec<f64>, values: Vec<Complex64>, component: Component, provenance: Provenance) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Dimension(format!("{} times, {} values", times.len(), values.len())));
        }
        if times.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidArgument(String::from("times must be sorted")));
        }
        Ok(GreenSeries { times, values, component, provenance })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Green's functions of a quadratic Lindbladian in its steady state, cached for many times.
#[derive(Clone, Debug)]
pub struct LindbladGf {
    prop: Propagator,
    r: CMat,
}

impl LindbladGf {
    pub fn new(ql: &QuadraticLindblad, rdm: &SteadyRDM) -> Self {
        LindbladGf { prop: Propagator::new(ql.l_matrix()), r: rdm.r.clone() }
    }

    /// Full matrix `G(t)`; negative times use `G^≷(−t) = −G^≷(t)†`.
    pub fn at(&self, t: f64, component: Component) -> CMat {
        let n = self.r.nrows();
        if t < 0.0 {
            return match component {
                Component::Retarded => CMat::zeros(n, n),
                c => -self.at(-t, c).adjoint(),
            };
        }
        let e = self.prop.exp(t);
        match component {
            Component::Greater => e * (CMat::identity(n, n) - &self.r) * c64(0.0, -1.0),
            Component::Lesser => e * &self.r * c64(0.0, 1.0),
            Component::Retarded => e * c64(0.0, -1.0),
        }
    }

    /// Impurity element for nonnegative times.
    pub fn impurity_series(&self, times: &[f64], component: Component) -> Vec<Complex64> {
        let n = self.r.nrows();
        let (x, pre) = match component {
            Component::Greater => (CMat::identity(n, n) - &self.r, c64(0.0, -1.0)),
            Component::Lesser => (self.r.clone(), c64(0.0, 1.0)),
            Component::Retarded => (CMat::identity(n, n), c64(0.0, -1.0)),
        };
        let col = x.columns(0, 1).into_owned();
        let pos: Vec<f64> = times.iter().map(|t| t.abs()).collect();
        let vals = self.prop.element_series(0, &col, &pos);
        times
            .iter()
            .zip(vals)
            .map(|(&t, v)| {
                let g = v * pre;
                if t >= 0.0 {
                    g
                } else if component == Component::Retarded {
                    c64(0.0, 0.0)
                } else {
                    -g.conj()
                }
            })
            .collect()
    }
}

/// `G(t)` of the steady state for one time.
pub fn gf_time(ql: &QuadraticLindblad, rdm: &SteadyRDM, t: f64, component: Component) -> CMat {
    LindbladGf::new(ql, rdm).at(t, component)
}

/// Impurity greater Green's function of the pseudomode model on a time grid.
pub fn pm_greater_series(ql: &QuadraticLindblad, rdm: &SteadyRDM, times: &[f64]) -> Result<GreenSeries> {
    let g = LindbladGf::new(ql, rdm);
    GreenSeries::new(times.to_vec(), g.impurity_series(times, Component::Greater), Component::Greater, Provenance::ExactPm)
}

/// Frequency-domain Green's functions at one real frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct FreqGf {
    pub retarded: CMat,
    pub advanced: CMat,
    pub lesser: CMat,
    pub greater: CMat,
}

/// `G^R = (ω−iL)⁻¹`, `G^A = (ω+iL†)⁻¹`, `G^< = 2iG^RΛ⁺G^A`, `G^> = −2iG^RΛ⁻G^A`.
pub fn gf_freq(ql: &QuadraticLindblad, _rdm: &SteadyRDM, w: f64) -> Result<FreqGf> {
    let n = ql.dim();
    let l = ql.l_matrix();
    let a = CMat::identity(n, n) * c64(w, 0.0) - &l * c64(0.0, 1.0);
    let retarded = crate::linalg::inverse(&a)?;
    let advanced = retarded.adjoint();
    let lesser = &retarded * &ql.gain * &advanced * c64(0.0, 2.0);
    let greater = &retarded * &ql.loss * &advanced * c64(0.0, -2.0);
    Ok(FreqGf { retarded, advanced, lesser, greater })
}

/// Exact steady-state greater Green's function of the impurity coupled to the flat band,
/// by frequency integration of `G^>(ω) = G^R(ω)Δ^>(ω)G^A(ω)`.
pub fn rlm_reference_gf(spec: &HybridizationSpec, times: &[f64]) -> Result<GreenSeries> {
    let eps = spec.epsilon_imp;
    let beta = spec.beta;
    if spec.gamma == 0.0 {
        let occ = fermi(beta * eps);
        let values = times
            .iter()
            .map(|&t| c64(0.0, -1.0) * c64(0.0, -eps * t).exp() * (1.0 - occ))
            .map(|g| g)
            .collect();
        return GreenSeries::new(times.to_vec(), values, Component::Greater, Provenance::ExactOriginal);
    }
    let d = spec.half_bandwidth;
    let s = *spec;
    // Spectral weight times the empty-state factor.
    let weight = move |w: f64| {
        let gr = c64(1.0, 0.0) / (c64(w - eps, 0.0) - s.delta_retarded(w));
        s.greater_spectrum(w) * gr.norm_sqr()
    };
    let width = PI * spec.delta(0.0);
    let shift = eps - spec.delta_retarded(eps).re;
    let mut points = vec![0.0, eps, shift];
    for k in 0..10 {
        let off = width * 10f64.powi(k - 1);
        points.extend([shift - off, shift + off]);
    }
    let tol = Tolerance { abs: 1e-13, rel: 1e-10, max_intervals: 50_000 };
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        let q = integrate_with_points(|w: f64| c64(0.0, -w * t).exp() * weight(w), -d, d, &points, tol)?;
        values.push(c64(0.0, -1.0) * q.value);
    }
    GreenSeries::new(times.to_vec(), values, Component::Greater, Provenance::ExactOriginal)
}

/// Greater Green's function of the impurity hybridized with a closed bath in its Gibbs state.
pub fn closed_bath_gf(spec: &HybridizationSpec, bath: &ClosedBath, times: &[f64]) -> Result<GreenSeries> {
    let h = closed_hamiltonian(spec.epsilon_imp, bath);
    let (vals, vecs) = symmetric_eigen(&h);
    let weights: Vec<f64> = (0..vals.len()).map(|k| vecs[(0, k)] * vecs[(0, k)] * fermi(-bath.beta * vals[k])).collect();
    let values = times
        .iter()
        .map(|&t| {
            let s: Complex64 = vals.iter().zip(&weights).map(|(&e, &w)| c64(0.0, -e * t).exp() * w).sum();
            s * c64(0.0, -1.0)
        })
        .collect();
    GreenSeries::new(times.to_vec(), values, Component::Greater, Provenance::ClosedBath)
}

/// Smallest real part among the eigenvalues of `ih + Λ⁺ + Λ⁻`.
pub fn slowest_mode_rate(ql: &QuadraticLindblad) -> Result<f64> {
    let m = -ql.l_matrix();
    Ok(eigen(&m)?.values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min))
}

/// Relaxation rate of the one-particle density matrix and of the preparation error.
///
/// The density matrix relaxes as `e^{Lt}(R₀−R)e^{L†t}`, so its slowest component decays at
/// twice the slowest single-particle rate.
pub fn relaxation_rate(ql: &QuadraticLindblad) -> Result<f64> {
    Ok(2.0 * slowest_mode_rate(ql)?)
}

/// Propagates `R` under `dR/dt = LR + RL† + 2Λ⁺`.
pub fn propagate_rdm(ql: &QuadraticLindblad, rdm: &SteadyRDM, r_init: &CMat, t: f64) -> CMat {
    let e = Propagator::new(ql.l_matrix()).exp(t);
    &e * (r_init - &rdm.r) * e.adjoint() + &rdm.r
}

/// `sqrt(∫₀^150 |G^>_{t_prep}(t) − G^>_{100}(t)|² dt)` for each preparation time, where
/// `G^>_{t_prep}` is built from the density matrix propagated from `r_init` for `t_prep`.
pub fn prep_error(ql: &QuadraticLindblad, r_init: &CMat, t_prep_list: &[f64]) -> Result<Vec<f64>> {
    let n = ql.dim();
    if r_init.nrows() != n || r_init.ncols() != n {
        return Err(Error::Dimension(format!("initial 1-RDM is {}×{}, expected {n}×{n}", r_init.nrows(), r_init.ncols())));
    }
    let rdm = steady_state(ql)?;
    let prop = Propagator::new(ql.l_matrix());
    let r_at = |tp: f64| {
        let e = prop.exp(tp);
        &e * (r_init - &rdm.r) * e.adjoint() + &rdm.r
    };
    let r_ref = r_at(100.0);
    let dt = 0.1;
    let times: Vec<f64> = (0..=1500).map(|i| i as f64 * dt).collect();
    t_prep_list
        .iter()
        .map(|&tp| {
            let diff = r_at(tp) - &r_ref;
            let col = diff.columns(0, 1).into_owned();
            let vals = prop.element_series(0, &col, &times);
            let sq: Vec<f64> = vals.iter().map(|z| z.norm_sqr()).collect();
            let integral = dt * (sq.iter().sum::<f64>() - 0.5 * (sq[0] + sq[sq.len() - 1]));
            Ok(integral.sqrt())
        })
        .collect()
}

/// Root-mean-square deviation between two series sampled on the same times.
pub fn eps_tot(a: &GreenSeries, b: &GreenSeries) -> Result<f64> {
    if a.len() != b.len() || a.times.iter().zip(&b.times).any(|(x, y)| (x - y).abs() > 1e-9 * (1.0 + x.abs())) {
        return Err(Error::Dimension(String::from("time grids differ")));
    }
    if a.is_empty() {
        return Err(Error::Dimension(String::from("empty series")));
    }
    let s: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm_sqr()).sum();
    Ok((s / a.len() as f64).sqrt())
}

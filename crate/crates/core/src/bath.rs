//! Hybridization functions of the resonant level model, closed-bath discretization
//! and the Lorentzian pseudomode fit.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;

#[allow(unused_imports)]
use num_traits::Float;

use crate::qp::nonneg_qp;
use crate::quadrature::{integrate_line, Tolerance};
use crate::special::{erf, fermi, invert_monotone};
use crate::{c64, Complex64, Error, Result};

/// Flat-band bath of the resonant level model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HybridizationSpec {
    pub gamma: f64,
    pub half_bandwidth: f64,
    pub beta: f64,
    pub epsilon_imp: f64,
}

impl HybridizationSpec {
    pub fn new(gamma: f64, half_bandwidth: f64, beta: f64, epsilon_imp: f64) -> Result<Self> {
        if !(half_bandwidth > 0.0) || !(beta >= 0.0) || !(gamma >= 0.0) || !epsilon_imp.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "need D > 0, β ≥ 0, γ ≥ 0 (got D={half_bandwidth}, β={beta}, γ={gamma})"
            )));
        }
        Ok(HybridizationSpec { gamma, half_bandwidth, beta, epsilon_imp })
    }

    /// γ = 0.6, D = 10, β = 1, ε = 0.5.
    pub fn resonant_level() -> Self {
        HybridizationSpec { gamma: 0.6, half_bandwidth: 10.0, beta: 1.0, epsilon_imp: 0.5 }
    }

    /// Δ(ω) = γ²/(2D) inside the band.
    pub fn delta(&self, w: f64) -> f64 {
        if w.abs() <= self.half_bandwidth {
            self.gamma * self.gamma / (2.0 * self.half_bandwidth)
        } else {
            0.0
        }
    }

    /// Occupied part `Δ(ω)/(1+e^{βω})`.
    pub fn lesser_spectrum(&self, w: f64) -> f64 {
        self.delta(w) * fermi(self.beta * w)
    }

    /// Empty part `Δ(ω)/(1+e^{−βω})`.
    pub fn greater_spectrum(&self, w: f64) -> f64 {
        self.delta(w) * fermi(-self.beta * w)
    }

    /// Δ^<(ω) = 2πi·f^<(ω).
    pub fn delta_lesser(&self, w: f64) -> Complex64 {
        c64(0.0, 2.0 * PI * self.lesser_spectrum(w))
    }

    /// Δ^>(ω) = −2πi·f^>(ω).
    pub fn delta_greater(&self, w: f64) -> Complex64 {
        c64(0.0, -2.0 * PI * self.greater_spectrum(w))
    }

    /// Retarded hybridization; the real part is the Hilbert transform of the flat band.
    pub fn delta_retarded(&self, w: f64) -> Complex64 {
        let d = self.half_bandwidth;
        let g2 = self.gamma * self.gamma / (2.0 * d);
        let re = if (w.abs() - d).abs() < f64::EPSILON * d {
            f64::INFINITY.copysign(w)
        } else {
            g2 * ((w + d) / (w - d)).abs().ln()
        };
        c64(re, -PI * self.delta(w))
    }

    /// ∫Δ(ω)dω = γ².
    pub fn total_weight(&self) -> f64 {
        self.gamma * self.gamma
    }
}

/// Returns `(Δ(ω), f^<(ω), f^>(ω))`.
pub fn hyb_spectra(spec: &HybridizationSpec, w: f64) -> (f64, f64, f64) {
    (spec.delta(w), spec.lesser_spectrum(w), spec.greater_spectrum(w))
}

/// Finite set of bath levels coupled to the impurity, in thermal equilibrium.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedBath {
    pub energies: Vec<f64>,
    pub couplings: Vec<f64>,
    pub beta: f64,
}

impl ClosedBath {
    pub fn n_modes(&self) -> usize {
        self.energies.len()
    }
}

/// Discretizes the band with quantiles of the density `∝ exp(−2ω²/D²)` on `[−D, D]`.
/// Interval edges and level energies alternate: `ε'_0 = −D, ε_0, ε'_1, …, ε_{N−1}, ε'_N = D`.
pub fn discretize_closed(spec: &HybridizationSpec, n_b: usize) -> Result<ClosedBath> {
    if n_b == 0 {
        return Err(Error::InvalidArgument(String::from("closed bath needs at least one mode")));
    }
    let d = spec.half_bandwidth;
    let e_max = erf(SQRT_2);
    let cdf = |w: f64| (erf(SQRT_2 * w / d) + e_max) / (2.0 * e_max);
    let m = 2 * n_b;
    let x: Vec<f64> = (0..=m)
        .map(|j| {
            if j == 0 {
                -d
            } else if j == m {
                d
            } else if 2 * j == m {
                0.0
            } else {
                invert_monotone(cdf, j as f64 / m as f64, -d, d)
            }
        })
        .collect();
    let energies = (0..n_b).map(|p| x[2 * p + 1]).collect();
    let couplings = (0..n_b).map(|p| (spec.delta(0.0) * (x[2 * p + 2] - x[2 * p])).sqrt()).collect();
    Ok(ClosedBath { energies, couplings, beta: spec.beta })
}

/// Whether a pseudomode injects (`Emitter`, jump `√Λ c†`) or removes (`Absorber`, jump `√Λ c`) particles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Emitter,
    Absorber,
}

impl Parity {
    pub fn label(self) -> &'static str {
        match self {
            Parity::Emitter => "emit",
            Parity::Absorber => "abs",
        }
    }

    pub fn from_label(s: &str) -> Option<Parity> {
        match s {
            "emit" => Some(Parity::Emitter),
            "abs" => Some(Parity::Absorber),
            _ => None,
        }
    }
}

/// Damped bath modes with a common rate Λ.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudomodeBath {
    pub energies: Vec<f64>,
    pub couplings: Vec<f64>,
    pub rate: f64,
    pub parity: Vec<Parity>,
}

impl PseudomodeBath {
    pub fn new(energies: Vec<f64>, couplings: Vec<f64>, rate: f64, parity: Vec<Parity>) -> Result<Self> {
        if energies.len() != couplings.len() || energies.len() != parity.len() {
            return Err(Error::Dimension(format!(
                "{} energies, {} couplings, {} parities",
                energies.len(),
                couplings.len(),
                parity.len()
            )));
        }
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidArgument(format!("rate must be positive, got {rate}")));
        }
        if couplings.iter().any(|v| !(*v >= 0.0)) || energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidArgument(String::from("couplings must be nonnegative and energies finite")));
        }
        Ok(PseudomodeBath { energies, couplings, rate, parity })
    }

    pub fn n_modes(&self) -> usize {
        self.energies.len()
    }

    /// Lorentzian weights `v_p = 2V_p²Λ`.
    pub fn weights(&self) -> Vec<f64> {
        self.couplings.iter().map(|v| 2.0 * v * v * self.rate).collect()
    }

    pub fn emitters(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_modes()).filter(|&p| self.parity[p] == Parity::Emitter)
    }

    pub fn absorbers(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_modes()).filter(|&p| self.parity[p] == Parity::Absorber)
    }
}

/// Gram matrix of unit Lorentzians `1/((ω−ε_p)²+Λ²)`:
/// `Q_pq = 2π / (Λ((ε_p−ε_q)² + 4Λ²))`.
pub fn lorentz_gram(grid: &[f64], lambda: f64) -> Result<DMatrix<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("Λ must be positive, got {lambda}")));
    }
    Ok(DMatrix::from_fn(grid.len(), grid.len(), |p, q| {
        let d = grid[p] - grid[q];
        2.0 * PI / (lambda * (d * d + 4.0 * lambda * lambda))
    }))
}

/// A nonnegative spectrum to be fitted, with its support and kinks.
pub struct Spectrum<'a> {
    pub f: &'a dyn Fn(f64) -> f64,
    /// Support `[lo, hi]`; endpoints may be infinite.
    pub lo: f64,
    pub hi: f64,
    /// Points where `f` is not smooth.
    pub breakpoints: Vec<f64>,
}

impl Spectrum<'_> {
    fn points_with(&self, extra: &[f64]) -> Vec<f64> {
        let mut pts = self.breakpoints.clone();
        pts.extend_from_slice(extra);
        pts
    }

    /// ∫f².
    pub fn norm2(&self) -> Result<f64> {
        let f = self.f;
        Ok(integrate_line(|w| f(w) * f(w), self.lo, self.hi, &self.breakpoints, quad_tol())?.value)
    }

    /// Interval `[a, b]` spanned by `{ω : f(ω) ≥ threshold}`, searched on `[lo, hi]`.
    pub fn window(&self, threshold: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let f = self.f;
        let n = 20_000;
        let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let first = xs.iter().position(|&x| f(x) >= threshold)?;
        let last = xs.iter().rposition(|&x| f(x) >= threshold)?;
        let refine = |inside: f64, outside: f64| {
            let (mut a, mut b) = (inside, outside);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if f(m) >= threshold {
                    a = m;
                } else {
                    b = m;
                }
            }
            a
        };
        let a = if first == 0 { xs[0] } else { refine(xs[first], xs[first - 1]) };
        let b = if last == n { xs[n] } else { refine(xs[last], xs[last + 1]) };
        Some((a, b))
    }
}

fn quad_tol() -> Tolerance {
    Tolerance { abs: 1e-12, rel: 1e-8, max_intervals: 20_000 }
}

/// Overlaps `b_p = 2∫f(ω)/((ω−ε_p)²+Λ²)dω`.
pub fn lorentz_overlap(spectrum: &Spectrum<'_>, grid: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("Λ must be positive, got {lambda}")));
    }
    let f = spectrum.f;
    grid.iter()
        .map(|&e| {
            let pts = spectrum.points_with(&[e, e - lambda, e + lambda]);
            let q = integrate_line(|w| f(w) / ((w - e) * (w - e) + lambda * lambda), spectrum.lo, spectrum.hi, &pts, quad_tol())?;
            Ok(2.0 * q.value)
        })
        .collect()
}

/// Regular grid of `n` points on `[a, b]`, endpoints included (midpoint for `n = 1`).
pub fn regular_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![0.5 * (a + b)],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Best nonnegative Lorentzian weights on a fixed grid at one rate.
#[derive(Clone, Debug, PartialEq)]
pub struct LorentzFit {
    pub grid: Vec<f64>,
    pub weights: Vec<f64>,
    pub rate: f64,
    /// χ² = ∫(f − Σ v_p L_p)².
    pub chi2: f64,
}

impl LorentzFit {
    pub fn model(&self, w: f64) -> f64 {
        let l2 = self.rate * self.rate;
        self.grid.iter().zip(&self.weights).map(|(e, v)| v / ((w - e) * (w - e) + l2)).sum()
    }
}

/// Fit of one spectrum on a fixed grid, for any rate.
pub struct SpectrumFit<'a> {
    spectrum: Spectrum<'a>,
    grid: Vec<f64>,
    norm2: f64,
}

impl<'a> SpectrumFit<'a> {
    pub fn new(spectrum: Spectrum<'a>, grid: Vec<f64>) -> Result<Self> {
        let norm2 = spectrum.norm2()?;
        Ok(SpectrumFit { spectrum, grid, norm2 })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Solves the inner quadratic program at rate `lambda`.
    pub fn at(&self, lambda: f64) -> Result<LorentzFit> {
        let q = lorentz_gram(&self.grid, lambda)?;
        let b = lorentz_overlap(&self.spectrum, &self.grid, lambda)?;
        let sol = nonneg_qp(&q, &b)?;
        let chi2 = (self.norm2 + sol.objective).max(0.0);
        Ok(LorentzFit { grid: self.grid.clone(), weights: sol.v, rate: lambda, chi2 })
    }

    /// Fits the rate by itself.
    pub fn optimize(&self, lambda_lo: f64, lambda_hi: f64) -> Result<LorentzFit> {
        let lam = minimize_log(|l| Ok(self.at(l)?.chi2), lambda_lo, lambda_hi)?;
        self.at(lam)
    }
}

/// Golden-section search of `g` over `ln Λ ∈ [ln lo, ln hi]` after a coarse bracketing scan.
/// Stops when the bracket is narrower than `1e−4` in relative terms.
pub fn minimize_log(mut g: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Bracket(format!("invalid bracket [{lo}, {hi}]")));
    }
    let (a0, b0) = (lo.ln(), hi.ln());
    let n_scan = 24;
    let xs: Vec<f64> = (0..=n_scan).map(|i| a0 + (b0 - a0) * i as f64 / n_scan as f64).collect();
    let mut best = 0;
    let mut vals = Vec::with_capacity(xs.len());
    for (i, &x) in xs.iter().enumerate() {
        let v = g(x.exp())?;
        if !v.is_finite() {
            return Err(Error::Bracket(format!("objective not finite at Λ = {}", x.exp())));
        }
        vals.push(v);
        if v < vals[best] {
            best = i;
        }
    }
    let mut a = xs[best.saturating_sub(1)];
    let mut b = xs[(best + 1).min(n_scan)];
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = g(c.exp())?;
    let mut fd = g(d.exp())?;
    while b - a > 1e-4 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c.exp())?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d.exp())?;
        }
    }
    let mut x = 0.5 * (a + b);
    let fx = g(x.exp())?;
    // Keep the scan point if the refined bracket is no better (edge minima).
    if vals[best] < fx {
        x = xs[best];
    }
    Ok(x.exp())
}

/// Outcome of the pseudomode fit, with diagnostics.
#[derive(Clone, Debug)]
pub struct PseudomodeFit {
    pub bath: PseudomodeBath,
    pub emitters: LorentzFit,
    pub absorbers: LorentzFit,
    /// Frequency windows of the lesser and greater spectra used for the grids.
    pub window_lesser: (f64, f64),
    pub window_greater: (f64, f64),
}

impl PseudomodeFit {
    pub fn chi2(&self) -> f64 {
        self.emitters.chi2 + self.absorbers.chi2
    }
}

/// Fits `N_b/2` emitters to `2πf^<` and `N_b/2` absorbers to `2πf^>` with a shared rate Λ.
pub fn fit_pseudomodes(spec: &HybridizationSpec, n_b: usize) -> Result<PseudomodeBath> {
    Ok(fit_pseudomodes_detailed(spec, n_b)?.bath)
}

/// Runs `body` on the emitter and absorber fit problems with their windows.
fn with_fit_problems<R>(
    spec: &HybridizationSpec,
    n_b: usize,
    body: impl FnOnce(&SpectrumFit<'_>, &SpectrumFit<'_>, (f64, f64), (f64, f64)) -> Result<R>,
) -> Result<R> {
    if n_b < 2 || n_b % 2 != 0 {
        return Err(Error::InvalidArgument(format!("pseudomode count must be even and ≥ 2, got {n_b}")));
    }
    if spec.gamma == 0.0 {
        return Err(Error::InvalidArgument(String::from("cannot fit a vanishing hybridization")));
    }
    let n = n_b / 2;
    let d = spec.half_bandwidth;
    let s = *spec;
    let lesser = move |w: f64| 2.0 * PI * s.lesser_spectrum(w);
    let greater = move |w: f64| 2.0 * PI * s.greater_spectrum(w);
    let threshold = spec.gamma * spec.gamma / 10.0;
    let sl = Spectrum { f: &lesser, lo: -d, hi: d, breakpoints: alloc::vec![0.0] };
    let sg = Spectrum { f: &greater, lo: -d, hi: d, breakpoints: alloc::vec![0.0] };
    let wl = sl
        .window(threshold, -d, d)
        .ok_or_else(|| Error::InvalidArgument(String::from("lesser spectrum never exceeds γ²/10")))?;
    let wg = sg
        .window(threshold, -d, d)
        .ok_or_else(|| Error::InvalidArgument(String::from("greater spectrum never exceeds γ²/10")))?;
    let fl = SpectrumFit::new(sl, regular_grid(wl.0, wl.1, n))?;
    let fg = SpectrumFit::new(sg, regular_grid(wg.0, wg.1, n))?;
    body(&fl, &fg, wl, wg)
}

/// Combined χ² of the emitter and absorber fits at each fixed rate.
pub fn chi2_profile(spec: &HybridizationSpec, n_b: usize, rates: &[f64]) -> Result<Vec<f64>> {
    with_fit_problems(spec, n_b, |fl, fg, _, _| rates.iter().map(|&l| Ok(fl.at(l)?.chi2 + fg.at(l)?.chi2)).collect())
}

/// [`fit_pseudomodes`] returning the individual fits and windows.
pub fn fit_pseudomodes_detailed(spec: &HybridizationSpec, n_b: usize) -> Result<PseudomodeFit> {
    let d = spec.half_bandwidth;
    with_fit_problems(spec, n_b, |fl, fg, wl, wg| {
        let lam = minimize_log(|l| Ok(fl.at(l)?.chi2 + fg.at(l)?.chi2), 1e-3, d)?;
        let emitters = fl.at(lam)?;
        let absorbers = fg.at(lam)?;
        let n = n_b / 2;
        let mut energies = Vec::with_capacity(n_b);
        let mut couplings = Vec::with_capacity(n_b);
        let mut parity = Vec::with_capacity(n_b);
        for k in 0..n {
            energies.push(emitters.grid[k]);
            couplings.push((emitters.weights[k] / (2.0 * lam)).sqrt());
            parity.push(Parity::Emitter);
            energies.push(absorbers.grid[k]);
            couplings.push((absorbers.weights[k] / (2.0 * lam)).sqrt());
            parity.push(Parity::Absorber);
        }
        let bath = PseudomodeBath::new(energies, couplings, lam, parity)?;
        Ok(PseudomodeFit { bath, emitters, absorbers, window_lesser: wl, window_greater: wg })
    })
}

/// Pseudomode hybridization `(Δ^R, Δ^<, Δ^>)` at frequency ω.
pub fn pm_hyb_check(bath: &PseudomodeBath, w: f64) -> (Complex64, Complex64, Complex64) {
    let lam = bath.rate;
    let mut r = c64(0.0, 0.0);
    let mut less = 0.0;
    let mut great = 0.0;
    for p in 0..bath.n_modes() {
        let v2 = bath.couplings[p] * bath.couplings[p];
        let den = c64(w - bath.energies[p], lam);
        r += c64(v2, 0.0) / den;
        let lor = v2 * lam / den.norm_sqr();
        match bath.parity[p] {
            Parity::Emitter => less += lor,
            Parity::Absorber => great += lor,
        }
    }
    (r, c64(0.0, 2.0 * less), c64(0.0, -2.0 * great))
}

//! Hadamard-test extraction of the impurity greater Green's function.
//!
//! `G^>(t) = −i Tr(Ā·E_t[B̄·ρ])` with `Ā = d(−1)^N` and `B̄ = (−1)^N d†`. Both are
//! single-qubit operators on the impurity, expanded as `Ā = Σ a_P P`, `B̄ = Σ b_Q Q` with
//! `P, Q ∈ {X, Y}`. A Hadamard test with `U₁ = Q`, `U₂ = P` and an `S^k` gate on the control
//! measures `Re[i^k Tr(P·E_t[Qρ])]`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::bath::PseudomodeBath;
use crate::circuit::{
    build_program, hadamard, phase_s, AncillaLayout, CircuitSchedule, Event, GateDurations, GateEvent, GateTag, Program, QubitRole,
    Timing, U2,
};
use crate::lindblad::{Component, GreenSeries, Provenance};
use crate::pauli::{bar_operator, bar_operator_left, jw_annihilation, jw_creation, FermionOrdering, Pauli};
use crate::simulator::{DensityMatrix, Evolution, NoiseModel, Operator};
use crate::{c64, Complex64, Error, Result};

/// One Hadamard-test circuit and its weight in the Green's function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HadamardPlan {
    pub t_prep: f64,
    pub t: f64,
    /// Controlled Pauli applied after preparation (from `B̄`).
    pub u1: Pauli,
    /// Anti-controlled Pauli applied before the final Hadamard (from `Ā`).
    pub u2: Pauli,
    /// Power of the `S` gate on the control.
    pub k: u8,
    pub weight: Complex64,
}

impl HadamardPlan {
    fn key(&self) -> (Pauli, Pauli, u8) {
        (self.u1, self.u2, self.k)
    }
}

fn impurity_terms() -> Result<([(Complex64, Pauli); 2], [(Complex64, Pauli); 2])> {
    let ord = FermionOrdering::star(0);
    let a = bar_operator(&jw_annihilation(0, &ord)?, &ord)?;
    let b = bar_operator_left(&jw_creation(0, &ord)?, &ord)?;
    let conv = |t: [(Complex64, crate::pauli::PauliString); 2]| -> Result<[(Complex64, Pauli); 2]> {
        let mut out = [(c64(0.0, 0.0), Pauli::I); 2];
        for (k, (c, p)) in t.into_iter().enumerate() {
            out[k] = (c * p.phase(), p.letter(0));
        }
        Ok(out)
    };
    Ok((conv(a.pauli_terms())?, conv(b.pauli_terms())?))
}

/// The eight circuits whose weighted sum is `G^>(t)` after preparation time `t_prep`.
pub fn plan_greater_gf(t_prep: f64, t: f64) -> Result<Vec<HadamardPlan>> {
    if !(t_prep >= 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("times must be nonnegative (t_prep = {t_prep}, t = {t})")));
    }
    let (a_terms, b_terms) = impurity_terms()?;
    let mut plans = Vec::with_capacity(8);
    for &(b, q) in &b_terms {
        for &(a, p) in &a_terms {
            for k in 0..2u8 {
                // Tr = v₀ − i·v₁ and G = −i Σ a·b·Tr.
                let weight = if k == 0 { c64(0.0, -1.0) * a * b } else { -(a * b) };
                plans.push(HadamardPlan { t_prep, t, u1: q, u2: p, k, weight });
            }
        }
    }
    Ok(plans)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EstimateMode {
    ExactExpectation,
    Shots,
}

impl EstimateMode {
    pub fn label(self) -> &'static str {
        match self {
            EstimateMode::ExactExpectation => "exact",
            EstimateMode::Shots => "shots",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "exact" => Some(EstimateMode::ExactExpectation),
            "shots" => Some(EstimateMode::Shots),
            _ => None,
        }
    }
}

/// How expectation values are read out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleMode {
    Exact,
    Shots { n: u64, seed: u64 },
}

/// Estimate at one time: a single circuit expectation (real) or an assembled Green's function.
#[derive(Clone, Debug, PartialEq)]
pub struct GFEstimate {
    pub t: f64,
    pub value: Complex64,
    pub mode: EstimateMode,
    pub n_shots: Option<u64>,
    /// Standard errors of the real and imaginary parts.
    pub stderr: Option<[f64; 2]>,
}

/// Everything needed to build the noisy circuits of one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentCircuit {
    pub imp_energy: f64,
    pub bath: PseudomodeBath,
    pub layout: AncillaLayout,
    pub tau: f64,
    pub t1: f64,
    pub durations: GateDurations,
}

impl ExperimentCircuit {
    pub fn program(&self, t_prep: f64, t: f64) -> Result<Program> {
        let timing = Timing { tau: self.tau, t_prep, t, t1: self.t1, durations: self.durations };
        build_program(self.imp_energy, &self.bath, &self.layout, &timing)
    }

    pub fn noise_model(&self, sched: &CircuitSchedule) -> Result<NoiseModel> {
        NoiseModel::for_schedule(sched, self.t1)
    }

    /// Time realized on the Trotter grid.
    pub fn realize(&self, t: f64) -> f64 {
        (t / self.tau).round() * self.tau
    }

    /// Joint system-plus-control circuit of a plan; the control is the last, noiseless qubit.
    pub fn hadamard_schedule(&self, plan: &HadamardPlan) -> Result<CircuitSchedule> {
        let prog = self.program(plan.t_prep, plan.t)?;
        let n = prog.n_qubits();
        let c = n;
        let d = &self.durations;
        let mut roles = prog.roles.clone();
        roles.push(QubitRole::Control);
        let mut events = prog.init.clone();
        for _ in 0..prog.meta.n_prep {
            events.extend(prog.step.iter().cloned());
        }
        events.push(Event::Gate(GateEvent::single(c, hadamard(), GateTag::Hadamard, d)));
        events.push(Event::Gate(GateEvent::controlled_pauli(c, 0, plan.u1, true, GateTag::Hadamard, d)));
        for _ in 0..prog.meta.n_t {
            events.extend(prog.step.iter().cloned());
        }
        events.extend(prog.decode.iter().cloned());
        if plan.k == 1 {
            events.push(Event::Gate(GateEvent::single(c, phase_s(false), GateTag::Hadamard, d)));
        }
        // U₂ is a Pauli, so U₂† = U₂.
        events.push(Event::Gate(GateEvent::controlled_pauli(c, 0, plan.u2, false, GateTag::Hadamard, d)));
        events.push(Event::Gate(GateEvent::single(c, hadamard(), GateTag::Hadamard, d)));
        let mut sched = CircuitSchedule::new(roles, events)?;
        sched.meta = Some(prog.meta);
        Ok(sched)
    }
}

fn sample_mean(v: f64, n: u64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let p_plus = ((1.0 + v) / 2.0).clamp(0.0, 1.0);
    let mut plus = 0u64;
    for _ in 0..n {
        // 53 random bits give a uniform double in [0, 1).
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        if u < p_plus {
            plus += 1;
        }
    }
    let m = (2.0 * plus as f64 - n as f64) / n as f64;
    (m, ((1.0 - m * m).max(0.0) / n as f64).sqrt())
}

fn estimate(t: f64, v: f64, mode: SampleMode, rng: &mut Option<ChaCha8Rng>) -> GFEstimate {
    match (mode, rng) {
        (SampleMode::Shots { n, .. }, Some(r)) if n > 0 => {
            let (m, se) = sample_mean(v, n, r);
            GFEstimate { t, value: c64(m, 0.0), mode: EstimateMode::Shots, n_shots: Some(n), stderr: Some([se, 0.0]) }
        }
        _ => GFEstimate { t, value: c64(v, 0.0), mode: EstimateMode::ExactExpectation, n_shots: None, stderr: None },
    }
}

fn make_rng(mode: SampleMode) -> Result<Option<ChaCha8Rng>> {
    match mode {
        SampleMode::Exact => Ok(None),
        SampleMode::Shots { n: 0, .. } => Err(Error::InvalidArgument(String::from("shot count must be positive"))),
        SampleMode::Shots { seed, .. } => Ok(Some(ChaCha8Rng::seed_from_u64(seed))),
    }
}

/// Runs one plan on the joint register and reads `⟨Z⟩` of the control qubit.
pub fn execute_plan(plan: &HadamardPlan, circ: &ExperimentCircuit, mode: SampleMode) -> Result<GFEstimate> {
    let sched = circ.hadamard_schedule(plan)?;
    let c = sched.n_qubits - 1;
    if sched.roles[c] != QubitRole::Control || sched.noisy[c] {
        return Err(Error::InvalidArgument(String::from("control qubit must be last and noiseless")));
    }
    let nm = circ.noise_model(&sched)?;
    let rho = crate::simulator::run_schedule(&sched, &nm)?;
    let red = rho.reduced(&[c])?;
    let v = (red[(0, 0)] - red[(1, 1)]).re;
    let t = sched.meta.as_ref().map_or(plan.t, |m| m.t());
    let mut rng = make_rng(mode)?;
    Ok(estimate(t, v, mode, &mut rng))
}

fn run_preparation(prog: &Program, nm: &NoiseModel) -> Result<Operator> {
    let mut rho = DensityMatrix::ground(prog.n_qubits())?.into_operator();
    let mut ev = Evolution::new(nm, prog.n_qubits(), true);
    for e in &prog.init {
        ev.event(&mut rho, e)?;
    }
    for _ in 0..prog.meta.n_prep {
        for e in &prog.step {
            ev.event(&mut rho, e)?;
        }
    }
    ev.flush(&mut rho)?;
    Ok(rho)
}

/// Encoded-frame state after the initial gates and the preparation steps.
pub fn prepared_state(circ: &ExperimentCircuit, t_prep: f64) -> Result<DensityMatrix> {
    let prog = circ.program(t_prep, 0.0)?;
    let nm = system_noise(circ, &prog)?;
    DensityMatrix::from_operator(run_preparation(&prog, &nm)?)
}

fn system_noise(circ: &ExperimentCircuit, prog: &Program) -> Result<NoiseModel> {
    NoiseModel::new(circ.t1, prog.roles.iter().map(|&r| r == QubitRole::Bath).collect())
}

/// Prepared state followed by the idle time of the control's `H` and controlled-`U₁`.
fn prepared(circ: &ExperimentCircuit, prog: &Program, nm: &NoiseModel) -> Result<Operator> {
    let mut rho = run_preparation(prog, nm)?;
    let mut ev = Evolution::new(nm, prog.n_qubits(), true);
    ev.idle(&mut rho, circ.durations.one_qubit + circ.durations.two_qubit)?;
    ev.flush(&mut rho)?;
    Ok(rho)
}

fn step_counts(circ: &ExperimentCircuit, times: &[f64]) -> Result<Vec<usize>> {
    if times.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::InvalidArgument(String::from("times must be nonnegative")));
    }
    if times.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidArgument(String::from("times must be sorted")));
    }
    Ok(times.iter().map(|t| (t / circ.tau).round() as usize).collect())
}

/// Evolves `X = U·ρ(t_prep)` through the noisy Trotter steps and calls `read(j, X)` at each
/// requested step count.
fn evolve_block(
    prog: &Program,
    nm: &NoiseModel,
    mut x: Operator,
    steps: &[usize],
    mut read: impl FnMut(usize, &Operator) -> Result<()>,
) -> Result<()> {
    let n = prog.n_qubits();
    let mut ev = Evolution::new(nm, n, true);
    let mut done = 0usize;
    for (j, &s) in steps.iter().enumerate() {
        while done < s {
            for e in &prog.step {
                ev.event(&mut x, e)?;
            }
            done += 1;
        }
        read(j, &x)?;
    }
    Ok(())
}

/// All eight plans at every time of `times`, evaluated on the system register alone.
///
/// The control qubit couples to the system only through `U₁` and `U₂` on the noiseless
/// impurity, so the joint circuit's readout equals `Re[i^k Tr(U₂·E_t[U₁·ρ])]` where `E_t` is the
/// noisy Trotter evolution; one evolution per `U₁` serves every `U₂`, `k` and time.
pub fn execute_plans_block(circ: &ExperimentCircuit, t_prep: f64, times: &[f64], mode: SampleMode) -> Result<Vec<(HadamardPlan, GFEstimate)>> {
    let steps = step_counts(circ, times)?;
    let t_max = times.last().copied().unwrap_or(0.0);
    let prog = circ.program(t_prep, t_max)?;
    let nm = system_noise(circ, &prog)?;
    let rho = prepared(circ, &prog, &nm)?;
    let mut rng = make_rng(mode)?;
    let mut out = Vec::new();
    let mut traces = vec![[[c64(0.0, 0.0); 2]; 2]; times.len()];
    for (qi, q) in [Pauli::X, Pauli::Y].into_iter().enumerate() {
        let mut x = rho.clone();
        x.left_mul_1q(0, &q.matrix())?;
        evolve_block(&prog, &nm, x, &steps, |j, x| {
            for (pi, p) in [Pauli::X, Pauli::Y].into_iter().enumerate() {
                traces[j][qi][pi] = x.trace_with(0, &p.matrix())?;
            }
            Ok(())
        })?;
    }
    for (j, &t) in times.iter().enumerate() {
        let realized = steps[j] as f64 * circ.tau;
        for plan in plan_greater_gf(t_prep, t)? {
            let qi = usize::from(plan.u1 == Pauli::Y);
            let pi = usize::from(plan.u2 == Pauli::Y);
            let tr = traces[j][qi][pi];
            let v = if plan.k == 0 { tr.re } else { -tr.im };
            out.push((plan, estimate(realized, v, mode, &mut rng)));
        }
    }
    Ok(out)
}

/// `G^>(t) = −i Tr(Ā·E_t[B̄·ρ])` from a single noisy evolution of `B̄ρ`.
pub fn direct_greater_gf(circ: &ExperimentCircuit, t_prep: f64, times: &[f64]) -> Result<GreenSeries> {
    let steps = step_counts(circ, times)?;
    let t_max = times.last().copied().unwrap_or(0.0);
    let prog = circ.program(t_prep, t_max)?;
    let nm = system_noise(circ, &prog)?;
    let mut x = prepared(circ, &prog, &nm)?;
    let (a_terms, b_terms) = impurity_terms()?;
    let mat = |terms: &[(Complex64, Pauli); 2]| -> U2 {
        let mut m = [[c64(0.0, 0.0); 2]; 2];
        for &(c, p) in terms {
            let pm = p.matrix();
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += c * pm[i][j];
                }
            }
        }
        m
    };
    let a_bar = mat(&a_terms);
    x.left_mul_1q(0, &mat(&b_terms))?;
    let mut values = vec![c64(0.0, 0.0); times.len()];
    evolve_block(&prog, &nm, x, &steps, |j, x| {
        values[j] = c64(0.0, -1.0) * x.trace_with(0, &a_bar)?;
        Ok(())
    })?;
    let realized = steps.iter().map(|&s| s as f64 * circ.tau).collect();
    GreenSeries::new(realized, values, Component::Greater, Provenance::Circuit)
}

/// Circuit Green's function with per-time estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitGf {
    pub series: GreenSeries,
    pub estimates: Vec<GFEstimate>,
}

/// Weighted combination of plan estimates, grouped by time in order of first appearance.
pub fn assemble_gf(results: &[(HadamardPlan, GFEstimate)]) -> Result<CircuitGf> {
    let mut groups: Vec<(f64, Vec<&(HadamardPlan, GFEstimate)>)> = Vec::new();
    for r in results {
        match groups.iter_mut().find(|(t, _)| t.to_bits() == r.1.t.to_bits()) {
            Some((_, g)) => g.push(r),
            None => groups.push((r.1.t, vec![r])),
        }
    }
    let reference = plan_greater_gf(0.0, 0.0)?;
    let mut estimates = Vec::with_capacity(groups.len());
    for (t, g) in &groups {
        let mut value = c64(0.0, 0.0);
        let mut var = [0.0f64; 2];
        let mut shots = None;
        let mut mode = EstimateMode::ExactExpectation;
        for want in &reference {
            let hits: Vec<_> = g.iter().filter(|(p, _)| p.key() == want.key()).collect();
            if hits.len() != 1 {
                return Err(Error::MissingPlan(format!(
                    "t = {t}: U1 = {}, U2 = {}, k = {} found {} times",
                    want.u1.as_char(),
                    want.u2.as_char(),
                    want.k,
                    hits.len()
                )));
            }
            let (plan, est) = hits[0];
            value += plan.weight * est.value.re;
            if let Some([se, _]) = est.stderr {
                var[0] += (plan.weight.re * se).powi(2);
                var[1] += (plan.weight.im * se).powi(2);
                mode = EstimateMode::Shots;
                shots = est.n_shots;
            }
        }
        let stderr = (mode == EstimateMode::Shots).then(|| [var[0].sqrt(), var[1].sqrt()]);
        estimates.push(GFEstimate { t: *t, value, mode, n_shots: shots, stderr });
    }
    estimates.sort_by(|a, b| a.t.total_cmp(&b.t));
    let series = GreenSeries::new(
        estimates.iter().map(|e| e.t).collect(),
        estimates.iter().map(|e| e.value).collect(),
        Component::Greater,
        Provenance::Circuit,
    )?;
    Ok(CircuitGf { series, estimates })
}

/// Green's function at negative times from the positive-time series, `G^>(−t) = −G^>(t)*`.
pub fn mirror_negative(series: &GreenSeries) -> Result<GreenSeries> {
    let times = series.times.iter().rev().map(|t| -t).collect();
    let values = series.values.iter().rev().map(|z| -z.conj()).collect();
    GreenSeries::new(times, values, series.component, series.provenance)
}

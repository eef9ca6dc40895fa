//! Noise-harvesting circuits: ancilla layouts, noise encoding, Trotter steps and schedules.
//!
//! The hardware register holds the impurity on qubit 0, then each block of `K` bath modes
//! followed by its ancilla. The last block has no ancilla. Bath qubits are the only noisy ones.
//!
//! The circuit runs in the encoded frame `σ = E†ρE`, where `E` maps each bare decay operator
//! `S⁻_{q_p}` onto the jump operator of bath mode `p`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

#[allow(unused_imports)]
use num_traits::Float;

use crate::bath::{Parity, PseudomodeBath};
use crate::pauli::{Clifford, FermionOrdering, ModeRole, Pauli, PauliString};
use crate::{c64, Complex64, Error, Result};

/// Role of a hardware qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QubitRole {
    Impurity,
    Bath,
    Ancilla,
    Control,
}

impl QubitRole {
    pub fn label(self) -> &'static str {
        match self {
            QubitRole::Impurity => "impurity",
            QubitRole::Bath => "bath",
            QubitRole::Ancilla => "ancilla",
            QubitRole::Control => "control",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "impurity" => Some(QubitRole::Impurity),
            "bath" => Some(QubitRole::Bath),
            "ancilla" => Some(QubitRole::Ancilla),
            "control" => Some(QubitRole::Control),
            _ => None,
        }
    }
}

/// Grouping of bath modes into blocks of `K`, each closed by an ancilla except the last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AncillaLayout {
    n_b: usize,
    k: usize,
    n_anc: usize,
    bath_qubits: Vec<usize>,
    ancilla_qubits: Vec<usize>,
}

impl AncillaLayout {
    pub fn n_bath(&self) -> usize {
        self.n_b
    }

    pub fn block_size(&self) -> usize {
        self.k
    }

    pub fn n_ancilla(&self) -> usize {
        self.n_anc
    }

    /// Impurity, bath and ancilla qubits.
    pub fn n_qubits(&self) -> usize {
        1 + self.n_b + self.n_anc
    }

    pub fn block(&self, p: usize) -> usize {
        p / self.k
    }

    pub fn bath_qubit(&self, p: usize) -> usize {
        self.bath_qubits[p]
    }

    pub fn bath_qubits(&self) -> &[usize] {
        &self.bath_qubits
    }

    pub fn ancilla_qubits(&self) -> &[usize] {
        &self.ancilla_qubits
    }

    /// Ancilla qubit `a_p` closing the block of bath mode `p`, if any.
    pub fn ancilla_of(&self, p: usize) -> Option<usize> {
        self.ancilla_qubits.get(self.block(p)).copied()
    }

    /// Qubits in blocks `0..=b` of bath mode `p`.
    pub fn block_members(&self, p: usize) -> Vec<usize> {
        let b = self.block(p);
        (b * self.k..((b + 1) * self.k).min(self.n_b)).collect()
    }

    pub fn roles(&self) -> Vec<QubitRole> {
        let mut roles = vec![QubitRole::Impurity; self.n_qubits()];
        for &q in &self.bath_qubits {
            roles[q] = QubitRole::Bath;
        }
        for &a in &self.ancilla_qubits {
            roles[a] = QubitRole::Ancilla;
        }
        roles
    }

    /// Fermionic modes in register order.
    pub fn ordering(&self) -> FermionOrdering {
        let roles = self
            .roles()
            .into_iter()
            .map(|r| match r {
                QubitRole::Impurity => ModeRole::Impurity,
                QubitRole::Ancilla => ModeRole::Ancilla,
                _ => ModeRole::Bath,
            })
            .collect();
        FermionOrdering::new(roles).expect("impurity is qubit 0")
    }
}

/// Splits `n_b` bath modes into `n_anc + 1` consecutive blocks of `K = ⌈n_b/(n_anc+1)⌉`.
pub fn make_layout(n_b: usize, n_anc: usize) -> Result<AncillaLayout> {
    if n_b == 0 {
        return Err(Error::InvalidArgument(String::from("at least one bath mode is required")));
    }
    if n_anc >= n_b {
        return Err(Error::InvalidArgument(format!("N_anc = {n_anc} must be below N_b = {n_b}")));
    }
    let k = n_b.div_ceil(n_anc + 1);
    if n_b.div_ceil(k) != n_anc + 1 {
        return Err(Error::InvalidArgument(format!(
            "N_b = {n_b} cannot be split into {} blocks of {k} consecutive modes",
            n_anc + 1
        )));
    }
    let mut bath_qubits = Vec::with_capacity(n_b);
    let mut ancilla_qubits = Vec::with_capacity(n_anc);
    let mut q = 1;
    for p in 0..n_b {
        bath_qubits.push(q);
        q += 1;
        if (p + 1) % k == 0 && ancilla_qubits.len() < n_anc {
            ancilla_qubits.push(q);
            q += 1;
        }
    }
    Ok(AncillaLayout { n_b, k, n_anc, bath_qubits, ancilla_qubits })
}

/// Gate durations in units of the single-qubit gate time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateDurations {
    pub one_qubit: f64,
    pub two_qubit: f64,
}

impl Default for GateDurations {
    fn default() -> Self {
        GateDurations { one_qubit: 1.0, two_qubit: 10.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    SingleQubitUnitary,
    TwoQubitUnitary,
    Cz,
    Cnot,
    ControlledPauli,
    X,
}

impl GateKind {
    pub fn label(self) -> &'static str {
        match self {
            GateKind::SingleQubitUnitary => "single_qubit_unitary",
            GateKind::TwoQubitUnitary => "two_qubit_unitary",
            GateKind::Cz => "cz",
            GateKind::Cnot => "cnot",
            GateKind::ControlledPauli => "controlled_pauli",
            GateKind::X => "x",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "single_qubit_unitary" => Some(GateKind::SingleQubitUnitary),
            "two_qubit_unitary" => Some(GateKind::TwoQubitUnitary),
            "cz" => Some(GateKind::Cz),
            "cnot" => Some(GateKind::Cnot),
            "controlled_pauli" => Some(GateKind::ControlledPauli),
            "x" => Some(GateKind::X),
            _ => None,
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::SingleQubitUnitary | GateKind::X => 1,
            _ => 2,
        }
    }
}

pub type U2 = [[Complex64; 2]; 2];
pub type U4 = [[Complex64; 4]; 4];

/// Gate parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    None,
    U2(U2),
    /// Basis order `|q₀q₁⟩` with the first listed qubit as the high bit.
    U4(U4),
    /// Pauli applied to the target when the control qubit is in state `control_state`.
    Pauli { letter: Pauli, control_state: bool },
}

/// What a gate is for. Not part of the text dump.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateTag {
    Init,
    Encode,
    Decode,
    Phase,
    Basis,
    Ladder,
    Pivot,
    Coupling,
    CzTrick,
    Hadamard,
    Other,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateEvent {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub payload: Payload,
    pub duration: f64,
    pub tag: GateTag,
}

impl GateEvent {
    fn clifford(g: Clifford, tag: GateTag, d: &GateDurations) -> GateEvent {
        match g {
            Clifford::X(q) => GateEvent { kind: GateKind::X, qubits: vec![q], payload: Payload::None, duration: d.one_qubit, tag },
            Clifford::H(q) => GateEvent::single(q, hadamard(), tag, d),
            Clifford::S(q) => GateEvent::single(q, phase_s(false), tag, d),
            Clifford::Sdg(q) => GateEvent::single(q, phase_s(true), tag, d),
            Clifford::Cz(a, b) => GateEvent { kind: GateKind::Cz, qubits: vec![a, b], payload: Payload::None, duration: d.two_qubit, tag },
            Clifford::Cnot { control, target } => GateEvent {
                kind: GateKind::Cnot,
                qubits: vec![control, target],
                payload: Payload::None,
                duration: d.two_qubit,
                tag,
            },
        }
    }

    pub fn single(q: usize, u: U2, tag: GateTag, d: &GateDurations) -> GateEvent {
        GateEvent { kind: GateKind::SingleQubitUnitary, qubits: vec![q], payload: Payload::U2(u), duration: d.one_qubit, tag }
    }

    pub fn two(a: usize, b: usize, u: U4, tag: GateTag, d: &GateDurations) -> GateEvent {
        GateEvent { kind: GateKind::TwoQubitUnitary, qubits: vec![a, b], payload: Payload::U4(u), duration: d.two_qubit, tag }
    }

    pub fn controlled_pauli(control: usize, target: usize, letter: Pauli, control_state: bool, tag: GateTag, d: &GateDurations) -> GateEvent {
        GateEvent {
            kind: GateKind::ControlledPauli,
            qubits: vec![control, target],
            payload: Payload::Pauli { letter, control_state },
            duration: d.two_qubit,
            tag,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.kind.arity() == 2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Event {
    Gate(GateEvent),
    Wait(f64),
}

impl Event {
    pub fn duration(&self) -> f64 {
        match self {
            Event::Gate(g) => g.duration,
            Event::Wait(d) => *d,
        }
    }
}

/// Timing data of a scheduled experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleMeta {
    pub tau: f64,
    pub lambda: f64,
    pub t1: f64,
    pub t_trotter: f64,
    pub t_wait: f64,
    pub t_prep_requested: f64,
    pub t_requested: f64,
    pub n_prep: usize,
    pub n_t: usize,
}

impl ScheduleMeta {
    pub fn t_prep(&self) -> f64 {
        self.n_prep as f64 * self.tau
    }

    pub fn t(&self) -> f64 {
        self.n_t as f64 * self.tau
    }
}

/// Time-ordered program for the noisy simulator.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitSchedule {
    pub n_qubits: usize,
    pub roles: Vec<QubitRole>,
    pub noisy: Vec<bool>,
    pub events: Vec<Event>,
    pub meta: Option<ScheduleMeta>,
}

impl CircuitSchedule {
    pub fn new(roles: Vec<QubitRole>, events: Vec<Event>) -> Result<Self> {
        let n = roles.len();
        for e in &events {
            match e {
                Event::Gate(g) => {
                    if g.qubits.len() != g.kind.arity() || g.qubits.iter().any(|&q| q >= n) {
                        return Err(Error::InvalidArgument(format!("gate {} on qubits {:?} in a {n}-qubit register", g.kind.label(), g.qubits)));
                    }
                    if g.qubits.len() == 2 && g.qubits[0] == g.qubits[1] {
                        return Err(Error::InvalidArgument(format!("gate {} repeats qubit {}", g.kind.label(), g.qubits[0])));
                    }
                    if !(g.duration >= 0.0) {
                        return Err(Error::InvalidArgument(String::from("negative gate duration")));
                    }
                }
                Event::Wait(d) => {
                    if !(*d >= 0.0) {
                        return Err(Error::InvalidArgument(String::from("negative wait")));
                    }
                }
            }
        }
        let noisy = roles.iter().map(|&r| r == QubitRole::Bath).collect();
        Ok(CircuitSchedule { n_qubits: n, roles, noisy, events, meta: None })
    }

    /// Total wall-clock duration.
    pub fn duration(&self) -> f64 {
        self.events.iter().map(Event::duration).sum()
    }

    pub fn gates(&self) -> impl Iterator<Item = &GateEvent> {
        self.events.iter().filter_map(|e| match e {
            Event::Gate(g) => Some(g),
            Event::Wait(_) => None,
        })
    }
}

pub(crate) fn hadamard() -> U2 {
    let h = c64(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

pub(crate) fn phase_s(dagger: bool) -> U2 {
    let o = c64(0.0, 0.0);
    let l = c64(1.0, 0.0);
    let i = if dagger { c64(0.0, -1.0) } else { c64(0.0, 1.0) };
    [[l, o], [o, i]]
}

/// `H·S†`: maps `Y` to `Z` under conjugation.
fn y_to_z() -> U2 {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    [[c64(h, 0.0), c64(0.0, -h)], [c64(h, 0.0), c64(0.0, h)]]
}

fn diag_phase(a: f64, b: f64) -> U2 {
    let o = c64(0.0, 0.0);
    [[c64(0.0, -a).exp(), o], [o, c64(0.0, -b).exp()]]
}

/// `exp(−iθ(a·XX + b·YY))` on two qubits.
pub fn xx_yy_rotation(theta: f64, a: f64, b: f64) -> U4 {
    let o = c64(0.0, 0.0);
    let mut u = [[o; 4]; 4];
    // {|00⟩,|11⟩} sees (a−b)σx, {|01⟩,|10⟩} sees (a+b)σx.
    let (c1, s1) = ((theta * (a - b)).cos(), (theta * (a - b)).sin());
    let (c2, s2) = ((theta * (a + b)).cos(), (theta * (a + b)).sin());
    u[0][0] = c64(c1, 0.0);
    u[3][3] = c64(c1, 0.0);
    u[0][3] = c64(0.0, -s1);
    u[3][0] = c64(0.0, -s1);
    u[1][1] = c64(c2, 0.0);
    u[2][2] = c64(c2, 0.0);
    u[1][2] = c64(0.0, -s2);
    u[2][1] = c64(0.0, -s2);
    u
}

/// Clifford circuit `E_p` for bath mode `p`, first gate applied first:
/// `X(q_p)` for emitters, `CZ(q_p, k)` for every qubit strictly between `q_p` and the block
/// boundary, then `CNOT(q_p → a_p)` when the block has an ancilla.
pub fn mode_encoding(layout: &AncillaLayout, p: usize, parity: Parity) -> Result<Vec<Clifford>> {
    if p >= layout.n_bath() {
        return Err(Error::IndexOutOfRange { index: p, len: layout.n_bath() });
    }
    let q = layout.bath_qubit(p);
    let end = layout.ancilla_of(p).unwrap_or(layout.n_qubits());
    let mut gates = Vec::new();
    if parity == Parity::Emitter {
        gates.push(Clifford::X(q));
    }
    for k in q + 1..end {
        gates.push(Clifford::Cz(q, k));
    }
    if let Some(a) = layout.ancilla_of(p) {
        gates.push(Clifford::Cnot { control: q, target: a });
    }
    Ok(gates)
}

/// Full encoding `E = E_{N_b−1}⋯E_0` as a Clifford list (first applied first).
pub fn encoding_cliffords(layout: &AncillaLayout, parities: &[Parity]) -> Result<Vec<Clifford>> {
    if parities.len() != layout.n_bath() {
        return Err(Error::Dimension(format!("{} parities for {} bath modes", parities.len(), layout.n_bath())));
    }
    let mut gates = Vec::new();
    for (p, &par) in parities.iter().enumerate() {
        gates.extend(mode_encoding(layout, p, par)?);
    }
    Ok(gates)
}

/// Encoding circuit `E` as gate events.
pub fn encoding_circuit(layout: &AncillaLayout, parities: &[Parity], durations: &GateDurations) -> Result<Vec<GateEvent>> {
    Ok(encoding_cliffords(layout, parities)?.into_iter().map(|g| GateEvent::clifford(g, GateTag::Encode, durations)).collect())
}

/// `E† P E` for a Pauli string, given `E` as a Clifford list.
pub fn to_encoded_frame(p: &PauliString, encoding: &[Clifford]) -> PauliString {
    let mut s = p.clone();
    for &g in encoding.iter().rev() {
        s = s.conjugate(g.inverse());
    }
    s
}

/// Sign `s` of `E†Z_qE = s·Z_q`.
fn encoded_z_sign(n: usize, q: usize, encoding: &[Clifford]) -> Result<f64> {
    let z = to_encoded_frame(&PauliString::single(n, q, Pauli::Z), encoding);
    if z.clone().with_phase_power(0) != PauliString::single(n, q, Pauli::Z) {
        return Err(Error::NotLadder(format!("encoded number operator on qubit {q} is {z}")));
    }
    Ok(if z.phase_power() == 0 { 1.0 } else { -1.0 })
}

/// Hopping strings `X_0 Z⋯Z X_q` and `Y_0 Z⋯Z Y_q` of `c_0†c_p + h.c. = (XX + YY)/2`.
fn hopping_strings(n: usize, q: usize) -> [PauliString; 2] {
    let mut x = PauliString::identity(n);
    let mut y = PauliString::identity(n);
    for k in 1..q {
        x.set_letter(k, Pauli::Z);
        y.set_letter(k, Pauli::Z);
    }
    x.set_letter(0, Pauli::X);
    x.set_letter(q, Pauli::X);
    y.set_letter(0, Pauli::Y);
    y.set_letter(q, Pauli::Y);
    [x, y]
}

fn real_sign(p: &PauliString) -> Result<f64> {
    match p.phase_power() {
        0 => Ok(1.0),
        2 => Ok(-1.0),
        _ => Err(Error::NotLadder(format!("encoded hopping term {p} is not Hermitian"))),
    }
}

/// Gates for `exp(−iθ(s_A X_0 X_q + s_B Y_0 Y_q) ⊗ P)` where `a = s_A X_0 X_q P` and
/// `b = s_B Y_0 Y_q P` share the letters of `P` away from qubits `0` and `q`.
fn synthesize_hopping(a: &PauliString, b: &PauliString, q: usize, theta: f64, d: &GateDurations) -> Result<Vec<GateEvent>> {
    let n = a.n_qubits();
    if a.letter(0) != Pauli::X || a.letter(q) != Pauli::X || b.letter(0) != Pauli::Y || b.letter(q) != Pauli::Y {
        return Err(Error::NotLadder(format!("unexpected encoded hopping pair {a}, {b}")));
    }
    let support: Vec<usize> = (1..n).filter(|&k| k != q && a.letter(k) != Pauli::I).collect();
    if support.iter().any(|&k| a.letter(k) != b.letter(k)) || (1..n).any(|k| k != q && a.letter(k) == Pauli::I && b.letter(k) != Pauli::I) {
        return Err(Error::NotLadder(format!("encoded hopping pair {a}, {b} has different strings")));
    }
    let (sa, sb) = (real_sign(a)?, real_sign(b)?);
    let mut basis = Vec::new();
    for &k in &support {
        match a.letter(k) {
            Pauli::X => basis.push((k, hadamard(), hadamard())),
            Pauli::Y => basis.push((k, y_to_z(), adjoint2(&y_to_z()))),
            _ => {}
        }
    }
    let mut gates = Vec::new();
    for (k, u, _) in &basis {
        gates.push(GateEvent::single(*k, *u, GateTag::Basis, d));
    }
    let ladder: Vec<Clifford> = support.windows(2).map(|w| Clifford::Cnot { control: w[0], target: w[1] }).collect();
    for &g in &ladder {
        gates.push(GateEvent::clifford(g, GateTag::Ladder, d));
    }
    let pivot = support.last().copied();
    if let Some(m) = pivot {
        gates.push(GateEvent::clifford(Clifford::Cz(m, q), GateTag::Pivot, d));
    }
    gates.push(GateEvent::two(0, q, xx_yy_rotation(theta, sa, sb), GateTag::Coupling, d));
    if let Some(m) = pivot {
        gates.push(GateEvent::clifford(Clifford::Cz(m, q), GateTag::Pivot, d));
    }
    for &g in ladder.iter().rev() {
        gates.push(GateEvent::clifford(g, GateTag::Ladder, d));
    }
    for (k, _, ud) in basis.iter().rev() {
        gates.push(GateEvent::single(*k, *ud, GateTag::Basis, d));
    }
    Ok(gates)
}

fn adjoint2(u: &U2) -> U2 {
    [[u[0][0].conj(), u[1][0].conj()], [u[0][1].conj(), u[1][1].conj()]]
}

/// `C_p`: CZ between the impurity and every ancilla of an earlier block.
fn cz_trick_set(layout: &AncillaLayout, p: usize) -> Vec<usize> {
    layout.ancilla_qubits()[..layout.block(p).min(layout.n_ancilla())].to_vec()
}

fn check_bath(bath: &PseudomodeBath, layout: &AncillaLayout, tau: f64) -> Result<()> {
    if bath.n_modes() != layout.n_bath() {
        return Err(Error::Dimension(format!("bath has {} modes, layout {}", bath.n_modes(), layout.n_bath())));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("Trotter step τ = {tau} must be positive")));
    }
    Ok(())
}

fn phase_gates(imp_energy: f64, bath: &PseudomodeBath, layout: &AncillaLayout, tau: f64, enc: &[Clifford], d: &GateDurations) -> Result<Vec<GateEvent>> {
    let n = layout.n_qubits();
    let mut gates = vec![GateEvent::single(0, diag_phase(0.0, imp_energy * tau), GateTag::Phase, d)];
    for p in 0..layout.n_bath() {
        let q = layout.bath_qubit(p);
        let s = encoded_z_sign(n, q, enc)?;
        let th = bath.energies[p] * tau;
        gates.push(GateEvent::single(q, diag_phase(th * (1.0 - s) / 2.0, th * (1.0 + s) / 2.0), GateTag::Phase, d));
    }
    Ok(gates)
}

/// One first-order Trotter step of the encoded Hamiltonian: impurity phase, bath phases, then
/// the couplings `p = 0, 1, …`, with the ancilla strings moved onto `2·N_anc` CZ gates.
pub fn trotter_step(imp_energy: f64, bath: &PseudomodeBath, layout: &AncillaLayout, tau: f64, d: &GateDurations) -> Result<Vec<GateEvent>> {
    check_bath(bath, layout, tau)?;
    let enc = encoding_cliffords(layout, &bath.parity)?;
    let n = layout.n_qubits();
    let mut gates = phase_gates(imp_energy, bath, layout, tau, &enc, d)?;
    let mut open: Vec<usize> = Vec::new();
    for p in 0..layout.n_bath() {
        let want = cz_trick_set(layout, p);
        for &a in open.iter().filter(|a| !want.contains(a)).chain(want.iter().filter(|a| !open.contains(a))) {
            gates.push(GateEvent::clifford(Clifford::Cz(0, a), GateTag::CzTrick, d));
        }
        open = want;
        let q = layout.bath_qubit(p);
        let [x, y] = hopping_strings(n, q);
        let mut a = to_encoded_frame(&x, &enc);
        let mut b = to_encoded_frame(&y, &enc);
        for &anc in &open {
            a = a.conjugate(Clifford::Cz(0, anc));
            b = b.conjugate(Clifford::Cz(0, anc));
        }
        gates.extend(synthesize_hopping(&a, &b, q, bath.couplings[p] * tau / 2.0, d)?);
    }
    for &a in &open {
        gates.push(GateEvent::clifford(Clifford::Cz(0, a), GateTag::CzTrick, d));
    }
    Ok(gates)
}

/// Trotter step that synthesizes every encoded coupling with its full string, without the
/// CZ rewriting of the ancilla factors.
pub fn trotter_step_naive(imp_energy: f64, bath: &PseudomodeBath, layout: &AncillaLayout, tau: f64, d: &GateDurations) -> Result<Vec<GateEvent>> {
    check_bath(bath, layout, tau)?;
    let enc = encoding_cliffords(layout, &bath.parity)?;
    let n = layout.n_qubits();
    let mut gates = phase_gates(imp_energy, bath, layout, tau, &enc, d)?;
    for p in 0..layout.n_bath() {
        let q = layout.bath_qubit(p);
        let [x, y] = hopping_strings(n, q);
        let a = to_encoded_frame(&x, &enc);
        let b = to_encoded_frame(&y, &enc);
        gates.extend(synthesize_hopping(&a, &b, q, bath.couplings[p] * tau / 2.0, d)?);
    }
    Ok(gates)
}

/// Experiment timing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Timing {
    pub tau: f64,
    pub t_prep: f64,
    pub t: f64,
    pub t1: f64,
    pub durations: GateDurations,
}

/// Building blocks of a schedule: preparation (initial flips and `E†`), one Trotter step with
/// its waiting time, and the decoding `E`.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub roles: Vec<QubitRole>,
    pub init: Vec<Event>,
    pub step: Vec<Event>,
    pub decode: Vec<Event>,
    pub meta: ScheduleMeta,
}

/// Smallest dissipation rate a circuit with Trotter duration `t_trotter` can realize.
pub fn lambda_min(t_trotter: f64, t1: f64, tau: f64) -> f64 {
    t_trotter / (2.0 * t1 * tau)
}

/// Waiting time per Trotter step so that hardware decay over one step, `e^{−(T_trotter+T_wait)/T1}`,
/// equals the population decay `e^{−2Λτ}` of the Lindblad equation.
pub fn waiting_time(lambda: f64, tau: f64, t1: f64, t_trotter: f64) -> Result<f64> {
    let lmin = lambda_min(t_trotter, t1, tau);
    let t_wait = 2.0 * lambda * tau * t1 - t_trotter;
    if t_wait < 0.0 {
        if t_wait > -1e-12 * t_trotter {
            return Ok(0.0);
        }
        return Err(Error::RateTooSmall { lambda, lambda_min: lmin });
    }
    Ok(t_wait)
}

pub fn build_program(imp_energy: f64, bath: &PseudomodeBath, layout: &AncillaLayout, timing: &Timing) -> Result<Program> {
    let d = &timing.durations;
    if !(timing.t1 > 0.0) || !(d.one_qubit >= 0.0) || !(d.two_qubit >= 0.0) {
        return Err(Error::InvalidArgument(String::from("T1 must be positive and gate durations nonnegative")));
    }
    if !(timing.t_prep >= 0.0) || !(timing.t >= 0.0) {
        return Err(Error::InvalidArgument(String::from("times must be nonnegative")));
    }
    let step_gates = trotter_step(imp_energy, bath, layout, timing.tau, d)?;
    let t_trotter: f64 = step_gates.iter().map(|g| g.duration).sum();
    let t_wait = waiting_time(bath.rate, timing.tau, timing.t1, t_trotter)?;
    let enc = encoding_circuit(layout, &bath.parity, d)?;
    let mut init: Vec<Event> = bath
        .emitters()
        .map(|p| Event::Gate(GateEvent::clifford(Clifford::X(layout.bath_qubit(p)), GateTag::Init, d)))
        .collect();
    init.extend(enc.iter().rev().map(|g| Event::Gate(g.clone())));
    let decode = enc
        .into_iter()
        .map(|mut g| {
            g.tag = GateTag::Decode;
            Event::Gate(g)
        })
        .collect();
    let mut step: Vec<Event> = step_gates.into_iter().map(Event::Gate).collect();
    step.push(Event::Wait(t_wait));
    let meta = ScheduleMeta {
        tau: timing.tau,
        lambda: bath.rate,
        t1: timing.t1,
        t_trotter,
        t_wait,
        t_prep_requested: timing.t_prep,
        t_requested: timing.t,
        n_prep: (timing.t_prep / timing.tau).round() as usize,
        n_t: (timing.t / timing.tau).round() as usize,
    };
    Ok(Program { roles: layout.roles(), init, step, decode, meta })
}

impl Program {
    pub fn n_qubits(&self) -> usize {
        self.roles.len()
    }

    /// Preparation, `n_prep + n_t` Trotter steps and decoding.
    pub fn schedule(&self) -> CircuitSchedule {
        let mut events = self.init.clone();
        for _ in 0..self.meta.n_prep + self.meta.n_t {
            events.extend(self.step.iter().cloned());
        }
        events.extend(self.decode.iter().cloned());
        let noisy = self.roles.iter().map(|&r| r == QubitRole::Bath).collect();
        CircuitSchedule { n_qubits: self.roles.len(), roles: self.roles.clone(), noisy, events, meta: Some(self.meta.clone()) }
    }
}

/// Full noise-harvesting program with times rounded to the Trotter grid.
pub fn schedule(imp_energy: f64, bath: &PseudomodeBath, layout: &AncillaLayout, timing: &Timing) -> Result<CircuitSchedule> {
    Ok(build_program(imp_energy, bath, layout, timing)?.schedule())
}

/// Gate statistics of a schedule.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GateCounts {
    pub init: usize,
    pub encoding_two_qubit: usize,
    pub encoding_one_qubit: usize,
    pub decoding_two_qubit: usize,
    pub decoding_one_qubit: usize,
    pub coupling_two_qubit: usize,
    pub cz_trick: usize,
    pub trotter_one_qubit: usize,
    pub hadamard: usize,
    pub other: usize,
    pub total: usize,
    pub n_steps: usize,
    /// Coupling plus CZ-trick gates per Trotter step.
    pub two_qubit_per_step: usize,
    pub one_qubit_per_step: usize,
    /// Serialized duration of one Trotter step.
    pub t_trotter: f64,
}

/// Counts gates by category. Trotter steps are delimited by their waiting events.
pub fn gate_counts(sched: &CircuitSchedule) -> GateCounts {
    let mut c = GateCounts::default();
    let mut step_time = 0.0;
    let mut first_step = None;
    for e in &sched.events {
        match e {
            Event::Wait(_) => {
                c.n_steps += 1;
                if first_step.is_none() {
                    first_step = Some(step_time);
                }
                step_time = 0.0;
            }
            Event::Gate(g) => {
                c.total += 1;
                let two = g.is_two_qubit();
                match g.tag {
                    GateTag::Init => c.init += 1,
                    GateTag::Encode if two => c.encoding_two_qubit += 1,
                    GateTag::Encode => c.encoding_one_qubit += 1,
                    GateTag::Decode if two => c.decoding_two_qubit += 1,
                    GateTag::Decode => c.decoding_one_qubit += 1,
                    GateTag::CzTrick => c.cz_trick += 1,
                    GateTag::Phase | GateTag::Basis | GateTag::Ladder | GateTag::Pivot | GateTag::Coupling => {
                        if two {
                            c.coupling_two_qubit += 1;
                        } else {
                            c.trotter_one_qubit += 1;
                        }
                    }
                    GateTag::Hadamard => c.hadamard += 1,
                    GateTag::Other => c.other += 1,
                }
                if matches!(g.tag, GateTag::Phase | GateTag::Basis | GateTag::Ladder | GateTag::Pivot | GateTag::Coupling | GateTag::CzTrick) {
                    step_time += g.duration;
                }
            }
        }
    }
    if c.n_steps > 0 {
        c.two_qubit_per_step = (c.coupling_two_qubit + c.cz_trick) / c.n_steps;
        c.one_qubit_per_step = c.trotter_one_qubit / c.n_steps;
        c.t_trotter = first_step.unwrap_or(0.0);
    }
    c
}

impl GateCounts {
    /// Sum of the per-category counts.
    pub fn category_sum(&self) -> usize {
        self.init
            + self.encoding_two_qubit
            + self.encoding_one_qubit
            + self.decoding_two_qubit
            + self.decoding_one_qubit
            + self.coupling_two_qubit
            + self.cz_trick
            + self.trotter_one_qubit
            + self.hadamard
            + self.other
    }
}

/// Line-based text dump of a schedule.
pub fn dump_schedule(sched: &CircuitSchedule) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "QUBITS {}", sched.n_qubits);
    for (i, r) in sched.roles.iter().enumerate() {
        let _ = writeln!(s, "ROLE {i} {}", r.label());
    }
    for (i, &nz) in sched.noisy.iter().enumerate() {
        let _ = writeln!(s, "NOISY {i} {}", u8::from(nz));
    }
    for e in &sched.events {
        match e {
            Event::Wait(d) => {
                let _ = writeln!(s, "WAIT dur={d:?}");
            }
            Event::Gate(g) => {
                let qs: Vec<String> = g.qubits.iter().map(|q| q.to_string()).collect();
                let _ = writeln!(s, "GATE {} q={} dur={:?} params={}", g.kind.label(), qs.join(","), g.duration, format_payload(&g.payload));
            }
        }
    }
    s
}

fn format_payload(p: &Payload) -> String {
    let nums = |it: &mut dyn Iterator<Item = &Complex64>| {
        let mut v = Vec::new();
        for z in it {
            v.push(format!("{:?}", z.re));
            v.push(format!("{:?}", z.im));
        }
        v.join(",")
    };
    match p {
        Payload::None => String::from("-"),
        Payload::U2(u) => nums(&mut u.iter().flatten()),
        Payload::U4(u) => nums(&mut u.iter().flatten()),
        Payload::Pauli { letter, control_state } => format!("{}{}", u8::from(*control_state), letter.as_char()),
    }
}

fn parse_floats(s: &str, line: usize) -> Result<Vec<Complex64>> {
    let xs: core::result::Result<Vec<f64>, _> = s.split(',').map(str::parse::<f64>).collect();
    let xs = xs.map_err(|e| Error::Parse { line, msg: format!("bad number in params: {e}") })?;
    if xs.len() % 2 != 0 {
        return Err(Error::Parse { line, msg: String::from("odd number of matrix entries") });
    }
    Ok(xs.chunks(2).map(|c| c64(c[0], c[1])).collect())
}

fn field<'a>(tok: Option<&'a str>, key: &str, line: usize) -> Result<&'a str> {
    tok.and_then(|t| t.strip_prefix(key)).ok_or_else(|| Error::Parse { line, msg: format!("expected {key}") })
}

fn parse_dur(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>().map_err(|e| Error::Parse { line, msg: format!("bad duration: {e}") })
}

/// Parses the output of [`dump_schedule`]. Gate tags and metadata are not part of the format.
pub fn parse_schedule(text: &str) -> Result<CircuitSchedule> {
    let mut n = None;
    let mut roles: Vec<Option<QubitRole>> = Vec::new();
    let mut noisy: Vec<Option<bool>> = Vec::new();
    let mut events = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut toks = raw.split_whitespace();
        let Some(head) = toks.next() else { continue };
        let err = |msg: &str| Error::Parse { line, msg: String::from(msg) };
        match head {
            "QUBITS" => {
                let k: usize = toks.next().and_then(|t| t.parse().ok()).ok_or_else(|| err("bad qubit count"))?;
                n = Some(k);
                roles = vec![None; k];
                noisy = vec![None; k];
            }
            "ROLE" | "NOISY" => {
                let i: usize = toks.next().and_then(|t| t.parse().ok()).ok_or_else(|| err("bad qubit index"))?;
                let v = toks.next().ok_or_else(|| err("missing value"))?;
                if i >= roles.len() {
                    return Err(err("qubit index out of range"));
                }
                if head == "ROLE" {
                    roles[i] = Some(QubitRole::from_label(v).ok_or_else(|| err("unknown role"))?);
                } else {
                    noisy[i] = Some(match v {
                        "0" => false,
                        "1" => true,
                        _ => return Err(err("noisy flag must be 0 or 1")),
                    });
                }
            }
            "WAIT" => events.push(Event::Wait(parse_dur(field(toks.next(), "dur=", line)?, line)?)),
            "GATE" => {
                let kind = toks.next().and_then(GateKind::from_label).ok_or_else(|| err("unknown gate kind"))?;
                let qs: core::result::Result<Vec<usize>, _> = field(toks.next(), "q=", line)?.split(',').map(str::parse).collect();
                let qubits = qs.map_err(|_| err("bad qubit list"))?;
                let duration = parse_dur(field(toks.next(), "dur=", line)?, line)?;
                let ptxt = field(toks.next(), "params=", line)?;
                let payload = match kind {
                    GateKind::Cz | GateKind::Cnot | GateKind::X => {
                        if ptxt != "-" {
                            return Err(err("unexpected params"));
                        }
                        Payload::None
                    }
                    GateKind::SingleQubitUnitary => {
                        let z = parse_floats(ptxt, line)?;
                        if z.len() != 4 {
                            return Err(err("expected a 2×2 matrix"));
                        }
                        Payload::U2([[z[0], z[1]], [z[2], z[3]]])
                    }
                    GateKind::TwoQubitUnitary => {
                        let z = parse_floats(ptxt, line)?;
                        if z.len() != 16 {
                            return Err(err("expected a 4×4 matrix"));
                        }
                        let mut u = [[c64(0.0, 0.0); 4]; 4];
                        for (i, row) in u.iter_mut().enumerate() {
                            row.copy_from_slice(&z[4 * i..4 * i + 4]);
                        }
                        Payload::U4(u)
                    }
                    GateKind::ControlledPauli => {
                        let mut ch = ptxt.chars();
                        let state = match ch.next() {
                            Some('0') => false,
                            Some('1') => true,
                            _ => return Err(err("controlled Pauli needs a control state")),
                        };
                        let letter = ch.next().and_then(Pauli::from_char).ok_or_else(|| err("bad Pauli letter"))?;
                        if ch.next().is_some() {
                            return Err(err("trailing characters in params"));
                        }
                        Payload::Pauli { letter, control_state: state }
                    }
                };
                events.push(Event::Gate(GateEvent { kind, qubits, payload, duration, tag: GateTag::Other }));
            }
            _ => return Err(err("unknown record")),
        }
        if toks.next().is_some() {
            return Err(err("trailing tokens"));
        }
    }
    let n = n.ok_or(Error::Parse { line: 0, msg: String::from("missing QUBITS header") })?;
    let roles: Option<Vec<QubitRole>> = roles.into_iter().collect();
    let noisy: Option<Vec<bool>> = noisy.into_iter().collect();
    let (roles, noisy) = match (roles, noisy) {
        (Some(r), Some(z)) => (r, z),
        _ => return Err(Error::Parse { line: 0, msg: String::from("every qubit needs ROLE and NOISY lines") }),
    };
    let mut sched = CircuitSchedule::new(roles, events).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
    debug_assert_eq!(sched.n_qubits, n);
    sched.noisy = noisy;
    Ok(sched)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layouts() {
        let l = make_layout(8, 2).unwrap();
        assert_eq!(l.block_size(), 3);
        assert_eq!(l.bath_qubits(), &[1, 2, 3, 5, 6, 7, 9, 10]);
        assert_eq!(l.ancilla_qubits(), &[4, 8]);
        let l = make_layout(8, 0).unwrap();
        assert_eq!((l.block_size(), l.n_qubits()), (8, 9));
        let l = make_layout(8, 1).unwrap();
        assert_eq!(l.ancilla_qubits(), &[5]);
        assert!(make_layout(8, 8).is_err());
        assert!(make_layout(8, 4).is_err());
    }

    #[test]
    fn three_qubit_block() {
        // bath q=1, middle m=2, ancilla a=3 (N_b=2 with K=2 and one ancilla)
        let l = make_layout(3, 1).unwrap();
        assert_eq!(l.ancilla_qubits(), &[3]);
        let g = mode_encoding(&l, 0, Parity::Absorber).unwrap();
        assert_eq!(g, vec![Clifford::Cz(1, 2), Clifford::Cnot { control: 1, target: 3 }]);
        let g = mode_encoding(&l, 0, Parity::Emitter).unwrap();
        assert_eq!(g[0], Clifford::X(1));
    }

    #[test]
    fn rotation_is_unitary() {
        let u = xx_yy_rotation(0.37, 1.0, -1.0);
        for i in 0..4 {
            for j in 0..4 {
                let s: Complex64 = (0..4).map(|k| u[i][k] * u[j][k].conj()).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s - c64(e, 0.0)).norm() < 1e-15);
            }
        }
    }
}

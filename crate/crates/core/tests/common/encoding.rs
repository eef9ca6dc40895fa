//! Basis-state actions of Clifford encodings and Pauli jump strings.

use super::*;
use noiseharvest_core::bath::{Parity, PseudomodeBath};
use noiseharvest_core::circuit::{make_layout, AncillaLayout, GateEvent};
use noiseharvest_core::pauli::Clifford;

/// Basis action of a monomial operator: `|x⟩ → phase·|y⟩`, or annihilated.
pub type Monomial = Box<dyn Fn(usize) -> Option<(usize, Complex)>>;
pub type Complex = noiseharvest_core::Complex64;

pub fn bit(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

pub fn clifford_on_basis(n: usize, g: Clifford, x: usize) -> (usize, Complex) {
    match g {
        Clifford::X(q) => (x ^ bit(n, q), c(1.0, 0.0)),
        Clifford::Cz(a, b) => {
            let s = if x & bit(n, a) != 0 && x & bit(n, b) != 0 { -1.0 } else { 1.0 };
            (x, c(s, 0.0))
        }
        Clifford::Cnot { control, target } => {
            if x & bit(n, control) != 0 {
                (x ^ bit(n, target), c(1.0, 0.0))
            } else {
                (x, c(1.0, 0.0))
            }
        }
        _ => panic!("encoding uses X, CZ and CNOT only"),
    }
}

/// `U·S⁻_q·U†` on a basis state, with `U` the circuit `gates` (first applied first). Every
/// encoding gate is its own inverse.
pub fn encoded_lowering(n: usize, gates: &[Clifford], q: usize, x: usize) -> Option<(usize, Complex)> {
    let mut y = x;
    let mut ph = c(1.0, 0.0);
    for &g in gates.iter().rev() {
        let (z, p) = clifford_on_basis(n, g, y);
        y = z;
        ph *= p;
    }
    if y & bit(n, q) == 0 {
        return None;
    }
    y ^= bit(n, q);
    for &g in gates {
        let (z, p) = clifford_on_basis(n, g, y);
        y = z;
        ph *= p;
    }
    Some((y, ph))
}

/// `S^±_q ⊗ Z_zs ⊗ X_xs` on a basis state.
pub fn pauli_jump(n: usize, q: usize, raise: bool, zs: &[usize], xs: &[usize]) -> Monomial {
    let (zs, xs) = (zs.to_vec(), xs.to_vec());
    Box::new(move |x: usize| {
        let mut ph = c(1.0, 0.0);
        for &k in &zs {
            if x & bit(n, k) != 0 {
                ph = -ph;
            }
        }
        let mut y = x;
        for &k in &xs {
            y ^= bit(n, k);
        }
        if (y & bit(n, q) != 0) == raise {
            return None;
        }
        Some((y ^ bit(n, q), ph))
    })
}

pub fn same_action(n: usize, a: impl Fn(usize) -> Option<(usize, Complex)>, b: impl Fn(usize) -> Option<(usize, Complex)>) -> f64 {
    let mut worst: f64 = 0.0;
    for x in 0..1usize << n {
        match (a(x), b(x)) {
            (None, None) => {}
            (Some((ya, pa)), Some((yb, pb))) if ya == yb => worst = worst.max((pa - pb).norm()),
            _ => return f64::INFINITY,
        }
    }
    worst
}

pub fn layouts_up_to(max_qubits: usize) -> Vec<AncillaLayout> {
    let mut out = Vec::new();
    for n_b in 1..max_qubits {
        for n_anc in 0..n_b {
            if let Ok(l) = make_layout(n_b, n_anc) {
                if l.n_qubits() <= max_qubits {
                    out.push(l);
                }
            }
        }
    }
    out
}

pub fn jump_string(l: &AncillaLayout, p: usize) -> (Vec<usize>, Vec<usize>) {
    let q = l.bath_qubit(p);
    match l.ancilla_of(p) {
        Some(a) => ((q + 1..a).collect(), vec![a]),
        None => ((q + 1..l.n_qubits()).collect(), vec![]),
    }
}

pub fn dense_clifford(n: usize, g: Clifford) -> M {
    let d = 1 << n;
    let mut u = M::zeros(d, d);
    for x in 0..d {
        let (y, ph) = clifford_on_basis(n, g, x);
        u[(y, x)] = ph;
    }
    u
}

pub fn step_unitary(n: usize, gates: &[GateEvent]) -> M {
    gates.iter().fold(eye(1 << n), |u, g| gate_unitary(n, g) * u)
}

pub fn random_bath(n_b: usize, seed: u64) -> PseudomodeBath {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64
    };
    let energies = (0..n_b).map(|_| 4.0 * next() - 2.0).collect();
    let couplings = (0..n_b).map(|_| 0.1 + next()).collect();
    let parity = (0..n_b).map(|_| if next() < 0.5 { Parity::Emitter } else { Parity::Absorber }).collect();
    PseudomodeBath::new(energies, couplings, 0.5, parity).unwrap()
}

//! Dense many-body oracles shared by the integration tests and the acceptance binary.
#![allow(dead_code)]

use nalgebra::DMatrix;
use noiseharvest_core::bath::{Parity, PseudomodeBath};
use noiseharvest_core::circuit::{CircuitSchedule, Event, GateEvent, GateKind, Payload};
use noiseharvest_core::pauli::Pauli;
use noiseharvest_core::simulator::NoiseModel;
use noiseharvest_core::Complex64;

pub mod encoding;

pub type M = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn eye(d: usize) -> M {
    M::identity(d, d)
}

fn small(rows: &[[f64; 2]; 2]) -> M {
    M::from_fn(2, 2, |i, j| c(rows[i][j], 0.0))
}

pub fn sigma_minus() -> M {
    small(&[[0.0, 1.0], [0.0, 0.0]])
}

pub fn z() -> M {
    small(&[[1.0, 0.0], [0.0, -1.0]])
}

/// `ops[0] ⊗ ops[1] ⊗ …`, the first factor being the most significant qubit.
pub fn kron_all(ops: &[M]) -> M {
    ops.iter().skip(1).fold(ops[0].clone(), |acc, o| acc.kronecker(o))
}

/// Jordan-Wigner annihilation operator of `mode` among `n` modes, mode 0 most significant.
pub fn annihilation(n: usize, mode: usize) -> M {
    let ops: Vec<M> = (0..n)
        .map(|k| match k.cmp(&mode) {
            std::cmp::Ordering::Less => z(),
            std::cmp::Ordering::Equal => sigma_minus(),
            std::cmp::Ordering::Greater => eye(2),
        })
        .collect();
    kron_all(&ops)
}

/// Single-qubit matrix on qubit `q` of an `n`-qubit register.
pub fn on_qubit(n: usize, q: usize, u: &M) -> M {
    let ops: Vec<M> = (0..n).map(|k| if k == q { u.clone() } else { eye(2) }).collect();
    kron_all(&ops)
}

/// Column-stacking superoperator of `X → A X B`.
pub fn sandwich(a: &M, b: &M) -> M {
    b.transpose().kronecker(a)
}

pub fn vec_of(x: &M) -> M {
    let d = x.nrows();
    M::from_fn(d * d, 1, |k, _| x[(k % d, k / d)])
}

pub fn unvec(v: &M) -> M {
    let d = (v.nrows() as f64).sqrt().round() as usize;
    M::from_fn(d, d, |i, j| v[(j * d + i, 0)])
}

/// Impurity plus pseudomodes in second quantization.
pub struct ManyBody {
    pub n: usize,
    pub c: Vec<M>,
    pub h: M,
    pub jumps: Vec<M>,
}

impl ManyBody {
    pub fn new(imp_energy: f64, bath: &PseudomodeBath) -> Self {
        let n = 1 + bath.n_modes();
        let cs: Vec<M> = (0..n).map(|k| annihilation(n, k)).collect();
        let dag = |m: &M| m.adjoint();
        let mut h = (dag(&cs[0]) * &cs[0]) * c(imp_energy, 0.0);
        let mut jumps = Vec::new();
        for p in 0..bath.n_modes() {
            let cp = &cs[p + 1];
            h += (dag(cp) * cp) * c(bath.energies[p], 0.0);
            let hop = dag(&cs[0]) * cp;
            h += (&hop + hop.adjoint()) * c(bath.couplings[p], 0.0);
            let l = match bath.parity[p] {
                Parity::Emitter => dag(cp),
                Parity::Absorber => cp.clone(),
            };
            jumps.push(l * c(bath.rate.sqrt(), 0.0));
        }
        ManyBody { n, c: cs, h, jumps }
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// `dρ/dt = −i[H,ρ] + Σ (s·2LρL† − {L†L,ρ})`; `s = −1` gives the generator for
    /// parity-odd arguments in the fermionic regression formula.
    pub fn generator(&self, jump_sign: f64) -> M {
        let d = self.dim();
        let id = eye(d);
        let mi = c(0.0, -1.0);
        let mut l = (sandwich(&self.h, &id) - sandwich(&id, &self.h)) * mi;
        for j in &self.jumps {
            let jd = j.adjoint();
            let n = &jd * j;
            l += sandwich(j, &jd) * c(2.0 * jump_sign, 0.0);
            l -= sandwich(&n, &id) + sandwich(&id, &n);
        }
        l
    }

    pub fn steady_state(&self) -> M {
        let d = self.dim();
        let mut a = self.generator(1.0);
        let mut b = M::zeros(d * d, 1);
        for k in 0..d * d {
            a[(0, k)] = c(0.0, 0.0);
        }
        for i in 0..d {
            a[(0, i * d + i)] = c(1.0, 0.0);
        }
        b[(0, 0)] = c(1.0, 0.0);
        let rho = unvec(&a.lu().solve(&b).expect("steady state is unique"));
        (&rho + rho.adjoint()) * c(0.5, 0.0)
    }

    /// Fock state with the listed modes occupied.
    pub fn fock(&self, occupied: &[usize]) -> M {
        let idx = occupied.iter().fold(0usize, |acc, &m| acc | 1 << (self.n - 1 - m));
        let mut rho = M::zeros(self.dim(), self.dim());
        rho[(idx, idx)] = c(1.0, 0.0);
        rho
    }
}

/// `G^>(t) = −i Tr(d·E_t[d†ρ])` and `G^<(t) = i Tr(d·E_t[ρd†])` with the odd-sector generator.
pub fn regression_gf(mb: &ManyBody, rho: &M, times: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let gen = mb.generator(-1.0);
    let d = &mb.c[0];
    let dd = d.adjoint();
    let mut greater = Vec::with_capacity(times.len());
    let mut lesser = Vec::with_capacity(times.len());
    for &t in times {
        let e = expm(&(&gen * c(t, 0.0)));
        let xg = unvec(&(&e * vec_of(&(&dd * rho))));
        let xl = unvec(&(&e * vec_of(&(rho * &dd))));
        greater.push(c(0.0, -1.0) * (d * xg).trace());
        lesser.push(c(0.0, 1.0) * (d * xl).trace());
    }
    (greater, lesser)
}

/// Dense unitary of a scheduled gate on an `n`-qubit register.
pub fn gate_unitary(n: usize, g: &GateEvent) -> M {
    let pm = |p: Pauli| -> M {
        let m = p.matrix();
        M::from_fn(2, 2, |i, j| m[i][j])
    };
    let two = |u: [[Complex64; 4]; 4]| -> M {
        let (a, b) = (g.qubits[0], g.qubits[1]);
        let (ba, bb) = (n - 1 - a, n - 1 - b);
        let d = 1 << n;
        M::from_fn(d, d, |i, j| {
            let rest = !((1 << ba) | (1 << bb));
            if i & rest != j & rest {
                return c(0.0, 0.0);
            }
            let li = ((i >> ba) & 1) << 1 | ((i >> bb) & 1);
            let lj = ((j >> ba) & 1) << 1 | ((j >> bb) & 1);
            u[li][lj]
        })
    };
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    match (g.kind, &g.payload) {
        (GateKind::X, _) => on_qubit(n, g.qubits[0], &pm(Pauli::X)),
        (GateKind::SingleQubitUnitary, Payload::U2(u)) => on_qubit(n, g.qubits[0], &M::from_fn(2, 2, |i, j| u[i][j])),
        (GateKind::TwoQubitUnitary, Payload::U4(u)) => two(*u),
        (GateKind::Cz, _) => {
            let mut u = [[zero; 4]; 4];
            for k in 0..4 {
                u[k][k] = if k == 3 { -one } else { one };
            }
            two(u)
        }
        (GateKind::Cnot, _) => {
            let mut u = [[zero; 4]; 4];
            for (k, j) in [0usize, 1, 3, 2].into_iter().enumerate() {
                u[k][j] = one;
            }
            two(u)
        }
        (GateKind::ControlledPauli, Payload::Pauli { letter, control_state }) => {
            let p = letter.matrix();
            let mut u = [[zero; 4]; 4];
            let (on, off) = if *control_state { (2, 0) } else { (0, 2) };
            u[off][off] = one;
            u[off + 1][off + 1] = one;
            for i in 0..2 {
                for j in 0..2 {
                    u[on + i][on + j] = p[i][j];
                }
            }
            two(u)
        }
        _ => panic!("malformed gate"),
    }
}

/// Textbook amplitude damping on qubit `q`.
pub fn damp(rho: &M, n: usize, q: usize, dt: f64, t1: f64) -> M {
    let k0 = on_qubit(n, q, &small(&[[1.0, 0.0], [0.0, (-dt / (2.0 * t1)).exp()]]));
    let k1 = on_qubit(n, q, &small(&[[0.0, (-(-dt / t1).exp_m1()).sqrt()], [0.0, 0.0]]));
    &k0 * rho * k0.adjoint() + &k1 * rho * k1.adjoint()
}

/// Event-by-event dense execution with eager damping of every noisy qubit.
pub fn dense_run(sched: &CircuitSchedule, nm: &NoiseModel, rho0: &M) -> M {
    let n = sched.n_qubits;
    let mut rho = rho0.clone();
    let idle = |rho: M, dt: f64| -> M {
        let mut r = rho;
        for q in 0..n {
            if nm.is_noisy(q) {
                r = damp(&r, n, q, dt, nm.t1);
            }
        }
        r
    };
    for e in &sched.events {
        match e {
            Event::Gate(g) => {
                let u = gate_unitary(n, g);
                rho = &u * rho * u.adjoint();
                rho = idle(rho, g.duration);
            }
            Event::Wait(d) => rho = idle(rho, *d),
        }
    }
    rho
}

pub fn ground(n: usize) -> M {
    let mut r = M::zeros(1 << n, 1 << n);
    r[(0, 0)] = c(1.0, 0.0);
    r
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(a: &M) -> M {
    let norm: f64 = a.iter().map(|z| z.norm()).sum();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let x = a * c(0.5f64.powi(s), 0.0);
    let mut term = eye(a.nrows());
    let mut sum = term.clone();
    for k in 1..=24 {
        term = &term * &x * c(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

pub fn max_abs(m: &M) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Trace over all qubits except `keep` (listed in increasing order).
pub fn reduce(rho: &M, n: usize, keep: &[usize]) -> M {
    let m = keep.len();
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let spread = |sub: usize, env: usize| {
        let mut idx = 0;
        for (j, &q) in keep.iter().enumerate() {
            idx |= ((sub >> (m - 1 - j)) & 1) << (n - 1 - q);
        }
        for (j, &q) in traced.iter().enumerate() {
            idx |= ((env >> (traced.len() - 1 - j)) & 1) << (n - 1 - q);
        }
        idx
    };
    M::from_fn(1 << m, 1 << m, |r, cc| (0..1usize << traced.len()).map(|e| rho[(spread(r, e), spread(cc, e))]).sum())
}

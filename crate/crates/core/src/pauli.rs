//! Pauli strings, Jordan-Wigner ladder operators and Clifford conjugation.
//!
//! Qubit `0` is the leftmost tensor factor, so in a dense matrix it is the most
//! significant bit of the basis index. Jordan-Wigner strings run toward higher
//! qubit indices: `c_m = S⁻_m ⊗ Z_{m+1} ⊗ … ⊗ Z_{n-1}`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{c64, CMat, Complex64, Error, Result, DENSE_LIMIT};

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Product `a·b = i^k · c`, returned as `(k, c)`.
    pub fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
        }
    }

    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = c64(0.0, 0.0);
        let l = c64(1.0, 0.0);
        let i = c64(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Phase `i^k` as a complex number.
pub fn phase_value(k: u8) -> Complex64 {
    match k % 4 {
        0 => c64(1.0, 0.0),
        1 => c64(0.0, 1.0),
        2 => c64(-1.0, 0.0),
        _ => c64(0.0, -1.0),
    }
}

/// A tensor product of Pauli letters with a phase from `{1, i, -1, -i}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
    phase: u8,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        PauliString { letters: vec![Pauli::I; n_qubits], phase: 0 }
    }

    /// Letter `p` on `qubit`, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n_qubits);
        s.letters[qubit] = p;
        s
    }

    /// Builds a string from letters and a phase exponent `k` (phase `i^k`).
    pub fn new(letters: Vec<Pauli>, phase_power: u8) -> Self {
        PauliString { letters, phase: phase_power % 4 }
    }

    /// Parses strings such as `"XIZ"`, `"-YY"` or `"-iXZ"`.
    pub fn parse(s: &str) -> Result<Self> {
        let (phase, body) = if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (1, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else {
            (0, s)
        };
        let letters = body
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::InvalidArgument(format!("bad Pauli letter {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::InvalidArgument(String::from("empty Pauli string")));
        }
        Ok(PauliString::new(letters, phase))
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        self.letters[qubit]
    }

    pub fn set_letter(&mut self, qubit: usize, p: Pauli) {
        self.letters[qubit] = p;
    }

    /// Exponent `k` of the phase `i^k`.
    pub fn phase_power(&self) -> u8 {
        self.phase
    }

    pub fn phase(&self) -> Complex64 {
        phase_value(self.phase)
    }

    pub fn with_phase_power(mut self, k: u8) -> Self {
        self.phase = k % 4;
        self
    }

    /// Multiplies the phase by `i^k`.
    pub fn times_i_pow(mut self, k: u8) -> Self {
        self.phase = (self.phase + k) % 4;
        self
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// Qubits carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        (0..self.letters.len()).filter(|&q| self.letters[q] != Pauli::I).collect()
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn dagger(&self) -> Self {
        PauliString { letters: self.letters.clone(), phase: (4 - self.phase) % 4 }
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n_qubits() != other.n_qubits() {
            return Err(Error::Dimension(format!(
                "Pauli strings on {} and {} qubits",
                self.n_qubits(),
                other.n_qubits()
            )));
        }
        let mut phase = self.phase + other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (k, p) = a.mul(b);
                phase += k;
                p
            })
            .collect();
        Ok(PauliString { letters, phase: phase % 4 })
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Dense `2ⁿ×2ⁿ` matrix.
    pub fn to_dense(&self) -> Result<CMat> {
        pauli_to_dense(self)
    }

    /// Conjugation `g · self · g†` by a Clifford gate.
    pub fn conjugate(&self, g: Clifford) -> PauliString {
        let n = self.n_qubits();
        let mut out = PauliString::identity(n).with_phase_power(self.phase);
        for (q, &p) in self.letters.iter().enumerate() {
            if p == Pauli::I {
                continue;
            }
            let img = g.image(n, q, p);
            out = out.mul(&img).expect("same register");
        }
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

/// Dense matrix of a Pauli string (qubit 0 is the leftmost factor).
pub fn pauli_to_dense(p: &PauliString) -> Result<CMat> {
    let n = p.n_qubits();
    if n > DENSE_LIMIT {
        return Err(Error::DenseLimit(n));
    }
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    let ph = p.phase();
    // Each column has exactly one nonzero entry.
    for col in 0..dim {
        let mut row = col;
        let mut amp = ph;
        for (q, &l) in p.letters.iter().enumerate() {
            let bit = 1 << (n - 1 - q);
            let b = col & bit != 0;
            match l {
                Pauli::I => {}
                Pauli::X => row ^= bit,
                Pauli::Y => {
                    row ^= bit;
                    amp *= if b { c64(0.0, -1.0) } else { c64(0.0, 1.0) };
                }
                Pauli::Z => {
                    if b {
                        amp = -amp;
                    }
                }
            }
        }
        m[(row, col)] = amp;
    }
    Ok(m)
}

/// Kronecker product helper: places a `2×2` operator on `qubit` of an `n`-qubit register.
pub fn embed_single(n: usize, qubit: usize, u: &[[Complex64; 2]; 2]) -> Result<CMat> {
    if n > DENSE_LIMIT {
        return Err(Error::DenseLimit(n));
    }
    let dim = 1usize << n;
    let bit = 1 << (n - 1 - qubit);
    let mut m = CMat::zeros(dim, dim);
    for col in 0..dim {
        let cb = (col & bit != 0) as usize;
        for rb in 0..2 {
            let row = if rb == 1 { col | bit } else { col & !bit };
            m[(row, col)] += u[rb][cb];
        }
    }
    Ok(m)
}

/// Raising (`Plus`, `S⁺ = |1⟩⟨0|`) or lowering (`Minus`, `S⁻ = |0⟩⟨1|`) operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = c64(0.0, 0.0);
        let l = c64(1.0, 0.0);
        match self {
            Sign::Plus => [[o, o], [l, o]],
            Sign::Minus => [[o, l], [o, o]],
        }
    }
}

/// `coefficient · S^± (on projector_qubit) ⊗ tail`.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderTerm {
    coefficient: Complex64,
    projector_qubit: usize,
    sign: Sign,
    tail: PauliString,
}

impl LadderTerm {
    /// The tail must act as identity on the projector qubit.
    pub fn new(coefficient: Complex64, projector_qubit: usize, sign: Sign, tail: PauliString) -> Result<Self> {
        if projector_qubit >= tail.n_qubits() {
            return Err(Error::IndexOutOfRange { index: projector_qubit, len: tail.n_qubits() });
        }
        if tail.letter(projector_qubit) != Pauli::I {
            return Err(Error::NotLadder(format!("tail {tail} acts on the projector qubit {projector_qubit}")));
        }
        Ok(LadderTerm { coefficient, projector_qubit, sign, tail })
    }

    pub fn coefficient(&self) -> Complex64 {
        self.coefficient
    }

    pub fn projector_qubit(&self) -> usize {
        self.projector_qubit
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn tail(&self) -> &PauliString {
        &self.tail
    }

    pub fn n_qubits(&self) -> usize {
        self.tail.n_qubits()
    }

    /// Two-term Pauli expansion from `S^± = (X ∓ iY)/2`.
    pub fn pauli_terms(&self) -> [(Complex64, PauliString); 2] {
        let q = self.projector_qubit;
        let mut x = self.tail.clone();
        x.set_letter(q, Pauli::X);
        let mut y = self.tail.clone();
        y.set_letter(q, Pauli::Y);
        let half = self.coefficient * 0.5;
        let iy = match self.sign {
            Sign::Plus => c64(0.0, -0.5),
            Sign::Minus => c64(0.0, 0.5),
        };
        [(half, x), (self.coefficient * iy, y)]
    }

    /// Hermitian conjugate.
    pub fn dagger(&self) -> LadderTerm {
        LadderTerm {
            coefficient: self.coefficient.conj(),
            projector_qubit: self.projector_qubit,
            sign: self.sign.flip(),
            tail: self.tail.dagger(),
        }
    }

    pub fn to_dense(&self) -> Result<CMat> {
        let mut m = CMat::zeros(1 << self.n_qubits(), 1 << self.n_qubits());
        for (c, p) in self.pauli_terms() {
            m += pauli_to_dense(&p)? * c;
        }
        Ok(m)
    }

    /// Right multiplication by a Pauli string that is `I` or `Z` on the projector qubit.
    pub fn mul_right(&self, p: &PauliString) -> Result<LadderTerm> {
        let q = self.projector_qubit;
        let at = p.letter(q);
        let sgn = match (at, self.sign) {
            (Pauli::I, _) => 1.0,
            // S⁻Z = -S⁻, S⁺Z = S⁺
            (Pauli::Z, Sign::Minus) => -1.0,
            (Pauli::Z, Sign::Plus) => 1.0,
            _ => return Err(Error::NotLadder(format!("S^± times {} is not a ladder operator", at.as_char()))),
        };
        let mut rest = p.clone();
        rest.set_letter(q, Pauli::I);
        let tail = self.tail.mul(&rest)?;
        LadderTerm::new(self.coefficient * sgn, q, self.sign, tail)
    }

    /// Left multiplication by a Pauli string that is `I` or `Z` on the projector qubit.
    pub fn mul_left(&self, p: &PauliString) -> Result<LadderTerm> {
        let q = self.projector_qubit;
        let at = p.letter(q);
        let sgn = match (at, self.sign) {
            (Pauli::I, _) => 1.0,
            // ZS⁻ = S⁻, ZS⁺ = -S⁺
            (Pauli::Z, Sign::Minus) => 1.0,
            (Pauli::Z, Sign::Plus) => -1.0,
            _ => return Err(Error::NotLadder(format!("{} times S^± is not a ladder operator", at.as_char()))),
        };
        let mut rest = p.clone();
        rest.set_letter(q, Pauli::I);
        let tail = rest.mul(&self.tail)?;
        LadderTerm::new(self.coefficient * sgn, q, self.sign, tail)
    }
}

impl fmt::Display for LadderTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            Sign::Plus => '+',
            Sign::Minus => '-',
        };
        write!(f, "({}) S{}_{} {}", self.coefficient, s, self.projector_qubit, self.tail)
    }
}

/// Role of a fermionic mode in the register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModeRole {
    Impurity,
    Bath,
    Ancilla,
}

/// Mode roles in Jordan-Wigner order. Mode `m` sits on qubit `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FermionOrdering {
    roles: Vec<ModeRole>,
}

impl FermionOrdering {
    /// Impurity modes must come first.
    pub fn new(roles: Vec<ModeRole>) -> Result<Self> {
        if roles.is_empty() {
            return Err(Error::InvalidArgument(String::from("empty mode list")));
        }
        let n_imp = roles.iter().take_while(|&&r| r == ModeRole::Impurity).count();
        if roles[n_imp..].contains(&ModeRole::Impurity) {
            return Err(Error::InvalidArgument(String::from("impurity modes must occupy the lowest indices")));
        }
        Ok(FermionOrdering { roles })
    }

    /// One impurity followed by `n_bath` bath modes and no ancilla.
    pub fn star(n_bath: usize) -> Self {
        let mut roles = vec![ModeRole::Impurity];
        roles.extend(core::iter::repeat_n(ModeRole::Bath, n_bath));
        FermionOrdering { roles }
    }

    pub fn n_modes(&self) -> usize {
        self.roles.len()
    }

    pub fn role(&self, mode: usize) -> ModeRole {
        self.roles[mode]
    }

    pub fn roles(&self) -> &[ModeRole] {
        &self.roles
    }

    pub fn qubit(&self, mode: usize) -> usize {
        mode
    }

    /// Parity operator `(-1)^N = Z ⊗ … ⊗ Z`.
    pub fn parity(&self) -> PauliString {
        PauliString::new(vec![Pauli::Z; self.n_modes()], 0)
    }
}

fn jw_string(mode: usize, n: usize) -> PauliString {
    let mut tail = PauliString::identity(n);
    for q in mode + 1..n {
        tail.set_letter(q, Pauli::Z);
    }
    tail
}

/// Jordan-Wigner annihilation operator `S⁻_m ⊗ Z_{m+1} ⊗ … ⊗ Z_{n-1}`.
pub fn jw_annihilation(mode: usize, ordering: &FermionOrdering) -> Result<LadderTerm> {
    let n = ordering.n_modes();
    if mode >= n {
        return Err(Error::IndexOutOfRange { index: mode, len: n });
    }
    let q = ordering.qubit(mode);
    LadderTerm::new(c64(1.0, 0.0), q, Sign::Minus, jw_string(q, n))
}

/// Jordan-Wigner creation operator.
pub fn jw_creation(mode: usize, ordering: &FermionOrdering) -> Result<LadderTerm> {
    Ok(jw_annihilation(mode, ordering)?.dagger())
}

/// Majorana operator `γ = c + c† = X_a ⊗ Z_{a+1} ⊗ …` of an ancilla mode.
pub fn jw_majorana(ancilla_mode: usize, ordering: &FermionOrdering) -> Result<PauliString> {
    let n = ordering.n_modes();
    if ancilla_mode >= n {
        return Err(Error::IndexOutOfRange { index: ancilla_mode, len: n });
    }
    if ordering.role(ancilla_mode) != ModeRole::Ancilla {
        return Err(Error::NotAncilla(ancilla_mode));
    }
    let q = ordering.qubit(ancilla_mode);
    let mut s = jw_string(q, n);
    s.set_letter(q, Pauli::X);
    Ok(s)
}

/// `Ā = A·(-1)^N` for an impurity ladder operator.
pub fn bar_operator(impurity_ladder: &LadderTerm, ordering: &FermionOrdering) -> Result<LadderTerm> {
    check_impurity(impurity_ladder, ordering)?;
    impurity_ladder.mul_right(&ordering.parity())
}

/// `B̄ = (-1)^N·B`, the left-sided variant entering the fermionic regression formula.
pub fn bar_operator_left(impurity_ladder: &LadderTerm, ordering: &FermionOrdering) -> Result<LadderTerm> {
    check_impurity(impurity_ladder, ordering)?;
    impurity_ladder.mul_left(&ordering.parity())
}

fn check_impurity(l: &LadderTerm, ordering: &FermionOrdering) -> Result<()> {
    if l.n_qubits() != ordering.n_modes() {
        return Err(Error::Dimension(format!("{} qubits vs {} modes", l.n_qubits(), ordering.n_modes())));
    }
    if ordering.role(0) != ModeRole::Impurity {
        return Err(Error::InvalidArgument(String::from("mode 0 must be the impurity")));
    }
    Ok(())
}

/// Clifford gates used by the encoding and synthesis circuits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Clifford {
    X(usize),
    H(usize),
    S(usize),
    Sdg(usize),
    Cz(usize, usize),
    Cnot { control: usize, target: usize },
}

impl Clifford {
    /// `g · P_q · g†` for a single letter `p` on qubit `q`.
    fn image(self, n: usize, q: usize, p: Pauli) -> PauliString {
        use Pauli::*;
        let one = |l: Pauli, k: u8| PauliString::single(n, q, l).with_phase_power(k);
        let two = |a: usize, la: Pauli, b: usize, lb: Pauli| {
            let mut s = PauliString::identity(n);
            s.set_letter(a, la);
            s.set_letter(b, lb);
            s
        };
        match self {
            Clifford::X(t) if t == q => match p {
                X => one(X, 0),
                Y => one(Y, 2),
                Z => one(Z, 2),
                I => one(I, 0),
            },
            Clifford::H(t) if t == q => match p {
                X => one(Z, 0),
                Z => one(X, 0),
                Y => one(Y, 2),
                I => one(I, 0),
            },
            Clifford::S(t) if t == q => match p {
                X => one(Y, 0),
                Y => one(X, 2),
                _ => one(p, 0),
            },
            Clifford::Sdg(t) if t == q => match p {
                X => one(Y, 2),
                Y => one(X, 0),
                _ => one(p, 0),
            },
            Clifford::Cz(a, b) if a == q || b == q => {
                let other = if a == q { b } else { a };
                match p {
                    X | Y => two(q, p, other, Z),
                    _ => one(p, 0),
                }
            }
            Clifford::Cnot { control, target } if control == q => match p {
                X | Y => two(q, p, target, X),
                _ => one(p, 0),
            },
            Clifford::Cnot { control, target } if target == q => match p {
                Y | Z => two(control, Z, q, p),
                _ => one(p, 0),
            },
            _ => one(p, 0),
        }
    }

    pub fn qubits(self) -> Vec<usize> {
        match self {
            Clifford::X(q) | Clifford::H(q) | Clifford::S(q) | Clifford::Sdg(q) => vec![q],
            Clifford::Cz(a, b) => vec![a, b],
            Clifford::Cnot { control, target } => vec![control, target],
        }
    }

    pub fn inverse(self) -> Clifford {
        match self {
            Clifford::S(q) => Clifford::Sdg(q),
            Clifford::Sdg(q) => Clifford::S(q),
            g => g,
        }
    }
}

/// Conjugates a ladder operator `L → U L U†` where `U` is the circuit `gates`
/// (first gate applied first). Returns the expansion as two Pauli terms.
pub fn conjugate_terms(terms: &[(Complex64, PauliString)], gates: &[Clifford]) -> Vec<(Complex64, PauliString)> {
    terms
        .iter()
        .map(|(c, p)| {
            let mut p = p.clone();
            for &g in gates {
                p = p.conjugate(g);
            }
            (*c, p)
        })
        .collect()
}

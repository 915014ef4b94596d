use super::{gates, AlgebraError, CMatrix, Observable, Result, MAX_QUBITS};
use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use std::fmt;
use std::str::FromStr;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Matrix2<C64> {
        match self {
            Pauli::I => gates::identity(),
            Pauli::X => gates::sigma_x(),
            Pauli::Y => gates::sigma_y(),
            Pauli::Z => gates::sigma_z(),
        }
    }

    pub fn anticommutes_with(self, other: Pauli) -> bool {
        self != Pauli::I && other != Pauli::I && self != other
    }

    /// `self · other = phase · result`, phase in {1, ±i} as a power of `i`.
    fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Signed tensor product of single-qubit Paulis, e.g. `-XZZ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
    negative: bool,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, negative: bool) -> Result<Self> {
        if letters.is_empty() {
            return Err(AlgebraError::EmptyTensor);
        }
        if letters.len() > MAX_QUBITS {
            return Err(AlgebraError::TooManyQubits(letters.len()));
        }
        Ok(Self { letters, negative })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(vec![Pauli::I; n], false)
    }

    /// Single letter `p` on 1-based `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Result<Self> {
        let mut s = Self::identity(n)?;
        if qubit == 0 || qubit > n {
            return Err(AlgebraError::QubitOutOfRange { index: qubit, n });
        }
        s.letters[qubit - 1] = p;
        Ok(s)
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// `+1` or `-1`.
    pub fn sign(&self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn negated(&self) -> Self {
        Self { letters: self.letters.clone(), negative: !self.negative }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| a.anticommutes_with(**b))
            .count();
        anti % 2 == 0
    }

    /// Product of two commuting strings (the result is again a signed
    /// Pauli string). Returns `None` for anticommuting or mismatched inputs.
    pub fn product(&self, other: &PauliString) -> Option<PauliString> {
        if self.len() != other.len() || !self.commutes_with(other) {
            return None;
        }
        let mut phase = 0u8;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(a, b)| {
                let (p, l) = a.mul(*b);
                phase += p;
                l
            })
            .collect();
        // commuting => phase is 0 or 2 (mod 4)
        let negative = self.negative ^ other.negative ^ (phase % 4 == 2);
        Some(PauliString { letters, negative })
    }

    pub fn matrix(&self) -> CMatrix {
        let mut m = CMatrix::from_element(1, 1, C64::from(self.sign()));
        for p in &self.letters {
            m = m.kronecker(&gates::to_dynamic(&p.matrix()));
        }
        m
    }

    pub fn to_observable(&self) -> Observable {
        Observable::new(self.matrix(), self.to_string()).expect("Pauli strings are Hermitian")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            write!(f, "-")?;
        }
        for p in &self.letters {
            write!(f, "{}", p.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self> {
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let letters = body
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(AlgebraError::BadKetLabel(other)),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters, negative)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qalgebra::{min_eigenvalue, EIGEN_TOL, EXACT_TOL};

    #[test]
    fn parse_and_display() {
        let p: PauliString = "-XZI".parse().unwrap();
        assert_eq!(p.to_string(), "-XZI");
        assert_eq!(p.sign(), -1.0);
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn product_matches_dense() {
        let a: PauliString = "XXZ".parse().unwrap();
        let b: PauliString = "YYZ".parse().unwrap();
        assert!(a.commutes_with(&b));
        let ab = a.product(&b).unwrap();
        assert_eq!(ab.to_string(), "-ZZI");
        let dense = a.matrix() * b.matrix();
        assert!((dense - ab.matrix()).camax() < EXACT_TOL);
        let c: PauliString = "XII".parse().unwrap();
        let d: PauliString = "ZII".parse().unwrap();
        assert!(c.product(&d).is_none());
    }

    #[test]
    fn non_identity_strings_have_min_eigenvalue_minus_one() {
        for s in ["Z", "XY", "-ZZ", "IYI", "XZZZZZ"] {
            let p: PauliString = s.parse().unwrap();
            let e = min_eigenvalue(&p.to_observable()).unwrap();
            assert!((e + 1.0).abs() < EIGEN_TOL, "{s}: {e}");
        }
    }
}

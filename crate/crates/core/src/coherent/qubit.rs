use super::{CoherentSuperposition, CODE_LABEL_TOLERANCE};
use crate::fock::Parity;
use crate::{Error, Result, C64};

/// `μ|−α⟩ + ν|α⟩`, normalised with the physical Gram matrix:
/// `|μ|² + |ν|² + 2 Re(μ*ν) e^{−2α²} = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    mu: C64,
    nu: C64,
    alpha: f64,
}

impl QubitState {
    pub fn new(mu: C64, nu: C64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::invalid("qubit amplitude must be positive"));
        }
        let norm = Self::gram_norm_sqr(mu, nu, alpha);
        if !(norm > 0.0) {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / norm.sqrt();
        Ok(Self { mu: mu * s, nu: nu * s, alpha })
    }

    /// Normalised so that `|μ|² + |ν|² = 1` before the Gram correction: the
    /// same logical vector, re-weighted for the physical norm.
    pub fn from_logical(logical: [C64; 2], alpha: f64) -> Result<Self> {
        Self::new(logical[0], logical[1], alpha)
    }

    fn gram_norm_sqr(mu: C64, nu: C64, alpha: f64) -> f64 {
        mu.norm_sqr() + nu.norm_sqr() + 2.0 * (mu.conj() * nu).re * (-2.0 * alpha * alpha).exp()
    }

    /// The plus cat, `μ = ν`: the input that maximises gate error.
    pub fn worst_case(alpha: f64) -> Result<Self> {
        Self::new(C64::new(1.0, 0.0), C64::new(1.0, 0.0), alpha)
    }

    pub fn zero(alpha: f64) -> Result<Self> {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), alpha)
    }

    pub fn one(alpha: f64) -> Result<Self> {
        Self::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), alpha)
    }

    pub fn cat(alpha: f64, parity: Parity) -> Result<Self> {
        Self::new(C64::new(1.0, 0.0), C64::new(parity.sign(), 0.0), alpha)
    }

    /// The six eigenstates of X, Y and Z on the logical space.
    pub fn cardinal_states(alpha: f64) -> Result<Vec<Self>> {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let i = C64::new(0.0, 1.0);
        [(one, zero), (zero, one), (one, one), (one, -one), (one, i), (one, -i)].into_iter().map(|(m, n)| Self::new(m, n, alpha)).collect()
    }

    pub fn mu(&self) -> C64 {
        self.mu
    }

    pub fn nu(&self) -> C64 {
        self.nu
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `(μ, ν)` rescaled to unit Euclidean norm: the state in the picture
    /// where `|±α⟩` are treated as orthonormal.
    pub fn logical_vector(&self) -> [C64; 2] {
        let n = (self.mu.norm_sqr() + self.nu.norm_sqr()).sqrt();
        [self.mu / n, self.nu / n]
    }

    pub fn superposition(&self) -> CoherentSuperposition {
        let a = C64::new(self.alpha, 0.0);
        CoherentSuperposition::new(1, [(self.mu, vec![-a]), (self.nu, vec![a])]).expect("single-mode labels")
    }

    /// Reads back `μ, ν` from a single-mode superposition on `|±α⟩`.
    pub fn from_superposition(state: &CoherentSuperposition, alpha: f64) -> Result<Self> {
        if state.modes() != 1 {
            return Err(Error::DimensionMismatch(format!("expected one mode, found {}", state.modes())));
        }
        let (mut mu, mut nu) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for t in state.terms() {
            let l = t.labels[0];
            if (l - alpha).norm() <= CODE_LABEL_TOLERANCE {
                nu += t.coeff;
            } else if (l + alpha).norm() <= CODE_LABEL_TOLERANCE {
                mu += t.coeff;
            } else {
                return Err(Error::invalid(format!("label {l} is not a code word ±{alpha}")));
            }
        }
        Self::new(mu, nu, alpha)
    }

    /// Logical X: swaps the code words.
    pub fn bit_flip(&self) -> Self {
        Self { mu: self.nu, nu: self.mu, alpha: self.alpha }
    }

    /// Logical Z: `μ|−α⟩ − ν|α⟩`.
    pub fn phase_flip(&self) -> Self {
        Self { mu: self.mu, nu: -self.nu, alpha: self.alpha }
    }

    /// Applies a 2×2 matrix to the logical amplitudes and renormalises.
    pub fn apply_logical(&self, m: [[C64; 2]; 2]) -> Result<Self> {
        let mu = m[0][0] * self.mu + m[0][1] * self.nu;
        let nu = m[1][0] * self.mu + m[1][1] * self.nu;
        Self::new(mu, nu, self.alpha)
    }
}

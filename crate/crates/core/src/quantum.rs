//! Unitary evolution between measurements and single-interval survival
//! probabilities.
//!
//! The Hamiltonian during an interval is `H(Ω) = H₀ + Ω·H_noise`. A
//! measurement projects onto the initial pure state `|ψ₀⟩`, and the survival
//! branch restarts from `|ψ₀⟩`, so one interval contributes the factor
//! `q = |⟨ψ₀|U|ψ₀⟩|²`.

use nalgebra::{Complex, DMatrix, DVector};

use crate::noise::{FieldDistribution, Segment};
use crate::{Error, Result};

pub type C64 = Complex<f64>;

const HERMITIAN_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-12;
const SCHEDULE_TOL: f64 = 1e-9;

/// `a·I + x·σx + y·σy + z·σz` with real coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Pauli {
    id: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Pauli {
    fn from_hermitian(h: &DMatrix<C64>) -> Self {
        Pauli {
            id: 0.5 * (h[(0, 0)].re + h[(1, 1)].re),
            z: 0.5 * (h[(0, 0)].re - h[(1, 1)].re),
            x: h[(0, 1)].re,
            y: -h[(0, 1)].im,
        }
    }

    fn combine(self, other: Pauli, scale: f64) -> Pauli {
        Pauli {
            id: self.id + scale * other.id,
            x: self.x + scale * other.x,
            y: self.y + scale * other.y,
            z: self.z + scale * other.z,
        }
    }

    /// `exp(−i t H)` as row-major `[[u00, u01], [u10, u11]]`.
    fn exp_i(self, t: f64) -> [[C64; 2]; 2] {
        let k = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        let (c, s_over_k) = if k * t.abs() < 1e-300 {
            (1.0, t)
        } else {
            ((k * t).cos(), (k * t).sin() / k)
        };
        let phase = C64::from_polar(1.0, -self.id * t);
        let i = C64::i();
        // c·I − i·sin(kt)/k·(x σx + y σy + z σz)
        let u00 = C64::new(c, 0.0) - i * (s_over_k * self.z);
        let u11 = C64::new(c, 0.0) + i * (s_over_k * self.z);
        let u01 = C64::new(-s_over_k * self.y, -s_over_k * self.x);
        let u10 = C64::new(s_over_k * self.y, -s_over_k * self.x);
        [[phase * u00, phase * u01], [phase * u10, phase * u11]]
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    Qubit { h0: Pauli, noise: Pauli },
    General,
}

/// Static description of the probed system.
///
/// `h0` is in rad/s and already contains any static mean field `Ω̄·H_noise`;
/// `h_noise` is a dimensionless coupling multiplied by the instantaneous
/// field. `mu` is the interval between measurements in seconds.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    h0: DMatrix<C64>,
    h_noise: DMatrix<C64>,
    psi0: DVector<C64>,
    mu: f64,
    kernel: Kernel,
}

impl SystemSpec {
    pub fn new(
        h0: DMatrix<C64>,
        h_noise: DMatrix<C64>,
        psi0: DVector<C64>,
        mu: f64,
    ) -> Result<Self> {
        let d = psi0.len();
        if d < 2 {
            return Err(Error::InvalidSystem(format!("dimension {d} < 2")));
        }
        for (name, h) in [("h0", &h0), ("h_noise", &h_noise)] {
            if h.shape() != (d, d) {
                return Err(Error::InvalidSystem(format!(
                    "{name} is {}x{}, state has dimension {d}",
                    h.nrows(),
                    h.ncols()
                )));
            }
            let dev = max_abs(&(h - h.adjoint()));
            if !(dev <= HERMITIAN_TOL * max_abs(h).max(1.0)) {
                return Err(Error::InvalidSystem(format!(
                    "{name} is not Hermitian (max deviation {dev:e})"
                )));
            }
        }
        let norm = psi0.norm();
        if !((norm - 1.0).abs() <= NORM_TOL) {
            return Err(Error::InvalidSystem(format!("initial state norm {norm}")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidSystem(format!("interval length {mu}")));
        }
        let kernel = if d == 2 {
            Kernel::Qubit {
                h0: Pauli::from_hermitian(&h0),
                noise: Pauli::from_hermitian(&h_noise),
            }
        } else {
            Kernel::General
        };
        Ok(Self {
            h0,
            h_noise,
            psi0,
            mu,
            kernel,
        })
    }

    /// `H = Δ·σz + Ω·σx`, prepared and measured in `|0⟩`.
    pub fn qubit_rabi(detuning: f64, mu: f64) -> Result<Self> {
        Self::new(
            pauli_z() * C64::from(detuning),
            pauli_x(),
            DVector::from_vec(vec![C64::from(1.0), C64::from(0.0)]),
            mu,
        )
    }

    /// Folds a static mean field `Ω̄` into `h0`, so that trajectories carry
    /// only the fluctuating part.
    pub fn with_static_field(self, mean_field: f64) -> Result<Self> {
        let h0 = &self.h0 + &self.h_noise * C64::from(mean_field);
        Self::new(h0, self.h_noise, self.psi0, self.mu)
    }

    /// Same system with a different measurement interval.
    pub fn with_interval(&self, mu: f64) -> Result<Self> {
        Self::new(self.h0.clone(), self.h_noise.clone(), self.psi0.clone(), mu)
    }

    pub fn dim(&self) -> usize {
        self.psi0.len()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn h0(&self) -> &DMatrix<C64> {
        &self.h0
    }

    pub fn h_noise(&self) -> &DMatrix<C64> {
        &self.h_noise
    }

    pub fn psi0(&self) -> &DVector<C64> {
        &self.psi0
    }

    pub fn hamiltonian(&self, omega: f64) -> DMatrix<C64> {
        &self.h0 + &self.h_noise * C64::from(omega)
    }

    /// `Δ²H_noise = ⟨ψ₀|H²_noise|ψ₀⟩ − ⟨ψ₀|H_noise|ψ₀⟩²`.
    pub fn noise_variance(&self) -> f64 {
        let h_psi = &self.h_noise * &self.psi0;
        let mean = self.psi0.dotc(&h_psi).re;
        let second = h_psi.norm_squared();
        (second - mean * mean).max(0.0)
    }

    /// `q` for the field held at `omega` over one full interval.
    pub fn survival_prob(&self, omega: f64) -> f64 {
        self.survival_prob_segments(std::iter::once((self.mu, omega)))
    }

    /// `q = |⟨ψ₀|U_k⋯U₁|ψ₀⟩|²` for piecewise-constant `(duration, Ω)` segments
    /// in time order. Durations must sum to the interval length.
    pub fn survival_prob_interval(&self, segments: &[(f64, f64)]) -> Result<f64> {
        if segments.is_empty() {
            return Err(Error::Schedule {
                expected: self.mu,
                got: 0.0,
            });
        }
        if let Some(&(t, _)) = segments.iter().find(|(t, _)| !(*t > 0.0)) {
            return Err(Error::Domain(format!(
                "segment duration {t} is not positive"
            )));
        }
        let total: f64 = segments.iter().map(|(t, _)| t).sum();
        if (total - self.mu).abs() > SCHEDULE_TOL * self.mu {
            return Err(Error::Schedule {
                expected: self.mu,
                got: total,
            });
        }
        Ok(self.survival_prob_segments(segments.iter().copied()))
    }

    /// Survival probability for level-indexed segments of a sampled
    /// trajectory.
    pub(crate) fn survival_prob_levels(&self, segs: &[Segment], dist: &FieldDistribution) -> f64 {
        self.survival_prob_segments(segs.iter().map(|s| (s.duration, dist.value(s.level))))
    }

    fn survival_prob_segments(&self, segments: impl IntoIterator<Item = (f64, f64)>) -> f64 {
        let amp = match &self.kernel {
            Kernel::Qubit { h0, noise } => {
                let mut psi = [self.psi0[0], self.psi0[1]];
                for (t, omega) in segments {
                    let u = h0.combine(*noise, omega).exp_i(t);
                    psi = [
                        u[0][0] * psi[0] + u[0][1] * psi[1],
                        u[1][0] * psi[0] + u[1][1] * psi[1],
                    ];
                }
                self.psi0[0].conj() * psi[0] + self.psi0[1].conj() * psi[1]
            }
            Kernel::General => {
                let mut psi = self.psi0.clone();
                for (t, omega) in segments {
                    psi = eigen_propagator(&self.hamiltonian(omega), t) * psi;
                }
                self.psi0.dotc(&psi)
            }
        };
        amp.norm_sqr().clamp(0.0, 1.0)
    }
}

/// Unitary `U = exp(−i H t)` of one constant-field stretch.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub u: DMatrix<C64>,
}

impl Propagator {
    /// Largest element of `|U†U − I|`.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.u.nrows();
        max_abs(&(self.u.adjoint() * &self.u - DMatrix::<C64>::identity(d, d)))
    }

    /// `|⟨ψ|U|ψ⟩|²`.
    pub fn return_probability(&self, psi: &DVector<C64>) -> f64 {
        psi.dotc(&(&self.u * psi)).norm_sqr()
    }
}

/// `exp(−i (H₀ + Ω·H_noise)·duration)`: closed form for qubits,
/// Hermitian eigendecomposition otherwise.
pub fn propagator(spec: &SystemSpec, omega: f64, duration: f64) -> Result<Propagator> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::Domain(format!(
            "duration {duration} is not positive"
        )));
    }
    let u = match &spec.kernel {
        Kernel::Qubit { h0, noise } => {
            let m = h0.combine(*noise, omega).exp_i(duration);
            DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]])
        }
        Kernel::General => eigen_propagator(&spec.hamiltonian(omega), duration),
    };
    Ok(Propagator { u })
}

/// `V·diag(e^(−iλt))·V†` from the eigendecomposition `H = V·diag(λ)·V†`.
fn eigen_propagator(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let eig = h.clone().symmetric_eigen();
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|&l| C64::from_polar(1.0, -l * t)),
    );
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (mut col, ph) in scaled.column_iter_mut().zip(phases.iter()) {
        col *= *ph;
    }
    scaled * v.adjoint()
}

/// Survival probability `q_i` for each field value held over one interval.
pub fn q_table(spec: &SystemSpec, dist: &FieldDistribution) -> Vec<(f64, f64)> {
    dist.values()
        .iter()
        .map(|&omega| (omega, spec.survival_prob(omega)))
        .collect()
}

pub fn pauli_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0].map(C64::from))
}

pub fn pauli_y() -> DMatrix<C64> {
    let i = C64::i();
    DMatrix::from_row_slice(2, 2, &[C64::from(0.0), -i, i, C64::from(0.0)])
}

pub fn pauli_z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0].map(C64::from))
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

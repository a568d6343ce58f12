//! 1→2 cloning machines acting on equatorial qudits.
//!
//! The full machines act on original ⊗ copy ⊗ ancilla, each of dimension d,
//! with the ancilla basis taken as the computational basis. A tripartite
//! amplitude vector is indexed as `a·d² + b·d + k`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermiticity_error, inner, trace, CMatrix, CVector, C64};
use crate::states::{equatorial_state, PhaseVector, PureState};

/// Largest d accepted by the full-unitary simulations (state length d³).
pub const MAX_FULL_DIM: usize = 32;
/// Hermiticity, trace and positivity tolerance for [`DensityMatrix`].
pub const DENSITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let herm = hermiticity_error(&entries);
        if herm > DENSITY_TOL {
            return Err(Error::InvalidState(format!("not Hermitian ({herm:e})")));
        }
        let tr = trace(&entries);
        if (tr - C64::from(1.0)).norm() > DENSITY_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let (vals, _) = hermitian_eigen(&entries);
        if vals[0] < -DENSITY_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {}",
                vals[0]
            )));
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_valid(entries: CMatrix) -> Self {
        Self { entries }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            entries: psi.projector(),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    /// ⟨ψ|ρ|ψ⟩
    pub fn fidelity_with(&self, psi: &PureState) -> f64 {
        inner(psi.amplitudes(), &(&self.entries * psi.amplitudes())).re
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CloningModel {
    Uqcm,
    Pqcm,
    GenericShrink { eta: f64 },
}

impl CloningModel {
    pub fn generic(eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self::GenericShrink { eta })
    }

    /// Shrinking factor of the single-copy output in dimension `d`.
    pub fn eta(&self, d: usize) -> f64 {
        match *self {
            Self::Uqcm => eta_uqcm(d),
            Self::Pqcm => eta_pqcm(d),
            Self::GenericShrink { eta } => eta,
        }
    }
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if eta.is_finite() && eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::EtaOutOfRange(eta))
    }
}

/// η|ψ(φ)⟩⟨ψ(φ)| + ((1−η)/d)·I
pub fn shrink_output(p: &PhaseVector, eta: f64) -> Result<DensityMatrix> {
    check_eta(eta)?;
    let d = p.dim();
    let psi = equatorial_state(p);
    let mut rho = psi.projector() * C64::from(eta);
    let noise = (1.0 - eta) / d as f64;
    for j in 0..d {
        rho[(j, j)] += noise;
    }
    Ok(DensityMatrix::from_valid(rho))
}

/// (d+2)/(2(d+1))
///
/// Panics if `d < 2`.
pub fn eta_uqcm(d: usize) -> f64 {
    assert!(d >= 2, "dimension must be at least 2");
    let d = d as f64;
    (d + 2.0) / (2.0 * (d + 1.0))
}

/// (d−2+√(d²+4d−4))/(4(d−1))
///
/// Panics if `d < 2`.
pub fn eta_pqcm(d: usize) -> f64 {
    assert!(d >= 2, "dimension must be at least 2");
    let d = d as f64;
    (d - 2.0 + (d * d + 4.0 * d - 4.0).sqrt()) / (4.0 * (d - 1.0))
}

/// (α, β) of the phase-covariant machine; α² + β² = 1.
pub fn pqcm_amplitudes(d: usize) -> (f64, f64) {
    let df = d as f64;
    let r = (df - 2.0) / (2.0 * (df * df + 4.0 * df - 4.0).sqrt());
    ((0.5 - r).sqrt(), (0.5 + r).sqrt())
}

/// (α, β) of the universal machine.
pub fn uqcm_amplitudes(d: usize) -> (f64, f64) {
    let s = (2.0 * (d as f64 + 1.0)).sqrt();
    (2.0 / s, 1.0 / s)
}

fn check_full_dim(d: usize) -> Result<()> {
    if d > MAX_FULL_DIM {
        return Err(Error::DimensionTooLarge {
            dim: d,
            max: MAX_FULL_DIM,
        });
    }
    Ok(())
}

/// Linear extension of |i⟩ ↦ a|ii⟩|i⟩ + b Σ_{j≠i}(|ij⟩+|ji⟩)|j⟩ applied to
/// the equatorial input.
fn symmetric_cloner(p: &PhaseVector, same: f64, pair: f64) -> Result<PureState> {
    let d = p.dim();
    check_full_dim(d)?;
    let input = equatorial_state(p);
    let c = input.amplitudes();
    let idx = |a: usize, b: usize, k: usize| (a * d + b) * d + k;
    let mut out = CVector::zeros(d * d * d);
    for i in 0..d {
        out[idx(i, i, i)] += c[i] * same;
        for j in (0..d).filter(|&j| j != i) {
            out[idx(i, j, j)] += c[i] * pair;
            out[idx(j, i, j)] += c[i] * pair;
        }
    }
    PureState::new(out)
}

/// Tripartite output of the universal cloner with α = 2/√(2(d+1)),
/// β = 1/√(2(d+1)).
pub fn uqcm_full_output(p: &PhaseVector) -> Result<PureState> {
    let (alpha, beta) = uqcm_amplitudes(p.dim());
    symmetric_cloner(p, alpha, beta)
}

/// Tripartite output of the phase-covariant cloner; the pair amplitude is
/// β/√(2(d−1)).
pub fn pqcm_full_output(p: &PhaseVector) -> Result<PureState> {
    let d = p.dim();
    let (alpha, beta) = pqcm_amplitudes(d);
    symmetric_cloner(p, alpha, beta / (2.0 * (d as f64 - 1.0)).sqrt())
}

fn cube_side(len: usize) -> Result<usize> {
    let guess = (len as f64).cbrt().round() as usize;
    (guess.saturating_sub(1)..=guess + 1)
        .find(|&d| d > 0 && d * d * d == len)
        .ok_or(Error::NotPerfectCube(len))
}

/// Partial trace over the copy and the ancilla.
pub fn reduce_first_qudit(psi: &PureState) -> Result<DensityMatrix> {
    let d = cube_side(psi.dim())?;
    let m = DMatrix::from_row_slice(d, d * d, psi.amplitudes().as_slice());
    Ok(DensityMatrix::from_valid(&m * m.adjoint()))
}

/// Partial trace over the original and the ancilla.
pub fn reduce_second_qudit(psi: &PureState) -> Result<DensityMatrix> {
    let d = cube_side(psi.dim())?;
    let amp = psi.amplitudes();
    let mut rho = CMatrix::zeros(d, d);
    for b in 0..d {
        for bp in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..d {
                for k in 0..d {
                    acc += amp[(a * d + b) * d + k] * amp[(a * d + bp) * d + k].conj();
                }
            }
            rho[(b, bp)] = acc;
        }
    }
    Ok(DensityMatrix::from_valid(rho))
}

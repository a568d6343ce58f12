//! Independent numeric route to the QFIM and the attainability matrix:
//! central finite differences of ρ(φ), the SLD solved in the eigenbasis of
//! ρ, and the defining traces
//!
//! F_μν = Re Tr(ρ L_μ L_ν),  L_μν = Im Tr(ρ L_μ L_ν).
//!
//! Nothing here touches the spectral closed forms in [`crate::qfim`]; only
//! the shared linear algebra and the channel definitions are used.

use nalgebra::DMatrix;

use crate::channels::{
    pqcm_full_output, reduce_first_qudit, shrink_output, uqcm_full_output, DensityMatrix,
};
use crate::crb::AttainabilityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{frobenius, hermitian_eigen, CMatrix, C64};
use crate::qfim::QFIMatrix;
use crate::states::{equatorial_state, PhaseVector};

pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Pairs with λᵢ + λⱼ at or below this are outside the support.
pub const SLD_SUPPORT_TOL: f64 = 1e-12;

/// A smooth map from real parameters to density matrices.
pub trait DensityFamily {
    fn num_params(&self) -> usize;
    fn density(&self, theta: &[f64]) -> Result<DensityMatrix>;
}

/// The equatorial-family channels the oracle knows how to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamChannel {
    /// |ψ(φ)⟩⟨ψ(φ)|
    Pure,
    /// η|ψ(φ)⟩⟨ψ(φ)| + ((1−η)/d)·I
    Shrink { eta: f64 },
    /// Single-copy output of the full universal cloner.
    UqcmFull,
    /// Single-copy output of the full phase-covariant cloner.
    PqcmFull,
}

impl ParamChannel {
    pub fn rho(&self, p: &PhaseVector) -> Result<DensityMatrix> {
        match *self {
            Self::Pure => Ok(DensityMatrix::from_pure(&equatorial_state(p))),
            Self::Shrink { eta } => shrink_output(p, eta),
            Self::UqcmFull => reduce_first_qudit(&uqcm_full_output(p)?),
            Self::PqcmFull => reduce_first_qudit(&pqcm_full_output(p)?),
        }
    }

    /// The channel viewed as a family over the d−1 phases.
    pub fn family(self, dim: usize) -> ChannelFamily {
        ChannelFamily { channel: self, dim }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ChannelFamily {
    channel: ParamChannel,
    dim: usize,
}

impl DensityFamily for ChannelFamily {
    fn num_params(&self) -> usize {
        self.dim - 1
    }

    fn density(&self, theta: &[f64]) -> Result<DensityMatrix> {
        self.channel.rho(&PhaseVector::new(theta.to_vec())?)
    }
}

/// (ρ(θ + h e_k) − ρ(θ − h e_k)) / 2h with k counted from 0.
pub fn central_difference<F: DensityFamily + ?Sized>(
    family: &F,
    theta: &[f64],
    k: usize,
    h: f64,
) -> Result<CMatrix> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidState(format!(
            "finite-difference step {h} must be positive"
        )));
    }
    if k >= family.num_params() {
        return Err(Error::IndexOutOfRange {
            what: "parameter",
            index: k,
            lo: 0,
            hi: family.num_params().saturating_sub(1),
        });
    }
    let mut plus = theta.to_vec();
    let mut minus = theta.to_vec();
    plus[k] += h;
    minus[k] -= h;
    let diff = family.density(&plus)?.into_entries() - family.density(&minus)?.into_entries();
    Ok(diff / C64::from(2.0 * h))
}

/// ∂ρ/∂φ_μ by central differences (μ in 1..d).
pub fn rho_derivative(ch: ParamChannel, p: &PhaseVector, mu: usize, h: f64) -> Result<CMatrix> {
    if mu == 0 {
        return Err(Error::IndexOutOfRange {
            what: "parameter",
            index: mu,
            lo: 1,
            hi: p.dim() - 1,
        });
    }
    central_difference(&ch.family(p.dim()), p.phases(), mu - 1, h)
}

/// Symmetric logarithmic derivative together with its defining-equation
/// residual on the support.
#[derive(Debug, Clone, PartialEq)]
pub struct Sld {
    pub matrix: CMatrix,
    pub residual: f64,
}

/// Solves ∂ρ = (ρL + Lρ)/2 in the eigenbasis of ρ:
/// [L]ᵢⱼ = 2[∂ρ]ᵢⱼ/(λᵢ+λⱼ) where λᵢ+λⱼ exceeds [`SLD_SUPPORT_TOL`], zero on
/// the kernel-kernel block.
pub fn sld_solve(rho: &DensityMatrix, drho: &CMatrix) -> Result<Sld> {
    let rho = rho.entries();
    let d = rho.nrows();
    if drho.nrows() != d || drho.ncols() != d {
        return Err(Error::LengthMismatch {
            expected: d,
            got: drho.nrows(),
        });
    }
    let (vals, vecs) = hermitian_eigen(rho);
    let in_support = |i: usize, j: usize| vals[i] + vals[j] > SLD_SUPPORT_TOL;
    let d_eig = vecs.adjoint() * drho * &vecs;

    let mut support_weight = 0.0;
    let mut kernel_weight = 0.0;
    let mut l_eig = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            if in_support(i, j) {
                support_weight += d_eig[(i, j)].norm_sqr();
                l_eig[(i, j)] = d_eig[(i, j)] * (2.0 / (vals[i] + vals[j]));
            } else {
                kernel_weight += d_eig[(i, j)].norm_sqr();
            }
        }
    }
    if support_weight.sqrt() <= 1e-14 && kernel_weight.sqrt() > 1e-10 {
        return Err(Error::SupportMismatch);
    }

    let l = &vecs * l_eig * vecs.adjoint();
    let r = drho - (rho * &l + &l * rho) * C64::from(0.5);
    let mut r_eig = vecs.adjoint() * r * &vecs;
    for i in 0..d {
        for j in 0..d {
            if !in_support(i, j) {
                r_eig[(i, j)] = C64::from(0.0);
            }
        }
    }
    Ok(Sld {
        matrix: l,
        residual: frobenius(&r_eig),
    })
}

/// Everything the oracle extracts at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericInformation {
    pub qfim: QFIMatrix,
    pub attainability: AttainabilityMatrix,
    /// Largest SLD defining-equation residual over all parameters.
    pub max_sld_residual: f64,
    /// max |Im Tr(ρL_μL_ν) + Im Tr(ρL_νL_μ)|
    pub antisymmetry_error: f64,
}

pub fn information_numeric<F: DensityFamily + ?Sized>(
    family: &F,
    theta: &[f64],
    h: f64,
) -> Result<NumericInformation> {
    let n = family.num_params();
    let rho = family.density(theta)?;
    let mut slds = Vec::with_capacity(n);
    let mut max_sld_residual = 0.0_f64;
    for k in 0..n {
        let sld = sld_solve(&rho, &central_difference(family, theta, k, h)?)?;
        max_sld_residual = max_sld_residual.max(sld.residual);
        slds.push(sld.matrix);
    }
    let rho_l: Vec<CMatrix> = slds.iter().map(|l| rho.entries() * l).collect();
    // Tr(AB) = Σᵢⱼ Aᵢⱼ Bⱼᵢ
    let trace_product = |a: &CMatrix, b: &CMatrix| -> C64 { a.component_mul(&b.transpose()).sum() };
    let t = DMatrix::from_fn(n, n, |mu, nu| trace_product(&rho_l[mu], &slds[nu]));

    let qfim = DMatrix::from_fn(n, n, |mu, nu| 0.5 * (t[(mu, nu)].re + t[(nu, mu)].re));
    let attain = DMatrix::from_fn(n, n, |mu, nu| 0.5 * (t[(mu, nu)].im - t[(nu, mu)].im));
    let antisymmetry_error = (0..n)
        .flat_map(|mu| (0..n).map(move |nu| (mu, nu)))
        .map(|(mu, nu)| (t[(mu, nu)].im + t[(nu, mu)].im).abs())
        .fold(0.0, f64::max);
    Ok(NumericInformation {
        qfim: QFIMatrix::new(qfim)?,
        attainability: AttainabilityMatrix::new(attain)?,
        max_sld_residual,
        antisymmetry_error,
    })
}

/// F_μν = Tr[ρ(L_μL_ν + L_νL_μ)/2] from finite-difference SLDs.
pub fn qfim_numeric(ch: ParamChannel, p: &PhaseVector, h: f64) -> Result<QFIMatrix> {
    Ok(information_numeric(&ch.family(p.dim()), p.phases(), h)?.qfim)
}

/// Im Tr(ρL_μL_ν) from finite-difference SLDs.
pub fn attainability_numeric(
    ch: ParamChannel,
    p: &PhaseVector,
    h: f64,
) -> Result<AttainabilityMatrix> {
    Ok(information_numeric(&ch.family(p.dim()), p.phases(), h)?.attainability)
}

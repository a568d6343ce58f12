//! Cramér–Rao machinery: the attainability matrix, the spectrum of the
//! structured QFIM and total-variance lower bounds (one measurement round).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qfim::{
    qfim_shrink_closed, EquatorialQfim, QFIMatrix, SpectralDecomposition, SpectralDerivatives,
    SupportGeometry,
};

/// Structure tolerance used by [`qfim_eigenvalues`].
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Relative agreement required between the routes of [`total_variance_bound`].
pub const BOUND_REL_TOL: f64 = 1e-8;
/// Up to this many parameters the bound is also checked by a dense inverse.
pub const DENSE_CHECK_MAX_PARAMS: usize = 128;
const ANTISYMMETRY_TOL: f64 = 1e-12;

/// L_μν = ½Tr(ρ[L_μ, L_ν]), stored as the real matrix of imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct AttainabilityMatrix {
    entries: DMatrix<f64>,
}

impl AttainabilityMatrix {
    /// Checks antisymmetry and pins the diagonal to exactly zero.
    pub fn new(mut entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidState(
                "attainability matrix must be square".into(),
            ));
        }
        let scale = entries.amax().max(1.0);
        let asym = (&entries + entries.transpose()).amax() / 2.0;
        if asym > ANTISYMMETRY_TOL * scale {
            return Err(Error::InvalidState(format!("not antisymmetric ({asym:e})")));
        }
        entries.fill_diagonal(0.0);
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.amax()
    }

    /// The bound is (asymptotically) attainable iff every entry vanishes.
    pub fn is_attainable(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }
}

fn attainability_with<W>(
    sd: &SpectralDecomposition,
    derivs: &SpectralDerivatives,
    weight: W,
) -> Result<AttainabilityMatrix>
where
    W: Fn(f64, f64) -> f64,
{
    let geo = SupportGeometry::new(sd, derivs)?;
    let n = geo.num_params();
    let s = geo.support_len();
    let mut m = DMatrix::zeros(n, n);
    for mu in 0..n {
        for nu in 0..n {
            if mu == nu {
                continue;
            }
            let mut acc = 0.0;
            for a in 0..s {
                let la = geo.lambda(a);
                acc += 4.0 * la * geo.delta(a, mu, nu).im;
                for b in 0..s {
                    acc -= weight(la, geo.lambda(b)) * geo.theta(a, b, mu, nu).im;
                }
            }
            m[(mu, nu)] = acc;
        }
    }
    AttainabilityMatrix::new(m)
}

/// Attainability matrix in the antisymmetrized weight
/// 8λₖλₗ(λₖ−λₗ)/(λₖ+λₗ)².
pub fn attainability_closed(
    sd: &SpectralDecomposition,
    derivs: &SpectralDerivatives,
) -> Result<AttainabilityMatrix> {
    attainability_with(sd, derivs, |k, l| {
        8.0 * k * l * (k - l) / ((k + l) * (k + l))
    })
}

/// Same matrix with the weight 16λₖ²λₗ/(λₖ+λₗ)² before antisymmetrization;
/// agrees with [`attainability_closed`] because Im Θ is antisymmetric in (k, l).
pub fn attainability_unsymmetrized(
    sd: &SpectralDecomposition,
    derivs: &SpectralDerivatives,
) -> Result<AttainabilityMatrix> {
    attainability_with(sd, derivs, |k, l| 16.0 * k * k * l / ((k + l) * (k + l)))
}

/// Eigenvalues of a QFIM with equal diagonal and equal off-diagonal entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfimSpectrum {
    /// F_μμ + (d−2)F_μν, multiplicity 1.
    pub lambda1: f64,
    /// F_μμ − F_μν.
    pub lambda2: f64,
    /// Multiplicity of `lambda2`, d − 2.
    pub mult2: usize,
}

impl QfimSpectrum {
    pub fn of(f: &EquatorialQfim) -> Self {
        let d = f.dim as f64;
        Self {
            lambda1: f.diagonal + (d - 2.0) * f.off_diagonal,
            lambda2: f.diagonal - f.off_diagonal,
            mult2: f.dim - 2,
        }
    }

    /// Tr F⁻¹ = 1/λ₁ + (d−2)/λ₂.
    pub fn trace_of_inverse(&self) -> f64 {
        let rest = if self.mult2 == 0 {
            0.0
        } else {
            self.mult2 as f64 / self.lambda2
        };
        1.0 / self.lambda1 + rest
    }
}

/// Spectrum of `f`, after checking its equal-entry structure.
pub fn qfim_eigenvalues(f: &QFIMatrix) -> Result<QfimSpectrum> {
    Ok(QfimSpectrum::of(&f.to_equatorial(STRUCTURE_TOL)?))
}

/// Tr F⁻¹ through a dense Cholesky inverse.
pub fn dense_trace_of_inverse(f: &QFIMatrix) -> Result<f64> {
    let chol = f.entries().clone().cholesky().ok_or(Error::Singular)?;
    Ok(chol.inverse().trace())
}

/// Lower bound on Σ_μ Var(φ_μ) for the shrinking-channel output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceBound {
    pub dim: usize,
    /// Tr F⁻¹ = (d−1)[2+(d−2)η]/(2η²)
    pub total_variance_min: f64,
    /// (F⁻¹)_μμ, identical for every μ.
    pub per_parameter_bound: f64,
    /// Tr F⁻¹ from a dense inverse, when d−1 ≤ [`DENSE_CHECK_MAX_PARAMS`].
    pub dense_trace: Option<f64>,
}

impl VarianceBound {
    pub fn per_parameter_bounds(&self) -> Vec<f64> {
        vec![self.per_parameter_bound; self.dim - 1]
    }
}

fn agree(closed: f64, other: f64) -> Result<()> {
    if (closed - other).abs() > BOUND_REL_TOL * closed.abs().max(1.0) || !other.is_finite() {
        return Err(Error::BoundMismatch { closed, other });
    }
    Ok(())
}

/// Total-variance bound for η|ψ⟩⟨ψ| + ((1−η)/d)·I, cross-checked against
/// −2(d−1)/(dF_μν), the eigenvalue reciprocals and (for small d) a dense
/// inverse. Any disagreement beyond [`BOUND_REL_TOL`] is an error.
pub fn total_variance_bound(d: usize, eta: f64) -> Result<VarianceBound> {
    let f = qfim_shrink_closed(d, eta)?;
    let df = d as f64;
    let closed = (df - 1.0) * (2.0 + (df - 2.0) * eta) / (2.0 * eta * eta);

    agree(closed, -2.0 * (df - 1.0) / (df * f.off_diagonal))?;
    agree(closed, QfimSpectrum::of(&f).trace_of_inverse())?;

    // F = aI + bJ  ⇒  (F⁻¹)_μμ = 1/a − b/(a(a + (d−1)b))
    let a = f.diagonal - f.off_diagonal;
    let b = f.off_diagonal;
    let per = 1.0 / a - b / (a * (a + (df - 1.0) * b));
    agree(closed, per * (df - 1.0))?;

    let dense_trace = if d - 1 <= DENSE_CHECK_MAX_PARAMS {
        let t = dense_trace_of_inverse(&f.to_matrix())?;
        agree(closed, t)?;
        Some(t)
    } else {
        None
    };
    Ok(VarianceBound {
        dim: d,
        total_variance_min: closed,
        per_parameter_bound: per,
        dense_trace,
    })
}

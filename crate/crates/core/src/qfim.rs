//! Closed-form and spectral-formula quantum Fisher information matrices for
//! the equatorial family and its shrinking-channel outputs.
//!
//! The spectral route evaluates, over the support S of ρ = Σ λᵢ|ψᵢ⟩⟨ψᵢ|,
//!
//! F_μν = Σᵢ ∂_μλᵢ ∂_νλᵢ / λᵢ
//!      + Σᵢ 4λᵢ Re⟨∂_μψᵢ|∂_νψᵢ⟩
//!      − Σᵢⱼ 8λᵢλⱼ/(λᵢ+λⱼ) Re(⟨∂_μψᵢ|ψⱼ⟩⟨ψⱼ|∂_νψᵢ⟩).

use nalgebra::DMatrix;

use crate::channels::{check_eta, eta_uqcm};
use crate::error::{Error, Result};
use crate::linalg::{inner, min_symmetric_eigenvalue, CMatrix, CVector, C64};
use crate::states::{basis_derivative, complement_basis, OrthonormalBasis, PhaseVector};

/// Eigenvalues at or below this are outside the support.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Largest d accepted by the closed forms.
pub const MAX_CLOSED_FORM_DIM: usize = 1_000_000;
const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Real symmetric (d−1)×(d−1) Fisher information matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QFIMatrix {
    entries: DMatrix<f64>,
}

impl QFIMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::InvalidState(
                "QFIM must be square and non-empty".into(),
            ));
        }
        let asym = (&entries - entries.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return Err(Error::InvalidState(format!(
                "QFIM not symmetric ({asym:e})"
            )));
        }
        let lowest = min_symmetric_eigenvalue(&entries);
        if lowest.is_nan() || lowest < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "QFIM not positive semidefinite ({lowest:e})"
            )));
        }
        Ok(Self { entries })
    }

    pub fn num_params(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        self.entries[(mu, nu)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_symmetric_eigenvalue(&self.entries)
    }

    /// Largest entrywise difference to `other`.
    pub fn max_diff(&self, other: &QFIMatrix) -> f64 {
        (&self.entries - &other.entries).amax()
    }

    /// max over μ ≠ ν of |F_μμ + (d−1)F_μν|; zero when d = 2.
    pub fn relation_residual(&self) -> f64 {
        let n = self.num_params();
        let scale = n as f64;
        let mut worst = 0.0_f64;
        for mu in 0..n {
            for nu in (0..n).filter(|&nu| nu != mu) {
                worst = worst.max((self.entries[(mu, mu)] + scale * self.entries[(mu, nu)]).abs());
            }
        }
        worst
    }

    /// Collapses to the equal-diagonal/equal-off-diagonal form, failing if
    /// any entry deviates from the mean of its class by more than `tol`.
    pub fn to_equatorial(&self, tol: f64) -> Result<EquatorialQfim> {
        let n = self.num_params();
        let diag: Vec<f64> = (0..n).map(|k| self.entries[(k, k)]).collect();
        let off: Vec<f64> = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|rc| self.entries[rc])
            .collect();
        let mean = |v: &[f64]| {
            if v.is_empty() {
                0.0
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            }
        };
        let (dm, om) = (mean(&diag), mean(&off));
        let dev = diag
            .iter()
            .map(|x| (x - dm).abs())
            .chain(off.iter().map(|x| (x - om).abs()))
            .fold(0.0, f64::max);
        if dev > tol {
            return Err(Error::StructureViolation(dev));
        }
        Ok(EquatorialQfim {
            dim: n + 1,
            diagonal: dm,
            off_diagonal: om,
        })
    }
}

/// QFIM with all diagonal entries equal and all off-diagonal entries equal,
/// stored without materializing the (d−1)×(d−1) matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquatorialQfim {
    pub dim: usize,
    pub diagonal: f64,
    pub off_diagonal: f64,
}

impl EquatorialQfim {
    pub fn num_params(&self) -> usize {
        self.dim - 1
    }

    /// |F_μμ + (d−1)F_μν|; zero for every member of the equatorial family.
    /// Always zero at d = 2 where no off-diagonal entry exists.
    pub fn relation_residual(&self) -> f64 {
        if self.dim == 2 {
            return 0.0;
        }
        (self.diagonal + (self.dim as f64 - 1.0) * self.off_diagonal).abs()
    }

    pub fn to_matrix(&self) -> QFIMatrix {
        let n = self.num_params();
        QFIMatrix {
            entries: DMatrix::from_fn(n, n, |r, c| {
                if r == c {
                    self.diagonal
                } else {
                    self.off_diagonal
                }
            }),
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if d > MAX_CLOSED_FORM_DIM {
        return Err(Error::DimensionTooLarge {
            dim: d,
            max: MAX_CLOSED_FORM_DIM,
        });
    }
    Ok(())
}

/// F_μν = 4(δ_μν/d − 1/d²) for the input state itself.
pub fn qfim_pure(d: usize) -> Result<EquatorialQfim> {
    check_dim(d)?;
    let df = d as f64;
    Ok(EquatorialQfim {
        dim: d,
        diagonal: 4.0 * (1.0 / df - 1.0 / (df * df)),
        off_diagonal: -4.0 / (df * df),
    })
}

/// QFIM of η|ψ⟩⟨ψ| + ((1−η)/d)·I.
pub fn qfim_shrink_closed(d: usize, eta: f64) -> Result<EquatorialQfim> {
    check_dim(d)?;
    check_eta(eta)?;
    let df = d as f64;
    let denom = df * (2.0 + (df - 2.0) * eta);
    Ok(EquatorialQfim {
        dim: d,
        diagonal: 4.0 * (df - 1.0) * eta * eta / denom,
        off_diagonal: -4.0 * eta * eta / denom,
    })
}

/// ∂F_μμ/∂η of [`qfim_shrink_closed`].
pub fn shrink_diagonal_eta_derivative(d: usize, eta: f64) -> Result<f64> {
    check_dim(d)?;
    check_eta(eta)?;
    let df = d as f64;
    let s = 2.0 + (df - 2.0) * eta;
    Ok(4.0 * eta * (df - 1.0) * (4.0 + (df - 2.0) * eta) / (df * s * s))
}

pub fn qfim_uqcm_closed(d: usize) -> Result<EquatorialQfim> {
    check_dim(d)?;
    let df = d as f64;
    let denom = (df + 1.0) * (df + 4.0) * df * df;
    let num = 2.0 * (df + 2.0) * (df + 2.0);
    Ok(EquatorialQfim {
        dim: d,
        diagonal: (df - 1.0) * num / denom,
        off_diagonal: -num / denom,
    })
}

/// Diagonal from the γ = √(d²+4d−4) closed form; off-diagonal from
/// F_μν = −F_μμ/(d−1).
pub fn qfim_pqcm_closed(d: usize) -> Result<EquatorialQfim> {
    check_dim(d)?;
    let df = d as f64;
    let g = (df * df + 4.0 * df - 4.0).sqrt();
    let diagonal =
        2.0 * (df * df + df * g - 2.0 * g) / (df * (df * df + df * (g + 4.0) - 2.0 * (g + 2.0)));
    Ok(EquatorialQfim {
        dim: d,
        diagonal,
        off_diagonal: -diagonal / (df - 1.0),
    })
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: OrthonormalBasis,
    support_rank: usize,
}

impl SpectralDecomposition {
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: OrthonormalBasis) -> Result<Self> {
        if eigenvalues.len() != eigenvectors.dim() {
            return Err(Error::LengthMismatch {
                expected: eigenvectors.dim(),
                got: eigenvalues.len(),
            });
        }
        let total: f64 = eigenvalues.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("eigenvalues sum to {total}")));
        }
        if eigenvalues.iter().any(|&l| l < -SUPPORT_TOL) {
            return Err(Error::InvalidState("negative eigenvalue".into()));
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidState("eigenvalues must be descending".into()));
        }
        let support_rank = eigenvalues.iter().filter(|&&l| l > SUPPORT_TOL).count();
        Ok(Self {
            eigenvalues,
            eigenvectors,
            support_rank,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &OrthonormalBasis {
        &self.eigenvectors
    }

    pub fn support_rank(&self) -> usize {
        self.support_rank
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Σ λᵢ|ψᵢ⟩⟨ψᵢ|
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.dim();
        let mut rho = CMatrix::zeros(d, d);
        for (l, v) in self.eigenvalues.iter().zip(self.eigenvectors.vectors()) {
            rho += v.projector() * C64::from(*l);
        }
        rho
    }
}

/// Parameter derivatives of every eigenvalue and eigenvector, indexed
/// `[parameter][eigen-index]` with parameters counted from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDerivatives {
    pub eigenvalues: Vec<Vec<f64>>,
    pub eigenvectors: Vec<Vec<CVector>>,
}

impl SpectralDerivatives {
    pub fn num_params(&self) -> usize {
        self.eigenvectors.len()
    }

    fn check_against(&self, sd: &SpectralDecomposition) -> Result<()> {
        if self.eigenvalues.len() != self.eigenvectors.len() || self.eigenvectors.is_empty() {
            return Err(Error::InvalidState(
                "derivative tables disagree on parameter count".into(),
            ));
        }
        let d = sd.dim();
        for (vals, vecs) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            if vals.len() != d || vecs.len() != d {
                return Err(Error::LengthMismatch {
                    expected: d,
                    got: vals.len().min(vecs.len()),
                });
            }
            if let Some(v) = vecs.iter().find(|v| v.len() != d) {
                return Err(Error::LengthMismatch {
                    expected: d,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }
}

/// Δ and Θ building blocks restricted to the support of a decomposition.
pub(crate) struct SupportGeometry<'a> {
    sd: &'a SpectralDecomposition,
    derivs: &'a SpectralDerivatives,
    support: Vec<usize>,
    /// Per parameter, entry (a, b) = ⟨ψ_{S[a]}|∂ψ_{S[b]}⟩.
    overlaps: Vec<CMatrix>,
}

impl<'a> SupportGeometry<'a> {
    pub(crate) fn new(
        sd: &'a SpectralDecomposition,
        derivs: &'a SpectralDerivatives,
    ) -> Result<Self> {
        derivs.check_against(sd)?;
        let support: Vec<usize> = (0..sd.dim())
            .filter(|&i| sd.eigenvalues[i] > SUPPORT_TOL)
            .collect();
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        let s = support.len();
        let vecs = sd.eigenvectors.vectors();
        let overlaps = derivs
            .eigenvectors
            .iter()
            .map(|dv| {
                CMatrix::from_fn(s, s, |a, b| {
                    inner(vecs[support[a]].amplitudes(), &dv[support[b]])
                })
            })
            .collect();
        Ok(Self {
            sd,
            derivs,
            support,
            overlaps,
        })
    }

    pub(crate) fn num_params(&self) -> usize {
        self.derivs.num_params()
    }

    pub(crate) fn support_len(&self) -> usize {
        self.support.len()
    }

    /// λ of the a-th support element.
    pub(crate) fn lambda(&self, a: usize) -> f64 {
        self.sd.eigenvalues[self.support[a]]
    }

    pub(crate) fn eigenvalue_derivative(&self, mu: usize, a: usize) -> f64 {
        self.derivs.eigenvalues[mu][self.support[a]]
    }

    /// Δ^i_μν = ⟨∂_μψᵢ|∂_νψᵢ⟩
    pub(crate) fn delta(&self, a: usize, mu: usize, nu: usize) -> C64 {
        let i = self.support[a];
        inner(
            &self.derivs.eigenvectors[mu][i],
            &self.derivs.eigenvectors[nu][i],
        )
    }

    /// Θ^{ij}_μν = ⟨∂_μψᵢ|ψⱼ⟩⟨ψⱼ|∂_νψᵢ⟩
    pub(crate) fn theta(&self, a: usize, b: usize, mu: usize, nu: usize) -> C64 {
        self.overlaps[mu][(b, a)].conj() * self.overlaps[nu][(b, a)]
    }
}

/// Classical and quantum parts of the spectral QFIM formula.
#[derive(Debug, Clone, PartialEq)]
pub struct QfimContributions {
    pub classical: DMatrix<f64>,
    pub quantum: DMatrix<f64>,
}

pub fn qfim_contributions(
    sd: &SpectralDecomposition,
    derivs: &SpectralDerivatives,
) -> Result<QfimContributions> {
    let geo = SupportGeometry::new(sd, derivs)?;
    let n = geo.num_params();
    let s = geo.support_len();
    let mut classical = DMatrix::zeros(n, n);
    let mut quantum = DMatrix::zeros(n, n);
    for mu in 0..n {
        for nu in 0..n {
            let mut fc = 0.0;
            let mut fq = 0.0;
            for a in 0..s {
                let la = geo.lambda(a);
                fc += geo.eigenvalue_derivative(mu, a) * geo.eigenvalue_derivative(nu, a) / la;
                fq += 4.0 * la * geo.delta(a, mu, nu).re;
                for b in 0..s {
                    let lb = geo.lambda(b);
                    fq -= 8.0 * la * lb / (la + lb) * geo.theta(a, b, mu, nu).re;
                }
            }
            classical[(mu, nu)] = fc;
            quantum[(mu, nu)] = fq;
        }
    }
    Ok(QfimContributions { classical, quantum })
}

/// F = F_C + F_Q from a spectral decomposition and its derivatives.
pub fn qfim_from_spectral(
    sd: &SpectralDecomposition,
    derivs: &SpectralDerivatives,
) -> Result<QFIMatrix> {
    let parts = qfim_contributions(sd, derivs)?;
    QFIMatrix::new(parts.classical + parts.quantum)
}

/// Spectral decomposition of η|ψ(φ)⟩⟨ψ(φ)| + ((1−η)/d)·I in the
/// Gram-Schmidt basis: η + (1−η)/d on |ψ(φ)⟩, (1−η)/d on each |ψ_n⟩.
pub fn spectral_output(p: &PhaseVector, eta: f64) -> Result<SpectralDecomposition> {
    check_eta(eta)?;
    let d = p.dim();
    let low = (1.0 - eta) / d as f64;
    let mut eigenvalues = vec![low; d];
    eigenvalues[0] = eta + low;
    SpectralDecomposition::new(eigenvalues, complement_basis(p))
}

/// Derivatives matching [`spectral_output`]: the eigenvalues do not depend
/// on φ and the eigenvector derivatives are those of the Gram-Schmidt basis.
pub fn equatorial_derivatives(p: &PhaseVector) -> SpectralDerivatives {
    let d = p.dim();
    let eigenvectors = (1..d)
        .map(|mu| {
            (0..d)
                .map(|n| basis_derivative(p, n, mu).expect("indices in range"))
                .collect()
        })
        .collect();
    SpectralDerivatives {
        eigenvalues: vec![vec![0.0; d]; d - 1],
        eigenvectors,
    }
}

/// The two quantum-part sums for F₁₁ of the universal cloner, evaluated
/// numerically, next to their closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeSums {
    pub dim: usize,
    /// Σₙ 4λₙ Re Δⁿ₁₁
    pub first: f64,
    /// Σₙₘ 8λₙλₘ/(λₙ+λₘ) Re Θⁿᵐ₁₁
    pub second: f64,
    pub first_closed: f64,
    pub second_closed: f64,
}

impl DerivativeSums {
    pub fn difference(&self) -> f64 {
        self.first - self.second
    }

    pub fn max_error(&self) -> f64 {
        (self.first - self.first_closed)
            .abs()
            .max((self.second - self.second_closed).abs())
    }
}

/// [`derivative_sums_at`] at the reference point φ = 0.
pub fn derivative_sums(d: usize) -> Result<DerivativeSums> {
    derivative_sums_at(&PhaseVector::zeros(d)?)
}

pub fn derivative_sums_at(p: &PhaseVector) -> Result<DerivativeSums> {
    let d = p.dim();
    let df = d as f64;
    let basis = complement_basis(p);
    let derivs: Vec<CVector> = (0..d)
        .map(|n| basis_derivative(p, n, 1))
        .collect::<Result<_>>()?;
    let eta = eta_uqcm(d);
    let lambda = |n: usize| {
        if n == 0 {
            eta + (1.0 - eta) / df
        } else {
            (1.0 - eta) / df
        }
    };

    let first = (0..d)
        .map(|n| 4.0 * lambda(n) * inner(&derivs[n], &derivs[n]).re)
        .sum();
    let mut second = 0.0;
    for (n, dn) in derivs.iter().enumerate() {
        for m in 0..d {
            let psi_m = basis.vector(m).amplitudes();
            let theta = inner(dn, psi_m) * inner(psi_m, dn);
            let (ln, lm) = (lambda(n), lambda(m));
            second += 8.0 * ln * lm / (ln + lm) * theta.re;
        }
    }
    Ok(DerivativeSums {
        dim: d,
        first,
        second,
        first_closed: 4.0 / df,
        second_closed: 2.0 * (df.powi(3) + 7.0 * df * df + 8.0 * df + 4.0)
            / ((df + 1.0) * (df + 4.0) * df * df),
    })
}

/// Σ_{n=1}^{d−1} 1/(n(n+1)), which telescopes to 1 − 1/d.
pub fn telescoping_sum(d: usize) -> f64 {
    (1..d).map(|n| 1.0 / (n as f64 * (n as f64 + 1.0))).sum()
}

//! Equatorial qudit states, their phase-shift generators and the orthonormal
//! basis of the complement of |ψ(φ)⟩ built by Gram-Schmidt.
//!
//! Phases are indexed `1..d` as parameters; index 0 is the gauge-fixed
//! reference phase φ₀ = 0.

use std::f64::consts::TAU;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{cis, frobenius, inner, CMatrix, CVector, C64, I, ONE, ZERO};

/// Normalization tolerance for [`PureState`].
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance on ‖U†U − I‖_F for [`UnitaryMatrix`].
pub const UNITARY_TOL: f64 = 1e-12;

/// The d−1 free phases φ₁..φ_{d−1}, stored wrapped into [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    phases: Vec<f64>,
}

fn wrap(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl PhaseVector {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidDimension(1));
        }
        for (k, &v) in phases.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinitePhase {
                    index: k + 1,
                    value: v,
                });
            }
        }
        Ok(Self {
            phases: phases.into_iter().map(wrap).collect(),
        })
    }

    /// The reference point φ = 0 in dimension `dim`.
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        Self::new(vec![0.0; dim - 1])
    }

    /// Phases drawn uniformly from [0, 2π).
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        Self::new((0..dim - 1).map(|_| rng.random_range(0.0..TAU)).collect())
    }

    /// Hilbert-space dimension d.
    pub fn dim(&self) -> usize {
        self.phases.len() + 1
    }

    pub fn num_params(&self) -> usize {
        self.phases.len()
    }

    /// The free phases φ₁..φ_{d−1}.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// φ_j for j in 0..d, with φ₀ = 0.
    pub fn phase(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.phases[j - 1]
        }
    }

    /// A copy with φ_μ shifted by `delta` (μ in 1..d).
    pub fn shifted(&self, mu: usize, delta: f64) -> Result<Self> {
        check_param(self.dim(), mu)?;
        let mut phases = self.phases.clone();
        phases[mu - 1] += delta;
        Self::new(phases)
    }
}

/// Unit-norm complex amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm * norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm² = {}", norm * norm)));
        }
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    /// |ψ⟩⟨ψ|
    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    entries: CMatrix,
}

impl UnitaryMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidState("unitary must be square".into()));
        }
        let n = entries.nrows();
        let err = frobenius(&(entries.adjoint() * &entries - CMatrix::identity(n, n)));
        if err > UNITARY_TOL {
            return Err(Error::InvalidState(format!(
                "U†U deviates from I by {err:e}"
            )));
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn apply(&self, psi: &PureState) -> Result<PureState> {
        if psi.dim() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: psi.dim(),
            });
        }
        Ok(PureState {
            amplitudes: &self.entries * psi.amplitudes(),
        })
    }
}

/// d orthonormal vectors; index 0 is |ψ(φ)⟩ itself.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    vectors: Vec<PureState>,
}

impl OrthonormalBasis {
    /// Checks ⟨ψ_m|ψ_n⟩ = δ_mn within [`NORM_TOL`].
    pub fn new(vectors: Vec<PureState>) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.dim() != vectors.len()) {
            return Err(Error::LengthMismatch {
                expected: vectors.len(),
                got: v.dim(),
            });
        }
        let basis = Self { vectors };
        let err = basis.orthonormality_error();
        if err > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "basis not orthonormal ({err:e})"
            )));
        }
        Ok(basis)
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vector(&self, n: usize) -> &PureState {
        &self.vectors[n]
    }

    pub fn vectors(&self) -> &[PureState] {
        &self.vectors
    }

    /// Largest |⟨ψ_m|ψ_n⟩ − δ_mn|.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (m, a) in self.vectors.iter().enumerate() {
            for (n, b) in self.vectors.iter().enumerate() {
                let target = if m == n { ONE } else { ZERO };
                worst = worst.max((inner(a.amplitudes(), b.amplitudes()) - target).norm());
            }
        }
        worst
    }
}

fn check_param(dim: usize, mu: usize) -> Result<()> {
    if mu == 0 || mu >= dim {
        return Err(Error::IndexOutOfRange {
            what: "parameter",
            index: mu,
            lo: 1,
            hi: dim - 1,
        });
    }
    Ok(())
}

fn check_basis_index(dim: usize, n: usize) -> Result<()> {
    if n >= dim {
        return Err(Error::IndexOutOfRange {
            what: "basis",
            index: n,
            lo: 0,
            hi: dim - 1,
        });
    }
    Ok(())
}

/// |ψ(φ)⟩ = (1/√d) Σ_j e^{iφ_j}|j⟩.
pub fn equatorial_state(p: &PhaseVector) -> PureState {
    let d = p.dim();
    let s = 1.0 / (d as f64).sqrt();
    PureState {
        amplitudes: CVector::from_fn(d, |j, _| cis(p.phase(j)) * s),
    }
}

/// diag(1, e^{iφ₁}, …, e^{iφ_{d−1}})
pub fn phase_shift_unitary(p: &PhaseVector) -> UnitaryMatrix {
    let d = p.dim();
    UnitaryMatrix {
        entries: CMatrix::from_diagonal(&CVector::from_fn(d, |j, _| cis(p.phase(j)))),
    }
}

/// ∂|ψ(φ)⟩/∂φ_μ: a single entry (i/√d)e^{iφ_μ} at position μ.
pub fn state_derivative(p: &PhaseVector, mu: usize) -> Result<CVector> {
    let d = p.dim();
    check_param(d, mu)?;
    let mut v = CVector::zeros(d);
    v[mu] = I * cis(p.phase(mu)) / (d as f64).sqrt();
    Ok(v)
}

/// |χ_n⟩: −e^{−iφ_n}/√2 at position 0 and 1/√2 at position n.
fn chi(p: &PhaseVector, n: usize) -> CVector {
    let mut v = CVector::zeros(p.dim());
    v[0] = -cis(-p.phase(n)) * std::f64::consts::FRAC_1_SQRT_2;
    v[n] = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    v
}

/// ∂_μ|χ_j⟩: only the position-0 entry depends on φ_j.
fn chi_derivative(p: &PhaseVector, j: usize, mu: usize) -> CVector {
    let mut v = CVector::zeros(p.dim());
    if mu == j {
        v[0] = I * cis(-p.phase(j)) * std::f64::consts::FRAC_1_SQRT_2;
    }
    v
}

fn gram_schmidt_prefactor(n: usize) -> f64 {
    (2.0 * n as f64 / (n as f64 + 1.0)).sqrt()
}

fn complement_vector(p: &PhaseVector, n: usize) -> CVector {
    let nf = n as f64;
    let mut v = chi(p, n);
    for j in 1..n {
        let w = cis(p.phase(j) - p.phase(n)) / nf;
        v -= chi(p, j) * w;
    }
    v * C64::from(gram_schmidt_prefactor(n))
}

/// Orthonormal basis {|ψ₀⟩ = |ψ(φ)⟩, |ψ₁⟩, …, |ψ_{d−1}⟩} where
/// |ψ_n⟩ = √(2n/(n+1)) (|χ_n⟩ − (1/n) Σ_{j<n} e^{i(φ_j−φ_n)}|χ_j⟩).
pub fn complement_basis(p: &PhaseVector) -> OrthonormalBasis {
    let d = p.dim();
    let mut vectors = Vec::with_capacity(d);
    vectors.push(equatorial_state(p));
    for n in 1..d {
        vectors.push(PureState {
            amplitudes: complement_vector(p, n),
        });
    }
    OrthonormalBasis { vectors }
}

/// Analytic ∂_μ|ψ_n⟩ for the vectors of [`complement_basis`].
pub fn basis_derivative(p: &PhaseVector, n: usize, mu: usize) -> Result<CVector> {
    let d = p.dim();
    check_basis_index(d, n)?;
    check_param(d, mu)?;
    if n == 0 {
        return state_derivative(p, mu);
    }
    let nf = n as f64;
    let mut v = chi_derivative(p, n, mu);
    for j in 1..n {
        let w = cis(p.phase(j) - p.phase(n)) / nf;
        let dw = (f64::from(u8::from(mu == j)) - f64::from(u8::from(mu == n))) * I * w;
        v -= chi(p, j) * dw + chi_derivative(p, j, mu) * w;
    }
    Ok(v * C64::from(gram_schmidt_prefactor(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn vec_err(a: &CVector, b: &CVector) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn phases_wrap_into_canonical_range() {
        let p = PhaseVector::new(vec![-0.5, 7.0, TAU]).unwrap();
        assert!((p.phases()[0] - (TAU - 0.5)).abs() < 1e-15);
        assert!((p.phases()[1] - (7.0 - TAU)).abs() < 1e-15);
        assert_eq!(p.phases()[2], 0.0);
        assert_eq!(p.dim(), 4);
        assert!(PhaseVector::new(vec![]).is_err());
        assert!(matches!(
            PhaseVector::new(vec![f64::NAN]),
            Err(Error::NonFinitePhase { index: 1, .. })
        ));
    }

    #[test]
    fn qubit_reference_state() {
        let psi = equatorial_state(&PhaseVector::zeros(2).unwrap());
        assert!(close(psi.amplitudes()[0], C64::from(FRAC_1_SQRT_2), 1e-15));
        assert!(close(psi.amplitudes()[1], C64::from(FRAC_1_SQRT_2), 1e-15));
    }

    #[test]
    fn qutrit_state_by_hand() {
        let psi = equatorial_state(&PhaseVector::new(vec![PI / 2.0, PI]).unwrap());
        let s = 1.0 / 3f64.sqrt();
        let expected = [C64::new(s, 0.0), C64::new(0.0, s), C64::new(-s, 0.0)];
        for (a, b) in psi.amplitudes().iter().zip(expected) {
            assert!(close(*a, b, 1e-15));
        }
    }

    #[test]
    fn phase_shift_examples() {
        let u = phase_shift_unitary(&PhaseVector::zeros(4).unwrap());
        assert!(max_abs(&(u.entries() - CMatrix::identity(4, 4))) == 0.0);
        let u = phase_shift_unitary(&PhaseVector::new(vec![PI]).unwrap());
        assert!(close(u.entries()[(0, 0)], ONE, 1e-15));
        assert!(close(u.entries()[(1, 1)], -ONE, 1e-15));
        assert!(UnitaryMatrix::new(u.entries().clone()).is_ok());
    }

    #[test]
    fn derivative_examples() {
        let p = PhaseVector::zeros(2).unwrap();
        let v = state_derivative(&p, 1).unwrap();
        assert!(close(v[0], ZERO, 0.0));
        assert!(close(v[1], C64::new(0.0, FRAC_1_SQRT_2), 1e-15));
        assert!(state_derivative(&p, 0).is_err());
        assert!(state_derivative(&p, 2).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = PhaseVector::random(6, &mut rng).unwrap();
        let psi = equatorial_state(&p);
        let d = 6.0;
        for mu in 1..6 {
            for nu in 1..6 {
                let a = state_derivative(&p, mu).unwrap();
                let b = state_derivative(&p, nu).unwrap();
                let delta = inner(&a, &b);
                let expected = if mu == nu { 1.0 / d } else { 0.0 };
                assert!(close(delta, C64::from(expected), 1e-14));
                let theta = inner(&a, psi.amplitudes()) * inner(psi.amplitudes(), &b);
                assert!(close(theta, C64::from(1.0 / (d * d)), 1e-14));
            }
        }
    }

    #[test]
    fn qubit_complement_vector() {
        let basis = complement_basis(&PhaseVector::zeros(2).unwrap());
        let v = basis.vector(1).amplitudes();
        assert!(close(v[0], C64::from(-FRAC_1_SQRT_2), 1e-15));
        assert!(close(v[1], C64::from(FRAC_1_SQRT_2), 1e-15));
    }

    #[test]
    fn chi_inner_product_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = PhaseVector::random(7, &mut rng).unwrap();
        for m in 1..7 {
            for n in 1..7 {
                let got = inner(&chi(&p, m), &chi(&p, n));
                let expected = if m == n {
                    ONE
                } else {
                    cis(p.phase(m) - p.phase(n)) * 0.5
                };
                assert!(close(got, expected, 1e-14));
            }
        }
    }

    #[test]
    fn complement_is_orthogonal_to_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..=12 {
            let p = PhaseVector::random(d, &mut rng).unwrap();
            let basis = complement_basis(&p);
            let psi = equatorial_state(&p);
            assert_eq!(basis.vector(0), &psi);
            for n in 1..d {
                assert!(inner(psi.amplitudes(), basis.vector(n).amplitudes()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn basis_orthonormal_for_many_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for d in 2..=16 {
            for _ in 0..100 {
                let p = PhaseVector::random(d, &mut rng).unwrap();
                assert!(complement_basis(&p).orthonormality_error() < 1e-12);
            }
        }
    }

    #[test]
    fn basis_derivative_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 2..=9 {
            let p = PhaseVector::random(d, &mut rng).unwrap();
            for n in 1..d {
                let v = basis_derivative(&p, n, 1).unwrap();
                let expected = 1.0 / (n * (n + 1)) as f64;
                assert!((inner(&v, &v).re - expected).abs() < 1e-14);
            }
            for mu in 1..d {
                assert_eq!(
                    basis_derivative(&p, 0, mu).unwrap(),
                    state_derivative(&p, mu).unwrap()
                );
            }
        }
        let p = PhaseVector::zeros(3).unwrap();
        assert!(basis_derivative(&p, 3, 1).is_err());
        assert!(basis_derivative(&p, 1, 0).is_err());
        assert!(basis_derivative(&p, 1, 3).is_err());
    }

    fn central_difference<F: Fn(&PhaseVector) -> CVector>(
        f: F,
        p: &PhaseVector,
        mu: usize,
        h: f64,
    ) -> CVector {
        let plus = f(&p.shifted(mu, h).unwrap());
        let minus = f(&p.shifted(mu, -h).unwrap());
        (plus - minus) / C64::from(2.0 * h)
    }

    #[test]
    fn state_derivative_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for d in 2..=8 {
            let p = PhaseVector::random(d, &mut rng).unwrap();
            for mu in 1..d {
                let fd =
                    central_difference(|q| equatorial_state(q).into_amplitudes(), &p, mu, 1e-5);
                assert!(vec_err(&fd, &state_derivative(&p, mu).unwrap()) < 1e-8);
            }
        }
    }

    #[test]
    fn basis_derivative_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for d in [2, 3, 4, 4, 4, 6] {
            let p = PhaseVector::random(d, &mut rng).unwrap();
            for n in 0..d {
                for mu in 1..d {
                    let fd = central_difference(
                        |q| complement_basis(q).vector(n).amplitudes().clone(),
                        &p,
                        mu,
                        1e-5,
                    );
                    let exact = basis_derivative(&p, n, mu).unwrap();
                    assert!(vec_err(&fd, &exact) < 1e-6, "d={d} n={n} mu={mu}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn generation_by_phase_shift(phases in proptest::collection::vec(-10.0f64..10.0, 1..12)) {
            let p = PhaseVector::new(phases).unwrap();
            let reference = equatorial_state(&PhaseVector::zeros(p.dim()).unwrap());
            let shifted = phase_shift_unitary(&p).apply(&reference).unwrap();
            let direct = equatorial_state(&p);
            prop_assert!(vec_err(shifted.amplitudes(), direct.amplitudes()) < 1e-14);
            prop_assert!((direct.amplitudes().norm() - 1.0).abs() < 1e-14);
        }

        #[test]
        fn gauge_invariance_under_full_turns(
            phases in proptest::collection::vec(0.0f64..TAU, 1..8),
            which in 0usize..8,
            turns in -3i32..=3,
        ) {
            let p = PhaseVector::new(phases.clone()).unwrap();
            let mut moved = phases;
            let k = which % moved.len();
            moved[k] += TAU * f64::from(turns);
            let q = PhaseVector::new(moved).unwrap();
            let d = p.dim();
            prop_assert!(vec_err(equatorial_state(&p).amplitudes(), equatorial_state(&q).amplitudes()) < 1e-12);
            let (bp, bq) = (complement_basis(&p), complement_basis(&q));
            for n in 0..d {
                prop_assert!(vec_err(bp.vector(n).amplitudes(), bq.vector(n).amplitudes()) < 1e-12);
                for mu in 1..d {
                    prop_assert!(vec_err(&basis_derivative(&p, n, mu).unwrap(), &basis_derivative(&q, n, mu).unwrap()) < 1e-12);
                }
            }
        }
    }
}

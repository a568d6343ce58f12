//! The verification suite behind `clone-qfim verify`: every invariant of the
//! library evaluated on a seeded test matrix, one report row per check.

use std::path::Path;

use clap::ValueEnum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CliError, SweepConfig};
use crate::channels::{
    eta_pqcm, eta_uqcm, pqcm_full_output, reduce_first_qudit, reduce_second_qudit, shrink_output,
    uqcm_full_output,
};
use crate::crb::{
    attainability_closed, attainability_unsymmetrized, dense_trace_of_inverse, qfim_eigenvalues,
    total_variance_bound,
};
use crate::linalg::{frobenius, min_symmetric_eigenvalue, CVector, C64};
use crate::oracle::{information_numeric, qfim_numeric, ParamChannel};
use crate::qfim::{
    derivative_sums_at, equatorial_derivatives, qfim_contributions, qfim_from_spectral,
    qfim_pqcm_closed, qfim_pure, qfim_shrink_closed, qfim_uqcm_closed, spectral_output,
    telescoping_sum, EquatorialQfim, QFIMatrix,
};
use crate::states::{
    basis_derivative, complement_basis, equatorial_state, phase_shift_unitary, state_derivative,
    PhaseVector,
};
use crate::Result;

/// One report row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub max_error: f64,
    pub tolerance: f64,
}

/// Faults that can be injected to confirm the suite is able to fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Swap numerator and denominator offsets in the universal-cloner
    /// shrinking factor used by the scaling-form comparison.
    EtaTypo,
}

struct Report<'a> {
    cfg: &'a SweepConfig,
    rows: Vec<CheckResult>,
}

impl Report<'_> {
    fn record(&mut self, name: &str, max_error: f64, default_tol: f64) {
        let tolerance = self.cfg.tolerance(name, default_tol);
        self.rows.push(CheckResult {
            name: name.to_string(),
            pass: max_error.is_finite() && max_error <= tolerance,
            max_error,
            tolerance,
        });
    }
}

/// Running maximum.
#[derive(Default, Clone, Copy)]
struct Worst(f64);

impl Worst {
    fn see(&mut self, v: f64) {
        // NaN must poison the result rather than vanish in max().
        if v.is_nan() || v > self.0 {
            self.0 = v;
        }
    }
}

fn vec_max_diff(a: &CVector, b: &CVector) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn closed_diff(f: &QFIMatrix, closed: &EquatorialQfim) -> f64 {
    f.max_diff(&closed.to_matrix())
}

pub fn cmd_verify(
    cfg: &SweepConfig,
    fault: Option<Fault>,
) -> std::result::Result<Vec<CheckResult>, CliError> {
    let mut report = Report {
        cfg,
        rows: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let full_dims = cfg.d_min..=cfg.d_max;
    let mut relation = Worst::default();

    check_states(&mut report, &mut rng)?;
    check_channels(&mut report, &mut rng, full_dims.clone(), fault)?;
    check_closed_forms(&mut report, &mut relation)?;
    check_spectral(&mut report, &mut rng, &mut relation)?;
    check_bounds(&mut report)?;
    check_oracle(&mut report, &mut rng, full_dims, &mut relation)?;
    report.record("relation_invariant", relation.0, 1e-10);
    Ok(report.rows)
}

fn check_states(report: &mut Report, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut ortho = Worst::default();
    for d in 2..=16 {
        for _ in 0..100 {
            ortho.see(complement_basis(&PhaseVector::random(d, rng)?).orthonormality_error());
        }
    }
    report.record("basis_orthonormality", ortho.0, 1e-12);

    let (mut generation, mut sd_fd, mut gauge) =
        (Worst::default(), Worst::default(), Worst::default());
    let h = report.cfg.fd_step;
    for d in 2..=16 {
        for _ in 0..10 {
            let p = PhaseVector::random(d, rng)?;
            let psi = equatorial_state(&p);
            let reference = equatorial_state(&PhaseVector::zeros(d)?);
            let shifted = phase_shift_unitary(&p).apply(&reference)?;
            generation.see(vec_max_diff(shifted.amplitudes(), psi.amplitudes()));
            for mu in 1..d {
                let fd = (equatorial_state(&p.shifted(mu, h)?).into_amplitudes()
                    - equatorial_state(&p.shifted(mu, -h)?).into_amplitudes())
                    / C64::from(2.0 * h);
                sd_fd.see(vec_max_diff(&fd, &state_derivative(&p, mu)?));
            }
            let mu = 1 + (d - 1) / 2;
            let turned = p.shifted(mu, std::f64::consts::TAU)?;
            let (a, b) = (complement_basis(&p), complement_basis(&turned));
            for n in 0..d {
                gauge.see(vec_max_diff(
                    a.vector(n).amplitudes(),
                    b.vector(n).amplitudes(),
                ));
                gauge.see(vec_max_diff(
                    &basis_derivative(&p, n, mu)?,
                    &basis_derivative(&turned, n, mu)?,
                ));
            }
        }
    }
    report.record("phase_shift_generation", generation.0, 1e-14);
    report.record("state_derivative_fd", sd_fd.0, 1e-8);
    report.record("gauge_invariance", gauge.0, 1e-12);

    let mut bd_fd = Worst::default();
    for d in [2, 3, 4, 4, 4, 6] {
        let p = PhaseVector::random(d, rng)?;
        for n in 0..d {
            for mu in 1..d {
                let fd = (complement_basis(&p.shifted(mu, h)?).vector(n).amplitudes()
                    - complement_basis(&p.shifted(mu, -h)?).vector(n).amplitudes())
                    / C64::from(2.0 * h);
                bd_fd.see(vec_max_diff(&fd, &basis_derivative(&p, n, mu)?));
            }
        }
    }
    report.record("basis_derivative_fd", bd_fd.0, 1e-6);
    Ok(())
}

fn check_channels(
    report: &mut Report,
    rng: &mut ChaCha8Rng,
    dims: std::ops::RangeInclusive<usize>,
    fault: Option<Fault>,
) -> Result<()> {
    let (mut su, mut sp, mut norm, mut sym) = (
        Worst::default(),
        Worst::default(),
        Worst::default(),
        Worst::default(),
    );
    let (mut uni_spread, mut uni_value, mut cov_spread) =
        (Worst::default(), Worst::default(), Worst::default());
    for d in dims {
        let df = d as f64;
        let eta_u = match fault {
            Some(Fault::EtaTypo) => (df + 1.0) / (2.0 * (df + 2.0)),
            None => eta_uqcm(d),
        };
        let (mut ulo, mut uhi, mut plo, mut phi) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for _ in 0..20 {
            let p = PhaseVector::random(d, rng)?;
            let psi = equatorial_state(&p);
            let u = uqcm_full_output(&p)?;
            let q = pqcm_full_output(&p)?;
            norm.see((u.amplitudes().norm() - 1.0).abs());
            norm.see((q.amplitudes().norm() - 1.0).abs());
            let rho_u = reduce_first_qudit(&u)?;
            let rho_p = reduce_first_qudit(&q)?;
            su.see(frobenius(
                &(rho_u.entries() - shrink_output(&p, eta_u)?.entries()),
            ));
            sp.see(frobenius(
                &(rho_p.entries() - shrink_output(&p, eta_pqcm(d))?.entries()),
            ));
            sym.see(frobenius(
                &(rho_u.entries() - reduce_second_qudit(&u)?.entries()),
            ));
            let fu = rho_u.fidelity_with(&psi);
            let fp = rho_p.fidelity_with(&psi);
            ulo = ulo.min(fu);
            uhi = uhi.max(fu);
            plo = plo.min(fp);
            phi = phi.max(fp);
            let eta = eta_uqcm(d);
            uni_value.see((fu - (eta + (1.0 - eta) / df)).abs());
        }
        uni_spread.see(uhi - ulo);
        cov_spread.see(phi - plo);
    }
    report.record("scaling_form_uqcm", su.0, 1e-10);
    report.record("scaling_form_pqcm", sp.0, 1e-10);
    report.record("full_output_norm", norm.0, 1e-12);
    report.record("copy_symmetry_uqcm", sym.0, 1e-12);
    report.record("universality_uqcm", uni_spread.0, 1e-12);
    report.record("universality_uqcm_fidelity", uni_value.0, 1e-12);
    report.record("covariance_pqcm", cov_spread.0, 1e-12);

    let mut order = Worst::default();
    for d in 2..=1000 {
        order.see((eta_uqcm(d) - eta_pqcm(d)).max(0.0));
    }
    report.record("eta_ordering", order.0, 0.0);
    report.record("eta_uqcm_limit", (eta_uqcm(100) - 0.5).abs(), 0.02);
    report.record("eta_pqcm_limit", (eta_pqcm(100) - 0.5).abs(), 0.02);
    report.record("eta_gap_d100", eta_pqcm(100) - eta_uqcm(100), 1e-3);
    Ok(())
}

fn check_closed_forms(report: &mut Report, relation: &mut Worst) -> Result<()> {
    let (mut cu, mut cp, mut pure, mut psd, mut dpi) = (
        Worst::default(),
        Worst::default(),
        Worst::default(),
        Worst::default(),
        Worst::default(),
    );
    for d in 2..=64 {
        let u = qfim_uqcm_closed(d)?;
        let p = qfim_pqcm_closed(d)?;
        let su = qfim_shrink_closed(d, eta_uqcm(d))?;
        let sp = qfim_shrink_closed(d, eta_pqcm(d))?;
        let fin = qfim_pure(d)?;
        let s1 = qfim_shrink_closed(d, 1.0)?;
        cu.see(
            (u.diagonal - su.diagonal)
                .abs()
                .max((u.off_diagonal - su.off_diagonal).abs()),
        );
        cp.see(
            (p.diagonal - sp.diagonal)
                .abs()
                .max((p.off_diagonal - sp.off_diagonal).abs()),
        );
        pure.see(
            (fin.diagonal - s1.diagonal)
                .abs()
                .max((fin.off_diagonal - s1.off_diagonal).abs()),
        );
        for f in [u, p, su, sp, fin, s1, qfim_shrink_closed(d, 0.4)?] {
            relation.see(f.relation_residual());
        }
        let diff = p.to_matrix().entries() - u.to_matrix().entries();
        psd.see((-min_symmetric_eigenvalue(&diff)).max(0.0));
        dpi.see((u.diagonal - eta_uqcm(d) * fin.diagonal).max(0.0));
    }
    report.record("closed_form_consistency_uqcm", cu.0, 1e-14);
    report.record("closed_form_consistency_pqcm", cp.0, 1e-12);
    report.record("pure_limit", pure.0, 1e-15);
    report.record("machine_ordering_psd", psd.0, 1e-12);
    report.record("data_processing_inequality", dpi.0, 0.0);

    let mut diag = Worst::default();
    for d in 2..=1000 {
        diag.see((qfim_uqcm_closed(d)?.diagonal - qfim_pqcm_closed(d)?.diagonal).max(0.0));
    }
    report.record("diagonal_ordering", diag.0, 0.0);

    let anchors = [
        (qfim_uqcm_closed(2)?.diagonal, 4.0 / 9.0),
        (qfim_pqcm_closed(2)?.diagonal, 0.5),
        (qfim_uqcm_closed(3)?.diagonal, 100.0 / 252.0),
        (qfim_pure(2)?.diagonal, 1.0),
    ];
    let anchor_err = anchors
        .iter()
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    report.record("closed_form_anchors", anchor_err, 1e-14);

    let mut mono = Worst::default();
    let h = 1e-6;
    for d in [2usize, 3, 4, 8, 16, 32, 64] {
        for k in 1..=9 {
            let eta = f64::from(k) / 10.0;
            let fd = (qfim_shrink_closed(d, eta + h)?.diagonal
                - qfim_shrink_closed(d, eta - h)?.diagonal)
                / (2.0 * h);
            mono.see((-fd).max(0.0));
        }
    }
    report.record("monotonicity_in_eta", mono.0, 0.0);
    Ok(())
}

fn check_spectral(report: &mut Report, rng: &mut ChaCha8Rng, relation: &mut Worst) -> Result<()> {
    let (mut su, mut sp, mut sw, mut ss, mut fc) = (
        Worst::default(),
        Worst::default(),
        Worst::default(),
        Worst::default(),
        Worst::default(),
    );
    for d in 2..=10 {
        let p = PhaseVector::random(d, rng)?;
        let derivs = equatorial_derivatives(&p);
        let cases = [
            (eta_uqcm(d), qfim_uqcm_closed(d)?, &mut su),
            (eta_pqcm(d), qfim_pqcm_closed(d)?, &mut sp),
            (1.0, qfim_pure(d)?, &mut sw),
            (0.4, qfim_shrink_closed(d, 0.4)?, &mut ss),
        ];
        for (eta, closed, worst) in cases {
            let sd = spectral_output(&p, eta)?;
            let parts = qfim_contributions(&sd, &derivs)?;
            fc.see(parts.classical.amax());
            let f = qfim_from_spectral(&sd, &derivs)?;
            worst.see(closed_diff(&f, &closed));
            relation.see(f.relation_residual());
        }
    }
    report.record("spectral_vs_closed_uqcm", su.0, 1e-10);
    report.record("spectral_vs_closed_pqcm", sp.0, 1e-10);
    report.record("spectral_vs_closed_pure", sw.0, 1e-10);
    report.record("spectral_vs_closed_shrink", ss.0, 1e-10);
    report.record("classical_contribution_zero", fc.0, 1e-15);

    let mut indep = Worst::default();
    for d in [3usize, 4, 6] {
        for (eta, closed) in [
            (eta_uqcm(d), qfim_uqcm_closed(d)?),
            (eta_pqcm(d), qfim_pqcm_closed(d)?),
        ] {
            let reference = closed.to_matrix();
            for _ in 0..10 {
                let p = PhaseVector::random(d, rng)?;
                let f =
                    qfim_from_spectral(&spectral_output(&p, eta)?, &equatorial_derivatives(&p))?;
                indep.see(f.max_diff(&reference));
            }
        }
    }
    report.record("phi_independence", indep.0, 1e-10);

    let (mut first, mut second, mut diff, mut tele) = (
        Worst::default(),
        Worst::default(),
        Worst::default(),
        Worst::default(),
    );
    for d in 2..=12 {
        let s = derivative_sums_at(&PhaseVector::random(d, rng)?)?;
        first.see((s.first - s.first_closed).abs());
        second.see((s.second - s.second_closed).abs());
        diff.see((s.difference() - qfim_uqcm_closed(d)?.diagonal).abs());
        tele.see((telescoping_sum(d) - (1.0 - 1.0 / d as f64)).abs());
    }
    report.record("appendix_b_sums", first.0.max(second.0), 1e-10);
    report.record("derivative_first_sum", first.0, 1e-10);
    report.record("derivative_second_sum", second.0, 1e-10);
    report.record("derivative_difference", diff.0, 1e-10);
    report.record("telescoping_identity", tele.0, 1e-14);
    Ok(())
}

fn check_bounds(report: &mut Report) -> Result<()> {
    let (mut exact, mut order, mut spec) = (Worst::default(), Worst::default(), Worst::default());
    for d in 2..=64 {
        let b = total_variance_bound(d, 1.0)?;
        exact.see((b.total_variance_min - (d * (d - 1) / 2) as f64).abs());
        let e_u = total_variance_bound(d, eta_uqcm(d))?.total_variance_min;
        let e_p = total_variance_bound(d, eta_pqcm(d))?.total_variance_min;
        order.see((b.total_variance_min - e_p).max(0.0));
        order.see((e_p - e_u).max(0.0));
    }
    report.record("variance_pure_exact", exact.0, 0.0);
    report.record("variance_ordering", order.0, 0.0);

    let mut trace = Worst::default();
    for d in 2..=32 {
        for eta in [0.3, 0.5, eta_uqcm(d), eta_pqcm(d), 1.0] {
            let b = total_variance_bound(d, eta)?;
            let f = qfim_shrink_closed(d, eta)?.to_matrix();
            trace.see((b.total_variance_min - dense_trace_of_inverse(&f)?).abs());
            let s = qfim_eigenvalues(&f)?;
            let mut eig: Vec<f64> = f
                .entries()
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .collect();
            eig.sort_by(f64::total_cmp);
            spec.see((eig[0] - s.lambda1).abs());
            for v in &eig[1..] {
                spec.see((v - s.lambda2).abs());
            }
        }
    }
    report.record("variance_trace_inverse", trace.0, 1e-8);
    report.record("qfim_spectrum_dense", spec.0, 1e-10);

    let mut mono = Worst::default();
    for d in [2usize, 3, 8, 20] {
        let mut prev = f64::INFINITY;
        for k in 1..=10 {
            let v = total_variance_bound(d, f64::from(k) / 10.0)?.total_variance_min;
            mono.see((v - prev).max(0.0));
            prev = v;
        }
    }
    report.record("variance_monotone_in_eta", mono.0, 0.0);
    Ok(())
}

fn check_oracle(
    report: &mut Report,
    rng: &mut ChaCha8Rng,
    dims: std::ops::RangeInclusive<usize>,
    relation: &mut Worst,
) -> Result<()> {
    let h = report.cfg.fd_step;
    let (mut agree, mut residual, mut antisym) =
        (Worst::default(), Worst::default(), Worst::default());
    let (mut att_num, mut att_closed, mut att_dual, mut att_forms) = (
        Worst::default(),
        Worst::default(),
        Worst::default(),
        Worst::default(),
    );
    let mut numeric_relation = Worst::default();
    let mut step = Worst::default();
    for d in dims {
        let channels = [
            (ParamChannel::Pure, 1.0, qfim_pure(d)?),
            (ParamChannel::UqcmFull, eta_uqcm(d), qfim_uqcm_closed(d)?),
            (ParamChannel::PqcmFull, eta_pqcm(d), qfim_pqcm_closed(d)?),
            (
                ParamChannel::Shrink { eta: 0.4 },
                0.4,
                qfim_shrink_closed(d, 0.4)?,
            ),
        ];
        for draw in 0..10 {
            let p = PhaseVector::random(d, rng)?;
            let derivs = equatorial_derivatives(&p);
            for (ch, eta, closed) in &channels {
                let info = information_numeric(&ch.family(d), p.phases(), h)?;
                residual.see(info.max_sld_residual);
                antisym.see(info.antisymmetry_error);
                numeric_relation.see(info.qfim.relation_residual());
                if draw < 5 {
                    agree.see(closed_diff(&info.qfim, closed));
                }
                let sd = spectral_output(&p, *eta)?;
                let closed_l = attainability_closed(&sd, &derivs)?;
                let other_l = attainability_unsymmetrized(&sd, &derivs)?;
                att_closed.see(closed_l.max_abs());
                att_forms.see((closed_l.entries() - other_l.entries()).amax());
                att_num.see(info.attainability.max_abs());
                att_dual.see((closed_l.entries() - info.attainability.entries()).amax());
            }
        }
        let p = PhaseVector::random(d, rng)?;
        for ch in [ParamChannel::UqcmFull, ParamChannel::PqcmFull] {
            let coarse = qfim_numeric(ch, &p, 1e-4)?;
            let fine = qfim_numeric(ch, &p, 5e-5)?;
            step.see(coarse.max_diff(&fine));
        }
    }
    relation.see(numeric_relation.0);
    report.record("oracle_agreement", agree.0, 1e-5);
    report.record("oracle_step_robustness", step.0, 1e-6);
    report.record("sld_residual", residual.0, 1e-8);
    report.record("oracle_antisymmetry", antisym.0, 1e-10);
    report.record("attainability_closed", att_closed.0, 1e-10);
    report.record("attainability_forms_agree", att_forms.0, 1e-12);
    report.record("attainability_numeric", att_num.0, 1e-6);
    report.record("attainability_dual_path", att_dual.0, 1e-6);
    Ok(())
}

pub fn emit_report(
    report: &[CheckResult],
    path: Option<&Path>,
) -> std::result::Result<(), CliError> {
    let mut buf = serde_json::to_vec_pretty(report)?;
    buf.push(b'\n');
    super::output::write_bytes(&buf, path)
}

//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use clone_qfim::channels::{
    eta_pqcm, eta_uqcm, pqcm_full_output, reduce_first_qudit, shrink_output, uqcm_full_output,
};
use clone_qfim::crb::{attainability_closed, dense_trace_of_inverse, total_variance_bound};
use clone_qfim::linalg::{frobenius, min_symmetric_eigenvalue};
use clone_qfim::oracle::{attainability_numeric, qfim_numeric, ParamChannel, DEFAULT_FD_STEP};
use clone_qfim::qfim::{
    derivative_sums_at, equatorial_derivatives, qfim_from_spectral, qfim_pqcm_closed, qfim_pure,
    qfim_shrink_closed, qfim_uqcm_closed, spectral_output, EquatorialQfim, QFIMatrix,
};
use clone_qfim::states::PhaseVector;

type Outcome = Result<String, String>;

const SEED: u64 = 0x5EED_2014;

/// Largest |F_μμ + (d−1)F_μν| over every QFIM seen during the run.
#[derive(Default)]
struct Relation {
    worst: f64,
    count: usize,
}

impl Relation {
    fn dense(&mut self, f: &QFIMatrix) {
        self.push(f.relation_residual());
    }

    fn closed(&mut self, f: &EquatorialQfim) {
        self.push(f.relation_residual());
    }

    fn push(&mut self, r: f64) {
        self.count += 1;
        if r.is_nan() || r > self.worst {
            self.worst = r;
        }
    }
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn qubit_anchor(
    rel: &mut Relation,
    rng: &mut ChaCha8Rng,
    closed: EquatorialQfim,
    ch: ParamChannel,
    target: f64,
) -> Outcome {
    rel.closed(&closed);
    let closed_err = (closed.diagonal - target).abs();
    let mut numeric_err: f64 = 0.0;
    for _ in 0..5 {
        let p = PhaseVector::random(2, rng).map_err(fail)?;
        let f = qfim_numeric(ch, &p, DEFAULT_FD_STEP).map_err(fail)?;
        rel.dense(&f);
        numeric_err = numeric_err.max((f.get(0, 0) - target).abs());
    }
    ensure(
        closed_err <= 1e-14 && numeric_err <= 1e-5,
        format!("closed err {closed_err:.1e} (tol 1e-14), oracle err {numeric_err:.1e} (tol 1e-5)"),
    )
}

fn criterion_1(rel: &mut Relation, rng: &mut ChaCha8Rng) -> Outcome {
    qubit_anchor(
        rel,
        rng,
        qfim_uqcm_closed(2).map_err(fail)?,
        ParamChannel::UqcmFull,
        4.0 / 9.0,
    )
}

fn criterion_2(rel: &mut Relation, rng: &mut ChaCha8Rng) -> Outcome {
    qubit_anchor(
        rel,
        rng,
        qfim_pqcm_closed(2).map_err(fail)?,
        ParamChannel::PqcmFull,
        0.5,
    )
}

fn criterion_3(_: &mut Relation, rng: &mut ChaCha8Rng) -> Outcome {
    let (mut wu, mut wp) = (0.0f64, 0.0f64);
    for d in 2..=8 {
        for _ in 0..20 {
            let p = PhaseVector::random(d, rng).map_err(fail)?;
            let ru = reduce_first_qudit(&uqcm_full_output(&p).map_err(fail)?).map_err(fail)?;
            let rp = reduce_first_qudit(&pqcm_full_output(&p).map_err(fail)?).map_err(fail)?;
            let su = shrink_output(&p, eta_uqcm(d)).map_err(fail)?;
            let sp = shrink_output(&p, eta_pqcm(d)).map_err(fail)?;
            wu = wu.max(frobenius(&(ru.entries() - su.entries())));
            wp = wp.max(frobenius(&(rp.entries() - sp.entries())));
        }
    }
    ensure(
        wu <= 1e-10 && wp <= 1e-10,
        format!("max Frobenius UQCM {wu:.1e}, PQCM {wp:.1e} (tol 1e-10)"),
    )
}

fn criterion_4(rel: &mut Relation, rng: &mut ChaCha8Rng) -> Outcome {
    let (mut spectral, mut sums) = (0.0f64, 0.0f64);
    for d in 2..=10 {
        let p = PhaseVector::random(d, rng).map_err(fail)?;
        let derivs = equatorial_derivatives(&p);
        for (eta, closed) in [
            (eta_uqcm(d), qfim_uqcm_closed(d).map_err(fail)?),
            (eta_pqcm(d), qfim_pqcm_closed(d).map_err(fail)?),
        ] {
            let sd = spectral_output(&p, eta).map_err(fail)?;
            let f = qfim_from_spectral(&sd, &derivs).map_err(fail)?;
            rel.dense(&f);
            rel.closed(&closed);
            spectral = spectral.max(f.max_diff(&closed.to_matrix()));
        }
        let s = derivative_sums_at(&p).map_err(fail)?;
        let df = d as f64;
        let second = 2.0 * (df.powi(3) + 7.0 * df * df + 8.0 * df + 4.0)
            / ((df + 1.0) * (df + 4.0) * df * df);
        sums = sums
            .max((s.first - 4.0 / df).abs())
            .max((s.second - second).abs());
    }
    ensure(
        spectral <= 1e-10 && sums <= 1e-10,
        format!("spectral vs closed {spectral:.1e}, derivative sums {sums:.1e} (tol 1e-10)"),
    )
}

fn criterion_5(rel: &mut Relation, _: &mut ChaCha8Rng) -> Outcome {
    let mut lowest = f64::INFINITY;
    for d in 2..=64 {
        let u = qfim_uqcm_closed(d).map_err(fail)?;
        let p = qfim_pqcm_closed(d).map_err(fail)?;
        rel.closed(&u);
        rel.closed(&p);
        let diff = p.to_matrix().entries() - u.to_matrix().entries();
        lowest = lowest.min(min_symmetric_eigenvalue(&diff));
    }
    ensure(
        lowest >= -1e-12,
        format!("min eigenvalue of F_PQCM - F_UQCM {lowest:.3e} (floor -1e-12)"),
    )
}

fn criterion_6(rel: &mut Relation, _: &mut ChaCha8Rng) -> Outcome {
    let mut exact = true;
    let mut trace: f64 = 0.0;
    for d in 2..=64 {
        let b = total_variance_bound(d, 1.0).map_err(fail)?;
        exact &= b.total_variance_min == (d * (d - 1) / 2) as f64;
        for eta in [1.0, eta_uqcm(d), eta_pqcm(d)] {
            let f = qfim_shrink_closed(d, eta).map_err(fail)?;
            rel.closed(&f);
            let closed = total_variance_bound(d, eta)
                .map_err(fail)?
                .total_variance_min;
            let dense = dense_trace_of_inverse(&f.to_matrix()).map_err(fail)?;
            trace = trace.max((closed - dense).abs() / closed.max(1.0));
        }
    }
    let mut ordered = true;
    for d in 2..=20 {
        let e_in = total_variance_bound(d, 1.0)
            .map_err(fail)?
            .total_variance_min;
        let e_p = total_variance_bound(d, eta_pqcm(d))
            .map_err(fail)?
            .total_variance_min;
        let e_u = total_variance_bound(d, eta_uqcm(d))
            .map_err(fail)?
            .total_variance_min;
        ordered &= e_in < e_p && e_p < e_u;
    }
    ensure(
        exact && trace <= 1e-8 && ordered,
        format!("pure bound exact: {exact}, trace-of-inverse err {trace:.1e} (tol 1e-8), E_in < E_PQCM < E_UQCM: {ordered}"),
    )
}

fn criterion_7(rel: &mut Relation, rng: &mut ChaCha8Rng) -> Outcome {
    let (mut closed_max, mut numeric_max) = (0.0f64, 0.0f64);
    for d in 2..=8 {
        for _ in 0..10 {
            let p = PhaseVector::random(d, rng).map_err(fail)?;
            let derivs = equatorial_derivatives(&p);
            for (ch, eta) in [
                (ParamChannel::Pure, 1.0),
                (ParamChannel::UqcmFull, eta_uqcm(d)),
                (ParamChannel::PqcmFull, eta_pqcm(d)),
            ] {
                let sd = spectral_output(&p, eta).map_err(fail)?;
                closed_max =
                    closed_max.max(attainability_closed(&sd, &derivs).map_err(fail)?.max_abs());
                numeric_max = numeric_max.max(
                    attainability_numeric(ch, &p, DEFAULT_FD_STEP)
                        .map_err(fail)?
                        .max_abs(),
                );
                rel.dense(&qfim_numeric(ch, &p, DEFAULT_FD_STEP).map_err(fail)?);
            }
        }
    }
    ensure(
        closed_max <= 1e-10 && numeric_max <= 1e-6,
        format!("closed {closed_max:.1e} (tol 1e-10), numeric {numeric_max:.1e} (tol 1e-6)"),
    )
}

fn criterion_8(_: &mut Relation, _: &mut ChaCha8Rng) -> Outcome {
    let u = (eta_uqcm(100) - 0.5).abs();
    let p = (eta_pqcm(100) - 0.5).abs();
    let gap = (eta_pqcm(100) - eta_uqcm(100)).abs();
    let h = 1e-6;
    let mut min_slope = f64::INFINITY;
    for d in [2usize, 3, 5, 10, 20, 50, 100] {
        for k in 1..=19 {
            let eta = f64::from(k) / 20.0;
            let hi = qfim_shrink_closed(d, eta + h).map_err(fail)?.diagonal;
            let lo = qfim_shrink_closed(d, eta - h).map_err(fail)?.diagonal;
            min_slope = min_slope.min((hi - lo) / (2.0 * h));
        }
    }
    ensure(
        u < 0.02 && p < 0.02 && gap < 1e-3 && min_slope > 0.0,
        format!(
            "|eta_U-0.5| {u:.2e}, |eta_P-0.5| {p:.2e}, gap {gap:.2e}, min dF/deta {min_slope:.3e}"
        ),
    )
}

fn criterion_9(rel: &mut Relation, rng: &mut ChaCha8Rng) -> Outcome {
    for d in 2..=40 {
        rel.closed(&qfim_pure(d).map_err(fail)?);
        rel.closed(&qfim_shrink_closed(d, 0.3).map_err(fail)?);
    }
    for d in 2..=8 {
        let p = PhaseVector::random(d, rng).map_err(fail)?;
        let f =
            qfim_numeric(ParamChannel::Shrink { eta: 0.3 }, &p, DEFAULT_FD_STEP).map_err(fail)?;
        rel.dense(&f);
    }
    ensure(
        rel.worst <= 1e-10,
        format!(
            "max |F_mm + (d-1)F_mn| {:.1e} over {} matrices (tol 1e-10)",
            rel.worst, rel.count
        ),
    )
}

fn read_figure(n: u8) -> Result<Vec<Vec<f64>>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_clone-qfim"))
        .args(["figure", &n.to_string(), "--dmax", "20"])
        .output()
        .map_err(fail)?;
    if !out.status.success() {
        return Err(format!("figure {n} exited with {}", out.status));
    }
    let text = String::from_utf8(out.stdout).map_err(fail)?;
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(fail)?;
        rows.push(
            record
                .iter()
                .map(|s| s.parse::<f64>().map_err(fail))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    if rows.len() != 19 || rows.first().map(|r| r[0]) != Some(2.0) {
        return Err(format!(
            "figure {n}: expected d = 2..20, got {} rows",
            rows.len()
        ));
    }
    Ok(rows)
}

fn criterion_10(_: &mut Relation, _: &mut ChaCha8Rng) -> Outcome {
    let fig1 = read_figure(1)?;
    let inequality = fig1.iter().all(|r| r[3] <= r[2] && r[2] <= r[1]);

    let fig2 = read_figure(2)?;
    let above = fig2.iter().all(|r| r[2] >= r[1]);
    let gaps: Vec<f64> = fig2
        .iter()
        .filter(|r| r[0] >= 10.0)
        .map(|r| r[2] - r[1])
        .collect();
    let shrinking = gaps.windows(2).all(|w| w[1] < w[0]);

    let fig3 = read_figure(3)?;
    let ordering = fig3.iter().all(|r| r[1] < r[3] && r[3] < r[2]);
    ensure(
        inequality && above && shrinking && ordering,
        format!("fig1 F_out <= eta F_in: {inequality}; fig2 PQCM >= UQCM: {above}, gap shrinking d>=10: {shrinking}; fig3 ordering: {ordering}"),
    )
}

type Criterion = fn(&mut Relation, &mut ChaCha8Rng) -> Outcome;

fn main() -> ExitCode {
    let criteria: [(usize, &str, Criterion); 10] = [
        (1, "qubit UQCM anchor", criterion_1),
        (2, "qubit PQCM anchor", criterion_2),
        (3, "scaling-form fidelity", criterion_3),
        (4, "closed form vs spectral formula", criterion_4),
        (5, "matrix ordering", criterion_5),
        (6, "variance bounds", criterion_6),
        (7, "attainability", criterion_7),
        (8, "asymptotics and monotonicity", criterion_8),
        (10, "figure reproduction", criterion_10),
        // Last, so it covers every matrix produced above.
        (9, "relation invariant", criterion_9),
    ];
    let mut rel = Relation::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut lines = Vec::new();
    for (id, name, run) in criteria {
        let start = Instant::now();
        let outcome = run(&mut rel, &mut rng);
        let secs = start.elapsed().as_secs_f64();
        lines.push((id, name, outcome, secs));
    }
    lines.sort_by_key(|l| l.0);
    let mut failed = 0;
    for (id, name, outcome, secs) in &lines {
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {id:>2} {tag} [{secs:.3}s] {name}: {detail}");
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        lines.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

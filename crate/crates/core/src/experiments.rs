//! Benchmark problems and the table/plot data behind them: convergence in
//! space and time, stability histories, matrix dumps and sparsity reports,
//! all emitted as deterministic CSV.
//!
//! Problem 1 is manufactured: u = sin(pi x) sin(pi y) t^2 with the source
//! chosen so u solves the equation (the Caputo derivative of t^2 is
//! 2 t^(2-alpha)/Gamma(3-alpha)). Problem 2 is source-free decay from
//! g = x(x-1) sin(2 pi y); its errors are measured against a reference
//! solution of degree 10 computed with the same time step.

use std::sync::Arc;

use crate::band;
use crate::error::{Error, Result};
use crate::operators;
use crate::solver::{
    self, diffusion_weight, energy_norm, error_norms, l2_norm, solve, CoefficientField,
    FieldDeriv, SolverConfig, SourceFn, SpaceFn,
};
use statrs::function::gamma::gamma;

/// Degree of the reference solution for the source-free problem.
pub const EXAMPLE2_REFERENCE_DEGREE: usize = 10;

/// Parameter grid for one experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    /// Benchmark problem id: 1 (manufactured) or 2 (source-free).
    pub example: u8,
    pub alphas: Vec<f64>,
    pub kappa: f64,
    pub degrees: Vec<usize>,
    pub taus: Vec<f64>,
    pub t_final: f64,
    pub quad_points: usize,
    /// Grid size for the discrete L2/Linf norms.
    pub grid: usize,
    /// Report times; each must sit on the step grid.
    pub times: Vec<f64>,
}

impl ExperimentSpec {
    fn validate(&self) -> Result<()> {
        if self.example != 1 && self.example != 2 {
            return Err(Error::Usage(format!(
                "unknown example id {}; valid ids are 1 and 2",
                self.example
            )));
        }
        if self.alphas.is_empty() || self.degrees.is_empty() || self.taus.is_empty() {
            return Err(Error::Usage("alphas, degrees and taus must be non-empty".into()));
        }
        if self.times.is_empty() {
            return Err(Error::Usage("at least one report time is required".into()));
        }
        Ok(())
    }
}

/// One norm-report row of the error CSV.
#[derive(Debug, Clone)]
pub struct ErrorRow {
    pub example: u8,
    pub alpha: f64,
    pub kappa: f64,
    pub degree: usize,
    pub tau: f64,
    pub t: f64,
    pub linf: f64,
    pub l2: f64,
    pub h1: f64,
}

/// Error row plus observed rates against the previous refinement level.
#[derive(Debug, Clone)]
pub struct RateRow {
    pub row: ErrorRow,
    pub rate_linf: Option<f64>,
    pub rate_l2: Option<f64>,
    pub rate_h1: Option<f64>,
}

/// One step of a stability history.
#[derive(Debug, Clone)]
pub struct StabilityRow {
    pub k: usize,
    pub t: f64,
    pub energy: f64,
    pub l2: f64,
}

/// Stability history of one (alpha, N, tau) configuration.
#[derive(Debug, Clone)]
pub struct StabilityBlock {
    pub alpha: f64,
    pub degree: usize,
    pub tau: f64,
    pub initial_l2: f64,
    pub rows: Vec<StabilityRow>,
    /// Steps violating ||u^k||_1 <= ||u^0||_L2 (1 + 1e-8).
    pub violations: usize,
}

/// One line of the sparsity report.
#[derive(Debug, Clone)]
pub struct SparsityRow {
    pub degree: usize,
    pub order: usize,
    pub bandwidth: usize,
    pub nnz: usize,
    pub density: f64,
}

/// Solver configuration for one benchmark problem.
pub fn example_config(
    example: u8,
    alpha: f64,
    kappa: f64,
    degree: usize,
    tau: f64,
    t_final: f64,
    quad_points: usize,
) -> Result<SolverConfig> {
    let pi = std::f64::consts::PI;
    let (source, initial): (SourceFn, SpaceFn) = match example {
        1 => {
            let g3 = gamma(3.0 - alpha);
            let source: SourceFn = Arc::new(move |x, y, t| {
                (2.0 * t.powf(2.0 - alpha) / g3 + 2.0 * kappa * pi * pi * t * t)
                    * (pi * x).sin()
                    * (pi * y).sin()
            });
            (source, Arc::new(|_, _| 0.0))
        }
        2 => {
            let initial: SpaceFn =
                Arc::new(move |x, y| x * (x - 1.0) * (2.0 * pi * y).sin());
            (Arc::new(|_, _, _| 0.0), initial)
        }
        other => {
            return Err(Error::Usage(format!(
                "unknown example id {other}; valid ids are 1 and 2"
            )))
        }
    };
    Ok(SolverConfig {
        alpha,
        kappa,
        tau,
        t_final,
        degree,
        quad_points,
        source,
        initial,
    })
}

/// Exact solution of problem 1 at time `t` with its gradient.
pub fn example1_exact(t: f64) -> (SpaceFn, SpaceFn, SpaceFn) {
    let pi = std::f64::consts::PI;
    let u: SpaceFn = Arc::new(move |x, y| t * t * (pi * x).sin() * (pi * y).sin());
    let ux: SpaceFn = Arc::new(move |x, y| t * t * pi * (pi * x).cos() * (pi * y).sin());
    let uy: SpaceFn = Arc::new(move |x, y| t * t * pi * (pi * x).sin() * (pi * y).cos());
    (u, ux, uy)
}

/// Index of the step landing on report time `t`.
fn step_for_time(t: f64, tau: f64, steps: usize) -> Result<usize> {
    let k = (t / tau).round();
    if (k * tau - t).abs() > 1e-9 * t.abs().max(1.0) || k < 0.0 || k as usize > steps {
        return Err(Error::Usage(format!(
            "report time {t} does not sit on the step grid (tau = {tau}, T = {})",
            tau * steps as f64
        )));
    }
    Ok(k as usize)
}

fn norms_against_exact(
    field: &CoefficientField,
    u: &SpaceFn,
    ux: &SpaceFn,
    uy: &SpaceFn,
    grid: usize,
) -> Result<solver::ErrorNorms> {
    error_norms(
        field,
        &|x, y| u(x, y),
        &|x, y| ux(x, y),
        &|x, y| uy(x, y),
        grid,
    )
}

fn norms_against_field(
    field: &CoefficientField,
    reference: &CoefficientField,
    grid: usize,
) -> Result<solver::ErrorNorms> {
    error_norms(
        field,
        &|x, y| reference.evaluate(x, y).unwrap(),
        &|x, y| reference.evaluate_deriv(x, y, FieldDeriv::Dx).unwrap(),
        &|x, y| reference.evaluate_deriv(x, y, FieldDeriv::Dy).unwrap(),
        grid,
    )
}

/// Errors of one solved configuration at the requested times.
fn measure(
    spec: &ExperimentSpec,
    alpha: f64,
    degree: usize,
    tau: f64,
    result: &solver::SolveResult,
    reference: Option<&solver::SolveResult>,
) -> Result<Vec<ErrorRow>> {
    let mut rows = Vec::new();
    for &t in &spec.times {
        let k = step_for_time(t, tau, result.steps)?;
        let field = result.field(k);
        let norms = match spec.example {
            1 => {
                let (u, ux, uy) = example1_exact(t);
                norms_against_exact(field, &u, &ux, &uy, spec.grid)?
            }
            _ => {
                let reference = reference.expect("reference run required for example 2");
                let k_ref = step_for_time(t, reference.tau, reference.steps)?;
                norms_against_field(field, reference.field(k_ref), spec.grid)?
            }
        };
        rows.push(ErrorRow {
            example: spec.example,
            alpha,
            kappa: spec.kappa,
            degree,
            tau,
            t,
            linf: norms.linf,
            l2: norms.l2,
            h1: norms.h1,
        });
    }
    Ok(rows)
}

fn solve_reference(spec: &ExperimentSpec, alpha: f64, tau: f64) -> Result<solver::SolveResult> {
    let cfg = example_config(
        spec.example,
        alpha,
        spec.kappa,
        EXAMPLE2_REFERENCE_DEGREE,
        tau,
        spec.t_final,
        spec.quad_points,
    )?;
    solve(&cfg)
}

/// Runs every (alpha, N, tau) cell of the spec and reports error norms at
/// the requested times.
pub fn run_example(spec: &ExperimentSpec) -> Result<Vec<ErrorRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &alpha in &spec.alphas {
        for &degree in &spec.degrees {
            for &tau in &spec.taus {
                let cfg = example_config(
                    spec.example,
                    alpha,
                    spec.kappa,
                    degree,
                    tau,
                    spec.t_final,
                    spec.quad_points,
                )?;
                let result = solve(&cfg)?;
                let reference = if spec.example == 2 {
                    Some(solve_reference(spec, alpha, tau)?)
                } else {
                    None
                };
                rows.extend(measure(spec, alpha, degree, tau, &result, reference.as_ref())?);
            }
        }
    }
    Ok(rows)
}

fn observed_rate(e_cur: f64, e_prev: f64, h_cur: f64, h_prev: f64) -> Option<f64> {
    if e_cur <= 0.0 || e_prev <= 0.0 {
        return None;
    }
    Some((e_cur / e_prev).ln() / (h_cur / h_prev).ln())
}

/// Temporal refinement study: errors and rates as tau decreases, at each
/// requested time, grouped per (alpha, N).
pub fn convergence_in_time(spec: &ExperimentSpec) -> Result<Vec<RateRow>> {
    spec.validate()?;
    if spec.taus.len() < 2 {
        return Err(Error::Usage(
            "temporal convergence needs at least two step sizes".into(),
        ));
    }
    let mut taus = spec.taus.clone();
    taus.sort_by(|a, b| b.partial_cmp(a).unwrap()); // coarse to fine
    let mut out = Vec::new();
    for &alpha in &spec.alphas {
        for &degree in &spec.degrees {
            // one solve per tau, rows grouped per report time afterwards
            let mut per_tau: Vec<Vec<ErrorRow>> = Vec::new();
            for &tau in &taus {
                let cfg = example_config(
                    spec.example,
                    alpha,
                    spec.kappa,
                    degree,
                    tau,
                    spec.t_final,
                    spec.quad_points,
                )?;
                let result = solve(&cfg)?;
                let reference = if spec.example == 2 {
                    Some(solve_reference(spec, alpha, tau)?)
                } else {
                    None
                };
                per_tau.push(measure(spec, alpha, degree, tau, &result, reference.as_ref())?);
            }
            for (ti, _) in spec.times.iter().enumerate() {
                for (ri, rows) in per_tau.iter().enumerate() {
                    let row = rows[ti].clone();
                    let rate = if ri == 0 {
                        (None, None, None)
                    } else {
                        let prev = &per_tau[ri - 1][ti];
                        (
                            observed_rate(row.linf, prev.linf, row.tau, prev.tau),
                            observed_rate(row.l2, prev.l2, row.tau, prev.tau),
                            observed_rate(row.h1, prev.h1, row.tau, prev.tau),
                        )
                    };
                    out.push(RateRow {
                        row,
                        rate_linf: rate.0,
                        rate_l2: rate.1,
                        rate_h1: rate.2,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Spatial refinement study: errors and rates as N grows, at each requested
/// time, grouped per (alpha, tau). The rate uses the basis-dimension ratio:
/// rate = log(E_i/E_{i-1}) / log(N_{i-1}/N_i).
pub fn convergence_in_space(spec: &ExperimentSpec) -> Result<Vec<RateRow>> {
    spec.validate()?;
    if spec.degrees.len() < 2 {
        return Err(Error::Usage(
            "spatial convergence needs at least two degrees".into(),
        ));
    }
    let mut degrees = spec.degrees.clone();
    degrees.sort_unstable();
    let mut out = Vec::new();
    for &alpha in &spec.alphas {
        for &tau in &spec.taus {
            let reference = if spec.example == 2 {
                Some(solve_reference(spec, alpha, tau)?)
            } else {
                None
            };
            let mut per_degree: Vec<Vec<ErrorRow>> = Vec::new();
            for &degree in &degrees {
                let cfg = example_config(
                    spec.example,
                    alpha,
                    spec.kappa,
                    degree,
                    tau,
                    spec.t_final,
                    spec.quad_points,
                )?;
                let result = solve(&cfg)?;
                per_degree.push(measure(spec, alpha, degree, tau, &result, reference.as_ref())?);
            }
            for (ti, _) in spec.times.iter().enumerate() {
                for (di, rows) in per_degree.iter().enumerate() {
                    let row = rows[ti].clone();
                    let rate = if di == 0 {
                        (None, None, None)
                    } else {
                        let prev = &per_degree[di - 1][ti];
                        let (h_cur, h_prev) =
                            (1.0 / row.degree as f64, 1.0 / prev.degree as f64);
                        (
                            observed_rate(row.linf, prev.linf, h_cur, h_prev),
                            observed_rate(row.l2, prev.l2, h_cur, h_prev),
                            observed_rate(row.h1, prev.h1, h_cur, h_prev),
                        )
                    };
                    out.push(RateRow {
                        row,
                        rate_linf: rate.0,
                        rate_l2: rate.1,
                        rate_h1: rate.2,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Source-free stability histories: ||u^k||_1 and ||u^k||_L2 per step,
/// flagging violations of the bound by the initial L2 norm.
pub fn stability_run(spec: &ExperimentSpec) -> Result<Vec<StabilityBlock>> {
    spec.validate()?;
    if spec.example != 2 {
        return Err(Error::Usage(
            "stability runs require the source-free problem (example 2)".into(),
        ));
    }
    let mut blocks = Vec::new();
    for &alpha in &spec.alphas {
        for &degree in &spec.degrees {
            for &tau in &spec.taus {
                let cfg = example_config(
                    spec.example,
                    alpha,
                    spec.kappa,
                    degree,
                    tau,
                    spec.t_final,
                    spec.quad_points,
                )?;
                let result = solve(&cfg)?;
                let alpha0 = diffusion_weight(alpha, spec.kappa, tau);
                let initial_l2 = l2_norm(result.field(0))?;
                let bound = initial_l2 * (1.0 + 1e-8);
                let mut rows = Vec::with_capacity(result.steps + 1);
                let mut violations = 0;
                for k in 0..=result.steps {
                    let energy = energy_norm(result.field(k), alpha0)?;
                    let l2 = l2_norm(result.field(k))?;
                    if k > 0 && energy > bound {
                        violations += 1;
                    }
                    rows.push(StabilityRow {
                        k,
                        t: k as f64 * tau,
                        energy,
                        l2,
                    });
                }
                blocks.push(StabilityBlock {
                    alpha,
                    degree,
                    tau,
                    initial_l2,
                    rows,
                    violations,
                });
            }
        }
    }
    Ok(blocks)
}

/// Statistics of the assembled operator for each degree. The pattern does
/// not depend on the diffusion weight, so a unit weight is used.
pub fn sparsity_report(degrees: &[usize]) -> Result<Vec<SparsityRow>> {
    if degrees.is_empty() {
        return Err(Error::Usage("at least one degree is required".into()));
    }
    let mut rows = Vec::new();
    for &degree in degrees {
        let pg = operators::petrov_galerkin(degree)?;
        let m = band::assemble_system(&pg.mass, &pg.stiffness, 1.0)?;
        let order = m.order();
        let nnz = m.nnz();
        rows.push(SparsityRow {
            degree,
            order,
            bandwidth: m.lower_bandwidth(),
            nnz,
            density: nnz as f64 / (order * order) as f64,
        });
    }
    Ok(rows)
}

/// Nonzero pattern of the assembled operator as (row, col) pairs.
pub fn sparsity_pattern(degree: usize) -> Result<Vec<(usize, usize)>> {
    let pg = operators::petrov_galerkin(degree)?;
    let m = band::assemble_system(&pg.mass, &pg.stiffness, 1.0)?;
    Ok(m.nonzero_pattern())
}

// ---------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------

/// C-style `%.6e` formatting: fixed six-digit mantissa, sign and two-digit
/// exponent, so identical runs produce byte-identical files.
pub fn format_e6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.6e}");
    let (mantissa, exponent) = s.split_once('e').expect("exponential format");
    let (sign, digits) = match exponent.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exponent),
    };
    format!("{mantissa}e{sign}{digits:0>2}")
}

/// Schema: `example,alpha,kappa,N,tau,t,linf,l2,h1`.
pub fn errors_csv(rows: &[ErrorRow]) -> String {
    let mut out = String::from("example,alpha,kappa,N,tau,t,linf,l2,h1\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.example,
            format_e6(r.alpha),
            format_e6(r.kappa),
            r.degree,
            format_e6(r.tau),
            format_e6(r.t),
            format_e6(r.linf),
            format_e6(r.l2),
            format_e6(r.h1),
        ));
    }
    out
}

/// Error schema plus `rate_linf,rate_l2,rate_h1`; empty fields on the
/// first row of each refinement sequence.
pub fn rates_csv(rows: &[RateRow]) -> String {
    let mut out = String::from("example,alpha,kappa,N,tau,t,linf,l2,h1,rate_linf,rate_l2,rate_h1\n");
    let fmt_rate = |r: Option<f64>| r.map(format_e6).unwrap_or_default();
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.row.example,
            format_e6(r.row.alpha),
            format_e6(r.row.kappa),
            r.row.degree,
            format_e6(r.row.tau),
            format_e6(r.row.t),
            format_e6(r.row.linf),
            format_e6(r.row.l2),
            format_e6(r.row.h1),
            fmt_rate(r.rate_linf),
            fmt_rate(r.rate_l2),
            fmt_rate(r.rate_h1),
        ));
    }
    out
}

/// Schema: `k,t,energy_norm,l2_norm`, one commented parameter line per
/// configuration block.
pub fn stability_csv(blocks: &[StabilityBlock]) -> String {
    let mut out = String::from("k,t,energy_norm,l2_norm\n");
    for b in blocks {
        out.push_str(&format!(
            "# alpha={} N={} tau={} initial_l2={} violations={}\n",
            format_e6(b.alpha),
            b.degree,
            format_e6(b.tau),
            format_e6(b.initial_l2),
            b.violations
        ));
        for r in &b.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.k,
                format_e6(r.t),
                format_e6(r.energy),
                format_e6(r.l2)
            ));
        }
    }
    out
}

/// Schema: `N,order,bandwidth,nnz,density`.
pub fn sparsity_csv(rows: &[SparsityRow]) -> String {
    let mut out = String::from("N,order,bandwidth,nnz,density\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.degree,
            r.order,
            r.bandwidth,
            r.nnz,
            format_e6(r.density)
        ));
    }
    out
}

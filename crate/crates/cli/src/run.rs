//! One runner per subject. Points are computed in parallel and then settled
//! in axis order, so both the table and the first reported error are
//! independent of the worker count.

use giant_atom::circuit::{atom_coupling_g, qubit_spectrum, waveguide_constants, KineticScheme, PhaseGrid};
use giant_atom::fit::{even_quadratic, quadratic, LinearFit};
use giant_atom::lattice::{evolve, measured_survival, memory_kernel, memory_kernel_quadrature, OracleConfig};
use giant_atom::waveguide::lamb_shift_closed;
use giant_atom::zeno::{baseline_rate, classify_with, decay_rate, ScanOptions, NO_DECAY_THRESHOLD};
use giant_atom::{CircuitParams, WaveguideModel};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{Layout, OracleMode, RwaMode, Scheme, Subject, SweepSpec, ZenoOutput};
use crate::error::{CliError, Result};
use crate::format::{Cell, Row, Table};

/// A finished sweep: the table plus subject-specific results for the sidecar.
#[derive(Debug)]
pub struct Output {
    pub table: Table,
    pub results: Map<String, Value>,
}

#[derive(Debug, Clone, Copy)]
pub struct RunContext {
    /// Failed points become rows with a reason instead of aborting the sweep.
    pub continue_on_error: bool,
}

type PointResult<T> = std::result::Result<T, String>;

impl RunContext {
    fn settle<T>(&self, r: giant_atom::Result<T>) -> Result<PointResult<T>> {
        match r {
            Ok(v) => Ok(Ok(v)),
            Err(e) if self.continue_on_error => {
                log::warn!("point failed: {e}");
                Ok(Err(e.to_string()))
            }
            Err(e) => Err(e.into()),
        }
    }

    fn settle_all<T>(&self, rs: Vec<giant_atom::Result<T>>) -> Result<Vec<PointResult<T>>> {
        rs.into_iter().map(|r| self.settle(r)).collect()
    }
}

pub fn run(spec: &SweepSpec, ctx: &RunContext) -> Result<Output> {
    match spec.subject {
        Subject::Spectrum => spectrum(spec, ctx),
        Subject::Coupling => coupling(spec, ctx),
        Subject::Lambshift => lambshift(spec, ctx),
        Subject::Zeno => zeno(spec, ctx),
        Subject::Classify => classify(spec, ctx),
        Subject::Oracle => match spec.numerics.oracle_mode {
            OracleMode::Trajectory => trajectory(spec),
            OracleMode::Kernel => kernel(spec, ctx),
            OracleMode::Measured => measured(spec, ctx),
        },
    }
}

fn circuit_params(spec: &SweepSpec) -> CircuitParams {
    CircuitParams {
        e_j: spec.list("e_j")[0],
        c_j: spec.list("c_j")[0],
        alpha: spec.list("alpha")[0],
        f: spec.list("f")[0],
        c_t: spec.list("c_t")[0],
        l_t: spec.list("l_t")[0],
        dx: spec.list("dx")[0],
        flux_unit: spec.list("flux_unit")[0],
    }
}

fn phase_grid(spec: &SweepSpec) -> PhaseGrid {
    let scheme = match spec.numerics.scheme {
        Scheme::Spectral => KineticScheme::Spectral,
        Scheme::CentralDifference => KineticScheme::CentralDifference,
    };
    PhaseGrid::square(spec.numerics.grid_n).with_scheme(scheme)
}

fn scan_options(spec: &SweepSpec) -> ScanOptions<f64> {
    ScanOptions {
        tau_min: spec.numerics.tau_min,
        tau_max: spec.numerics.tau_max,
        points: spec.numerics.scan_points,
        rel_tol: spec.numerics.tau_rel_tol,
    }
}

fn model(spec: &SweepSpec, g: f64, n: u32, rwa: bool) -> giant_atom::Result<WaveguideModel> {
    WaveguideModel::new(
        spec.scalar("omega_c"),
        spec.scalar("xi"),
        g,
        n,
        spec.scalar("omega_a"),
        rwa,
    )
}

fn as_count(x: f64) -> u32 {
    x as u32
}

/// `0.05` → `005`, `0.2` → `02`: the value's shortest decimal text without the point.
pub fn g_label(g: f64) -> String {
    format!("{g}").replace(['.', '-', '+'], "")
}

fn spectrum(spec: &SweepSpec, ctx: &RunContext) -> Result<Output> {
    let base = circuit_params(spec);
    let grid = phase_grid(spec);
    let n_levels = spec.numerics.n_levels;
    let fs = spec.list("f");
    let raw: Vec<_> = fs
        .par_iter()
        .map(|&f| qubit_spectrum(&base.with_flux(f), grid, n_levels))
        .collect();
    let mut columns = vec!["f".to_string()];
    columns.extend((0..n_levels).map(|i| format!("E{i}")));
    let mut table = Table::new(columns, ctx.continue_on_error);
    let mut splitting = Vec::new();
    for (&f, r) in fs.iter().zip(ctx.settle_all(raw)?) {
        let mut row = Row::new();
        row.num(f);
        match r {
            Ok(s) => {
                splitting.push(json!({ "f": f, "omega": s.omega, "m_sin": s.m_sin, "residual": s.residual }));
                for level in &s.levels {
                    row.num(*level);
                }
            }
            Err(e) => {
                row.fail_span(&e, n_levels);
            }
        }
        table.push(row);
    }
    let mut results = Map::new();
    results.insert("qubit".into(), Value::Array(splitting));
    Ok(Output { table, results })
}

fn coupling(spec: &SweepSpec, ctx: &RunContext) -> Result<Output> {
    let base = circuit_params(spec);
    let grid = phase_grid(spec);
    let c_ts = spec.list("c_t");
    // The loop spectrum is recomputed per point since M₊ depends on C_T.
    let raw: Vec<_> = c_ts
        .par_iter()
        .map(|&c_t| {
            let p = CircuitParams { c_t, ..base };
            let s = qubit_spectrum(&p, grid, 2)?;
            let (omega_c, xi) = waveguide_constants(&p);
            Ok((atom_coupling_g(&p, &s), omega_c, xi, s.omega))
        })
        .collect();
    let mut table = Table::new(["C_T", "g", "g_over_omega_c"], ctx.continue_on_error);
    let mut derived = Vec::new();
    for (&c_t, r) in c_ts.iter().zip(ctx.settle_all(raw)?) {
        let mut row = Row::new();
        row.num(c_t);
        match r {
            Ok((g, omega_c, xi, omega)) => {
                derived.push(json!({ "c_t": c_t, "omega_c": omega_c, "xi": xi, "omega": omega }));
                row.num(g).num(g / omega_c);
            }
            Err(e) => {
                row.fail_span(&e, 2);
            }
        }
        table.push(row);
    }
    let mut results = Map::new();
    results.insert("waveguide".into(), Value::Array(derived));
    Ok(Output { table, results })
}

fn fit_json(fit: Option<LinearFit<f64>>, names: &[&str]) -> Value {
    match fit {
        None => Value::Null,
        Some(fit) => {
            let mut m = Map::new();
            for (name, c) in names.iter().zip(&fit.coefficients) {
                m.insert((*name).into(), json!(c));
            }
            m.insert("rms_residual".into(), json!(fit.rms_residual));
            Value::Object(m)
        }
    }
}

fn lambshift(spec: &SweepSpec, ctx: &RunContext) -> Result<Output> {
    let (g, n) = (spec.scalar("g"), as_count(spec.scalar("n")));
    let xis = spec.list("xi");
    let raw: Vec<_> = xis
        .par_iter()
        .map(|&xi| {
            let m = WaveguideModel::new(spec.scalar("omega_c"), xi, g, n, spec.scalar("omega_a"), false)?;
            Ok((m.delta, lamb_shift_closed(&m)?))
        })
        .collect();
    let settled = ctx.settle_all(raw)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = xis
        .iter()
        .zip(&settled)
        .filter_map(|(&xi, r)| r.as_ref().ok().map(|(d, _)| (xi, *d)))
        .unzip();
    // δ(ξ) is even in ξ, so the primary fit has no linear term.
    let even = (xs.len() >= 2).then(|| even_quadratic(&xs, &ys).ok()).flatten();
    let full = (xs.len() >= 3).then(|| quadratic(&xs, &ys).ok()).flatten();
    let mut table = Table::new(
        ["xi", "delta_quadrature", "delta_closed", "fit_residual"],
        ctx.continue_on_error,
    );
    for (&xi, r) in xis.iter().zip(&settled) {
        let mut row = Row::new();
        row.num(xi);
        match r {
            Ok((dq, dc)) => {
                let residual = even
                    .as_ref()
                    .map(|f| dq - f.coefficients[0] - f.coefficients[1] * xi * xi);
                row.num(*dq).num(*dc).opt(residual);
            }
            Err(e) => {
                row.fail_span(e, 3);
            }
        }
        table.push(row);
    }
    let mut results = Map::new();
    results.insert(
        "fit".into(),
        json!({
            "even": fit_json(even, &["constant", "quadratic"]),
            "full": fit_json(full, &["constant", "linear", "quadratic"]),
        }),
    );
    Ok(Output { table, results })
}

struct Curve {
    g: f64,
    rwa: bool,
    r0: PointResult<f64>,
    rates: Vec<PointResult<f64>>,
}

fn zeno(spec: &SweepSpec, ctx: &RunContext) -> Result<Output> {
    let n = as_count(spec.scalar("n"));
    let taus = spec.list("tau");
    let gs = spec.list("g");
    let flags = spec.rwa().flags();
    let keys: Vec<(f64, bool)> = flags
        .iter()
        .flat_map(|&rwa| gs.iter().map(move |&g| (g, rwa)))
        .collect();

    let models: Vec<_> = keys.par_iter().map(|&(g, rwa)| model(spec, g, n, rwa)).collect();
    let models = ctx.settle_all(models)?;
    let mut curves = Vec::with_capacity(keys.len());
    for (&(g, rwa), m) in keys.iter().zip(&models) {
        let curve = match m {
            Err(e) => Curve {
                g,
                rwa,
                r0: Err(e.clone()),
                rates: vec![Err(e.clone()); taus.len()],
            },
            Ok(m) => {
                let r0 = ctx.settle(baseline_rate(m))?;
                let rates: Vec<_> = taus.par_iter().map(|&t| decay_rate(m, t)).collect();
                Curve {
                    g,
                    rwa,
                    r0,
                    rates: ctx.settle_all(rates)?,
                }
            }
        };
        curves.push(curve);
    }

    let threshold = NO_DECAY_THRESHOLD * spec.scalar("omega_a").abs();
    let decays = |c: &Curve| matches!(c.r0, Ok(r) if r >= threshold);
    let use_q = match spec.numerics.zeno_output {
        ZenoOutput::Q => true,
        ZenoOutput::Rate => false,
        ZenoOutput::Auto => curves.iter().all(decays),
    };

    // Under the RWA Q(τ) does not depend on g, so the Q form keeps one RWA column.
    let shown: Vec<&Curve> = curves
        .iter()
        .enumerate()
        .filter(|(i, c)| !(use_q && c.rwa && *i > 0 && curves[i - 1].rwa))
        .map(|(_, c)| c)
        .collect();
    let mut columns = vec!["tau".to_string()];
    for c in &shown {
        columns.push(match (use_q, c.rwa) {
            (true, true) => "Q_rwa".into(),
            (true, false) => format!("Q_beyond_g{}", g_label(c.g)),
            (false, true) => format!("R_rwa_g{}", g_label(c.g)),
            (false, false) => format!("R_g{}", g_label(c.g)),
        });
    }
    let mut table = Table::new(columns, ctx.continue_on_error);
    for (i, &tau) in taus.iter().enumerate() {
        let mut row = Row::new();
        row.num(tau);
        for c in &shown {
            let value = if use_q {
                match &c.r0 {
                    Ok(r0) if *r0 >= threshold => c.rates[i].clone().map(|r| r / r0),
                    Ok(r0) => {
                        let why = format!("no baseline decay (R0 = {r0:e}) so Q is undefined");
                        if !ctx.continue_on_error {
                            return Err(CliError::Physics(giant_atom::Error::Domain(why)));
                        }
                        Err(why)
                    }
                    Err(e) => Err(e.clone()),
                }
            } else {
                c.rates[i].clone()
            };
            row.value(&value);
        }
        table.push(row);
    }

    let summary: Vec<Value> = curves
        .iter()
        .zip(&models)
        .map(|(c, m)| {
            let m = m.as_ref().ok();
            json!({
                "g": c.g,
                "rwa": c.rwa,
                "r0": c.r0.as_ref().ok(),
                "delta": m.map(|m| m.delta),
                "omega_1": m.map(|m| m.omega_1),
            })
        })
        .collect();
    let mut results = Map::new();
    results.insert("output".into(), json!(if use_q { "q" } else { "rate" }));
    results.insert("curves".into(), Value::Array(summary));
    Ok(Output { table, results })
}

fn classify(spec: &SweepSpec, ctx: &RunContext) -> Result<Output> {
    let ns = spec.list("n");
    let gs = spec.list("g");
    let flags = spec.rwa().flags();
    let scan = scan_options(spec);
    let mut keys = Vec::new();
    for &n in ns {
        for &g in gs {
            for &rwa in flags {
                keys.push((as_count(n), g, rwa));
            }
        }
    }
    let raw: Vec<_> = keys
        .par_iter()
        .map(|&(n, g, rwa)| classify_with(&model(spec, g, n, rwa)?, &scan))
        .collect();
    let reports = ctx.settle_all(raw)?;

    let table = match spec.numerics.layout {
        Layout::Long => {
            let mut t = Table::new(
                ["n", "g", "rwa", "r0", "tau_star", "r0_tau_star", "classification"],
                ctx.continue_on_error,
            );
            for (&(n, g, rwa), r) in keys.iter().zip(&reports) {
                let mut row = Row::new();
                row.push(Cell::Int(n as u64)).num(g).push(Cell::Bool(rwa));
                match r {
                    Ok(rep) => {
                        row.num(rep.r0)
                            .opt(rep.tau_star)
                            .opt(rep.r0_tau_star())
                            .push(Cell::Text(rep.classification.to_string()));
                    }
                    Err(e) => {
                        row.fail_span(e, 4);
                    }
                }
                t.push(row);
            }
            t
        }
        Layout::Wide => {
            let mut columns = vec!["g".to_string()];
            for &n in ns {
                for &rwa in flags {
                    let suffix = match (flags.len(), rwa) {
                        (1, _) => String::new(),
                        (_, true) => "_rwa".into(),
                        (_, false) => "_beyond".into(),
                    };
                    columns.push(format!("r0_tau_star_n{}{suffix}", as_count(n)));
                }
            }
            let mut t = Table::new(columns, ctx.continue_on_error);
            let per_n = gs.len() * flags.len();
            for (gi, &g) in gs.iter().enumerate() {
                let mut row = Row::new();
                row.num(g);
                for ni in 0..ns.len() {
                    for fi in 0..flags.len() {
                        match &reports[ni * per_n + gi * flags.len() + fi] {
                            Ok(rep) => row.opt(rep.r0_tau_star()),
                            Err(e) => row.fail(e),
                        };
                    }
                }
                t.push(row);
            }
            t
        }
    };
    Ok(Output {
        table,
        results: Map::new(),
    })
}

fn oracle_config(spec: &SweepSpec, model: &WaveguideModel, t_max: f64) -> OracleConfig<f64> {
    let num = &spec.numerics;
    let mut config = match num.n_sites {
        Some(n) => OracleConfig::new(n, t_max),
        None => OracleConfig::for_horizon(model, t_max),
    };
    config.dt = num.dt;
    config.record_every = num.record_every;
    config
}

fn trajectory(spec: &SweepSpec) -> Result<Output> {
    let t_max = spec
        .numerics
        .t_max
        .ok_or_else(|| CliError::MissingParameter("numerics.t_max".into()))?;
    let m = model(
        spec,
        spec.scalar("g"),
        as_count(spec.scalar("n")),
        spec.rwa() == RwaMode::On,
    )?;
    let config = oracle_config(spec, &m, t_max);
    let traj = evolve(&m, &config)?;
    let mut table = Table::new(["t", "re_alpha", "im_alpha", "survival"], false);
    for (t, a) in traj.times.iter().zip(&traj.alpha) {
        let mut row = Row::new();
        row.num(*t).num(a.re).num(a.im).num(a.norm_sqr());
        table.push(row);
    }
    let mut results = Map::new();
    results.insert("n_sites".into(), json!(config.n_sites));
    results.insert("nominal_dt".into(), json!(config.step(&m)));
    results.insert("horizon".into(), json!(config.horizon(&m)));
    results.insert("norm_drift".into(), json!(traj.norm_drift));
    results.insert("r0".into(), json!(baseline_rate(&m).ok()));
    results.insert("omega_1".into(), json!(m.omega_1));
    Ok(Output { table, results })
}

fn kernel(spec: &SweepSpec, ctx: &RunContext) -> Result<Output> {
    // Φ(t) involves only the bath and the coupling points; the atom frequency
    // passed here is a placeholder that never enters the kernel.
    let omega_c = spec.scalar("omega_c");
    let m = WaveguideModel::new(
        omega_c,
        spec.scalar("xi"),
        spec.scalar("g"),
        as_count(spec.scalar("n")),
        omega_c,
        true,
    )?;
    let ts = spec.list("t");
    let raw: Vec<_> = ts
        .par_iter()
        .map(|&t| memory_kernel_quadrature(&m, t).map(|q| (memory_kernel(&m, t), q)))
        .collect();
    let mut table = Table::new(
        ["t", "re_phi", "im_phi", "re_phi_quadrature", "im_phi_quadrature"],
        ctx.continue_on_error,
    );
    for (&t, r) in ts.iter().zip(ctx.settle_all(raw)?) {
        let mut row = Row::new();
        row.num(t);
        match r {
            Ok((a, b)) => {
                row.num(a.re).num(a.im).num(b.re).num(b.im);
            }
            Err(e) => {
                row.fail_span(&e, 4);
            }
        }
        table.push(row);
    }
    Ok(Output {
        table,
        results: Map::new(),
    })
}

fn measured(spec: &SweepSpec, ctx: &RunContext) -> Result<Output> {
    let cycles = as_count(spec.scalar("m"));
    let m = model(
        spec,
        spec.scalar("g"),
        as_count(spec.scalar("n")),
        spec.rwa() == RwaMode::On,
    )?;
    let taus = spec.list("tau");
    let longest = taus.iter().cloned().fold(0.0, f64::max);
    let config = oracle_config(spec, &m, longest);
    let r0 = baseline_rate(&m)?;
    let raw: Vec<_> = taus
        .par_iter()
        .map(|&tau| measured_survival(&m, &config, tau, cycles))
        .collect();
    let mut table = Table::new(["tau", "survival", "rate", "r0"], ctx.continue_on_error);
    for (&tau, r) in taus.iter().zip(ctx.settle_all(raw)?) {
        let mut row = Row::new();
        row.num(tau);
        match r {
            Ok(p) => {
                let rate = (cycles > 0).then(|| -p.ln() / (cycles as f64 * tau));
                row.num(p).opt(rate);
            }
            Err(e) => {
                row.fail_span(&e, 2);
            }
        }
        row.num(r0);
        table.push(row);
    }
    let mut results = Map::new();
    results.insert("n_sites".into(), json!(config.n_sites));
    results.insert("nominal_dt".into(), json!(config.step(&m)));
    results.insert("omega_1".into(), json!(m.omega_1));
    Ok(Output { table, results })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_drop_the_point() {
        assert_eq!(g_label(0.05), "005");
        assert_eq!(g_label(0.1), "01");
        assert_eq!(g_label(0.2), "02");
        assert_eq!(g_label(1.0), "1");
    }
}

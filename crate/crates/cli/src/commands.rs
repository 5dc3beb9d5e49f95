use std::fmt::Write as _;
use std::fs;

use oqs_core::gksl::{check_kossakowski_conditions, Partition};
use oqs_core::liouville::{hermitian_part, min_eigenvalue, Operator};
use oqs_core::maps::{
    divisibility_witness, family_from_csv, is_cp, is_trace_preserving, DynamicalMap, IntervalStatus, TOL_CP,
};
use oqs_core::nonmarkov::{
    coarse_grain_evolve, memory_kernel_evolve, memory_kernel_evolve_with, post_markovian_evolve,
    post_markovian_evolve_with, tcl2_evolve, tcl2_evolve_with, Trajectory,
};
use oqs_core::random::seeded;
use oqs_core::spectra::{is_relaxing, liouvillian_spectrum, spohn_check, steady_states, TOL_ZERO};
use oqs_core::weak_coupling::{davies_generator, kms_check, stationarity_check, DaviesGenerator};
use oqs_core::{par, DensityMatrix, Superoperator};

use crate::config::{BathSpec, CheckKind, RunConfig, Scheme};
use crate::io::{format_matrix_csv, num};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io(_) => 2,
            Self::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Self::Config(m) | Self::Io(m) | Self::Numerical(m) => m,
        }
    }
}

impl From<oqs_core::Error> for CliError {
    fn from(e: oqs_core::Error) -> Self {
        Self::Numerical(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    pub seed: u64,
    pub tol: Option<f64>,
}

/// Rendered command output and whether every requested verification passed.
#[derive(Debug)]
pub struct Report {
    pub text: String,
    pub passed: bool,
}

impl Report {
    fn ok(text: String) -> Self {
        Self { text, passed: true }
    }
}

struct Generator {
    l: Superoperator,
    jumps: Vec<Operator>,
    davies: Option<DaviesGenerator>,
}

fn davies(cfg: &RunConfig) -> Result<Option<(DaviesGenerator, &BathSpec)>> {
    match (&cfg.model.system, &cfg.bath) {
        (Some(system), Some(spec)) => Ok(Some((davies_generator(system, &spec.bath, spec.coupling)?, spec))),
        _ => Ok(None),
    }
}

fn generator(cfg: &RunConfig) -> Result<Generator> {
    if let Some((d, _)) = davies(cfg)? {
        let jumps = d
            .generator
            .jumps()
            .iter()
            .filter(|j| j.rate > 0.0)
            .map(|j| j.op.clone())
            .collect();
        return Ok(Generator {
            l: d.superop(),
            jumps,
            davies: Some(d),
        });
    }
    if let Some(g) = &cfg.model.generator {
        return Ok(Generator {
            l: g.superop(),
            jumps: g
                .jumps()
                .iter()
                .filter(|j| j.rate > 0.0)
                .map(|j| j.op.clone())
                .collect(),
            davies: None,
        });
    }
    Err(CliError::Config(format!(
        "{}: the model has no generator; add a [bath] section (with coupling operators) or jumps/rates in [model]",
        cfg.path.display()
    )))
}

fn trajectory_csv(cfg: &RunConfig, times: &[f64], states: &[Operator], min_eig_column: bool) -> String {
    let mut out = String::from("t");
    for (name, _) in &cfg.observables {
        out.push(',');
        out.push_str(name);
    }
    if min_eig_column {
        out.push_str(",min_eigenvalue");
    }
    out.push('\n');
    for (t, rho) in times.iter().zip(states) {
        out.push_str(&num(*t));
        for (_, o) in &cfg.observables {
            let v = (o * rho).trace().re;
            out.push(',');
            out.push_str(&num(v));
        }
        if min_eig_column {
            out.push(',');
            out.push_str(&num(min_eigenvalue(&hermitian_part(rho))));
        }
        out.push('\n');
    }
    out
}

fn markov_states(l: &Superoperator, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<Operator>> {
    let states = par::map_slice(times, |&t| l.exp_t(t).map(|p| p.apply(rho0.op())));
    Ok(states.into_iter().collect::<oqs_core::Result<Vec<_>>>()?)
}

pub fn evolve(cfg: &RunConfig) -> Result<Report> {
    if cfg.solver.scheme != Scheme::Markov {
        return Err(CliError::Config(format!(
            "{}: scheme {} is a non-Markovian scheme; run the nonmarkov verb",
            cfg.path.display(),
            cfg.solver.scheme.name()
        )));
    }
    let g = generator(cfg)?;
    let states = markov_states(&g.l, &cfg.initial, &cfg.solver.output_times)?;
    Ok(Report::ok(trajectory_csv(
        cfg,
        &cfg.solver.output_times,
        &states,
        false,
    )))
}

fn system_and_bath(cfg: &RunConfig) -> Result<(&oqs_core::weak_coupling::SystemModel, &BathSpec)> {
    match (&cfg.model.system, &cfg.bath) {
        (Some(s), Some(b)) => Ok((s, b)),
        _ => Err(CliError::Config(format!(
            "{}: this command needs coupling operators and a [bath] section",
            cfg.path.display()
        ))),
    }
}

pub fn nonmarkov(cfg: &RunConfig) -> Result<Report> {
    let times = &cfg.solver.output_times;
    let rho0 = &cfg.initial;
    let traj: Trajectory = match cfg.solver.scheme {
        Scheme::Markov => {
            let g = generator(cfg)?;
            Trajectory::new(times.clone(), markov_states(&g.l, rho0, times)?, None)
        }
        Scheme::MemoryKernel | Scheme::PostMarkovian => {
            let g = generator(cfg)?;
            let kernel = cfg.solver.kernel.as_ref().expect("validated with the config");
            match (cfg.solver.scheme, cfg.solver.max_step) {
                (Scheme::MemoryKernel, None) => memory_kernel_evolve(&g.l, kernel, rho0, times)?,
                (Scheme::MemoryKernel, Some(h)) => memory_kernel_evolve_with(&g.l, kernel, rho0, times, h)?,
                (_, None) => post_markovian_evolve(&g.l, kernel, rho0, times)?,
                (_, Some(h)) => post_markovian_evolve_with(&g.l, kernel, rho0, times, h)?,
            }
        }
        Scheme::Tcl2 => {
            let (system, spec) = system_and_bath(cfg)?;
            match cfg.solver.max_step {
                None => tcl2_evolve(system, &spec.bath, spec.coupling, rho0, times)?,
                Some(h) => tcl2_evolve_with(system, &spec.bath, spec.coupling, rho0, times, h)?,
            }
        }
        Scheme::CoarseGrain => {
            let (system, spec) = system_and_bath(cfg)?;
            coarse_grain_evolve(system, &spec.bath, spec.coupling, rho0, times)?
        }
    };
    if traj.positivity_violated() {
        eprintln!(
            "warning: trajectory leaves the state space (min eigenvalue {})",
            num(traj.min_eigenvalue)
        );
    }
    Ok(Report::ok(trajectory_csv(cfg, &traj.times, &traj.states, true)))
}

fn indent_matrix(out: &mut String, m: &Operator) {
    for line in format_matrix_csv(m).lines() {
        let _ = writeln!(out, "  {line}");
    }
}

pub fn derive(cfg: &RunConfig) -> Result<Report> {
    let (system, _) = system_and_bath(cfg)?;
    let (d, spec) = davies(cfg)?.expect("system and bath present");
    let bath = &spec.bath;
    let temperature = bath.temperature;
    let mut out = String::new();
    let _ = writeln!(out, "model = {}", cfg.model.name);
    let _ = writeln!(out, "temperature = {}", num(temperature));
    let _ = writeln!(out, "coupling = {}", num(spec.coupling));
    let freqs: Vec<String> = d.blocks.iter().map(|b| num(b.omega)).collect();
    let _ = writeln!(out, "bohr_frequencies = {}", freqs.join(", "));
    for b in &d.blocks {
        let _ = writeln!(out, "\n[block omega = {}]", num(b.omega));
        if b.omega > 0.0 {
            let _ = writeln!(out, "two_pi_j = {}", num(2.0 * std::f64::consts::PI * bath.j(b.omega)));
        }
        let _ = writeln!(out, "gamma =");
        indent_matrix(&mut out, &b.gamma);
        let _ = writeln!(out, "shift =");
        indent_matrix(&mut out, &b.shift);
    }
    let _ = writeln!(out, "\n[lamb_shift]");
    indent_matrix(&mut out, &d.lamb_shift);
    let _ = writeln!(out, "\n[jumps]");
    for (k, j) in d.generator.jumps().iter().enumerate() {
        let _ = writeln!(out, "jump {k} rate = {}", num(j.rate));
        indent_matrix(&mut out, &j.op);
    }
    let kms = kms_check(&d, temperature, 1e-8)?;
    let stat = stationarity_check(&d, &system.h, temperature)?;
    let _ = writeln!(out, "\n[diagnostics]");
    let _ = writeln!(out, "kms_max_violation = {}", num(kms.max_violation));
    let _ = writeln!(out, "kms_passed = {}", kms.passed);
    let _ = writeln!(out, "stationarity_residual = {}", num(stat));
    for w in &d.warnings {
        eprintln!("warning: near-degenerate Bohr frequencies {w:?}");
    }
    Ok(Report::ok(out))
}

fn family(cfg: &RunConfig, g: Option<&Generator>) -> Result<Vec<(f64, DynamicalMap)>> {
    if let Some(path) = &cfg.checks.family {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        return family_from_csv(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())));
    }
    let g = g.expect("generator resolved for semigroup samples");
    let mut times = cfg.solver.output_times.clone();
    if times[0] > 0.0 {
        times.insert(0, 0.0);
    }
    let maps = par::map_slice(&times, |&t| {
        g.l.exp_t(t).map(|p| (t, DynamicalMap::new(p, format!("t={t}"))))
    });
    Ok(maps.into_iter().collect::<oqs_core::Result<Vec<_>>>()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    /// Some interval could not be tested because the earlier map is
    /// numerically singular.
    Inconclusive,
}

impl Status {
    fn word(self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Inconclusive => "inconclusive",
        }
    }
}

impl From<bool> for Status {
    fn from(pass: bool) -> Self {
        if pass {
            Self::Pass
        } else {
            Self::Fail
        }
    }
}

pub fn check(cfg: &RunConfig, opts: Options) -> Result<Report> {
    if cfg.checks.run.is_empty() {
        return Err(CliError::Config(format!(
            "{}: no checks requested; set run = cp, markov, kossakowski, spohn or relaxing in [checks]",
            cfg.path.display()
        )));
    }
    let needs_generator = cfg
        .checks
        .run
        .iter()
        .any(|c| !matches!(c, CheckKind::Cp | CheckKind::Markov) || cfg.checks.family.is_none());
    let g = if needs_generator { Some(generator(cfg)?) } else { None };
    let fam = if cfg
        .checks
        .run
        .iter()
        .any(|c| matches!(c, CheckKind::Cp | CheckKind::Markov))
    {
        Some(family(cfg, g.as_ref())?)
    } else {
        None
    };

    let mut out = format!("{:<12}{:<13}{}\n", "check", "result", "witness");
    let mut all = true;
    for &kind in &cfg.checks.run {
        let (status, witness) = match kind {
            CheckKind::Cp => {
                let tol = opts.tol.unwrap_or(TOL_CP);
                let fam = fam.as_ref().expect("family built");
                let mut pass = true;
                let mut min = f64::INFINITY;
                for (_, e) in fam {
                    let r = is_cp(e, tol);
                    pass &= r.verdict && is_trace_preserving(e, tol.max(1e-10));
                    min = min.min(r.min_choi_eigenvalue);
                }
                (
                    Status::from(pass),
                    format!("min_choi_eigenvalue={} maps={}", num(min), fam.len()),
                )
            }
            CheckKind::Markov => {
                let tol = opts.tol.unwrap_or(TOL_CP);
                let rep = divisibility_witness(fam.as_ref().expect("family built"), tol)?;
                let failing = rep
                    .intervals
                    .iter()
                    .filter(|r| matches!(r.status, IntervalStatus::NotCp { .. }))
                    .count();
                let inconclusive = rep
                    .intervals
                    .iter()
                    .filter(|r| matches!(r.status, IntervalStatus::Inconclusive { .. }))
                    .count();
                let min = rep.min_choi_eigenvalue().map(num).unwrap_or_else(|| "none".into());
                let status = match (rep.markovian_on_grid, failing) {
                    (true, _) => Status::Pass,
                    (false, 0) => Status::Inconclusive,
                    _ => Status::Fail,
                };
                (
                    status,
                    format!(
                        "min_choi_eigenvalue={min} failing_intervals={failing} inconclusive={inconclusive} intervals={}",
                        rep.intervals.len()
                    ),
                )
            }
            CheckKind::Kossakowski => {
                let g = g.as_ref().expect("generator resolved");
                let n = g.l.dim();
                let tol = opts.tol.unwrap_or(1e-10 * g.l.norm().max(1.0));
                let mut rng = seeded(opts.seed, 0);
                let mut parts = vec![Partition::computational(n)];
                parts.extend((0..cfg.checks.partitions).map(|_| Partition::random(n, &mut rng)));
                let rep = check_kossakowski_conditions(&g.l, &parts, tol)?;
                let mut w = format!("max_column_sum={} partitions={}", num(rep.max_column_sum), parts.len());
                if let Some(v) = rep.first_violation {
                    let _ = write!(w, " violation={v:?}");
                }
                (Status::from(rep.passed()), w)
            }
            CheckKind::Spohn => {
                let g = g.as_ref().expect("generator resolved");
                if g.jumps.is_empty() {
                    (Status::Fail, "no jump operators".to_string())
                } else {
                    let rep = spohn_check(&g.jumps)?;
                    (
                        Status::from(rep.relaxing_guaranteed),
                        format!(
                            "self_adjoint_set={} commutant_dim={} relaxing_guaranteed={}",
                            rep.self_adjoint_set, rep.commutant_dim, rep.relaxing_guaranteed
                        ),
                    )
                }
            }
            CheckKind::Relaxing => {
                let g = g.as_ref().expect("generator resolved");
                let v = is_relaxing(&g.l, opts.tol.unwrap_or(TOL_ZERO))?;
                (
                    Status::from(v.verdict),
                    format!(
                        "spectral_gap={} zero_multiplicity={} reason={:?}",
                        num(v.spectral_gap),
                        v.zero_multiplicity,
                        v.reason
                    ),
                )
            }
        };
        all &= status == Status::Pass;
        let _ = writeln!(out, "{:<12}{:<13}{}", kind.name(), status.word(), witness);
    }
    Ok(Report { text: out, passed: all })
}

pub fn steady(cfg: &RunConfig, opts: Options) -> Result<Report> {
    let g = generator(cfg)?;
    let tol = opts.tol.unwrap_or(TOL_ZERO);
    let ss = steady_states(&g.l, tol)?;
    let v = is_relaxing(&g.l, tol)?;
    let mut out = String::new();
    let _ = writeln!(out, "kernel_dim = {}", ss.kernel_dim);
    let _ = writeln!(out, "relaxing = {} ({:?})", v.verdict, v.reason);
    let _ = writeln!(out, "spectral_gap = {}", num(v.spectral_gap));
    if let Some(d) = &g.davies {
        if let Some(spec) = &cfg.bath {
            let r = stationarity_check(d, &cfg.model.h, spec.bath.temperature)?;
            let _ = writeln!(out, "thermal_residual = {}", num(r));
        }
    }
    for (k, s) in ss.states.iter().enumerate() {
        let _ = writeln!(out, "\n[state {k}]");
        for (name, o) in &cfg.observables {
            let _ = writeln!(out, "{name} = {}", num(s.expectation(o).re));
        }
        let _ = writeln!(out, "rho =");
        indent_matrix(&mut out, s.op());
    }
    Ok(Report::ok(out))
}

pub fn spectrum(cfg: &RunConfig, opts: Options) -> Result<Report> {
    let g = generator(cfg)?;
    let rep = liouvillian_spectrum(&g.l, opts.tol.unwrap_or(TOL_ZERO))?;
    let mut out = String::new();
    let _ = writeln!(out, "# zero_multiplicity = {}", rep.zero_multiplicity);
    let _ = writeln!(out, "# spectral_gap = {}", num(rep.spectral_gap));
    let _ = writeln!(out, "# diagonalizable = {}", rep.diagonalizable);
    let _ = writeln!(out, "index,re,im");
    for (k, z) in rep.eigenvalues.iter().enumerate() {
        let _ = writeln!(out, "{k},{},{}", num(z.re), num(z.im));
    }
    Ok(Report::ok(out))
}

use std::path::Path;

use serde::Serialize;
use stickslip::batch::par_map;
use stickslip::hybridsim::{simulate, ConvergenceClass, CycleMetrics, SimConfig, TerminalAttractor, Trajectory};
use stickslip::stability::{gas_check, harmonic_balance, solve_lyapunov_closed_form};
use stickslip::sysmodel::{State, SystemParams};

use crate::args::{Format, SimulateArgs, SourceArgs, SweepArgs};
use crate::config::{ComplexRootsSpec, ParamsSpec, RealRootsSpec, RootsSpec, ScenarioSpec};
use crate::error::CliError;
use crate::output::{csv_writer, events_json, metrics_json, to_json, trajectory_json, write_trajectory_csv};
use crate::scenarios;

/// Builds the scenario described by the source flags.
pub fn scenario_from_source(src: &SourceArgs, need_initial: bool) -> Result<ScenarioSpec, CliError> {
    let mut spec = if let Some(path) = &src.config {
        ScenarioSpec::from_path(path)?
    } else if let Some(name) = &src.scenario {
        scenarios::builtin(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown scenario {name:?}; known: {}",
                scenarios::NAMES.join(", ")
            ))
        })?
    } else {
        let gamma = src.gamma.unwrap_or(1.0);
        let (params, roots) = if let Some([a, b, c]) = src.params {
            (Some(ParamsSpec { a, b, c, gamma }), None)
        } else if let Some(rates) = src.roots_real {
            (None, Some(RootsSpec::Real(RealRootsSpec { rates, gamma })))
        } else if let Some([lambda1, omega0, delta]) = src.roots_complex {
            (
                None,
                Some(RootsSpec::Complex(ComplexRootsSpec {
                    lambda1,
                    omega0,
                    delta,
                    gamma,
                })),
            )
        } else {
            return Err(CliError::Config("no parameter source given".into()));
        };
        ScenarioSpec {
            name: None,
            params,
            roots,
            initial: Vec::new(),
            horizon: crate::config::DEFAULT_HORIZON,
            output_step: crate::config::DEFAULT_OUTPUT_STEP,
            tolerances: None,
        }
    };
    if let Some(g) = src.gamma {
        spec.set_gamma(g);
    }
    if !src.init.is_empty() {
        spec.initial = src.init.clone();
    }
    if let Some(h) = src.horizon {
        spec.horizon = h;
    }
    if let Some(s) = src.step {
        spec.output_step = s;
    }
    if need_initial && spec.initial.is_empty() {
        return Err(CliError::Config("no initial conditions; pass --init C1,C2,C3".into()));
    }
    Ok(spec)
}

#[derive(Debug, Serialize)]
pub struct StabilitySummary {
    pub gas: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lyapunov_positive_definite: Option<bool>,
    pub limit_cycle_predicted: bool,
}

#[derive(Debug, Serialize)]
pub struct RunEntry {
    pub run: usize,
    pub initial: State,
    pub metrics: CycleMetrics,
    pub trajectory: String,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub params: SystemParams,
    pub stability: StabilitySummary,
    pub runs: Vec<RunEntry>,
    pub files: Vec<String>,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

/// Runs `simulate` and returns the report printed on stdout.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<RunReport, CliError> {
    let spec = scenario_from_source(&args.source, true)?;
    let resolved = spec.resolve(args.source.allow_non_gas)?;
    let mut runs: Vec<(usize, State)> = resolved
        .initial
        .iter()
        .copied()
        .enumerate()
        .map(|(k, x)| (k + 1, x))
        .collect();
    if let Some(n) = args.con {
        if n == 0 || n > runs.len() {
            return Err(CliError::Config(format!(
                "--con {n} out of range; scenario has {} initial conditions",
                runs.len()
            )));
        }
        runs = vec![runs[n - 1]];
    }
    let params = resolved.params;
    if !resolved.config.allow_non_gas && !gas_check(&params) {
        return Err(CliError::NonGas(format!(
            "ab = {} ≤ c = {}; pass --allow-non-gas to override",
            params.a() * params.b(),
            params.c()
        )));
    }

    let results = par_map(&runs, |(_, x0)| simulate(&params, *x0, &resolved.config));
    let mut trajectories: Vec<(usize, Trajectory)> = Vec::with_capacity(runs.len());
    for ((k, _), res) in runs.iter().zip(results) {
        trajectories.push((*k, res.map_err(|e| CliError::from_sim(*k, e))?));
    }

    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let mut files = Vec::new();
    let mut entries = Vec::new();
    for (k, traj) in &trajectories {
        let path = match args.format {
            Format::Csv => {
                let path = args.out.join(format!("trajectory_{k}.csv"));
                let mut buf = Vec::new();
                write_trajectory_csv(&mut buf, &traj.samples).map_err(|e| CliError::io(&path, e.into()))?;
                write_file(&path, &buf)?;
                path
            }
            Format::Json => {
                let path = args.out.join(format!("trajectory_{k}.json"));
                write_file(&path, trajectory_json(&traj.samples).as_bytes())?;
                path
            }
        };
        files.push(display(&path));
        entries.push(RunEntry {
            run: *k,
            initial: traj.segments[0].entry_state,
            metrics: traj.metrics.clone(),
            trajectory: display(&path),
        });
    }
    let refs: Vec<(usize, &Trajectory)> = trajectories.iter().map(|(k, t)| (*k, t)).collect();
    let events = args.out.join("events.json");
    write_file(&events, events_json(&refs).as_bytes())?;
    let metrics = args.out.join("metrics.json");
    write_file(&metrics, metrics_json(&refs).as_bytes())?;
    files.push(display(&events));
    files.push(display(&metrics));

    let lyap = solve_lyapunov_closed_form(&params).ok();
    Ok(RunReport {
        scenario: resolved.name,
        params,
        stability: StabilitySummary {
            gas: gas_check(&params),
            lyapunov_positive_definite: lyap.map(|c| c.positive_definite),
            limit_cycle_predicted: harmonic_balance(&params).limit_cycle_predicted,
        },
        runs: entries,
        files,
    })
}

#[derive(Debug, Serialize)]
pub struct RouthHurwitz {
    pub ab: f64,
    pub c: f64,
}

#[derive(Debug, Serialize)]
pub struct LyapunovJson {
    #[serde(rename = "P")]
    pub p: [[f64; 3]; 3],
    pub residual: f64,
    pub min_eig: f64,
    pub positive_definite: bool,
}

#[derive(Debug, Serialize)]
pub struct HarmonicBalanceJson {
    pub omega: f64,
    pub amplitude: f64,
    pub limit_cycle: bool,
}

#[derive(Debug, Serialize)]
pub struct StabilityReport {
    pub gas: bool,
    pub routh_hurwitz: RouthHurwitz,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<LyapunovJson>,
    pub harmonic_balance: HarmonicBalanceJson,
    pub warnings: Vec<String>,
}

pub fn stability_report(params: &SystemParams) -> StabilityReport {
    let gas = gas_check(params);
    let mut warnings = Vec::new();
    if !gas {
        warnings.push(format!(
            "ab = {} does not exceed c = {}: not globally asymptotically stable",
            params.a() * params.b(),
            params.c()
        ));
    }
    let lyapunov = match solve_lyapunov_closed_form(params) {
        Ok(cert) => {
            if !cert.positive_definite {
                warnings.push("Lyapunov matrix P is not positive definite".into());
            }
            Some(LyapunovJson {
                p: cert.p,
                residual: cert.residual_norm,
                min_eig: cert.min_eigenvalue,
                positive_definite: cert.positive_definite,
            })
        }
        Err(e) => {
            warnings.push(format!("{e}; lyapunov omitted"));
            None
        }
    };
    let hb = harmonic_balance(params);
    StabilityReport {
        gas,
        routh_hurwitz: RouthHurwitz {
            ab: params.a() * params.b(),
            c: params.c(),
        },
        lyapunov,
        harmonic_balance: HarmonicBalanceJson {
            omega: hb.candidate_omega,
            amplitude: hb.candidate_amplitude,
            limit_cycle: hb.limit_cycle_predicted,
        },
        warnings,
    }
}

pub fn cmd_stability(src: &SourceArgs) -> Result<StabilityReport, CliError> {
    let spec = scenario_from_source(src, false)?;
    Ok(stability_report(&spec.system_params()?))
}

/// Parsed `NAME=START:END:N`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarySpec {
    pub name: String,
    pub values: Vec<f64>,
}

pub fn parse_vary(s: &str) -> Result<VarySpec, CliError> {
    let bad = || CliError::Config(format!("--vary expects NAME=START:END:N, got {s:?}"));
    let (name, range) = s.split_once('=').ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    let [start, end, n] = parts.as_slice() else {
        return Err(bad());
    };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let end: f64 = end.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if !(start.is_finite() && end.is_finite()) {
        return Err(bad());
    }
    let values = match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|k| start + (end - start) * k as f64 / (n - 1) as f64)
            .collect(),
    };
    Ok(VarySpec {
        name: name.trim().to_string(),
        values,
    })
}

fn with_value(base: &ScenarioSpec, name: &str, value: f64) -> Result<ScenarioSpec, CliError> {
    let mut spec = base.clone();
    let needs = |what: &str| CliError::Config(format!("--vary {name} needs a scenario defined by {what}"));
    match name {
        "gamma" => spec.set_gamma(value),
        "a" | "b" | "c" => {
            if spec.params.is_none() {
                let p = spec.system_params()?;
                spec.params = Some(ParamsSpec {
                    a: p.a(),
                    b: p.b(),
                    c: p.c(),
                    gamma: p.gamma(),
                });
                spec.roots = None;
            }
            let p = spec.params.as_mut().expect("set above");
            match name {
                "a" => p.a = value,
                "b" => p.b = value,
                _ => p.c = value,
            }
        }
        "rate1" | "rate2" | "rate3" => match &mut spec.roots {
            Some(RootsSpec::Real(r)) => {
                let i = (name.as_bytes()[4] - b'1') as usize;
                r.rates[i] = value;
            }
            _ => return Err(needs("real roots")),
        },
        "lambda1" | "omega0" | "delta" => match &mut spec.roots {
            Some(RootsSpec::Complex(r)) => match name {
                "lambda1" => r.lambda1 = value,
                "omega0" => r.omega0 = value,
                _ => r.delta = value,
            },
            _ => return Err(needs("complex roots")),
        },
        other => return Err(CliError::Config(format!("cannot vary unknown parameter {other:?}"))),
    }
    Ok(spec)
}

pub const SWEEP_HEADER: [&str; 17] = [
    "run", "a", "b", "c", "gamma", "c1", "c2", "c3", "vary", "value", "cycles", "class", "k", "terminal", "final_x1",
    "final_x2", "error",
];

fn class_name(c: ConvergenceClass) -> (&'static str, String) {
    match c {
        ConvergenceClass::ExponentialAfterKCycles { k } => ("exponential_after_k_cycles", k.to_string()),
        ConvergenceClass::PersistentStickSlip => ("persistent_stick_slip", String::new()),
        ConvergenceClass::NoSticking => ("no_sticking", String::new()),
    }
}

fn terminal_name(t: TerminalAttractor) -> &'static str {
    match t {
        TerminalAttractor::Plus => "plus",
        TerminalAttractor::Minus => "minus",
        TerminalAttractor::InteriorRest => "interior_rest",
        TerminalAttractor::None => "none",
    }
}

struct SweepJob {
    run: usize,
    value: Option<f64>,
    params: Result<SystemParams, String>,
    initial: [f64; 3],
}

/// Runs the sweep and returns the CSV table.
pub fn cmd_sweep(args: &SweepArgs) -> Result<String, CliError> {
    let base = scenario_from_source(&args.source, false)?;
    let vary = args.vary.as_deref().map(parse_vary).transpose()?;
    let values: Vec<Option<f64>> = match &vary {
        Some(v) => v.values.iter().map(|x| Some(*x)).collect(),
        None => vec![None],
    };
    let total = values.len() * base.initial.len();
    if total > args.max_runs {
        return Err(CliError::Config(format!(
            "sweep has {total} runs, above --max-runs {}",
            args.max_runs
        )));
    }
    if !(base.horizon.is_finite() && base.horizon > 0.0) {
        return Err(CliError::Config(format!(
            "horizon must be positive, got {}",
            base.horizon
        )));
    }
    let tolerances = base.tolerances.unwrap_or_default().apply(Default::default());
    let config = SimConfig {
        horizon: base.horizon,
        // only the metrics are reported
        output_step: base.horizon,
        tolerances,
        allow_non_gas: args.source.allow_non_gas,
    };

    let mut jobs = Vec::with_capacity(total);
    for value in &values {
        let params = match (value, &vary) {
            (Some(x), Some(v)) => with_value(&base, &v.name, *x)?.system_params(),
            _ => base.system_params(),
        }
        .map_err(|e| e.to_string());
        for ic in &base.initial {
            jobs.push(SweepJob {
                run: jobs.len() + 1,
                value: *value,
                params: params.clone(),
                initial: *ic,
            });
        }
    }

    let outcomes = par_map(&jobs, |job| {
        job.params.clone().and_then(|p| {
            simulate(
                &p,
                State::initial(job.initial[0], job.initial[1], job.initial[2]),
                &config,
            )
            .map_err(|e| e.to_string())
        })
    });

    let mut out = csv_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::io("<sweep table>", e.into());
    out.write_record(SWEEP_HEADER).map_err(csv_err)?;
    let vary_name = vary.as_ref().map(|v| v.name.clone()).unwrap_or_default();
    for (job, outcome) in jobs.iter().zip(outcomes) {
        let num = |v: f64| v.to_string();
        let (a, b, c, g) = match &job.params {
            Ok(p) => (num(p.a()), num(p.b()), num(p.c()), num(p.gamma())),
            Err(_) => Default::default(),
        };
        let mut row = vec![
            job.run.to_string(),
            a,
            b,
            c,
            g,
            num(job.initial[0]),
            num(job.initial[1]),
            num(job.initial[2]),
            vary_name.clone(),
            job.value.map(num).unwrap_or_default(),
        ];
        match outcome {
            Ok(traj) => {
                let m = &traj.metrics;
                let (class, k) = class_name(m.convergence_class);
                row.extend([
                    m.stick_slip_cycle_count.to_string(),
                    class.to_string(),
                    k,
                    terminal_name(m.terminal_attractor).to_string(),
                    num(m.final_state.x1),
                    num(m.final_state.x2),
                    String::new(),
                ]);
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), 6));
                row.push(e);
            }
        }
        out.write_record(&row).map_err(csv_err)?;
    }
    let bytes = out
        .into_inner()
        .map_err(|e| CliError::io("<sweep table>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Dispatches a parsed command line; returns the text for stdout.
pub fn run(cli: &crate::args::Cli) -> Result<String, CliError> {
    use crate::args::Command;
    match &cli.command {
        Command::Simulate(args) => cmd_simulate(args).map(|r| to_json(&r)),
        Command::Stability(src) => cmd_stability(src).map(|r| to_json(&r)),
        Command::Sweep(args) => {
            let table = cmd_sweep(args)?;
            match &args.out {
                Some(path) => {
                    write_file(path, table.as_bytes())?;
                    Ok(String::new())
                }
                None => Ok(table),
            }
        }
    }
}

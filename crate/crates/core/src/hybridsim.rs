//! Event-driven hybrid engine.
//!
//! Slip phases are propagated with [`crate::closedform`]; zero crossings of
//! `x3` are located by scanning plus bisection. At a crossing inside the
//! stiction region `S0 = {x3 = 0, |b·x2 + c·x1| < γ}` the motion sticks and
//! follows the equivalent (sliding) dynamics, a ramp in `x1`, until it hits
//! the boundary `|b·x2 + c·x1| = γ`. Outside `S0` the relay switches.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::closedform::{build_slip_solution, ClosedFormError, SlipSolution};
use crate::stability::gas_check;
use crate::sysmodel::{roots_from_params, RootConfig, State, StateSpace, SystemParams};

/// Engine tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// A crossing sticks iff `γ − |b·x2 + c·x1| > stick_margin·γ`.
    pub stick_margin: f64,
    /// Absolute `|x2|` below which a stiction entry is a permanent rest.
    /// `None` means `1e-9·max(1, γ/b)`.
    pub rest_velocity: Option<f64>,
    /// Slip tails stop once the distance to their attractor drops below
    /// this fraction of the distance at segment start.
    pub convergence_ratio: f64,
    /// Event scan step; `None` derives it from the decay rates.
    pub scan_step: Option<f64>,
    /// Relative time width at which bisection stops.
    pub event_time_rel: f64,
    /// Relative `|x3|` at which bisection stops.
    pub event_value_rel: f64,
    /// Relay switches tolerated inside one chattering window.
    pub chatter_limit: usize,
    /// Chattering window length in scan steps.
    pub chatter_window: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            stick_margin: 1e-10,
            rest_velocity: None,
            convergence_ratio: 1e-8,
            scan_step: None,
            event_time_rel: 1e-12,
            event_value_rel: 1e-12,
            chatter_limit: 10_000,
            chatter_window: 10.0,
        }
    }
}

impl Tolerances {
    pub fn rest_velocity_for(&self, params: &SystemParams) -> f64 {
        self.rest_velocity.unwrap_or_else(|| default_rest_velocity(params))
    }
}

pub fn default_rest_velocity(params: &SystemParams) -> f64 {
    1e-9 * (params.gamma() / params.b()).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    /// Absolute end time.
    pub horizon: f64,
    /// Spacing of the emitted sample grid.
    pub output_step: f64,
    pub tolerances: Tolerances,
    /// Simulate even when `ab ≤ c`.
    pub allow_non_gas: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            horizon: 500.0,
            output_step: 1e-3,
            tolerances: Tolerances::default(),
            allow_non_gas: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("parameters violate ab > c (ab = {ab}, c = {c}); pass allow_non_gas to simulate anyway")]
    NonGas { ab: f64, c: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
    #[error(transparent)]
    Stiction(#[from] StictionError),
    #[error("slip segment starting at {state:?} moves straight back through x3 = 0 (should stick)")]
    SlipIntoSurface { state: State },
    #[error("event detection failed at {state:?}: {reason}")]
    EventDetection { state: State, reason: String },
    #[error("chattering: {switches} relay switches within {window:e} s, last at {state:?}")]
    Chattering { switches: usize, window: f64, state: State },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StictionError {
    #[error("state {state:?} is outside the stiction region")]
    OutsideRegion { state: State },
    #[error("negative dwell {offset:e} from {state:?}")]
    NegativeDwell { offset: f64, state: State },
}

/// `S0` for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StictionRegion {
    params: SystemParams,
}

impl StictionRegion {
    pub fn new(params: SystemParams) -> Self {
        Self { params }
    }

    /// Boundary intercept on the `x2` axis, `γ/b`.
    pub fn x2_intercept(&self) -> f64 {
        self.params.gamma() / self.params.b()
    }

    /// Boundary intercept on the `x1` axis, `γ/c`.
    pub fn x1_intercept(&self) -> f64 {
        self.params.gamma() / self.params.c()
    }

    /// `b·x2 + c·x1`.
    pub fn surface_load(&self, x: &State) -> f64 {
        self.params.b() * x.x2 + self.params.c() * x.x1
    }

    pub fn contains(&self, x: &State, tol: f64) -> bool {
        in_stiction_region(&self.params, x, tol)
    }
}

/// `|x3| ≤ tol` and `|b·x2 + c·x1| < γ` (strict).
pub fn in_stiction_region(params: &SystemParams, x: &State, tol: f64) -> bool {
    x.x3.abs() <= tol && (params.b() * x.x2 + params.c() * x.x1).abs() < params.gamma()
}

/// Remaining dwell in `S0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Dwell {
    Finite(f64),
    /// `x2 = 0`: the state never leaves.
    Infinite,
}

/// Exit time offset and exit state for a stiction phase entered at `entry`.
///
/// `x2` is frozen, `x1` ramps with slope `x2` until `|b·x2 + c·x1| = γ`.
pub fn stiction_exit(params: &SystemParams, entry: &State) -> Result<(Dwell, State), StictionError> {
    let (b, c, g) = (params.b(), params.c(), params.gamma());
    let load = b * entry.x2 + c * entry.x1;
    let slack = 1e-12 * g;
    if entry.x3.abs() > 1e-9 || load.abs() > g + slack {
        return Err(StictionError::OutsideRegion { state: *entry });
    }
    if entry.x2.abs() < default_rest_velocity(params) {
        return Ok((Dwell::Infinite, *entry));
    }
    let x1_exit = (g / entry.x2.abs() - b) / c * entry.x2;
    let offset = (x1_exit - entry.x1) / entry.x2;
    if offset < 0.0 {
        // rounding on the exit boundary itself
        let tol = 1e-12 * (x1_exit.abs().max(entry.x1.abs()).max(1.0) / entry.x2.abs());
        if offset < -tol {
            return Err(StictionError::NegativeDwell { offset, state: *entry });
        }
    }
    let offset = offset.max(0.0);
    Ok((
        Dwell::Finite(offset),
        State::new(entry.t + offset, x1_exit, entry.x2, 0.0),
    ))
}

/// Exact solution of the equivalent dynamics over `dt`: `x1` advances with
/// slope `x2`, `x2` is frozen and `x3 = 0`.
pub fn equivalent_dynamics_step(entry: &State, dt: f64) -> State {
    State::new(entry.t + dt, entry.x1 + entry.x2 * dt, entry.x2, 0.0)
}

/// Projection `Ω = I − B(CB)⁻¹C` onto the switching surface.
pub fn projection_matrix(ss: &StateSpace) -> [[f64; 3]; 3] {
    let cb = ss.cb();
    let mut omega = [[0.0; 3]; 3];
    for (i, row) in omega.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if i == j { 1.0 } else { 0.0 } - ss.b[i] * ss.c[j] / cb;
        }
    }
    omega
}

/// Equivalent control `u_e = −(CB)⁻¹·C·A·x` holding the state on `S`.
pub fn equivalent_control(ss: &StateSpace, x: [f64; 3]) -> f64 {
    let ax = ss.apply_a(x);
    let cax: f64 = ss.c.iter().zip(ax).map(|(c, v)| c * v).sum();
    -cax / ss.cb()
}

/// Outcome of scanning one slip segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SlipEvent {
    /// `x3` reaches zero at this local time.
    ZeroCrossing(f64),
    /// Distance to the attractor fell below the requested radius.
    Converged(f64),
    HorizonReached,
}

/// Default scan step: `0.05/max rate`, and `2π/(50·ω0)` for an oscillatory pair.
pub fn default_scan_step(roots: &RootConfig) -> f64 {
    let rates = roots.decay_rates();
    let fastest = rates.iter().map(|r| r.re.abs()).fold(0.0, f64::max);
    let mut h = 0.05 / fastest;
    if let RootConfig::RealPlusComplexPair { omega0, delta, .. } = *roots {
        if delta < 1.0 {
            h = h.min(2.0 * std::f64::consts::PI / (50.0 * omega0));
        }
    }
    h
}

/// Scanner for the first zero of `x3` along a slip segment.
#[derive(Debug, Clone, Copy)]
pub struct SlipScanner {
    pub scan_step: f64,
    pub time_rel: f64,
    pub value_rel: f64,
}

impl SlipScanner {
    pub fn new(scan_step: f64, tolerances: &Tolerances) -> Self {
        Self {
            scan_step,
            time_rel: tolerances.event_time_rel,
            value_rel: tolerances.event_value_rel,
        }
    }

    /// First event in `(0, t_max]`. With `converge_radius`, also stops once
    /// `‖(x1 + Γ/c, x2, x3)‖` drops below it.
    pub fn scan(&self, sol: &SlipSolution, t_max: f64, converge_radius: Option<f64>) -> Result<SlipEvent, SimError> {
        let sigma = sol.gamma_active().signum();
        let scale = sol.amplitude_scale().max(f64::MIN_POSITIVE);
        let start = sol.derivatives(0.0);
        let x0 = sol.initial();
        let p = sol.params();
        // roundoff in ẋ3 = −c·x1 − b·x2 − a·x3 − Γ; exits from S0 have ẋ3 = 0 exactly
        let force = p.c() * x0.x1.abs() + p.b() * x0.x2.abs() + p.a() * x0.x3.abs() + p.gamma();
        if start.x3 * sigma <= 0.0 && start.x3_dot * sigma < -1e-9 * force {
            return Err(SimError::SlipIntoSurface { state: *sol.initial() });
        }
        if t_max <= 0.0 {
            return Ok(SlipEvent::HorizonReached);
        }
        let centre = sol.attractor();
        let mut lo = 0.0;
        let mut k = 0u64;
        loop {
            k += 1;
            let t = (k as f64 * self.scan_step).min(t_max);
            let d = sol.derivatives(t);
            if d.x3 * sigma <= 0.0 {
                return Ok(SlipEvent::ZeroCrossing(self.bisect(sol, sigma, scale, lo, t)));
            }
            if let Some(r) = converge_radius {
                let dist = ((d.x1 - centre).powi(2) + d.x2 * d.x2 + d.x3 * d.x3).sqrt();
                if dist < r {
                    return Ok(SlipEvent::Converged(t));
                }
            }
            if t >= t_max {
                return Ok(SlipEvent::HorizonReached);
            }
            lo = t;
        }
    }

    /// `lo` is on the `Γ` side (or the segment start), `hi` is not.
    fn bisect(&self, sol: &SlipSolution, sigma: f64, scale: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let width_ok = hi - lo <= self.time_rel * hi.max(1.0);
            if width_ok && sol.x3_at(hi).abs() <= self.value_rel * scale {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sol.x3_at(mid) * sigma > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// First zero crossing of `x3` (or none) along `sol`, default scan step.
pub fn detect_slip_events(sol: &SlipSolution, t_max: f64) -> Result<SlipEvent, SimError> {
    let scanner = SlipScanner::new(default_scan_step(sol.roots()), &Tolerances::default());
    scanner.scan(sol, t_max, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    Slip,
    Stick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitEvent {
    RelaySwitch,
    StictionEntry,
    StictionExit,
    Converged,
    HorizonReached,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSegment {
    pub kind: PhaseKind,
    /// `Γ` for slip segments, `0` while sticking.
    pub gamma_active: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub entry_state: State,
    pub exit_state: State,
    pub exit_event: ExitEvent,
}

impl PhaseSegment {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// One point of the output grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub state: State,
    pub kind: PhaseKind,
    pub gamma_active: f64,
}

/// Where the motion ends up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalAttractor {
    /// `x1 = +γ/c`.
    Plus,
    /// `x1 = −γ/c`.
    Minus,
    /// Resting strictly inside `S0`.
    InteriorRest,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ConvergenceClass {
    ExponentialAfterKCycles { k: usize },
    PersistentStickSlip,
    NoSticking,
}

/// Geometry of a stiction entry relative to the previous exit.
///
/// Operational rule: `SameSide` (o′) keeps the sign of `x2` from the last
/// stiction exit, `Overshoot` (o″) flips it, `Initial` has no prior exit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryRegion {
    Initial,
    SameSide,
    Overshoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StictionEntryTag {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub region: EntryRegion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleMetrics {
    /// Stiction dwells with non-zero velocity (a terminal rest is not a cycle).
    pub stick_slip_cycle_count: usize,
    /// `tᶜ − tˢ` for every completed dwell.
    pub stiction_durations: Vec<f64>,
    /// `‖(x1 − σγ/c, x2, x3)‖` at each stiction exit, `σ = sign(x2)`.
    pub exit_radii: Vec<f64>,
    pub entries: Vec<StictionEntryTag>,
    pub terminal_attractor: TerminalAttractor,
    pub convergence_class: ConvergenceClass,
    pub final_state: State,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub params: SystemParams,
    pub segments: Vec<PhaseSegment>,
    pub samples: Vec<Sample>,
    pub metrics: CycleMetrics,
}

/// Ball radius `Φᶜ` around the attractor the motion heads for after a
/// stiction exit.
pub fn exit_radius(params: &SystemParams, exit: &State) -> f64 {
    let centre = exit.x2.signum() * params.attractor_offset();
    ((exit.x1 - centre).powi(2) + exit.x2 * exit.x2 + exit.x3 * exit.x3).sqrt()
}

enum Next {
    Stick,
    Slip(f64),
}

/// Runs the hybrid simulation from `initial` up to `config.horizon`.
pub fn simulate(params: &SystemParams, initial: State, config: &SimConfig) -> Result<Trajectory, SimError> {
    initial
        .check_finite()
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    if !(config.horizon.is_finite() && config.horizon >= initial.t) {
        return Err(SimError::InvalidConfig(format!(
            "horizon {} precedes the initial time {}",
            config.horizon, initial.t
        )));
    }
    if !(config.output_step.is_finite() && config.output_step > 0.0) {
        return Err(SimError::InvalidConfig(format!(
            "output step must be positive, got {}",
            config.output_step
        )));
    }
    if !config.allow_non_gas && !gas_check(params) {
        return Err(SimError::NonGas {
            ab: params.a() * params.b(),
            c: params.c(),
        });
    }

    let tol = &config.tolerances;
    let horizon = config.horizon;
    let gamma = params.gamma();
    let roots = roots_from_params(params);
    let scan_step = tol.scan_step.unwrap_or_else(|| default_scan_step(&roots));
    if !(scan_step.is_finite() && scan_step > 0.0) {
        return Err(SimError::InvalidConfig(format!(
            "scan step {scan_step} is not positive"
        )));
    }
    let scanner = SlipScanner::new(scan_step, tol);
    let rest_velocity = tol.rest_velocity_for(params);
    let chatter_window = tol.chatter_window * scan_step;
    let load = |x: &State| params.b() * x.x2 + params.c() * x.x1;
    let sticks = |x: &State| gamma - load(x).abs() > tol.stick_margin * gamma;

    let mut segments: Vec<PhaseSegment> = Vec::new();
    let mut solutions: Vec<Option<SlipSolution>> = Vec::new();
    let mut switches: VecDeque<f64> = VecDeque::new();
    let mut x = initial;

    let mut next = if x.x3 != 0.0 {
        Next::Slip(gamma * x.x3.signum())
    } else if sticks(&x) {
        Next::Stick
    } else {
        Next::Slip(-gamma * load(&x).signum())
    };

    loop {
        match next {
            Next::Stick => {
                if x.x2.abs() < rest_velocity {
                    // below the rest threshold the state is held; the residual
                    // ramp would take ~γ/(c·|x2|) to reach the boundary
                    segments.push(stick_segment(x, State { t: horizon, ..x }, ExitEvent::Converged));
                    solutions.push(None);
                    break;
                }
                let (dwell, exit) = stiction_exit(params, &x)?;
                let offset = match dwell {
                    Dwell::Finite(dt) => dt,
                    Dwell::Infinite => f64::INFINITY,
                };
                if x.t + offset >= horizon {
                    let end = equivalent_dynamics_step(&x, horizon - x.t);
                    segments.push(stick_segment(x, State { t: horizon, ..end }, ExitEvent::HorizonReached));
                    solutions.push(None);
                    break;
                }
                segments.push(stick_segment(x, exit, ExitEvent::StictionExit));
                solutions.push(None);
                x = exit;
                next = Next::Slip(-gamma * x.x2.signum());
            }
            Next::Slip(g) => {
                let sol = build_slip_solution(params, &roots, g, x)?;
                let centre = sol.attractor();
                let start_dist = ((x.x1 - centre).powi(2) + x.x2 * x.x2 + x.x3 * x.x3).sqrt();
                if start_dist == 0.0 {
                    segments.push(slip_segment(g, x, x, ExitEvent::Converged));
                    solutions.push(Some(sol));
                    break;
                }
                let radius = tol.convergence_ratio * start_dist;
                match scanner.scan(&sol, horizon - x.t, Some(radius))? {
                    SlipEvent::ZeroCrossing(ts) => {
                        let mut y = sol.eval(ts);
                        if !(y.x1.is_finite() && y.x2.is_finite()) {
                            return Err(SimError::EventDetection {
                                state: x,
                                reason: format!("non-finite state at local time {ts}"),
                            });
                        }
                        y.x3 = 0.0;
                        if sticks(&y) {
                            segments.push(slip_segment(g, x, y, ExitEvent::StictionEntry));
                            solutions.push(Some(sol));
                            next = Next::Stick;
                        } else {
                            segments.push(slip_segment(g, x, y, ExitEvent::RelaySwitch));
                            solutions.push(Some(sol));
                            switches.push_back(y.t);
                            while let Some(&front) = switches.front() {
                                if y.t - front > chatter_window {
                                    switches.pop_front();
                                } else {
                                    break;
                                }
                            }
                            if switches.len() >= tol.chatter_limit {
                                return Err(SimError::Chattering {
                                    switches: switches.len(),
                                    window: chatter_window,
                                    state: y,
                                });
                            }
                            next = Next::Slip(-g);
                        }
                        x = y;
                    }
                    SlipEvent::Converged(ts) => {
                        let y = sol.eval(ts);
                        segments.push(slip_segment(g, x, y, ExitEvent::Converged));
                        solutions.push(Some(sol));
                        break;
                    }
                    SlipEvent::HorizonReached => {
                        let y = State {
                            t: horizon,
                            ..sol.eval(horizon - x.t)
                        };
                        segments.push(slip_segment(g, x, y, ExitEvent::HorizonReached));
                        solutions.push(Some(sol));
                        break;
                    }
                }
            }
        }
    }

    let samples = sample_grid(&segments, &solutions, initial.t, config.output_step);
    let metrics = compute_metrics(params, &segments);
    Ok(Trajectory {
        params: *params,
        segments,
        samples,
        metrics,
    })
}

fn stick_segment(entry: State, exit: State, exit_event: ExitEvent) -> PhaseSegment {
    PhaseSegment {
        kind: PhaseKind::Stick,
        gamma_active: 0.0,
        t_start: entry.t,
        t_end: exit.t,
        entry_state: entry,
        exit_state: exit,
        exit_event,
    }
}

fn slip_segment(gamma_active: f64, entry: State, exit: State, exit_event: ExitEvent) -> PhaseSegment {
    PhaseSegment {
        kind: PhaseKind::Slip,
        gamma_active,
        t_start: entry.t,
        t_end: exit.t,
        entry_state: entry,
        exit_state: exit,
        exit_event,
    }
}

fn sample_grid(segments: &[PhaseSegment], solutions: &[Option<SlipSolution>], t0: f64, step: f64) -> Vec<Sample> {
    let Some(last) = segments.last() else {
        return Vec::new();
    };
    let t_final = last.t_end;
    let mut out = Vec::new();
    let mut idx = 0;
    let mut k = 0u64;
    loop {
        let t = t0 + k as f64 * step;
        if t > t_final {
            break;
        }
        while idx + 1 < segments.len() && t > segments[idx].t_end {
            idx += 1;
        }
        let seg = &segments[idx];
        let local = t - seg.t_start;
        let state = match (&solutions[idx], seg.kind) {
            (Some(sol), PhaseKind::Slip) => State { t, ..sol.eval(local) },
            _ if seg.exit_event == ExitEvent::Converged => State { t, ..seg.entry_state },
            _ => State {
                t,
                ..equivalent_dynamics_step(&seg.entry_state, local)
            },
        };
        out.push(Sample {
            state,
            kind: seg.kind,
            gamma_active: seg.gamma_active,
        });
        k += 1;
    }
    out
}

/// Convergence class and per-entry region tags for a finished run.
pub fn classify_convergence(_params: &SystemParams, segments: &[PhaseSegment]) -> (ConvergenceClass, Vec<EntryRegion>) {
    let mut regions = Vec::new();
    let mut last_exit_sign: Option<f64> = None;
    let mut cycles = 0usize;
    let mut rest = false;
    for seg in segments.iter().filter(|s| s.kind == PhaseKind::Stick) {
        let sign = seg.entry_state.x2.signum();
        regions.push(match last_exit_sign {
            None => EntryRegion::Initial,
            Some(s) if s == sign => EntryRegion::SameSide,
            Some(_) => EntryRegion::Overshoot,
        });
        if seg.exit_event == ExitEvent::Converged {
            rest = true;
        } else {
            cycles += 1;
        }
        if seg.exit_event == ExitEvent::StictionExit {
            last_exit_sign = Some(seg.exit_state.x2.signum());
        }
    }
    let tail_converged = segments
        .last()
        .is_some_and(|s| s.kind == PhaseKind::Slip && s.exit_event == ExitEvent::Converged);
    let class = if cycles == 0 && !rest {
        ConvergenceClass::NoSticking
    } else if tail_converged || rest || cycles < 2 {
        ConvergenceClass::ExponentialAfterKCycles { k: cycles }
    } else {
        ConvergenceClass::PersistentStickSlip
    };
    (class, regions)
}

fn compute_metrics(params: &SystemParams, segments: &[PhaseSegment]) -> CycleMetrics {
    let (convergence_class, regions) = classify_convergence(params, segments);
    let stick_segs: Vec<&PhaseSegment> = segments.iter().filter(|s| s.kind == PhaseKind::Stick).collect();
    let entries = stick_segs
        .iter()
        .zip(&regions)
        .map(|(s, r)| StictionEntryTag {
            t: s.t_start,
            x1: s.entry_state.x1,
            x2: s.entry_state.x2,
            region: *r,
        })
        .collect();
    let completed: Vec<&&PhaseSegment> = stick_segs
        .iter()
        .filter(|s| s.exit_event == ExitEvent::StictionExit)
        .collect();
    let last = segments.last().expect("a run has at least one segment");
    let final_state = last.exit_state;
    let terminal_attractor = match (last.kind, last.exit_event) {
        (PhaseKind::Slip, ExitEvent::Converged) => {
            if last.gamma_active < 0.0 {
                TerminalAttractor::Plus
            } else {
                TerminalAttractor::Minus
            }
        }
        (PhaseKind::Stick, ExitEvent::Converged) => {
            let load = params.b() * final_state.x2 + params.c() * final_state.x1;
            if params.gamma() - load.abs() <= 1e-6 * params.gamma() {
                if load > 0.0 {
                    TerminalAttractor::Plus
                } else {
                    TerminalAttractor::Minus
                }
            } else {
                TerminalAttractor::InteriorRest
            }
        }
        _ => TerminalAttractor::None,
    };
    CycleMetrics {
        stick_slip_cycle_count: stick_segs
            .iter()
            .filter(|s| s.exit_event != ExitEvent::Converged)
            .count(),
        stiction_durations: completed.iter().map(|s| s.duration()).collect(),
        exit_radii: completed.iter().map(|s| exit_radius(params, &s.exit_state)).collect(),
        entries,
        terminal_attractor,
        convergence_class,
        final_state,
    }
}

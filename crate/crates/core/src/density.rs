//! Density evolution for serially and parallel concatenated ensembles, coupled
//! and uncoupled, with random puncturing.
//!
//! Positions `t` run over `1..=L`; the arrays also carry `m` zero boundary
//! positions on each side. For the serial ensemble the outer extrinsic arrays
//! are also zero at `t >= L` (the last information block is all zero). For the
//! parallel ensemble the `outer_*` arrays hold the upper decoder and the
//! `inner_*` arrays the lower decoder.
//!
//! One iteration is a Jacobi sweep: every update reads the previous
//! iteration's arrays.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::transfer::TransferFunction;
use crate::trellis::{GeneratorPair, Trellis};
use crate::Error;

/// Erasure probability of a punctured stream: puncturing with permeability
/// `rho` followed by BEC(`epsilon`) is BEC(`1 - (1 - epsilon) rho`).
pub fn epsilon_punctured(epsilon: f64, rho: f64) -> f64 {
    epsilon + (1.0 - epsilon) * (1.0 - rho)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Scc,
    Pcc,
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "scc" => Ok(Self::Scc),
            "pcc" => Ok(Self::Pcc),
            other => Err(Error::InvalidParameter(format!(
                "unknown ensemble `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Scc => "scc",
            Self::Pcc => "pcc",
        })
    }
}

/// Convergence and stall limits of a DE run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunLimits {
    pub max_iters: usize,
    /// Success once `max_t p_app` drops below this.
    pub conv_tol: f64,
    /// Failure once the total a-posteriori erasure mass decreased by less than
    /// this fraction over `stall_window` iterations.
    pub stall_tol: f64,
    pub stall_window: usize,
}

impl Default for RunLimits {
    fn default() -> Self {
        Self {
            max_iters: 100_000,
            conv_tol: 1e-10,
            stall_tol: 1e-12,
            stall_window: 100,
        }
    }
}

/// Ensemble and channel description for density evolution.
#[derive(Clone, Debug)]
pub struct DeConfig {
    pub kind: EnsembleKind,
    pub coupled: bool,
    /// Coupling length `L` (1 when uncoupled).
    pub length: usize,
    /// Coupling memory `m` (0 when uncoupled).
    pub memory: usize,
    pub epsilon: f64,
    pub rho0: f64,
    /// Outer parity permeability; unused by the parallel ensemble.
    pub rho1: f64,
    /// Inner parity permeability (both parities for the parallel ensemble).
    pub rho2: f64,
    pub outer: Arc<TransferFunction>,
    pub inner: Arc<TransferFunction>,
    pub limits: RunLimits,
}

impl DeConfig {
    /// Uncoupled ensemble with both components equal to `tf`.
    pub fn uncoupled(kind: EnsembleKind, tf: Arc<TransferFunction>, rho1: f64, rho2: f64) -> Self {
        Self {
            kind,
            coupled: false,
            length: 1,
            memory: 0,
            epsilon: 0.0,
            rho0: 1.0,
            rho1,
            rho2,
            outer: tf.clone(),
            inner: tf,
            limits: RunLimits::default(),
        }
    }

    pub fn coupled(
        kind: EnsembleKind,
        tf: Arc<TransferFunction>,
        rho1: f64,
        rho2: f64,
        length: usize,
        memory: usize,
    ) -> Self {
        Self {
            coupled: true,
            length,
            memory,
            ..Self::uncoupled(kind, tf, rho1, rho2)
        }
    }

    /// Uncoupled config built from generator polynomials.
    pub fn from_generators(
        kind: EnsembleKind,
        gen: GeneratorPair,
        rho1: f64,
        rho2: f64,
    ) -> Result<Self, Error> {
        Ok(Self::uncoupled(
            kind,
            TransferFunction::shared(Trellis::new(gen)?),
            rho1,
            rho2,
        ))
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    /// Rate of the uncoupled punctured ensemble.
    pub fn rate(&self) -> f64 {
        ensemble_rate(self.kind, self.rho1, self.rho2)
    }

    /// Rate including the termination loss of the coupled chain.
    pub fn coupled_rate(&self) -> f64 {
        match self.kind {
            EnsembleKind::Scc if self.coupled => {
                1.0 / ((1.0 + self.rho1 + 2.0 * self.rho2) + 2.0 / (self.length as f64 - 1.0))
            }
            _ => self.rate(),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("rho1", self.rho1),
            ("rho2", self.rho2),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} outside [0, 1]"
                )));
            }
        }
        if self.rho0 != 1.0 {
            return Err(Error::InvalidParameter(
                "only systematic ensembles (rho0 = 1) are supported".into(),
            ));
        }
        if self.coupled {
            if self.length < 2 || self.memory < 1 {
                return Err(Error::InvalidParameter(format!(
                    "coupled ensemble needs L >= 2 and m >= 1 (got L = {}, m = {})",
                    self.length, self.memory
                )));
            }
        } else if self.length != 1 || self.memory != 0 {
            return Err(Error::InvalidParameter(
                "uncoupled ensemble must have L = 1 and m = 0".into(),
            ));
        }
        Ok(())
    }

    fn width(&self) -> usize {
        self.length + 2 * self.memory + 1
    }

    /// Array index of position `t` (which may be as low as `-m`).
    fn idx(&self, t: isize) -> usize {
        (t + self.memory as isize) as usize
    }
}

/// `R = 1 / (1 + rho1 + 2 rho2)` for the serial ensemble and `1 / (1 + 2 rho2)`
/// for the parallel one.
pub fn ensemble_rate(kind: EnsembleKind, rho1: f64, rho2: f64) -> f64 {
    match kind {
        EnsembleKind::Scc => 1.0 / (1.0 + rho1 + 2.0 * rho2),
        EnsembleKind::Pcc => 1.0 / (1.0 + 2.0 * rho2),
    }
}

/// Per-position erasure probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct DeState {
    pub outer_sys: Vec<f64>,
    pub outer_par: Vec<f64>,
    pub inner_sys: Vec<f64>,
    pub inner_par: Vec<f64>,
    pub p_app: Vec<f64>,
    pub iteration: usize,
    /// Position of index 0 (that is, `-m`).
    pub first_position: isize,
}

impl DeState {
    pub fn value_at(arr: &[f64], first: isize, t: isize) -> f64 {
        arr[(t - first) as usize]
    }

    pub fn max_p_app(&self) -> f64 {
        self.p_app.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_p_app(&self) -> f64 {
        self.p_app.iter().sum()
    }

    /// True if every entry of `self` is at most the matching entry of `other`.
    pub fn dominated_by(&self, other: &Self) -> bool {
        let pairs = [
            (&self.outer_sys, &other.outer_sys),
            (&self.outer_par, &other.outer_par),
            (&self.inner_sys, &other.inner_sys),
            (&self.inner_par, &other.inner_par),
        ];
        pairs
            .iter()
            .all(|(a, b)| a.iter().zip(b.iter()).all(|(x, y)| x <= y))
    }
}

fn active_range(cfg: &DeConfig) -> std::ops::RangeInclusive<isize> {
    1..=cfg.length as isize
}

/// Outer decoders of the serial ensemble exist at `1..L-1` when coupled.
fn outer_active(cfg: &DeConfig, t: isize) -> bool {
    match cfg.kind {
        EnsembleKind::Scc if cfg.coupled => t >= 1 && t < cfg.length as isize,
        _ => t >= 1 && t <= cfg.length as isize,
    }
}

/// Initial state: erasure probability 1 wherever a decoder exists, 0 on the
/// boundary.
pub fn init_de(cfg: &DeConfig) -> DeState {
    let w = cfg.width();
    let first = -(cfg.memory as isize);
    let mut s = DeState {
        outer_sys: vec![0.0; w],
        outer_par: vec![0.0; w],
        inner_sys: vec![0.0; w],
        inner_par: vec![0.0; w],
        p_app: vec![0.0; w],
        iteration: 0,
        first_position: first,
    };
    for t in active_range(cfg) {
        let i = cfg.idx(t);
        s.inner_sys[i] = 1.0;
        s.inner_par[i] = 1.0;
        if outer_active(cfg, t) {
            s.outer_sys[i] = 1.0;
            s.outer_par[i] = 1.0;
        }
    }
    s
}

/// Average of `arr` over positions `t..=t+m`.
fn forward_window(cfg: &DeConfig, arr: &[f64], t: isize) -> f64 {
    let m = cfg.memory as isize;
    (0..=m).map(|j| arr[cfg.idx(t + j)]).sum::<f64>() / (m + 1) as f64
}

/// One density-evolution iteration of the serial ensemble.
pub fn de_iterate_scc(cfg: &DeConfig, state: &DeState) -> Result<DeState, Error> {
    let eps = cfg.epsilon;
    let eps1 = epsilon_punctured(eps, cfg.rho1);
    let eps2 = epsilon_punctured(eps, cfg.rho2);
    let m = cfg.memory as isize;
    let mut next = state.clone();
    next.iteration += 1;
    for t in active_range(cfg) {
        let i = cfg.idx(t);
        // inner decoder: priors from outer positions t-m..t
        let (mut s_sum, mut p_sum) = (0.0, 0.0);
        for j in 0..=m {
            s_sum += state.outer_sys[cfg.idx(t - j)];
            p_sum += state.outer_par[cfg.idx(t - j)];
        }
        let q_outer = (eps * s_sum + eps1 * p_sum) / (2 * (m + 1)) as f64;
        let ext = cfg.inner.evaluate(q_outer.clamp(0.0, 1.0), eps2)?;
        next.inner_sys[i] = ext.sys;
        next.inner_par[i] = ext.par;

        if outer_active(cfg, t) {
            let avg = forward_window(cfg, &state.inner_sys, t);
            let ext = cfg
                .outer
                .evaluate((eps * avg).clamp(0.0, 1.0), (eps1 * avg).clamp(0.0, 1.0))?;
            next.outer_sys[i] = ext.sys;
            next.outer_par[i] = ext.par;
        }
    }
    for t in active_range(cfg) {
        let i = cfg.idx(t);
        next.p_app[i] = eps * next.outer_sys[i] * forward_window(cfg, &next.inner_sys, t);
    }
    Ok(next)
}

/// One density-evolution iteration of the parallel ensemble. Each decoder's
/// systematic prior is `epsilon` times the other decoder's extrinsic averaged
/// over the `(m+1)^2` position pairs its bits can be shared with.
pub fn de_iterate_pcc(cfg: &DeConfig, state: &DeState) -> Result<DeState, Error> {
    let eps = cfg.epsilon;
    let eps2 = epsilon_punctured(eps, cfg.rho2);
    let m = cfg.memory as isize;
    let mut next = state.clone();
    next.iteration += 1;
    for t in active_range(cfg) {
        let i = cfg.idx(t);
        let (mut from_lower, mut from_upper) = (0.0, 0.0);
        for j in 0..=m {
            let src = t - j;
            // information positions before the chain are known zeros
            if src < 1 {
                continue;
            }
            from_lower += forward_window(cfg, &state.inner_sys, src);
            from_upper += forward_window(cfg, &state.outer_sys, src);
        }
        let q_upper = eps * from_lower / (m + 1) as f64;
        let q_lower = eps * from_upper / (m + 1) as f64;
        let up = cfg.outer.evaluate(q_upper.clamp(0.0, 1.0), eps2)?;
        let lo = cfg.inner.evaluate(q_lower.clamp(0.0, 1.0), eps2)?;
        next.outer_sys[i] = up.sys;
        next.outer_par[i] = up.par;
        next.inner_sys[i] = lo.sys;
        next.inner_par[i] = lo.par;
    }
    for t in active_range(cfg) {
        let i = cfg.idx(t);
        next.p_app[i] =
            eps * forward_window(cfg, &next.outer_sys, t) * forward_window(cfg, &next.inner_sys, t);
    }
    Ok(next)
}

pub fn de_iterate(cfg: &DeConfig, state: &DeState) -> Result<DeState, Error> {
    match cfg.kind {
        EnsembleKind::Scc => de_iterate_scc(cfg, state),
        EnsembleKind::Pcc => de_iterate_pcc(cfg, state),
    }
}

/// Outcome of [`de_run`].
#[derive(Clone, Debug)]
pub struct DeOutcome {
    pub success: bool,
    pub state: DeState,
    pub iterations: usize,
}

/// Iterates until `max_t p_app < conv_tol` (success), until the total
/// a-posteriori erasure mass stalls, or until `max_iters` (failure).
///
/// Stall detection uses the total over positions rather than the maximum: in
/// a coupled chain the maximum stays flat while the decoding wave travels.
pub fn de_run(cfg: &DeConfig) -> Result<DeOutcome, Error> {
    de_run_traced(cfg, |_| {})
}

/// [`de_run`] with a callback receiving every iterated state.
pub fn de_run_traced(
    cfg: &DeConfig,
    mut on_iter: impl FnMut(&DeState),
) -> Result<DeOutcome, Error> {
    cfg.validate()?;
    let limits = cfg.limits;
    let mut state = init_de(cfg);
    let mut checkpoint = f64::INFINITY;
    for it in 1..=limits.max_iters {
        state = de_iterate(cfg, &state)?;
        on_iter(&state);
        if state.max_p_app() < limits.conv_tol {
            return Ok(DeOutcome {
                success: true,
                state,
                iterations: it,
            });
        }
        if it % limits.stall_window == 0 {
            let total = state.total_p_app();
            if checkpoint.is_finite() && checkpoint - total <= limits.stall_tol * checkpoint {
                return Ok(DeOutcome {
                    success: false,
                    state,
                    iterations: it,
                });
            }
            checkpoint = total;
        }
    }
    Ok(DeOutcome {
        success: false,
        iterations: limits.max_iters,
        state,
    })
}

/// Default bisection half-width.
pub const DEFAULT_BISECT_TOL: f64 = 1e-4;

/// BP threshold by bisection on `epsilon`. Stops once the bracket is narrower
/// than `2 * bisect_tol` and returns its midpoint.
pub fn bp_threshold(template: &DeConfig, bisect_tol: f64) -> Result<f64, Error> {
    let upper = (1.0 - template.rate() + 0.02).min(1.0);
    bp_threshold_in(template, 0.0, upper, bisect_tol)
}

/// Bisection inside a caller-supplied bracket `[lo, hi]`. Decoding must succeed
/// at `lo` and fail at `hi`.
pub fn bp_threshold_in(
    template: &DeConfig,
    lo: f64,
    hi: f64,
    bisect_tol: f64,
) -> Result<f64, Error> {
    let (mut lo, mut hi) = (lo, hi);
    if de_run(&template.with_epsilon(hi))?.success {
        return Err(Error::BracketViolation { epsilon: hi });
    }
    if lo > 0.0 && !de_run(&template.with_epsilon(lo))?.success {
        return Err(Error::InvalidParameter(format!(
            "decoding fails at the lower bracket end epsilon = {lo}"
        )));
    }
    while hi - lo > 2.0 * bisect_tol {
        let mid = 0.5 * (lo + hi);
        if de_run(&template.with_epsilon(mid))?.success {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

const MESSAGE_TOL: f64 = 1e-13;

fn max_change(a: &DeState, b: &DeState) -> f64 {
    [
        (&a.outer_sys, &b.outer_sys),
        (&a.outer_par, &b.outer_par),
        (&a.inner_sys, &b.inner_sys),
        (&a.inner_par, &b.inner_par),
    ]
    .iter()
    .flat_map(|(x, y)| x.iter().zip(y.iter()).map(|(p, q)| (p - q).abs()))
    .fold(0.0, f64::max)
}

/// Extrinsic erasure probability averaged over the transmitted bits at the
/// fixed point reached by uncoupled DE from the all-erased state. Bits are
/// weighted by how many of them are transmitted per information bit.
pub fn bp_exit(template: &DeConfig, epsilon: f64) -> Result<f64, Error> {
    let cfg = template.with_epsilon(epsilon);
    let out = de_run(&cfg)?;
    let mut state = out.state;
    if out.success {
        // a-posteriori convergence can precede message convergence (always at epsilon = 0)
        for _ in 0..cfg.limits.max_iters {
            let next = de_iterate(&cfg, &state)?;
            let moved = max_change(&state, &next);
            state = next;
            if moved < MESSAGE_TOL {
                break;
            }
        }
    }
    let s = &state;
    let i = cfg.idx(1);
    let eps1 = epsilon_punctured(epsilon, cfg.rho1);
    let eps2 = epsilon_punctured(epsilon, cfg.rho2);
    Ok(match cfg.kind {
        EnsembleKind::Scc => {
            let (xos, xop, xis) = (s.outer_sys[i], s.outer_par[i], s.inner_sys[i]);
            let q = (epsilon * xos + eps1 * xop) / 2.0;
            let inner_par = cfg.inner.evaluate(q, eps2)?.par;
            let h_sys = xos * xis;
            let h_outer_par = xop * xis;
            (h_sys + cfg.rho1 * h_outer_par + 2.0 * cfg.rho2 * inner_par)
                / (1.0 + cfg.rho1 + 2.0 * cfg.rho2)
        }
        EnsembleKind::Pcc => {
            let (xu, xl) = (s.outer_sys[i], s.inner_sys[i]);
            let up = cfg.outer.evaluate(epsilon * xl, eps2)?.par;
            let lo = cfg.inner.evaluate(epsilon * xu, eps2)?.par;
            (xu * xl + cfg.rho2 * (up + lo)) / (1.0 + 2.0 * cfg.rho2)
        }
    })
}

/// Solves `int_{eps*}^{1} h = rate` for a curve sampled on an increasing grid
/// ending at 1, by trapezoidal integration from the right and linear
/// interpolation inside the crossing cell. Returns `None` when the whole area
/// is below `rate`.
pub fn area_threshold(grid: &[f64], h: &[f64], rate: f64) -> Option<f64> {
    let mut area = 0.0;
    for k in (0..grid.len() - 1).rev() {
        let width = grid[k + 1] - grid[k];
        let cell = 0.5 * (h[k] + h[k + 1]) * width;
        if area + cell >= rate {
            // inside the cell h is linear; solve the quadratic for the left end
            let need = rate - area;
            let (h0, h1) = (h[k], h[k + 1]);
            let slope = (h1 - h0) / width;
            // area from x to the right end: h1 (w-x) - slope/2 (w-x)^2 with d = w-x
            let d = if slope.abs() < 1e-14 {
                need / h1
            } else {
                let disc = h1 * h1 - 2.0 * slope * need;
                (h1 - disc.max(0.0).sqrt()) / slope
            };
            return Some(grid[k + 1] - d.clamp(0.0, width));
        }
        area += cell;
    }
    None
}

const AREA_SLACK: f64 = 1e-6;

/// MAP threshold estimate of an uncoupled ensemble by the area theorem applied
/// to the BP EXIT curve.
pub fn map_threshold(
    template: &DeConfig,
    bisect_tol: f64,
    grid_step: f64,
) -> Result<MapThreshold, Error> {
    if template.coupled {
        return Err(Error::InvalidParameter(
            "MAP threshold needs the uncoupled ensemble".into(),
        ));
    }
    let eps_bp = bp_threshold(template, bisect_tol)?;
    let rate = template.rate();
    // start just above the BP threshold so the curve is on its nonzero branch
    let start = eps_bp + bisect_tol;
    let n = ((1.0 - start) / grid_step).ceil() as usize;
    let mut grid: Vec<f64> = (0..n).map(|k| start + k as f64 * grid_step).collect();
    grid.push(1.0);
    let h = grid
        .iter()
        .map(|&e| bp_exit(template, e))
        .collect::<Result<Vec<_>, _>>()?;
    let total: f64 = grid
        .windows(2)
        .zip(h.windows(2))
        .map(|(g, v)| 0.5 * (v[0] + v[1]) * (g[1] - g[0]))
        .sum();
    let eps_map = match area_threshold(&grid, &h, rate) {
        Some(e) => e,
        // BP and MAP coincide; quadrature leaves the area a hair below the rate
        None if rate - total <= AREA_SLACK => eps_bp,
        None => return Err(Error::ExitCurveAnomaly { area: total, rate }),
    };
    Ok(MapThreshold {
        eps_bp,
        eps_map,
        area_above_bp: total,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapThreshold {
    pub eps_bp: f64,
    pub eps_map: f64,
    pub area_above_bp: f64,
}

/// Outer parity permeability implied by the rate and `rho2`.
pub fn rho1_for(rate: f64, rho2: f64) -> f64 {
    1.0 / rate - 1.0 - 2.0 * rho2
}

/// Result of [`optimize_rho2`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rho2Optimum {
    pub rho2: f64,
    pub rho1: f64,
    pub eps_map: f64,
}

/// Grid search over feasible `rho2` maximising the MAP threshold of the
/// uncoupled serial ensemble at the given rate. Ties go to the larger `rho2`.
pub fn optimize_rho2(
    tf: Arc<TransferFunction>,
    rate: f64,
    rho_step: f64,
    bisect_tol: f64,
    exit_step: f64,
) -> Result<Rho2Optimum, Error> {
    if !(rate > 0.25 - 1e-12 && rate < 1.0) {
        return Err(Error::InfeasibleRate { rate });
    }
    // rho1 in [0,1] <=> rho2 in [(1/R - 2)/2, (1/R - 1)/2] intersected with [0,1]
    let hi = ((1.0 / rate - 1.0) / 2.0).min(1.0);
    let lo = ((1.0 / rate - 2.0) / 2.0).max(0.0);
    if lo > hi + 1e-12 {
        return Err(Error::InfeasibleRate { rate });
    }
    let mut candidates = vec![hi];
    let mut r = hi - rho_step;
    while r >= lo - 1e-12 {
        candidates.push(r.max(lo));
        r -= rho_step;
    }
    let mut best: Option<Rho2Optimum> = None;
    for rho2 in candidates {
        let rho1 = rho1_for(rate, rho2).clamp(0.0, 1.0);
        let cfg = DeConfig::uncoupled(EnsembleKind::Scc, tf.clone(), rho1, rho2);
        let eps_map = map_threshold(&cfg, bisect_tol, exit_step)?.eps_map;
        // candidates run from large to small rho2, so only strict improvements win
        if best.is_none_or(|b| eps_map > b.eps_map + 1e-9) {
            best = Some(Rho2Optimum {
                rho2,
                rho1,
                eps_map,
            });
        }
    }
    best.ok_or(Error::InfeasibleRate { rate })
}

/// Thresholds of one ensemble at one rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub ensemble: EnsembleKind,
    pub rate: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub eps_bp: f64,
    pub eps_map: f64,
    /// `(m, threshold)` pairs, increasing in `m`.
    pub eps_sc: Vec<(usize, f64)>,
    /// `(1 - R) - eps_sc` at the largest `m`.
    pub delta_sh: f64,
}

/// Computes every threshold of one table row. Coupled thresholds are bisected
/// in `[eps_bp, 1 - R]`.
pub fn threshold_report(
    template: &DeConfig,
    memories: &[usize],
    length: usize,
    bisect_tol: f64,
    exit_step: f64,
) -> Result<ThresholdReport, Error> {
    let map = map_threshold(template, bisect_tol, exit_step)?;
    let mut eps_sc = Vec::new();
    for &m in memories {
        let cfg = DeConfig {
            coupled: true,
            length,
            memory: m,
            ..template.clone()
        };
        let hi = (1.0 - template.rate()).min(1.0);
        eps_sc.push((
            m,
            bp_threshold_in(&cfg, map.eps_bp - 2.0 * bisect_tol, hi, bisect_tol)?,
        ));
    }
    let delta_sh = eps_sc
        .last()
        .map_or(f64::NAN, |&(_, e)| 1.0 - template.rate() - e);
    Ok(ThresholdReport {
        ensemble: template.kind,
        rate: template.rate(),
        rho1: template.rho1,
        rho2: template.rho2,
        eps_bp: map.eps_bp,
        eps_map: map.eps_map,
        eps_sc,
        delta_sh,
    })
}

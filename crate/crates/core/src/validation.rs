//! Numerical experiments: integral identities of solitary profiles,
//! convergence studies, single-wave propagation and the overtaking collision.

use std::sync::Arc;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::petviashvili::{self, PetviashviliConfig, SolitaryProfile};
use crate::solver::{power_field, EvolutionRecord, Rosenau};
use crate::spectral::{self, Field, Grid};

/// Floor on the denominator of [`IdentityReport::rel_gap`].
pub const EPS_FLOOR: f64 = 1e-14;

/// Profiles larger than this at the domain edges are not decayed enough for
/// whole-line identities.
pub const EDGE_DECAY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// `c∫(Q″)² + (c−1)∫Q² = ∫Q^{p+2}/(p+1)`
    EnergyIdentity,
    /// `(3c/2)∫(Q″)² − ((c−1)/2)∫Q² = −∫Q^{p+2}/((p+1)(p+2))`
    Pohozaev,
    /// `c(3p+8)/(2(p+2))∫(Q″)² = (c−1)p/(2(p+2))∫Q²`
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: Identity,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
}

impl IdentityReport {
    fn new(identity: Identity, lhs: f64, rhs: f64) -> Self {
        let abs_gap = (lhs - rhs).abs();
        IdentityReport {
            identity,
            lhs,
            rhs,
            abs_gap,
            rel_gap: abs_gap / lhs.abs().max(rhs.abs()).max(EPS_FLOOR),
        }
    }
}

/// The three integral identities on a converged profile.
pub fn check_identities(profile: &SolitaryProfile) -> Result<[IdentityReport; 3]> {
    check_identities_for(&profile.q, profile.c, profile.p)
}

/// [`check_identities`] for an arbitrary field with speed `c` and exponent `p`.
pub fn check_identities_for(q: &Field, c: f64, p: f64) -> Result<[IdentityReport; 3]> {
    let values = q.values();
    let edge = values[0].abs().max(values[values.len() - 1].abs());
    if edge > EDGE_DECAY_TOL {
        warn!(
            "profile is {edge:.3e} at the domain edge; identity gaps will include truncation error"
        );
    }
    let qxx = spectral::spectral_derivative(q, 2)?;
    let a = spectral::quadrature(&qxx.map(|v| v * v)?);
    let b = spectral::quadrature(&q.map(|v| v * v)?);
    let n = spectral::quadrature(&power_field(q, p + 2.0, p)?);
    Ok([
        IdentityReport::new(Identity::EnergyIdentity, c * a + (c - 1.0) * b, n / (p + 1.0)),
        IdentityReport::new(
            Identity::Pohozaev,
            1.5 * c * a - 0.5 * (c - 1.0) * b,
            -n / ((p + 1.0) * (p + 2.0)),
        ),
        IdentityReport::new(
            Identity::Combined,
            c * (3.0 * p + 8.0) / (2.0 * (p + 2.0)) * a,
            (c - 1.0) * p / (2.0 * (p + 2.0)) * b,
        ),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub resolution: usize,
    pub error: f64,
    /// `log(e_{i−1}/e_i) / log(r_i/r_{i−1})`; absent on the first row or when
    /// either error is zero.
    pub observed_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn from_errors(resolutions: &[usize], errors: &[f64]) -> Self {
        assert_eq!(resolutions.len(), errors.len());
        let rows = resolutions
            .iter()
            .zip(errors)
            .enumerate()
            .map(|(i, (&resolution, &error))| {
                let observed_order = (i > 0 && error > 0.0 && errors[i - 1] > 0.0).then(|| {
                    (errors[i - 1] / error).ln() / (resolution as f64 / resolutions[i - 1] as f64).ln()
                });
                ConvergenceRow { resolution, error, observed_order }
            })
            .collect();
        ConvergenceTable { rows }
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    /// Mean of the per-row observed orders.
    pub fn mean_order(&self) -> Option<f64> {
        let orders: Vec<f64> = self.rows.iter().filter_map(|r| r.observed_order).collect();
        (!orders.is_empty()).then(|| orders.iter().sum::<f64>() / orders.len() as f64)
    }

    /// Least-squares slope of `−log e` against `log resolution` over rows with
    /// a positive error.
    pub fn fitted_order(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.error > 0.0)
            .map(|r| ((r.resolution as f64).ln(), -r.error.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Some(sxy / sxx)
    }
}

/// Errors at `t_final` of runs with `m_list` steps against a run with `m_ref`
/// steps, all from `u0`.
pub fn temporal_convergence(u0: &Field, p: f64, t_final: f64, m_list: &[usize], m_ref: usize) -> Result<ConvergenceTable> {
    if m_list.is_empty() || m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("M list must be non-empty and strictly increasing".into()));
    }
    let max_m = *m_list.last().expect("non-empty");
    if m_ref < max_m {
        return Err(Error::Config(format!("reference M = {m_ref} is below the largest M = {max_m}")));
    }
    if m_ref < 4 * max_m {
        warn!("reference M = {m_ref} is less than 4× the largest M; its own error is not negligible");
    }
    let solver = Rosenau::new(p)?;
    let run = |m: usize| -> Result<Field> { Ok(solver.evolve_observed(u0, t_final, m, m, |_, _| Ok(()))?.u) };
    let mut all: Vec<usize> = m_list.to_vec();
    all.push(m_ref);
    let finals = all.par_iter().map(|&m| run(m)).collect::<Result<Vec<_>>>()?;
    let reference = finals.last().expect("reference run");
    let errors: Vec<f64> = finals[..m_list.len()].iter().map(|f| f.max_diff(reference)).collect();
    Ok(ConvergenceTable::from_errors(m_list, &errors))
}

/// Errors at `t_final` on grids of `n_list` points against the run on the
/// grid of `u_ref0`, all with `m` steps. Each coarse initial condition is the
/// trigonometric interpolant of `u_ref0`, and errors are taken at the coarse
/// nodes.
pub fn spatial_convergence(u_ref0: &Field, p: f64, t_final: f64, n_list: &[usize], m: usize) -> Result<ConvergenceTable> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("N list must be non-empty and strictly increasing".into()));
    }
    let ref_grid = u_ref0.grid().clone();
    let solver = Rosenau::new(p)?;
    let run = |u0: &Field| -> Result<Field> { Ok(solver.evolve_observed(u0, t_final, m, m, |_, _| Ok(()))?.u) };
    let (reference, coarse) = rayon::join(
        || run(u_ref0),
        || {
            n_list
                .par_iter()
                .map(|&n| {
                    let grid = Grid::new(ref_grid.a(), ref_grid.b(), n)?;
                    run(&u_ref0.resample(&grid)?)
                })
                .collect::<Result<Vec<_>>>()
        },
    );
    let reference = reference?;
    let errors = coarse?
        .iter()
        .map(|u| Ok(u.max_diff(&reference.resample(u.grid())?)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ConvergenceTable::from_errors(n_list, &errors))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationReport {
    pub t_final: f64,
    pub steps: usize,
    /// `‖u(·,T) − Q(· − cT)‖_∞ / ‖Q‖_∞`
    pub shape_error: f64,
    pub energy_initial: f64,
    /// `max_t |E(t) − E(0)|` over every step.
    pub max_energy_drift: f64,
}

/// Evolves a profile and compares it with its exact translate by `cT`.
pub fn propagate_profile(profile: &SolitaryProfile, t_final: f64, steps: usize) -> Result<PropagationReport> {
    let solver = Rosenau::new(profile.p)?;
    let u0 = &profile.q;
    let e0 = crate::solver::energy(u0)?;
    let mut drift = 0.0f64;
    let last = solver.evolve_observed(u0, t_final, steps, 1, |_, u| {
        drift = drift.max((crate::solver::energy(u)? - e0).abs());
        Ok(())
    })?;
    let expected = spectral::inverse_dft(&profile.q_hat.translated(profile.c * t_final))?;
    Ok(PropagationReport {
        t_final,
        steps,
        shape_error: last.u.max_diff(&expected) / u0.max_abs(),
        energy_initial: e0,
        max_energy_drift: drift,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionConfig {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub m: usize,
    pub t_final: f64,
    pub p: f64,
    pub c1: f64,
    pub c2: f64,
    pub x1: f64,
    pub x2: f64,
    /// Steps between stored snapshots.
    pub snapshot_stride: usize,
    /// Steps between peak-tracking samples.
    pub track_stride: usize,
}

impl CollisionConfig {
    /// Speeds 2 and 1.2 from −60 and −20 on `[−200, 200]` with `N = 2¹⁴`,
    /// `M = 10000`, `T = 100`.
    pub fn overtaking() -> Self {
        CollisionConfig {
            a: -200.0,
            b: 200.0,
            n: 1 << 14,
            m: 10_000,
            t_final: 100.0,
            p: 1.0,
            c1: 2.0,
            c2: 1.2,
            x1: -60.0,
            x2: -20.0,
            snapshot_stride: 100,
            track_stride: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c1 > self.c2) {
            return Err(Error::Config(format!(
                "overtaking needs the trailing wave faster: c1 = {} must exceed c2 = {}",
                self.c1, self.c2
            )));
        }
        if !(self.x1 < self.x2) {
            return Err(Error::Config(format!(
                "the faster wave must start behind: x1 = {} must be below x2 = {}",
                self.x1, self.x2
            )));
        }
        for (name, x) in [("x1", self.x1), ("x2", self.x2)] {
            if !(self.a < x && x < self.b) {
                return Err(Error::Config(format!("{name} = {x} lies outside [{}, {}]", self.a, self.b)));
            }
        }
        if self.snapshot_stride == 0 || self.track_stride == 0 || self.m == 0 {
            return Err(Error::Config("M and the strides must be at least 1".into()));
        }
        Ok(())
    }

    fn grid(&self) -> Result<Arc<Grid>> {
        Grid::new(self.a, self.b, self.n)
    }
}

/// The two initial profiles and their superposition.
#[derive(Debug, Clone)]
pub struct CollisionSetup {
    pub fast: SolitaryProfile,
    pub slow: SolitaryProfile,
    pub u0: Field,
}

/// `u0(x) = Q_{c1}(x − x1) + Q_{c2}(x − x2)` with both profiles computed on
/// the run grid.
pub fn collision_setup(cfg: &CollisionConfig) -> Result<CollisionSetup> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let mid = 0.5 * (cfg.a + cfg.b);
    let solve = |c: f64| petviashvili::solve_profile(&PetviashviliConfig::new(grid.clone(), c, cfg.p)?);
    let (fast, slow) = rayon::join(|| solve(cfg.c1), || solve(cfg.c2));
    let (fast, slow) = (fast?, slow?);
    let q1 = spectral::inverse_dft(&fast.q_hat.translated(cfg.x1 - mid))?;
    let q2 = spectral::inverse_dft(&slow.q_hat.translated(cfg.x2 - mid))?;
    let values = q1.values().iter().zip(q2.values()).map(|(a, b)| a + b).collect();
    Ok(CollisionSetup { fast, slow, u0: Field::new(grid, values)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakSample {
    pub t: f64,
    pub fast_x: f64,
    pub fast_value: f64,
    /// Equal to the fast peak while the waves are merged into one maximum.
    pub slow_x: f64,
    pub slow_value: f64,
    pub merged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub t: f64,
    pub slow_peak_x: f64,
    pub slow_peak_value: f64,
    pub window: (f64, f64),
    /// `max |u|` over grid nodes in the window.
    pub max_abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CollisionSummary {
    pub initial_peaks: (f64, f64),
    /// Midpoint of the interval over which the fast peak moves from behind to
    /// ahead of the slow one.
    pub crossover_time: Option<f64>,
    /// `max u` at the first tracked sample with the fast peak ahead.
    pub collision_peak: Option<f64>,
    pub tail: TailReport,
    pub energy_initial: f64,
    pub max_energy_drift: f64,
    pub relative_energy_drift: f64,
}

#[derive(Debug, Clone)]
pub struct CollisionReport {
    pub record: EvolutionRecord,
    pub peaks: Vec<PeakSample>,
    pub summary: CollisionSummary,
}

/// Local maxima of `u` above `floor`, with sub-grid positions from a parabola
/// through the three nodes, in decreasing order of value.
fn local_maxima(u: &Field, floor: f64) -> Vec<(f64, f64)> {
    let v = u.values();
    let n = v.len();
    let dx = u.grid().dx();
    let mut out = Vec::new();
    for j in 0..n {
        let (l, c, r) = (v[(j + n - 1) % n], v[j], v[(j + 1) % n]);
        if c > floor && c > l && c >= r {
            let den = l - 2.0 * c + r;
            let off = if den != 0.0 { 0.5 * (l - r) / den } else { 0.0 };
            let value = c - 0.25 * (l - r) * off;
            out.push((u.grid().nodes()[j] + off * dx, value));
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    out
}

fn track(t: f64, u: &Field, floor: f64) -> Option<PeakSample> {
    let peaks = local_maxima(u, floor);
    let &(fast_x, fast_value) = peaks.first()?;
    let (slow_x, slow_value, merged) = match peaks.get(1) {
        Some(&(x, v)) => (x, v, false),
        None => (fast_x, fast_value, true),
    };
    Some(PeakSample { t, fast_x, fast_value, slow_x, slow_value, merged })
}

fn tail_window(slow_x: f64) -> (f64, f64) {
    (slow_x - 60.0, slow_x - 10.0)
}

fn window_max(u: &Field, (lo, hi): (f64, f64)) -> f64 {
    u.grid()
        .nodes()
        .iter()
        .zip(u.values())
        .filter(|(x, _)| (lo..=hi).contains(*x))
        .fold(0.0, |m, (_, v)| m.max(v.abs()))
}

/// Slow (second) wave at the end of a run: the largest maximum behind the
/// leading wave.
fn trailing_peak(u: &Field, floor: f64) -> Result<(f64, f64)> {
    let peaks = local_maxima(u, floor);
    match peaks.as_slice() {
        [a, b, ..] => Ok(if a.0 < b.0 { *a } else { *b }),
        [a] => Ok(*a),
        [] => Err(Error::Config("no wave above the tracking floor at the final time".into())),
    }
}

/// Runs the overtaking collision, tracking both peaks and measuring the
/// oscillatory tail behind the slower wave at the final time, in the window
/// `[x_s − 60, x_s − 10]`.
pub fn collision_experiment(cfg: &CollisionConfig) -> Result<CollisionReport> {
    let setup = collision_setup(cfg)?;
    collision_from_setup(cfg, &setup)
}

/// [`collision_experiment`] with precomputed initial data.
pub fn collision_from_setup(cfg: &CollisionConfig, setup: &CollisionSetup) -> Result<CollisionReport> {
    cfg.validate()?;
    let a1 = setup.fast.peak_amplitude();
    let a2 = setup.slow.peak_amplitude();
    let floor = 0.5 * a2.abs();
    let solver = Rosenau::new(cfg.p)?;
    let mut record = EvolutionRecord { times: Vec::new(), snapshots: Vec::new(), energy_series: Vec::new() };
    let mut peaks = Vec::new();
    let stride = gcd(cfg.snapshot_stride, cfg.track_stride);
    let dt = cfg.t_final / cfg.m as f64;
    let e0 = crate::solver::energy(&setup.u0)?;
    let mut drift = 0.0f64;
    let final_state = solver.evolve_observed(&setup.u0, cfg.t_final, cfg.m, stride, |t, u| {
        let step = (t / dt).round() as usize;
        let last = step == cfg.m;
        if step % cfg.track_stride == 0 || last {
            if let Some(s) = track(t, u, floor) {
                peaks.push(s);
            }
        }
        if step % cfg.snapshot_stride == 0 || last {
            let e = crate::solver::energy(u)?;
            drift = drift.max((e - e0).abs());
            record.times.push(t);
            record.energy_series.push(e);
            record.snapshots.push(u.clone());
        }
        Ok(())
    })?;

    let mut crossover_time = None;
    let mut collision_peak = None;
    for w in peaks.windows(2) {
        let before = w[0].fast_x - w[0].slow_x;
        let after = w[1].fast_x - w[1].slow_x;
        if before < 0.0 && after >= 0.0 && !w[1].merged {
            crossover_time = Some(0.5 * (w[0].t + w[1].t));
            collision_peak = Some(w[1].fast_value);
            break;
        }
    }
    // With a merged phase the sign change is spread over several samples.
    if crossover_time.is_none() {
        if let (Some(start), Some(end)) = (
            peaks.iter().position(|s| s.merged),
            peaks.iter().rposition(|s| s.merged),
        ) {
            let t_mid = 0.5 * (peaks[start].t + peaks[end].t);
            crossover_time = Some(t_mid);
            collision_peak = peaks[start..=end].iter().map(|s| s.fast_value).reduce(f64::max);
        }
    }

    let (slow_x, slow_value) = trailing_peak(&final_state.u, floor)?;
    let window = tail_window(slow_x);
    let tail = TailReport {
        t: final_state.t,
        slow_peak_x: slow_x,
        slow_peak_value: slow_value,
        window,
        max_abs: window_max(&final_state.u, window),
    };
    let summary = CollisionSummary {
        initial_peaks: (a1, a2),
        crossover_time,
        collision_peak,
        tail,
        energy_initial: e0,
        max_energy_drift: drift,
        relative_energy_drift: drift / e0.abs(),
    };
    Ok(CollisionReport { record, peaks, summary })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRefinement {
    pub steps: Vec<usize>,
    pub window: (f64, f64),
    /// `‖u_M − u_{M_finest}‖_∞` over the tail window, for every `M` but the
    /// finest.
    pub errors: Vec<f64>,
    /// `errors[0] / errors[1]`; about 17 for a fourth-order scheme when the
    /// steps double.
    pub ratio: Option<f64>,
}

/// Reruns the collision with each step count in `steps` (increasing; the last
/// is the reference) and compares the final tails.
pub fn tail_refinement(cfg: &CollisionConfig, setup: &CollisionSetup, steps: &[usize]) -> Result<TailRefinement> {
    cfg.validate()?;
    if steps.len() < 2 || steps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("need at least two strictly increasing step counts".into()));
    }
    let solver = Rosenau::new(cfg.p)?;
    let finals = steps
        .par_iter()
        .map(|&m| Ok(solver.evolve_observed(&setup.u0, cfg.t_final, m, m, |_, _| Ok(()))?.u))
        .collect::<Result<Vec<Field>>>()?;
    let reference = finals.last().expect("non-empty");
    let floor = 0.5 * setup.slow.peak_amplitude().abs();
    let window = tail_window(trailing_peak(reference, floor)?.0);
    let errors: Vec<f64> = finals[..finals.len() - 1]
        .iter()
        .map(|u| {
            u.grid()
                .nodes()
                .iter()
                .zip(u.values().iter().zip(reference.values()))
                .filter(|(x, _)| (window.0..=window.1).contains(*x))
                .fold(0.0f64, |m, (_, (a, b))| m.max((a - b).abs()))
        })
        .collect();
    let ratio = (errors.len() >= 2 && errors[1] > 0.0).then(|| errors[0] / errors[1]);
    Ok(TailRefinement { steps: steps.to_vec(), window, errors, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_profile_identities_vanish() {
        let g = Grid::new(-10.0, 10.0, 64).unwrap();
        for r in check_identities_for(&Field::zeros(g), 2.0, 1.0).unwrap() {
            assert_eq!((r.lhs, r.rhs, r.abs_gap, r.rel_gap), (0.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn table_orders() {
        let t = ConvergenceTable::from_errors(&[10, 20, 40], &[1.0, 1.0 / 16.0, 1.0 / 256.0]);
        assert!(t.rows[0].observed_order.is_none());
        assert_abs_diff_eq!(t.rows[1].observed_order.unwrap(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.mean_order().unwrap(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.fitted_order().unwrap(), 4.0, epsilon = 1e-12);
        let z = ConvergenceTable::from_errors(&[10, 20], &[1.0, 0.0]);
        assert!(z.rows[1].observed_order.is_none());
        assert!(z.fitted_order().is_none());
    }

    #[test]
    fn local_maxima_are_subgrid_and_sorted() {
        let g = Grid::new(-20.0, 20.0, 400).unwrap();
        let u = Field::from_fn(g, |x| 2.0 * (-(x - 3.03) * (x - 3.03)).exp() + (-(x + 5.01) * (x + 5.01)).exp()).unwrap();
        let m = local_maxima(&u, 0.5);
        assert_eq!(m.len(), 2);
        assert!((m[0].0 - 3.03).abs() < 2e-3 && (m[1].0 + 5.01).abs() < 2e-3);
        assert_eq!(trailing_peak(&u, 0.5).unwrap().0, m[1].0);
    }

    #[test]
    fn collision_config_checks_geometry() {
        let mut cfg = CollisionConfig::overtaking();
        assert!(cfg.validate().is_ok());
        cfg.c1 = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = CollisionConfig::overtaking();
        cfg.x1 = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn temporal_self_comparison_is_exact() {
        let g = Grid::new(-20.0, 20.0, 64).unwrap();
        let u0 = Field::from_fn(g, |x| (-(x * x) / 4.0).exp()).unwrap();
        let t = temporal_convergence(&u0, 1.0, 0.5, &[5, 20], 20).unwrap();
        assert_eq!(t.rows[1].error, 0.0);
        assert!(t.rows[0].error > 0.0);
        assert!(temporal_convergence(&u0, 1.0, 0.5, &[20, 5], 40).is_err());
    }
}

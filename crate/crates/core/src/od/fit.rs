use alloc::vec::Vec;

use nalgebra::{SVector, Vector3};
#[allow(unused_imports)]
use num_traits::Float;

use super::{
    gibbs_velocity, koe_to_state, orbital_period, propagate, state_to_koe, KeplerianElements,
    OdError, StateVector, TimedPosition,
};
use crate::lsq::{minimize, LmOptions};

const MAX_OUTER: usize = 200;
const REL_TOL: f64 = 1e-10;

/// Result of [`fit_orbit`].
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitFit {
    pub elements: KeplerianElements,
    /// Time the elements refer to, seconds.
    pub epoch: f64,
    pub state: StateVector,
    /// Mean position discrepancy over all observations, km.
    pub objective: f64,
    /// Objective after each outer iteration on the full batch.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl OrbitFit {
    /// Fitted positions at `times`, metres.
    pub fn positions_at(&self, times: &[f64], mu: f64) -> Result<Vec<TimedPosition>, OdError> {
        times
            .iter()
            .map(|&t| {
                let s = propagate(&self.state, t - self.epoch, mu)?;
                Ok(TimedPosition::new(t, s.position * 1e3))
            })
            .collect()
    }
}

/// Orbit minimising the mean distance between propagated and observed
/// positions.
///
/// The state at the epoch of the middle Gibbs observation is estimated
/// first on the observations within two periods of that epoch, then on
/// windows that double until the whole batch is covered; a year of data
/// cannot be phased correctly from a Gibbs velocity alone. Each window is
/// solved by iteratively reweighted least squares with weights `1/‖rₘ‖`,
/// which does not increase the mean-norm objective.
pub fn fit_orbit(obs: &[TimedPosition], mu: f64) -> Result<OrbitFit, OdError> {
    let mut obs: Vec<(f64, Vector3<f64>)> = obs
        .iter()
        .filter(|o| o.is_finite())
        .map(|o| (o.timestamp, o.position * 1e-3))
        .collect();
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let m = obs.len();
    if m < 3 {
        return Err(OdError::InitializationFailed);
    }
    let span = obs[m - 1].0 - obs[0].0;

    let init = short_arc_triples(&obs, mu)
        .into_iter()
        .chain([(m / 4, m / 2, 3 * m / 4), (0, m / 2, m - 1)])
        .find_map(|(i, j, k)| {
            if i == j || j == k {
                return None;
            }
            let v = gibbs_velocity(&obs[i].1, &obs[j].1, &obs[k].1, mu).ok()?;
            let sv = StateVector::new(obs[j].1, v, obs[j].0);
            let koe = state_to_koe(&sv, mu).ok()?;
            (span >= 0.05 * orbital_period(koe.semi_major_axis, mu)).then_some(sv)
        });
    let mut state = init.ok_or(OdError::InitializationFailed)?;
    let epoch = state.epoch;
    let period = orbital_period(state_to_koe(&state, mu)?.semi_major_axis, mu);

    let mut half_width = 2.0 * period;
    let (history, iterations, converged) = loop {
        let all = obs.iter().all(|o| (o.0 - epoch).abs() <= half_width);
        let window: Vec<(f64, Vector3<f64>)> = if all {
            obs.clone()
        } else {
            obs.iter().filter(|o| (o.0 - epoch).abs() <= half_width).copied().collect()
        };
        if window.len() >= 3 || all {
            let out = solve_window(&state, &window, mu);
            state = out.0;
            if all {
                break (out.1, out.2, out.3);
            }
        }
        half_width *= 2.0;
    };
    let objective = mean_distance(&state, &obs, mu).ok_or(OdError::NoConvergence)?;
    let elements = state_to_koe(&state, mu).map_err(|_| OdError::NoConvergence)?;
    Ok(OrbitFit {
        elements,
        epoch,
        state,
        objective,
        objective_history: history,
        iterations,
        converged,
    })
}

/// Gibbs triples spanning less than one revolution, middle observation
/// closest to the batch centre first. Observations several revolutions
/// apart still fix the plane but not the direction of motion.
fn short_arc_triples(obs: &[(f64, Vector3<f64>)], mu: f64) -> Vec<(usize, usize, usize)> {
    let m = obs.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&j| j.abs_diff(m / 2));
    let mut out = Vec::new();
    for j in order {
        // circular-orbit period at this radius
        let reach = 0.4 * orbital_period(obs[j].1.norm(), mu);
        let (tj, rj) = (obs[j].0, obs[j].1);
        let i = (0..j).find(|&i| tj - obs[i].0 < reach && rj.angle(&obs[i].1) > 1e-3);
        let k = (j + 1..m).rev().find(|&k| obs[k].0 - tj < reach && rj.angle(&obs[k].1) > 1e-3);
        if let (Some(i), Some(k)) = (i, k) {
            out.push((i, j, k));
            if out.len() == 8 {
                break;
            }
        }
    }
    out
}

fn mean_distance(state: &StateVector, obs: &[(f64, Vector3<f64>)], mu: f64) -> Option<f64> {
    let mut sum = 0.0;
    for (t, p) in obs {
        sum += (propagate(state, t - state.epoch, mu).ok()?.position - p).norm();
    }
    Some(sum / obs.len() as f64)
}

fn to_params(s: &StateVector) -> SVector<f64, 6> {
    SVector::<f64, 6>::from_iterator(s.position.iter().chain(s.velocity.iter()).copied())
}

fn from_params(x: &SVector<f64, 6>, epoch: f64) -> StateVector {
    StateVector::new(Vector3::new(x[0], x[1], x[2]), Vector3::new(x[3], x[4], x[5]), epoch)
}

fn solve_window(
    start: &StateVector,
    obs: &[(f64, Vector3<f64>)],
    mu: f64,
) -> (StateVector, Vec<f64>, usize, bool) {
    let epoch = start.epoch;
    let mut state = *start;
    let Some(mut f) = mean_distance(&state, obs, mu) else {
        return (state, Vec::new(), 0, false);
    };
    let mut history = alloc::vec![f];
    let opts = LmOptions {
        max_iters: 4,
        rel_tol: 1e-15,
        abs_tol: 0.0,
        fd_step: SVector::<f64, 6>::from_column_slice(&[1e-6, 1e-6, 1e-6, 1e-9, 1e-9, 1e-9]),
        lambda0: 1e-4,
    };
    let mut weights = Vec::with_capacity(obs.len());
    for iter in 1..=MAX_OUTER {
        weights.clear();
        for (t, p) in obs {
            let d = propagate(&state, t - epoch, mu)
                .map(|s| (s.position - p).norm())
                .unwrap_or(f64::INFINITY);
            // floor keeps noise-free fits from dividing by zero
            weights.push(1.0 / d.max(1e-9).sqrt());
        }
        let residual = |x: &SVector<f64, 6>, r: &mut Vec<f64>| -> bool {
            r.clear();
            let s = from_params(x, epoch);
            for ((t, p), w) in obs.iter().zip(&weights) {
                let Ok(q) = propagate(&s, t - epoch, mu) else {
                    return false;
                };
                r.extend((q.position - p).iter().map(|v| v * w));
            }
            true
        };
        let Some(out) = minimize(to_params(&state), residual, |_| {}, &opts) else {
            return (state, history, iter, false);
        };
        let next = from_params(&out.x, epoch);
        let Some(fn_) = mean_distance(&next, obs, mu) else {
            return (state, history, iter, false);
        };
        if fn_ > f {
            return (state, history, iter, true);
        }
        let done = f - fn_ <= REL_TOL * f;
        state = next;
        f = fn_;
        history.push(f);
        if done {
            return (state, history, iter, true);
        }
    }
    (state, history, MAX_OUTER, false)
}

/// Positions of the orbit `koe` (elements at `epoch`) at each time, metres.
pub fn propagate_to_timestamps(
    koe: &KeplerianElements,
    epoch: f64,
    times: &[f64],
    mu: f64,
) -> Result<Vec<TimedPosition>, OdError> {
    let mut s0 = koe_to_state(koe, mu);
    s0.epoch = epoch;
    times
        .iter()
        .map(|&t| Ok(TimedPosition::new(t, propagate(&s0, t - epoch, mu)?.position * 1e3)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::MU_MOON_KM3_S2 as MU;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn table2() -> KeplerianElements {
        KeplerianElements {
            semi_major_axis: 1837.7,
            eccentricity: 3.8e-4,
            inclination: 90.0,
            raan: 227.0,
            arg_periapsis: 295.0,
            true_anomaly: 91.0,
        }
    }

    fn samples(n: usize, step: f64) -> Vec<TimedPosition> {
        let times: Vec<f64> = (0..n).map(|k| k as f64 * step).collect();
        propagate_to_timestamps(&table2(), 0.0, &times, MU).unwrap()
    }

    fn angle_diff(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(360.0);
        d.min(360.0 - d)
    }

    #[test]
    fn noise_free_recovery() {
        let obs = samples(60, 1200.0);
        let fit = fit_orbit(&obs, MU).unwrap();
        let truth = state_to_koe(&propagate(&koe_to_state(&table2(), MU), fit.epoch, MU).unwrap(), MU).unwrap();
        let e = &fit.elements;
        assert!((e.semi_major_axis / truth.semi_major_axis - 1.0).abs() < 1e-6);
        assert!((e.eccentricity - truth.eccentricity).abs() < 1e-6 * truth.eccentricity.max(1e-3));
        for (x, y) in [
            (e.inclination, truth.inclination),
            (e.raan, truth.raan),
            (e.arg_periapsis, truth.arg_periapsis),
            (e.true_anomaly, truth.true_anomaly),
        ] {
            assert!(angle_diff(x, y) < 1e-4, "{x} vs {y}");
        }
        // at the observation times the fitted orbit reproduces the data
        let times: Vec<f64> = obs.iter().map(|o| o.timestamp).collect();
        let back = propagate_to_timestamps(&fit.elements, fit.epoch, &times, MU).unwrap();
        for (a, b) in back.iter().zip(&obs) {
            assert!((a.position - b.position).norm() < 1e-3);
            assert_eq!(a.timestamp, b.timestamp);
        }
    }

    #[test]
    fn objective_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noise = Normal::new(0.0, 500.0).unwrap();
        let mut obs = samples(80, 1200.0);
        for o in &mut obs {
            o.position += Vector3::from_fn(|_, _| noise.sample(&mut rng));
        }
        let fit = fit_orbit(&obs, MU).unwrap();
        for w in fit.objective_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!((fit.objective - fit.objective_history.last().unwrap()).abs() < 1e-9);
    }

    /// 1 km isotropic noise, 50 samples over five orbits: the fitted orbit
    /// is closer to the truth than the individual samples.
    #[test]
    fn averages_out_noise() {
        let period = orbital_period(1837.7, MU);
        let step = 5.0 * period / 49.0;
        let clean = samples(50, step);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut rms: Vec<f64> = (0..100)
            .map(|seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let obs: Vec<TimedPosition> = clean
                    .iter()
                    .map(|o| {
                        let n = Vector3::from_fn(|_, _| noise.sample(&mut rng)) * 1e3;
                        TimedPosition::new(o.timestamp, o.position + n)
                    })
                    .collect();
                let fit = fit_orbit(&obs, MU).unwrap();
                let times: Vec<f64> = clean.iter().map(|o| o.timestamp).collect();
                let est = fit.positions_at(&times, MU).unwrap();
                let ss: f64 = est.iter().zip(&clean).map(|(a, b)| (a.position - b.position).norm_squared()).sum();
                (ss / clean.len() as f64).sqrt() * 1e-3
            })
            .collect();
        rms.sort_by(f64::total_cmp);
        assert!(rms[89] < 1.0, "{}", rms[89]);
    }

    #[test]
    fn outliers_stay_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let noise = Normal::new(0.0, 300.0).unwrap();
        let clean = samples(120, 1200.0);
        let mut obs = clean.clone();
        for (k, o) in obs.iter_mut().enumerate() {
            o.position += Vector3::from_fn(|_, _| noise.sample(&mut rng));
            if k % 10 == 3 {
                let dir = Vector3::from_fn(|_, _| noise.sample(&mut rng)).normalize();
                o.position += dir * 25_000.0;
            }
        }
        let fit = fit_orbit(&obs, MU).unwrap();
        let times: Vec<f64> = clean.iter().map(|o| o.timestamp).collect();
        let est = fit.positions_at(&times, MU).unwrap();
        for (k, (a, b)) in est.iter().zip(&clean).enumerate() {
            if k % 10 != 3 {
                assert!((a.position - b.position).norm() < 25_000.0);
            }
        }
        let worst = est.iter().zip(&clean).map(|(a, b)| (a.position - b.position).norm()).fold(0.0, f64::max);
        assert!(worst < 5_000.0, "{worst}");
    }

    #[test]
    fn long_batch_is_phased_correctly() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 200.0).unwrap();
        // thirty days at the mission cadence
        let clean = samples(2160, 1200.0);
        let obs: Vec<TimedPosition> = clean
            .iter()
            .map(|o| TimedPosition::new(o.timestamp, o.position + Vector3::from_fn(|_, _| noise.sample(&mut rng))))
            .collect();
        let fit = fit_orbit(&obs, MU).unwrap();
        let times: Vec<f64> = clean.iter().map(|o| o.timestamp).collect();
        let est = fit.positions_at(&times, MU).unwrap();
        let worst = est.iter().zip(&clean).map(|(a, b)| (a.position - b.position).norm()).fold(0.0, f64::max);
        assert!(worst < 100.0, "{worst}");
    }

    #[test]
    fn half_orbit_arcs_keep_the_direction_of_motion() {
        // two days, only one half of every revolution observed
        let clean = samples(144, 1200.0);
        let lit: Vec<TimedPosition> = clean.iter().filter(|o| o.position.x > 0.0).copied().collect();
        assert!(lit.len() < 100);
        let fit = fit_orbit(&lit, MU).unwrap();
        let times: Vec<f64> = clean.iter().map(|o| o.timestamp).collect();
        let est = fit.positions_at(&times, MU).unwrap();
        let worst = est.iter().zip(&clean).map(|(a, b)| (a.position - b.position).norm()).fold(0.0, f64::max);
        assert!(worst < 1.0, "{worst}");
    }

    #[test]
    fn propagation_preserves_order_and_period() {
        let p = orbital_period(1837.7, MU);
        let times = [0.0, 10.0, 500.0, p];
        let out = propagate_to_timestamps(&table2(), 0.0, &times, MU).unwrap();
        assert_eq!(out.iter().map(|o| o.timestamp).collect::<Vec<_>>(), times);
        assert!((out[3].position - out[0].position).norm() < 1e-3);
    }

    #[test]
    fn too_few_observations() {
        let obs = samples(2, 1200.0);
        assert_eq!(fit_orbit(&obs, MU), Err(OdError::InitializationFailed));
        let same = [obs[0]; 5];
        assert_eq!(fit_orbit(&same, MU), Err(OdError::InitializationFailed));
    }
}

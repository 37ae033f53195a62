//! Log synthesis: noise, movement bursts, lean-back timeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{BehaviorProfile, PopulationSpec, SimError};
use crate::exec;
use crate::telemetry::{ImuSample, PlayerLog, NOMINAL_DT};

const SAMPLE_RATE_HZ: f64 = 100.0;
/// Lean-back scheduling period: each period carries one lean interval whose
/// length matches the configured fraction, at a random offset.
const LEAN_PERIOD_S: f64 = 60.0;
const EVENT_MIN_S: f64 = 0.2;
const EVENT_MAX_S: f64 = 1.0;
/// Burst onset/offset ramp. Bursts shorter than two ramps degenerate to a
/// half-sine; longer ones hold their peak between the ramps so most of the
/// burst clears the 3-sigma detector.
const EVENT_RAMP_S: f64 = 0.1;

struct Burst {
    start: f64,
    duration: f64,
    sign: f64,
}

fn draw_bursts(rng: &mut ChaCha8Rng, rate_per_min: f64, duration: f64) -> Vec<Burst> {
    let mut bursts = Vec::new();
    if rate_per_min <= 0.0 {
        return bursts;
    }
    let rate_per_s = rate_per_min / 60.0;
    let mut t = 0.0;
    loop {
        // Exponential inter-arrival via inverse CDF.
        let u: f64 = rng.random();
        t += -(1.0 - u).ln() / rate_per_s;
        if t >= duration {
            break;
        }
        let dur = rng.random_range(EVENT_MIN_S..EVENT_MAX_S);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        bursts.push(Burst {
            start: t,
            duration: dur,
            sign,
        });
    }
    bursts
}

fn burst_shape(elapsed: f64, duration: f64) -> f64 {
    let ramp = EVENT_RAMP_S.min(duration / 2.0);
    if elapsed < 0.0 || elapsed > duration {
        0.0
    } else if elapsed < ramp {
        (std::f64::consts::FRAC_PI_2 * elapsed / ramp).sin()
    } else if elapsed > duration - ramp {
        (std::f64::consts::FRAC_PI_2 * (duration - elapsed) / ramp).sin()
    } else {
        1.0
    }
}

fn add_bursts(signal: &mut [f64], bursts: &[Burst], amplitude: f64) {
    for b in bursts {
        let first = (b.start / NOMINAL_DT).ceil() as usize;
        let last = ((b.start + b.duration) / NOMINAL_DT).floor() as usize;
        for i in first..=last.min(signal.len().saturating_sub(1)) {
            let elapsed = i as f64 * NOMINAL_DT - b.start;
            signal[i] += b.sign * amplitude * burst_shape(elapsed, b.duration);
        }
    }
}

/// Lean intervals as (start, end) pairs covering `fraction` of each period.
fn draw_lean_intervals(rng: &mut ChaCha8Rng, fraction: f64, duration: f64) -> Vec<(f64, f64)> {
    let mut intervals = Vec::new();
    if fraction <= 0.0 {
        return intervals;
    }
    let periods = (duration / LEAN_PERIOD_S).ceil() as usize;
    for p in 0..periods {
        let period_start = p as f64 * LEAN_PERIOD_S;
        let lean_len = fraction * LEAN_PERIOD_S;
        let slack = LEAN_PERIOD_S - lean_len;
        let offset = if slack > 0.0 {
            rng.random_range(0.0..slack)
        } else {
            0.0
        };
        intervals.push((period_start + offset, period_start + offset + lean_len));
    }
    intervals
}

fn is_leaning(intervals: &[(f64, f64)], t: f64) -> bool {
    intervals.iter().any(|(a, b)| t >= *a && t < *b)
}

/// Generates a 100 Hz log of `duration_s` seconds for one player.
///
/// Per axis the signal is baseline + Gaussian quiescent noise + Poisson
/// movement bursts of `active_event_amplitude * sigma`. The vertical accel
/// baseline is 1 g upright and cos(tilt) while leaning. Fully deterministic
/// given `profile.rng_seed`.
pub fn generate_log(
    profile: &BehaviorProfile,
    duration_s: f64,
    player_id: &str,
) -> Result<PlayerLog, SimError> {
    profile.validate()?;
    if !(duration_s > 0.0) {
        return Err(SimError::InvalidProfile("duration must be positive".into()));
    }
    let n = (duration_s * SAMPLE_RATE_HZ).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.rng_seed);

    let lean = draw_lean_intervals(&mut rng, profile.lean_back_fraction, duration_s);

    let sigmas = [
        profile.quiescent_std_accel[0],
        profile.quiescent_std_accel[1],
        profile.quiescent_std_accel[2],
        profile.quiescent_std_gyro[0],
        profile.quiescent_std_gyro[1],
        profile.quiescent_std_gyro[2],
    ];

    // Channel-major synthesis keeps the rng draw order independent of how
    // samples are later assembled.
    let mut channels: Vec<Vec<f64>> = Vec::with_capacity(6);
    for sigma in sigmas {
        let bursts = draw_bursts(&mut rng, profile.active_event_rate, duration_s);
        let normal = Normal::new(0.0, sigma).expect("positive sigma");
        let mut series: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        add_bursts(&mut series, &bursts, profile.active_event_amplitude * sigma);
        channels.push(series);
    }

    // Magnetometer: constant per-player field plus sensor noise; stored but
    // never used by features.
    let mag_base = [
        30.0 + rng.random_range(-3.0..3.0),
        5.0 + rng.random_range(-3.0..3.0),
        -40.0 + rng.random_range(-3.0..3.0),
    ];
    let mag_noise = Normal::new(0.0, 0.5).expect("positive sigma");
    let mut mag: Vec<[f64; 3]> = Vec::with_capacity(n);
    for _ in 0..n {
        mag.push([
            mag_base[0] + mag_noise.sample(&mut rng),
            mag_base[1] + mag_noise.sample(&mut rng),
            mag_base[2] + mag_noise.sample(&mut rng),
        ]);
    }

    let tilt_cos = profile.lean_back_tilt_deg.to_radians().cos();
    let samples: Vec<ImuSample> = (0..n)
        .map(|i| {
            let t = i as f64 / SAMPLE_RATE_HZ;
            let az_base = if is_leaning(&lean, t) { tilt_cos } else { 1.0 };
            ImuSample {
                t,
                ax: channels[0][i],
                ay: channels[1][i],
                az: az_base + channels[2][i],
                gx: channels[3][i],
                gy: channels[4][i],
                gz: channels[5][i],
                mx: mag[i][0],
                my: mag[i][1],
                mz: mag[i][2],
            }
        })
        .collect();

    PlayerLog::new(player_id, profile.skill, samples)
        .map_err(|e| SimError::InvalidProfile(format!("generated log invalid: {e}")))
}

fn draw_range(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn draw_profile(
    rng: &mut ChaCha8Rng,
    ranges: &super::ProfileRanges,
    skill: u8,
) -> BehaviorProfile {
    BehaviorProfile {
        skill,
        active_event_rate: draw_range(rng, ranges.active_event_rate),
        active_event_amplitude: draw_range(rng, ranges.active_event_amplitude),
        quiescent_std_accel: [
            draw_range(rng, ranges.quiescent_std_accel[0]),
            draw_range(rng, ranges.quiescent_std_accel[1]),
            draw_range(rng, ranges.quiescent_std_accel[2]),
        ],
        quiescent_std_gyro: [
            draw_range(rng, ranges.quiescent_std_gyro[0]),
            draw_range(rng, ranges.quiescent_std_gyro[1]),
            draw_range(rng, ranges.quiescent_std_gyro[2]),
        ],
        lean_back_fraction: draw_range(rng, ranges.lean_back_fraction),
        lean_back_tilt_deg: draw_range(rng, ranges.lean_back_tilt_deg),
        rng_seed: rng.random(),
    }
}

/// Generates one log per player. High-skill players come first as
/// `p01..`, then low-skill; all parameter draws derive from the master
/// seed, and the per-player streams are generated in parallel.
pub fn generate_population(spec: &PopulationSpec) -> Result<Vec<PlayerLog>, SimError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.master_seed);
    let total = spec.high_skill_players + spec.low_skill_players;
    let mut plans: Vec<(String, BehaviorProfile, f64)> = Vec::with_capacity(total);
    for i in 0..total {
        let (skill, ranges) = if i < spec.high_skill_players {
            (1, &spec.high_skill)
        } else {
            (0, &spec.low_skill)
        };
        let profile = draw_profile(&mut rng, ranges, skill);
        let minutes = draw_range(
            &mut rng,
            (
                spec.session_minutes - spec.session_minutes_jitter,
                spec.session_minutes + spec.session_minutes_jitter,
            ),
        );
        let player_id = format!("p{:02}", i + 1);
        plans.push((player_id, profile, minutes * 60.0));
    }

    let logs = exec::map_ordered(&plans, |(id, profile, duration)| {
        generate_log(profile, *duration, id)
    });
    logs.into_iter().collect()
}

/// Splits a log into consecutive 1-second batches (by timestamp relative to
/// the first sample). Empty seconds produce no batch.
pub fn one_second_batches(log: &PlayerLog) -> Vec<Vec<ImuSample>> {
    let mut batches: Vec<Vec<ImuSample>> = Vec::new();
    if log.samples.is_empty() {
        return batches;
    }
    let t0 = log.samples[0].t;
    let mut current_key = 0u64;
    let mut current: Vec<ImuSample> = Vec::new();
    for s in &log.samples {
        let key = (s.t - t0).floor() as u64;
        if key != current_key && !current.is_empty() {
            batches.push(std::mem::take(&mut current));
        }
        current_key = key;
        current.push(*s);
    }
    if !current.is_empty() {
        batches.push(current);
    }
    batches
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet_profile(seed: u64) -> BehaviorProfile {
        BehaviorProfile {
            skill: 0,
            active_event_rate: 0.0,
            active_event_amplitude: 12.0,
            quiescent_std_accel: [0.01, 0.01, 0.01],
            quiescent_std_gyro: [0.5, 0.5, 0.5],
            lean_back_fraction: 0.0,
            lean_back_tilt_deg: 18.0,
            rng_seed: seed,
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let p = quiet_profile(99);
        let a = generate_log(&p, 10.0, "p01").unwrap();
        let b = generate_log(&p, 10.0, "p01").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seed_different_stream() {
        let a = generate_log(&quiet_profile(1), 10.0, "p01").unwrap();
        let b = generate_log(&quiet_profile(2), 10.0, "p01").unwrap();
        assert_ne!(a.samples, b.samples);
    }

    #[test]
    fn sample_count_and_rate() {
        let log = generate_log(&quiet_profile(5), 12.34, "p01").unwrap();
        assert_eq!(log.samples.len(), 1234);
        assert!((log.samples[1].t - log.samples[0].t - 0.01).abs() < 1e-12);
    }

    #[test]
    fn full_lean_depresses_vertical_axis() {
        let mut p = quiet_profile(7);
        p.lean_back_fraction = 1.0;
        p.lean_back_tilt_deg = 20.0;
        let log = generate_log(&p, 60.0, "p01").unwrap();
        let mean_az: f64 =
            log.samples.iter().map(|s| s.az).sum::<f64>() / log.samples.len() as f64;
        let expect = (20f64).to_radians().cos();
        assert!(
            (mean_az - expect).abs() < 0.005,
            "mean az {mean_az} vs cos(20deg) {expect}"
        );
    }

    #[test]
    fn amplitude_at_or_below_three_sigma_rejected() {
        let mut p = quiet_profile(1);
        p.active_event_amplitude = 3.0;
        assert!(matches!(
            generate_log(&p, 1.0, "x"),
            Err(SimError::InvalidProfile(_))
        ));
    }

    #[test]
    fn default_population_counts_and_labels() {
        let spec = PopulationSpec {
            session_minutes: 1.0,
            session_minutes_jitter: 0.2,
            ..PopulationSpec::default()
        };
        let logs = generate_population(&spec).unwrap();
        assert_eq!(logs.len(), 19);
        assert_eq!(logs.iter().filter(|l| l.skill == 1).count(), 9);
        assert_eq!(logs.iter().filter(|l| l.skill == 0).count(), 10);
        let ids: Vec<&str> = logs.iter().map(|l| l.player_id.as_str()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted, "generation order should match sorted order");
    }

    #[test]
    fn minimal_population() {
        let spec = PopulationSpec {
            high_skill_players: 1,
            low_skill_players: 1,
            session_minutes: 0.5,
            session_minutes_jitter: 0.0,
            ..PopulationSpec::default()
        };
        let logs = generate_population(&spec).unwrap();
        assert_eq!(logs.len(), 2);
    }

    #[test]
    fn empty_class_rejected() {
        let spec = PopulationSpec {
            high_skill_players: 0,
            ..PopulationSpec::default()
        };
        assert!(matches!(
            generate_population(&spec),
            Err(SimError::InvalidSpec(_))
        ));
    }

    #[test]
    fn different_master_seeds_differ_but_keep_counts() {
        let mk = |seed| PopulationSpec {
            session_minutes: 0.5,
            session_minutes_jitter: 0.0,
            master_seed: seed,
            ..PopulationSpec::default()
        };
        let a = generate_population(&mk(1)).unwrap();
        let b = generate_population(&mk(2)).unwrap();
        assert_eq!(a.len(), b.len());
        assert_ne!(a[0].samples, b[0].samples);
    }

    #[test]
    fn one_second_batching() {
        let log = generate_log(&quiet_profile(3), 3.0, "p01").unwrap();
        let batches = one_second_batches(&log);
        assert_eq!(batches.len(), 3);
        for b in &batches {
            assert_eq!(b.len(), 100);
        }
        let flat: Vec<_> = batches.into_iter().flatten().collect();
        assert_eq!(flat, log.samples);
    }

    #[test]
    fn burst_shape_is_smooth_and_unit_peak() {
        assert_eq!(burst_shape(0.0, 0.5), 0.0);
        assert!((burst_shape(0.25, 0.5) - 1.0).abs() < 1e-12);
        assert_eq!(burst_shape(0.5, 0.5), 0.0);
        // Long burst holds its plateau.
        assert_eq!(burst_shape(0.3, 1.0), 1.0);
        assert_eq!(burst_shape(0.7, 1.0), 1.0);
        assert!(burst_shape(0.05, 1.0) < 1.0);
    }
}

//! Synthetic four-channel traffic scene generation.
//!
//! A scene places a linear four-microphone array parallel to a single traffic
//! lane and renders each vehicle event as a moving point source: per-channel
//! propagation delay and 1/distance amplitude, no reflections and no Doppler
//! pitch shift. Delays and pass-by envelopes are the cues the downstream
//! feature branches consume, so the simulator keeps those physically
//! consistent and leaves the rest simple.

mod dataset;
mod wav;

pub use dataset::{read_manifest, write_dataset, write_dataset_with_locations, ManifestRow};
pub use wav::{read_wav, write_wav_f32};

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Speed of sound used throughout, m/s.
pub const SPEED_OF_SOUND: f64 = 343.0;

/// Category names in label order.
pub const CATEGORIES: [&str; 4] = ["car_left", "car_right", "cv_left", "cv_right"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VehicleType {
    Car,
    Commercial,
}

/// Travel direction along the lane. Channel 1 is the leftmost microphone and
/// `LeftToRight` means motion from negative to positive coordinates; the
/// `_left` label suffix refers to this direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

impl Direction {
    /// Sign of dx/dt for a vehicle travelling in this direction.
    pub fn motion_sign(self) -> f64 {
        match self {
            Direction::LeftToRight => 1.0,
            Direction::RightToLeft => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VehicleEvent {
    pub vehicle_type: VehicleType,
    pub direction: Direction,
    /// Pass-by speed, km/h. Must be positive and within the preset cap.
    pub speed_kmh: f64,
    /// Time of closest approach to the array center, seconds.
    pub t_closest: f64,
    /// Linear source amplitude before the 1/distance law.
    pub source_gain: f64,
}

impl VehicleEvent {
    pub fn speed_ms(&self) -> f64 {
        self.speed_kmh / 3.6
    }

    pub fn category_index(&self) -> usize {
        match (self.vehicle_type, self.direction) {
            (VehicleType::Car, Direction::LeftToRight) => 0,
            (VehicleType::Car, Direction::RightToLeft) => 1,
            (VehicleType::Commercial, Direction::LeftToRight) => 2,
            (VehicleType::Commercial, Direction::RightToLeft) => 3,
        }
    }
}

/// Recording-site presets: caps on pass-by speed (km/h) and traffic density
/// (vehicles per minute) per site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocationPreset {
    Loc1,
    Loc2,
    Loc3,
    Loc4,
    Loc5,
    Loc6,
}

impl LocationPreset {
    pub const ALL: [LocationPreset; 6] = [
        LocationPreset::Loc1,
        LocationPreset::Loc2,
        LocationPreset::Loc3,
        LocationPreset::Loc4,
        LocationPreset::Loc5,
        LocationPreset::Loc6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LocationPreset::Loc1 => "loc1",
            LocationPreset::Loc2 => "loc2",
            LocationPreset::Loc3 => "loc3",
            LocationPreset::Loc4 => "loc4",
            LocationPreset::Loc5 => "loc5",
            LocationPreset::Loc6 => "loc6",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        LocationPreset::ALL
            .iter()
            .copied()
            .find(|p| p.name() == name)
            .ok_or_else(|| {
                Error::config(
                    "preset",
                    format!(
                        "unknown location preset {name:?}; valid names: loc1, loc2, loc3, loc4, loc5, loc6"
                    ),
                )
            })
    }

    pub fn max_speed_kmh(self) -> f64 {
        match self {
            LocationPreset::Loc1 => 100.0,
            LocationPreset::Loc2 => 50.0,
            LocationPreset::Loc3 => 50.0,
            LocationPreset::Loc4 => 50.0,
            LocationPreset::Loc5 => 40.0,
            LocationPreset::Loc6 => 90.0,
        }
    }

    pub fn max_density_per_min(self) -> f64 {
        match self {
            LocationPreset::Loc1 => 1000.0,
            LocationPreset::Loc2 => 900.0,
            LocationPreset::Loc3 => 500.0,
            LocationPreset::Loc4 => 400.0,
            LocationPreset::Loc5 => 140.0,
            LocationPreset::Loc6 => 900.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SceneConfig {
    pub duration_s: f64,
    pub sample_rate: u32,
    /// Microphone x-coordinates in meters, strictly increasing, on a line
    /// parallel to the lane. Channel index = position index.
    pub mic_positions: [f64; 4],
    /// Perpendicular distance from the array line to the lane, meters.
    pub lane_distance: f64,
    pub events: Vec<VehicleEvent>,
    /// Std-dev of the additive white noise, linear amplitude.
    pub noise_level: f64,
    pub location: LocationPreset,
}

impl SceneConfig {
    /// Default desk-scale geometry: 10 cm spacing, 4 m lane distance, 16 kHz.
    pub fn with_default_geometry(location: LocationPreset) -> Self {
        SceneConfig {
            duration_s: 6.0,
            sample_rate: 16_000,
            mic_positions: [0.0, 0.1, 0.2, 0.3],
            lane_distance: 4.0,
            events: Vec::new(),
            noise_level: 0.01,
            location,
        }
    }

    pub fn array_center(&self) -> f64 {
        self.mic_positions.iter().sum::<f64>() / 4.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0) {
            return Err(Error::config("duration_s", "must be > 0"));
        }
        if self.sample_rate == 0 {
            return Err(Error::config("sample_rate", "must be > 0"));
        }
        if !(self.lane_distance > 0.0) {
            return Err(Error::config("lane_distance", "must be > 0"));
        }
        if self.noise_level < 0.0 {
            return Err(Error::config("noise_level", "must be >= 0"));
        }
        for w in self.mic_positions.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::config(
                    "mic_positions",
                    "must be strictly increasing",
                ));
            }
        }
        for (i, ev) in self.events.iter().enumerate() {
            if !(ev.speed_kmh > 0.0) {
                return Err(Error::config(
                    format!("events[{i}].speed"),
                    "must be > 0 km/h",
                ));
            }
            if ev.speed_kmh > self.location.max_speed_kmh() {
                return Err(Error::config(
                    format!("events[{i}].speed"),
                    format!(
                        "{} km/h exceeds {} cap of {} km/h",
                        ev.speed_kmh,
                        self.location.name(),
                        self.location.max_speed_kmh()
                    ),
                ));
            }
            if ev.t_closest < 0.0 || ev.t_closest > self.duration_s {
                return Err(Error::config(
                    format!("events[{i}].t_closest"),
                    format!("{} s outside scene [0, {}]", ev.t_closest, self.duration_s),
                ));
            }
            if !(ev.source_gain >= 0.0) {
                return Err(Error::config(
                    format!("events[{i}].source_gain"),
                    "must be >= 0",
                ));
            }
        }
        Ok(())
    }
}

/// Per-category vehicle counts in the order
/// (car_left, car_right, cv_left, cv_right).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SceneLabel {
    pub counts: [u32; 4],
}

impl SceneLabel {
    pub fn from_events(events: &[VehicleEvent]) -> Self {
        let mut counts = [0u32; 4];
        for ev in events {
            counts[ev.category_index()] += 1;
        }
        SceneLabel { counts }
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn as_f64(&self) -> [f64; 4] {
        [
            self.counts[0] as f64,
            self.counts[1] as f64,
            self.counts[2] as f64,
            self.counts[3] as f64,
        ]
    }
}

/// Four-channel time-domain signal, amplitudes in [-1, 1].
#[derive(Debug, Clone)]
pub struct MultiChannelAudio {
    /// 4 x L sample matrix; row = channel.
    pub samples: Array2<f64>,
    pub sample_rate: u32,
}

impl MultiChannelAudio {
    pub fn new(samples: Array2<f64>, sample_rate: u32) -> Result<Self> {
        if samples.nrows() != 4 {
            return Err(Error::shape(
                "MultiChannelAudio",
                "4 channels",
                format!("{} channels", samples.nrows()),
            ));
        }
        if samples.ncols() == 0 {
            return Err(Error::EmptyInput("audio with zero samples".into()));
        }
        if samples.iter().any(|v| !v.is_finite() || v.abs() > 1.0 + 1e-9) {
            return Err(Error::Contract(
                "audio samples must be finite and within [-1, 1]".into(),
            ));
        }
        Ok(MultiChannelAudio {
            samples,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.ncols() == 0
    }

    pub fn channel(&self, c: usize) -> ndarray::ArrayView1<'_, f64> {
        self.samples.row(c)
    }
}

/// Source x-coordinate at time `t` for a straight-line constant-speed pass-by.
pub fn source_position(config: &SceneConfig, event: &VehicleEvent, t: f64) -> f64 {
    config.array_center() + event.direction.motion_sign() * event.speed_ms() * (t - event.t_closest)
}

fn mic_distance(config: &SceneConfig, event: &VehicleEvent, t: f64, channel: usize) -> f64 {
    let x = source_position(config, event, t);
    (x - config.mic_positions[channel]).hypot(config.lane_distance)
}

/// Inter-channel propagation-delay difference for one event at time `t`,
/// in seconds: `(|source - mic_c| - |source - mic_k|) / c`.
///
/// Positive when the source is farther from channel `c` than from channel
/// `k`, i.e. when channel `c` receives the wavefront later. Antisymmetric in
/// the pair order.
pub fn pass_by_delay_profile(
    config: &SceneConfig,
    event: &VehicleEvent,
    t: f64,
    pair: (usize, usize),
) -> f64 {
    let (c, k) = pair;
    (mic_distance(config, event, t, c) - mic_distance(config, event, t, k)) / SPEED_OF_SOUND
}

/// Per-vehicle source model: pink noise plus engine harmonics. Commercial
/// vehicles sit an octave lower and 6 dB hotter.
fn render_source(event: &VehicleEvent, sample_rate: u32, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (f0_lo, f0_hi, f_max, type_gain) = match event.vehicle_type {
        VehicleType::Car => (80.0, 100.0, 200.0, 1.0),
        VehicleType::Commercial => (40.0, 60.0, 120.0, 2.0),
    };
    let f0: f64 = rng.random_range(f0_lo..f0_hi);

    // Paul Kellet's economy pink-noise filter over seeded white noise.
    let mut pink = vec![0.0f64; n];
    let (mut b0, mut b1, mut b2) = (0.0f64, 0.0f64, 0.0f64);
    for p in pink.iter_mut() {
        let white: f64 = StandardNormal.sample(rng);
        b0 = 0.99765 * b0 + white * 0.0990460;
        b1 = 0.96300 * b1 + white * 0.2965164;
        b2 = 0.57000 * b2 + white * 1.0526913;
        *p = b0 + b1 + b2 + white * 0.1848;
    }
    let pink_rms = (pink.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    if pink_rms > 0.0 {
        for p in pink.iter_mut() {
            *p /= pink_rms;
        }
    }

    let mut partials = Vec::new();
    let mut k = 1.0;
    while k * f0 <= f_max {
        partials.push((k * f0, 1.0 / k, rng.random_range(0.0..std::f64::consts::TAU)));
        k += 1.0;
    }

    let dt = 1.0 / sample_rate as f64;
    let mut out = vec![0.0f64; n];
    for (i, o) in out.iter_mut().enumerate() {
        let t = i as f64 * dt;
        let mut harm = 0.0;
        for &(f, a, phase) in &partials {
            harm += a * (std::f64::consts::TAU * f * t + phase).sin();
        }
        *o = 0.5 * pink[i] + 0.5 * harm;
    }
    let rms = (out.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let scale = if rms > 0.0 {
        type_gain * event.source_gain / rms
    } else {
        0.0
    };
    for o in out.iter_mut() {
        *o *= scale;
    }
    out
}

/// Renders a labeled scene. Deterministic: identical `(config, seed)` yield
/// bit-identical audio.
pub fn synth_scene(config: &SceneConfig, seed: u64) -> Result<(MultiChannelAudio, SceneLabel)> {
    config.validate()?;
    let fs = config.sample_rate as f64;
    let n = (config.duration_s * fs).round() as usize;
    if n == 0 {
        return Err(Error::config("duration_s", "scene shorter than one sample"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Array2::<f64>::zeros((4, n));

    for event in &config.events {
        // Source samples must exist for emission times t - tau(t); pad the
        // front of the buffer by the largest delay in the scene.
        let mut max_dist: f64 = 0.0;
        for &t in &[0.0, config.duration_s] {
            for c in 0..4 {
                max_dist = max_dist.max(mic_distance(config, event, t, c));
            }
        }
        let lead = (max_dist / SPEED_OF_SOUND * fs).ceil() as usize + 2;
        let src = render_source(event, config.sample_rate, n + lead, &mut rng);

        for c in 0..4 {
            for i in 0..n {
                let t = i as f64 / fs;
                let dist = mic_distance(config, event, t, c);
                let tau = dist / SPEED_OF_SOUND;
                // Fractional read into the padded source buffer.
                let pos = (t - tau) * fs + lead as f64;
                let i0 = pos.floor() as isize;
                let frac = pos - i0 as f64;
                if i0 < 0 || (i0 as usize) + 1 >= src.len() {
                    continue;
                }
                let s = src[i0 as usize] * (1.0 - frac) + src[i0 as usize + 1] * frac;
                out[[c, i]] += s / dist;
            }
        }
    }

    if config.noise_level > 0.0 {
        for c in 0..4 {
            for i in 0..n {
                let w: f64 = StandardNormal.sample(&mut rng);
                out[[c, i]] += config.noise_level * w;
            }
        }
    }

    // Uniform rescale preserves inter-channel ratios and delays.
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 1.0 {
        out.mapv_inplace(|v| v * (0.999 / peak));
    }

    let label = SceneLabel::from_events(&config.events);
    Ok((MultiChannelAudio::new(out, config.sample_rate)?, label))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_event(direction: Direction, vehicle_type: VehicleType) -> VehicleEvent {
        VehicleEvent {
            vehicle_type,
            direction,
            speed_kmh: 36.0,
            t_closest: 1.0,
            source_gain: 0.1,
        }
    }

    fn base_config() -> SceneConfig {
        let mut c = SceneConfig::with_default_geometry(LocationPreset::Loc3);
        c.duration_s = 2.0;
        c.noise_level = 0.0;
        c
    }

    #[test]
    fn delay_zero_for_symmetric_pair_at_closest_approach() {
        let config = base_config();
        let ev = one_event(Direction::LeftToRight, VehicleType::Car);
        // Pair (0, 3) is symmetric about the array center.
        let d = pass_by_delay_profile(&config, &ev, ev.t_closest, (0, 3));
        assert!(d.abs() < 1e-15, "delay at closest approach: {d}");
    }

    #[test]
    fn delay_approaches_aperture_limit_far_away() {
        let mut config = base_config();
        config.mic_positions = [0.0, 0.5, 1.0, 1.5];
        let ev = VehicleEvent {
            t_closest: 0.0,
            speed_kmh: 36.0,
            ..one_event(Direction::LeftToRight, VehicleType::Car)
        };
        // Source at x = -1000 m: t with center + v(t - t_c) = -1000.
        let t = (-1000.0 - config.array_center()) / ev.speed_ms();
        let mut relaxed = config.clone();
        relaxed.duration_s = 1e9;
        let d = pass_by_delay_profile(&relaxed, &ev, t, (0, 1));
        let limit = 0.5 / SPEED_OF_SOUND;
        // Far to the left, mic 0 is closer than mic 1: delay is negative.
        assert!(d < 0.0);
        assert!(
            (d.abs() - limit).abs() < 1e-5,
            "asymptotic delay {d}, limit {limit}"
        );
    }

    #[test]
    fn delay_sign_flips_across_closest_approach() {
        let config = base_config();
        let ev = one_event(Direction::LeftToRight, VehicleType::Car);
        let before = pass_by_delay_profile(&config, &ev, ev.t_closest - 1.0, (0, 3));
        let after = pass_by_delay_profile(&config, &ev, ev.t_closest + 1.0, (0, 3));
        assert!(
            before * after < 0.0,
            "expected opposite signs: {before} vs {after}"
        );
    }

    #[test]
    fn delay_antisymmetry_and_aperture_bound() {
        let config = base_config();
        let ev = one_event(Direction::RightToLeft, VehicleType::Commercial);
        let aperture = config.mic_positions[3] - config.mic_positions[0];
        for i in 0..50 {
            let t = config.duration_s * i as f64 / 49.0;
            for &(c, k) in &[(0usize, 1usize), (0, 3), (1, 2), (2, 3)] {
                let d = pass_by_delay_profile(&config, &ev, t, (c, k));
                let r = pass_by_delay_profile(&config, &ev, t, (k, c));
                assert!((d + r).abs() < 1e-18);
                assert!(d.abs() <= aperture / SPEED_OF_SOUND + 1e-15);
            }
        }
    }

    #[test]
    fn empty_scene_is_silent_with_zero_label() {
        let config = base_config();
        let (audio, label) = synth_scene(&config, 7).unwrap();
        assert_eq!(label.counts, [0, 0, 0, 0]);
        assert!(audio.samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn label_counts_follow_events() {
        let mut config = base_config();
        config.events = vec![
            one_event(Direction::LeftToRight, VehicleType::Car),
            one_event(Direction::RightToLeft, VehicleType::Commercial),
            one_event(Direction::LeftToRight, VehicleType::Car),
        ];
        let (_, label) = synth_scene(&config, 0).unwrap();
        assert_eq!(label.counts, [2, 0, 0, 1]);
        assert_eq!(label.total(), 3);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let mut config = base_config();
        config.noise_level = 0.02;
        config.events = vec![one_event(Direction::LeftToRight, VehicleType::Car)];
        let (a, _) = synth_scene(&config, 42).unwrap();
        let (b, _) = synth_scene(&config, 42).unwrap();
        assert_eq!(a.samples, b.samples);
        let (c, _) = synth_scene(&config, 43).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn speed_above_preset_cap_is_rejected() {
        let mut config = base_config();
        config.location = LocationPreset::Loc5;
        config.events = vec![VehicleEvent {
            speed_kmh: 60.0,
            ..one_event(Direction::LeftToRight, VehicleType::Car)
        }];
        let err = synth_scene(&config, 0).unwrap_err();
        match err {
            Error::Config { field, message } => {
                assert!(field.contains("speed"));
                assert!(message.contains("loc5"));
            }
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn widest_pair_delay_trend_reverses_with_direction() {
        let config = base_config();
        for (dir, expect_increasing) in [(Direction::LeftToRight, true), (Direction::RightToLeft, false)]
        {
            let ev = one_event(dir, VehicleType::Car);
            let mut prev = None;
            let mut deltas = Vec::new();
            for i in 0..40 {
                let t = 0.2 + 1.6 * i as f64 / 39.0;
                let d = pass_by_delay_profile(&config, &ev, t, (0, 3));
                if let Some(p) = prev {
                    deltas.push(d - p);
                }
                prev = Some(d);
            }
            if expect_increasing {
                assert!(deltas.iter().all(|&x| x >= 0.0), "{dir:?}: {deltas:?}");
            } else {
                assert!(deltas.iter().all(|&x| x <= 0.0), "{dir:?}: {deltas:?}");
            }
        }
    }
}

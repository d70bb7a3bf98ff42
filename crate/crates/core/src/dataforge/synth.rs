use crate::error::{Error, Result};
use crate::numcore::{SeededRng, StreamPurpose};

use super::{CourtSpec, RawFrame, RawShot};

/// Standard gravity in ft/s².
pub const GRAVITY_FT_S2: f64 = 32.174;
/// Tracking rate of the emulated system.
pub const SAMPLE_HZ: f64 = 25.0;

/// Safety cap on frames per shot.
const MAX_FRAMES: usize = 250;
/// Re-draws allowed when sampled release parameters cannot reach the rim.
const MAX_RETRIES: usize = 100;

/// Synthetic-dataset knobs. Launch speed is solved so the noiseless shot
/// would pass through the rim center, then perturbed multiplicatively;
/// the aim direction gets an additive angular error. Those two error
/// scales set the hit rate; defaults land near the 35% ballpark typical
/// of three-point shooting.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_shots: usize,
    /// Horizontal release distance from the rim center (ft).
    pub release_distance_ft: (f64, f64),
    pub release_height_ft: (f64, f64),
    pub launch_angle_deg: (f64, f64),
    /// Shooter position half-angle around the rim (radians).
    pub arc_half_angle_rad: f64,
    /// Std of the multiplicative launch-speed error.
    pub speed_error_std: f64,
    /// Std of the horizontal aim error (radians).
    pub aim_error_std_rad: f64,
    /// Std of per-frame Gaussian measurement noise (ft).
    pub noise_std_ft: f64,
    pub clock_start_s: (f64, f64),
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_shots: 5000,
            release_distance_ft: (22.5, 26.5),
            release_height_ft: (6.0, 8.5),
            launch_angle_deg: (44.0, 55.0),
            arc_half_angle_rad: 1.0,
            speed_error_std: 0.010,
            aim_error_std_rad: 0.010,
            noise_std_ft: 0.1,
            clock_start_s: (10.0, 720.0),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_shots == 0 {
            return Err(Error::Domain("n_shots must be >= 1".into()));
        }
        let ranges = [
            ("release_distance_ft", self.release_distance_ft),
            ("release_height_ft", self.release_height_ft),
            ("launch_angle_deg", self.launch_angle_deg),
            ("clock_start_s", self.clock_start_s),
        ];
        for (name, (lo, hi)) in ranges {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi || lo <= 0.0 {
                return Err(Error::Domain(format!("bad {name} range ({lo}, {hi})")));
            }
        }
        if self.launch_angle_deg.1 >= 90.0 {
            return Err(Error::Domain("launch angle must stay below 90 deg".into()));
        }
        if self.noise_std_ft < 0.0 || self.speed_error_std < 0.0 || self.aim_error_std_rad < 0.0 {
            return Err(Error::Domain("error stds must be >= 0".into()));
        }
        if self.arc_half_angle_rad < 0.0 || self.arc_half_angle_rad > 1.2 {
            return Err(Error::Domain(
                "arc half-angle must be in [0, 1.2] rad to keep shooters on court".into(),
            ));
        }
        Ok(())
    }
}

/// Release state of a drag-free projectile in court coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaunchParams {
    pub pos: [f64; 3],
    pub vel: [f64; 3],
}

impl LaunchParams {
    pub fn position_at(&self, t: f64) -> [f64; 3] {
        [
            self.pos[0] + self.vel[0] * t,
            self.pos[1] + self.vel[1] * t,
            self.pos[2] + self.vel[2] * t - 0.5 * GRAVITY_FT_S2 * t * t,
        ]
    }

    /// Time of the downward crossing of height `z`, if the arc reaches it.
    pub fn descending_crossing(&self, z: f64) -> Option<f64> {
        let disc = self.vel[2] * self.vel[2] - 2.0 * GRAVITY_FT_S2 * (z - self.pos[2]);
        if disc < 0.0 {
            return None;
        }
        let t = (self.vel[2] + disc.sqrt()) / GRAVITY_FT_S2;
        (t >= 0.0).then_some(t)
    }
}

/// Exact hit test on the noiseless trajectory: the downward crossing of
/// the rim plane must land within rim_radius − ball_radius of the rim
/// center (closed boundary — touching the limit counts as a hit).
pub fn oracle_hit(launch: &LaunchParams, rim_center: [f64; 2], court: &CourtSpec) -> bool {
    let Some(t) = launch.descending_crossing(court.rim_height_ft) else {
        return false;
    };
    let pos = launch.position_at(t);
    let dx = pos[0] - rim_center[0];
    let dy = pos[1] - rim_center[1];
    let offset = (dx * dx + dy * dy).sqrt();
    offset <= court.rim_radius_ft - court.ball_radius_ft
}

/// Speed that sends a shot at angle `theta` from height `z0`, horizontal
/// distance `d`, exactly through the rim center.
fn ideal_speed(d: f64, z0: f64, theta: f64, rim_height: f64) -> Option<f64> {
    let cos = theta.cos();
    let denom = 2.0 * cos * cos * (z0 + d * theta.tan() - rim_height);
    if denom <= 0.0 {
        return None;
    }
    Some((GRAVITY_FT_S2 * d * d / denom).sqrt())
}

fn generate_one(id: u64, cfg: &SynthConfig, court: &CourtSpec, root: &SeededRng) -> Option<RawShot> {
    let mut rng = root.substream(StreamPurpose::Synth, id);
    let rims = court.rim_centers();

    for _ in 0..MAX_RETRIES {
        let rim_idx = usize::from(rng.uniform() < 0.5);
        let rim = rims[rim_idx];
        // Shooters stand on the court-interior side of the rim.
        let inward: f64 = if rim_idx == 0 { 1.0 } else { -1.0 };

        let d = rng.uniform_range(cfg.release_distance_ft.0, cfg.release_distance_ft.1);
        let phi = rng.uniform_range(-cfg.arc_half_angle_rad, cfg.arc_half_angle_rad);
        let z0 = rng.uniform_range(cfg.release_height_ft.0, cfg.release_height_ft.1);
        let theta = rng
            .uniform_range(cfg.launch_angle_deg.0, cfg.launch_angle_deg.1)
            .to_radians();
        let speed_err = 1.0 + cfg.speed_error_std * rng.gaussian();
        let aim_err = cfg.aim_error_std_rad * rng.gaussian();
        let clock0 = rng.uniform_range(cfg.clock_start_s.0, cfg.clock_start_s.1);

        let Some(v_ideal) = ideal_speed(d, z0, theta, court.rim_height_ft) else {
            continue;
        };
        let v = v_ideal * speed_err.max(0.05);

        let pos = [
            rim[0] + inward * d * phi.cos(),
            rim[1] + d * phi.sin(),
            z0,
        ];
        // Unit vector toward the rim, rotated by the aim error.
        let to_rim = [(rim[0] - pos[0]) / d, (rim[1] - pos[1]) / d];
        let (sin_a, cos_a) = aim_err.sin_cos();
        let dir = [
            to_rim[0] * cos_a - to_rim[1] * sin_a,
            to_rim[0] * sin_a + to_rim[1] * cos_a,
        ];
        let launch = LaunchParams {
            pos,
            vel: [v * theta.cos() * dir[0], v * theta.cos() * dir[1], v * theta.sin()],
        };

        let hit = oracle_hit(&launch, rim, court);

        // Track until the rim-plane crossing, or the floor for shots
        // whose arc never reaches rim height.
        let t_end = launch
            .descending_crossing(court.rim_height_ft)
            .or_else(|| launch.descending_crossing(0.0))?;
        let n_frames = ((t_end * SAMPLE_HZ).floor() as usize + 1).min(MAX_FRAMES);

        let frames = (0..n_frames)
            .map(|k| {
                let t = k as f64 / SAMPLE_HZ;
                let p = launch.position_at(t);
                RawFrame {
                    x_ft: p[0] + cfg.noise_std_ft * rng.gaussian(),
                    y_ft: p[1] + cfg.noise_std_ft * rng.gaussian(),
                    z_ft: p[2] + cfg.noise_std_ft * rng.gaussian(),
                    clock_s: clock0 - t,
                }
            })
            .collect();

        return Some(RawShot { id, frames, hit });
    }
    None
}

/// Generate a synthetic dataset of drag-free three-point shots. Each
/// shot owns the RNG sub-stream keyed by its id, so the dataset is
/// reproducible shot-by-shot regardless of generation order.
pub fn synth_generate(cfg: &SynthConfig, court: &CourtSpec) -> Result<Vec<RawShot>> {
    cfg.validate()?;
    court.validate()?;
    let root = SeededRng::new(cfg.seed);
    let shots: Vec<RawShot> = (0..cfg.n_shots)
        .filter_map(|k| generate_one(k as u64, cfg, court, &root))
        .collect();
    if shots.is_empty() {
        return Err(Error::Generation(format!(
            "no valid shots from {} attempts; release geometry cannot reach the rim",
            cfg.n_shots
        )));
    }
    Ok(shots)
}

//! Data pipeline: SportVu-shaped CSV ingestion, rim-relative transform,
//! 12-point truncation, distance cutoffs, the 80/20 split, feature
//! standardization, and a projectile-physics shot generator with an
//! exact hit/miss oracle.

mod csvio;
mod preprocess;
mod synth;

pub use csvio::{load_csv, save_csv, shots_to_csv_string};
pub use preprocess::{
    FeatureStats, SplitIndex, apply_stats, compute_stats, cutoff_at_distance, pareto_split,
    rim_relative, standardize, truncate,
};
pub use synth::{GRAVITY_FT_S2, LaunchParams, SAMPLE_HZ, SynthConfig, oracle_hit, synth_generate};

use crate::error::{Error, Result};

/// Frames kept per shot; shorter shots are dropped.
pub const SEQ_LEN: usize = 12;

/// Court geometry and ball size. Defaults are regulation values; none of
/// them come from tracking data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CourtSpec {
    pub length_ft: f64,
    pub width_ft: f64,
    /// Distance from each baseline to its rim center, on the midline.
    pub rim_inset_ft: f64,
    pub rim_height_ft: f64,
    pub rim_radius_ft: f64,
    pub ball_radius_ft: f64,
}

impl Default for CourtSpec {
    fn default() -> Self {
        CourtSpec {
            length_ft: 94.0,
            width_ft: 50.0,
            rim_inset_ft: 5.25,
            rim_height_ft: 10.0,
            rim_radius_ft: 0.75,
            ball_radius_ft: 0.39,
        }
    }
}

impl CourtSpec {
    /// Rim centers in court coordinates, near baseline first.
    pub fn rim_centers(&self) -> [[f64; 2]; 2] {
        [
            [self.rim_inset_ft, self.width_ft / 2.0],
            [self.length_ft - self.rim_inset_ft, self.width_ft / 2.0],
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.length_ft <= 0.0 || self.width_ft <= 0.0 {
            return Err(Error::Domain("court dimensions must be positive".into()));
        }
        if self.rim_inset_ft <= 0.0 || self.rim_inset_ft >= self.length_ft / 2.0 {
            return Err(Error::Domain(format!(
                "rim inset {} outside (0, half court)",
                self.rim_inset_ft
            )));
        }
        if self.rim_height_ft <= 0.0 || self.rim_radius_ft <= 0.0 || self.ball_radius_ft < 0.0 {
            return Err(Error::Domain("rim/ball geometry must be positive".into()));
        }
        if self.ball_radius_ft >= self.rim_radius_ft {
            return Err(Error::Domain(
                "ball radius must be smaller than rim radius".into(),
            ));
        }
        Ok(())
    }
}

/// One tracked frame in court coordinates at 25 Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawFrame {
    pub x_ft: f64,
    pub y_ft: f64,
    pub z_ft: f64,
    pub clock_s: f64,
}

/// A tracked shot: time-ordered frames plus the hit/miss outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct RawShot {
    pub id: u64,
    pub frames: Vec<RawFrame>,
    pub hit: bool,
}

/// Fixed-length model input: 12 frames of (x, y, z, clock) features in
/// rim-relative feet (standardized later in the pipeline), with label
/// and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotSequence {
    pub id: u64,
    pub features: Vec<[f64; 4]>,
    pub label: u8,
    pub cutoff_ft: Option<f64>,
}

impl ShotSequence {
    /// 3-D rim distance of a feature frame (rim-relative coordinates).
    pub fn frame_rim_distance(frame: &[f64; 4]) -> f64 {
        (frame[0] * frame[0] + frame[1] * frame[1] + frame[2] * frame[2]).sqrt()
    }
}

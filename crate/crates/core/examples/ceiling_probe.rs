//! Learnability ceiling: extrapolate each sequence's parabola by least
//! squares, score by distance of the predicted rim crossing from center.
//! Run: cargo run --release -p shotarc --example ceiling_probe [cutoff]

use shotarc::dataforge::{
    CourtSpec, GRAVITY_FT_S2, SAMPLE_HZ, SynthConfig, cutoff_at_distance, rim_relative,
    synth_generate,
};
use shotarc::evalkit::roc_auc;

/// Least-squares line fit y = a + b t.
fn line_fit(ts: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, y) in ts.iter().zip(ys) {
        num += (t - tm) * (y - ym);
        den += (t - tm) * (t - tm);
    }
    let b = num / den;
    (ym - b * tm, b)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let cutoff: f64 = args.get(1).map_or(5.0, |s| s.parse().unwrap());

    let court = CourtSpec::default();
    let shots = synth_generate(
        &SynthConfig {
            n_shots: 2000,
            seed: 7,
            ..SynthConfig::default()
        },
        &court,
    )
    .unwrap();
    let seqs: Vec<_> = shots
        .iter()
        .map(|s| rim_relative(s, &court))
        .filter_map(|s| cutoff_at_distance(&s, cutoff))
        .collect();

    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for seq in &seqs {
        let ts: Vec<f64> = (0..seq.features.len()).map(|k| k as f64 / SAMPLE_HZ).collect();
        let xs: Vec<f64> = seq.features.iter().map(|f| f[0]).collect();
        let ys: Vec<f64> = seq.features.iter().map(|f| f[1]).collect();
        // Remove the known gravity quadratic, then fit z linearly.
        let zs: Vec<f64> = seq
            .features
            .iter()
            .zip(&ts)
            .map(|(f, t)| f[2] + 0.5 * GRAVITY_FT_S2 * t * t)
            .collect();
        let (x0, vx) = line_fit(&ts, &xs);
        let (y0, vy) = line_fit(&ts, &ys);
        let (z0, vz_eff) = line_fit(&ts, &zs);
        // Descending crossing of rim-relative z = 0.
        let disc = vz_eff * vz_eff + 2.0 * GRAVITY_FT_S2 * z0;
        if disc < 0.0 {
            scores.push(10.0);
            labels.push(seq.label);
            continue;
        }
        let t_cross = (vz_eff + disc.sqrt()) / GRAVITY_FT_S2;
        let cx = x0 + vx * t_cross;
        let cy = y0 + vy * t_cross;
        let offset = (cx * cx + cy * cy).sqrt();
        scores.push(offset);
        labels.push(seq.label);
    }
    // Smaller offset = more likely hit, so negate for AUC orientation.
    let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
    let auc = roc_auc(&neg, &labels).unwrap().auc;
    println!(
        "cutoff {cutoff}: {} seqs, extrapolation-oracle AUC {auc:.4}",
        seqs.len()
    );
}

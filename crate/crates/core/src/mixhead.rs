//! Mixture density head: raw-output normalization, the factored Gaussian
//! mixture over next-point offsets, the negative log-likelihood objective,
//! roulette sampling, and density grids for contour plots.
//!
//! The target is a 3-D offset. Its x and y components share a correlated
//! bivariate normal per component; z is an independent univariate normal,
//! matching the assumption that vertical motion is uncorrelated with the
//! horizontal plane.

use crate::error::{Error, Result};
use crate::numcore::SeededRng;

/// Upper clamp on raw log-stddev before exp, bounding σ at e^10.
pub const SIGMA_RAW_MAX: f64 = 10.0;
/// Lower clamp on raw log-stddev. Permissive so a near-deterministic
/// component can collapse onto its mean, yet σ = e^-200 stays a normal
/// positive f64 and the direct density product cannot overflow.
pub const SIGMA_RAW_MIN: f64 = -200.0;
/// Raw correlation values are clamped to this magnitude before tanh;
/// tanh(±8) keeps |ρ| strictly below 1 in f64.
pub const RHO_RAW_CLAMP: f64 = 8.0;

/// Number of raw outputs per mixture component:
/// weight, three means, three log-stddevs, correlation.
pub const RAW_PER_COMPONENT: usize = 8;

const LN_2PI: f64 = 1.8378770664093453;

/// Unbounded per-component head outputs, before normalization.
///
/// Layout per component: `[w, mx, my, mz, sx, sy, sz, r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMixture {
    comps: Vec<[f64; RAW_PER_COMPONENT]>,
}

impl RawMixture {
    /// Split a flat head output of width `8·C` into components.
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.is_empty() || !flat.len().is_multiple_of(RAW_PER_COMPONENT) {
            return Err(Error::Shape {
                op: "RawMixture::from_flat",
                left: format!("len {}", flat.len()),
                right: format!("multiple of {RAW_PER_COMPONENT}"),
            });
        }
        if !flat.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("RawMixture::from_flat"));
        }
        let comps = flat
            .chunks_exact(RAW_PER_COMPONENT)
            .map(|c| <[f64; RAW_PER_COMPONENT]>::try_from(c).unwrap())
            .collect();
        Ok(RawMixture { comps })
    }

    pub fn num_components(&self) -> usize {
        self.comps.len()
    }

    pub fn component(&self, c: usize) -> &[f64; RAW_PER_COMPONENT] {
        &self.comps[c]
    }
}

/// One normalized Gaussian component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixComponent {
    pub weight: f64,
    pub mean: [f64; 3],
    pub sigma: [f64; 3],
    pub rho: f64,
}

/// Normalized mixture: weights sum to one, stddevs positive, |rho| < 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub comps: Vec<MixComponent>,
}

impl Mixture {
    pub fn num_components(&self) -> usize {
        self.comps.len()
    }

    /// Mixture mean, Σ ω·μ per axis.
    pub fn mean(&self) -> [f64; 3] {
        let mut m = [0.0; 3];
        for comp in &self.comps {
            for (mi, mu) in m.iter_mut().zip(comp.mean) {
                *mi += comp.weight * mu;
            }
        }
        m
    }

    pub fn validate(&self) -> Result<()> {
        if self.comps.is_empty() {
            return Err(Error::Domain("mixture has no components".into()));
        }
        let wsum: f64 = self.comps.iter().map(|c| c.weight).sum();
        if (wsum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("weights sum to {wsum}, not 1")));
        }
        for (i, comp) in self.comps.iter().enumerate() {
            if comp.weight < 0.0 {
                return Err(Error::Domain(format!(
                    "component {i} weight {}",
                    comp.weight
                )));
            }
            if comp.sigma.iter().any(|s| *s <= 0.0) {
                return Err(Error::Domain(format!("component {i} has sigma <= 0")));
            }
            if comp.rho.abs() >= 1.0 {
                return Err(Error::Domain(format!("component {i} rho {}", comp.rho)));
            }
        }
        Ok(())
    }
}

/// Next-point offset in standardized rim-relative units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetPoint {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl TargetPoint {
    pub fn new(dx: f64, dy: f64, dz: f64) -> Self {
        TargetPoint { dx, dy, dz }
    }
}

#[inline]
fn clamp_sigma_raw(v: f64) -> f64 {
    v.clamp(SIGMA_RAW_MIN, SIGMA_RAW_MAX)
}

#[inline]
fn clamp_rho_raw(v: f64) -> f64 {
    v.clamp(-RHO_RAW_CLAMP, RHO_RAW_CLAMP)
}

/// Normalize raw head outputs into a valid mixture: weights by softmax,
/// stddevs by exp, correlation by tanh, means passed through. Raw
/// stddev/correlation values are clamped first so the result can never
/// contain a NaN or a degenerate component.
pub fn normalize(raw: &RawMixture) -> Mixture {
    let max_w = raw
        .comps
        .iter()
        .map(|c| c[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let mut exp_sum = 0.0;
    let mut exps = Vec::with_capacity(raw.comps.len());
    for c in &raw.comps {
        let e = (c[0] - max_w).exp();
        exps.push(e);
        exp_sum += e;
    }
    let comps = raw
        .comps
        .iter()
        .zip(exps)
        .map(|(c, e)| MixComponent {
            weight: e / exp_sum,
            mean: [c[1], c[2], c[3]],
            sigma: [
                clamp_sigma_raw(c[4]).exp(),
                clamp_sigma_raw(c[5]).exp(),
                clamp_sigma_raw(c[6]).exp(),
            ],
            rho: clamp_rho_raw(c[7]).tanh(),
        })
        .collect();
    Mixture { comps }
}

/// Per-component log-density of the factored Gaussian at `y`.
fn component_log_density(comp: &MixComponent, y: &TargetPoint) -> f64 {
    let xn = (y.dx - comp.mean[0]) / comp.sigma[0];
    let yn = (y.dy - comp.mean[1]) / comp.sigma[1];
    let zn = (y.dz - comp.mean[2]) / comp.sigma[2];
    let q = 1.0 - comp.rho * comp.rho;
    let quad = xn * xn + yn * yn - 2.0 * comp.rho * xn * yn;
    let log_n2 =
        -LN_2PI - comp.sigma[0].ln() - comp.sigma[1].ln() - 0.5 * q.ln() - quad / (2.0 * q);
    let log_n1 = -0.5 * LN_2PI - comp.sigma[2].ln() - 0.5 * zn * zn;
    log_n2 + log_n1
}

/// Mixture density at `y` by direct summation (the naive path; the
/// training objective uses the log-sum-exp path in [`log_density`]).
pub fn density(mix: &Mixture, y: &TargetPoint) -> Result<f64> {
    mix.validate()?;
    let mut p = 0.0;
    for comp in &mix.comps {
        if comp.weight == 0.0 {
            continue;
        }
        p += comp.weight * component_log_density(comp, y).exp();
    }
    Ok(p)
}

/// log Σ ω·N via log-sum-exp; finite for any valid mixture and target.
pub fn log_density(mix: &Mixture, y: &TargetPoint) -> f64 {
    let logs: Vec<f64> = mix
        .comps
        .iter()
        .map(|comp| {
            if comp.weight == 0.0 {
                f64::NEG_INFINITY
            } else {
                comp.weight.ln() + component_log_density(comp, y)
            }
        })
        .collect();
    log_sum_exp(&logs)
}

fn log_sum_exp(vals: &[f64]) -> f64 {
    let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Sequence negative log-likelihood: Σ_t −log density(mixture_t, target_t).
///
/// Callers pass one mixture and one target per predicted step; the final
/// frame of a sequence has no successor and therefore no entry here.
pub fn nll(mixtures: &[Mixture], targets: &[TargetPoint]) -> Result<f64> {
    if mixtures.len() != targets.len() {
        return Err(Error::Shape {
            op: "nll",
            left: format!("{} mixtures", mixtures.len()),
            right: format!("{} targets", targets.len()),
        });
    }
    let mut total = 0.0;
    for (mix, y) in mixtures.iter().zip(targets) {
        total -= log_density(mix, y);
    }
    Ok(total)
}

/// Gradient of −log density w.r.t. the raw (pre-normalization) head
/// outputs for one step, plus the loss value itself.
///
/// `mix` must be `normalize(raw)`; passing it in avoids renormalizing on
/// the training hot path. Raw coordinates sitting outside the clamp range
/// get zero gradient, matching the clamped forward computation.
pub fn nll_raw_grad(raw: &RawMixture, mix: &Mixture, y: &TargetPoint) -> (f64, Vec<f64>) {
    let n = raw.num_components();
    debug_assert_eq!(mix.num_components(), n);

    let logs: Vec<f64> = mix
        .comps
        .iter()
        .map(|comp| {
            if comp.weight == 0.0 {
                f64::NEG_INFINITY
            } else {
                comp.weight.ln() + component_log_density(comp, y)
            }
        })
        .collect();
    let log_p = log_sum_exp(&logs);
    let loss = -log_p;

    let mut grad = vec![0.0; n * RAW_PER_COMPONENT];
    for c in 0..n {
        let comp = &mix.comps[c];
        let rawc = raw.component(c);
        let gamma = (logs[c] - log_p).exp();
        let g = &mut grad[c * RAW_PER_COMPONENT..(c + 1) * RAW_PER_COMPONENT];

        // Softmax weight: d(-log P)/dw̃_c = ω_c − γ_c.
        g[0] = comp.weight - gamma;

        let xn = (y.dx - comp.mean[0]) / comp.sigma[0];
        let yn = (y.dy - comp.mean[1]) / comp.sigma[1];
        let zn = (y.dz - comp.mean[2]) / comp.sigma[2];
        let q = 1.0 - comp.rho * comp.rho;
        let quad = xn * xn + yn * yn - 2.0 * comp.rho * xn * yn;

        // Means.
        g[1] = -gamma * (xn - comp.rho * yn) / (comp.sigma[0] * q);
        g[2] = -gamma * (yn - comp.rho * xn) / (comp.sigma[1] * q);
        g[3] = -gamma * zn / comp.sigma[2];

        // Log-stddevs; zero once the raw value is clamped.
        if rawc[4] > SIGMA_RAW_MIN && rawc[4] < SIGMA_RAW_MAX {
            g[4] = -gamma * (xn * (xn - comp.rho * yn) / q - 1.0);
        }
        if rawc[5] > SIGMA_RAW_MIN && rawc[5] < SIGMA_RAW_MAX {
            g[5] = -gamma * (yn * (yn - comp.rho * xn) / q - 1.0);
        }
        if rawc[6] > SIGMA_RAW_MIN && rawc[6] < SIGMA_RAW_MAX {
            g[6] = -gamma * (zn * zn - 1.0);
        }

        // Correlation through tanh.
        if rawc[7].abs() < RHO_RAW_CLAMP {
            g[7] = -gamma * (xn * yn + comp.rho * (1.0 - quad / q));
        }
    }
    (loss, grad)
}

/// Roulette-wheel component selection: smallest index whose cumulative
/// weight reaches `u`.
pub fn roulette_pick(mix: &Mixture, u: f64) -> usize {
    let mut cum = 0.0;
    for (i, comp) in mix.comps.iter().enumerate() {
        cum += comp.weight;
        if cum >= u {
            return i;
        }
    }
    mix.comps.len() - 1
}

/// Draw one offset from the mixture: roulette-pick a component, then a
/// correlated bivariate draw for (dx, dy) and an independent draw for dz.
pub fn sample_point(mix: &Mixture, rng: &mut SeededRng) -> TargetPoint {
    let c = roulette_pick(mix, rng.uniform());
    let comp = &mix.comps[c];
    let z1 = rng.gaussian();
    let z2 = rng.gaussian();
    let z3 = rng.gaussian();
    let dx = comp.mean[0] + comp.sigma[0] * z1;
    let dy =
        comp.mean[1] + comp.sigma[1] * (comp.rho * z1 + (1.0 - comp.rho * comp.rho).sqrt() * z2);
    let dz = comp.mean[2] + comp.sigma[2] * z3;
    TargetPoint::new(dx, dy, dz)
}

/// Axis pair spanned by a density grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridPlane {
    Xy,
    Xz,
    Yz,
}

impl GridPlane {
    pub fn as_str(self) -> &'static str {
        match self {
            GridPlane::Xy => "xy",
            GridPlane::Xz => "xz",
            GridPlane::Yz => "yz",
        }
    }
}

/// Rectangular grid of density values over one coordinate plane.
///
/// Cells are midpoint-sampled: `u[i]` is the center of the i-th of
/// `resolution` equal cells. `values` is stored u-major.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    pub plane: GridPlane,
    pub us: Vec<f64>,
    pub vs: Vec<f64>,
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn value(&self, iu: usize, iv: usize) -> f64 {
        self.values[iu * self.vs.len() + iv]
    }

    /// Coordinates of the maximum-density cell center.
    pub fn mode(&self) -> (f64, f64) {
        let mut best = (0, 0);
        let mut best_v = f64::NEG_INFINITY;
        for iu in 0..self.us.len() {
            for iv in 0..self.vs.len() {
                let v = self.value(iu, iv);
                if v > best_v {
                    best_v = v;
                    best = (iu, iv);
                }
            }
        }
        (self.us[best.0], self.vs[best.1])
    }

    /// CSV with header `u,v,density`, 6-significant-digit floats.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,v,density\n");
        for (iu, u) in self.us.iter().enumerate() {
            for (iv, v) in self.vs.iter().enumerate() {
                out.push_str(&format!("{:.5e},{:.5e},{:.5e}\n", u, v, self.value(iu, iv)));
            }
        }
        out
    }
}

/// Evaluate the mixture density over a plane for contour plotting. The
/// third coordinate is held at the mixture mean of that axis.
pub fn density_grid(
    mix: &Mixture,
    plane: GridPlane,
    u_bounds: (f64, f64),
    v_bounds: (f64, f64),
    resolution: usize,
) -> Result<DensityGrid> {
    mix.validate()?;
    if resolution < 2 {
        return Err(Error::Domain(format!(
            "grid resolution must be >= 2, got {resolution}"
        )));
    }
    if u_bounds.0 >= u_bounds.1 || v_bounds.0 >= v_bounds.1 {
        return Err(Error::Domain(format!(
            "empty grid bounds: u {u_bounds:?}, v {v_bounds:?}"
        )));
    }
    let mean = mix.mean();
    let du = (u_bounds.1 - u_bounds.0) / resolution as f64;
    let dv = (v_bounds.1 - v_bounds.0) / resolution as f64;
    let us: Vec<f64> = (0..resolution)
        .map(|i| u_bounds.0 + (i as f64 + 0.5) * du)
        .collect();
    let vs: Vec<f64> = (0..resolution)
        .map(|i| v_bounds.0 + (i as f64 + 0.5) * dv)
        .collect();
    let mut values = Vec::with_capacity(resolution * resolution);
    for &u in &us {
        for &v in &vs {
            let point = match plane {
                GridPlane::Xy => TargetPoint::new(u, v, mean[2]),
                GridPlane::Xz => TargetPoint::new(u, mean[1], v),
                GridPlane::Yz => TargetPoint::new(mean[0], u, v),
            };
            values.push(density(mix, &point)?);
        }
    }
    Ok(DensityGrid {
        plane,
        us,
        vs,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::StreamPurpose;

    fn single_component(rho: f64) -> Mixture {
        Mixture {
            comps: vec![MixComponent {
                weight: 1.0,
                mean: [0.0; 3],
                sigma: [1.0; 3],
                rho,
            }],
        }
    }

    #[test]
    fn softmax_of_zeros_is_uniform() {
        let raw = RawMixture::from_flat(&[0.0; 24]).unwrap();
        let mix = normalize(&raw);
        for comp in &mix.comps {
            assert!((comp.weight - 1.0 / 3.0).abs() < 1e-15);
            assert_eq!(comp.sigma, [1.0; 3]);
            assert_eq!(comp.rho, 0.0);
        }
    }

    #[test]
    fn softmax_hand_values() {
        // softmax(1, 2, 3) computed directly.
        let mut flat = vec![0.0; 24];
        flat[0] = 1.0;
        flat[8] = 2.0;
        flat[16] = 3.0;
        let mix = normalize(&RawMixture::from_flat(&flat).unwrap());
        let expect = [0.09003057317038046, 0.24472847105479767, 0.6652409557748219];
        for (comp, e) in mix.comps.iter().zip(expect) {
            assert!((comp.weight - e).abs() < 1e-5, "{} vs {e}", comp.weight);
        }
    }

    #[test]
    fn normalize_survives_extreme_raw_values() {
        let mut flat = vec![0.0; 16];
        flat[4] = 1e6; // sigma raw, would overflow exp without the clamp
        flat[7] = -1e6;
        flat[12] = -1e6;
        let mix = normalize(&RawMixture::from_flat(&flat).unwrap());
        mix.validate().unwrap();
        assert!(mix.comps[0].sigma[0].is_finite());
        assert!(mix.comps[0].rho.abs() < 1.0);
    }

    #[test]
    fn density_standard_isotropic_at_origin() {
        // (1/2π)·(1/√2π) for unit sigmas at the mean.
        let p = density(&single_component(0.0), &TargetPoint::new(0.0, 0.0, 0.0)).unwrap();
        assert!((p - 0.0634936359342410).abs() < 1e-9, "{p}");
    }

    #[test]
    fn density_correlated_at_mean() {
        // Bivariate factor 1/(2π√0.75) ≈ 0.183776; times 1/√2π.
        let p = density(&single_component(0.5), &TargetPoint::new(0.0, 0.0, 0.0)).unwrap();
        assert!((p - 0.07331613559692425).abs() < 1e-9, "{p}");
        let biv = 2.0 * std::f64::consts::PI * (1.0 - 0.25_f64).sqrt();
        assert!((1.0 / biv - 0.183776).abs() < 1e-6);
    }

    #[test]
    fn duplicated_components_match_single() {
        let single = single_component(0.0);
        let dup = Mixture {
            comps: vec![
                MixComponent {
                    weight: 0.5,
                    ..single.comps[0]
                },
                MixComponent {
                    weight: 0.5,
                    ..single.comps[0]
                },
            ],
        };
        let y = TargetPoint::new(0.3, -0.2, 1.1);
        let a = density(&single, &y).unwrap();
        let b = density(&dup, &y).unwrap();
        assert!((a - b).abs() < 1e-15);
        let nll_a = nll(&[single], &[y]).unwrap();
        let nll_b = nll(&[dup], &[y]).unwrap();
        assert!((nll_a - nll_b).abs() < 1e-12);
    }

    #[test]
    fn nll_of_derived_density() {
        let mix = single_component(0.0);
        let v = nll(&[mix], &[TargetPoint::new(0.0, 0.0, 0.0)]).unwrap();
        assert!((v - 2.7568155996140183).abs() < 1e-4, "{v}");
    }

    #[test]
    fn far_target_increases_nll() {
        let mix = single_component(0.0);
        let near = nll(
            std::slice::from_ref(&mix),
            &[TargetPoint::new(0.0, 0.0, 0.0)],
        )
        .unwrap();
        let far = nll(&[mix], &[TargetPoint::new(5.0, 0.0, 0.0)]).unwrap();
        assert!(far > near);
    }

    #[test]
    fn lse_matches_naive_when_not_underflowing() {
        let mut flat = vec![0.1, 0.2, -0.3, 0.4, 0.05, -0.02, 0.3, 0.6];
        flat.extend_from_slice(&[-0.5, -1.0, 0.8, 0.2, -0.4, 0.1, -0.2, -0.7]);
        let raw = RawMixture::from_flat(&flat).unwrap();
        let mix = normalize(&raw);
        let y = TargetPoint::new(0.4, -0.8, 0.15);
        let naive = -density(&mix, &y).unwrap().ln();
        let stable = -log_density(&mix, &y);
        assert!((naive - stable).abs() < 1e-10);
    }

    #[test]
    fn roulette_degenerate_and_cumulative() {
        let mut mix = single_component(0.0);
        mix.comps[0].weight = 1.0;
        assert_eq!(roulette_pick(&mix, 0.999), 0);

        let weights = [0.2, 0.5, 0.3];
        let mix3 = Mixture {
            comps: weights
                .iter()
                .map(|&w| MixComponent {
                    weight: w,
                    mean: [0.0; 3],
                    sigma: [1.0; 3],
                    rho: 0.0,
                })
                .collect(),
        };
        assert_eq!(roulette_pick(&mix3, 0.65), 1);
        assert_eq!(roulette_pick(&mix3, 0.1), 0);
        assert_eq!(roulette_pick(&mix3, 0.95), 2);
    }

    #[test]
    fn roulette_frequencies_converge() {
        let weights = [0.2, 0.5, 0.3];
        let mix = Mixture {
            comps: weights
                .iter()
                .map(|&w| MixComponent {
                    weight: w,
                    mean: [0.0; 3],
                    sigma: [1.0; 3],
                    rho: 0.0,
                })
                .collect(),
        };
        let mut rng = SeededRng::new(11).substream(StreamPurpose::Sampling, 0);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[roulette_pick(&mix, rng.uniform())] += 1;
        }
        for (c, w) in counts.iter().zip(weights) {
            let freq = *c as f64 / n as f64;
            assert!((freq - w).abs() < 0.01, "freq {freq} vs {w}");
        }
    }

    #[test]
    fn sample_point_degenerate_sigma_collapses_to_mean() {
        let raw = RawMixture::from_flat(&[0.0, 1.5, -2.0, 0.6, -30.0, -30.0, -30.0, 0.0]).unwrap();
        let mix = normalize(&raw);
        let mut rng = SeededRng::new(3).substream(StreamPurpose::Sampling, 0);
        for _ in 0..100 {
            let p = sample_point(&mix, &mut rng);
            assert!((p.dx - 1.5).abs() < 1e-6);
            assert!((p.dy + 2.0).abs() < 1e-6);
            assert!((p.dz - 0.6).abs() < 1e-6);
        }
    }

    #[test]
    fn sample_correlation_matches_rho_and_z_independent() {
        let mix = single_component(0.5);
        let mut rng = SeededRng::new(17).substream(StreamPurpose::Sampling, 1);
        let n = 100_000;
        let samples: Vec<TargetPoint> = (0..n).map(|_| sample_point(&mix, &mut rng)).collect();
        let corr = |a: &dyn Fn(&TargetPoint) -> f64, b: &dyn Fn(&TargetPoint) -> f64| {
            let ma = samples.iter().map(a).sum::<f64>() / n as f64;
            let mb = samples.iter().map(b).sum::<f64>() / n as f64;
            let mut cov = 0.0;
            let mut va = 0.0;
            let mut vb = 0.0;
            for s in &samples {
                cov += (a(s) - ma) * (b(s) - mb);
                va += (a(s) - ma).powi(2);
                vb += (b(s) - mb).powi(2);
            }
            cov / (va.sqrt() * vb.sqrt())
        };
        let cxy = corr(&|s| s.dx, &|s| s.dy);
        let czx = corr(&|s| s.dz, &|s| s.dx);
        assert!((cxy - 0.5).abs() < 0.02, "xy corr {cxy}");
        assert!(czx.abs() < 0.02, "zx corr {czx}");
    }

    #[test]
    fn grid_mode_at_mean_and_riemann_normalization() {
        let mix = Mixture {
            comps: vec![MixComponent {
                weight: 1.0,
                mean: [0.5, -0.25, 0.1],
                sigma: [0.8, 1.2, 1.0],
                rho: 0.0,
            }],
        };
        let grid = density_grid(&mix, GridPlane::Xy, (-6.0, 7.0), (-7.5, 7.0), 120).unwrap();
        let (mu, mv) = grid.mode();
        assert!((mu - 0.5).abs() < 0.1, "mode u {mu}");
        assert!((mv + 0.25).abs() < 0.1, "mode v {mv}");

        // Integrating the xy slice (z fixed at the mean) leaves the
        // univariate z density at its mode: 1/(√2π σz).
        let cell = ((7.0 - -6.0) / 120.0) * ((7.0 - -7.5) / 120.0);
        let integral: f64 = grid.values.iter().sum::<f64>() * cell;
        let expect = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!(
            (integral - expect).abs() / expect < 0.02,
            "{integral} vs {expect}"
        );
    }

    #[test]
    fn grid_principal_axis_follows_positive_rho() {
        let mix = single_component(0.9);
        let grid = density_grid(&mix, GridPlane::Xy, (-3.0, 3.0), (-3.0, 3.0), 61).unwrap();
        // Iso-density ellipse for rho=0.9 stretches along (1,1): density
        // along the diagonal dominates the anti-diagonal at equal radius.
        let nearest = |target: f64, axis: &[f64]| {
            axis.iter()
                .enumerate()
                .min_by(|a, b| {
                    (a.1 - target)
                        .abs()
                        .partial_cmp(&(b.1 - target).abs())
                        .unwrap()
                })
                .unwrap()
                .0
        };
        let r = 1.2_f64 / 2.0_f64.sqrt();
        let ip = nearest(r, &grid.us);
        let im = nearest(-r, &grid.us);
        let along = grid.value(ip, ip);
        let across = grid.value(ip, im);
        assert!(along > 2.0 * across, "along {along}, across {across}");
    }

    #[test]
    fn grid_rejects_empty_bounds_and_low_resolution() {
        let mix = single_component(0.0);
        assert!(density_grid(&mix, GridPlane::Xy, (1.0, 1.0), (0.0, 1.0), 10).is_err());
        assert!(density_grid(&mix, GridPlane::Xy, (0.0, 1.0), (0.0, 1.0), 1).is_err());
    }

    #[test]
    fn normalized_mixture_always_valid() {
        let mut rng = SeededRng::new(5).substream(StreamPurpose::Sampling, 9);
        for _ in 0..2000 {
            let flat: Vec<f64> = (0..24).map(|_| 60.0 * (rng.uniform() - 0.5)).collect();
            let mix = normalize(&RawMixture::from_flat(&flat).unwrap());
            mix.validate().unwrap();
        }
    }
}

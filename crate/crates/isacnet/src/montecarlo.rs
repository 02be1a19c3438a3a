//! Snapshot simulator of the full downlink signal model: PPP deployments,
//! Rayleigh channels, zero-forcing precoding, MVDR receive filtering.
//! Serves as ground truth for every closed form in [`crate::analytic`].
//!
//! Snapshots use counter-based RNG substreams keyed by (seed, snapshot
//! index), so estimates are bit-identical regardless of how many worker
//! threads execute them.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::analytic::interference_bounds;
use crate::model::{mean_cell_radius, network_power_density, NetworkConfig, PowerModel};
use crate::{Error, Result};

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

/// Attempts before giving up on drawing a scene with at least one BS
/// inside the analysis disc.
const MAX_SCENE_RESAMPLES: usize = 10_000;
/// Attempts before giving up on a well-conditioned channel draw.
const MAX_CHANNEL_RESAMPLES: usize = 64;

/// One realization of the network: BS/user/target positions inside the
/// analysis disc (BSs may extend into the guard annulus) and nearest-BS
/// associations by planar distance. Index 0 of `user_positions` is the
/// typical user at the origin; index 0 of `target_positions` is the
/// typical target at altitude `h_t` above it.
#[derive(Debug, Clone)]
pub struct Scene {
    pub bs_positions: Vec<[f64; 2]>,
    pub user_positions: Vec<[f64; 2]>,
    pub target_positions: Vec<[f64; 3]>,
    /// user index -> serving BS index
    pub user_assoc: Vec<usize>,
    /// target index -> serving BS index
    pub target_assoc: Vec<usize>,
}

/// Mean of one simulated metric with a 95% normal-approximation CI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotEstimate {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Per-snapshot SINR record for external analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotRecord {
    pub snapshot_id: u64,
    pub sinr_comm: f64,
    pub sinr_radar: f64,
}

/// All simulated metrics of one run plus the raw per-snapshot records.
#[derive(Debug, Clone)]
pub struct SimulationEstimate {
    pub coverage_comm: SnapshotEstimate,
    pub coverage_radar: SnapshotEstimate,
    /// bit/s/Hz/m²
    pub pse_comm: SnapshotEstimate,
    /// bit/s/Hz/m²
    pub pse_radar: SnapshotEstimate,
    /// bit/Joule
    pub ee: SnapshotEstimate,
    pub records: Vec<SnapshotRecord>,
}

/// Simulator switches beyond the physical configuration.
#[derive(Debug, Clone)]
pub struct SimOptions {
    /// Draw interfering BSs out to `r_area + 2·mean cell radius` instead of
    /// the bare analysis disc, reducing edge bias at the typical locations.
    pub guard_annulus: bool,
    /// Steer the sensing stream with a conjugate-matched transmit beam
    /// instead of reusing the communication ZF precoder.
    pub matched_tx_beam: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            guard_annulus: true,
            matched_tx_beam: false,
        }
    }
}

fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Homogeneous PPP on a disc of the given radius centered at the origin:
/// Poisson count with mean `density·π·radius²`, points i.i.d. uniform.
pub fn sample_ppp(density: f64, radius: f64, rng_seed: u64) -> Result<Vec<[f64; 2]>> {
    let mut rng = substream(rng_seed, 0);
    sample_disc(density, radius, &mut rng)
}

fn sample_disc(density: f64, radius: f64, rng: &mut ChaCha8Rng) -> Result<Vec<[f64; 2]>> {
    if density < 0.0 {
        return Err(Error::Parameter(format!(
            "PPP density must be nonnegative, got {density}"
        )));
    }
    if !(radius > 0.0) {
        return Err(Error::Parameter(format!(
            "PPP disc radius must be positive, got {radius}"
        )));
    }
    let mean = density * PI * radius * radius;
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let count = Poisson::new(mean)
        .map_err(|e| Error::Parameter(format!("Poisson mean {mean}: {e}")))?
        .sample(rng) as u64;
    let mut points = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let r = radius * rng.random::<f64>().sqrt();
        let phi = 2.0 * PI * rng.random::<f64>();
        points.push([r * phi.cos(), r * phi.sin()]);
    }
    Ok(points)
}

fn planar_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn nearest_bs(bs: &[[f64; 2]], p: [f64; 2]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, &q) in bs.iter().enumerate() {
        let d = planar_dist(p, q);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    // CN(0,1): independent N(0, 1/2) parts
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn rayleigh_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Zero-forcing precoder from a κ×N_t downlink channel: pseudo-inverse
/// `F = Hᴴ(HHᴴ)⁻¹`, columns normalized to unit power. Returns the
/// precoding matrix and the effective gains `ς_k = 1/‖f_k‖²`.
pub fn zf_precoder(h: &CMat) -> Result<(CMat, Vec<f64>)> {
    let (k, _n_t) = h.shape();
    let sv = h.clone().singular_values();
    let s_min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let s_max = sv.iter().cloned().fold(0.0, f64::max);
    if !(s_min > 0.0) || s_max / s_min > 1e12 {
        return Err(Error::Numerical(format!(
            "ZF channel is rank deficient (condition {:.3e}); resample",
            s_max / s_min
        )));
    }
    let gram = h * h.adjoint();
    let inv = gram.try_inverse().ok_or_else(|| {
        Error::Numerical("ZF Gram matrix is numerically singular; resample".into())
    })?;
    let f = h.adjoint() * inv;
    let mut w = f.clone();
    let mut varsigma = Vec::with_capacity(k);
    for j in 0..k {
        let norm = f.column(j).norm();
        varsigma.push(1.0 / (norm * norm));
        let mut col = w.column_mut(j);
        col /= Complex64::new(norm, 0.0);
    }
    Ok((w, varsigma))
}

/// Minimum-variance distortionless-response filter
/// `w = R⁻¹a / (aᴴR⁻¹a)`; diagonal loading `1e-9·tr(R)/N` is applied
/// before factorization (the filter is invariant to the scaling of R).
pub fn mvdr_filter(covariance: &CMat, steering: &CVec) -> Result<CVec> {
    let n = covariance.nrows();
    if covariance.ncols() != n || steering.len() != n {
        return Err(Error::Parameter(format!(
            "MVDR dimension mismatch: R is {}x{}, a has {}",
            n,
            covariance.ncols(),
            steering.len()
        )));
    }
    let trace: f64 = covariance.diagonal().iter().map(|z| z.re).sum();
    let load = 1e-9 * trace / n as f64;
    let mut loaded = covariance.clone();
    for i in 0..n {
        loaded[(i, i)] += Complex64::new(load, 0.0);
    }
    let chol = nalgebra::Cholesky::new(loaded.clone()).ok_or_else(|| {
        Error::Numerical("MVDR covariance is not positive definite".into())
    })?;
    let x = chol.solve(steering);
    // the complex Cholesky factors indefinite Hermitian matrices without
    // complaint; a residual check catches those
    let residual = (&loaded * &x - steering).norm();
    if residual > 1e-6 * steering.norm() {
        return Err(Error::Numerical(format!(
            "MVDR covariance is indefinite (solve residual {residual:.3e})"
        )));
    }
    let c = steering.dotc(&x); // aᴴR⁻¹a, real positive for Hermitian PD R
    if !(c.re > 0.0) || !c.re.is_finite() {
        return Err(Error::Numerical(format!(
            "MVDR covariance is indefinite: aᴴR⁻¹a = {c}"
        )));
    }
    Ok(x.map(|v| v / c))
}

/// Uniform linear array steering vector with half-wavelength spacing:
/// element m is `exp(jπ·m·sin θ)`.
pub fn steering_vector(theta: f64, n_elements: usize) -> CVec {
    let s = theta.sin();
    CVec::from_fn(n_elements, |m, _| {
        Complex64::from_polar(1.0, PI * m as f64 * s)
    })
}

fn build_scene(cfg: &NetworkConfig, opts: &SimOptions, rng: &mut ChaCha8Rng) -> Result<Scene> {
    if !(cfg.lambda_b > 0.0) {
        return Err(Error::Parameter("simulation requires lambda_b > 0".into()));
    }
    let guard = if opts.guard_annulus {
        2.0 * mean_cell_radius(cfg.lambda_b)?
    } else {
        0.0
    };
    let sim_radius = cfg.r_area + guard;
    let mut bs = Vec::new();
    let mut ok = false;
    for _ in 0..MAX_SCENE_RESAMPLES {
        bs = sample_disc(cfg.lambda_b, sim_radius, rng)?;
        if bs
            .iter()
            .any(|&p| planar_dist(p, [0.0, 0.0]) <= cfg.r_area)
        {
            ok = true;
            break;
        }
    }
    if !ok {
        return Err(Error::NonConvergence(format!(
            "no scene with a BS inside the analysis disc after {MAX_SCENE_RESAMPLES} draws \
             (lambda_b = {})",
            cfg.lambda_b
        )));
    }
    let mut user_positions = vec![[0.0, 0.0]];
    user_positions.extend(sample_disc(cfg.lambda_u, cfg.r_area, rng)?);
    let mut target_positions = vec![[0.0, 0.0, cfg.h_t]];
    target_positions.extend(
        sample_disc(cfg.lambda_r, cfg.r_area, rng)?
            .into_iter()
            .map(|p| [p[0], p[1], cfg.h_t]),
    );
    let user_assoc = user_positions.iter().map(|&p| nearest_bs(&bs, p)).collect();
    let target_assoc = target_positions
        .iter()
        .map(|&p| nearest_bs(&bs, [p[0], p[1]]))
        .collect();
    Ok(Scene {
        bs_positions: bs,
        user_positions,
        target_positions,
        user_assoc,
        target_assoc,
    })
}

fn draw_zf(k: usize, n_t: usize, rng: &mut ChaCha8Rng) -> Result<(CMat, Vec<f64>)> {
    for _ in 0..MAX_CHANNEL_RESAMPLES {
        match zf_precoder(&rayleigh_matrix(k, n_t, rng)) {
            Ok(out) => return Ok(out),
            Err(Error::Numerical(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NonConvergence(
        "no well-conditioned ZF channel draw".into(),
    ))
}

fn comm_sinr_from_parts(p: f64, d: f64, alpha: f64, varsigma: f64, interf: f64, noise: f64) -> f64 {
    p * d.powf(-alpha) * varsigma / (interf + noise)
}

fn comm_sinr(cfg: &NetworkConfig, scene: &Scene, rng: &mut ChaCha8Rng) -> Result<f64> {
    let serving = scene.user_assoc[0];
    // path loss is (d/d₀)^{-α} with d₀ = length_scale, matching the
    // closed forms
    let d0 = cfg.length_scale;
    let d = planar_dist(scene.bs_positions[serving], [0.0, 0.0]) / d0;
    let (_, varsigma) = draw_zf(cfg.kappa as usize, cfg.n_tx as usize, rng)?;
    let p = cfg.p_tx_watt();
    // residual multi-user interference per BS: ‖h†W‖² ~ Γ(κ, rate β)
    let gain = Gamma::new(cfg.kappa as f64, cfg.beta_int.recip())
        .map_err(|e| Error::Parameter(format!("interference gain: {e}")))?;
    let mut interf = 0.0;
    for (l, &pos) in scene.bs_positions.iter().enumerate() {
        if l == serving {
            continue;
        }
        let d_l = planar_dist(pos, [0.0, 0.0]) / d0;
        interf += p * d_l.powf(-cfg.alpha) * gain.sample(rng);
    }
    Ok(comm_sinr_from_parts(
        p,
        d,
        cfg.alpha,
        varsigma[0],
        interf,
        cfg.noise_watt(),
    ))
}

fn radar_sinr(
    cfg: &NetworkConfig,
    scene: &Scene,
    opts: &SimOptions,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let n_r = cfg.n_rx as usize;
    let n_t = cfg.n_tx as usize;
    let serving = scene.target_assoc[0];
    let bs = scene.bs_positions[serving];
    let d0 = cfg.length_scale;
    let r_b = planar_dist(bs, [0.0, 0.0]);
    let d_t = r_b.hypot(cfg.h_t);
    // elevation of the serving-BS -> target line
    let theta = (cfg.h_t / d_t.max(f64::MIN_POSITIVE)).asin();
    let a_rx = steering_vector(theta, n_r);
    let b_tx = steering_vector(theta, n_t);
    let p = cfg.p_tx_watt();

    let tx_gain = if opts.matched_tx_beam {
        // conjugate-matched beam: |bᵀ·conj(b)/‖b‖|² = ‖b‖²
        n_t as f64
    } else {
        // sensing rides the ZF-precoded communication streams
        let (w, _) = draw_zf(cfg.kappa as usize, n_t, rng)?;
        (b_tx.transpose() * w).norm().powi(2)
    };

    let mut cov = CMat::from_diagonal_element(n_r, n_r, Complex64::new(cfg.noise_watt(), 0.0));
    for (l, &pos) in scene.bs_positions.iter().enumerate() {
        if l == serving {
            continue;
        }
        let d_l = planar_dist(pos, bs) / d0;
        let h_lb = rayleigh_matrix(n_r, n_t, rng);
        let (w_l, _) = draw_zf(cfg.kappa as usize, n_t, rng)?;
        let z = h_lb * w_l; // N_r × κ, columns z_k = H_{l,b} w_{l,k}
        let scale = Complex64::new(p * d_l.powf(-cfg.alpha), 0.0);
        cov += (&z * z.adjoint()) * scale;
    }
    let w_r = mvdr_filter(&cov, &a_rx)?;
    let echo = cfg.rcs * (d_t / d0).powf(-cfg.alpha_r());
    let signal = echo * p * tx_gain * w_r.dotc(&a_rx).norm_sqr();
    let denom = w_r.dotc(&(&cov * &w_r)).re; // wᴴRw = interference + noise power
    Ok(signal / denom)
}

/// Received SINR of the typical user (at the origin) in one realization.
pub fn run_comm_snapshot(cfg: &NetworkConfig, rng_seed: u64) -> Result<(f64, Scene)> {
    cfg.validate()?;
    let opts = SimOptions::default();
    let mut rng = substream(rng_seed, 0);
    let scene = build_scene(cfg, &opts, &mut rng)?;
    let sinr = comm_sinr(cfg, &scene, &mut rng)?;
    Ok((sinr, scene))
}

/// Output SINR of the MVDR radar receiver serving the typical target in
/// one realization.
pub fn run_radar_snapshot(cfg: &NetworkConfig, rng_seed: u64) -> Result<(f64, Scene)> {
    cfg.validate()?;
    let opts = SimOptions::default();
    let mut rng = substream(rng_seed, 0);
    let scene = build_scene(cfg, &opts, &mut rng)?;
    let sinr = radar_sinr(cfg, &scene, &opts, &mut rng)?;
    Ok((sinr, scene))
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

fn summarize(values: &[f64], trials: u64, seed: u64) -> SnapshotEstimate {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    let devsq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&devsq) / (n - 1.0);
    let half = 1.96 * (var / n).sqrt();
    SnapshotEstimate {
        mean,
        ci_low: mean - half,
        ci_high: mean + half,
        trials,
        seed,
    }
}

/// Coverage, PSE, and EE estimates over independent snapshots with
/// default simulator options.
pub fn estimate_metrics(
    cfg: &NetworkConfig,
    pm: &PowerModel,
    trials: u64,
    rng_seed: u64,
) -> Result<SimulationEstimate> {
    estimate_metrics_opts(cfg, pm, trials, rng_seed, &SimOptions::default())
}

/// [`estimate_metrics`] with explicit simulator options. Deterministic for
/// fixed inputs regardless of the rayon worker count: snapshot i draws
/// from RNG substream i and the reduction is an ordered pairwise sum.
pub fn estimate_metrics_opts(
    cfg: &NetworkConfig,
    pm: &PowerModel,
    trials: u64,
    rng_seed: u64,
    opts: &SimOptions,
) -> Result<SimulationEstimate> {
    cfg.validate()?;
    pm.validate()?;
    if trials < 100 {
        return Err(Error::Parameter(format!(
            "at least 100 trials required, got {trials}"
        )));
    }
    let outcomes: Vec<Result<(f64, f64)>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(rng_seed, i);
            let scene = build_scene(cfg, opts, &mut rng)?;
            let sc = comm_sinr(cfg, &scene, &mut rng)?;
            let sr = radar_sinr(cfg, &scene, opts, &mut rng)?;
            Ok((sc, sr))
        })
        .collect();

    let gamma_c = cfg.gamma_c();
    let gamma_r = cfg.gamma_r();
    let rate_c = cfg.lambda_b * (1.0 + gamma_c).log2();
    let rate_r = cfg.lambda_b * (1.0 + gamma_r).log2();
    let ee_scale = cfg.bandwidth_hz / network_power_density(cfg, pm);

    let mut records = Vec::with_capacity(trials as usize);
    let mut cov_c = Vec::with_capacity(trials as usize);
    let mut cov_r = Vec::with_capacity(trials as usize);
    let mut pse_c = Vec::with_capacity(trials as usize);
    let mut pse_r = Vec::with_capacity(trials as usize);
    let mut ee = Vec::with_capacity(trials as usize);
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let (sinr_comm, sinr_radar) = outcome?;
        records.push(SnapshotRecord {
            snapshot_id: i as u64,
            sinr_comm,
            sinr_radar,
        });
        let ic = f64::from(sinr_comm > gamma_c);
        let ir = f64::from(sinr_radar > gamma_r);
        cov_c.push(ic);
        cov_r.push(ir);
        pse_c.push(rate_c * ic);
        pse_r.push(rate_r * ir);
        ee.push(ee_scale * (rate_c * ic + rate_r * ir));
    }
    Ok(SimulationEstimate {
        coverage_comm: summarize(&cov_c, trials, rng_seed),
        coverage_radar: summarize(&cov_r, trials, rng_seed),
        pse_comm: summarize(&pse_c, trials, rng_seed),
        pse_radar: summarize(&pse_r, trials, rng_seed),
        ee: summarize(&ee, trials, rng_seed),
        records,
    })
}

/// Writes per-snapshot SINR records as CSV.
pub fn write_snapshot_records(path: &Path, records: &[SnapshotRecord]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "snapshot_id,sinr_comm,sinr_radar")?;
    for r in records {
        writeln!(out, "{},{:.12e},{:.12e}", r.snapshot_id, r.sinr_comm, r.sinr_radar)?;
    }
    out.flush()?;
    Ok(())
}

/// Draws of the aggregate interference `Σ g_l·d_l^{-α}` from gamma-faded
/// interferers of a PPP on the annulus used by the analytic CDF machinery
/// (mean cell radius out to `r_area`). Shares the distribution inverted by
/// [`crate::analytic::cdf_interference_euler`].
pub fn sample_interference(cfg: &NetworkConfig, n_samples: usize, rng_seed: u64) -> Result<Vec<f64>> {
    let (d_min, r_max) = interference_bounds(cfg)?;
    let gain = Gamma::new(cfg.kappa as f64, cfg.beta_int.recip())
        .map_err(|e| Error::Parameter(format!("interference gain: {e}")))?;
    let mean = cfg.lambda_b * PI * (r_max * r_max - d_min * d_min);
    let poisson =
        Poisson::new(mean).map_err(|e| Error::Parameter(format!("Poisson mean {mean}: {e}")))?;
    let lo = d_min * d_min;
    let span = r_max * r_max - lo;
    let mut out = Vec::with_capacity(n_samples);
    let mut rng = substream(rng_seed, 1);
    for _ in 0..n_samples {
        let count = poisson.sample(&mut rng) as u64;
        let mut total = 0.0;
        for _ in 0..count {
            let d = (lo + span * rng.random::<f64>()).sqrt();
            total += gain.sample(&mut rng) * d.powf(-cfg.alpha);
        }
        out.push(total);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{cdf_interference_euler, mgf_interference};
    use crate::numerics::EulerInversionParams;
    use approx::assert_relative_eq;
    use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson as PoissonDist};

    #[test]
    fn ppp_zero_density_is_empty() {
        assert!(sample_ppp(0.0, 250.0, 1).unwrap().is_empty());
    }

    #[test]
    fn ppp_rejects_bad_arguments() {
        assert!(sample_ppp(-1.0, 250.0, 1).is_err());
        assert!(sample_ppp(1e-5, 0.0, 1).is_err());
    }

    #[test]
    fn ppp_count_mean_and_equidispersion() {
        let mut rng = substream(42, 0);
        let draws = 10_000;
        let mut counts = Vec::with_capacity(draws);
        for _ in 0..draws {
            counts.push(sample_disc(1e-5, 250.0, &mut rng).unwrap().len() as f64);
        }
        let mean = counts.iter().sum::<f64>() / draws as f64;
        assert!((mean - 1.9635).abs() < 0.03, "mean count {mean}");
        let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (draws - 1) as f64;
        assert!((var / mean - 1.0).abs() < 0.05, "var {var} vs mean {mean}");
    }

    #[test]
    fn ppp_points_uniform_on_disc() {
        let mut rng = substream(7, 0);
        let mut r2 = Vec::new();
        for _ in 0..2000 {
            for p in sample_disc(1e-4, 250.0, &mut rng).unwrap() {
                let rr = p[0] * p[0] + p[1] * p[1];
                assert!(rr <= 250.0 * 250.0 + 1e-9);
                r2.push(rr);
            }
        }
        // E[r²] = R²/2 under area-uniform placement
        let mean_r2 = r2.iter().sum::<f64>() / r2.len() as f64;
        assert!(
            (mean_r2 / (250.0 * 250.0 / 2.0) - 1.0).abs() < 0.02,
            "mean r² {mean_r2} over {} points",
            r2.len()
        );
    }

    #[test]
    fn ppp_count_chi_square_goodness_of_fit() {
        let mean = 1e-5 * PI * 250.0 * 250.0;
        let mut rng = substream(3, 0);
        let draws = 10_000usize;
        let bins = 7usize; // counts 0..=5 and 6+
        let mut observed = vec![0.0; bins];
        for _ in 0..draws {
            let k = sample_disc(1e-5, 250.0, &mut rng).unwrap().len();
            observed[k.min(bins - 1)] += 1.0;
        }
        let pmf = PoissonDist::new(mean).unwrap();
        let mut stat = 0.0;
        let mut tail = draws as f64;
        for (k, &obs) in observed.iter().enumerate().take(bins - 1) {
            let expected = draws as f64 * pmf.pmf(k as u64);
            stat += (obs - expected) * (obs - expected) / expected;
            tail -= expected;
        }
        stat += (observed[bins - 1] - tail) * (observed[bins - 1] - tail) / tail;
        let crit = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99);
        assert!(stat < crit, "chi² {stat} exceeds the 1% critical value {crit}");
    }

    #[test]
    fn zf_identity_channel() {
        let h = CMat::identity(4, 4);
        let (w, varsigma) = zf_precoder(&h).unwrap();
        assert!((w - CMat::identity(4, 4)).norm() < 1e-12);
        for v in varsigma {
            assert_relative_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zf_nulls_cross_channels() {
        let mut rng = substream(5, 0);
        for _ in 0..50 {
            let h = rayleigh_matrix(4, 4, &mut rng);
            let (w, varsigma) = zf_precoder(&h).unwrap();
            let prod = &h * &w;
            for j in 0..4 {
                assert_relative_eq!(w.column(j).norm(), 1.0, epsilon = 1e-12);
                assert!(varsigma[j] > 0.0);
                for i in 0..4 {
                    if i != j {
                        assert!(
                            prod[(i, j)].norm() < 1e-10,
                            "residual {} at ({i},{j})",
                            prod[(i, j)].norm()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn zf_effective_gain_marginal() {
        // ς = 1/[(HHᴴ)⁻¹]_oo ~ Γ(N_t - κ + 1, 1) for i.i.d. CN(0,1) entries
        let mut rng = substream(9, 0);
        for &(k, n_t) in &[(4usize, 4usize), (2, 4)] {
            let shape = (n_t - k + 1) as f64;
            let draws = 20_000;
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..draws {
                let (_, varsigma) = zf_precoder(&rayleigh_matrix(k, n_t, &mut rng)).unwrap();
                sum += varsigma[0];
                sumsq += varsigma[0] * varsigma[0];
            }
            let mean = sum / draws as f64;
            let var = sumsq / draws as f64 - mean * mean;
            assert!(
                (mean / shape - 1.0).abs() < 0.05,
                "κ={k}: mean {mean} vs shape {shape}"
            );
            assert!(
                (var / shape - 1.0).abs() < 0.1,
                "κ={k}: var {var} vs shape {shape}"
            );
        }
    }

    #[test]
    fn zf_rejects_rank_deficiency() {
        let mut h = CMat::zeros(4, 4);
        h[(0, 0)] = Complex64::new(1.0, 0.0);
        assert!(matches!(zf_precoder(&h), Err(Error::Numerical(_))));
    }

    #[test]
    fn mvdr_identity_covariance() {
        let a = steering_vector(0.4, 8);
        let r = CMat::identity(8, 8);
        let w = mvdr_filter(&r, &a).unwrap();
        let want = a.map(|v| v / Complex64::new(a.norm_squared(), 0.0));
        assert!((w - want).norm() < 1e-12);
    }

    #[test]
    fn mvdr_distortionless_and_optimal() {
        let mut rng = substream(13, 0);
        let a = steering_vector(-0.7, 8);
        // random Hermitian PD covariance
        let m = rayleigh_matrix(8, 8, &mut rng);
        let r = &m * m.adjoint() + CMat::identity(8, 8) * Complex64::new(0.1, 0.0);
        let w = mvdr_filter(&r, &a).unwrap();
        let resp = w.dotc(&a);
        assert!((resp - Complex64::new(1.0, 0.0)).norm() < 1e-12, "response {resp}");
        let power = w.dotc(&(&r * &w)).re;
        for _ in 0..100 {
            // random competitor rescaled to the same unit response
            let v = CVec::from_fn(8, |_, _| complex_gaussian(&mut rng));
            let v = v.map(|z| z / v.dotc(&a));
            assert!(power <= v.dotc(&(&r * &v)).re + 1e-12);
        }
    }

    #[test]
    fn mvdr_rejects_indefinite_covariance() {
        let a = steering_vector(0.0, 4);
        let r = CMat::identity(4, 4) * Complex64::new(-1.0, 0.0);
        assert!(mvdr_filter(&r, &a).is_err());
    }

    #[test]
    fn steering_basics() {
        let a = steering_vector(0.0, 8);
        for m in 0..8 {
            assert!((a[m] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
        for &theta in &[-1.2, -0.3, 0.0, 0.8] {
            let a = steering_vector(theta, 8);
            assert_relative_eq!(a.norm_squared(), 8.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn steering_inner_product_is_dirichlet_kernel() {
        let n = 8;
        for &(t1, t2) in &[(0.1, 0.5), (-0.4, 0.2), (0.0, 1.1)] {
            let got = steering_vector(t1, n).dotc(&steering_vector(t2, n)).norm();
            let delta = t2.sin() - t1.sin();
            let want = ((n as f64 * PI * delta / 2.0).sin() / (PI * delta / 2.0).sin()).abs();
            assert_relative_eq!(got, want, max_relative = 1e-10);
        }
    }

    #[test]
    fn comm_sinr_formula_reduction() {
        // single BS, no interferers
        let got = comm_sinr_from_parts(2.0, 50.0, 2.7, 0.8, 0.0, 1e-9);
        let want = 2.0 * 50f64.powf(-2.7) * 0.8 / 1e-9;
        assert_relative_eq!(got, want, epsilon = 1e-12);
    }

    #[test]
    fn comm_sinr_power_invariant_without_noise() {
        let mut cfg = NetworkConfig {
            noise_dbm: f64::NEG_INFINITY,
            ..NetworkConfig::default()
        };
        let (s1, _) = run_comm_snapshot(&cfg, 77).unwrap();
        cfg.p_tx_dbm += 3.0;
        let (s2, _) = run_comm_snapshot(&cfg, 77).unwrap();
        assert_relative_eq!(s1, s2, max_relative = 1e-12);
    }

    #[test]
    fn snapshot_scenes_are_well_formed() {
        let cfg = NetworkConfig::default();
        let (_, scene) = run_comm_snapshot(&cfg, 3).unwrap();
        assert_eq!(scene.user_positions[0], [0.0, 0.0]);
        assert_eq!(scene.target_positions[0], [0.0, 0.0, cfg.h_t]);
        assert!(scene
            .bs_positions
            .iter()
            .any(|&p| planar_dist(p, [0.0, 0.0]) <= cfg.r_area));
        for (u, &b) in scene.user_positions.iter().zip(&scene.user_assoc) {
            let d = planar_dist(*u, scene.bs_positions[b]);
            for q in &scene.bs_positions {
                assert!(d <= planar_dist(*u, *q) + 1e-12);
            }
        }
        let (sinr, _) = run_radar_snapshot(&cfg, 3).unwrap();
        assert!(sinr.is_finite() && sinr >= 0.0);
    }

    #[test]
    fn radar_altitude_degrades_sinr() {
        let mut low = NetworkConfig::default();
        low.h_t = 1.5;
        let mut high = low.clone();
        high.h_t = 200.0;
        let pm = PowerModel::default();
        let est_low = estimate_metrics(&low, &pm, 2000, 21).unwrap();
        let est_high = estimate_metrics(&high, &pm, 2000, 21).unwrap();
        assert!(
            est_high.coverage_radar.mean < est_low.coverage_radar.mean,
            "coverage {} at 200 m vs {} at 1.5 m",
            est_high.coverage_radar.mean,
            est_low.coverage_radar.mean
        );
        // median SINR ordering (stochastic dominance spot check)
        let med = |mut v: Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        };
        let m_low = med(est_low.records.iter().map(|r| r.sinr_radar).collect());
        let m_high = med(est_high.records.iter().map(|r| r.sinr_radar).collect());
        assert!(m_high < m_low, "median {m_high} at 200 m vs {m_low} at 1.5 m");
    }

    #[test]
    fn estimates_are_deterministic_across_worker_counts() {
        let cfg = NetworkConfig::default();
        let pm = PowerModel::default();
        let base = estimate_metrics(&cfg, &pm, 400, 5).unwrap();
        let again = estimate_metrics(&cfg, &pm, 400, 5).unwrap();
        assert_eq!(base.ee, again.ee);
        assert_eq!(base.records, again.records);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let serial = pool.install(|| estimate_metrics(&cfg, &pm, 400, 5).unwrap());
        assert_eq!(base.ee, serial.ee);
        assert_eq!(base.records, serial.records);
    }

    #[test]
    fn estimates_consistent_across_seeds() {
        let cfg = NetworkConfig::default();
        let pm = PowerModel::default();
        let a = estimate_metrics(&cfg, &pm, 3000, 1).unwrap();
        let b = estimate_metrics(&cfg, &pm, 3000, 2).unwrap();
        for (x, y) in [
            (a.coverage_comm, b.coverage_comm),
            (a.coverage_radar, b.coverage_radar),
            (a.ee, b.ee),
        ] {
            assert!(x.ci_low <= x.mean && x.mean <= x.ci_high);
            // difference of two independent means: combined standard error
            let hx = x.ci_high - x.mean;
            let hy = y.ci_high - y.mean;
            let tol = (hx * hx + hy * hy).sqrt();
            assert!(
                (x.mean - y.mean).abs() <= tol,
                "seed means {} vs {} differ by more than {tol}",
                x.mean,
                y.mean
            );
        }
    }

    #[test]
    fn ci_width_scales_as_root_trials() {
        let cfg = NetworkConfig::default();
        let pm = PowerModel::default();
        let small = estimate_metrics(&cfg, &pm, 2000, 11).unwrap();
        let large = estimate_metrics(&cfg, &pm, 8000, 11).unwrap();
        let w_small = small.coverage_comm.ci_high - small.coverage_comm.ci_low;
        let w_large = large.coverage_comm.ci_high - large.coverage_comm.ci_low;
        assert!(
            (w_small / w_large / 2.0 - 1.0).abs() < 0.15,
            "width ratio {}",
            w_small / w_large
        );
    }

    #[test]
    fn rejects_too_few_trials() {
        let cfg = NetworkConfig::default();
        let pm = PowerModel::default();
        assert!(estimate_metrics(&cfg, &pm, 99, 0).is_err());
    }

    #[test]
    fn interference_samples_match_analytic_mgf_and_cdf() {
        let cfg = NetworkConfig::default();
        let samples = sample_interference(&cfg, 20_000, 17).unwrap();
        let (d_min, r_max) = interference_bounds(&cfg).unwrap();

        // atom at zero = void probability of the annulus
        let void = (-cfg.lambda_b * PI * (r_max * r_max - d_min * d_min)).exp();
        let zero_frac =
            samples.iter().filter(|&&x| x == 0.0).count() as f64 / samples.len() as f64;
        assert!((zero_frac - void).abs() < 0.02, "{zero_frac} vs void {void}");

        // MGF agreement at a physical scale s ~ 1/E[I]
        let mu = crate::analytic::mean_interference(&cfg, d_min, r_max).unwrap();
        let s = 1.0 / mu;
        let emp = samples.iter().map(|&x| (-s * x).exp()).sum::<f64>() / samples.len() as f64;
        let ana = mgf_interference(s, &cfg, d_min, r_max).unwrap();
        assert!((emp - ana).abs() < 0.01, "empirical {emp} vs analytic {ana}");

        // CDF agreement at empirical quantiles (KS spot check)
        let mut sorted = samples;
        sorted.sort_by(f64::total_cmp);
        let params = EulerInversionParams::default();
        for &p in &[0.45, 0.55, 0.65, 0.75, 0.85, 0.95] {
            let x = sorted[(p * sorted.len() as f64) as usize];
            let cdf = cdf_interference_euler(x, &cfg, &params).unwrap();
            assert!(
                (cdf - p).abs() < 0.02,
                "CDF({x:.3e}) = {cdf} vs empirical {p}"
            );
        }
    }
}

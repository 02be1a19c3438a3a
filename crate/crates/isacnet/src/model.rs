//! Domain configuration, unit conversions, and the power-consumption model
//! shared by the analytic, Monte Carlo, and optimizer engines.

use std::fmt;
use std::path::Path;

use crate::{Error, Result};

/// Physical and geometric parameters of one deployment scenario.
///
/// Densities are per m², powers in dBm, thresholds in dB, distances in m.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// BS density λ_b, per m².
    pub lambda_b: f64,
    /// User density λ_u, per m². Must satisfy λ_u ≥ 10 λ_b (fully loaded BSs).
    pub lambda_u: f64,
    /// Target density λ_r, per m².
    pub lambda_r: f64,
    /// Transmit antennas per BS.
    pub n_tx: u32,
    /// Receive antennas per BS. Must exceed `n_tx`.
    pub n_rx: u32,
    /// Path-loss exponent, > 2.
    pub alpha: f64,
    /// Per-BS transmit power, dBm.
    pub p_tx_dbm: f64,
    /// Receiver noise power σ², dBm.
    pub noise_dbm: f64,
    /// Communication reliability threshold γ_c, dB.
    pub gamma_c_db: f64,
    /// Radar reliability threshold γ_r, dB.
    pub gamma_r_db: f64,
    /// Target altitude, m.
    pub h_t: f64,
    /// BS height, m.
    pub h_bs: f64,
    /// User height, m.
    pub h_ue: f64,
    /// Analysis-region radius R_A, m.
    pub r_area: f64,
    /// System bandwidth, Hz.
    pub bandwidth_hz: f64,
    /// Served users per BS κ. Must not exceed `n_tx` (ZF feasibility).
    pub kappa: u32,
    /// Rate β of the gamma-distributed interference power (mean κ/β).
    pub beta_int: f64,
    /// Target cross-section factor, dimensionless, > 0.
    pub rcs: f64,
    /// Radar reference distance, m. `None` uses the mean cell radius.
    pub r_ref: Option<f64>,
    /// Reference distance d₀ of the path-loss law `(d/d₀)^{-α}`, m.
    /// Both engines measure link distances in this unit: quadrature node i
    /// stands for `length_scale * r_i` meters, and the simulator applies
    /// the same normalization, which keeps the one-way and two-way
    /// (radar) laws commensurate.
    pub length_scale: f64,
    /// Two-way radar path-loss exponent α_r. `None` uses 2α.
    pub alpha_radar: Option<f64>,
    /// Integrate the radar distance law from h_t instead of 0.
    pub radar_domain_shift: bool,
    /// Coefficient of the altitude-dependent nearest-BS distance law,
    /// `F(r) = 1 - exp(-coeff·λ_b·(r²-h_t²))`.
    pub radar_distance_coeff: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        let bandwidth_hz: f64 = 20e6;
        Self {
            lambda_b: 1e-5,
            lambda_u: 1e-3,
            lambda_r: 1e-5,
            n_tx: 4,
            n_rx: 8,
            alpha: 2.7,
            p_tx_dbm: 30.0,
            // thermal floor over the full band plus a 9 dB noise figure
            noise_dbm: -174.0 + 10.0 * bandwidth_hz.log10() + 9.0,
            gamma_c_db: 2.0,
            gamma_r_db: 2.0,
            h_t: 1.5,
            h_bs: 25.0,
            h_ue: 1.5,
            r_area: 250.0,
            bandwidth_hz,
            kappa: 4,
            beta_int: 1.0,
            rcs: 1.0,
            r_ref: None,
            length_scale: 100.0,
            alpha_radar: None,
            radar_domain_shift: true,
            radar_distance_coeff: 2.0 * std::f64::consts::PI,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_b < 0.0 || self.lambda_u < 0.0 || self.lambda_r < 0.0 {
            return Err(Error::Parameter("densities must be nonnegative".into()));
        }
        if self.lambda_b > 0.0 && self.lambda_u < 10.0 * self.lambda_b {
            return Err(Error::Parameter(format!(
                "lambda_u = {} must be at least 10 lambda_b = {} (fully loaded BSs)",
                self.lambda_u, self.lambda_b
            )));
        }
        if self.n_tx >= self.n_rx {
            return Err(Error::Parameter(format!(
                "n_tx = {} must be less than n_rx = {}",
                self.n_tx, self.n_rx
            )));
        }
        if !(self.alpha > 2.0) {
            return Err(Error::Parameter(format!(
                "alpha = {} must exceed 2 for finite interference moments",
                self.alpha
            )));
        }
        if self.kappa == 0 || self.kappa > self.n_tx {
            return Err(Error::Parameter(format!(
                "kappa = {} must be in 1..=n_tx = {}",
                self.kappa, self.n_tx
            )));
        }
        if !(self.rcs > 0.0) {
            return Err(Error::Parameter("rcs must be positive".into()));
        }
        if !(self.beta_int > 0.0) {
            return Err(Error::Parameter("beta_int must be positive".into()));
        }
        if !(self.r_area > 0.0) {
            return Err(Error::Parameter("r_area must be positive".into()));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::Parameter("bandwidth_hz must be positive".into()));
        }
        if !(self.h_t >= 0.0) {
            return Err(Error::Parameter("h_t must be nonnegative".into()));
        }
        if !(self.length_scale > 0.0) {
            return Err(Error::Parameter("length_scale must be positive".into()));
        }
        if let Some(r) = self.r_ref {
            if !(r > 0.0) {
                return Err(Error::Parameter("r_ref must be positive".into()));
            }
        }
        Ok(())
    }

    /// Transmit power in watts.
    pub fn p_tx_watt(&self) -> f64 {
        dbm_to_watt(self.p_tx_dbm)
    }

    /// Noise power in watts.
    pub fn noise_watt(&self) -> f64 {
        dbm_to_watt(self.noise_dbm)
    }

    /// Linear communication threshold.
    pub fn gamma_c(&self) -> f64 {
        db_to_linear(self.gamma_c_db)
    }

    /// Linear radar threshold.
    pub fn gamma_r(&self) -> f64 {
        db_to_linear(self.gamma_r_db)
    }

    /// Two-way radar path-loss exponent, defaulting to 2α.
    pub fn alpha_r(&self) -> f64 {
        self.alpha_radar.unwrap_or(2.0 * self.alpha)
    }

    /// Radar reference distance in m, defaulting to the mean cell radius.
    pub fn r_ref_m(&self) -> Result<f64> {
        match self.r_ref {
            Some(r) => Ok(r),
            None => mean_cell_radius(self.lambda_b),
        }
    }
}

/// Per-BS power consumption model.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerModel {
    /// Power consumption due to the transmit power P̄_tx, dBm.
    pub p_tx_bar_dbm: f64,
    /// Amplifier/antenna efficiency η_eff ∈ (0, 1].
    pub eta_eff: f64,
    /// Static circuit power P_circ, dBm.
    pub p_circ_dbm: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self {
            p_tx_bar_dbm: 43.0,
            eta_eff: 0.5,
            p_circ_dbm: 51.14,
        }
    }
}

impl PowerModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta_eff > 0.0 && self.eta_eff <= 1.0) {
            return Err(Error::Parameter(format!(
                "eta_eff = {} must lie in (0, 1]",
                self.eta_eff
            )));
        }
        if !(self.per_bs_watt() > 0.0) {
            return Err(Error::Parameter("per-BS power must be positive".into()));
        }
        Ok(())
    }

    /// Average consumed power of one BS, W.
    pub fn per_bs_watt(&self) -> f64 {
        dbm_to_watt(self.p_tx_bar_dbm) / self.eta_eff + dbm_to_watt(self.p_circ_dbm)
    }
}

/// Analytic communication/radar PSE, coverage, and energy efficiency of
/// one configuration. PSE values are per Hz; `ee` carries the bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisResult {
    /// Communication PSE R_c, bit/s/Hz/m².
    pub pse_comm: f64,
    /// Radar PSE R_r, bit/s/Hz/m².
    pub pse_radar: f64,
    /// Energy efficiency, bit/Joule: bandwidth·(R_c + R_r)/power density.
    pub ee: f64,
    pub coverage_comm: f64,
    pub coverage_radar: f64,
}

pub fn dbm_to_watt(x_dbm: f64) -> f64 {
    10f64.powf((x_dbm - 30.0) / 10.0)
}

pub fn watt_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

/// Area power consumption λ_b·(P̄_tx/η_eff + P_circ), W/m².
pub fn network_power_density(cfg: &NetworkConfig, pm: &PowerModel) -> f64 {
    cfg.lambda_b * pm.per_bs_watt()
}

/// Average cell radius 1/√(πλ_b), m.
pub fn mean_cell_radius(lambda_b: f64) -> Result<f64> {
    if !(lambda_b > 0.0) {
        return Err(Error::Parameter(format!(
            "mean cell radius requires lambda_b > 0, got {lambda_b}"
        )));
    }
    Ok(1.0 / (std::f64::consts::PI * lambda_b).sqrt())
}

/// Scenario = network configuration plus power model; the unit read from a
/// config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scenario {
    pub network: NetworkConfig,
    pub power: PowerModel,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.power.validate()
    }

    /// Parses a flat `key = value` config document. Unknown keys are
    /// rejected; missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut scenario = Scenario::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            scenario.apply(key, value).map_err(|message| Error::Config {
                line: line_no,
                message,
            })?;
        }
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    fn apply(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn real(value: &str) -> std::result::Result<f64, String> {
            value
                .parse::<f64>()
                .map_err(|_| format!("`{value}` is not a number"))
        }
        fn count(value: &str) -> std::result::Result<u32, String> {
            value
                .parse::<u32>()
                .map_err(|_| format!("`{value}` is not a positive integer"))
        }
        let net = &mut self.network;
        match key {
            "lambda_b" => net.lambda_b = real(value)?,
            "lambda_u" => net.lambda_u = real(value)?,
            "lambda_r" => net.lambda_r = real(value)?,
            "n_tx" => net.n_tx = count(value)?,
            "n_rx" => net.n_rx = count(value)?,
            "alpha" => net.alpha = real(value)?,
            "p_tx_dbm" => net.p_tx_dbm = real(value)?,
            "noise_dbm" => net.noise_dbm = real(value)?,
            "gamma_c_db" => net.gamma_c_db = real(value)?,
            "gamma_r_db" => net.gamma_r_db = real(value)?,
            "h_t" => net.h_t = real(value)?,
            "h_bs" => net.h_bs = real(value)?,
            "h_ue" => net.h_ue = real(value)?,
            "r_area" => net.r_area = real(value)?,
            "bandwidth_hz" => net.bandwidth_hz = real(value)?,
            "kappa" => net.kappa = count(value)?,
            "beta_int" => net.beta_int = real(value)?,
            "rcs" => net.rcs = real(value)?,
            "r_ref" => net.r_ref = Some(real(value)?),
            "p_tx_bar_dbm" => self.power.p_tx_bar_dbm = real(value)?,
            "eta_eff" => self.power.eta_eff = real(value)?,
            "p_circ_dbm" => self.power.p_circ_dbm = real(value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }
}

impl fmt::Display for AnalysisResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "coverage_comm={:.6} coverage_radar={:.6} pse_comm={:.6e} pse_radar={:.6e} ee={:.6e}",
            self.coverage_comm, self.coverage_radar, self.pse_comm, self.pse_radar, self.ee
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dbm_conversions() {
        assert_relative_eq!(dbm_to_watt(30.0), 1.0, epsilon = 1e-14);
        assert_relative_eq!(dbm_to_watt(0.0), 1e-3, epsilon = 1e-17);
        assert_relative_eq!(dbm_to_watt(43.0), 19.9526, max_relative = 1e-5);
    }

    #[test]
    fn dbm_round_trip() {
        for &x in &[-30.0, 0.0, 12.34, 43.0, 70.0] {
            assert_relative_eq!(watt_to_dbm(dbm_to_watt(x)), x, epsilon = 1e-12);
        }
    }

    #[test]
    fn power_density_table_values() {
        let mut cfg = NetworkConfig::default();
        let pm = PowerModel::default();
        cfg.lambda_b = 1e-5;
        let got = network_power_density(&cfg, &pm);
        assert_relative_eq!(got, 1.6993e-3, max_relative = 1e-4);

        cfg.lambda_b = 0.0;
        assert_eq!(network_power_density(&cfg, &pm), 0.0);

        cfg.lambda_b = 2e-5;
        assert_relative_eq!(network_power_density(&cfg, &pm), 2.0 * got, epsilon = 1e-18);
    }

    #[test]
    fn cell_radius() {
        assert_relative_eq!(
            mean_cell_radius(1.0 / std::f64::consts::PI).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        // radii reported for the optimal comm-only and high-altitude densities
        assert_relative_eq!(
            mean_cell_radius(1.19986e-5).unwrap(),
            162.8675,
            max_relative = 1e-4
        );
        assert_relative_eq!(
            mean_cell_radius(7.99927e-6).unwrap(),
            199.4711,
            max_relative = 1e-4
        );
        assert!(mean_cell_radius(0.0).is_err());
        assert!(mean_cell_radius(-1.0).is_err());
    }

    #[test]
    fn cell_radius_decreasing_in_density() {
        let mut last = f64::INFINITY;
        for i in 1..50 {
            let r = mean_cell_radius(1e-7 * i as f64).unwrap();
            assert!(r < last);
            last = r;
        }
    }

    #[test]
    fn default_scenario_is_valid() {
        Scenario::default().validate().unwrap();
    }

    #[test]
    fn parse_round_trip_and_rejections() {
        let s = Scenario::parse(
            "# scenario\nlambda_b = 2e-5\nlambda_u = 1e-3\ngamma_c_db = 5\neta_eff = 0.4\n",
        )
        .unwrap();
        assert_eq!(s.network.lambda_b, 2e-5);
        assert_eq!(s.network.gamma_c_db, 5.0);
        assert_eq!(s.power.eta_eff, 0.4);

        let err = Scenario::parse("lambda_b = 1e-5\nbogus_key = 3\n").unwrap_err();
        match err {
            Error::Config { line, .. } => assert_eq!(line, 2),
            other => panic!("expected config error, got {other}"),
        }

        assert!(Scenario::parse("lambda_b = not-a-number\n").is_err());
        // invariant violations surface from validate()
        assert!(Scenario::parse("n_tx = 8\nn_rx = 4\n").is_err());
        assert!(Scenario::parse("alpha = 1.9\n").is_err());
        assert!(Scenario::parse("lambda_b = 1e-4\nlambda_u = 1e-4\n").is_err());
    }
}

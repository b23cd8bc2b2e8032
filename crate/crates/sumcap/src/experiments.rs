//! Monte Carlo harness: the convergence study for the per-user sum-capacity
//! sandwich, the rate tail study, and the box occupancy study, plus the CSV
//! plumbing used by the CLI.
//!
//! Everything is deterministic given the config's `master_seed`: per-trial
//! seeds come from [`derive_seed`], and CSV rows never include wall-clock
//! values.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::box_matching::{
    assign_boxes, assign_boxes_points, classify_boxes, occupancy_stats_with_k, pair_and_bound,
};
use crate::capacity_bounds::{
    fading_tail_bound, lower_bound_ia, per_link_rate, tail_bound,
};
use crate::net_model::{
    derive_separation_params, euclidean, sample_network, sample_positions, AttenuationModel, Domain, FadingModel,
    NetworkConfig,
};
use crate::snr_matching::best_upper_bound;
use crate::{derive_seed, Error, Result};

/// How the box grid resolution `M` is chosen for a given `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MPolicy {
    /// Explicit list, parallel to `k_list` (last entry reused if shorter).
    Fixed { m: Vec<u32> },
    /// `M = ⌈K^{3·beta·(1-eta)}⌉` with `beta = 1/(3(2D+1))`.
    KPower,
}

impl MPolicy {
    pub fn resolve(&self, k: usize, k_index: usize, dimension: usize, eta: f64) -> u32 {
        match self {
            MPolicy::Fixed { m } => {
                *m.get(k_index).or_else(|| m.last()).expect("fixed m list is nonempty")
            }
            MPolicy::KPower => {
                let beta = 1.0 / (3.0 * (2.0 * dimension as f64 + 1.0));
                (k as f64).powf(3.0 * beta * (1.0 - eta)).ceil().max(1.0) as u32
            }
        }
    }
}

/// Full description of one Monte Carlo campaign.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub network: NetworkConfig,
    pub k_list: Vec<usize>,
    pub trials: usize,
    pub epsilon: f64,
    pub eta: f64,
    pub m_policy: MPolicy,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.network.domain.validate()?;
        if self.k_list.is_empty() || self.k_list.iter().any(|&k| k == 0) {
            return Err(Error::Config("k_list must hold positive entries".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if !(self.eta > 0.5 && self.eta < 1.0) {
            return Err(Error::Config("eta must lie in (0.5, 1)".into()));
        }
        if let MPolicy::Fixed { m } = &self.m_policy {
            if m.is_empty() || m.contains(&0) {
                return Err(Error::Config("fixed m list must hold positive entries".into()));
            }
        }
        Ok(())
    }

    /// Read a config from a `.json` or `.toml` file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let cfg: ExperimentConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text)?,
            _ => serde_json::from_str(&text)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Outcome of one sampled instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub k: usize,
    pub trial_index: usize,
    pub seed: u64,
    pub lower_per_user: f64,
    pub box_upper_per_user: f64,
    pub snr_upper_per_user: f64,
    pub best_m: u32,
    /// `max_i S_ii`, in bits.
    pub max_s_ii: f64,
    pub runtime_ms: f64,
}

/// Monte Carlo estimate of `E[S_ii] = E[½·log₂(1 + 2·SNR)]`, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub e_hat: f64,
    /// NaN when `sample_count = 1`.
    pub std_err: f64,
}

/// Estimate the expected direct-link rate over independent `(T, R)` pairs
/// (and fading draws when enabled).
pub fn estimate_expected_rate(
    domain: &Domain,
    attenuation: &AttenuationModel,
    fading: &FadingModel,
    sample_count: usize,
    seed: u64,
) -> Result<RateEstimate> {
    if sample_count == 0 {
        return Err(Error::InvalidArgument("sample_count must be positive".into()));
    }
    domain.validate()?;
    let mut tx_rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, "tx-positions", 0));
    let mut rx_rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, "rx-positions", 0));
    let mut fade_rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, "fading", 0));
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..sample_count {
        let t = domain.sample_point(&mut tx_rng, &domain.tx_quantiles);
        let r = domain.sample_point(&mut rx_rng, &domain.rx_quantiles);
        let snr = fading.draw_multiplier(&mut fade_rng) * attenuation.value(euclidean(&t, &r));
        let s = per_link_rate(snr)?;
        sum += s;
        sumsq += s * s;
    }
    let n = sample_count as f64;
    let e_hat = sum / n;
    let std_err = if sample_count == 1 {
        f64::NAN
    } else {
        let var = (sumsq / n - e_hat * e_hat).max(0.0) * n / (n - 1.0);
        (var / n).sqrt()
    };
    Ok(RateEstimate { e_hat, std_err })
}

/// Per-K aggregates of the convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct KAggregate {
    pub k: usize,
    pub m: u32,
    pub mean_lower: f64,
    pub std_lower: f64,
    pub mean_box_upper: f64,
    pub std_box_upper: f64,
    pub mean_snr_upper: f64,
    pub std_snr_upper: f64,
    /// `P̂(|lower/K - Ê| > ε)`.
    pub p_lower_dev: f64,
    /// `P̂(min(box, snr)/K - Ê > ε)`.
    pub p_upper_dev: f64,
    /// Frequency of `max_i S_ii >= (alpha / d_sep) · ln K` (nats).
    pub extreme_frequency: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub e_hat: f64,
    pub e_std_err: f64,
    pub per_k: Vec<KAggregate>,
    pub trials: Vec<TrialRecord>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Fold a K-block of trial records into its aggregate row.
pub fn aggregate_trials(
    k: usize,
    m: u32,
    records: &[TrialRecord],
    e_hat: f64,
    epsilon: f64,
    alpha_over_d_sep: f64,
) -> KAggregate {
    let n = records.len() as f64;
    let lowers: Vec<f64> = records.iter().map(|r| r.lower_per_user).collect();
    let boxes: Vec<f64> = records.iter().map(|r| r.box_upper_per_user).collect();
    let snrs: Vec<f64> = records.iter().map(|r| r.snr_upper_per_user).collect();
    let (mean_lower, std_lower) = mean_std(&lowers);
    let (mean_box_upper, std_box_upper) = mean_std(&boxes);
    let (mean_snr_upper, std_snr_upper) = mean_std(&snrs);
    let p_lower_dev = records
        .iter()
        .filter(|r| (r.lower_per_user - e_hat).abs() > epsilon)
        .count() as f64
        / n;
    let p_upper_dev = records
        .iter()
        .filter(|r| r.box_upper_per_user.min(r.snr_upper_per_user) - e_hat > epsilon)
        .count() as f64
        / n;
    let extreme_threshold_nats = alpha_over_d_sep * (k as f64).ln();
    let extreme_frequency = records
        .iter()
        .filter(|r| r.max_s_ii * std::f64::consts::LN_2 >= extreme_threshold_nats)
        .count() as f64
        / n;
    KAggregate {
        k,
        m,
        mean_lower,
        std_lower,
        mean_box_upper,
        std_box_upper,
        mean_snr_upper,
        std_snr_upper,
        p_lower_dev,
        p_upper_dev,
        extreme_frequency,
    }
}

/// Run one sampled instance end to end.
pub fn run_trial(config: &ExperimentConfig, k: usize, k_index: usize, trial: usize) -> Result<TrialRecord> {
    let seed = derive_seed(config.master_seed, &format!("trial-k{k}"), trial as u64);
    let started = std::time::Instant::now();
    let mut net_cfg = config.network.clone();
    net_cfg.k = k;
    let fail = |what: &str, e: Error| {
        Error::Config(format!("trial k={k} index={trial} seed={seed}: {what}: {e}"))
    };
    let net = sample_network(&net_cfg, seed).map_err(|e| fail("sampling", e))?;
    let lower = lower_bound_ia(&net).lower;

    let m = config.m_policy.resolve(k, k_index, net.dimension, config.eta);
    let partition = classify_boxes(assign_boxes(&net, &net_cfg.domain, m), &net_cfg.domain);
    let box_report = pair_and_bound(
        &partition,
        &net,
        &net_cfg.domain,
        &net_cfg.attenuation,
        derive_seed(seed, "box-pairing", 0),
    );
    let m_list = crate::snr_matching::default_m_list(k);
    let snr_upper = if m_list.is_empty() {
        // K = 1: no category split is possible
        crate::snr_matching::single_user_report(&net).upper
    } else {
        best_upper_bound(&net, &m_list).map_err(|e| fail("snr sweep", e))?.best.upper
    };

    let kf = k as f64;
    let record = TrialRecord {
        k,
        trial_index: trial,
        seed,
        lower_per_user: lower / kf,
        box_upper_per_user: box_report.total() / kf,
        snr_upper_per_user: snr_upper / kf,
        best_m: m,
        max_s_ii: (0..k)
            .map(|i| per_link_rate(net.snr(i)).expect("SNR nonnegative"))
            .fold(0.0, f64::max),
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    assert!(
        record.lower_per_user
            <= record.box_upper_per_user.min(record.snr_upper_per_user) + 1e-9,
        "sandwich violated at seed {seed}"
    );
    Ok(record)
}

/// The convergence study: per-user lower and upper bounds versus the
/// Monte Carlo limit `Ê` across the `k_list`.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let oracle = estimate_expected_rate(
        &config.network.domain,
        &config.network.attenuation,
        &config.network.fading,
        1_000_000,
        derive_seed(config.master_seed, "oracle", 0),
    )?;
    let sep = derive_separation_params(&config.network.domain)?;
    let alpha_over_d_sep = config.network.attenuation.alpha / sep.d_sep;

    let mut trials = Vec::new();
    let mut per_k = Vec::new();
    for (k_index, &k) in config.k_list.iter().enumerate() {
        let mut block = Vec::with_capacity(config.trials);
        for t in 0..config.trials {
            block.push(run_trial(config, k, k_index, t)?);
        }
        let m = config.m_policy.resolve(k, k_index, config.network.domain.dimension, config.eta);
        per_k.push(aggregate_trials(k, m, &block, oracle.e_hat, config.epsilon, alpha_over_d_sep));
        trials.extend(block);
    }
    Ok(ConvergenceReport { e_hat: oracle.e_hat, e_std_err: oracle.std_err, per_k, trials })
}

/// One row of the tail study.
#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    /// Threshold in nats.
    pub u: f64,
    pub empirical_tail: f64,
    pub analytic_bound: f64,
}

/// Empirical `P(S_ii >= u)` from `sample_count` independent links versus the
/// analytic tail bound (deterministic or fading form). `u_grid` in nats.
pub fn run_tail_study(
    config: &ExperimentConfig,
    u_grid: &[f64],
    sample_count: usize,
) -> Result<Vec<TailRow>> {
    let domain = &config.network.domain;
    let attenuation = &config.network.attenuation;
    let fading = &config.network.fading;
    domain.validate()?;
    let sep = derive_separation_params(domain)?;

    let mut tx_rng = ChaCha12Rng::seed_from_u64(derive_seed(config.master_seed, "tx-positions", 0));
    let mut rx_rng = ChaCha12Rng::seed_from_u64(derive_seed(config.master_seed, "rx-positions", 0));
    let mut fade_rng = ChaCha12Rng::seed_from_u64(derive_seed(config.master_seed, "fading", 0));
    let mut s_nats: Vec<f64> = Vec::with_capacity(sample_count);
    for _ in 0..sample_count {
        let t = domain.sample_point(&mut tx_rng, &domain.tx_quantiles);
        let r = domain.sample_point(&mut rx_rng, &domain.rx_quantiles);
        let snr = fading.draw_multiplier(&mut fade_rng) * attenuation.value(euclidean(&t, &r));
        s_nats.push(0.5 * (1.0 + 2.0 * snr).ln());
    }

    Ok(u_grid
        .iter()
        .map(|&u| {
            let empirical_tail =
                s_nats.iter().filter(|&&s| s >= u).count() as f64 / sample_count as f64;
            let analytic_bound = if fading.is_random() {
                fading_tail_bound(u, fading.mean(), &sep, attenuation)
            } else {
                tail_bound(u, &sep, attenuation)
            };
            TailRow { u, empirical_tail, analytic_bound }
        })
        .collect())
}

/// One row of the occupancy study.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyRow {
    pub k: usize,
    pub m: u32,
    pub eta: f64,
    pub exceed_frequency: f64,
    pub chebyshev_bound: f64,
}

/// Frequency of `max box deviation >= K^eta` over `trials` instances per K.
pub fn run_occupancy_study(config: &ExperimentConfig) -> Result<Vec<OccupancyRow>> {
    config.validate()?;
    let domain = &config.network.domain;
    let mut rows = Vec::new();
    for (k_index, &k) in config.k_list.iter().enumerate() {
        let m = config.m_policy.resolve(k, k_index, domain.dimension, config.eta);
        let mut exceed = 0usize;
        for t in 0..config.trials {
            let seed = derive_seed(config.master_seed, &format!("trial-k{k}"), t as u64);
            let mut net_cfg = config.network.clone();
            net_cfg.k = k;
            // positions suffice here; skip the K x K gain matrix
            let (tx, rx) = sample_positions(&net_cfg, seed)?;
            let partition = assign_boxes_points(&rx, &tx, domain, m);
            let stats = occupancy_stats_with_k(&partition, k, domain, config.eta)?;
            if stats.max_abs_deviation >= stats.threshold {
                exceed += 1;
            }
        }
        rows.push(OccupancyRow {
            k,
            m,
            eta: config.eta,
            exceed_frequency: exceed as f64 / config.trials as f64,
            chebyshev_bound: (k as f64).powf(1.0 - 2.0 * config.eta),
        });
    }
    Ok(rows)
}

/// Write a CSV with a header row. Values use the default float formatting so
/// identical runs stay byte-identical.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

/// Write the sidecar `<path>.meta.json` recording the config hash, master
/// seed, and crate version.
pub fn write_metadata(csv_path: &Path, config_json: &str, seed: u64) -> Result<()> {
    let mut hasher = Sha256::new();
    hasher.update(config_json.as_bytes());
    let hash = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<String>();
    let meta = serde_json::json!({
        "config_hash": hash,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let mut path = csv_path.as_os_str().to_owned();
    path.push(".meta.json");
    fs::write(path, serde_json::to_string_pretty(&meta).expect("meta serializes"))?;
    Ok(())
}

pub const TRIALS_CSV_HEADER: &[&str] = &[
    "k",
    "trial",
    "seed",
    "m",
    "lower_per_user",
    "box_upper_per_user",
    "snr_upper_per_user",
    "max_s_ii_bits",
];

/// Per-trial rows for the convergence CSV (no wall-clock columns; output must
/// be reproducible byte for byte).
pub fn convergence_rows(report: &ConvergenceReport) -> Vec<Vec<String>> {
    report
        .trials
        .iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                r.trial_index.to_string(),
                r.seed.to_string(),
                r.best_m.to_string(),
                r.lower_per_user.to_string(),
                r.box_upper_per_user.to_string(),
                r.snr_upper_per_user.to_string(),
                r.max_s_ii.to_string(),
            ]
        })
        .collect()
}

pub const SUMMARY_CSV_HEADER: &[&str] = &[
    "k",
    "m",
    "e_hat",
    "mean_lower",
    "std_lower",
    "mean_box_upper",
    "std_box_upper",
    "mean_snr_upper",
    "std_snr_upper",
    "p_lower_dev",
    "p_upper_dev",
    "extreme_frequency",
];

pub fn summary_rows(report: &ConvergenceReport) -> Vec<Vec<String>> {
    report
        .per_k
        .iter()
        .map(|a| {
            vec![
                a.k.to_string(),
                a.m.to_string(),
                report.e_hat.to_string(),
                a.mean_lower.to_string(),
                a.std_lower.to_string(),
                a.mean_box_upper.to_string(),
                a.std_box_upper.to_string(),
                a.mean_snr_upper.to_string(),
                a.std_snr_upper.to_string(),
                a.p_lower_dev.to_string(),
                a.p_upper_dev.to_string(),
                a.extreme_frequency.to_string(),
            ]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_model::Domain;

    fn base_config(k_list: Vec<usize>, trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            network: NetworkConfig {
                domain: Domain::unit_cube(2),
                attenuation: AttenuationModel::new(4.0, 1.0),
                fading: FadingModel::Deterministic,
                k: 0,
            },
            k_list,
            trials,
            epsilon: 0.1,
            eta: 2.0 / 3.0,
            m_policy: MPolicy::KPower,
            master_seed: 2024,
        }
    }

    #[test]
    fn constant_attenuation_gives_exact_mean() {
        // f == 1.5 everywhere: huge C_dec, cap at 1.5
        let atten = AttenuationModel { alpha: 4.0, c_dec: 1e30, near_field_cap: 1.5 };
        let est = estimate_expected_rate(
            &Domain::unit_cube(2),
            &atten,
            &FadingModel::Deterministic,
            1000,
            9,
        )
        .unwrap();
        assert!((est.e_hat - 1.0).abs() < 1e-12);
        assert!(est.std_err.abs() < 1e-12);
    }

    #[test]
    fn single_sample_std_err_is_nan() {
        let est = estimate_expected_rate(
            &Domain::unit_cube(2),
            &AttenuationModel::new(4.0, 1.0),
            &FadingModel::Deterministic,
            1,
            9,
        )
        .unwrap();
        assert!(est.std_err.is_nan());
        assert!(est.e_hat.is_finite());
    }

    #[test]
    fn k_power_policy_values() {
        // D=2, eta=2/3: exponent = (1 - 2/3) / 5 = 1/15
        let p = MPolicy::KPower;
        assert_eq!(p.resolve(100, 0, 2, 2.0 / 3.0), 2);
        assert_eq!(p.resolve(1600, 0, 2, 2.0 / 3.0), 2);
        // D=1, eta=2/3: exponent = 1/9; 10^4 -> ceil(10^{4/9}) = 3
        assert_eq!(p.resolve(10_000, 0, 1, 2.0 / 3.0), 3);
        let fixed = MPolicy::Fixed { m: vec![2, 4] };
        assert_eq!(fixed.resolve(50, 0, 2, 0.7), 2);
        assert_eq!(fixed.resolve(50, 1, 2, 0.7), 4);
        assert_eq!(fixed.resolve(50, 5, 2, 0.7), 4);
    }

    #[test]
    fn validation_catches_bad_fields() {
        let mut cfg = base_config(vec![10], 1);
        cfg.epsilon = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = base_config(vec![10], 1);
        cfg.eta = 0.5;
        assert!(cfg.validate().is_err());
        let mut cfg = base_config(vec![], 1);
        cfg.k_list = vec![];
        assert!(cfg.validate().is_err());
        assert!(base_config(vec![10], 1).validate().is_ok());
    }

    #[test]
    fn config_round_trips_toml_and_json() {
        let cfg = base_config(vec![10, 20], 3);
        let toml_text = toml::to_string(&cfg).unwrap();
        let back: ExperimentConfig = toml::from_str(&toml_text).unwrap();
        assert_eq!(back.k_list, cfg.k_list);
        assert_eq!(back.m_policy, cfg.m_policy);
        let json_text = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json_text).unwrap();
        assert_eq!(back.master_seed, cfg.master_seed);
    }

    #[test]
    fn single_trial_aggregation_identity() {
        let cfg = base_config(vec![10], 1);
        let record = run_trial(&cfg, 10, 0, 0).unwrap();
        let agg = aggregate_trials(10, record.best_m, &[record.clone()], 2.0, 0.1, 2.0);
        assert_eq!(agg.mean_lower, record.lower_per_user);
        assert_eq!(agg.std_lower, 0.0);
        assert_eq!(agg.mean_snr_upper, record.snr_upper_per_user);
    }

    #[test]
    fn aggregation_deviation_probabilities() {
        // upper == lower == e_hat: both deviation probabilities vanish
        let make = |lower: f64, upper: f64| TrialRecord {
            k: 2,
            trial_index: 0,
            seed: 0,
            lower_per_user: lower,
            box_upper_per_user: upper,
            snr_upper_per_user: upper,
            best_m: 1,
            max_s_ii: 0.0,
            runtime_ms: 0.0,
        };
        let agg = aggregate_trials(2, 1, &[make(1.0, 1.0), make(1.0, 1.0)], 1.0, 0.01, 2.0);
        assert_eq!(agg.p_lower_dev, 0.0);
        assert_eq!(agg.p_upper_dev, 0.0);
        let agg = aggregate_trials(2, 1, &[make(0.5, 2.0), make(1.0, 1.0)], 1.0, 0.01, 2.0);
        assert_eq!(agg.p_lower_dev, 0.5);
        assert_eq!(agg.p_upper_dev, 0.5);
    }

    #[test]
    fn trial_records_satisfy_sandwich() {
        let cfg = base_config(vec![20, 40], 3);
        let report = run_convergence(&cfg).unwrap();
        assert_eq!(report.trials.len(), 6);
        for r in &report.trials {
            assert!(r.lower_per_user <= r.box_upper_per_user.min(r.snr_upper_per_user) + 1e-9);
        }
        for a in &report.per_k {
            assert!((0.0..=1.0).contains(&a.p_lower_dev));
            assert!((0.0..=1.0).contains(&a.p_upper_dev));
        }
    }

    #[test]
    fn convergence_is_deterministic() {
        let cfg = base_config(vec![15], 2);
        let a = run_convergence(&cfg).unwrap();
        let b = run_convergence(&cfg).unwrap();
        assert_eq!(a.trials.len(), b.trials.len());
        for (x, y) in a.trials.iter().zip(&b.trials) {
            assert_eq!(x.lower_per_user, y.lower_per_user);
            assert_eq!(x.snr_upper_per_user, y.snr_upper_per_user);
            assert_eq!(x.seed, y.seed);
        }
        assert_eq!(convergence_rows(&a), convergence_rows(&b));
        assert_eq!(summary_rows(&a), summary_rows(&b));
    }

    #[test]
    fn tail_rows_vacuous_and_monotone() {
        let cfg = base_config(vec![10], 1);
        let rows = run_tail_study(&cfg, &[0.0, 1.0, 2.0, 4.0], 20_000).unwrap();
        // u = 0: every link qualifies, and the bound is vacuously large
        assert_eq!(rows[0].empirical_tail, 1.0);
        assert!(rows[0].analytic_bound > 1.0);
        for w in rows.windows(2) {
            assert!(w[1].empirical_tail <= w[0].empirical_tail);
            assert!(w[1].analytic_bound <= w[0].analytic_bound);
        }
    }

    #[test]
    fn occupancy_single_box_never_deviates() {
        let mut cfg = base_config(vec![50], 5);
        cfg.m_policy = MPolicy::Fixed { m: vec![1] };
        let rows = run_occupancy_study(&cfg).unwrap();
        assert_eq!(rows[0].exceed_frequency, 0.0);
        assert_eq!(rows[0].m, 1);
    }

    #[test]
    fn occupancy_arithmetic() {
        let mut cfg = base_config(vec![10_000], 1);
        cfg.eta = 0.75;
        cfg.network.domain = Domain::unit_cube(1);
        cfg.m_policy = MPolicy::Fixed { m: vec![2] };
        let rows = run_occupancy_study(&cfg).unwrap();
        assert!((rows[0].chebyshev_bound - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn csv_and_metadata_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_csv(&path, &["a", "b"], &[vec!["1".into(), "2".into()]]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "a,b\n1,2\n");
        write_metadata(&path, "{\"x\":1}", 7).unwrap();
        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("out.csv.meta.json")).unwrap())
                .unwrap();
        assert_eq!(meta["seed"], 7);
        assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);
        assert!(meta["version"].is_string());
    }
}

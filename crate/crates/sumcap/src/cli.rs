//! Command-line front end. Every subcommand is deterministic given `--seed`
//! and the config file; tabular output is CSV with a header row plus a
//! `<name>.meta.json` sidecar recording the config hash, seed, and version.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::box_matching::{assign_boxes, classify_boxes, pair_and_bound, BoxLabel};
use crate::capacity_bounds::lower_bound_ia;
use crate::experiments::{
    convergence_rows, run_convergence, run_occupancy_study, run_tail_study, summary_rows,
    write_csv, write_metadata, ExperimentConfig, SUMMARY_CSV_HEADER, TRIALS_CSV_HEADER,
};
use crate::matching_theory::{
    dkw_statistic, matching_deficiency, sample_threshold_bipartite, walkup_no_matching_bound,
    walkup_split_bound,
};
use crate::net_model::{
    sample_network, AttenuationModel, Domain, FadingModel, NetworkConfig, NetworkInstance,
};
use crate::snr_matching::{best_upper_bound, default_m_list};
use crate::{derive_seed, Error, Result};

#[derive(Debug, Parser)]
#[command(name = "sumcap", version, about = "Sum-capacity bounds for random dense Gaussian interference networks")]
pub struct Cli {
    /// Master seed for all randomness.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Experiment config file (.json or .toml); overrides network flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

/// Network parameters available on the command line (used when no --config
/// file is given).
#[derive(Debug, Args)]
pub struct NetArgs {
    /// Number of links K.
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    /// Spatial dimension D.
    #[arg(long, default_value_t = 2)]
    pub dimension: usize,
    /// Domain shape: cube | ball.
    #[arg(long, default_value = "cube")]
    pub domain: String,
    /// Attenuation exponent alpha.
    #[arg(long, default_value_t = 4.0)]
    pub alpha: f64,
    /// Attenuation constant C_dec.
    #[arg(long, default_value_t = 1.0)]
    pub c_dec: f64,
    /// Near-field cap P0.
    #[arg(long, default_value_t = 1e6)]
    pub cap: f64,
    /// Fading: deterministic | uniform (Uniform(0,2) multipliers).
    #[arg(long, default_value = "deterministic")]
    pub fading: String,
}

impl NetArgs {
    pub fn to_config(&self) -> Result<NetworkConfig> {
        let domain = match self.domain.as_str() {
            "cube" => Domain::unit_cube(self.dimension),
            "ball" => Domain::unit_ball(self.dimension),
            other => {
                return Err(Error::Config(format!(
                    "unknown domain '{other}' (expected cube or ball)"
                )))
            }
        };
        let fading = match self.fading.as_str() {
            "deterministic" => FadingModel::Deterministic,
            "uniform" => FadingModel::uniform_default(),
            other => {
                return Err(Error::Config(format!(
                    "unknown fading '{other}' (expected deterministic or uniform)"
                )))
            }
        };
        Ok(NetworkConfig {
            domain,
            attenuation: AttenuationModel {
                alpha: self.alpha,
                c_dec: self.c_dec,
                near_field_cap: self.cap,
            },
            fading,
            k: self.k,
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a network and emit its JSON document.
    Gen {
        #[command(flatten)]
        net: NetArgs,
    },
    /// Lower bound plus both upper bounds for one instance.
    Bounds {
        #[command(flatten)]
        net: NetArgs,
        /// Read the instance from a network JSON file instead of sampling.
        #[arg(long)]
        network: Option<PathBuf>,
        /// Box grid resolution M.
        #[arg(long, default_value_t = 2)]
        m: u32,
    },
    /// Grid-partition upper bound for one instance.
    BoxBound {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long, default_value_t = 2)]
        m: u32,
        /// Also write a CSV of (u, v, label, count) rows to this file.
        #[arg(long)]
        dump_boxes: Option<PathBuf>,
    },
    /// SNR-category upper bound sweep for one instance.
    SnrBound {
        #[command(flatten)]
        net: NetArgs,
        /// Comma-separated m values (default: powers of two up to K/2).
        #[arg(long, value_delimiter = ',')]
        m_list: Vec<usize>,
    },
    /// Convergence study: trials.csv + summary.csv in --out.
    Converge,
    /// Tail study: tail.csv in --out.
    TailSim {
        /// Comma-separated thresholds u in nats.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8")]
        u_grid: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Box occupancy study: occupancy.csv in --out.
    OccupancySim,
    /// Threshold bipartite matching simulation: match.csv in --out.
    MatchSim {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 0.7)]
        gamma: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Evaluate the blocking-pair bounds over a grid of (N, p).
    Walkup {
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
        n_list: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,0.5,0.7,0.9")]
        p_list: Vec<f64>,
    },
}

fn load_experiment(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli.config.as_ref().ok_or_else(|| {
        Error::Config("this subcommand needs --config <file> (.json or .toml)".into())
    })?;
    let mut cfg = ExperimentConfig::from_path(path)?;
    if cli.seed != 0 {
        cfg.master_seed = cli.seed;
    }
    Ok(cfg)
}

fn network_config(cli: &Cli, net: &NetArgs) -> Result<NetworkConfig> {
    match &cli.config {
        Some(path) => {
            let cfg = ExperimentConfig::from_path(path)?;
            let mut network = cfg.network;
            network.k = *cfg.k_list.first().unwrap_or(&network.k);
            Ok(network)
        }
        None => net.to_config(),
    }
}

fn load_or_sample(cli: &Cli, net: &NetArgs, file: &Option<PathBuf>) -> Result<NetworkInstance> {
    match file {
        Some(path) => NetworkInstance::from_json(&fs::read_to_string(path)?),
        None => sample_network(&network_config(cli, net)?, cli.seed),
    }
}

fn ensure_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gen { net } => {
            let instance = sample_network(&network_config(cli, net)?, cli.seed)?;
            println!("{}", instance.to_json());
        }
        Command::Bounds { net, network, m } => {
            let cfg = network_config(cli, net)?;
            let instance = load_or_sample(cli, net, network)?;
            let lower = lower_bound_ia(&instance);
            let partition =
                classify_boxes(assign_boxes(&instance, &cfg.domain, *m), &cfg.domain);
            let box_report = pair_and_bound(
                &partition,
                &instance,
                &cfg.domain,
                &cfg.attenuation,
                derive_seed(cli.seed, "box-pairing", 0),
            );
            let sweep = best_upper_bound(&instance, &default_m_list(instance.k))?;
            println!("lower_bits: {}", lower.lower);
            println!("box_upper_bits: {} (i_m {}, j_m {})", box_report.total(), box_report.i_m, box_report.j_m);
            println!("snr_upper_bits: {}", sweep.best.upper);
            println!("{}", sweep.best.to_json());
        }
        Command::BoxBound { net, m, dump_boxes } => {
            let cfg = network_config(cli, net)?;
            let instance = load_or_sample(cli, net, &None)?;
            let partition =
                classify_boxes(assign_boxes(&instance, &cfg.domain, *m), &cfg.domain);
            let report = pair_and_bound(
                &partition,
                &instance,
                &cfg.domain,
                &cfg.attenuation,
                derive_seed(cli.seed, "box-pairing", 0),
            );
            println!("m: {}", report.m);
            println!("i_m_bits: {}", report.i_m);
            println!("j_m_bits: {}", report.j_m);
            println!("total_bits: {}", report.total());
            println!("matched_pairs: {}", report.matched_pairs.len());
            println!("unmatched_links: {}", report.unmatched_links.len());
            if let Some(path) = dump_boxes {
                let fmt = |xs: &[i64]| {
                    xs.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")
                };
                // labels is a BTreeMap, so iteration is already lexicographic
                let rows: Vec<Vec<String>> = partition
                    .labels
                    .iter()
                    .map(|(idx, label)| {
                        let count = partition.boxes.get(idx).map_or(0, Vec::len);
                        let name = match label {
                            BoxLabel::Spine => "spine",
                            BoxLabel::Edge => "edge",
                            BoxLabel::BodyRepresentative => "body_representative",
                            BoxLabel::BodyPartner => "body_partner",
                        };
                        vec![fmt(&idx.u), fmt(&idx.v), name.to_string(), count.to_string()]
                    })
                    .collect();
                write_csv(path, &["u", "v", "label", "count"], &rows)?;
            }
        }
        Command::SnrBound { net, m_list } => {
            let instance = load_or_sample(cli, net, &None)?;
            let list = if m_list.is_empty() { default_m_list(instance.k) } else { m_list.clone() };
            let sweep = best_upper_bound(&instance, &list)?;
            println!("m,bound_bits,matched_pairs,unmatched_count");
            for entry in &sweep.table {
                println!(
                    "{},{},{},{}",
                    entry.m, entry.bound, entry.matched_pairs, entry.unmatched
                );
            }
        }
        Command::Converge => {
            let cfg = load_experiment(cli)?;
            ensure_out(&cli.out)?;
            let report = run_convergence(&cfg)?;
            let trials_path = cli.out.join("trials.csv");
            let summary_path = cli.out.join("summary.csv");
            write_csv(&trials_path, TRIALS_CSV_HEADER, &convergence_rows(&report))?;
            write_csv(&summary_path, SUMMARY_CSV_HEADER, &summary_rows(&report))?;
            let canonical = cfg.to_canonical_json();
            write_metadata(&trials_path, &canonical, cfg.master_seed)?;
            write_metadata(&summary_path, &canonical, cfg.master_seed)?;
            println!("e_hat_bits: {} (std err {})", report.e_hat, report.e_std_err);
            println!("wrote {} and {}", trials_path.display(), summary_path.display());
        }
        Command::TailSim { u_grid, samples } => {
            let cfg = load_experiment(cli)?;
            ensure_out(&cli.out)?;
            let rows = run_tail_study(&cfg, u_grid, *samples)?;
            let path = cli.out.join("tail.csv");
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.u.to_string(),
                        r.empirical_tail.to_string(),
                        r.analytic_bound.to_string(),
                    ]
                })
                .collect();
            write_csv(&path, &["u_nats", "empirical_tail", "analytic_bound"], &table)?;
            write_metadata(&path, &cfg.to_canonical_json(), cfg.master_seed)?;
            println!("wrote {}", path.display());
        }
        Command::OccupancySim => {
            let cfg = load_experiment(cli)?;
            ensure_out(&cli.out)?;
            let rows = run_occupancy_study(&cfg)?;
            let path = cli.out.join("occupancy.csv");
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.k.to_string(),
                        r.m.to_string(),
                        r.eta.to_string(),
                        r.exceed_frequency.to_string(),
                        r.chebyshev_bound.to_string(),
                    ]
                })
                .collect();
            write_csv(&path, &["k", "m", "eta", "exceed_frequency", "chebyshev_bound"], &table)?;
            write_metadata(&path, &cfg.to_canonical_json(), cfg.master_seed)?;
            println!("wrote {}", path.display());
        }
        Command::MatchSim { n, gamma, trials } => {
            ensure_out(&cli.out)?;
            let mut table = Vec::with_capacity(*trials);
            for t in 0..*trials {
                let sample =
                    sample_threshold_bipartite(*n, derive_seed(cli.seed, "match-sim", t as u64));
                let report = matching_deficiency(&sample, *gamma)?;
                table.push(vec![
                    t.to_string(),
                    n.to_string(),
                    gamma.to_string(),
                    report.deficiency_after_trim.to_string(),
                    report.total_unmatched.to_string(),
                    dkw_statistic(&sample.u).to_string(),
                    dkw_statistic(&sample.v).to_string(),
                ]);
            }
            let path = cli.out.join("match.csv");
            write_csv(
                &path,
                &["trial", "n", "gamma", "deficiency_after_trim", "total_unmatched", "dkw_left", "dkw_right"],
                &table,
            )?;
            let meta = format!("{{\"n\":{n},\"gamma\":{gamma},\"trials\":{trials}}}");
            write_metadata(&path, &meta, cli.seed)?;
            println!("wrote {}", path.display());
        }
        Command::Walkup { n_list, p_list } => {
            println!("n,p,counting_bound,split_bound");
            for &n in n_list {
                for &p in p_list {
                    println!(
                        "{},{},{},{}",
                        n,
                        p,
                        walkup_no_matching_bound(n, p),
                        walkup_split_bound(n, p)
                    );
                }
            }
        }
    }
    Ok(())
}

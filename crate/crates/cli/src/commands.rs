//! One handler per subcommand. Each returns the process exit code on
//! success so the oracle runner can report partial failures itself.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use voterlab_core::meanfield::{critical_epsilon, find_fixed_points};
use voterlab_core::model::build_model;
use voterlab_core::sim::{late_mean, run};
use voterlab_core::{bounds, rng, Certificate, Spin, SpinGrid};

use crate::config::{
    self, BoundsConfig, MeanfieldConfig, OracleConfig, SimulateConfig, SweepConfig,
};
use crate::{AppError, CommonArgs};

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<(), AppError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|err| AppError::Io(format!("cannot write {}: {err}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn initial_grid(init: &Option<String>, side: u32) -> Result<SpinGrid, AppError> {
    let choice = init.as_deref().unwrap_or("all-plus");
    match choice {
        "all-plus" => Ok(SpinGrid::filled(side, Spin::Plus)?),
        "all-minus" => Ok(SpinGrid::filled(side, Spin::Minus)?),
        other => {
            let path = other.strip_prefix("file:").ok_or_else(|| {
                AppError::Config(format!(
                    "init must be \"all-plus\", \"all-minus\", or \"file:<path>\", got {other:?}"
                ))
            })?;
            let text = std::fs::read_to_string(path)
                .map_err(|err| AppError::Io(format!("cannot read {path}: {err}")))?;
            let grid = SpinGrid::parse(&text)?;
            if grid.side() != side {
                return Err(AppError::Config(format!(
                    "initial grid {path} has side {}, expected R = {side}",
                    grid.side()
                )));
            }
            Ok(grid)
        }
    }
}

pub fn simulate(args: &CommonArgs) -> Result<u8, AppError> {
    let cfg: SimulateConfig = config::load(&args.config)?;
    let steps = config::resolve_steps(&cfg.schedule, cfg.steps)?;
    let model = build_model(&cfg.model())?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let initial = initial_grid(&cfg.init, cfg.side)?;
    let result = run(&initial, &model, steps, seed)?;
    let mut text = String::from("step,density\n");
    for (i, d) in result.densities.iter().enumerate() {
        writeln!(text, "{i},{d:.6}").expect("string write");
    }
    write_out(&args.out, &text)?;
    if let Some(path) = &cfg.grid_out {
        std::fs::write(path, result.final_grid.render())
            .map_err(|err| AppError::Io(format!("cannot write {}: {err}", path.display())))?;
    }
    Ok(0)
}

pub fn sweep(args: &CommonArgs) -> Result<u8, AppError> {
    let cfg: SweepConfig = config::load(&args.config)?;
    if cfg.epsilons.is_empty() {
        return Err(AppError::Config("epsilons must list at least one value".into()));
    }
    let steps = config::resolve_steps(&cfg.schedule, cfg.steps)?;
    let replicas = args.replicas.unwrap_or(cfg.replicas);
    if replicas == 0 {
        return Err(AppError::Config("replicas must be >= 1".into()));
    }
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let initial = SpinGrid::filled(cfg.side, Spin::Plus)?;
    let mut text = String::from("epsilon,mean_density,std_error,replicas\n");
    for &epsilon in &cfg.epsilons {
        let model = build_model(&cfg.model(epsilon))?;
        let mut lates = Vec::with_capacity(replicas as usize);
        for r in 0..replicas {
            let out = run(&initial, &model, steps, rng::replica_seed(seed, r as u64))?;
            lates.push(late_mean(&out.densities));
        }
        let n = lates.len() as f64;
        let mean = lates.iter().sum::<f64>() / n;
        let std_error = if lates.len() < 2 {
            0.0
        } else {
            let var = lates.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        };
        writeln!(text, "{epsilon},{mean:.6},{std_error:.6},{replicas}").expect("string write");
    }
    write_out(&args.out, &text)?;
    Ok(0)
}

pub fn meanfield(args: &CommonArgs) -> Result<u8, AppError> {
    let cfg: MeanfieldConfig = config::load(&args.config)?;
    let epsilons = cfg
        .epsilons
        .unwrap_or_else(|| (0..=20).map(|i| i as f64 * 0.025).collect());
    let mut text = String::from("epsilon,rho,stability\n");
    for &epsilon in &epsilons {
        let report = find_fixed_points(epsilon, cfg.b)?;
        for point in &report.points {
            writeln!(text, "{epsilon},{:.9},{}", point.rho, point.stability)
                .expect("string write");
        }
    }
    write_out(&args.out, &text)?;
    let critical = critical_epsilon(cfg.b)?;
    println!("critical_epsilon,{:.9}", critical.value);
    Ok(0)
}

/// Certificate plus an optional Monte Carlo section.
#[derive(Serialize)]
struct BoundsOutput {
    #[serde(flatten)]
    certificate: Certificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<McSection>,
}

#[derive(Serialize)]
struct McSection {
    mean: f64,
    std_error: f64,
    observations: u64,
    replicas: u32,
    /// Estimate below the certified bound, within four standard errors.
    consistent: bool,
}

pub fn bounds(args: &CommonArgs) -> Result<u8, AppError> {
    let cfg: BoundsConfig = config::load(&args.config)?;
    let certificate = bounds::certify_nonergodic(cfg.g, cfg.p, cfg.delta, cfg.b)?;
    let monte_carlo = match &cfg.mc {
        Some(mc) if certificate.pass => {
            let replicas = args.replicas.unwrap_or(mc.replicas);
            let seed = args.seed.or(cfg.seed).unwrap_or(0);
            let est = bounds::mc_minus_estimate(&certificate, mc.steps, mc.side, replicas, seed)?;
            Some(McSection {
                mean: est.mean,
                std_error: est.std_error,
                observations: est.observations,
                replicas: est.replicas,
                consistent: est.mean <= certificate.bound + 4.0 * est.std_error,
            })
        }
        Some(_) => {
            eprintln!("note: certificate failed, skipping the Monte Carlo check");
            None
        }
        None => None,
    };
    let output = BoundsOutput { certificate, monte_carlo };
    let json = serde_json::to_string_pretty(&output)
        .map_err(|err| AppError::Io(format!("cannot serialize certificate: {err}")))?;
    write_out(&args.out, &format!("{json}\n"))?;
    Ok(0)
}

const SUITES: [&str; 4] = ["kappa", "recursion", "tree", "small-t"];

pub fn oracle(args: &CommonArgs) -> Result<u8, AppError> {
    let cfg: OracleConfig = config::load(&args.config)?;
    let picked: Vec<&str> = match &cfg.suites {
        None => SUITES.to_vec(),
        Some(list) => {
            for name in list {
                if !SUITES.contains(&name.as_str()) {
                    return Err(AppError::Config(format!(
                        "unknown suite {name:?}; valid suites are {SUITES:?}"
                    )));
                }
            }
            SUITES
                .iter()
                .copied()
                .filter(|s| list.iter().any(|name| name == s))
                .collect()
        }
    };
    let mut text = String::new();
    let mut failed = false;
    let mut refused = false;
    for name in picked {
        let outcome = match name {
            "kappa" => bounds::kappa_suite(cfg.kappa_max_n, cfg.recurrence_max_items),
            "recursion" => bounds::recursion_suite(cfg.recursion_max_height),
            "tree" => bounds::tree_suite(cfg.tree_max_height),
            "small-t" => bounds::small_t_suite(cfg.small_t_gamma),
            _ => unreachable!("filtered against SUITES"),
        };
        match outcome {
            Ok(()) => writeln!(text, "{name}: PASS").expect("string write"),
            Err(voterlab_core::Error::BudgetExceeded(msg)) => {
                refused = true;
                writeln!(text, "{name}: REFUSED ({msg})").expect("string write");
            }
            Err(err) => {
                failed = true;
                writeln!(text, "{name}: FAIL ({err})").expect("string write");
            }
        }
    }
    write_out(&args.out, &text)?;
    Ok(if failed {
        3
    } else if refused {
        4
    } else {
        0
    })
}

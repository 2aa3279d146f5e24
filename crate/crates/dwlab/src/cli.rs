//! The `dwlab` command-line front end: classify a single map, simulate a
//! composition sequence, run verification scenarios, or sweep a parameter.
//!
//! Exit codes: 0 success/convergent, 1 generic failure, 2 parse or config
//! error, 3 inconclusive classification, 4 divergent, 5 inconclusive
//! simulation, 6 self-map escape.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::holomap::{classify, fixed_points, MapClass, Model};
use crate::sequence::{
    detect_convergence, run_left, run_right, write_trajectory_csv, ConvergenceReport,
    Normalization, Schedule, SequenceSpec, Side, Verdict,
};
use crate::{grammar, verify, Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INCONCLUSIVE_CLASSIFY: i32 = 3;
pub const EXIT_DIVERGENT: i32 = 4;
pub const EXIT_INCONCLUSIVE: i32 = 5;
pub const EXIT_ESCAPE: i32 = 6;

/// Everything a run needs, collected from the config file (TOML) and then
/// overridden by command-line flags. The effective config is echoed as JSON
/// in reports and reparses to an equivalent value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub map: Option<String>,
    pub schedule: Option<String>,
    pub side: String,
    pub normalize: Option<String>,
    pub points: Vec<String>,
    pub max_n: usize,
    pub tol: f64,
    pub window: usize,
    pub grid: usize,
    pub seed: u64,
    pub trials: usize,
    pub values: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            map: None,
            schedule: None,
            side: "left".into(),
            normalize: None,
            points: vec!["0".into(), "0.4".into()],
            max_n: 1000,
            tol: 1e-8,
            window: 50,
            grid: 16,
            seed: 42,
            trials: 100,
            values: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {path:?}: {e}")))?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Parse(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config is serializable")
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_n == 0 || self.window == 0 || self.grid == 0 || self.trials == 0 {
            return Err(Error::InvalidConfig("all numeric knobs must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        if self.side != "left" && self.side != "right" {
            return Err(Error::InvalidConfig("side must be 'left' or 'right'".into()));
        }
        Ok(())
    }

    fn parsed_points(&self) -> Result<Vec<Complex64>> {
        let pts: Vec<Complex64> = self
            .points
            .iter()
            .map(|s| grammar::parse_complex(s))
            .collect::<Result<_>>()?;
        if pts.len() < 2 {
            return Err(Error::InvalidConfig("need at least two sample points".into()));
        }
        Ok(pts)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "dwlab",
    about = "Simulate and verify composition sequences of holomorphic self-maps"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a self-map: identity, elliptic, or Denjoy-Wolff point.
    Classify {
        /// Map expression, e.g. "mobius(3,1,1,3)" or "affine(0.5,0)".
        map: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long = "max-n", default_value_t = 10_000)]
        max_n: usize,
    },
    /// Run a composition sequence and report its convergence behaviour.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Schedule expression, e.g. "const(affine(0.5,0))" or "harmonic_rotation".
        #[arg(long)]
        schedule: Option<String>,
        /// "left" for f_n∘…∘f_1, "right" for g_1∘…∘g_n.
        #[arg(long)]
        side: Option<String>,
        /// Normalizing map: reports base⁻ⁿ∘Fₙ (left) or Gₙ∘base⁻ⁿ (right).
        #[arg(long)]
        normalize: Option<String>,
        /// Comma-separated complex sample points, e.g. "0,0.4,0.2+0.3i".
        #[arg(long)]
        points: Option<String>,
        #[arg(long = "max-n")]
        max_n: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for trajectory.csv and report.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification scenarios ("all" or one id, e.g. thmB, thm5).
    Verify {
        scenario: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the block-schedule offset δ and record verdict flips.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated parameter values, e.g. "0.01,0.05,0.1,0.3".
        #[arg(long)]
        values: Option<String>,
        #[arg(long = "max-n")]
        max_n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Entry point: parse argv, dispatch, and map the outcome to an exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_) | Error::InvalidConfig(_) => EXIT_PARSE,
                Error::Inconclusive(_) => EXIT_INCONCLUSIVE_CLASSIFY,
                Error::Escape { .. } => EXIT_ESCAPE,
                _ => EXIT_FAIL,
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Classify { map, tol, max_n } => cmd_classify(&map, tol, max_n),
        Command::Simulate {
            config,
            schedule,
            side,
            normalize,
            points,
            max_n,
            tol,
            window,
            seed,
            out,
        } => {
            let mut cfg = load_config(config)?;
            if let Some(s) = schedule {
                cfg.schedule = Some(s);
            }
            if let Some(s) = side {
                cfg.side = s;
            }
            if let Some(s) = normalize {
                cfg.normalize = Some(s);
            }
            if let Some(p) = points {
                cfg.points = grammar::split_top_level(&p, ',')
                    .iter()
                    .map(|s| s.trim().to_string())
                    .collect();
            }
            if let Some(n) = max_n {
                cfg.max_n = n;
            }
            if let Some(t) = tol {
                cfg.tol = t;
            }
            if let Some(w) = window {
                cfg.window = w;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            cmd_simulate(&cfg, out.as_deref())
        }
        Command::Verify {
            scenario,
            config,
            seed,
            trials,
            out,
        } => {
            let mut cfg = load_config(config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            cfg.validate()?;
            cmd_verify(&scenario, &cfg, out.as_deref())
        }
        Command::Sweep {
            config,
            values,
            max_n,
            seed,
            out,
        } => {
            let mut cfg = load_config(config)?;
            if let Some(v) = values {
                cfg.values = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Parse(format!("bad sweep value {s:?}")))
                    })
                    .collect::<Result<_>>()?;
            }
            if let Some(n) = max_n {
                cfg.max_n = n;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            cmd_sweep(&cfg, out.as_deref())
        }
    }
}

fn load_config(path: Option<PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::from_toml_file(&p),
        None => Ok(RunConfig::default()),
    }
}

pub fn cmd_classify(map: &str, tol: f64, max_n: usize) -> Result<i32> {
    let m = grammar::parse_map(map)?;
    if m.model() == Some(Model::HalfPlane) {
        return Err(Error::InvalidConfig(
            "classification operates on disc maps; conjugate by the Cayley map first".into(),
        ));
    }
    let class = classify(&m, tol, max_n)?;
    match &class {
        MapClass::Identity => println!("class: identity"),
        MapClass::EllipticFiniteOrder { order } => {
            println!("class: elliptic (finite order {order})")
        }
        MapClass::EllipticInfiniteOrder => println!("class: elliptic (infinite order)"),
        MapClass::InteriorDW { point } => {
            println!("class: interior Denjoy-Wolff");
            println!("denjoy_wolff: {} (interior)", grammar::print_complex(point.get()));
        }
        MapClass::BoundaryDW { point } => {
            println!("class: boundary Denjoy-Wolff");
            println!("denjoy_wolff: {} (boundary)", grammar::print_complex(*point));
        }
    }
    if let Ok(fps) = fixed_points(&m) {
        let printed: Vec<String> = fps.iter().map(|z| grammar::print_complex(*z)).collect();
        println!("fixed_points: [{}]", printed.join(", "));
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SimulateReport {
    verdict: String,
    limit: Option<[f64; 2]>,
    witness: Option<String>,
    steps: usize,
    config: RunConfig,
}

fn verdict_exit(v: Verdict) -> i32 {
    match v {
        Verdict::ConstantLimit | Verdict::NonconstantLimit => EXIT_OK,
        Verdict::Divergent => EXIT_DIVERGENT,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn build_spec(cfg: &RunConfig) -> Result<(SequenceSpec, Vec<Complex64>)> {
    let schedule_src = cfg
        .schedule
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("simulate needs a schedule".into()))?;
    let schedule = Schedule::parse(schedule_src, cfg.max_n)?;
    let side = if cfg.side == "left" { Side::Left } else { Side::Right };
    let model = schedule.map_at(1).model().unwrap_or(Model::Disc);
    let mut spec = SequenceSpec::new(side, schedule, cfg.max_n).with_model(model);
    if let Some(base_src) = &cfg.normalize {
        let base = grammar::parse_map(base_src)?;
        spec = spec.with_normalization(match side {
            Side::Left => Normalization::ConjugateLeft(base),
            Side::Right => Normalization::ConjugateRight(base),
        });
    }
    let points = cfg.parsed_points()?;
    Ok((spec, points))
}

pub fn cmd_simulate(cfg: &RunConfig, out: Option<&Path>) -> Result<i32> {
    let (spec, points) = build_spec(cfg)?;
    let traj = match spec.side {
        Side::Left => run_left(&spec, &points)?,
        Side::Right => run_right(&spec, &points)?,
    };
    let report: ConvergenceReport = detect_convergence(&traj, cfg.tol, cfg.window, 1e-3);
    let sim = SimulateReport {
        verdict: report.verdict.to_string(),
        limit: report.limit_point.map(|p| [p.re, p.im]),
        witness: report.witness.clone(),
        steps: traj.rows.len(),
        config: cfg.clone(),
    };
    let json = serde_json::to_string_pretty(&sim).expect("report serializes");
    println!("{json}");
    if let Some(dir) = out {
        fs::create_dir_all(dir)
            .map_err(|e| Error::InvalidConfig(format!("cannot create {dir:?}: {e}")))?;
        let mut csv = Vec::new();
        write_trajectory_csv(&traj, &spec, &mut csv)
            .map_err(|e| Error::InvalidConfig(format!("csv write failed: {e}")))?;
        fs::write(dir.join("trajectory.csv"), csv)
            .map_err(|e| Error::InvalidConfig(format!("write failed: {e}")))?;
        fs::write(dir.join("report.json"), json)
            .map_err(|e| Error::InvalidConfig(format!("write failed: {e}")))?;
    }
    Ok(verdict_exit(report.verdict))
}

pub fn cmd_verify(scenario: &str, cfg: &RunConfig, out: Option<&Path>) -> Result<i32> {
    let results = if scenario == "all" {
        verify::run_all(cfg.seed, cfg.trials)
    } else {
        vec![verify::run_scenario(scenario, cfg.seed, cfg.trials)?]
    };
    let mut all_pass = true;
    for r in &results {
        all_pass &= r.pass;
        println!("{:12} {}", r.id, if r.pass { "PASS" } else { "FAIL" });
    }
    let json =
        serde_json::to_string(&results).expect("scenario results serialize");
    println!("{json}");
    if let Some(dir) = out {
        fs::create_dir_all(dir)
            .map_err(|e| Error::InvalidConfig(format!("cannot create {dir:?}: {e}")))?;
        fs::write(dir.join("results.json"), &json)
            .map_err(|e| Error::InvalidConfig(format!("write failed: {e}")))?;
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_FAIL })
}

pub fn cmd_sweep(cfg: &RunConfig, out: Option<&Path>) -> Result<i32> {
    let mut csv = String::from("parameter,verdict,limit_re,limit_im,deviation_sum\n");
    for &delta in &cfg.values {
        let schedule = Schedule::adversarial_blocks(delta, cfg.max_n)?;
        let spec = SequenceSpec::new(Side::Left, schedule, cfg.max_n);
        let points = [Complex64::new(0.0, 0.0), Complex64::new(0.3, 0.2)];
        let traj = run_left(&spec, &points)?;
        let report = detect_convergence(&traj, cfg.tol, cfg.window, 1e-3);
        let dev_sum: f64 = report.deviation_series.iter().sum();
        let (re, im) = report
            .limit_point
            .map(|p| (format!("{}", p.re), format!("{}", p.im)))
            .unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            delta, report.verdict, re, im, dev_sum
        ));
    }
    print!("{csv}");
    if let Some(dir) = out {
        fs::create_dir_all(dir)
            .map_err(|e| Error::InvalidConfig(format!("cannot create {dir:?}: {e}")))?;
        fs::write(dir.join("sweep.csv"), &csv)
            .map_err(|e| Error::InvalidConfig(format!("write failed: {e}")))?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.schedule = Some("harmonic_rotation".into());
        cfg.values = vec![0.01, 0.1];
        let json = cfg.to_json();
        let back = RunConfig::from_json(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn config_toml_round_trip() {
        let text = r#"
            schedule = "const(affine(0.5,0))"
            side = "left"
            points = ["0", "0.3+0.2i"]
            max_n = 500
            tol = 1e-9
        "#;
        let cfg: RunConfig = toml::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.max_n, 500);
        assert_eq!(cfg.points.len(), 2);
        // default knobs survive
        assert_eq!(cfg.seed, 42);
    }

    #[test]
    fn config_rejects_bad_knobs() {
        let mut cfg = RunConfig::default();
        cfg.max_n = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.tol = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.side = "sideways".into();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn simulate_verdict_exit_codes() {
        assert_eq!(verdict_exit(Verdict::ConstantLimit), EXIT_OK);
        assert_eq!(verdict_exit(Verdict::NonconstantLimit), EXIT_OK);
        assert_eq!(verdict_exit(Verdict::Divergent), EXIT_DIVERGENT);
        assert_eq!(verdict_exit(Verdict::Inconclusive), EXIT_INCONCLUSIVE);
    }

    #[test]
    fn build_spec_infers_model() {
        let mut cfg = RunConfig::default();
        cfg.schedule = Some("const(mobius_h(1,1,0,1))".into());
        cfg.points = vec!["i".into(), "0.3+2i".into()];
        let (spec, points) = build_spec(&cfg).unwrap();
        assert_eq!(spec.model, Model::HalfPlane);
        assert_eq!(points.len(), 2);
    }
}

use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use mlhjb::defect::{semigroup_check, SemigroupCheck};
use mlhjb::hjb::{evaluate_cost, lqr_oracle, solve_fractional, ControlLaw, ControlProblem, PolicyLaw, SolverConfig};
use mlhjb::quadrature::QuadratureConfig;
use mlhjb::specfun::{ml_one, ml_two, SeriesControl};
use mlhjb::DiscountSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{BoundaryName, ProblemName};
use crate::config::{ConfigFile, NumberList};
use crate::exit::{Outcome, UsageError};
use crate::output::{self, csv_number, line_number};
use crate::{ConfigArg, CostArgs, MlArgs, SolveArgs, VerifyArgs, OUT_DIR_ENV};

fn load_config(arg: &ConfigArg, allowed: &[&str]) -> Result<ConfigFile> {
    let file = match &arg.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    file.check_keys(allowed)?;
    Ok(file)
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| UsageError(format!("missing --{flag} (flag or config entry)")).into())
}

/// `--out`, then the `out` config key, then `MLHJB_OUT_DIR`, then `.`.
fn out_dir(flag: Option<PathBuf>, cfg: &ConfigFile) -> Result<PathBuf> {
    if let Some(dir) = cfg.merge(flag, "out")? {
        return Ok(dir);
    }
    Ok(std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".")))
}

fn initial_state(x0: Option<NumberList>, problem: ProblemName, prob: &ControlProblem) -> Result<Vec<f64>> {
    let x0 = x0.map(|l| l.0).unwrap_or_else(|| problem.default_x0());
    if x0.len() != prob.dim_x() {
        bail!(UsageError(format!(
            "--x0 needs {} component(s) for {}, got {}",
            prob.dim_x(),
            problem.as_str(),
            x0.len()
        )));
    }
    if !prob.contains(&x0) {
        bail!(UsageError(format!("--x0 {x0:?} lies outside the state box {:?}", prob.state_box())));
    }
    Ok(x0)
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

pub fn ml(args: MlArgs) -> Result<Outcome> {
    let cfg = load_config(&args.config, &["alpha", "beta", "z", "tol", "max-terms"])?;
    let alpha = required(cfg.merge(args.alpha, "alpha")?, "alpha")?;
    let z = required(cfg.merge(args.z, "z")?, "z")?;
    let beta = cfg.merge(args.beta, "beta")?;
    let defaults = SeriesControl::default();
    let ctl = SeriesControl {
        rel_tol: cfg.merge_or(args.tol, "tol", defaults.rel_tol)?,
        max_terms: cfg.merge_or(args.max_terms, "max-terms", defaults.max_terms)?,
        ..defaults
    };
    let value = match beta {
        Some(b) => ml_two(alpha, b, z, &ctl)?,
        None => ml_one(alpha, z, &ctl)?,
    };
    println!("{}", line_number(value));
    Ok(Outcome::Success)
}

fn write_checks<W: Write>(w: W, rows: &[SemigroupCheck]) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["t", "s", "product", "defect", "shifted", "residual"])?;
    for r in rows {
        w.write_record([r.t, r.s, r.product, r.defect, r.shifted, r.residual].map(csv_number))?;
    }
    w.flush()?;
    Ok(())
}

pub fn verify(args: VerifyArgs) -> Result<Outcome> {
    let keys = ["alpha", "lambda", "t", "s", "tol", "panels", "samples", "seed", "out"];
    let cfg = load_config(&args.config, &keys)?;
    let alpha = required(cfg.merge(args.alpha, "alpha")?, "alpha")?;
    let lambda = required(cfg.merge(args.lambda, "lambda")?, "lambda")?;
    let t = cfg.merge_or(args.t, "t", 1.0)?;
    let s_list = cfg.merge_or(args.s, "s", NumberList(vec![0.5]))?;
    let tol = cfg.merge_or(args.tol, "tol", 1e-5)?;
    let samples = cfg.merge_or(args.samples, "samples", 0usize)?;
    let seed = cfg.merge_or(args.seed, "seed", 0u64)?;
    let out = cfg.merge(args.out, "out")?;
    let quad = QuadratureConfig {
        panels: cfg.merge_or(args.panels, "panels", QuadratureConfig::default().panels)?,
        ..QuadratureConfig::default()
    };
    if !(tol >= 0.0) {
        bail!(UsageError(format!("--tol must be non-negative, got {tol}")));
    }

    let spec = DiscountSpec::new(alpha, lambda)?;
    let mut pairs: Vec<(f64, f64)> = s_list.0.iter().map(|&s| (t, s)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let a = 2.0 - rng.gen_range(0.0..2.0);
        let b = 2.0 - rng.gen_range(0.0..2.0);
        pairs.push((a, b));
    }
    let rows = pairs
        .iter()
        .map(|&(t, s)| semigroup_check(&spec, t, s, &quad))
        .collect::<mlhjb::Result<Vec<_>>>()?;

    write_checks(std::io::stdout().lock(), &rows)?;
    if let Some(dir) = out {
        output::ensure_dir(&dir)?;
        let path = dir.join("verify.csv");
        let file = std::fs::File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        write_checks(file, &rows)?;
    }
    let worst = rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
    if worst > tol {
        log::error!("max |residual| = {worst:e} exceeds tolerance {tol:e}");
        return Ok(Outcome::ToleranceFailed);
    }
    Ok(Outcome::Success)
}

pub fn solve(args: SolveArgs) -> Result<Outcome> {
    let keys = [
        "problem", "alpha", "lambda", "dt", "horizon", "nx", "window", "boundary", "x0", "stride", "out",
    ];
    let cfg = load_config(&args.config, &keys)?;
    let problem = required(cfg.merge(args.problem, "problem")?, "problem")?;
    let alpha = cfg.merge_or(args.alpha, "alpha", 1.0)?;
    let lambda = cfg.merge_or(args.lambda, "lambda", -0.5)?;
    let boundary = cfg.merge_or(args.boundary, "boundary", BoundaryName::Clamp)?;
    let stride = cfg.merge_or(args.stride, "stride", 100usize)?;
    if stride == 0 {
        bail!(UsageError("--stride must be at least 1".into()));
    }
    let defaults = SolverConfig::default();
    let solver = SolverConfig {
        dt: cfg.merge_or(args.dt, "dt", defaults.dt)?,
        horizon: cfg.merge_or(args.horizon, "horizon", defaults.horizon)?,
        nx: cfg.merge_or(args.nx, "nx", defaults.nx)?,
        window: cfg.merge_or(args.window, "window", defaults.window)?,
        terminal_value: None,
        residual: true,
    };
    let out = out_dir(args.out, &cfg)?;

    let spec = DiscountSpec::new(alpha, lambda)?;
    let prob = problem.build(boundary.into());
    let x0 = initial_state(cfg.merge(args.x0, "x0")?, problem, &prob)?;
    let sol = solve_fractional(&prob, &spec, &solver)?;

    output::ensure_dir(&out)?;
    let value_slices = output::strided(sol.value.slices(), stride, true);
    output::write_value(&out.join("value.csv"), &sol.value, &value_slices)?;
    let policy_slices = output::strided(sol.policy.times().len(), stride, false);
    output::write_policy(&out.join("policy.csv"), &sol.policy, &prob, &policy_slices)?;
    if let Some(res) = &sol.residual {
        // residual slice k sits at time index k + 1
        let picks: Vec<usize> = (0..res.times().len()).filter(|k| (k + 1) % stride == 0).collect();
        output::write_residual(&out.join("residual.csv"), res, &picks)?;
    }
    log::info!("wrote value.csv, policy.csv, residual.csv to {}", out.display());
    println!(
        "problem={} alpha={alpha} lambda={lambda} x0={} V(x0,0)={}",
        problem.as_str(),
        join(&x0),
        line_number(sol.value.at(0, &x0))
    );
    Ok(Outcome::Success)
}

/// Built-in feedback laws for `cost`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Feedback {
    /// `u = k x` with the Riccati gain of the exponential problem.
    Lqr,
    Zero,
    Constant(f64),
}

impl FromStr for Feedback {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "lqr" => Ok(Feedback::Lqr),
            "zero" => Ok(Feedback::Zero),
            other => match other.strip_prefix("const:") {
                Some(v) => v.trim().parse().map(Feedback::Constant).map_err(|e| format!("{v:?}: {e}")),
                None => Err(format!("expected lqr, zero or const:<u>, got {other:?}")),
            },
        }
    }
}

pub fn cost(args: CostArgs) -> Result<Outcome> {
    let keys = ["problem", "alpha", "lambda", "x0", "dt", "horizon", "policy", "feedback"];
    let cfg = load_config(&args.config, &keys)?;
    let problem = required(cfg.merge(args.problem, "problem")?, "problem")?;
    let alpha = cfg.merge_or(args.alpha, "alpha", 1.0)?;
    let lambda = cfg.merge_or(args.lambda, "lambda", -0.5)?;
    let policy_path: Option<PathBuf> = cfg.merge(args.policy, "policy")?;
    let feedback: Option<Feedback> = cfg.merge(args.feedback, "feedback")?;
    if policy_path.is_some() && feedback.is_some() {
        bail!(UsageError("give either a policy file or a feedback law, not both".into()));
    }
    let solver = SolverConfig {
        dt: cfg.merge_or(args.dt, "dt", 0.01)?,
        horizon: cfg.merge_or(args.horizon, "horizon", 20.0)?,
        residual: false,
        ..SolverConfig::default()
    };

    let spec = DiscountSpec::new(alpha, lambda)?;
    let prob = problem.build(BoundaryName::Clamp.into());
    let x0 = initial_state(cfg.merge(args.x0, "x0")?, problem, &prob)?;
    let dim_u = prob.dim_u();

    let j = if let Some(path) = policy_path {
        let policy = output::read_policy(&path, &prob)?;
        evaluate_cost(&prob, &spec, &PolicyLaw::new(&policy, &prob), &x0, &solver)?
    } else {
        let law: Box<dyn ControlLaw> = match feedback.unwrap_or(Feedback::Zero) {
            Feedback::Zero => Box::new(move |_: &[f64], _: f64| vec![0.0; dim_u]),
            Feedback::Constant(u) => Box::new(move |_: &[f64], _: f64| vec![u; dim_u]),
            Feedback::Lqr => {
                let Some((a, b, q, r)) = problem.lq_coefficients() else {
                    bail!(UsageError(format!("no LQR gain for {}", problem.as_str())));
                };
                let (_, k) = lqr_oracle(a, b, q, r, lambda)?;
                Box::new(move |x: &[f64], _: f64| vec![k * x[0]])
            }
        };
        evaluate_cost(&prob, &spec, law.as_ref(), &x0, &solver)?
    };
    println!("{}", line_number(j));
    Ok(Outcome::Success)
}

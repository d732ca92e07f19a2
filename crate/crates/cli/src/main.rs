use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand};
use helios_core::dataset::{
    add_awgn, generate_grid, linspace, params_hash, shuffle_split, split_paths, DataSplit, Dataset, GridSpec,
    Manifest, NoiseSpec, SplitFractions,
};
use helios_core::io::write_string_atomic;
use helios_core::mlp::MlpModel;
use helios_core::mpp::{find_mpp, mpp_csv, read_conditions_csv, MppConfig, MppResult};
use helios_core::pv::{EnvConditions, ModuleParams, SolverConfig};
use helios_core::sim::{compare, run_simulation, ControllerKind, Scenario, DEFAULT_CONTROL_PERIOD_S};
use helios_core::train::{evaluate, train, Algorithm, TrainConfig};
use helios_cli::reproduce;

const FORMATS: &str = "\
File formats:
  module params  JSON object: ns, isc_ref, voc_ref, rs, rsh, ki, ideality, eg0, t_ref, g_ref, q, k_b
  I-V curve      CSV v_V,i_A,p_W
  conditions     CSV t_C,g_Wm2
  MPP results    CSV t_C,g_Wm2,v_mp_V,i_mp_A,p_max_W
  dataset        CSV T_degC,G_Wm2,Imp_A (one sample per row)
  split          <base>.train.csv, <base>.val.csv, <base>.test.csv, <base>.manifest.json
  model          JSON {version, w_hidden[h][2], b_hidden[h], w_out[h], b_out, norm:{t,g,imp}}
  scenario       JSON {control_period_s, samples:[{t_s, T_degC, G_Wm2}]} or CSV t_s,T_degC,G_Wm2
  trace          CSV t_s,v_V,i_A,p_W,p_mpp_W,v_ref_V
  history        CSV epoch,mse_train,mse_val,alpha,beta,gamma
  histogram      CSV bin_lo,bin_hi,count";

#[derive(Parser)]
#[command(
    name = "helios",
    version,
    about = "PV single-diode modelling, MPP search, neural MPPT training and tracker simulation",
    after_help = FORMATS
)]
struct Cli {
    /// Module parameters JSON; defaults to the bundled 200 W module.
    #[arg(long, global = true, env = "HELIOS_PARAMS", value_name = "FILE")]
    params: Option<PathBuf>,

    /// Progress messages on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// I-V / P-V sweep at one condition (CSV v_V,i_A,p_W).
    #[command(after_help = FORMATS)]
    Sweep {
        /// Cell temperature (degC).
        #[arg(long = "t", allow_negative_numbers = true)]
        t_c: f64,
        /// Irradiance (W/m^2).
        #[arg(long = "g")]
        g: f64,
        /// Highest voltage; defaults to the open-circuit voltage at the condition.
        #[arg(long)]
        v_max: Option<f64>,
        /// Number of evenly spaced voltages.
        #[arg(long, default_value_t = 330)]
        points: usize,
        /// Output CSV; stdout when omitted.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Maximum power point for one condition or a conditions CSV.
    #[command(after_help = FORMATS)]
    Mpp {
        /// Cell temperature (degC).
        #[arg(long = "t", allow_negative_numbers = true, requires = "g", conflicts_with = "input")]
        t_c: Option<f64>,
        /// Irradiance (W/m^2).
        #[arg(long = "g", requires = "t_c")]
        g: Option<f64>,
        /// Batch input, CSV t_C,g_Wm2.
        #[arg(long, value_name = "FILE", required_unless_present = "t_c")]
        input: Option<PathBuf>,
        /// Output CSV; stdout when omitted.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Dataset generation, splitting and noise injection.
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Train the 2-h-1 network; writes model.json, train_report.json, train_history.csv.
    #[command(after_help = FORMATS)]
    Train {
        /// Split base written by `dataset split`.
        #[arg(long, value_name = "BASE", conflicts_with = "dataset", required_unless_present = "dataset")]
        split: Option<PathBuf>,
        /// Dataset CSV, split on the fly with --seed and the default 85/10/5 fractions.
        #[arg(long, value_name = "FILE")]
        dataset: Option<PathBuf>,
        #[arg(long, default_value = "out", value_name = "DIR")]
        out_dir: PathBuf,
        /// bayesian_lm or adam.
        #[arg(long, default_value = "bayesian_lm")]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 1000)]
        epochs: usize,
        /// Adam step size.
        #[arg(long, default_value_t = 0.001)]
        learning_rate: f64,
        /// Weight initialisation, mini-batch order and on-the-fly split seed.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 15)]
        hidden: usize,
        /// Initial Levenberg-Marquardt damping.
        #[arg(long, default_value_t = 0.005)]
        mu_init: f64,
        /// Damping growth/shrink factor.
        #[arg(long, default_value_t = 10.0)]
        mu_factor: f64,
    },
    /// Test-set metrics: eval.json, histogram.csv, regression.csv.
    #[command(after_help = FORMATS)]
    Eval {
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        /// Samples to score (dataset CSV).
        #[arg(long, value_name = "FILE")]
        data: PathBuf,
        #[arg(long, default_value = "out", value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Predicted I_mp (A) for one condition.
    #[command(after_help = FORMATS)]
    Predict {
        #[arg(long, value_name = "FILE", required_unless_present = "paper_weights")]
        model: Option<PathBuf>,
        /// Use the bundled published weights instead of a trained model.
        #[arg(long, conflicts_with = "model")]
        paper_weights: bool,
        #[arg(long = "t", allow_negative_numbers = true)]
        t_c: f64,
        #[arg(long = "g")]
        g: f64,
    },
    /// Closed-loop run of one controller; prints its tracking efficiency.
    #[command(after_help = FORMATS)]
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// nn, po, ic, focv or oracle.
        #[arg(long, default_value = "nn")]
        controller: ControllerKind,
        /// Required for the nn controller.
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
        /// Trace CSV output.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
    },
    /// Ranked efficiency table for several controllers on one scenario.
    #[command(after_help = FORMATS)]
    Compare {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated list of nn, po, ic, focv, oracle.
        #[arg(long, value_delimiter = ',', default_value = "nn,po,ic,focv")]
        controllers: Vec<ControllerKind>,
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
        /// Report JSON output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Directory for per-controller trace CSVs.
        #[arg(long, value_name = "DIR")]
        trace_dir: Option<PathBuf>,
    },
    /// Full pipeline with a pass/fail line per acceptance criterion.
    #[command(after_help = FORMATS)]
    Reproduce {
        #[arg(long, default_value = "reproduce-out", value_name = "DIR")]
        out_dir: PathBuf,
        /// Split, training and sampling seed.
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum DatasetCommand {
    /// Evaluate the MPP oracle over a (T, G) grid; writes the CSV and <stem>.manifest.json.
    #[command(after_help = FORMATS)]
    Gen {
        #[arg(long, default_value = "dataset.csv", value_name = "FILE")]
        out: PathBuf,
        #[arg(long, default_value_t = 15.0, allow_negative_numbers = true)]
        t_min: f64,
        #[arg(long, default_value_t = 40.0, allow_negative_numbers = true)]
        t_max: f64,
        #[arg(long, default_value_t = 26)]
        t_count: usize,
        #[arg(long, default_value_t = 200.0)]
        g_min: f64,
        #[arg(long, default_value_t = 1090.0)]
        g_max: f64,
        #[arg(long, default_value_t = 50)]
        g_count: usize,
    },
    /// Seeded shuffle and train/validation/test split.
    #[command(after_help = FORMATS)]
    Split {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// Output base; defaults to the input path without extension.
        #[arg(long, value_name = "BASE")]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 0.85)]
        train: f64,
        #[arg(long, default_value_t = 0.10)]
        val: f64,
        #[arg(long, default_value_t = 0.05)]
        test: f64,
    },
    /// Additive Gaussian noise on the inputs (targets stay clean).
    #[command(after_help = FORMATS)]
    Noise {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Temperature noise standard deviation (degC).
        #[arg(long, default_value_t = 0.0)]
        sigma_t: f64,
        /// Irradiance noise standard deviation (W/m^2).
        #[arg(long, default_value_t = 0.0)]
        sigma_g: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (JSON or CSV).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["constant", "step"])]
    scenario: Option<PathBuf>,
    /// Constant conditions T,G (degC, W/m^2).
    #[arg(long, value_name = "T,G", value_parser = fixed_list::<2>, allow_hyphen_values = true)]
    constant: Option<[f64; 2]>,
    /// Irradiance step T,G_BEFORE,G_AFTER,T_SWITCH.
    #[arg(long, value_name = "T,G0,G1,TS", value_parser = fixed_list::<4>, allow_hyphen_values = true, conflicts_with = "constant")]
    step: Option<[f64; 4]>,
    /// Duration (s) for --constant / --step, or override for a file.
    #[arg(long)]
    duration: Option<f64>,
    /// Control period (s).
    #[arg(long)]
    period: Option<f64>,
}

fn fixed_list<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let values = s
        .split(',')
        .map(|f| f.trim().parse::<f64>().map_err(|e| format!("{f:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

impl ScenarioArgs {
    fn build(&self) -> Result<Scenario> {
        let duration = self.duration.unwrap_or(300.0);
        let mut scenario = match (&self.scenario, &self.constant, &self.step) {
            (Some(path), _, _) => {
                let mut s = Scenario::load(path)?;
                if self.duration.is_some() {
                    s.duration_s = self.duration;
                }
                s
            }
            (None, Some(c), _) => Scenario::constant(c[0], c[1], duration),
            (None, None, Some(s)) => Scenario::irradiance_step(s[0], s[1], s[2], s[3], duration),
            (None, None, None) => Scenario::constant(25.0, 1000.0, duration),
        };
        scenario.control_period_s = self.period.unwrap_or(if self.scenario.is_some() {
            scenario.control_period_s
        } else {
            DEFAULT_CONTROL_PERIOD_S
        });
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Input files that must exist before anything runs.
fn inputs(cli: &Cli) -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = cli.params.iter().cloned().collect();
    let mut add = |p: &Option<PathBuf>| paths.extend(p.iter().cloned());
    match &cli.command {
        Command::Mpp { input, .. } => add(input),
        Command::Dataset(DatasetCommand::Split { input, .. } | DatasetCommand::Noise { input, .. }) => {
            add(&Some(input.clone()))
        }
        Command::Train { split, dataset, .. } => {
            add(dataset);
            if let Some(base) = split {
                let (parts, manifest) = split_paths(base);
                paths.extend(parts);
                paths.push(manifest);
            }
        }
        Command::Eval { model, data, .. } => {
            add(&Some(model.clone()));
            add(&Some(data.clone()));
        }
        Command::Predict { model, .. } => add(model),
        Command::Simulate { scenario, model, .. } | Command::Compare { scenario, model, .. } => {
            add(&scenario.scenario);
            add(model);
        }
        _ => {}
    }
    paths
}

fn load_params(cli: &Cli) -> Result<ModuleParams> {
    let params = match &cli.params {
        Some(path) => ModuleParams::from_json_file(path)?,
        None => ModuleParams::table1(),
    };
    params.validate()?;
    Ok(params)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn emit(out: &Option<PathBuf>, body: &str) -> Result<()> {
    match out {
        Some(path) => Ok(write_string_atomic(path, body)?),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn load_model(path: &Path) -> Result<MlpModel> {
    Ok(MlpModel::load(path)?)
}

fn run(cli: Cli) -> Result<()> {
    let params = load_params(&cli)?;
    let verbose = cli.verbose;
    let note = |msg: String| {
        if verbose {
            eprintln!("{msg}");
        }
    };
    match cli.command {
        Command::Sweep { t_c, g, v_max, points, out } => {
            let env = EnvConditions::from_celsius(t_c, g);
            env.validate()?;
            let curve = params.curve(&env, &SolverConfig::default())?;
            let v_max = match v_max {
                Some(v) => v,
                None => curve.open_circuit_voltage()?,
            };
            emit(&out, &curve.sweep(v_max, points)?.to_csv())?;
        }
        Command::Mpp { t_c, g, input, out } => {
            let conditions = match (input, t_c, g) {
                (Some(path), _, _) => read_conditions_csv(path)?,
                (None, Some(t), Some(g)) => vec![(t, g)],
                _ => bail!("give --t and --g, or --input"),
            };
            let cfg = MppConfig::default();
            let results = conditions
                .iter()
                .map(|&(t, g)| {
                    let env = EnvConditions::from_celsius(t, g);
                    env.validate()?;
                    find_mpp(&params, &env, &cfg)
                })
                .collect::<helios_core::Result<Vec<MppResult>>>()?;
            emit(&out, &mpp_csv(&results))?;
        }
        Command::Dataset(cmd) => dataset(cmd, &params, &note)?,
        Command::Train {
            split,
            dataset,
            out_dir,
            algorithm,
            epochs,
            learning_rate,
            seed,
            hidden,
            mu_init,
            mu_factor,
        } => {
            let split = match (split, dataset) {
                (Some(base), _) => DataSplit::import(base)?.0,
                (None, Some(path)) => shuffle_split(&Dataset::import(path)?, seed, SplitFractions::default())?,
                (None, None) => bail!("give --split or --dataset"),
            };
            let cfg = TrainConfig {
                algorithm,
                max_epochs: epochs,
                learning_rate,
                seed,
                hidden_width: hidden,
                mu_init,
                mu_factor,
                ..TrainConfig::default()
            };
            note(format!("training {:?} on {:?} samples", algorithm, split.sizes()));
            let (model, report) = train::<f64>(&split, &cfg)?;
            ensure_dir(&out_dir)?;
            model.save(out_dir.join("model.json"))?;
            report.write(&out_dir.join("train_report.json"), &out_dir.join("train_history.csv"))?;
            println!("epochs {} ({:?})", report.epochs_run, report.stop_reason);
            println!(
                "mse_train {:.6e} A^2 ({:.6e} normalized)",
                report.mse_train.amps2, report.mse_train.normalized
            );
            for (name, mse) in [("mse_validation", report.mse_validation), ("mse_test", report.mse_test)] {
                if let Some(m) = mse {
                    println!("{name} {:.6e} A^2 ({:.6e} normalized)", m.amps2, m.normalized);
                }
            }
            if let (Some(a), Some(b), Some(gm)) = (report.alpha, report.beta, report.gamma) {
                println!("alpha {a:.6e} beta {b:.6e} gamma {gm:.4} of {}", report.param_count);
            }
        }
        Command::Eval { model, data, out_dir } => {
            let model = load_model(&model)?;
            let data = Dataset::import(data)?;
            let eval = evaluate(&model, &data.samples)?;
            ensure_dir(&out_dir)?;
            let mut json = serde_json::to_string_pretty(&eval)?;
            json.push('\n');
            write_string_atomic(&out_dir.join("eval.json"), &json)?;
            write_string_atomic(&out_dir.join("histogram.csv"), &eval.histogram.to_csv())?;
            let mut regression = String::from("T_degC,G_Wm2,target_A,predicted_A,error_A\n");
            for s in &data.samples {
                let p = model.forward(s.t_c, s.g);
                regression.push_str(&format!("{},{},{},{},{}\n", s.t_c, s.g, s.i_mp, p, s.i_mp - p));
            }
            write_string_atomic(&out_dir.join("regression.csv"), &regression)?;
            println!("samples {}", eval.samples);
            println!("mse {:.6e} A^2", eval.mse);
            println!("r {:.8}", eval.r);
            println!(
                "errors [{:.6}, {:.6}] A, bin width {:.6}",
                eval.histogram.min_error,
                eval.histogram.max_error,
                eval.histogram.bin_width()
            );
        }
        Command::Predict { model, paper_weights, t_c, g } => {
            let model = match (model, paper_weights) {
                (_, true) => MlpModel::paper_weights(),
                (Some(path), false) => load_model(&path)?,
                (None, false) => bail!("give --model or --paper-weights"),
            };
            println!("{:.6}", model.forward(t_c, g));
        }
        Command::Simulate { scenario, controller, model, trace } => {
            let scenario = scenario.build()?;
            let model = model.as_deref().map(load_model).transpose()?;
            let result = run_simulation(&params, &scenario, controller, model.as_ref())?;
            if let Some(path) = trace {
                result.write_trace(path)?;
            }
            println!("{} on {}: efficiency {:.6}", controller, scenario.id, result.efficiency);
        }
        Command::Compare { scenario, controllers, model, out, trace_dir } => {
            let scenario = scenario.build()?;
            let model = model.as_deref().map(load_model).transpose()?;
            let (report, results) = compare(&params, &scenario, &controllers, model.as_ref())?;
            if let Some(path) = out {
                write_string_atomic(&path, &report.to_json())?;
            }
            if let Some(dir) = trace_dir {
                ensure_dir(&dir)?;
                for r in &results {
                    r.write_trace(dir.join(format!("trace_{}.csv", r.controller)))?;
                }
            }
            print!("{}", report.to_table());
        }
        Command::Reproduce { out_dir, seed } => {
            ensure_dir(&out_dir)?;
            let start = Instant::now();
            let mut verdicts = reproduce::run_all(&params, seed, Some(&out_dir), &mut |v| println!("{}", v.line()));
            let overall = reproduce::overall(&verdicts, start);
            println!("{}", overall.line());
            verdicts.push(overall);
            reproduce::write_report(out_dir.join("acceptance.json"), &verdicts)?;
            let passed = verdicts.iter().filter(|v| v.passed).count();
            println!("{passed}/{} criteria passed", verdicts.len());
            if passed != verdicts.len() {
                bail!("acceptance criteria failed");
            }
        }
    }
    Ok(())
}

fn dataset(cmd: DatasetCommand, params: &ModuleParams, note: &dyn Fn(String)) -> Result<()> {
    match cmd {
        DatasetCommand::Gen { out, t_min, t_max, t_count, g_min, g_max, g_count } => {
            let grid = GridSpec {
                t_values: linspace(t_min, t_max, t_count),
                g_values: linspace(g_min, g_max, g_count),
            };
            note(format!("evaluating {} grid points", grid.len()));
            let d = generate_grid(params, &grid)?;
            d.export(&out)?;
            let mut manifest = Manifest::for_dataset(d.len());
            manifest.grid = Some(grid);
            manifest.params_sha256 = Some(params_hash(params));
            manifest.write(out.with_extension("manifest.json"))?;
            println!("{} rows -> {}", d.len(), out.display());
        }
        DatasetCommand::Split { input, out, seed, train, val, test } => {
            let d = Dataset::import(&input)?;
            let fractions = SplitFractions { train, validation: val, test };
            let split = shuffle_split(&d, seed, fractions)?;
            let base = out.unwrap_or_else(|| input.with_extension(""));
            let mut manifest = Manifest::for_dataset(d.len());
            manifest.params_sha256 = Some(params_hash(params));
            split.export(&base, manifest)?;
            let [a, b, c] = split.sizes();
            println!("train {a}, validation {b}, test {c} -> {}.*", base.display());
        }
        DatasetCommand::Noise { input, out, sigma_t, sigma_g, seed } => {
            let d = Dataset::import(&input)?;
            let noisy = add_awgn(&d, sigma_t, sigma_g, seed)?;
            noisy.export(&out)?;
            let mut manifest = Manifest::for_dataset(noisy.len());
            manifest.noise = Some(NoiseSpec { sigma_t, sigma_g, seed });
            manifest.params_sha256 = Some(params_hash(params));
            manifest.write(out.with_extension("manifest.json"))?;
            println!("{} rows -> {}", noisy.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let missing: Vec<PathBuf> = inputs(&cli).into_iter().filter(|p| !p.exists()).collect();
    if !missing.is_empty() {
        for p in &missing {
            eprintln!("error: input file not found: {}", p.display());
        }
        eprintln!("{}", Cli::command().render_usage());
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

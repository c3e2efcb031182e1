use std::path::Path;
use std::time::Instant;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use soop_core::acq::{acq_results_csv, acq_trials_csv, run_acq_montecarlo, AcqConfig};
use soop_core::catalog::{catalog_csv, SystemId};
use soop_core::config::{parse_acq_config, parse_scenario_config, TLE_DIR_ENV};
use soop_core::link_budget::{link_budget_csv, link_budget_table};
use soop_core::mcrlb::{sweep, sweep_csv, AoaParams, Observable, SweepSpec};
use soop_core::orbits::walker::{builtin, BUILTIN_NAMES};
use soop_core::orbits::{format_tle_file, parse_tle, VisibilityRule};
use soop_core::scenario::{ccdf_csv, epoch_grid, gdop_cdf_csv, run_campaign, samples_csv, summary_csv, Constellation};

use crate::error::{CliError, Result};
use crate::manifest::{to_table, Inputs, Outputs, RunManifest};
use crate::{Cli, Command, McrlbArgs, SynthTleArgs};

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let started = Instant::now();
    let mut inputs = Inputs::default();
    let mut outputs = Outputs::new(&cli.out_dir)?;
    let (name, seed, config) = match &cli.command {
        Command::Catalog => {
            no_config(cli, "catalog")?;
            outputs.write("catalog.csv", &catalog_csv())?;
            ("catalog", cli.seed, toml::Table::new())
        }
        Command::Linkbudget => {
            no_config(cli, "linkbudget")?;
            outputs.write("linkbudget.csv", &link_budget_csv(&link_budget_table()?))?;
            ("linkbudget", cli.seed, toml::Table::new())
        }
        Command::Mcrlb(args) => {
            let spec = mcrlb_spec(cli, args, &mut inputs)?;
            outputs.write(&format!("mcrlb_{}.csv", spec.observable), &sweep_csv(&sweep(&spec.to_core()?)?))?;
            ("mcrlb", cli.seed, to_table(&spec))
        }
        Command::Scenario => {
            let (seed, table) = scenario(cli, &mut inputs, &mut outputs)?;
            ("scenario", Some(seed), table)
        }
        Command::Acqsim => {
            let cfg = acq_config(cli, &mut inputs)?;
            let report = run_acq_montecarlo(&cfg)?;
            let failed: usize = report.points.iter().map(|p| p.failed).sum();
            if failed > 0 {
                log::warn!("{failed} acquisition trials failed and were left out of the statistics");
            }
            outputs.write("acq_results.csv", &acq_results_csv(&report.points))?;
            outputs.write("acq_trials.csv", &acq_trials_csv(&report.trials))?;
            ("acqsim", Some(cfg.rng_seed), to_table(&cfg))
        }
        Command::SynthTle(args) => {
            no_config(cli, "synth-tle")?;
            let table = synth_tle(args, &mut outputs)?;
            ("synth-tle", cli.seed, table)
        }
    };
    outputs.finish(RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: name.into(),
        arguments: std::env::args().skip(1).collect(),
        master_seed: seed,
        threads: rayon::current_num_threads(),
        wall_clock_s: started.elapsed().as_secs_f64(),
        inputs: inputs.files,
        outputs: Vec::new(),
        config,
    })
}

fn no_config(cli: &Cli, sub: &str) -> Result<()> {
    match &cli.config {
        Some(_) => Err(CliError::Usage(format!("`{sub}` takes no --config"))),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------------------
// mcrlb
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct McrlbFile {
    mcrlb: McrlbSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct McrlbSection {
    observable: Option<String>,
    systems: Option<Vec<String>>,
    cn0_dbhz: Option<Vec<f64>>,
    /// `[start, stop, step]`
    cn0_range_dbhz: Option<[f64; 3]>,
    obs_time_s: Option<Vec<f64>>,
    aoa: Option<AoaParams>,
}

#[derive(Debug, Serialize)]
struct McrlbResolved {
    observable: String,
    systems: Vec<String>,
    cn0_dbhz: Vec<f64>,
    obs_time_s: Vec<f64>,
    aoa: AoaParams,
}

impl McrlbResolved {
    fn to_core(&self) -> Result<SweepSpec> {
        let observable: Observable = self.observable.parse()?;
        let systems = self.systems.iter().map(|s| s.parse::<SystemId>()).collect::<soop_core::Result<Vec<_>>>()?;
        Ok(SweepSpec {
            observable,
            systems,
            cn0_dbhz: self.cn0_dbhz.clone(),
            obs_time_s: self.obs_time_s.clone(),
            aoa: self.aoa.clone(),
        })
    }
}

fn config_error(field: impl Into<String>, reason: impl Into<String>) -> CliError {
    CliError::Core(soop_core::Error::Config { field: field.into(), reason: reason.into() })
}

/// Inclusive `start, start + step, …, stop` without accumulating rounding.
fn range(field: &str, start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) {
        return Err(config_error(field, format!("bad range {start}:{stop}:{step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if n > 1_000_000 {
        return Err(config_error(field, format!("{n} points is too many")));
    }
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

fn parse_cn0_flag(text: &str) -> Result<Vec<f64>> {
    let bad = |_| config_error("--cn0", format!("`{text}` is not `start:stop:step` or a comma list"));
    if text.contains(':') {
        let parts = text.split(':').map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>().map_err(bad)?;
        match parts[..] {
            [a, b, s] => range("--cn0", a, b, s),
            _ => Err(config_error("--cn0", format!("`{text}` needs three fields"))),
        }
    } else {
        text.split(',').map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>().map_err(bad)
    }
}

fn mcrlb_spec(cli: &Cli, args: &McrlbArgs, inputs: &mut Inputs) -> Result<McrlbResolved> {
    let file = match &cli.config {
        Some(path) => {
            let text = inputs.read_text(path)?;
            let f: McrlbFile = toml::from_str(&text).map_err(|e| config_error("mcrlb config", e.message().trim()))?;
            f.mcrlb
        }
        None => McrlbSection::default(),
    };
    let observable = args
        .observable
        .clone()
        .or(file.observable)
        .ok_or_else(|| CliError::Usage("mcrlb needs --observable or `mcrlb.observable`".into()))?;
    let systems = if !args.systems.is_empty() {
        args.systems.clone()
    } else {
        file.systems.unwrap_or_else(|| SystemId::ALL.iter().map(|s| s.name().to_lowercase()).collect())
    };
    let cn0_dbhz = match (&args.cn0, file.cn0_dbhz, file.cn0_range_dbhz) {
        (Some(flag), _, _) => parse_cn0_flag(flag)?,
        (None, Some(_), Some(_)) => return Err(config_error("mcrlb.cn0_dbhz", "give either cn0_dbhz or cn0_range_dbhz")),
        (None, Some(list), None) => list,
        (None, None, Some([a, b, s])) => range("mcrlb.cn0_range_dbhz", a, b, s)?,
        (None, None, None) => range("--cn0", 20.0, 80.0, 1.0)?,
    };
    let obs_time_s = args.t0.clone().or(file.obs_time_s).unwrap_or_else(|| vec![1.33e-3]);
    let mut aoa = file.aoa.unwrap_or_default();
    if let Some(m) = args.elements {
        aoa.element_count = m;
    }
    if let Some(l) = args.length {
        aoa.length_m = l;
    }
    if let Some(b) = args.beta {
        aoa.beta_deg = b;
    }
    let spec = McrlbResolved { observable, systems, cn0_dbhz, obs_time_s, aoa };
    spec.to_core()?;
    Ok(spec)
}

// ---------------------------------------------------------------------------
// scenario
// ---------------------------------------------------------------------------

fn parent(path: &Path) -> &Path {
    path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."))
}

fn rule_tag(r: &VisibilityRule) -> String {
    format!("theta{}_phi{}", r.masking_angle_deg, r.beamwidth_deg)
}

fn scenario(cli: &Cli, inputs: &mut Inputs, outputs: &mut Outputs) -> Result<(u64, toml::Table)> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Usage("scenario needs --config".into()))?;
    let text = inputs.read_text(path)?;
    let tle_dir = std::env::var_os(TLE_DIR_ENV).map(std::path::PathBuf::from);
    let mut cfg = parse_scenario_config(&text, parent(path), tle_dir.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.rng_seed = seed;
    }
    if let Some(p) = &cfg.sites_path {
        inputs.read(p)?;
    }

    let mut constellations = Vec::with_capacity(cfg.constellations.len());
    for (i, source) in cfg.constellations.iter().enumerate() {
        let mut elements = Vec::new();
        for (j, p) in source.tle_paths.iter().enumerate() {
            let text = inputs.read_text(p)?;
            let parsed = parse_tle(&text)
                .map_err(|e| config_error(format!("constellation[{i}].tle[{j}]"), format!("{}: {e}", p.display())))?;
            for d in &parsed.diagnostics {
                log::warn!("{}: {d}", p.display());
            }
            elements.extend(parsed.records);
        }
        let c = Constellation::from_elements(&source.name, &elements, cfg.staleness);
        for (id, why) in &c.rejected {
            log::warn!("{}: satellite {id} skipped: {why}", source.name);
        }
        constellations.push(c);
    }

    let epochs = epoch_grid(cfg.start, cfg.end, cfg.step_s)?;
    let result = run_campaign(&constellations, &cfg.sites, &epochs, &cfg.rules)?;
    if result.stats.propagation_failures > 0 {
        log::warn!("{} satellite propagations failed and were left out", result.stats.propagation_failures);
    }
    for (rule, samples) in cfg.rules.iter().zip(&result.samples) {
        let tag = rule_tag(rule);
        outputs.write(&format!("samples_{tag}.csv"), &samples_csv(samples))?;
        outputs.write(&format!("ccdf_{tag}.csv"), &ccdf_csv(samples))?;
        outputs.write(&format!("gdop_cdf_{tag}.csv"), &gdop_cdf_csv(samples))?;
        outputs.write(&format!("summary_{tag}.csv"), &summary_csv(samples))?;
    }
    Ok((cfg.rng_seed, to_table(&cfg)))
}

// ---------------------------------------------------------------------------
// acqsim
// ---------------------------------------------------------------------------

fn acq_config(cli: &Cli, inputs: &mut Inputs) -> Result<AcqConfig> {
    let mut cfg = match &cli.config {
        Some(path) => parse_acq_config(&inputs.read_text(path)?)?,
        None => AcqConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.rng_seed = seed;
    }
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// synth-tle
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct SynthRecord {
    epoch: DateTime<Utc>,
    constellations: Vec<String>,
}

fn synth_tle(args: &SynthTleArgs, outputs: &mut Outputs) -> Result<toml::Table> {
    let epoch = DateTime::parse_from_rfc3339(&args.epoch)
        .map_err(|e| CliError::Usage(format!("--epoch `{}`: {e}", args.epoch)))?
        .with_timezone(&Utc);
    let names: Vec<String> = if args.constellations.is_empty() {
        BUILTIN_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        args.constellations.iter().map(|s| s.to_lowercase()).collect()
    };
    for name in &names {
        let c = builtin(name).ok_or_else(|| {
            CliError::Usage(format!("unknown constellation `{name}` (known: {})", BUILTIN_NAMES.join(", ")))
        })?;
        outputs.write(&format!("{name}.tle"), &format_tle_file(&c.generate(epoch)?)?)?;
    }
    Ok(to_table(&SynthRecord { epoch, constellations: names }))
}

//! Argument model, dispatch and report writing for the `incompat` binary.

pub mod table1;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use incompat::bell::{
    bell_threshold, bell_threshold_over_relabelings, load_inequality, no_violation_certificate, seesaw_optimize,
    SeesawConfig,
};
use incompat::linalg::PureState;
use incompat::povm::{
    jm_check_with, jm_threshold_with, subset_jm_profile, Family, JmConfig, MeasurementAssembly, MeasurementFamily,
    Restricted,
};
use incompat::steering::{
    assemblage_from_state, lhs_check_with, steering_threshold_with, Assemblage, LhsConfig,
};
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Parser)]
#[command(name = "incompat", version, about = "Joint measurability, EPR steering and Bell violations of POVM sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Write the JSON report here as well as to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// See-saw restarts.
    #[arg(long, global = true, default_value_t = 100)]
    pub restarts: usize,
    /// Seed of the see-saw random streams.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Feasibility margin tolerance of the SDP tests.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AssemblySource {
    /// POVM file `{"dim", "povms"}`.
    #[arg(long, conflicts_with_all = ["family", "eta"])]
    pub povms: Option<PathBuf>,
    /// noisy-pauli, biased-pauli or file:<povm file> (depolarized by eta).
    #[arg(long, requires = "eta")]
    pub family: Option<String>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Measurement indices, 0-based and comma separated, or "all".
    #[arg(long)]
    pub subset: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FamilyArgs {
    #[arg(long, default_value = "noisy-pauli")]
    pub family: String,
    /// Measurement indices, 0-based and comma separated, or "all".
    #[arg(long, default_value = "all")]
    pub subset: String,
    /// Search interval "lo,hi".
    #[arg(long, default_value = "0,1")]
    pub bracket: String,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Decide joint measurability and emit a mother observable or a witness.
    JmCheck {
        #[command(flatten)]
        source: AssemblySource,
        /// Also test every subset of at least two measurements.
        #[arg(long)]
        profile: bool,
    },
    /// Largest eta at which a family is jointly measurable.
    JmThreshold {
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Decide whether an assemblage has a local-hidden-state model.
    SteerCheck {
        /// Assemblage file `{"dim_b", "sigma"}`.
        #[arg(long, conflicts_with_all = ["family", "eta"])]
        assemblage: Option<PathBuf>,
        #[command(flatten)]
        source: AssemblySource,
        /// phi+ or schmidt:c1,c2,... (used with --family/--povms).
        #[arg(long, default_value = "phi+")]
        state: String,
    },
    /// Largest eta at which a family's assemblage is unsteerable.
    SteerThreshold {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value = "phi+")]
        state: String,
    },
    /// Mother observable of a jointly measurable set.
    MotherExtract {
        #[command(flatten)]
        source: AssemblySource,
    },
    /// Local bound by deterministic enumeration.
    BellLocalBound {
        /// chsh, i3322, chained3 or file:<catalog entry>.
        #[arg(long)]
        ineq: String,
    },
    /// See-saw lower bound on the quantum value with Alice's POVMs fixed.
    BellSeesaw {
        #[arg(long)]
        ineq: String,
        #[command(flatten)]
        source: AssemblySource,
    },
    /// Smallest eta at which the see-saw finds a violation.
    BellThreshold {
        #[arg(long)]
        ineq: String,
        #[command(flatten)]
        family: FamilyArgs,
        /// Minimize over Alice outcome relabelings and party swaps.
        #[arg(long)]
        relabel: bool,
    },
    /// Analytic no-violation certificate for the noisy Pauli family.
    CertifyNoViolation {
        #[arg(long)]
        ineq: String,
        #[arg(long)]
        eta: f64,
        /// Upper bound on the inequality's value for projective qubit measurements.
        #[arg(long)]
        qubit_bound: Option<f64>,
    },
    /// Recompute the thresholds of the incompatibility/Bell table.
    ReproduceTable1 {
        /// Directory with catalog entries i3422_1.json, i3422_2.json, i3422_3.json, i3522.json.
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
}

/// Everything a run depends on; echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(flatten)]
    pub common: Common,
}

impl RunConfig {
    /// Checks that referenced files exist and brackets are ordered.
    pub fn from_cli(cli: Cli) -> anyhow::Result<Self> {
        let config = Self { command: cli.command, common: cli.common };
        let mut files: Vec<&Path> = Vec::new();
        let mut brackets: Vec<&str> = Vec::new();
        match &config.command {
            Command::JmCheck { source, .. } | Command::MotherExtract { source } | Command::BellSeesaw { source, .. } => {
                files.extend(source.povms.as_deref());
            }
            Command::SteerCheck { assemblage, source, .. } => {
                files.extend(assemblage.as_deref());
                files.extend(source.povms.as_deref());
            }
            Command::JmThreshold { family } | Command::SteerThreshold { family, .. } | Command::BellThreshold { family, .. } => {
                brackets.push(&family.bracket);
            }
            Command::ReproduceTable1 { catalog } => files.extend(catalog.as_deref()),
            Command::BellLocalBound { .. } | Command::CertifyNoViolation { .. } => {}
        }
        for f in files {
            if !f.exists() {
                bail!("input file {} does not exist", f.display());
            }
        }
        for b in brackets {
            parse_bracket(b)?;
        }
        if config.common.restarts == 0 {
            bail!("--restarts must be positive");
        }
        Ok(config)
    }

    fn jm_config(&self) -> JmConfig {
        let mut c = JmConfig::default();
        if let Some(t) = self.common.tol {
            c.sdp.margin_tol = t;
        }
        c
    }

    fn lhs_config(&self) -> LhsConfig {
        let mut c = LhsConfig::default();
        if let Some(t) = self.common.tol {
            c.sdp.margin_tol = t;
        }
        c
    }

    pub fn seesaw_config(&self) -> SeesawConfig {
        SeesawConfig { restarts: self.common.restarts, seed: self.common.seed, ..SeesawConfig::default() }
    }
}

pub fn parse_bracket(s: &str) -> anyhow::Result<(f64, f64)> {
    let (lo, hi) = s.split_once(',').with_context(|| format!("bracket {s:?} is not \"lo,hi\""))?;
    let (lo, hi): (f64, f64) = (lo.trim().parse()?, hi.trim().parse()?);
    if !(lo < hi) {
        bail!("bracket {s:?} is not ordered");
    }
    Ok((lo, hi))
}

pub fn parse_subset(s: &str) -> anyhow::Result<Option<Vec<usize>>> {
    if s == "all" {
        return Ok(None);
    }
    let v = s.split(',').map(|t| t.trim().parse::<usize>()).collect::<Result<Vec<_>, _>>()?;
    Ok(Some(v))
}

pub fn parse_family(s: &str) -> anyhow::Result<Family> {
    match s {
        "noisy-pauli" => Ok(Family::NoisyPauli),
        "biased-pauli" => Ok(Family::BiasedPauli),
        _ => match s.strip_prefix("file:") {
            Some(path) => Ok(Family::Depolarized(read_assembly(Path::new(path))?)),
            None => bail!("unknown family {s:?}"),
        },
    }
}

pub fn parse_state(s: &str) -> anyhow::Result<PureState> {
    if s == "phi+" {
        return Ok(PureState::maximally_entangled(2));
    }
    match s.strip_prefix("schmidt:") {
        Some(list) => {
            let c = list.split(',').map(|t| t.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>()?;
            Ok(PureState::schmidt_diagonal(&c)?)
        }
        None => bail!("unknown state {s:?}"),
    }
}

fn read_assembly(path: &Path) -> anyhow::Result<MeasurementAssembly> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(MeasurementAssembly::from_json(&text).with_context(|| format!("parsing {}", path.display()))?)
}

fn family_with_subset(args: &FamilyArgs) -> anyhow::Result<Box<dyn MeasurementFamily>> {
    let family = parse_family(&args.family)?;
    Ok(match parse_subset(&args.subset)? {
        Some(indices) => Box::new(Restricted { inner: family, indices }),
        None => Box::new(family),
    })
}

fn assembly_from(source: &AssemblySource) -> anyhow::Result<MeasurementAssembly> {
    let assembly = match (&source.povms, &source.family, source.eta) {
        (Some(path), _, _) => read_assembly(path)?,
        (None, Some(f), Some(eta)) => parse_family(f)?.at(eta)?,
        _ => bail!("give either --povms <file> or --family <name> --eta <value>"),
    };
    Ok(match source.subset.as_deref().map(parse_subset).transpose()?.flatten() {
        Some(indices) => assembly.subset(&indices)?,
        None => assembly,
    })
}

/// Runs one command and returns its result object (without the header).
pub fn dispatch(config: &RunConfig) -> anyhow::Result<Value> {
    Ok(match &config.command {
        Command::JmCheck { source, profile } => {
            let assembly = assembly_from(source)?;
            let verdict = jm_check_with(&assembly, &config.jm_config())?;
            let mut out = json!({ "verdict": verdict });
            if *profile {
                out["subsets"] = serde_json::to_value(subset_jm_profile(&assembly)?)?;
            }
            out
        }
        Command::JmThreshold { family } => {
            let fam = family_with_subset(family)?;
            let eta = jm_threshold_with(fam.as_ref(), None, parse_bracket(&family.bracket)?, &config.jm_config())?;
            json!({ "eta": eta, "family": fam.name(), "method": "sdp-bisection", "width": 1e-5 })
        }
        Command::SteerCheck { assemblage, source, state } => {
            let assemblage = match assemblage {
                Some(path) => Assemblage::from_json(&std::fs::read_to_string(path)?)?,
                None => assemblage_from_state(&parse_state(state)?.density(), &assembly_from(source)?)?,
            };
            json!({ "verdict": lhs_check_with(&assemblage, &config.lhs_config())? })
        }
        Command::SteerThreshold { family, state } => {
            let fam = family_with_subset(family)?;
            let psi = parse_state(state)?;
            let eta = steering_threshold_with(fam.as_ref(), &psi, parse_bracket(&family.bracket)?, &config.lhs_config())?;
            json!({ "eta": eta, "family": fam.name(), "method": "sdp-bisection", "width": 1e-5 })
        }
        Command::MotherExtract { source } => {
            let verdict = jm_check_with(&assembly_from(source)?, &config.jm_config())?;
            json!({ "jointly_measurable": verdict.jointly_measurable, "margin": verdict.margin, "mother": verdict.mother })
        }
        Command::BellLocalBound { ineq } => {
            let i = load_inequality(ineq)?;
            json!({ "name": i.name, "local_bound": i.local_bound()?, "oracle_bound": i.local_bound_by_bob()? })
        }
        Command::BellSeesaw { ineq, source } => {
            let i = load_inequality(ineq)?;
            let r = seesaw_optimize(&i, &assembly_from(source)?, &config.seesaw_config())?;
            json!({ "inequality": i.name, "violation": r.value > i.local_bound + 1e-7, "result": r })
        }
        Command::BellThreshold { ineq, family, relabel } => {
            let i = load_inequality(ineq)?;
            let fam = family_with_subset(family)?;
            let bracket = parse_bracket(&family.bracket)?;
            let t = if *relabel {
                bell_threshold_over_relabelings(&i, fam.as_ref(), bracket, &config.seesaw_config())?
            } else {
                bell_threshold(&i, fam.as_ref(), bracket, &config.seesaw_config())?
            };
            json!({ "inequality": i.name, "family": fam.name(), "method": "seesaw-bisection", "threshold": t })
        }
        Command::CertifyNoViolation { ineq, eta, qubit_bound } => {
            let i = load_inequality(ineq)?;
            json!({ "inequality": i.name, "certificate": no_violation_certificate(&i, *eta, *qubit_bound)? })
        }
        Command::ReproduceTable1 { catalog } => {
            serde_json::to_value(table1::reproduce_table1(catalog.as_deref(), &config.seesaw_config())?)?
        }
    })
}

/// `{"schema_version", "command", "config", "result"}`.
pub fn report(config: &RunConfig, result: Value) -> anyhow::Result<Value> {
    let config_value = serde_json::to_value(config)?;
    let command = config_value["command"]["name"].clone();
    Ok(json!({ "schema_version": SCHEMA_VERSION, "command": command, "config": config_value, "result": result }))
}

/// Process exit status for an error: 2 when the numerics were inconclusive.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<incompat::Error>() {
        Some(incompat::Error::Inconclusive(_)) => 2,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsers() {
        assert_eq!(parse_bracket("0.2, 0.8").unwrap(), (0.2, 0.8));
        assert!(parse_bracket("0.8,0.2").is_err());
        assert!(parse_bracket("0.5").is_err());
        assert_eq!(parse_subset("all").unwrap(), None);
        assert_eq!(parse_subset("0,2").unwrap(), Some(vec![0, 2]));
        assert!(matches!(parse_family("biased-pauli").unwrap(), Family::BiasedPauli));
        assert!(parse_family("file:/nonexistent").is_err());
        assert_eq!(parse_state("schmidt:0.6,0.8").unwrap().dim_a(), 2);
        assert!(parse_state("ghz").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&incompat::Error::Inconclusive("stalled".into()).into()), 2);
        assert_eq!(exit_code(&incompat::Error::MissingQubitBound.into()), 1);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), 1);
    }
}

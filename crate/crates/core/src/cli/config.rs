use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::algebra::{ToleranceConfig, Units};
use crate::error::{Error, Result};
use crate::evolution::Propagation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Orthogonal,
    Nonorthogonal,
    Both,
    /// An eigenstate of diag(spectrum); trace-path only.
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    /// (G + G†)/2 generators with Haar-random initial states.
    Gaussian,
    /// Split generators in a random basis, started in |ψᵢ⟩.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Spectral,
    Ode,
}

impl From<Method> for Propagation {
    fn from(m: Method) -> Self {
        match m {
            Method::Spectral => Propagation::Spectral,
            Method::Ode => Propagation::Ode,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    VerifyIntelligent,
    RandomSweep,
    TracePath,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::VerifyIntelligent => "verify-intelligent",
            CommandName::RandomSweep => "random-sweep",
            CommandName::TracePath => "trace-path",
        }
    }
}

/// Command-line flags shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Args)]
pub struct RunArgs {
    /// Family to run [default: both for verify-intelligent, nonorthogonal for trace-path]
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    /// Hilbert-space dimension of the split generator or of sweep trials
    /// [default: 2, or 4 for random-sweep]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Upper end of the per-trial dimension range in random-sweep
    #[arg(long)]
    pub dim_max: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub a0: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a1: f64,
    #[arg(long, default_value_t = 0)]
    pub i: usize,
    #[arg(long, default_value_t = 1)]
    pub j: usize,
    /// Eigenvalues of the diagonal generator used by the orthogonal and
    /// stationary kinds
    #[arg(
        long,
        value_delimiter = ',',
        default_values_t = [1.0, 3.0],
        allow_negative_numbers = true
    )]
    pub spectrum: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lambda1: f64,
    /// End of the parameter range [default: family dependent]
    #[arg(long, allow_negative_numbers = true)]
    pub lambda2: Option<f64>,
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = Ensemble::Gaussian)]
    pub ensemble: Ensemble,
    #[arg(long, value_enum, default_value_t = Method::Spectral)]
    pub method: Method,
    #[arg(long)]
    pub tol_norm: Option<f64>,
    #[arg(long)]
    pub tol_herm: Option<f64>,
    #[arg(long)]
    pub tol_saturation: Option<f64>,
    #[arg(long)]
    pub tol_saturation_ode: Option<f64>,
    #[arg(long)]
    pub tol_residual: Option<f64>,
    #[arg(long)]
    pub tol_rank: Option<f64>,
    #[arg(long)]
    pub tol_coincident: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Resolved configuration, echoed into every report. The output
/// destination is left out so reports do not depend on where they go.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandName,
    pub kind: Kind,
    pub dimension: usize,
    pub dimension_max: usize,
    pub hbar: f64,
    pub a0: f64,
    pub a1: f64,
    pub i: usize,
    pub j: usize,
    pub spectrum: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub trials: usize,
    pub ensemble: Ensemble,
    pub method: Method,
    pub tolerances: ToleranceConfig,
    pub format: Format,
}

fn finite(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite, got {x}")))
    }
}

impl RunConfig {
    pub fn resolve(command: CommandName, args: &RunArgs) -> Result<Self> {
        let kind = args.kind.unwrap_or(match command {
            CommandName::TracePath => Kind::Nonorthogonal,
            _ => Kind::Both,
        });
        match (command, kind) {
            (CommandName::TracePath, Kind::Both) => {
                return Err(Error::InvalidArgument("trace-path needs a single --kind".into()))
            }
            (CommandName::VerifyIntelligent, Kind::Stationary) => {
                return Err(Error::InvalidArgument(
                    "verify-intelligent runs the orthogonal and nonorthogonal kinds only".into(),
                ))
            }
            _ => {}
        }
        let dimension = args.dim.unwrap_or(match command {
            CommandName::RandomSweep => 4,
            _ => 2,
        });
        let dimension_max = args.dim_max.unwrap_or(dimension);
        if dimension < 2 {
            return Err(Error::DimensionTooSmall(dimension));
        }
        if dimension_max < dimension {
            return Err(Error::InvalidArgument(format!(
                "--dim-max {dimension_max} is below --dim {dimension}"
            )));
        }
        if command == CommandName::RandomSweep && args.trials == 0 {
            return Err(Error::InvalidArgument("--trials must be at least 1".into()));
        }
        if args.spectrum.is_empty() {
            return Err(Error::InvalidArgument("--spectrum is empty".into()));
        }
        for &a in &args.spectrum {
            finite("spectrum entry", a)?;
        }
        Units::new(args.hbar)?;
        finite("a0", args.a0)?;
        finite("a1", args.a1)?;
        finite("lambda1", args.lambda1)?;
        if let Some(l2) = args.lambda2 {
            finite("lambda2", l2)?;
            if l2 <= args.lambda1 {
                return Err(Error::InvalidArgument(format!(
                    "lambda2 = {l2} must exceed lambda1 = {}",
                    args.lambda1
                )));
            }
        }

        let mut tol = ToleranceConfig::default();
        let overrides = [
            (args.tol_norm, &mut tol.norm),
            (args.tol_herm, &mut tol.herm),
            (args.tol_saturation, &mut tol.saturation_rel),
            (args.tol_saturation_ode, &mut tol.saturation_rel_ode),
            (args.tol_residual, &mut tol.residual_abs),
            (args.tol_rank, &mut tol.rank_cutoff),
            (args.tol_coincident, &mut tol.coincident_s0),
        ];
        for (value, slot) in overrides {
            if let Some(v) = value {
                *slot = v;
            }
        }
        tol.validate()?;

        Ok(Self {
            command,
            kind,
            dimension,
            dimension_max,
            hbar: args.hbar,
            a0: args.a0,
            a1: args.a1,
            i: args.i,
            j: args.j,
            spectrum: args.spectrum.clone(),
            lambda1: args.lambda1,
            lambda2: args.lambda2,
            samples: args.samples,
            seed: args.seed,
            trials: args.trials,
            ensemble: args.ensemble,
            method: args.method,
            tolerances: tol,
            format: args.format,
        })
    }

    pub fn units(&self) -> Units {
        Units::new(self.hbar).expect("validated on resolve")
    }
}

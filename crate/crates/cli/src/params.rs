use std::path::PathBuf;

use chl_core::conformal::Gauge;
use chl_core::radial_solver::SolverConfig;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

/// Seed used when neither `--seed`, the config file nor `CHL_SEED` gives one.
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MonitorArg {
    Gradient,
    Hessian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    Ray,
    Halton,
}

/// A run description: the subcommand and every input it can take. The same
/// fields are read from a JSON config file and from flags; flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Subcommand name; filled in from the command line.
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,

    /// Operator descriptor, e.g. `sigma-root:k=2`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,

    /// Cone descriptor, e.g. `gamma:k=2` or `sigma:delta=0.5`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cone: Option<String>,

    /// Exact radial profile, e.g. `bubble:scale=1`, `const:c=1`,
    /// `inversion:C=1`, `sphere:radius=1`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,

    /// Two-column `r v` file with a sampled radial profile.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_file: Option<PathBuf>,

    /// Gauge the profile is given in: v, u or w.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauge: Option<Gauge>,

    /// Dimension.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,

    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,

    /// Exponent `p` of the right-hand side `phi v^{p - (n+2)/(n-2)}`.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,

    /// Comma-separated eigenvalues.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,

    /// Comma-separated point of `R^n`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,

    /// Solver grid intervals, or monitor sample count.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,

    /// Random samples.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,

    /// RNG seed; defaults to `CHL_SEED`, then to 20240917.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Ball radius for monitors.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,

    /// Comma-separated geodesic radii.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,

    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monitor: Option<MonitorArg>,

    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<Sampling>,

    /// Number of continuation steps.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,

    /// Increment of `p` between continuation steps.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,

    /// Explicit comma-separated exponent schedule.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,

    /// Grid doublings in a convergence study.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinements: Option<usize>,

    /// CSV file of sample rows `x_1,...,x_d,w` for the Hölder check.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holder_samples: Option<PathBuf>,

    /// Solver problem; only read from config files.
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,

    /// Output file; stdout when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl RunConfig {
    /// `self` with every field set in `top` replaced.
    pub fn overlay(mut self, top: &RunConfig) -> RunConfig {
        overlay!(
            self,
            top,
            command,
            op,
            cone,
            profile,
            profile_file,
            gauge,
            n,
            k,
            delta,
            p,
            lambda,
            point,
            grid,
            samples,
            seed,
            radius,
            radii,
            monitor,
            sampling,
            steps,
            step,
            schedule,
            refinements,
            holder_samples,
            solver,
            out,
            format
        );
        self
    }

    /// Names of the fields that are set, as flag names.
    pub fn set_fields(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        macro_rules! check {
            ($($field:ident => $name:literal),*) => {
                $( if self.$field.is_some() { out.push($name); } )*
            };
        }
        check!(
            op => "op", cone => "cone", profile => "profile", profile_file => "profile-file",
            gauge => "gauge", n => "n", k => "k", delta => "delta", p => "p",
            lambda => "lambda", point => "point", grid => "grid", samples => "samples",
            seed => "seed", radius => "radius", radii => "radii", monitor => "monitor",
            sampling => "sampling", steps => "steps", step => "step", schedule => "schedule",
            refinements => "refinements", holder_samples => "holder-samples",
            solver => "solver", out => "out", format => "format"
        );
        out
    }
}

//! Effective parameter set.
//!
//! Precedence is command-line flag, then config file, then built-in default.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use dehaze_core::dehaze::TransmissionWindow;
use dehaze_core::metrics::EdgeParams;
use dehaze_core::{DcpParams, DehazeParams, FilterParams, MetricParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Kmap,
    Dcp,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Kmap => "kmap",
            Method::Dcp => "dcp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Patch,
    Pixel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub method: Method,
    pub format: ReportFormat,
    pub omega: f64,
    /// Patch side in pixels (odd).
    pub patch: usize,
    pub k0: f64,
    pub t_floor: f64,
    pub avg_radius: usize,
    pub gf_radius: usize,
    pub gf_eps: f64,
    pub window: Window,
    pub top_fraction: f64,
    pub directions: usize,
    pub min_cluster: usize,
    pub edge_threshold: f64,
    pub min_gradient: f64,
}

impl Default for Settings {
    fn default() -> Self {
        let d = DehazeParams::default();
        let m = MetricParams::default();
        Self {
            method: Method::Kmap,
            format: ReportFormat::Json,
            omega: d.omega,
            patch: 2 * d.patch_radius + 1,
            k0: d.k_floor,
            t_floor: d.t_floor,
            avg_radius: d.avg_radius,
            gf_radius: d.guided.radius,
            gf_eps: d.guided.epsilon,
            window: Window::Patch,
            top_fraction: DcpParams::default().top_fraction,
            directions: m.n_directions,
            min_cluster: m.min_cluster,
            edge_threshold: m.edges.contrast_threshold,
            min_gradient: m.edges.min_gradient,
        }
    }
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Dehazing method
    #[arg(long, value_enum, global = true)]
    pub method: Option<Method>,
    /// Report format
    #[arg(long, value_enum, global = true)]
    pub format: Option<ReportFormat>,
    /// Haze retention factor, in (0, 1)
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Transmission / dark channel patch side in pixels (odd, >= 3)
    #[arg(long, global = true)]
    pub patch: Option<usize>,
    /// Lower bound on the K-map, in [0.5, 1)
    #[arg(long, global = true)]
    pub k0: Option<f64>,
    /// Lower bound on the transmission, in (0, 0.5)
    #[arg(long = "t-floor", global = true)]
    pub t_floor: Option<f64>,
    /// Box mean radius for the haze intensity
    #[arg(long = "avg-radius", global = true)]
    pub avg_radius: Option<usize>,
    /// Guided filter radius
    #[arg(long = "gf-radius", global = true)]
    pub gf_radius: Option<usize>,
    /// Guided filter regularizer
    #[arg(long = "gf-eps", global = true)]
    pub gf_eps: Option<f64>,
    /// Number of haze-line directions
    #[arg(long, global = true)]
    pub directions: Option<usize>,
    /// Smallest haze line kept by the haze-line metric
    #[arg(long = "min-cluster", global = true)]
    pub min_cluster: Option<usize>,
    /// Local contrast a visible edge must exceed
    #[arg(long = "edge-threshold", global = true)]
    pub edge_threshold: Option<f64>,
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("settings serialize")
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { self.$f = v; } )* };
        }
        take!(method, format, omega, patch, k0, t_floor, avg_radius, gf_radius, gf_eps, directions, min_cluster, edge_threshold);
    }

    /// Checks every parameter against its owner's invariants.
    pub fn validate(&self) -> Result<()> {
        if self.patch < 3 || self.patch.is_multiple_of(2) {
            bail!("invalid parameter patch = {}, expected an odd side >= 3", self.patch);
        }
        self.dehaze_params().validate()?;
        self.dcp_params().validate()?;
        self.metric_params().validate()?;
        Ok(())
    }

    fn patch_radius(&self) -> usize {
        self.patch.saturating_sub(1) / 2
    }

    pub fn guided(&self) -> FilterParams {
        FilterParams { radius: self.gf_radius, epsilon: self.gf_eps }
    }

    pub fn dehaze_params(&self) -> DehazeParams {
        DehazeParams {
            omega: self.omega,
            patch_radius: self.patch_radius(),
            k_floor: self.k0,
            t_floor: self.t_floor,
            guided: self.guided(),
            avg_radius: self.avg_radius,
            window: match self.window {
                Window::Patch => TransmissionWindow::Patch,
                Window::Pixel => TransmissionWindow::Pixel,
            },
        }
    }

    pub fn dcp_params(&self) -> DcpParams {
        DcpParams {
            patch_radius: self.patch_radius(),
            omega: self.omega,
            t_floor: self.t_floor,
            top_fraction: self.top_fraction,
            guided: self.guided(),
        }
    }

    pub fn metric_params(&self) -> MetricParams {
        MetricParams {
            edges: EdgeParams { contrast_threshold: self.edge_threshold, min_gradient: self.min_gradient },
            patch_radius: self.patch_radius(),
            n_directions: self.directions,
            min_cluster: self.min_cluster,
            top_fraction: self.top_fraction,
        }
    }
}

use clap::{Args, ValueEnum};
use std::path::PathBuf;

use monollr::{
    ColumnRef, DatasetFile, EstimatorConfig, GridSpec, KernelFamily, MonotoneAlgorithm,
    RegressionSample, SmoothingKernel, Window,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SortOrder {
    None,
    Asc,
    Desc,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV file with one observation per row.
    #[arg(long)]
    pub data: PathBuf,
    /// Regressor column: header name or 0-based position.
    #[arg(long, default_value = "0")]
    pub x_col: String,
    /// Response column: header name or 0-based position.
    #[arg(long, default_value = "1")]
    pub y_col: String,
    /// The file has no header row.
    #[arg(long)]
    pub no_header: bool,
    /// Reorder rows by the regressor after loading (stable).
    #[arg(long, value_enum, default_value_t = SortOrder::None)]
    pub sort: SortOrder,
}

impl DataArgs {
    pub fn load(&self) -> Result<RegressionSample, CliError> {
        let file = DatasetFile {
            path: self.data.clone(),
            x_column: self.x_col.parse::<ColumnRef>()?,
            y_column: self.y_col.parse::<ColumnRef>()?,
            has_header: !self.no_header,
            sort: self.sort == SortOrder::Asc,
        };
        let sample = file.load()?;
        if self.sort != SortOrder::Desc {
            return Ok(sample);
        }
        // Stable: rows with equal x keep their file order.
        let mut order: Vec<usize> = (0..sample.len()).collect();
        order.sort_by(|&a, &b| sample.xs()[b].total_cmp(&sample.xs()[a]));
        let xs = order.iter().map(|&i| sample.xs()[i]).collect();
        let ys = order.iter().map(|&i| sample.ys()[i]).collect();
        Ok(RegressionSample::new(xs, ys)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WindowArg {
    TwoSided,
    OneSided,
}

impl From<WindowArg> for Window {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::TwoSided => Window::TwoSided,
            WindowArg::OneSided => Window::OneSidedLeft,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Gaussian,
    Epanechnikov,
    Rectangular,
}

impl From<KernelArg> for KernelFamily {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Gaussian => KernelFamily::Gaussian,
            KernelArg::Epanechnikov => KernelFamily::Epanechnikov,
            KernelArg::Rectangular => KernelFamily::Rectangular,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SmoothingArg {
    Normal,
    Logistic,
}

#[derive(Debug, Clone, Args)]
pub struct EstimatorArgs {
    /// Bandwidth in observation counts (h = b / n).
    #[arg(long, conflicts_with = "h", required_unless_present = "h")]
    pub b: Option<f64>,
    /// Bandwidth in regressor units.
    #[arg(long)]
    pub h: Option<f64>,
    /// Secondary bandwidth; defaults to b^2 / n^2, or (h / range of x)^2
    /// with --h.
    #[arg(long)]
    pub h0: Option<f64>,
    #[arg(long, value_enum, default_value_t = KernelArg::Gaussian)]
    pub kernel: KernelArg,
    #[arg(long, value_enum, default_value_t = WindowArg::TwoSided)]
    pub window: WindowArg,
    /// Response grid as LO:HI:POINTS.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, value_enum, default_value_t = SmoothingArg::Normal)]
    pub smoothing: SmoothingArg,
    /// Monotone correction for llm: 1 = running maximum, 2 = clipped density.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub alg: u8,
}

impl EstimatorArgs {
    pub fn config(&self, sample: &RegressionSample) -> Result<EstimatorConfig, CliError> {
        let n = sample.len();
        let mut cfg = match (self.b, self.h) {
            (Some(b), _) => EstimatorConfig::from_counts(b, n)?,
            (None, Some(h)) => {
                let (lo, hi) = sample
                    .xs()
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                        (lo.min(x), hi.max(x))
                    });
                let span = if hi > lo { hi - lo } else { 1.0 };
                EstimatorConfig::default()
                    .with_h(h)
                    .with_h0((h / span).powi(2))
            }
            (None, None) => return Err(CliError::Usage("one of --b or --h is required".into())),
        };
        if let Some(h0) = self.h0 {
            cfg.h0 = h0;
        }
        cfg.family = self.kernel.into();
        cfg.window = self.window.into();
        cfg.smoothing = match self.smoothing {
            SmoothingArg::Normal => SmoothingKernel::Normal,
            SmoothingArg::Logistic => SmoothingKernel::Logistic,
        };
        cfg.algorithm = if self.alg == 2 {
            MonotoneAlgorithm::ClippedDensity
        } else {
            MonotoneAlgorithm::RunningMax
        };
        if let Some(spec) = &self.grid {
            cfg.grid = Some(parse_grid(spec)?);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn parse_grid(spec: &str) -> Result<GridSpec, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Usage(format!("--grid expects LO:HI:POINTS, got `{spec}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let points: usize = parts[2].trim().parse().map_err(|_| bad())?;
    Ok(GridSpec::with_points(lo, hi, points)?)
}

pub fn parse_list(raw: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{flag}: cannot parse `{s}`")))
        })
        .collect()
}

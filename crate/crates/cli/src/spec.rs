//! Portfolio spec files: a JSON document with an explicit schema version,
//! validated field by field, plus the optional samples CSV it may point to.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use kelly_core::linalg::Matrix;
use kelly_core::{AssetModel, PortfolioModel};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortfolioSpec {
    pub schema_version: String,
    pub assets: Vec<AssetSpec>,
    pub dependence: DependenceSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetSpec {
    pub name: String,
    pub family: FamilySpec,
    pub x0: f64,
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilySpec {
    Lognormal,
    Gaussian,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DependenceSpec {
    Independent,
    Bivariate { rho: f64 },
    Samples { path: String },
}

impl AssetSpec {
    pub fn to_model(&self) -> CliResult<AssetModel> {
        let build = match self.family {
            FamilySpec::Lognormal => AssetModel::log_normal(self.x0, self.mu, self.sigma),
            FamilySpec::Gaussian => AssetModel::gaussian(self.x0, self.mu, self.sigma),
        };
        build.map_err(|e| CliError::validation(format!("asset `{}`: {e}", self.name)))
    }
}

/// A parsed spec together with the model it describes.
pub struct LoadedSpec {
    pub spec: PortfolioSpec,
    pub portfolio: PortfolioModel,
}

impl LoadedSpec {
    pub fn asset_names(&self) -> Vec<&str> {
        self.spec.assets.iter().map(|a| a.name.as_str()).collect()
    }
}

/// Read, parse, and validate a spec file; errors carry the offending field
/// or the parse location.
pub fn load_spec(path: &Path) -> CliResult<LoadedSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::validation(format!("cannot read spec `{}`: {e}", path.display()))
    })?;
    let spec: PortfolioSpec = serde_json::from_str(&text).map_err(|e| {
        CliError::validation(format!(
            "spec `{}` line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    let portfolio = build_portfolio(&spec, path)?;
    Ok(LoadedSpec { spec, portfolio })
}

fn build_portfolio(spec: &PortfolioSpec, spec_path: &Path) -> CliResult<PortfolioModel> {
    if spec.schema_version != SCHEMA_VERSION {
        return Err(CliError::validation(format!(
            "field `schema_version`: expected \"{SCHEMA_VERSION}\", got \"{}\"",
            spec.schema_version
        )));
    }
    if spec.assets.is_empty() {
        return Err(CliError::validation(
            "field `assets`: at least one asset is required",
        ));
    }
    for (i, a) in spec.assets.iter().enumerate() {
        if a.name.trim().is_empty() {
            return Err(CliError::validation(format!(
                "field `assets[{i}].name`: must not be empty"
            )));
        }
        if spec.assets[..i].iter().any(|b| b.name == a.name) {
            return Err(CliError::validation(format!(
                "field `assets[{i}].name`: duplicate name `{}`",
                a.name
            )));
        }
    }
    let models: Vec<AssetModel> = spec
        .assets
        .iter()
        .map(|a| a.to_model())
        .collect::<CliResult<_>>()?;

    match &spec.dependence {
        DependenceSpec::Independent => {
            PortfolioModel::independent(models).map_err(CliError::from)
        }
        DependenceSpec::Bivariate { rho } => {
            if models.len() != 2 {
                return Err(CliError::validation(format!(
                    "field `dependence`: bivariate needs exactly 2 assets, got {}",
                    models.len()
                )));
            }
            PortfolioModel::bivariate_log_normal(models[0], models[1], *rho)
                .map_err(|e| CliError::validation(format!("field `dependence.rho`: {e}")))
        }
        DependenceSpec::Samples { path } => {
            let resolved = resolve_samples_path(spec_path, path);
            let names: Vec<&str> = spec.assets.iter().map(|a| a.name.as_str()).collect();
            let samples = load_samples_csv(&resolved, &names)?;
            PortfolioModel::empirical(models, samples).map_err(CliError::from)
        }
    }
}

/// Relative sample paths resolve against the spec file's directory.
fn resolve_samples_path(spec_path: &Path, samples_path: &str) -> PathBuf {
    let p = Path::new(samples_path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        spec_path.parent().unwrap_or(Path::new(".")).join(p)
    }
}

/// Samples CSV: a header row with the asset names (in spec order), then one
/// joint price draw per row.
pub fn load_samples_csv(path: &Path, expected_names: &[&str]) -> CliResult<Matrix> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| {
        CliError::validation(format!("cannot read samples `{}`: {e}", path.display()))
    })?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::validation(format!("samples `{}`: {e}", path.display())))?
        .clone();
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expected_names {
        return Err(CliError::validation(format!(
            "samples `{}`: header {:?} does not match asset names {:?}",
            path.display(),
            got,
            expected_names
        )));
    }
    let cols = expected_names.len();
    let mut data: Vec<f64> = Vec::new();
    let mut rows = 0usize;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            CliError::validation(format!("samples `{}`: {e}", path.display()))
        })?;
        if record.len() != cols {
            return Err(CliError::validation(format!(
                "samples `{}` row {}: {} fields, expected {cols}",
                path.display(),
                line + 2,
                record.len()
            )));
        }
        for field in record.iter() {
            let v: f64 = field.trim().parse().map_err(|_| {
                CliError::validation(format!(
                    "samples `{}` row {}: `{field}` is not a number",
                    path.display(),
                    line + 2
                ))
            })?;
            data.push(v);
        }
        rows += 1;
    }
    if rows < 2 {
        return Err(CliError::validation(format!(
            "samples `{}`: need at least 2 rows, got {rows}",
            path.display()
        )));
    }
    Ok(Matrix::from_vec(rows, cols, data))
}

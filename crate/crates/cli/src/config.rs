//! Experiment configuration: a TOML file with a measure, a polynomial
//! response in the library's text form, and per-command sections.
//!
//! ```toml
//! [measure]
//! kind = "dirichlet"                  # dirichlet | independent | moment-table
//! alpha = ["3/2", "3/2", "3/2", "3/2"]
//!
//! [function]
//! polynomial = "10*x1^6 + 0.1*x1*x2"
//!
//! [sweep]
//! interaction_orders = [1, 2]
//! polynomial_orders = [1, 2, 3, 4, 5]
//! chaos_orders = [1, 2, 3, 4, 5]
//!
//! [basis]
//! max_cardinality = 2
//! max_degree = 3
//!
//! [verify]
//! basis_degree = 5
//! moment_degree = 12
//! mc_samples = 1000000
//!
//! [output]
//! directory = "out"
//!
//! seed = 42
//! precision = "extended"              # extended | double
//! jobs = 0                            # 0 = one thread per core
//! ```
//!
//! Numeric parameters (`alpha`, marginal bounds, moment values) accept exact
//! ratios as strings ("3/2"), integers, or floats; a float is converted to
//! the rational it exactly represents.

use gpdd_core::measure::{Marginal, Measure};
use gpdd_core::orthopoly::Precision;
use gpdd_core::polynomial::CoeffText;
use gpdd_core::{Polynomial, SubsetId};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub measure: MeasureSection,
    pub function: Option<FunctionSection>,
    pub sweep: Option<SweepSection>,
    pub basis: Option<BasisSection>,
    pub verify: Option<VerifySection>,
    pub output: Option<OutputSection>,
    pub seed: Option<u64>,
    pub precision: Option<String>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSection {
    pub kind: String,
    pub dimension: Option<usize>,
    pub alpha: Option<Vec<Rational>>,
    pub marginals: Option<Vec<MarginalSection>>,
    pub max_degree: Option<u32>,
    pub moments: Option<Vec<MomentEntry>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalSection {
    pub family: String,
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
    pub mean: Option<Rational>,
    pub std_dev: Option<Rational>,
    pub rate: Option<Rational>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentEntry {
    pub exponents: Vec<u32>,
    pub value: Rational,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSection {
    pub polynomial: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub interaction_orders: Vec<usize>,
    pub polynomial_orders: Vec<u32>,
    #[serde(default)]
    pub chaos_orders: Vec<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    pub max_cardinality: usize,
    pub max_degree: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub basis_degree: Option<u32>,
    pub moment_degree: Option<u32>,
    pub mc_samples: Option<usize>,
    pub annihilation_probe: Option<u32>,
    pub reference_measure: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<PathBuf>,
}

/// Exact ratio, integer, or float literal.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Rational {
    Text(String),
    Int(i64),
    Float(f64),
}

impl Rational {
    fn to_big(&self, field: &str) -> Result<BigRational, CliError> {
        match self {
            Rational::Text(s) => CoeffText::parse_coeff(s).ok_or_else(|| CliError::Config {
                field: field.to_string(),
                message: format!("cannot parse '{s}' as a rational"),
            }),
            Rational::Int(i) => Ok(BigRational::from_integer(BigInt::from(*i))),
            Rational::Float(f) => BigRational::from_float(*f).ok_or_else(|| CliError::Config {
                field: field.to_string(),
                message: format!("non-finite value {f}"),
            }),
        }
    }
}

/// Fully validated configuration ready to run.
pub struct ResolvedConfig {
    pub measure: Measure,
    pub function: Option<Polynomial<f64>>,
    pub sweep: Option<ResolvedSweep>,
    pub basis: Option<BasisSection>,
    pub verify: ResolvedVerify,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub precision: Precision,
    pub jobs: usize,
}

pub struct ResolvedSweep {
    pub interaction_orders: Vec<usize>,
    pub polynomial_orders: Vec<u32>,
    pub chaos_orders: Vec<u32>,
}

pub struct ResolvedVerify {
    pub basis_degree: u32,
    pub moment_degree: u32,
    pub mc_samples: usize,
    pub annihilation_probe: u32,
    pub reference_measure: Option<Measure>,
}

pub fn load(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
        field: "config".into(),
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    toml::from_str(&text).map_err(|e| CliError::Config {
        field: "config".into(),
        message: e.to_string(),
    })
}

pub fn resolve(file: ConfigFile, base_dir: &Path) -> Result<ResolvedConfig, CliError> {
    let measure = build_measure(&file.measure)?;
    let n = measure.dimension();

    let function = match &file.function {
        Some(f) => Some(
            Polynomial::parse(&f.polynomial, &SubsetId::full(n)).map_err(|e| CliError::Config {
                field: "function.polynomial".into(),
                message: e.to_string(),
            })?,
        ),
        None => None,
    };

    // pairs with m < s are skipped by the sweep (they index no coefficients),
    // so only the per-list ranges are validated here
    let sweep = match &file.sweep {
        Some(s) => {
            for &so in &s.interaction_orders {
                if so < 1 || so > n {
                    return Err(CliError::Config {
                        field: "sweep.interaction_orders".into(),
                        message: format!("value {so} outside 1..={n}"),
                    });
                }
            }
            if let Some(&m) = s.polynomial_orders.iter().find(|&&m| m < 1) {
                return Err(CliError::Config {
                    field: "sweep.polynomial_orders".into(),
                    message: format!("order {m} must be at least 1"),
                });
            }
            Some(ResolvedSweep {
                interaction_orders: s.interaction_orders.clone(),
                polynomial_orders: s.polynomial_orders.clone(),
                chaos_orders: s.chaos_orders.clone(),
            })
        }
        None => None,
    };

    if let Some(b) = &file.basis {
        if b.max_cardinality < 1 || b.max_cardinality > n {
            return Err(CliError::Config {
                field: "basis.max_cardinality".into(),
                message: format!("value {} outside 1..={n}", b.max_cardinality),
            });
        }
    }

    let verify_section = file.verify.as_ref();
    let reference_measure = match verify_section.and_then(|v| v.reference_measure.as_ref()) {
        Some(p) => {
            let full = if p.is_absolute() {
                p.clone()
            } else {
                base_dir.join(p)
            };
            let nested = load(&full)?;
            let m = build_measure(&nested.measure)?;
            if m.dimension() != n {
                return Err(CliError::Config {
                    field: "verify.reference_measure".into(),
                    message: format!(
                        "reference dimension {} differs from measure dimension {n}",
                        m.dimension()
                    ),
                });
            }
            Some(m)
        }
        None => None,
    };
    let verify = ResolvedVerify {
        basis_degree: verify_section.and_then(|v| v.basis_degree).unwrap_or(5),
        moment_degree: verify_section.and_then(|v| v.moment_degree).unwrap_or(12),
        mc_samples: verify_section
            .and_then(|v| v.mc_samples)
            .unwrap_or(1_000_000),
        annihilation_probe: verify_section
            .and_then(|v| v.annihilation_probe)
            .unwrap_or(6),
        reference_measure,
    };

    let precision = match file.precision.as_deref() {
        None | Some("extended") => Precision::Extended,
        Some("double") => Precision::Double,
        Some(other) => {
            return Err(CliError::Config {
                field: "precision".into(),
                message: format!("unknown precision '{other}' (use 'double' or 'extended')"),
            })
        }
    };

    let out_dir = file
        .output
        .as_ref()
        .and_then(|o| o.directory.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let out_dir = if out_dir.is_absolute() {
        out_dir
    } else {
        base_dir.join(out_dir)
    };

    Ok(ResolvedConfig {
        measure,
        function,
        sweep,
        basis: file.basis,
        verify,
        out_dir,
        seed: file.seed.unwrap_or(0),
        precision,
        jobs: file.jobs.unwrap_or(0),
    })
}

fn build_measure(section: &MeasureSection) -> Result<Measure, CliError> {
    match section.kind.as_str() {
        "dirichlet" => {
            let alpha = section.alpha.as_ref().ok_or_else(|| CliError::Config {
                field: "measure.alpha".into(),
                message: "dirichlet measures need the concentration vector".into(),
            })?;
            let mut vals = Vec::with_capacity(alpha.len());
            for (i, a) in alpha.iter().enumerate() {
                vals.push(a.to_big(&format!("measure.alpha[{i}]"))?);
            }
            if let Some(d) = section.dimension {
                if d + 1 != vals.len() {
                    return Err(CliError::Config {
                        field: "measure.dimension".into(),
                        message: format!(
                            "dimension {d} needs {} alpha entries (one per variable plus the \
                             simplex remainder), got {}",
                            d + 1,
                            vals.len()
                        ),
                    });
                }
            }
            Measure::dirichlet(vals).map_err(|e| CliError::Config {
                field: "measure.alpha".into(),
                message: e.to_string(),
            })
        }
        "independent" => {
            let sections = section.marginals.as_ref().ok_or_else(|| CliError::Config {
                field: "measure.marginals".into(),
                message: "independent measures need a marginals list".into(),
            })?;
            let mut marginals = Vec::with_capacity(sections.len());
            for (i, m) in sections.iter().enumerate() {
                let field = |name: &str| format!("measure.marginals[{i}].{name}");
                let require = |v: &Option<Rational>, name: &str| -> Result<BigRational, CliError> {
                    v.as_ref()
                        .ok_or_else(|| CliError::Config {
                            field: field(name),
                            message: format!("{} marginals need '{name}'", m.family),
                        })?
                        .to_big(&field(name))
                };
                marginals.push(match m.family.as_str() {
                    "uniform" => Marginal::Uniform {
                        lower: require(&m.lower, "lower")?,
                        upper: require(&m.upper, "upper")?,
                    },
                    "gaussian" => Marginal::Gaussian {
                        mean: require(&m.mean, "mean")?,
                        std_dev: require(&m.std_dev, "std_dev")?,
                    },
                    "exponential" => Marginal::Exponential {
                        rate: require(&m.rate, "rate")?,
                    },
                    other => {
                        return Err(CliError::Config {
                            field: field("family"),
                            message: format!(
                                "unknown family '{other}' (uniform, gaussian, exponential)"
                            ),
                        })
                    }
                });
            }
            if let Some(d) = section.dimension {
                if d != marginals.len() {
                    return Err(CliError::Config {
                        field: "measure.dimension".into(),
                        message: format!(
                            "dimension {d} disagrees with {} marginals",
                            marginals.len()
                        ),
                    });
                }
            }
            Measure::independent(marginals).map_err(|e| CliError::Config {
                field: "measure.marginals".into(),
                message: e.to_string(),
            })
        }
        "moment-table" => {
            let dimension = section.dimension.ok_or_else(|| CliError::Config {
                field: "measure.dimension".into(),
                message: "moment tables need an explicit dimension".into(),
            })?;
            let max_degree = section.max_degree.ok_or_else(|| CliError::Config {
                field: "measure.max_degree".into(),
                message: "moment tables need a declared maximum degree".into(),
            })?;
            let entries = section.moments.as_ref().ok_or_else(|| CliError::Config {
                field: "measure.moments".into(),
                message: "moment tables need a moments list".into(),
            })?;
            let mut table = BTreeMap::new();
            for (i, e) in entries.iter().enumerate() {
                let v = e.value.to_big(&format!("measure.moments[{i}].value"))?;
                table.insert(e.exponents.clone(), v);
            }
            Measure::moment_table(dimension, max_degree, table).map_err(|e| CliError::Config {
                field: "measure.moments".into(),
                message: e.to_string(),
            })
        }
        other => Err(CliError::Config {
            field: "measure.kind".into(),
            message: format!("unknown kind '{other}' (dirichlet, independent, moment-table)"),
        }),
    }
}

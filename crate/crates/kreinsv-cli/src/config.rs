use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use kreinsv::geometry::{CoefficientField, Hypersurface, MatrixFamily, Shape};
use kreinsv::modes::Radial;
use kreinsv::seeley::Strength;
use kreinsv::Kind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub coefficients: CoefficientsConfig,
    pub interaction: InteractionConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// circle, sphere or ellipse
    pub shape: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsConfig {
    /// identity, constant or perturbed
    #[serde(default = "identity")]
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default)]
    pub a: f64,
    #[serde(default = "one")]
    pub m0: f64,
}

impl Default for CoefficientsConfig {
    fn default() -> Self {
        CoefficientsConfig { family: identity(), matrix: None, eps: None, a: 0.0, m0: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaConfig {
    Constant(f64),
    /// `[a0, a1, b1, a2, b2, ...]` for a0 + Σ a_k cos kθ + b_k sin kθ
    Fourier(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_cutoff")]
    pub mode_cutoff: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard_band: Option<usize>,
    #[serde(default = "default_tol")]
    pub quadrature_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { mode_cutoff: default_cutoff(), guard_band: None, quadrature_tol: default_tol() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Flat index window [j_min, j_max].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[usize; 2]>,
    /// Relative tolerance on the fitted constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// csv or json
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

fn identity() -> String {
    "identity".into()
}

fn one() -> f64 {
    1.0
}

fn default_cutoff() -> usize {
    2000
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Apply `key=value` overrides to a parsed TOML tree. Values are read as TOML
/// literals, falling back to plain strings.
pub fn apply_overrides(doc: &mut toml::Table, sets: &[String]) -> Result<(), ConfigError> {
    for set in sets {
        let (key, raw) = set.split_once('=').ok_or_else(|| bad(format!("override {set:?} is not key=value")))?;
        let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
        let parts: Vec<&str> = key.trim().split('.').collect();
        let mut table = &mut *doc;
        for part in &parts[..parts.len() - 1] {
            table = table
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| bad(format!("override {key:?}: {part} is not a section")))?;
        }
        table.insert(parts[parts.len() - 1].to_string(), value);
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn parse(text: &str, sets: &[String]) -> Result<Self, ConfigError> {
        let mut doc: toml::Table = toml::from_str(text).map_err(|e| bad(e.message().to_string()))?;
        apply_overrides(&mut doc, sets)?;
        let cfg: ExperimentConfig = doc.try_into().map_err(|e: toml::de::Error| bad(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn kind(&self) -> Kind {
        Kind::from_name(&self.interaction.kind).expect("validated")
    }

    pub fn n(&self) -> usize {
        if self.geometry.shape == "sphere" {
            3
        } else {
            2
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.geometry;
        let finite_pos = |name: &str, v: Option<f64>| match v {
            Some(x) if x.is_finite() && x > 0.0 => Ok(x),
            Some(x) => Err(bad(format!("geometry.{name} = {x} must be positive and finite"))),
            None => Err(bad(format!("geometry.{name} is required for shape {}", g.shape))),
        };
        match g.shape.as_str() {
            "circle" | "sphere" => {
                finite_pos("r", g.r)?;
                if g.a.is_some() || g.b.is_some() {
                    return Err(bad(format!("geometry.a and geometry.b do not apply to shape {}", g.shape)));
                }
            }
            "ellipse" => {
                finite_pos("a", g.a)?;
                finite_pos("b", g.b)?;
                if g.r.is_some() {
                    return Err(bad("geometry.r does not apply to shape ellipse"));
                }
            }
            s => return Err(bad(format!("unknown geometry.shape {s:?}"))),
        }
        if let Some(n) = g.n {
            if n != self.n() {
                return Err(bad(format!("geometry.n = {n} does not match shape {}", g.shape)));
            }
        }
        let c = &self.coefficients;
        if !(c.m0.is_finite() && c.m0 > 0.0) {
            return Err(bad(format!("coefficients.m0 = {} must be positive and finite", c.m0)));
        }
        if !c.a.is_finite() {
            return Err(bad("coefficients.a must be finite"));
        }
        match c.family.as_str() {
            "identity" => {}
            "constant" => {
                let m = c.matrix.as_ref().ok_or_else(|| bad("coefficients.matrix is required for family constant"))?;
                let n = self.n();
                if m.len() != n || m.iter().any(|row| row.len() != n) {
                    return Err(bad(format!("coefficients.matrix must be {n}x{n}")));
                }
                if m.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(bad("coefficients.matrix must be finite"));
                }
            }
            "perturbed" => {
                if !c.eps.is_some_and(f64::is_finite) {
                    return Err(bad("coefficients.eps is required and finite for family perturbed"));
                }
            }
            f => return Err(bad(format!("unknown coefficients.family {f:?}"))),
        }
        let kind = Kind::from_name(&self.interaction.kind)
            .ok_or_else(|| bad(format!("unknown interaction.kind {:?}", self.interaction.kind)))?;
        if kind.uses_beta() {
            match self.interaction.beta {
                Some(b) if b.is_finite() && b != 0.0 => {}
                _ => return Err(bad("beta required and non-zero")),
            }
        }
        if kind.uses_alpha() {
            match &self.interaction.alpha {
                None => return Err(bad("alpha required for delta_vs_free")),
                Some(AlphaConfig::Constant(a)) if !a.is_finite() => return Err(bad("alpha must be finite")),
                Some(AlphaConfig::Fourier(v)) => {
                    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                        return Err(bad("alpha coefficients must be finite and non-empty"));
                    }
                    if self.geometry.shape != "circle" {
                        return Err(bad("Fourier alpha is only supported on the circle"));
                    }
                }
                _ => {}
            }
        }
        if !(self.solver.quadrature_tol.is_finite() && self.solver.quadrature_tol > 0.0) {
            return Err(bad("solver.quadrature_tol must be positive"));
        }
        if self.solver.mode_cutoff == 0 {
            return Err(bad("solver.mode_cutoff must be positive"));
        }
        if let Some(g) = self.solver.guard_band {
            if g >= self.solver.mode_cutoff {
                return Err(bad("solver.guard_band must be below solver.mode_cutoff"));
            }
        }
        if let Some([lo, hi]) = self.fit.window {
            if lo == 0 || hi < lo {
                return Err(bad(format!("fit.window [{lo}, {hi}] is empty")));
            }
        }
        if let Some(t) = self.fit.tolerance {
            if !(t.is_finite() && t > 0.0) {
                return Err(bad("fit.tolerance must be positive"));
            }
        }
        if let Some(f) = &self.output.format {
            if f != "csv" && f != "json" {
                return Err(bad(format!("output.format {f:?} is not csv or json")));
            }
        }
        Ok(())
    }

    pub fn surface(&self) -> Hypersurface {
        let g = &self.geometry;
        let shape = match g.shape.as_str() {
            "circle" => Shape::Circle { r: g.r.unwrap() },
            "sphere" => Shape::Sphere { r: g.r.unwrap() },
            _ => Shape::Ellipse { a: g.a.unwrap(), b: g.b.unwrap() },
        };
        Hypersurface::new(shape).expect("validated")
    }

    pub fn radial(&self) -> Option<Radial> {
        match self.geometry.shape.as_str() {
            "circle" => Some(Radial::Disk { r: self.geometry.r.unwrap() }),
            "sphere" => Some(Radial::Ball { r: self.geometry.r.unwrap() }),
            _ => None,
        }
    }

    pub fn coefficient_field(&self) -> kreinsv::Result<CoefficientField> {
        let c = &self.coefficients;
        let family = match c.family.as_str() {
            "identity" => MatrixFamily::Identity,
            "perturbed" => MatrixFamily::Perturbed { eps: c.eps.unwrap() },
            _ => {
                let m = c.matrix.as_ref().unwrap();
                let mut out = [[0.0; 3]; 3];
                for (i, row) in m.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        out[i][j] = *v;
                    }
                }
                MatrixFamily::Constant(out)
            }
        };
        CoefficientField::new(self.n(), family, c.a, c.m0)
    }

    /// α for the δ kind, β for the δ′ kinds, 1 otherwise.
    pub fn strength(&self) -> Strength {
        let kind = self.kind();
        if kind.uses_alpha() {
            match self.interaction.alpha.as_ref().unwrap() {
                AlphaConfig::Constant(a) => Strength::Constant(*a),
                AlphaConfig::Fourier(v) => Strength::Fourier(v.clone()),
            }
        } else if kind.uses_beta() {
            Strength::Constant(self.interaction.beta.unwrap())
        } else {
            Strength::Constant(1.0)
        }
    }

    /// Constant strength, or `None` for a genuinely varying Fourier α.
    pub fn constant_strength(&self) -> Option<f64> {
        match self.strength() {
            Strength::Constant(v) => Some(v),
            Strength::Fourier(v) if v.iter().skip(1).all(|x| *x == 0.0) => Some(v[0]),
            Strength::Fourier(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[geometry]
shape = "circle"
r = 1.0

[interaction]
kind = "delta_vs_free"
alpha = 1.0
"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::parse(BASE, &[]).unwrap();
        assert_eq!(c.solver.mode_cutoff, 2000);
        assert_eq!(c.coefficients.m0, 1.0);
        assert_eq!(c.kind(), Kind::DeltaVsFree);
        assert_eq!(c.constant_strength(), Some(1.0));
    }

    #[test]
    fn round_trip() {
        let c = ExperimentConfig::parse(BASE, &["interaction.alpha=[2.0, 1.0]".into()]).unwrap();
        let again = ExperimentConfig::parse(&c.to_toml(), &[]).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.interaction.alpha, Some(AlphaConfig::Fourier(vec![2.0, 1.0])));
    }

    #[test]
    fn unknown_keys_fail() {
        let e = ExperimentConfig::parse(&format!("{BASE}\n[solver]\ncutoff = 3\n"), &[]).unwrap_err();
        assert!(e.0.contains("cutoff"), "{e}");
        assert!(ExperimentConfig::parse(BASE, &["geometry.radius=2".into()]).is_err());
    }

    #[test]
    fn beta_rules() {
        let sets = ["interaction.kind=deltaprime_vs_free".to_string()];
        assert_eq!(ExperimentConfig::parse(BASE, &sets).unwrap_err().0, "beta required and non-zero");
        let with_zero = [sets[0].clone(), "interaction.beta=0".into()];
        assert_eq!(ExperimentConfig::parse(BASE, &with_zero).unwrap_err().0, "beta required and non-zero");
        let ok = [sets[0].clone(), "interaction.beta=3".into()];
        assert!(ExperimentConfig::parse(BASE, &ok).is_ok());
    }

    #[test]
    fn override_types() {
        let c = ExperimentConfig::parse(BASE, &["geometry.shape=sphere".into(), "solver.mode_cutoff=300".into()]).unwrap();
        assert_eq!(c.n(), 3);
        assert_eq!(c.solver.mode_cutoff, 300);
        assert!(ExperimentConfig::parse(BASE, &["geometry.r=-1".into()]).is_err());
        assert!(ExperimentConfig::parse(BASE, &["nonsense".into()]).is_err());
    }
}

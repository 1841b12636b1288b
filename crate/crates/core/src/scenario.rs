//! Scenario files.
//!
//! A scenario is a TOML document. Physical values are strings carrying their
//! unit (`mass = "1e-23 kg"`), so a missing or wrong unit is caught at parse
//! time. A scenario either starts from a preset, adjusting it only through an
//! `[overrides]` table, or describes the particle itself.

use std::fmt;
use std::ops::Range;

use serde::Deserialize;
use toml::Spanned;

use crate::constants::ELEMENTARY_CHARGE_C;
use crate::distribution::{DistributionModel, Shape, Weighting};
use crate::error::Result as PhysResult;
use crate::kernel::{DEFAULT_SAMPLES, DEFAULT_SEED, MIN_MC_SAMPLES};
use crate::units::{parse_quantity, Dimension, Quantity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    PenroseMicron,
    TrappedIon,
    NComponentSweep,
}

impl Preset {
    pub const ALL: [Preset; 3] = [
        Preset::PenroseMicron,
        Preset::TrappedIon,
        Preset::NComponentSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::PenroseMicron => "penrose_micron",
            Preset::TrappedIon => "trapped_ion",
            Preset::NComponentSweep => "n_component_sweep",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::PenroseMicron => {
                "1 um uniform sphere, m = 1.5e-17 kg (mass implied by Gm^2/a = 1e-19 eV), \
                 one elementary charge, branches touching (d = 2a)"
            }
            Preset::TrappedIon => "point ion, m = 1e-23 kg, q = e, branches 0.1 um apart",
            Preset::NComponentSweep => {
                "N-branch bound for the 1 um sphere, N = 1..10 on a shell of radius a"
            }
        }
    }

    fn physics(self) -> Physics {
        let micron = 1e-6;
        let micron_mass = 1.5e-17;
        match self {
            Preset::PenroseMicron => Physics {
                shape: Shape::UniformSphere { radius: micron },
                mass_kg: micron_mass,
                charge_c: Some(ELEMENTARY_CHARGE_C),
                separations_m: vec![2.0 * micron],
                n_list: None,
                shell_radius_m: None,
            },
            Preset::TrappedIon => Physics {
                shape: Shape::Point,
                mass_kg: 1e-23,
                charge_c: Some(ELEMENTARY_CHARGE_C),
                separations_m: vec![1e-7],
                n_list: None,
                shell_radius_m: None,
            },
            Preset::NComponentSweep => Physics {
                shape: Shape::UniformSphere { radius: micron },
                mass_kg: micron_mass,
                charge_c: None,
                separations_m: Vec::new(),
                n_list: Some((1..=10).collect()),
                shell_radius_m: None,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum OutputFormat {
    #[default]
    Table,
    Json,
    Csv,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Table => "table",
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "table" => Some(Self::Table),
            "json" => Some(Self::Json),
            "csv" => Some(Self::Csv),
            _ => None,
        }
    }
}

pub fn weighting_from_name(s: &str) -> Option<Weighting> {
    match s {
        "full" => Some(Weighting::Full),
        "born" => Some(Weighting::Born),
        _ => None,
    }
}

/// Particle and geometry of a scenario, in SI.
#[derive(Clone, Debug, PartialEq)]
pub struct Physics {
    pub shape: Shape,
    pub mass_kg: f64,
    pub charge_c: Option<f64>,
    /// Branch separations, one report row each.
    pub separations_m: Vec<f64>,
    /// Branch counts for the N-component bound.
    pub n_list: Option<Vec<u32>>,
    /// Shell radius |rᵢ| of the N-component bound; the particle radius if unset.
    pub shell_radius_m: Option<f64>,
}

impl Physics {
    pub fn model(&self) -> PhysResult<DistributionModel> {
        DistributionModel::from_si(self.shape, self.mass_kg, self.charge_c)
    }

    pub fn shell_radius(&self) -> f64 {
        self.shell_radius_m.unwrap_or(self.shape.size())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub preset: Option<Preset>,
    pub physics: Physics,
    pub weighting_mode: Weighting,
    pub convention_factor: f64,
    pub mc_samples: u64,
    pub seed: u64,
    pub output_format: OutputFormat,
}

impl ScenarioConfig {
    pub fn from_preset(preset: Preset) -> Self {
        Self {
            name: preset.name().to_string(),
            preset: Some(preset),
            physics: preset.physics(),
            weighting_mode: Weighting::Full,
            convention_factor: 1.0,
            mc_samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            output_format: OutputFormat::Table,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub field: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(message: impl Into<String>) -> Self {
        Self {
            field: None,
            line: None,
            message: message.into(),
        }
    }

    fn at(field: &str, line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            field: Some(field.to_string()),
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "field `{field}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

type Spanned2<T> = Option<Spanned<T>>;

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    shape: Spanned2<String>,
    radius: Spanned2<String>,
    sigma: Spanned2<String>,
    mass: Spanned2<String>,
    charge: Spanned2<String>,
    separations: Spanned2<Vec<Spanned<String>>>,
    n_list: Spanned2<Vec<Spanned<i64>>>,
    shell_radius: Spanned2<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Spanned2<String>,
    preset: Spanned2<String>,
    shape: Spanned2<String>,
    radius: Spanned2<String>,
    sigma: Spanned2<String>,
    mass: Spanned2<String>,
    charge: Spanned2<String>,
    separations: Spanned2<Vec<Spanned<String>>>,
    n_list: Spanned2<Vec<Spanned<i64>>>,
    shell_radius: Spanned2<String>,
    weighting_mode: Spanned2<String>,
    convention_factor: Spanned2<f64>,
    mc_samples: Spanned2<i64>,
    seed: Spanned2<i64>,
    output_format: Spanned2<String>,
    overrides: Spanned2<RawPhysics>,
}

impl RawScenario {
    fn split(self) -> (RawPhysics, RawKnobs) {
        (
            RawPhysics {
                shape: self.shape,
                radius: self.radius,
                sigma: self.sigma,
                mass: self.mass,
                charge: self.charge,
                separations: self.separations,
                n_list: self.n_list,
                shell_radius: self.shell_radius,
            },
            RawKnobs {
                name: self.name,
                preset: self.preset,
                weighting_mode: self.weighting_mode,
                convention_factor: self.convention_factor,
                mc_samples: self.mc_samples,
                seed: self.seed,
                output_format: self.output_format,
                overrides: self.overrides,
            },
        )
    }
}

struct RawKnobs {
    name: Spanned2<String>,
    preset: Spanned2<String>,
    weighting_mode: Spanned2<String>,
    convention_factor: Spanned2<f64>,
    mc_samples: Spanned2<i64>,
    seed: Spanned2<i64>,
    output_format: Spanned2<String>,
    overrides: Spanned2<RawPhysics>,
}

struct Lines<'a>(&'a str);

impl Lines<'_> {
    fn of(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.0.len());
        self.0[..end].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn err<T>(&self, field: &str, v: &Spanned<T>, msg: impl Into<String>) -> ConfigError {
        ConfigError::at(field, Some(self.of(v.span())), msg)
    }

    fn quantity(
        &self,
        field: &str,
        v: &Spanned<String>,
        dim: Dimension,
        unit_hint: &str,
    ) -> Result<f64, ConfigError> {
        let q: Quantity = parse_quantity(v.get_ref()).map_err(|m| self.err(field, v, m))?;
        if q.dim() != dim {
            return Err(self.err(
                field,
                v,
                format!("expected a value in {unit_hint}, got `{}`", v.get_ref()),
            ));
        }
        Ok(q.value())
    }

    fn positive(
        &self,
        field: &str,
        v: &Spanned<String>,
        dim: Dimension,
        unit_hint: &str,
    ) -> Result<f64, ConfigError> {
        let x = self.quantity(field, v, dim, unit_hint)?;
        if x <= 0.0 {
            return Err(self.err(field, v, format!("must be positive, got `{}`", v.get_ref())));
        }
        Ok(x)
    }
}

const PHYSICS_FIELDS: [&str; 8] = [
    "shape",
    "radius",
    "sigma",
    "mass",
    "charge",
    "separations",
    "n_list",
    "shell_radius",
];

impl RawPhysics {
    /// First present field, with its span, in declaration order.
    fn present(&self) -> Vec<(&'static str, Range<usize>)> {
        let mut out = Vec::new();
        macro_rules! push {
            ($($f:ident),*) => {$(
                if let Some(v) = &self.$f {
                    out.push((stringify!($f), v.span()));
                }
            )*};
        }
        push!(
            shape,
            radius,
            sigma,
            mass,
            charge,
            separations,
            n_list,
            shell_radius
        );
        debug_assert!(out.iter().all(|(f, _)| PHYSICS_FIELDS.contains(f)));
        out
    }

    /// Applies every present field on top of `base`.
    fn apply(&self, lines: &Lines, base: Option<Physics>) -> Result<Physics, ConfigError> {
        let from_scratch = base.is_none();
        let mut shape_kind = base.as_ref().map(|b| b.shape.name().to_string());
        let mut radius = match base.as_ref().map(|b| b.shape) {
            Some(Shape::UniformSphere { radius }) => Some(radius),
            _ => None,
        };
        let mut sigma = match base.as_ref().map(|b| b.shape) {
            Some(Shape::Gaussian { sigma }) => Some(sigma),
            _ => None,
        };

        if let Some(s) = &self.shape {
            let kind = s.get_ref().as_str();
            if !["point", "uniform_sphere", "gaussian"].contains(&kind) {
                return Err(lines.err(
                    "shape",
                    s,
                    format!("unknown shape `{kind}` (expected point, uniform_sphere or gaussian)"),
                ));
            }
            if shape_kind.as_deref() != Some(kind) {
                radius = None;
                sigma = None;
            }
            shape_kind = Some(kind.to_string());
        }
        if let Some(r) = &self.radius {
            radius = Some(lines.positive("radius", r, Dimension::LENGTH, "m")?);
        }
        if let Some(s) = &self.sigma {
            sigma = Some(lines.positive("sigma", s, Dimension::LENGTH, "m")?);
        }

        let kind = shape_kind.ok_or_else(|| ConfigError::at("shape", None, "shape required"))?;
        let shape = match kind.as_str() {
            "point" => Shape::Point,
            "uniform_sphere" => Shape::UniformSphere {
                radius: radius.ok_or_else(|| {
                    ConfigError::at("radius", None, "radius required for a uniform_sphere")
                })?,
            },
            _ => Shape::Gaussian {
                sigma: sigma.ok_or_else(|| {
                    ConfigError::at("sigma", None, "sigma required for a gaussian")
                })?,
            },
        };
        let stray = match shape {
            Shape::Point => [("radius", &self.radius), ("sigma", &self.sigma)]
                .into_iter()
                .find_map(|(f, v)| v.as_ref().map(|v| (f, v))),
            Shape::UniformSphere { .. } => self.sigma.as_ref().map(|v| ("sigma", v)),
            Shape::Gaussian { .. } => self.radius.as_ref().map(|v| ("radius", v)),
        };
        if let Some((field, v)) = stray {
            return Err(lines.err(
                field,
                v,
                format!("does not apply to shape `{}`", shape.name()),
            ));
        }

        let mass_kg = match (&self.mass, &base) {
            (Some(m), _) => lines.positive("mass", m, Dimension::MASS, "kg")?,
            (None, Some(b)) => b.mass_kg,
            (None, None) => return Err(ConfigError::at("mass", None, "mass required")),
        };
        let charge_c = match &self.charge {
            Some(q) => Some(lines.quantity("charge", q, Dimension::CHARGE, "C or e")?),
            None => base.as_ref().and_then(|b| b.charge_c),
        };
        let separations_m = match &self.separations {
            Some(list) => list
                .get_ref()
                .iter()
                .map(|d| lines.positive("separations", d, Dimension::LENGTH, "m"))
                .collect::<Result<Vec<_>, _>>()?,
            None => base
                .as_ref()
                .map(|b| b.separations_m.clone())
                .unwrap_or_default(),
        };
        let n_list = match &self.n_list {
            Some(list) => {
                if list.get_ref().is_empty() {
                    return Err(lines.err("n_list", list, "must not be empty"));
                }
                Some(
                    list.get_ref()
                        .iter()
                        .map(|n| match u32::try_from(*n.get_ref()) {
                            Ok(v) if v >= 1 => Ok(v),
                            _ => Err(lines.err(
                                "n_list",
                                n,
                                format!("component counts must be at least 1, got {}", n.get_ref()),
                            )),
                        })
                        .collect::<Result<Vec<_>, _>>()?,
                )
            }
            None => base.as_ref().and_then(|b| b.n_list.clone()),
        };
        let shell_radius_m = match &self.shell_radius {
            Some(r) => Some(lines.positive("shell_radius", r, Dimension::LENGTH, "m")?),
            None => base.as_ref().and_then(|b| b.shell_radius_m),
        };

        if n_list.is_some() && !matches!(shape, Shape::UniformSphere { .. }) {
            return Err(ConfigError::at(
                "n_list",
                self.n_list.as_ref().map(|v| lines.of(v.span())),
                "the N-component bound needs a uniform_sphere particle",
            ));
        }
        if shape == Shape::Point && n_list.is_none() && shell_radius_m.is_some() {
            return Err(ConfigError::at(
                "shell_radius",
                None,
                "only used with n_list",
            ));
        }
        if from_scratch && separations_m.is_empty() && n_list.is_none() {
            return Err(ConfigError::new(
                "nothing to compute: give `separations` and/or `n_list`",
            ));
        }

        Ok(Physics {
            shape,
            mass_kg,
            charge_c,
            separations_m,
            n_list,
            shell_radius_m,
        })
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let lines = Lines(text);
    let raw: RawScenario = toml::from_str(text).map_err(|e| ConfigError {
        field: None,
        line: e.span().map(|s| lines.of(s)),
        message: e.message().trim().to_string(),
    })?;
    let (physics_raw, knobs) = raw.split();

    let preset = match &knobs.preset {
        Some(p) => Some(Preset::from_name(p.get_ref()).ok_or_else(|| {
            let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
            lines.err(
                "preset",
                p,
                format!(
                    "unknown preset `{}` (known: {})",
                    p.get_ref(),
                    names.join(", ")
                ),
            )
        })?),
        None => None,
    };

    let name = match (&knobs.name, preset) {
        (Some(n), _) if n.get_ref().trim().is_empty() => {
            return Err(lines.err("name", n, "name must not be empty"))
        }
        (Some(n), _) => n.get_ref().clone(),
        (None, Some(p)) => p.name().to_string(),
        (None, None) => return Err(ConfigError::at("name", None, "name required")),
    };

    let physics = match preset {
        Some(p) => {
            if let Some((field, span)) = physics_raw.present().into_iter().next() {
                return Err(ConfigError::at(
                    field,
                    Some(lines.of(span)),
                    format!(
                        "conflicts with `preset`; move `{field}` into an [overrides] table to change the preset"
                    ),
                ));
            }
            let overrides = knobs.overrides.as_ref().map(|o| o.get_ref());
            match overrides {
                Some(o) => o.apply(&lines, Some(p.physics()))?,
                None => p.physics(),
            }
        }
        None => {
            if let Some(o) = &knobs.overrides {
                return Err(lines.err("overrides", o, "[overrides] requires `preset`"));
            }
            physics_raw.apply(&lines, None)?
        }
    };

    let weighting_mode = match &knobs.weighting_mode {
        Some(w) => weighting_from_name(w.get_ref()).ok_or_else(|| {
            lines.err(
                "weighting_mode",
                w,
                format!("expected `full` or `born`, got `{}`", w.get_ref()),
            )
        })?,
        None => Weighting::Full,
    };
    let convention_factor = match &knobs.convention_factor {
        Some(c) if !(*c.get_ref() > 0.0 && c.get_ref().is_finite()) => {
            return Err(lines.err("convention_factor", c, "must be positive and finite"))
        }
        Some(c) => *c.get_ref(),
        None => 1.0,
    };
    let mc_samples = match &knobs.mc_samples {
        Some(n) if *n.get_ref() < MIN_MC_SAMPLES as i64 => {
            return Err(lines.err(
                "mc_samples",
                n,
                format!("must be at least {MIN_MC_SAMPLES}"),
            ))
        }
        Some(n) => *n.get_ref() as u64,
        None => DEFAULT_SAMPLES,
    };
    let seed = match &knobs.seed {
        Some(s) if *s.get_ref() < 0 => return Err(lines.err("seed", s, "must be nonnegative")),
        Some(s) => *s.get_ref() as u64,
        None => DEFAULT_SEED,
    };
    let output_format = match &knobs.output_format {
        Some(f) => OutputFormat::from_name(f.get_ref()).ok_or_else(|| {
            lines.err(
                "output_format",
                f,
                format!("expected table, json or csv, got `{}`", f.get_ref()),
            )
        })?,
        None => OutputFormat::Table,
    };

    let config = ScenarioConfig {
        name,
        preset,
        physics,
        weighting_mode,
        convention_factor,
        mc_samples,
        seed,
        output_format,
    };
    config
        .physics
        .model()
        .map_err(|e| ConfigError::new(e.to_string()))?;
    Ok(config)
}

fn toml_str(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn length(v: f64) -> String {
    toml_str(&format!("{v:e} m"))
}

fn write_physics(out: &mut String, p: &Physics, base: Option<&Physics>) {
    let differs = |f: &dyn Fn(&Physics) -> bool| base.is_none_or(f);
    if differs(&|b| b.shape != p.shape) {
        out.push_str(&format!("shape = {}\n", toml_str(p.shape.name())));
        match p.shape {
            Shape::Point => {}
            Shape::UniformSphere { radius } => {
                out.push_str(&format!("radius = {}\n", length(radius)))
            }
            Shape::Gaussian { sigma } => out.push_str(&format!("sigma = {}\n", length(sigma))),
        }
    }
    if differs(&|b| b.mass_kg != p.mass_kg) {
        out.push_str(&format!(
            "mass = {}\n",
            toml_str(&format!("{:e} kg", p.mass_kg))
        ));
    }
    if let Some(q) = p.charge_c {
        if differs(&|b| b.charge_c != p.charge_c) {
            out.push_str(&format!("charge = {}\n", toml_str(&format!("{q:e} C"))));
        }
    }
    if differs(&|b| b.separations_m != p.separations_m) {
        let items: Vec<_> = p.separations_m.iter().map(|&d| length(d)).collect();
        out.push_str(&format!("separations = [{}]\n", items.join(", ")));
    }
    if let Some(ns) = &p.n_list {
        if differs(&|b| b.n_list != p.n_list) {
            let items: Vec<_> = ns.iter().map(|n| n.to_string()).collect();
            out.push_str(&format!("n_list = [{}]\n", items.join(", ")));
        }
    }
    if let Some(r) = p.shell_radius_m {
        if differs(&|b| b.shell_radius_m != p.shell_radius_m) {
            out.push_str(&format!("shell_radius = {}\n", length(r)));
        }
    }
}

/// Serialises a config back to a scenario document that parses to the same
/// config.
///
/// Preset configs are written as the preset plus an `[overrides]` table of
/// whatever differs from it.
///
/// Presets cannot remove a charge or an `n_list`, so a preset config that
/// dropped one is not representable.
pub fn to_scenario_toml(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!("name = {}\n", toml_str(&cfg.name)));
    if let Some(p) = cfg.preset {
        out.push_str(&format!("preset = {}\n", toml_str(p.name())));
    }
    out.push_str(&format!(
        "weighting_mode = {}\n",
        toml_str(cfg.weighting_mode.name())
    ));
    out.push_str(&format!(
        "convention_factor = {}\n",
        toml::Value::Float(cfg.convention_factor)
    ));
    out.push_str(&format!("mc_samples = {}\n", cfg.mc_samples));
    out.push_str(&format!("seed = {}\n", cfg.seed));
    out.push_str(&format!(
        "output_format = {}\n",
        toml_str(cfg.output_format.name())
    ));
    match cfg.preset {
        None => write_physics(&mut out, &cfg.physics, None),
        Some(p) => {
            let base = p.physics();
            let mut body = String::new();
            write_physics(&mut body, &cfg.physics, Some(&base));
            if !body.is_empty() {
                out.push_str("\n[overrides]\n");
                out.push_str(&body);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_preset() {
        let cfg = parse_scenario("preset = \"trapped_ion\"\n").unwrap();
        assert_eq!(cfg.name, "trapped_ion");
        assert_eq!(cfg.preset, Some(Preset::TrappedIon));
        assert_eq!(cfg.physics.mass_kg, 1e-23);
        assert_eq!(cfg.physics.separations_m, vec![1e-7]);
        assert_eq!(cfg.physics.charge_c, Some(ELEMENTARY_CHARGE_C));
        assert_eq!(cfg.physics.shape, Shape::Point);
        assert_eq!(cfg.seed, DEFAULT_SEED);
    }

    #[test]
    fn empty_document_needs_name() {
        let err = parse_scenario("").unwrap_err();
        assert!(err.to_string().contains("name required"), "{err}");
    }

    #[test]
    fn negative_mass_names_field_and_line() {
        let doc = "name = \"x\"\nshape = \"point\"\nmass = \"-1 kg\"\nseparations = [\"1 m\"]\n";
        let err = parse_scenario(doc).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("mass"));
        assert_eq!(err.line, Some(3));
        assert!(err.to_string().contains("positive"));
    }

    #[test]
    fn missing_unit() {
        let doc = "name = \"x\"\nshape = \"point\"\nmass = \"1e-23\"\nseparations = [\"1 m\"]\n";
        let err = parse_scenario(doc).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("mass"));
        assert!(err.message.contains("missing unit"));
    }

    #[test]
    fn wrong_unit() {
        let doc = "name = \"x\"\nshape = \"point\"\nmass = \"1 m\"\nseparations = [\"1 m\"]\n";
        let err = parse_scenario(doc).unwrap_err();
        assert!(err.message.contains("kg"), "{err}");
    }

    #[test]
    fn unknown_key() {
        let err = parse_scenario("name = \"x\"\ncolour = \"red\"\n").unwrap_err();
        assert!(err.message.contains("colour"), "{err}");
        assert_eq!(err.line, Some(2));
    }

    #[test]
    fn preset_conflict_names_both_fields() {
        let err = parse_scenario("preset = \"trapped_ion\"\nmass = \"1 kg\"\n").unwrap_err();
        let s = err.to_string();
        assert!(s.contains("mass") && s.contains("preset"), "{s}");
        assert_eq!(err.line, Some(2));
    }

    #[test]
    fn overrides_apply() {
        let doc = "preset = \"n_component_sweep\"\n[overrides]\nn_list = [1]\n";
        let cfg = parse_scenario(doc).unwrap();
        assert_eq!(cfg.physics.n_list, Some(vec![1]));
        assert_eq!(cfg.physics.mass_kg, 1.5e-17);

        let doc =
            "preset = \"penrose_micron\"\n[overrides]\nshape = \"gaussian\"\nsigma = \"2e-6 m\"\n";
        let cfg = parse_scenario(doc).unwrap();
        assert_eq!(cfg.physics.shape, Shape::Gaussian { sigma: 2e-6 });

        let doc = "preset = \"penrose_micron\"\n[overrides]\nshape = \"gaussian\"\n";
        assert_eq!(
            parse_scenario(doc).unwrap_err().field.as_deref(),
            Some("sigma")
        );
        assert!(parse_scenario("name = \"x\"\n[overrides]\nmass = \"1 kg\"\n").is_err());
    }

    #[test]
    fn custom_document() {
        let doc = r#"
name = "gauss"
shape = "gaussian"
sigma = "1 m"
mass = "1 kg"
charge = "3 e"
separations = ["1 m", "5 m"]
weighting_mode = "born"
convention_factor = 12.566370614359172
mc_samples = 5000
seed = 7
output_format = "csv"
"#;
        let cfg = parse_scenario(doc).unwrap();
        assert_eq!(cfg.physics.separations_m, vec![1.0, 5.0]);
        assert_eq!(cfg.weighting_mode, Weighting::Born);
        assert_eq!(cfg.output_format, OutputFormat::Csv);
        assert!((cfg.physics.charge_c.unwrap() / (3.0 * ELEMENTARY_CHARGE_C) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn knob_validation() {
        let base = "preset = \"trapped_ion\"\n";
        for (extra, field) in [
            ("mc_samples = 10\n", "mc_samples"),
            ("seed = -1\n", "seed"),
            ("convention_factor = 0.0\n", "convention_factor"),
            ("weighting_mode = \"half\"\n", "weighting_mode"),
            ("output_format = \"xml\"\n", "output_format"),
        ] {
            let err = parse_scenario(&format!("{base}{extra}")).unwrap_err();
            assert_eq!(err.field.as_deref(), Some(field), "{err}");
            assert_eq!(err.line, Some(2));
        }
        let err = parse_scenario("preset = \"nope\"\n").unwrap_err();
        assert_eq!(err.field.as_deref(), Some("preset"));
    }

    #[test]
    fn shape_specific_fields() {
        let doc = "name = \"x\"\nshape = \"point\"\nradius = \"1 m\"\nmass = \"1 kg\"\nseparations = [\"1 m\"]\n";
        assert_eq!(
            parse_scenario(doc).unwrap_err().field.as_deref(),
            Some("radius")
        );
        let doc =
            "name = \"x\"\nshape = \"gaussian\"\nsigma = \"1 m\"\nmass = \"1 kg\"\nn_list = [2]\n";
        assert_eq!(
            parse_scenario(doc).unwrap_err().field.as_deref(),
            Some("n_list")
        );
        let doc = "name = \"x\"\nshape = \"point\"\nmass = \"1 kg\"\n";
        assert!(parse_scenario(doc)
            .unwrap_err()
            .message
            .contains("nothing to compute"));
        let doc = "name = \"x\"\nshape = \"point\"\nmass = \"1 kg\"\nseparations = [\"0 m\"]\n";
        assert_eq!(
            parse_scenario(doc).unwrap_err().field.as_deref(),
            Some("separations")
        );
    }

    #[test]
    fn echo_round_trip() {
        for p in Preset::ALL {
            let cfg = ScenarioConfig::from_preset(p);
            assert_eq!(parse_scenario(&to_scenario_toml(&cfg)).unwrap(), cfg);
        }
        let doc = "preset = \"penrose_micron\"\nseed = 3\n[overrides]\nmass = \"2e-17 kg\"\nseparations = [\"3e-6 m\", \"1e-5 m\"]\n";
        let cfg = parse_scenario(doc).unwrap();
        assert_eq!(parse_scenario(&to_scenario_toml(&cfg)).unwrap(), cfg);
    }
}

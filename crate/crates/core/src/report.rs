//! Running scenarios and rendering their reports.

use std::fmt::Write as _;

use serde::de::Deserializer;
use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::collapse::{collapse_time_for, n_component_bound, CollapseTime, MassConvention};
use crate::constants::CONSTANTS_VERSION;
use crate::distribution::{DistributionModel, Shape};
use crate::energy::{
    acceleration, check_ratio, coupling_ratio, delta_e, em_gravity_ratio, mutual_force, pair_at,
    EvalOptions, Interaction,
};
use crate::error::Error;
use crate::kernel::{McConfig, Method};
use crate::scenario::{OutputFormat, ScenarioConfig};
use crate::units::convert_to_ev;

pub const SCHEMA_VERSION: u32 = 1;

fn sci<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    let raw = RawValue::from_string(format!("{v:.8e}")).map_err(S::Error::custom)?;
    raw.serialize(s)
}

fn sci_opt<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => sci(x, s),
        None => s.serialize_none(),
    }
}

/// Collapse time as written to reports: seconds, `"stable"`, or null when
/// ΔE is undefined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TauField {
    Seconds(f64),
    Stable,
    Undefined,
}

impl TauField {
    fn text(&self) -> String {
        match self {
            TauField::Seconds(s) => format!("{s:.8e}"),
            TauField::Stable => "stable".into(),
            TauField::Undefined => String::new(),
        }
    }
}

impl Serialize for TauField {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            TauField::Seconds(x) => sci(x, s),
            TauField::Stable => s.serialize_str("stable"),
            TauField::Undefined => s.serialize_none(),
        }
    }
}

impl<'de> Deserialize<'de> for TauField {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Option::<Repr>::deserialize(d)? {
            None => Ok(TauField::Undefined),
            Some(Repr::Number(x)) => Ok(TauField::Seconds(x)),
            Some(Repr::Text(t)) if t == "stable" => Ok(TauField::Stable),
            Some(Repr::Text(t)) => Err(serde::de::Error::custom(format!(
                "unexpected tau value `{t}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticleRecord {
    pub shape: String,
    #[serde(serialize_with = "sci_opt")]
    pub radius_m: Option<f64>,
    #[serde(serialize_with = "sci_opt")]
    pub sigma_m: Option<f64>,
    #[serde(serialize_with = "sci")]
    pub mass_kg: f64,
    #[serde(rename = "charge_C", serialize_with = "sci_opt")]
    pub charge_c: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationRow {
    #[serde(serialize_with = "sci")]
    pub d_m: f64,
    #[serde(rename = "dE_grav_J", serialize_with = "sci_opt")]
    pub de_grav_j: Option<f64>,
    #[serde(rename = "dE_grav_eV", serialize_with = "sci_opt")]
    pub de_grav_ev: Option<f64>,
    /// Monte Carlo standard error of ΔE_grav; null on the closed-form path.
    #[serde(rename = "dE_grav_stderr_J", serialize_with = "sci_opt")]
    pub de_grav_stderr_j: Option<f64>,
    #[serde(rename = "dE_em_J", serialize_with = "sci_opt")]
    pub de_em_j: Option<f64>,
    #[serde(rename = "dE_em_eV", serialize_with = "sci_opt")]
    pub de_em_ev: Option<f64>,
    /// ΔE_em / ΔE_grav.
    #[serde(serialize_with = "sci_opt")]
    pub ratio_em_grav: Option<f64>,
    pub tau_s: TauField,
    #[serde(rename = "F_grav_N", serialize_with = "sci")]
    pub f_grav_n: f64,
    #[serde(rename = "F_em_N", serialize_with = "sci_opt")]
    pub f_em_n: Option<f64>,
    /// Acceleration of the particle under F_em.
    #[serde(rename = "accel_m_s2", serialize_with = "sci_opt")]
    pub accel_m_s2: Option<f64>,
    pub method: String,
    pub mc_fallback: bool,
    pub point_approximation_valid: bool,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u32,
    #[serde(serialize_with = "sci")]
    pub shell_radius_m: f64,
    #[serde(rename = "bound_full_J", serialize_with = "sci")]
    pub bound_full_j: f64,
    #[serde(serialize_with = "sci")]
    pub ratio_full: f64,
    #[serde(rename = "bound_born_J", serialize_with = "sci")]
    pub bound_born_j: f64,
    #[serde(serialize_with = "sci")]
    pub ratio_born: f64,
    #[serde(rename = "coincident_self_energy_J", serialize_with = "sci")]
    pub coincident_j: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(serialize_with = "sci")]
    pub convention_factor: f64,
    pub weighting_mode: String,
    pub method: String,
    pub mc_fallback: bool,
    pub mc_samples: u64,
    pub seed: u64,
    pub constants_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub schema_version: u32,
    pub scenario: String,
    pub preset: Option<String>,
    pub particle: ParticleRecord,
    pub rows: Vec<SeparationRow>,
    pub sweep: Option<Vec<SweepRow>>,
    pub metadata: Metadata,
}

/// A computation failure, tagged with the scenario it came from.
#[derive(Debug, thiserror::Error)]
#[error("scenario `{scenario}`: {source}")]
pub struct RunError {
    pub scenario: String,
    #[source]
    pub source: Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct RunMode {
    /// Evaluate every bilinear form by Monte Carlo.
    pub force_mc: bool,
}

fn separation_row(
    model: &DistributionModel,
    d: f64,
    opts: &EvalOptions,
) -> Result<SeparationRow, Error> {
    let spec = pair_at(*model, d)?;
    let charged = model.charge_c().is_some();

    let f_grav = mutual_force(model, d, Interaction::Gravity)?;
    let (f_em, accel) = if charged {
        let f = mutual_force(model, d, Interaction::Electromagnetic)?;
        (
            Some(f.force.value()),
            Some(acceleration(f.force, model)?.value()),
        )
    } else {
        (None, None)
    };

    let mut row = SeparationRow {
        d_m: d,
        de_grav_j: None,
        de_grav_ev: None,
        de_grav_stderr_j: None,
        de_em_j: None,
        de_em_ev: None,
        ratio_em_grav: None,
        tau_s: TauField::Undefined,
        f_grav_n: f_grav.force.value(),
        f_em_n: f_em,
        accel_m_s2: accel,
        method: Method::ClosedForm.name().into(),
        mc_fallback: false,
        point_approximation_valid: f_grav.point_approximation_valid,
        note: None,
    };

    if model.shape().is_extended() {
        let grav = delta_e(&spec, Interaction::Gravity, opts)?;
        row.de_grav_j = Some(grav.joules());
        row.de_grav_ev = Some(convert_to_ev(grav.value)?);
        row.method = grav.method().name().into();
        row.mc_fallback = grav.breakdown.fallback();
        if grav.method() == Method::MonteCarlo {
            row.de_grav_stderr_j = Some(grav.std_error());
        }
        row.tau_s = match collapse_time_for(grav.value)? {
            CollapseTime::Finite(t) => TauField::Seconds(t.value()),
            CollapseTime::Stable => TauField::Stable,
        };
        if let Some(q) = model.charge_c() {
            let em = delta_e(&spec, Interaction::Electromagnetic, opts)?;
            row.de_em_j = Some(em.joules());
            row.de_em_ev = Some(convert_to_ev(em.value)?);
            let closed = coupling_ratio(q, model.mass_kg())?;
            check_ratio(closed, grav.joules(), em.joules())?;
            row.ratio_em_grav = Some(closed);
        }
    } else {
        if charged {
            row.ratio_em_grav = Some(em_gravity_ratio(&spec, opts)?.closed_form);
        }
        row.note = Some("point branches: self-energy diverges, only forces are defined".into());
    }
    Ok(row)
}

fn sweep_rows(cfg: &ScenarioConfig, ns: &[u32]) -> Result<Vec<SweepRow>, Error> {
    let p = &cfg.physics;
    let a = p.shape.size();
    let r = p.shell_radius();
    ns.iter()
        .map(|&n| {
            let full = n_component_bound(n, p.mass_kg, r, a, MassConvention::FullMassPerComponent)?;
            let born = n_component_bound(n, p.mass_kg, r, a, MassConvention::BornWeighted)?;
            Ok(SweepRow {
                n,
                shell_radius_m: r,
                bound_full_j: full.bound.value(),
                ratio_full: full.violation_ratio,
                bound_born_j: born.bound.value(),
                ratio_born: born.violation_ratio,
                coincident_j: full.coincident_self_energy.value(),
            })
        })
        .collect()
}

/// Evaluates every separation row and the N-component sweep of a scenario.
pub fn run_scenario(cfg: &ScenarioConfig, mode: RunMode) -> Result<EnergyReport, RunError> {
    let wrap = |source| RunError {
        scenario: cfg.name.clone(),
        source,
    };
    let model = cfg.physics.model().map_err(wrap)?;
    let opts = EvalOptions {
        weighting: cfg.weighting_mode,
        convention_factor: cfg.convention_factor,
        mc: McConfig {
            samples: cfg.mc_samples,
            seed: cfg.seed,
        },
        force_mc: mode.force_mc,
    };

    let rows = cfg
        .physics
        .separations_m
        .iter()
        .map(|&d| separation_row(&model, d, &opts))
        .collect::<Result<Vec<_>, _>>()
        .map_err(wrap)?;
    let sweep = cfg
        .physics
        .n_list
        .as_deref()
        .map(|ns| sweep_rows(cfg, ns))
        .transpose()
        .map_err(wrap)?;

    let any_mc = rows.iter().any(|r| r.method == Method::MonteCarlo.name());
    let any_closed = rows.iter().any(|r| r.method == Method::ClosedForm.name()) || sweep.is_some();
    let method = match (any_closed, any_mc) {
        (true, true) => "mixed",
        (false, true) => Method::MonteCarlo.name(),
        _ => Method::ClosedForm.name(),
    };

    let (radius_m, sigma_m) = match cfg.physics.shape {
        Shape::Point => (None, None),
        Shape::UniformSphere { radius } => (Some(radius), None),
        Shape::Gaussian { sigma } => (None, Some(sigma)),
    };

    Ok(EnergyReport {
        schema_version: SCHEMA_VERSION,
        scenario: cfg.name.clone(),
        preset: cfg.preset.map(|p| p.name().to_string()),
        particle: ParticleRecord {
            shape: cfg.physics.shape.name().into(),
            radius_m,
            sigma_m,
            mass_kg: cfg.physics.mass_kg,
            charge_c: cfg.physics.charge_c,
        },
        metadata: Metadata {
            convention_factor: cfg.convention_factor,
            weighting_mode: cfg.weighting_mode.name().into(),
            method: method.into(),
            mc_fallback: rows.iter().any(|r| r.mc_fallback),
            mc_samples: cfg.mc_samples,
            seed: cfg.seed,
            constants_version: CONSTANTS_VERSION.into(),
        },
        rows,
        sweep,
    })
}

pub fn emit_report(report: &EnergyReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Table => render_table(report),
        OutputFormat::Json => render_json(report),
        OutputFormat::Csv => render_csv(report),
    }
}

pub fn render_json(report: &EnergyReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report fields are serialisable");
    s.push('\n');
    s
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.8e}")).unwrap_or_default()
}

const ROW_HEADER: [&str; 12] = [
    "d_m",
    "dE_grav_J",
    "dE_grav_eV",
    "dE_grav_stderr_J",
    "dE_em_J",
    "dE_em_eV",
    "ratio_em_grav",
    "tau_s",
    "F_grav_N",
    "F_em_N",
    "accel_m_s2",
    "method",
];

const SWEEP_HEADER: [&str; 7] = [
    "n",
    "shell_radius_m",
    "bound_full_J",
    "ratio_full",
    "bound_born_J",
    "ratio_born",
    "coincident_self_energy_J",
];

fn row_cells(r: &SeparationRow) -> Vec<String> {
    vec![
        cell(Some(r.d_m)),
        cell(r.de_grav_j),
        cell(r.de_grav_ev),
        cell(r.de_grav_stderr_j),
        cell(r.de_em_j),
        cell(r.de_em_ev),
        cell(r.ratio_em_grav),
        r.tau_s.text(),
        cell(Some(r.f_grav_n)),
        cell(r.f_em_n),
        cell(r.accel_m_s2),
        r.method.clone(),
    ]
}

fn sweep_cells(r: &SweepRow) -> Vec<String> {
    vec![
        r.n.to_string(),
        cell(Some(r.shell_radius_m)),
        cell(Some(r.bound_full_j)),
        cell(Some(r.ratio_full)),
        cell(Some(r.bound_born_j)),
        cell(Some(r.ratio_born)),
        cell(Some(r.coincident_j)),
    ]
}

/// One CSV block per table: separation rows, then (after a blank line) the
/// N-component sweep if the scenario has one.
pub fn render_csv(report: &EnergyReport) -> String {
    fn block(header: &[&str], rows: Vec<Vec<String>>) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        for r in rows {
            w.write_record(&r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }
    let mut out = String::new();
    if !report.rows.is_empty() || report.sweep.is_none() {
        out.push_str(&block(
            &ROW_HEADER,
            report.rows.iter().map(row_cells).collect(),
        ));
    }
    if let Some(sweep) = &report.sweep {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&block(
            &SWEEP_HEADER,
            sweep.iter().map(sweep_cells).collect(),
        ));
    }
    out
}

fn aligned(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let widths: Vec<usize> = (0..header.len())
        .map(|i| {
            rows.iter()
                .map(|r| r[i].len())
                .chain([header[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let _ = writeln!(out, "{}", line(header.to_vec()));
    for r in rows {
        let _ = writeln!(out, "{}", line(r.iter().map(String::as_str).collect()));
    }
}

pub fn render_table(report: &EnergyReport) -> String {
    let mut out = String::new();
    let p = &report.particle;
    let _ = writeln!(out, "scenario: {}", report.scenario);
    let mut particle = format!("particle: {} m={:.4e} kg", p.shape, p.mass_kg);
    if let Some(r) = p.radius_m {
        let _ = write!(particle, " radius={r:.4e} m");
    }
    if let Some(s) = p.sigma_m {
        let _ = write!(particle, " sigma={s:.4e} m");
    }
    if let Some(q) = p.charge_c {
        let _ = write!(particle, " q={q:.4e} C");
    }
    let _ = writeln!(out, "{particle}\n");

    if !report.rows.is_empty() {
        let rows: Vec<_> = report.rows.iter().map(row_cells).collect();
        aligned(&mut out, &ROW_HEADER, &rows);
        for r in &report.rows {
            if let Some(note) = &r.note {
                let _ = writeln!(out, "  note (d={:.4e} m): {note}", r.d_m);
            }
            if !r.point_approximation_valid {
                let _ = writeln!(
                    out,
                    "  warning (d={:.4e} m): branches overlap, forces use the point-source law",
                    r.d_m
                );
            }
            if r.mc_fallback {
                let _ = writeln!(
                    out,
                    "  warning (d={:.4e} m): no closed form, Monte Carlo used",
                    r.d_m
                );
            }
        }
        out.push('\n');
    }
    if let Some(sweep) = &report.sweep {
        let rows: Vec<_> = sweep.iter().map(sweep_cells).collect();
        aligned(&mut out, &SWEEP_HEADER, &rows);
        out.push('\n');
    }

    let m = &report.metadata;
    let _ = writeln!(out, "convention_factor: {}", m.convention_factor);
    let _ = writeln!(out, "weighting_mode: {}", m.weighting_mode);
    let _ = writeln!(out, "method: {}", m.method);
    let _ = writeln!(out, "mc_samples: {}", m.mc_samples);
    let _ = writeln!(out, "seed: {}", m.seed);
    let _ = writeln!(out, "constants: {}", m.constants_version);
    let _ = writeln!(out, "schema_version: {}", report.schema_version);
    out
}

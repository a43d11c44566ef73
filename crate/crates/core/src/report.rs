//! Scenario execution and report files.
//!
//! Every number written out is rounded to 9 significant digits, so the same
//! scenario always produces byte-identical files.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::controller::{
    rms_weighted_frequency, synthesize_half_cycle, waveform, HalfLineProfile, Mode,
};
use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::litz::{ac_factor_comparison, recommend, LitzRecommendation};
use crate::losses::{loss_breakdown_with, LossAnalysis, LossBreakdown, LossSettings};
use crate::magnetics::flux_per_ampere;
use crate::numeric::sig9;
use crate::scenario::Scenario;
use crate::thermal::{profile_statistics, solve_with_core, ProfileStatistics, ThermalSolution};

/// Everything computed for one scenario.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub scenario: Scenario,
    pub profile: HalfLineProfile,
    pub analysis: LossAnalysis,
    pub thermal: ThermalSolution,
    pub statistics: ProfileStatistics,
}

impl Simulation {
    pub fn crest_frequency(&self) -> f64 {
        self.profile.crest_cycle().map_or(0.0, |c| c.frequency())
    }

    pub fn crest_period(&self) -> f64 {
        self.profile.crest_cycle().map_or(0.0, |c| c.period())
    }

    /// Highest flux density reached in any cycle.
    pub fn peak_flux_density(&self) -> f64 {
        let per_amp = flux_per_ampere(
            self.profile.inductance,
            &self.scenario.winding,
            &self.scenario.core,
        );
        let i_max = self
            .profile
            .cycles
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.i_peak));
        per_amp * i_max
    }

    pub fn summary(&self) -> Summary {
        let s = &self.scenario;
        let st = &self.statistics;
        Summary {
            name: s.name.clone(),
            mode: s.controller.mode,
            core: s.core_name.clone(),
            material: s.material_name.clone(),
            gap_length_m: s.core.gap_length,
            inductance_h: self.profile.inductance,
            cycles: self.profile.cycles.len(),
            rms_current_a: self.analysis.rms_current,
            crest_f_sw_hz: self.crest_frequency(),
            crest_period_s: self.crest_period(),
            f_effective_hz: rms_weighted_frequency(&self.profile),
            peak_flux_density_t: self.peak_flux_density(),
            losses: self.analysis.breakdown.clone(),
            thermal: ThermalSummary {
                t_min_c: st.t_min,
                t_max_c: st.t_max,
                range_k: st.range,
                argmax_section: st.argmax_section,
                core_temperature_c: self.thermal.core_temperature,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub name: String,
    pub mode: Mode,
    pub core: String,
    pub material: String,
    pub gap_length_m: f64,
    #[serde(rename = "inductance_H")]
    pub inductance_h: f64,
    pub cycles: usize,
    #[serde(rename = "rms_current_A")]
    pub rms_current_a: f64,
    #[serde(rename = "crest_f_sw_Hz")]
    pub crest_f_sw_hz: f64,
    pub crest_period_s: f64,
    #[serde(rename = "f_effective_Hz")]
    pub f_effective_hz: f64,
    #[serde(rename = "peak_flux_density_T")]
    pub peak_flux_density_t: f64,
    pub losses: LossBreakdown,
    pub thermal: ThermalSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThermalSummary {
    #[serde(rename = "t_min_C")]
    pub t_min_c: f64,
    #[serde(rename = "t_max_C")]
    pub t_max_c: f64,
    #[serde(rename = "range_K")]
    pub range_k: f64,
    pub argmax_section: usize,
    #[serde(rename = "core_temperature_C")]
    pub core_temperature_c: Option<f64>,
}

/// Waveform synthesis, loss breakdown and thermal solve.
pub fn simulate(scenario: &Scenario, strategy: Strategy) -> Result<Simulation> {
    let profile = synthesize_half_cycle(
        &scenario.operating_point,
        scenario.inductance,
        &scenario.controller,
    )?;
    let settings = LossSettings {
        harmonics: scenario.analysis.harmonics,
        samples: scenario.analysis.samples,
        strategy,
    };
    let analysis = loss_breakdown_with(
        &profile,
        &scenario.core,
        &scenario.material,
        &scenario.winding,
        &scenario.fringing,
        scenario.analysis.temperature,
        scenario.thermal.sections,
        &settings,
    )?;
    let net = scenario.thermal.network(&scenario.winding);
    let thermal = solve_with_core(
        &net,
        &analysis.breakdown.axial_density,
        analysis.breakdown.p_core,
    )?;
    let statistics = profile_statistics(&thermal.profile);
    Ok(Simulation {
        scenario: scenario.clone(),
        profile,
        analysis,
        thermal,
        statistics,
    })
}

/// Rounds every number in a JSON tree to 9 significant digits.
fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(sig9(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with rounded numbers and a trailing newline.
pub fn to_report_json<T: Serialize>(value: &T) -> Result<String> {
    let v = round_json(serde_json::to_value(value).map_err(|e| Error::Format(e.to_string()))?);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn num(x: f64) -> String {
    format!("{}", sig9(x))
}

fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)
        .map_err(|e| Error::Format(e.to_string()))?;
    for r in rows {
        w.write_record(&r)
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

/// Writes `contents` next to `path` first and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

pub fn waveform_csv(sim: &Simulation) -> Result<String> {
    let pts = waveform(
        &sim.profile,
        &sim.scenario.controller,
        sim.scenario.analysis.waveform_points_per_segment,
    );
    csv_text(
        &["t_s", "i_L_A", "v_drain_V"],
        pts.iter()
            .map(|p| vec![num(p.t), num(p.current), num(p.drain_voltage)]),
    )
}

pub fn cycles_csv(sim: &Simulation) -> Result<String> {
    csv_text(
        &["t_start_s", "f_sw_Hz", "delta_B_T", "p_v_kW_per_m3"],
        sim.analysis
            .core
            .cycles
            .iter()
            .map(|c| vec![num(c.t_start), num(c.f_sw), num(c.delta_b), num(c.p_v)]),
    )
}

pub fn thermal_csv(sim: &Simulation) -> Result<String> {
    let pos = sim
        .scenario
        .thermal
        .section_positions_mm(&sim.scenario.winding);
    csv_text(
        &["section_index", "axial_position_mm", "temperature_C"],
        sim.thermal
            .profile
            .temperatures
            .iter()
            .zip(&pos)
            .enumerate()
            .map(|(i, (t, z))| vec![i.to_string(), num(*z), num(*t)]),
    )
}

/// Writes the report bundle into `out` and returns the written paths.
pub fn write_reports(sim: &Simulation, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let files = [
        ("waveform.csv", waveform_csv(sim)?),
        ("cycles.csv", cycles_csv(sim)?),
        ("losses.json", to_report_json(&sim.analysis.breakdown)?),
        ("thermal.csv", thermal_csv(sim)?),
        ("summary.json", to_report_json(&sim.summary())?),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, text) in files {
        let path = out.join(name);
        write_atomic(&path, &text)?;
        written.push(path);
    }
    Ok(written)
}

/// Simulates and writes the report bundle.
pub fn run(scenario: &Scenario, out: &Path, strategy: Strategy) -> Result<Simulation> {
    let sim = simulate(scenario, strategy)?;
    write_reports(&sim, out)?;
    Ok(sim)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub quantity: &'static str,
    pub a: f64,
    pub b: f64,
    /// `a − b`.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub scenario_a: String,
    pub scenario_b: String,
    pub rows: Vec<ComparisonRow>,
    /// Thermal range of A minus that of B.
    #[serde(rename = "range_difference_K")]
    pub range_difference: f64,
}

impl Comparison {
    pub fn row(&self, quantity: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    /// Side-by-side text table.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<22} {:>16} {:>16} {:>16}\n",
            "quantity", "A", "B", "A - B"
        );
        for r in &self.rows {
            s += &format!(
                "{:<22} {:>16} {:>16} {:>16}\n",
                r.quantity,
                num(r.a),
                num(r.b),
                num(r.delta)
            );
        }
        s += &format!("A: {}\nB: {}\n", self.scenario_a, self.scenario_b);
        s
    }
}

pub fn comparison(a: &Simulation, b: &Simulation) -> Comparison {
    let (la, lb) = (&a.analysis.breakdown, &b.analysis.breakdown);
    let pairs: [(&'static str, f64, f64); 10] = [
        (
            "rms_current_A",
            a.analysis.rms_current,
            b.analysis.rms_current,
        ),
        ("crest_f_sw_Hz", a.crest_frequency(), b.crest_frequency()),
        ("p_dc_W", la.p_dc, lb.p_dc),
        ("p_ac_W", la.p_ac_skin_prox, lb.p_ac_skin_prox),
        ("p_fringing_W", la.p_fringing, lb.p_fringing),
        ("p_core_W", la.p_core, lb.p_core),
        ("p_total_W", la.p_total, lb.p_total),
        ("t_max_C", a.statistics.t_max, b.statistics.t_max),
        ("t_min_C", a.statistics.t_min, b.statistics.t_min),
        ("thermal_range_K", a.statistics.range, b.statistics.range),
    ];
    Comparison {
        scenario_a: a.scenario.name.clone(),
        scenario_b: b.scenario.name.clone(),
        rows: pairs
            .into_iter()
            .map(|(quantity, x, y)| ComparisonRow {
                quantity,
                a: x,
                b: y,
                delta: x - y,
            })
            .collect(),
        range_difference: a.statistics.range - b.statistics.range,
    }
}

/// Runs both scenarios (concurrently under the parallel strategy) and writes
/// `comparison.json` into `out`.
pub fn compare(a: &Scenario, b: &Scenario, out: &Path, strategy: Strategy) -> Result<Comparison> {
    // each run stays internally sequential; the pair is what runs in parallel
    let (ra, rb) = strategy.join(
        || simulate(a, Strategy::Sequential),
        || simulate(b, Strategy::Sequential),
    );
    let cmp = comparison(&ra?, &rb?);
    std::fs::create_dir_all(out)?;
    write_atomic(&out.join("comparison.json"), &to_report_json(&cmp)?)?;
    Ok(cmp)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LitzReport {
    pub scenario: String,
    #[serde(rename = "f_effective_Hz")]
    pub f_effective: f64,
    pub recommendation: LitzRecommendation,
    /// Eddy-current loss of the recommended bundle relative to the scenario's
    /// own winding on the scenario's current spectrum.
    pub ac_loss_ratio_vs_baseline: Option<f64>,
}

/// Recommends a litz winding for the scenario's effective frequency.
pub fn litz_report(scenario: &Scenario, strategy: Strategy) -> Result<LitzReport> {
    let opts = scenario
        .litz
        .as_ref()
        .ok_or_else(|| Error::validation("litz", "scenario has no litz section"))?;
    let sim = simulate(scenario, strategy)?;
    let f_effective = rms_weighted_frequency(&sim.profile);
    let rec = recommend(
        f_effective,
        scenario.winding.turns,
        &opts.former,
        opts.baseline_solid_diameter,
        &opts.catalog,
        &opts.rules,
    )?;
    let ratio = if rec.feasible {
        let litz = rec.to_winding(&scenario.winding);
        ac_factor_comparison(
            &sim.analysis.spectrum,
            &scenario.winding,
            &litz,
            scenario.analysis.temperature,
        )
        .ok()
    } else {
        None
    };
    Ok(LitzReport {
        scenario: scenario.name.clone(),
        f_effective,
        recommendation: rec,
        ac_loss_ratio_vs_baseline: ratio,
    })
}

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use wf_core::components::{build_ru, build_ue, end_to_end};
use wf_core::estimate::{fit_waste_factor, load_power_log};
use wf_core::metrics::{classify_strategy, ee_vs_wf_sweep, BsReading, EquipmentReading, StrategyFigure};
use wf_core::netsim::{run_campaign, write_aggregate_csv, write_drops_csv};
use wf_core::units::db_to_linear;
use wf_core::{power_flow, Power, Stage};

use crate::config::{ru_or_default, scenario_or_default, ue_or_default, ConfigDocument, SweepSection};
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn cfg(e: wf_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn run(e: wf_core::Error) -> CliError {
    match e {
        wf_core::Error::Io(io) => CliError::Runtime(io.to_string()),
        other => CliError::Runtime(other.to_string()),
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Runtime(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Runtime(e.to_string()))
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn e6(x: f64) -> String {
    format!("{x:.6e}")
}

/// The explicit `[[stage]]` list, or RU → channel → UE from whichever of
/// those sections are present.
fn cascade_stages(doc: &ConfigDocument) -> Result<Vec<Stage>, CliError> {
    if !doc.stages.is_empty() {
        return doc.stages.iter().map(|s| s.stage()).collect();
    }
    let mut stages = Vec::new();
    if let Some(ru) = &doc.ru {
        stages.push(build_ru(&ru.spec()?).map_err(cfg)?.stage);
    }
    if let Some(ch) = &doc.channel {
        stages.push(ch.stage()?);
    }
    if let Some(ue) = &doc.ue {
        stages.push(build_ue(&ue.spec()?).map_err(cfg)?.stage);
    }
    if stages.is_empty() {
        return Err(CliError::Config("nothing to cascade: add [[stage]] entries or [ru]/[channel]/[ue]".into()));
    }
    Ok(stages)
}

pub fn cascade(doc: &ConfigDocument, format: Format) -> Result<String, CliError> {
    let stages = cascade_stages(doc)?;
    let source = doc.cascade.as_ref().map_or(Ok(Power::from_dbm(0.0)), |c| c.source_power())?;
    let report = power_flow(&stages, source).map_err(cfg)?;

    #[derive(Serialize)]
    struct Row<'a> {
        label: &'a str,
        w: f64,
        wf_db: f64,
        g: f64,
        gain_db: f64,
        p_in_w: f64,
        p_out_w: f64,
        p_consumed_w: f64,
        p_wasted_w: f64,
    }
    let rows: Vec<Row> = stages
        .iter()
        .zip(&report.stages)
        .map(|(s, f)| Row {
            label: s.label(),
            w: s.w(),
            wf_db: s.wf_db(),
            g: s.g(),
            gain_db: s.gain_db(),
            p_in_w: f.p_in_w,
            p_out_w: f.p_out_w,
            p_consumed_w: f.p_consumed_w,
            p_wasted_w: f.p_wasted_w,
        })
        .collect();

    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                stages: Vec<Row<'a>>,
                totals: &'a wf_core::stage::CascadeTotals,
            }
            json(&Out { stages: rows, totals: &report.totals })
        }
        Format::Csv => {
            let t = &report.totals;
            let mut out: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.label.to_string(),
                        f6(r.w),
                        f6(r.wf_db),
                        e6(r.g),
                        f6(r.gain_db),
                        e6(r.p_in_w),
                        e6(r.p_out_w),
                        e6(r.p_consumed_w),
                        e6(r.p_wasted_w),
                    ]
                })
                .collect();
            out.push(vec![
                "total".into(),
                f6(t.w),
                f6(t.wf_db),
                e6(t.g),
                f6(10.0 * t.g.log10()),
                e6(t.p_source_out_w),
                e6(t.p_signal_w),
                e6(t.p_consumed_path_w),
                e6(t.p_wasted_w),
            ]);
            csv_text(
                &["stage", "w", "wf_db", "g", "gain_db", "p_in_w", "p_out_w", "p_consumed_w", "p_wasted_w"],
                out,
            )
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SystemPoint {
    pub strategy: &'static str,
    pub wf_c_db: f64,
    pub wf_system_db: f64,
}

/// Baseline and three single-change variants across channel WF.
pub fn system_series(doc: &ConfigDocument) -> Result<Vec<SystemPoint>, CliError> {
    let ru = build_ru(&ru_or_default(doc)?).map_err(cfg)?.stage;
    let ue = build_ue(&ue_or_default(doc)?).map_err(cfg)?.stage;
    let default_sweep = SweepSection::default();
    let sweep = doc.sweep.as_ref().unwrap_or(&default_sweep);
    let grid = sweep.wf_c_grid()?;

    let halve = |s: &Stage| Stage::new(s.label(), s.w() / 2.0, s.g()).map_err(cfg);
    let variants: [(&'static str, Stage, Stage); 4] = [
        ("baseline", ru.clone(), ue.clone()),
        ("half_w_ru", halve(&ru)?, ue.clone()),
        ("half_w_ue", ru.clone(), halve(&ue)?),
        ("double_g_ue", ru.clone(), Stage::new("ue", ue.w(), 2.0 * ue.g()).map_err(cfg)?),
    ];
    let mut points = Vec::with_capacity(4 * grid.len());
    for (name, r, u) in &variants {
        for &wf_c in &grid {
            let l = db_to_linear(wf_c);
            let ch = Stage::new("channel", l, 1.0 / l).map_err(cfg)?;
            let sys = end_to_end(r, &ch, u).map_err(cfg)?;
            points.push(SystemPoint { strategy: name, wf_c_db: wf_c, wf_system_db: sys.wf_db() });
        }
    }
    Ok(points)
}

pub fn system(doc: &ConfigDocument, format: Format) -> Result<String, CliError> {
    let points = system_series(doc)?;
    match format {
        Format::Json => json(&points),
        Format::Csv => csv_text(
            &["strategy", "wf_c_db", "wf_system_db"],
            points.iter().map(|p| vec![p.strategy.to_string(), f6(p.wf_c_db), f6(p.wf_system_db)]),
        ),
    }
}

pub fn fit(log: &Path, format: Format) -> Result<String, CliError> {
    let samples = load_power_log(log).map_err(|e| match e {
        wf_core::Error::Io(io) => CliError::Runtime(format!("{}: {io}", log.display())),
        other => CliError::Config(other.to_string()),
    })?;
    let fit = fit_waste_factor(&samples).map_err(cfg)?;
    match format {
        Format::Json => {
            let mut s = serde_json::to_string(&fit).map_err(|e| CliError::Runtime(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => csv_text(
            &["w", "p_non_path_w", "r_squared", "n_samples", "physical"],
            [vec![
                f6(fit.w),
                f6(fit.p_non_path_w),
                f6(fit.r_squared),
                fit.n_samples.to_string(),
                fit.physical.to_string(),
            ]],
        ),
    }
}

#[derive(Debug, Serialize)]
pub struct MetricRow {
    pub entity: String,
    pub metric: &'static str,
    pub value: serde_json::Value,
}

fn num(entity: &str, metric: &'static str, v: f64) -> MetricRow {
    MetricRow { entity: entity.to_string(), metric, value: serde_json::json!(v) }
}

pub fn metric_rows(doc: &ConfigDocument) -> Result<Vec<MetricRow>, CliError> {
    let m = doc
        .metrics
        .as_ref()
        .ok_or_else(|| CliError::Config("metrics needs a [metrics] section".into()))?;
    let mut rows = Vec::new();
    for b in &m.bs {
        let r = BsReading {
            non_path_wh: b.non_path_wh,
            path_wh_per_gb: b.path_wh_per_gb,
            data_volume_gb: b.data_volume_gb,
        };
        rows.push(num(&b.name, "energy_wh", r.energy_wh()));
        rows.push(num(&b.name, "ee_bs_gb_per_wh", r.ee_bs().map_err(cfg)?));
        rows.push(num(&b.name, "path_wh_per_gb", r.path_wh_per_gb));
    }
    for ru in &m.ru {
        let p = |w: f64| Power::from_watts(w).map_err(cfg);
        let r = EquipmentReading::new(p(ru.p_signal_w)?, p(ru.p_non_signal_w)?, p(ru.p_non_path_w)?, ru.duration_h)
            .map_err(cfg)?;
        rows.push(num(&ru.name, "p_consumed_total_w", r.p_consumed_total().watts()));
        rows.push(num(&ru.name, "ee_ru", r.ee_ru().map_err(cfg)?));
        let w = r.waste_factor().map_err(cfg)?;
        rows.push(num(&ru.name, "w", w));
        rows.push(num(&ru.name, "wf_db", 10.0 * w.log10()));
    }
    for s in &m.strategy {
        let figure = match s.figure.as_str() {
            "rate_w" => StrategyFigure::RateW,
            "power_w" => StrategyFigure::PowerW,
            other => {
                return Err(CliError::Config(format!(
                    "[[metrics.strategy]] '{}': figure '{other}' (expected rate_w or power_w)",
                    s.name
                )))
            }
        };
        let q = classify_strategy(s.axis_high, s.w_high, figure);
        let action = serde_json::to_value(q).map_err(|e| CliError::Runtime(e.to_string()))?;
        let action = action.as_object().and_then(|o| o.values().next().cloned()).unwrap_or(action);
        rows.push(MetricRow { entity: s.name.clone(), metric: "strategy", value: action });
    }
    if let Some(sw) = &m.ee_sweep {
        let ru = Stage::new("ru", sw.w, 1.0).map_err(cfg)?;
        let grid = sw
            .p_signal_w
            .iter()
            .map(|&p| Power::from_watts(p).map_err(cfg))
            .collect::<Result<Vec<_>, _>>()?;
        let p0 = Power::from_watts(sw.p_non_path_w).map_err(cfg)?;
        for r in ee_vs_wf_sweep(&ru, p0, &grid).map_err(cfg)? {
            let entity = format!("sweep@{}w", r.p_signal_w);
            rows.push(num(&entity, "ee_ru", r.ee_ru));
            rows.push(num(&entity, "wf_db", r.wf_db));
        }
    }
    Ok(rows)
}

pub fn metrics(doc: &ConfigDocument, format: Format) -> Result<String, CliError> {
    let rows = metric_rows(doc)?;
    match format {
        Format::Json => json(&rows),
        Format::Csv => csv_text(
            &["entity", "metric", "value"],
            rows.iter().map(|r| {
                let v = match &r.value {
                    serde_json::Value::Number(n) => f6(n.as_f64().unwrap_or(f64::NAN)),
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                vec![r.entity.clone(), r.metric.to_string(), v]
            }),
        ),
    }
}

pub struct SimulateArgs<'a> {
    pub seeds: u64,
    pub jobs: Option<usize>,
    pub out: Option<&'a Path>,
    pub seed_override: Option<u64>,
}

pub fn simulate(doc: &ConfigDocument, args: SimulateArgs<'_>, format: Format) -> Result<String, CliError> {
    if args.seeds == 0 {
        return Err(CliError::Config("--seeds must be ≥ 1".into()));
    }
    let base = scenario_or_default(doc)?;
    let base_seed = args.seed_override.unwrap_or(base.seed);
    let default_sweep = SweepSection::default();
    let grid = doc.sweep.as_ref().unwrap_or(&default_sweep).grid(base, args.seeds, base_seed)?;
    let campaign = run_campaign(&grid, args.jobs).map_err(|e| match e {
        wf_core::Error::InvalidArgument(_) | wf_core::Error::NonPositive { .. } => cfg(e),
        other => run(other),
    })?;

    let mut summary = String::new();
    if let Some(dir) = args.out {
        std::fs::create_dir_all(dir)?;
        let drops = dir.join("drops.csv");
        let agg = dir.join("aggregate.csv");
        write_drops_csv(&campaign, std::fs::File::create(&drops)?).map_err(run)?;
        write_aggregate_csv(&campaign, std::fs::File::create(&agg)?).map_err(run)?;
        let _ = writeln!(summary, "wrote {} drops to {}", campaign.drops.len(), drops.display());
        let _ = writeln!(summary, "wrote {} cells to {}", campaign.aggregates.len(), agg.display());
        return Ok(summary);
    }
    match format {
        Format::Json => json(&campaign.aggregates),
        Format::Csv => {
            let mut buf = Vec::new();
            write_aggregate_csv(&campaign, &mut buf).map_err(run)?;
            String::from_utf8(buf).map_err(|e| CliError::Runtime(e.to_string()))
        }
    }
}

//! Run analysis stages over a scene and collect a JSON report.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::scene::{Scene, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::normality::{marty_sup, rescale_family, MartyStats, MartyVerdict, ZalcmanTrace};
use crate::position::{delta_field, uniform_delta_checked, DeltaEstimate};
use crate::sharing::{hypotheses_check, ConditionReport, Overall};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Position,
    Check,
    Normality,
    Zalcman,
}

impl Stage {
    pub const ALL: [Stage; 4] = [
        Stage::Position,
        Stage::Check,
        Stage::Normality,
        Stage::Zalcman,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Position => "position",
            Stage::Check => "check",
            Stage::Normality => "normality",
            Stage::Zalcman => "zalcman",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionMember {
    pub label: String,
    pub min: f64,
    pub argmin: [f64; 2],
    pub refined: DeltaEstimate,
    pub passes: bool,
    pub undersampled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionReport {
    pub delta: f64,
    pub members: Vec<PositionMember>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "stage", rename_all = "kebab-case")]
pub enum StageResult {
    Position(PositionReport),
    Check(ConditionReport),
    Normality(MartyStats),
    Zalcman(ZalcmanTrace),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum StageOutcome {
    Ok {
        result: StageResult,
    },
    Error {
        error: String,
        #[serde(skip)]
        code: i32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub metadata: BTreeMap<String, serde_json::Value>,
    pub stages: BTreeMap<String, StageOutcome>,
    /// CSV tables keyed by file name; written separately from the JSON.
    #[serde(skip)]
    pub tables: BTreeMap<String, String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn stage(&self, stage: Stage) -> Option<&StageOutcome> {
        self.stages.get(stage.name())
    }

    pub fn result(&self, stage: Stage) -> Option<&StageResult> {
        match self.stage(stage) {
            Some(StageOutcome::Ok { result }) => Some(result),
            _ => None,
        }
    }

    pub fn error(&self, stage: Stage) -> Option<&str> {
        match self.stage(stage) {
            Some(StageOutcome::Error { error, .. }) => Some(error),
            _ => None,
        }
    }

    pub fn write_tables(&self, dir: impl AsRef<Path>) -> Result<()> {
        std::fs::create_dir_all(dir.as_ref())?;
        for (name, body) in &self.tables {
            std::fs::write(dir.as_ref().join(name), body)?;
        }
        Ok(())
    }
}

/// Run the requested stages in canonical order. A failing stage records its
/// error and the remaining stages still run.
pub fn run_pipeline(scene: &Scene, stages: &[Stage]) -> Report {
    let mut wanted = stages.to_vec();
    wanted.sort();
    wanted.dedup();
    let mut report = Report {
        schema_version: SCHEMA_VERSION,
        metadata: scene.metadata.clone(),
        stages: BTreeMap::new(),
        tables: BTreeMap::new(),
    };
    for stage in wanted {
        let outcome = match run_stage(scene, stage, &mut report.tables) {
            Ok(result) => StageOutcome::Ok { result },
            Err(e) => StageOutcome::Error {
                code: match &e {
                    Error::NotBlowingUp { .. } => 2,
                    e if e.is_degenerate() => 3,
                    _ => 1,
                },
                error: e.to_string(),
            },
        };
        report.stages.insert(stage.name().to_string(), outcome);
    }
    report
}

fn run_stage(
    scene: &Scene,
    stage: Stage,
    tables: &mut BTreeMap<String, String>,
) -> Result<StageResult> {
    match stage {
        Stage::Position => position_stage(scene, tables).map(StageResult::Position),
        Stage::Check => hypotheses_check(&scene.members, &scene.config).map(StageResult::Check),
        Stage::Normality => Ok(StageResult::Normality(normality_stage(scene, tables))),
        Stage::Zalcman => zalcman_stage(scene, tables).map(StageResult::Zalcman),
    }
}

fn position_stage(scene: &Scene, tables: &mut BTreeMap<String, String>) -> Result<PositionReport> {
    let region = &scene.config.region;
    let delta = scene.config.delta;
    let mut rows = Vec::new();
    let mut members = Vec::with_capacity(scene.members.len());
    for m in &scene.members {
        let v = uniform_delta_checked(&m.hyperplanes, region, delta).map_err(|e| e.at(&m.label))?;
        for (z, d) in delta_field(&m.hyperplanes, region)? {
            rows.push(vec![m.label.clone(), num(z.re), num(z.im), num(d)]);
        }
        members.push(PositionMember {
            label: m.label.clone(),
            min: v.coarse.min,
            argmin: v.coarse.argmin,
            refined: v.refined,
            passes: v.passes,
            undersampled: v.undersampled,
        });
    }
    tables.insert(
        "position.csv".into(),
        table(&["label", "x", "y", "D"], rows),
    );
    Ok(PositionReport {
        delta,
        pass: members.iter().all(|m| m.passes),
        members,
    })
}

fn normality_stage(scene: &Scene, tables: &mut BTreeMap<String, String>) -> MartyStats {
    let stats = marty_sup(&scene.curves(), &scene.config.region, &scene.config.marty);
    let rows = stats
        .members
        .iter()
        .map(|s| vec![s.index.to_string(), num(s.sup)]);
    tables.insert(
        "normality.csv".into(),
        table(&["member_index", "sup"], rows),
    );
    stats
}

fn zalcman_stage(scene: &Scene, tables: &mut BTreeMap<String, String>) -> Result<ZalcmanTrace> {
    let curves = scene.curves();
    let stats = marty_sup(&curves, &scene.config.region, &scene.config.marty);
    if stats.verdict != MartyVerdict::BlowUp {
        return Err(Error::NotBlowingUp {
            verdict: stats.verdict.to_string(),
        });
    }
    let trace = rescale_family(
        &curves,
        &stats,
        scene.zalcman.zeta_radius,
        scene.zalcman.grid_n,
    );
    let rows = trace
        .zeta_grid
        .iter()
        .zip(&trace.distance_to_limit)
        .map(|(z, &d)| vec![num(z[0]), num(z[1]), num(d)]);
    tables.insert(
        "zalcman.csv".into(),
        table(&["zeta_x", "zeta_y", "fs_distance"], rows),
    );
    Ok(trace)
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Process exit code for a report: 0 success, 2 a hypothesis or verdict
/// failed, 3 degenerate input, 1 a stage could not run for another reason.
pub fn exit_code(report: &Report) -> i32 {
    let mut code = 0;
    for outcome in report.stages.values() {
        let c = match outcome {
            StageOutcome::Error { code, .. } => *code,
            StageOutcome::Ok { result } => match result {
                StageResult::Check(r) => match r.overall {
                    Overall::Pass => 0,
                    Overall::Fail => 2,
                    Overall::Degenerate => 3,
                },
                StageResult::Position(p) if !p.pass => 2,
                _ => 0,
            },
        };
        code = code.max(c);
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generate::{generate_scene, Params};

    #[test]
    fn blowup_scene_runs_every_stage() {
        let s = generate_scene("blowup_linear", &Params::parse("N=8").unwrap()).unwrap();
        let r = run_pipeline(&s, &Stage::ALL);
        assert_eq!(r.stages.len(), 4);
        match r.result(Stage::Normality) {
            Some(StageResult::Normality(st)) => assert_eq!(st.verdict, MartyVerdict::BlowUp),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            r.result(Stage::Zalcman),
            Some(StageResult::Zalcman(_))
        ));
        for t in ["position.csv", "normality.csv", "zalcman.csv"] {
            assert!(r.tables.contains_key(t), "{t}");
        }
    }

    #[test]
    fn zalcman_stage_reports_not_blowing_up() {
        let s = generate_scene("montel_omitting", &Params::parse("N=4").unwrap()).unwrap();
        let r = run_pipeline(&s, &[Stage::Zalcman, Stage::Normality]);
        assert!(r.error(Stage::Zalcman).unwrap().contains("bounded"));
        assert_eq!(exit_code(&r), 2);
    }

    #[test]
    fn degenerate_position_fails_position_stage() {
        let s = generate_scene("degenerate_position", &Params::default()).unwrap();
        let r = run_pipeline(&s, &[Stage::Position]);
        match r.result(Stage::Position) {
            Some(StageResult::Position(p)) => {
                assert!(!p.pass);
                assert!((p.members[0].min - 0.01).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(exit_code(&r), 2);
    }

    #[test]
    fn output_is_deterministic() {
        let s = generate_scene("wandering_shared", &Params::default()).unwrap();
        let a = run_pipeline(&s, &Stage::ALL);
        let b = run_pipeline(&s, &Stage::ALL);
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.tables, b.tables);
    }
}

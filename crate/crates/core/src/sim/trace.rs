//! Per-step simulation log and its file formats.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::ConstraintReport;
use crate::world::{AgentState, Control, Pedestrian, WorldState};

use super::PlannerKind;

/// Everything known about one executed step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub robot: AgentState,
    pub robot_u: Control,
    pub humans: Vec<AgentState>,
    pub human_us: Vec<Control>,
    pub pedestrians: Vec<Pedestrian>,
    /// The robot directly sees a pedestrian.
    pub visible_ped: bool,
    /// Every crosswalk query point is visible to the robot.
    pub region_visible: bool,
    /// A pedestrian is being tracked from an earlier sighting.
    pub tracked: bool,
    /// Humans used as sensors for the state update.
    pub selected: Vec<usize>,
    pub bel_x: Vec<f64>,
    pub bel_i: Vec<f64>,
    pub degenerate_evidence: bool,
    pub expected_cost: f64,
    pub feasible: bool,
    pub constraints: ConstraintReport,
    /// Robot–pedestrian clearance at this step, if a pedestrian is on the road.
    pub ped_gap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Goal,
    Collision,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub scenario: String,
    pub kind: PlannerKind,
    pub dt: f64,
    pub a_max: f64,
    pub hypothesis_labels: Vec<String>,
    pub social_labels: Vec<String>,
    pub present: usize,
    pub records: Vec<StepRecord>,
    pub final_world: WorldState,
    pub final_ped_gap: Option<f64>,
    pub outcome: Outcome,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Trace {
    pub fn csv_header(&self) -> Vec<String> {
        let mut h: Vec<String> = [
            "step",
            "t",
            "robot.x",
            "robot.y",
            "robot.heading",
            "robot.v",
            "robot.a",
            "robot.steer",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let m = self.records.first().map_or(0, |r| r.humans.len());
        for i in 0..m {
            for f in ["x", "y", "heading", "v", "a"] {
                h.push(format!("human_{i}.{f}"));
            }
        }
        let p = self.records.first().map_or(0, |r| r.pedestrians.len());
        for j in 0..p {
            for f in ["x", "y", "active"] {
                h.push(format!("ped_{j}.{f}"));
            }
        }
        h.extend(["visible_ped", "region_visible", "tracked"].map(String::from));
        h.extend(self.hypothesis_labels.iter().map(|l| format!("bel_x[{l}]")));
        h.extend(self.social_labels.iter().map(|l| format!("bel_I[{l}]")));
        h.extend(
            [
                "expected_cost",
                "feasible",
                "margin.accel",
                "margin.curvature",
                "margin.speed",
                "margin.static",
                "margin.dynamic",
                "ped_gap",
            ]
            .map(String::from),
        );
        h
    }

    fn csv_row(r: &StepRecord) -> Vec<String> {
        let mut row = vec![
            r.step.to_string(),
            r.t.to_string(),
            r.robot.x.to_string(),
            r.robot.y.to_string(),
            r.robot.heading.to_string(),
            r.robot.speed.to_string(),
            r.robot_u.accel.to_string(),
            r.robot_u.steer.to_string(),
        ];
        for (h, u) in r.humans.iter().zip(&r.human_us) {
            row.extend([h.x, h.y, h.heading, h.speed, u.accel].map(|v| v.to_string()));
        }
        for p in &r.pedestrians {
            row.extend([
                p.x.to_string(),
                p.y.to_string(),
                u8::from(p.active).to_string(),
            ]);
        }
        row.extend([r.visible_ped, r.region_visible, r.tracked].map(|b| u8::from(b).to_string()));
        row.extend(r.bel_x.iter().chain(&r.bel_i).map(|v| v.to_string()));
        row.push(r.expected_cost.to_string());
        row.push(u8::from(r.feasible).to_string());
        let c = &r.constraints;
        row.extend([c.accel, c.curvature, c.speed].map(|v| v.to_string()));
        row.extend([
            opt(c.static_clearance),
            opt(c.dynamic_clearance),
            opt(r.ped_gap),
        ]);
        row
    }

    /// One row per step.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(self.csv_header()).map_err(csv_err)?;
        for r in &self.records {
            wr.write_record(Self::csv_row(r)).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// A header line describing the run followed by one JSON record per step.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Trace {
            records: Vec::new(),
            ..self.clone()
        };
        writeln!(w, "{}", serde_json::to_string(&header).map_err(json_err)?)?;
        for r in &self.records {
            writeln!(w, "{}", serde_json::to_string(r).map_err(json_err)?)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Trace> {
        let mut lines = r.lines().enumerate();
        let (_, first) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty trace".into(),
        })?;
        let mut trace: Trace = serde_json::from_str(&first?).map_err(|e| Error::Parse {
            line: 1,
            msg: e.to_string(),
        })?;
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            trace
                .records
                .push(serde_json::from_str(&line).map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                })?);
        }
        Ok(trace)
    }

    /// Time series for plotting: speeds of every vehicle and the beliefs.
    pub fn write_plot_data<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let m = self.records.first().map_or(0, |r| r.humans.len());
        let mut header = vec!["t".to_string(), "robot_speed".to_string()];
        header.extend((0..m).map(|i| format!("human_{i}_speed")));
        header.push("p_present".into());
        header.extend(self.social_labels.iter().map(|l| format!("p[{l}]")));
        header.push("visible_ped".into());
        wr.write_record(&header).map_err(csv_err)?;
        for r in &self.records {
            let mut row = vec![r.t.to_string(), r.robot.speed.to_string()];
            row.extend(r.humans.iter().map(|h| h.speed.to_string()));
            row.push(r.bel_x[self.present].to_string());
            row.extend(r.bel_i.iter().map(|v| v.to_string()));
            row.push(u8::from(r.visible_ped).to_string());
            wr.write_record(&row).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

//! Versioned CSV files: match logs in, ratings and plot data out.
//!
//! Every file starts with a comment line `# gelo-<kind> v<major>.<minor>`.
//! Readers accept any minor version of the major version they know.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use gelo::diagnostics::ConvergenceReport;
use gelo::identification::GammaTrace;
use gelo::rating_engine::{MatchRecord, SkillSnapshot, Trajectory};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

pub const MATCHES_KIND: &str = "gelo-matches";
pub const SCHEMA_MAJOR: u32 = 1;
pub const SCHEMA_VERSION: &str = "1.0";

/// One row of a match log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchCsvRow {
    #[serde(default)]
    pub date: Option<String>,
    pub home_id: String,
    pub away_id: String,
    #[serde(default)]
    pub outcome: Option<usize>,
    #[serde(default)]
    pub home_points: Option<i64>,
    #[serde(default)]
    pub away_points: Option<i64>,
    pub neutral: u8,
    pub step_k: f64,
    #[serde(default)]
    pub home_skill: Option<f64>,
    #[serde(default)]
    pub away_skill: Option<f64>,
}

/// Maps a point difference (home minus away) to an outcome index.
///
/// Stored as ascending cut points `c_1 < … < c_{L-1}`: the outcome is the
/// number of cut points not above the difference, so level `y` covers the
/// half-open integer interval `[c_y, c_{y+1})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscretizationRule {
    cuts: Vec<i64>,
}

impl DiscretizationRule {
    pub fn new(cuts: Vec<i64>) -> std::result::Result<Self, String> {
        if cuts.is_empty() {
            return Err("a discretization rule needs at least one cut point".into());
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("cut points {cuts:?} must be strictly increasing"));
        }
        let rule = Self { cuts };
        if rule.levels() % 2 == 1 && !rule.is_symmetric() {
            return Err(format!(
                "rule with cut points {:?} is not symmetric about zero",
                rule.cuts
            ));
        }
        Ok(rule)
    }

    /// Five levels: `g ≤ −3`, `g ∈ {−2, −1}`, `g = 0`, `g ∈ {1, 2}`, `g ≥ 3`.
    pub fn goal_difference_5() -> Self {
        Self::new(vec![-2, 0, 1, 3]).expect("valid rule")
    }

    /// Loss, draw, win.
    pub fn win_draw_loss() -> Self {
        Self::new(vec![0, 1]).expect("valid rule")
    }

    pub fn levels(&self) -> usize {
        self.cuts.len() + 1
    }

    pub fn cuts(&self) -> &[i64] {
        &self.cuts
    }

    pub fn outcome(&self, diff: i64) -> usize {
        self.cuts.partition_point(|&c| c <= diff)
    }

    fn is_symmetric(&self) -> bool {
        let top = self.levels() - 1;
        let reach = self.cuts.iter().map(|c| c.abs()).max().unwrap_or(0) + 2;
        (-reach..=reach).all(|g| self.outcome(g) + self.outcome(-g) == top)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    /// Number of outcome levels accepted in the `outcome` column.
    pub levels: usize,
    /// Used for rows that give points instead of an outcome index.
    pub rule: Option<DiscretizationRule>,
}

/// A validated match log.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchLog {
    /// Records in processing order; `t` is the position.
    pub records: Vec<MatchRecord>,
    /// Pre-match `(home, away)` skills, when every row supplies both.
    pub supplied_skills: Option<Vec<(f64, f64)>>,
    /// File lines of dated rows repeating an earlier `(date, home, away)`.
    pub duplicate_lines: Vec<u64>,
    pub warnings: Vec<String>,
}

impl MatchLog {
    /// Pre-match skill differences taken from the supplied columns.
    pub fn supplied_diffs(&self) -> Option<Vec<f64>> {
        self.supplied_skills
            .as_ref()
            .map(|s| s.iter().map(|(h, a)| h - a).collect())
    }
}

fn check_version(path: &Path, first_line: &str, kind: &str) -> Result<()> {
    let schema = |message: String| AppError::Schema {
        path: path.to_path_buf(),
        message,
    };
    let rest = first_line
        .trim()
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|s| s.strip_prefix(kind))
        .map(str::trim)
        .and_then(|s| s.strip_prefix('v'))
        .ok_or_else(|| schema(format!("missing version line `# {kind} v{SCHEMA_VERSION}`")))?;
    let major: u32 = rest
        .split('.')
        .next()
        .and_then(|m| m.parse().ok())
        .ok_or_else(|| schema(format!("unreadable schema version `{rest}`")))?;
    if major != SCHEMA_MAJOR {
        return Err(schema(format!(
            "unsupported schema major version {major} (this reader handles {SCHEMA_MAJOR}.x)"
        )));
    }
    Ok(())
}

/// Reads, validates and orders a match log.
pub fn ingest_matches(path: &Path, options: &IngestOptions) -> Result<MatchLog> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let (first, body) = text.split_once('\n').unwrap_or((text.as_str(), ""));
    check_version(path, first, MATCHES_KIND)?;
    let row_error = |line: u64, message: String| AppError::Row {
        path: path.to_path_buf(),
        line,
        message,
    };
    let levels = options.rule.as_ref().map_or(options.levels, |r| r.levels());

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let headers = reader.headers()?.clone();
    let mut rows: Vec<(u64, MatchCsvRow)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() + 1);
            row_error(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() + 1);
        let row: MatchCsvRow = rec
            .deserialize(Some(&headers))
            .map_err(|e| row_error(line, e.to_string()))?;
        rows.push((line, row));
    }
    if rows.is_empty() {
        return Err(AppError::Schema {
            path: path.to_path_buf(),
            message: "no matches".into(),
        });
    }

    let mut warnings = Vec::new();
    let dated = rows.iter().filter(|(_, r)| r.date.is_some()).count();
    if dated == rows.len() {
        let sorted = rows.windows(2).all(|w| w[0].1.date <= w[1].1.date);
        if !sorted {
            let msg = "dates are not monotone; rows were stably sorted by date".to_string();
            log::warn!("{}: {msg}", path.display());
            warnings.push(msg);
            rows.sort_by(|a, b| a.1.date.cmp(&b.1.date));
        }
    } else if dated > 0 {
        let msg = "some rows lack a date; file order kept".to_string();
        log::warn!("{}: {msg}", path.display());
        warnings.push(msg);
    }

    // undated logs may legitimately repeat a pairing
    let mut seen: HashMap<(&str, &str, &str), u64> = HashMap::new();
    let mut duplicate_lines = Vec::new();
    for (line, r) in &rows {
        let Some(date) = r.date.as_deref() else { continue };
        if seen.insert((date, r.home_id.as_str(), r.away_id.as_str()), *line).is_some() {
            duplicate_lines.push(*line);
        }
    }
    if !duplicate_lines.is_empty() {
        duplicate_lines.sort_unstable();
        let shown: Vec<String> = duplicate_lines.iter().take(10).map(u64::to_string).collect();
        let msg = format!(
            "{} rows repeat an earlier (date, home, away): lines {}{}",
            duplicate_lines.len(),
            shown.join(", "),
            if duplicate_lines.len() > 10 { ", ..." } else { "" }
        );
        log::warn!("{}: {msg}", path.display());
        warnings.push(msg);
    }

    let with_skills = rows
        .iter()
        .filter(|(_, r)| r.home_skill.is_some() && r.away_skill.is_some())
        .count();
    let keep_skills = with_skills == rows.len();
    let mut records = Vec::with_capacity(rows.len());
    let mut skills = Vec::new();
    for (t, (line, r)) in rows.into_iter().enumerate() {
        let outcome = match (r.outcome, r.home_points, r.away_points, &options.rule) {
            (Some(y), _, _, _) => y,
            (None, Some(h), Some(a), Some(rule)) => rule.outcome(h - a),
            (None, Some(_), Some(_), None) => {
                return Err(row_error(line, "points given but no discretization rule configured".into()))
            }
            _ => return Err(row_error(line, "unknown outcome: no outcome index and no points".into())),
        };
        if r.neutral > 1 {
            return Err(row_error(line, format!("neutral must be 0 or 1, got {}", r.neutral)));
        }
        let partial = r.home_skill.is_some() != r.away_skill.is_some();
        if partial || (with_skills > 0 && !keep_skills && r.home_skill.is_none()) {
            return Err(row_error(line, "pre-match skills must be given on every row or on none".into()));
        }
        let mut record = MatchRecord::new(t, r.home_id, r.away_id, outcome, r.neutral == 0, r.step_k);
        record.timestamp = r.date;
        record.validate(levels).map_err(|e| row_error(line, e.to_string()))?;
        if keep_skills {
            let (h, a) = (r.home_skill.unwrap_or_default(), r.away_skill.unwrap_or_default());
            if !h.is_finite() || !a.is_finite() {
                return Err(row_error(line, "pre-match skills must be finite".into()));
            }
            skills.push((h, a));
        }
        records.push(record);
    }
    Ok(MatchLog {
        records,
        supplied_skills: keep_skills.then_some(skills),
        duplicate_lines,
        warnings,
    })
}

/// Writes `path` through a temporary file in the same directory, renamed
/// into place once complete.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let mut buf = Vec::new();
    fill(&mut buf)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| AppError::io(dir, e))?;
    tmp.write_all(&buf).map_err(|e| AppError::io(path, e))?;
    tmp.persist(path).map_err(|e| AppError::io(path, e.error))?;
    Ok(())
}

fn write_csv<S, I>(path: &Path, kind: &str, rows: I) -> Result<()>
where
    S: Serialize,
    I: IntoIterator<Item = S>,
{
    write_atomic(path, |buf| {
        writeln!(buf, "# {kind} v{SCHEMA_VERSION}").map_err(|e| AppError::io(path, e))?;
        let mut w = csv::Writer::from_writer(buf);
        for row in rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| AppError::io(path, e))?;
        Ok(())
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |buf| {
        serde_json::to_writer_pretty(&mut *buf, value)?;
        buf.push(b'\n');
        Ok(())
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, |buf| {
        buf.extend_from_slice(text.as_bytes());
        Ok(())
    })
}

/// Writes a match log in the ingestible schema; floats keep their exact bits.
pub fn write_matches(path: &Path, records: &[MatchRecord], skills: Option<&[(f64, f64)]>) -> Result<()> {
    if let Some(s) = skills {
        if s.len() != records.len() {
            return Err(AppError::Config(format!(
                "{} skill pairs for {} matches",
                s.len(),
                records.len()
            )));
        }
    }
    let rows = records.iter().enumerate().map(|(i, m)| MatchCsvRow {
        date: m.timestamp.clone(),
        home_id: m.home.0.clone(),
        away_id: m.away.0.clone(),
        outcome: Some(m.outcome),
        home_points: None,
        away_points: None,
        neutral: u8::from(!m.home_venue),
        step_k: m.step,
        home_skill: skills.map(|s| s[i].0),
        away_skill: skills.map(|s| s[i].1),
    });
    write_csv(path, MATCHES_KIND, rows)
}

#[derive(Serialize)]
struct SnapshotRow<'a> {
    player_id: &'a str,
    skill: f64,
    n_matches: u64,
    mean_step: f64,
}

/// Columns: `player_id, skill, n_matches, mean_step`.
pub fn write_snapshot(path: &Path, snapshot: &SkillSnapshot) -> Result<()> {
    let rows = snapshot.entries.iter().map(|e| SnapshotRow {
        player_id: e.player_id.as_str(),
        skill: e.skill,
        n_matches: e.n_matches,
        mean_step: e.mean_step,
    });
    write_csv(path, "gelo-snapshot", rows)
}

#[derive(Serialize)]
struct TrajectoryRow<'a> {
    t: usize,
    player_id: &'a str,
    skill: f64,
}

/// Long format, columns `t, player_id, skill`, one row per recorded point
/// and registered player.
pub fn write_trajectory(path: &Path, trajectory: &Trajectory) -> Result<()> {
    let rows = trajectory.points.iter().flat_map(|p| {
        p.skills.iter().enumerate().map(move |(i, &skill)| TrajectoryRow {
            t: p.t,
            player_id: trajectory.players[i].as_str(),
            skill,
        })
    });
    write_csv(path, "gelo-trajectory", rows)
}

#[derive(Serialize)]
struct DiffRow<'a> {
    t: usize,
    home_id: &'a str,
    away_id: &'a str,
    outcome: usize,
    neutral: u8,
    diff: f64,
}

/// Pre-match skill differences, columns `t, home_id, away_id, outcome,
/// neutral, diff`.
pub fn write_diffs(path: &Path, records: &[MatchRecord], diffs: &[f64]) -> Result<()> {
    let rows = records.iter().zip(diffs).map(|(m, &diff)| DiffRow {
        t: m.t,
        home_id: m.home.as_str(),
        away_id: m.away.as_str(),
        outcome: m.outcome,
        neutral: u8::from(!m.home_venue),
        diff,
    });
    write_csv(path, "gelo-diffs", rows)
}

#[derive(Serialize)]
struct ConvergenceRow<'a> {
    player_id: &'a str,
    n_matches: u64,
    mean_step: f64,
    tau: f64,
    lambda: f64,
}

/// Columns `player_id, n_matches, mean_step, tau, lambda`.
pub fn write_convergence(path: &Path, report: &ConvergenceReport) -> Result<()> {
    let rows = report.players.iter().map(|p| ConvergenceRow {
        player_id: p.player_id.as_str(),
        n_matches: p.n_matches,
        mean_step: p.mean_step,
        tau: p.tau,
        lambda: p.lambda,
    });
    write_csv(path, "gelo-convergence", rows)
}

#[derive(Serialize)]
struct LambdaRow {
    lambda: f64,
    fraction: f64,
}

/// Empirical CDF of `Λ`, columns `lambda, fraction` (share of players at
/// or below `lambda`).
pub fn write_lambda_cdf(path: &Path, report: &ConvergenceReport) -> Result<()> {
    let rows = report
        .lambda_distribution()
        .into_iter()
        .map(|(lambda, fraction)| LambdaRow { lambda, fraction });
    write_csv(path, "gelo-lambda-cdf", rows)
}

#[derive(Serialize)]
struct GammaRow {
    t: usize,
    gamma: f64,
    beta: f64,
}

/// Columns `t, gamma, beta`; `t` counts from `offset`.
pub fn write_gamma_trace(path: &Path, trace: &GammaTrace, offset: usize) -> Result<()> {
    let rows = trace.gammas.iter().enumerate().map(|(i, &gamma)| GammaRow {
        t: offset + i,
        gamma,
        beta: 1.0 / gamma,
    });
    write_csv(path, "gelo-gamma-trace", rows)
}

/// Writes arbitrary serializable rows under a versioned header.
pub fn write_rows<S: Serialize>(path: &Path, kind: &str, rows: impl IntoIterator<Item = S>) -> Result<()> {
    write_csv(path, kind, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goal_rule_levels() {
        let r = DiscretizationRule::goal_difference_5();
        let got: Vec<usize> = (-5..=5).map(|g| r.outcome(g)).collect();
        assert_eq!(got, vec![0, 0, 0, 1, 1, 2, 3, 3, 4, 4, 4]);
        assert_eq!(r.levels(), 5);
    }

    #[test]
    fn asymmetric_odd_rule_rejected() {
        assert!(DiscretizationRule::new(vec![-1, 0, 1, 3]).is_err());
        assert!(DiscretizationRule::new(vec![1, 0]).is_err());
        assert!(DiscretizationRule::new(vec![1]).is_ok());
    }

    #[test]
    fn version_line() {
        let p = Path::new("x.csv");
        assert!(check_version(p, "# gelo-matches v1.0", MATCHES_KIND).is_ok());
        assert!(check_version(p, "# gelo-matches v1.7", MATCHES_KIND).is_ok());
        assert!(check_version(p, "# gelo-matches v2.0", MATCHES_KIND).is_err());
        assert!(check_version(p, "date,home_id", MATCHES_KIND).is_err());
    }
}

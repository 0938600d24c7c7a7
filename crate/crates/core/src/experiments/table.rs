use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;

use super::ExperimentKind;

pub const WALL_TIME: &str = "wall_time";

/// A CSV table with a versioned schema comment line.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(schema: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            schema: schema.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    fn render(&self, skip: Option<usize>) -> String {
        let mut out = format!("# {}\n", self.schema);
        let keep = |i: &usize| Some(*i) != skip;
        let line = |cells: &[String]| {
            cells
                .iter()
                .enumerate()
                .filter(|(i, _)| keep(i))
                .map(|(_, c)| c.as_str())
                .collect::<Vec<_>>()
                .join(",")
        };
        let _ = writeln!(out, "{}", line(&self.columns));
        for r in &self.rows {
            let _ = writeln!(out, "{}", line(r));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        self.render(None)
    }

    /// The CSV without the wall-time column: the part covered by the
    /// determinism guarantee.
    pub fn deterministic_csv(&self) -> String {
        self.render(self.columns.iter().position(|c| c == WALL_TIME))
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub kind: ExperimentKind,
    pub trials: Table,
    pub summary: Table,
}

impl ExperimentOutput {
    pub fn trials_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}_trials.csv", self.kind.name()))
    }

    pub fn summary_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}_summary.csv", self.kind.name()))
    }

    /// Writes `<kind>_trials.csv` and `<kind>_summary.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let (t, s) = (self.trials_path(dir), self.summary_path(dir));
        std::fs::write(&t, self.trials.to_csv())?;
        std::fs::write(&s, self.summary.to_csv())?;
        Ok((t, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rendering_and_wall_time_exclusion() {
        let mut t = Table::new("demo v1", &["a", WALL_TIME, "b"]);
        t.push(vec!["1".into(), "0.5".into(), "x".into()]);
        assert_eq!(t.to_csv(), "# demo v1\na,wall_time,b\n1,0.5,x\n");
        assert_eq!(t.deterministic_csv(), "# demo v1\na,b\n1,x\n");
        assert_eq!(t.column("b").unwrap(), vec!["x"]);
        assert!(t.column("c").is_none());
    }
}

//! Versioned CSV tables. The first line names the format version and the
//! table kind; the second holds the column names.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::orbit::CountRecord;

pub const CSV_VERSION: &str = "orbitcount-csv v1";
pub const COUNT_COLUMNS: [&str; 4] = ["L", "count_orbit", "count_group", "saturated"];

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub kind: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(kind: &str, columns: &[&str]) -> Self {
        CsvTable {
            kind: kind.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Csv(format!("row has {} fields, table has {}", row.len(), self.columns.len())));
        }
        if let Some(bad) = row.iter().find(|f| f.contains([',', '\n', '"'])) {
            return Err(Error::Csv(format!("field `{bad}` needs quoting")));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {CSV_VERSION} {}", self.kind);
        let _ = writeln!(out, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let head = lines.next().ok_or_else(|| Error::Csv("empty file".into()))?;
        let kind = head
            .strip_prefix("# ")
            .and_then(|h| h.strip_prefix(CSV_VERSION))
            .and_then(|k| k.strip_prefix(' '))
            .ok_or_else(|| Error::Csv(format!("unsupported header `{head}`")))?;
        let columns: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::Csv("missing column names".into()))?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut table = CsvTable {
            kind: kind.to_string(),
            columns,
            rows: Vec::new(),
        };
        for line in lines.filter(|l| !l.is_empty()) {
            table.push(line.split(',').map(str::to_string).collect())?;
        }
        Ok(table)
    }
}

/// Count records as a table with the standard columns.
pub fn count_table(kind: &str, records: &[CountRecord]) -> CsvTable {
    let mut t = CsvTable::new(kind, &COUNT_COLUMNS);
    for r in records {
        t.rows.push(vec![
            r.l.to_string(),
            r.count_orbit.to_string(),
            r.count_group.map(|g| g.to_string()).unwrap_or_default(),
            r.saturated.to_string(),
        ]);
    }
    t
}

/// `(L, count_orbit, count_group, saturated)` read back from a count table.
pub fn parse_counts(table: &CsvTable) -> Result<Vec<(f64, u64, Option<u64>, bool)>> {
    if table.columns != COUNT_COLUMNS {
        return Err(Error::Csv(format!("unexpected columns {:?}", table.columns)));
    }
    let num = |s: &str| s.parse::<u64>().map_err(|e| Error::Csv(format!("`{s}`: {e}")));
    table
        .rows
        .iter()
        .map(|r| {
            Ok((
                r[0].parse().map_err(|e| Error::Csv(format!("`{}`: {e}", r[0])))?,
                num(&r[1])?,
                if r[2].is_empty() { None } else { Some(num(&r[2])?) },
                r[3].parse().map_err(|e| Error::Csv(format!("`{}`: {e}", r[3])))?,
            ))
        })
        .collect()
}

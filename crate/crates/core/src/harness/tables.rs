//! CSV renderings of the published value grids, plus the golden copies
//! they are diffed against.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::hard_card::{card_grid, CardHardParams};
use crate::hard_matroid::f_level;

pub const GOLDEN_TABLE2: &str = include_str!("../../golden/table2.csv");
pub const GOLDEN_TABLE3: &str = include_str!("../../golden/table3.csv");
pub const GOLDEN_TABLE4: &str = include_str!("../../golden/table4.csv");

/// Which grid to render.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Table {
    /// Cardinality grid without the purple element, `K = h = 4`, `n = 14`.
    CardinalityGrid = 2,
    /// Matroid grid for `K = 3` without the last-class element.
    MatroidWithoutLast = 3,
    /// Matroid grid for `K = 3` with the last-class element.
    MatroidWithLast = 4,
}

impl Table {
    pub const ALL: [Table; 3] = [Table::CardinalityGrid, Table::MatroidWithoutLast, Table::MatroidWithLast];

    pub fn from_number(which: u32) -> Result<Self> {
        match which {
            2 => Ok(Table::CardinalityGrid),
            3 => Ok(Table::MatroidWithoutLast),
            4 => Ok(Table::MatroidWithLast),
            _ => Err(Error::InvalidParams(format!("no table {which}; expected 2, 3 or 4"))),
        }
    }

    pub fn number(self) -> u32 {
        self as u32
    }

    pub fn golden(self) -> &'static str {
        match self {
            Table::CardinalityGrid => GOLDEN_TABLE2,
            Table::MatroidWithoutLast => GOLDEN_TABLE3,
            Table::MatroidWithLast => GOLDEN_TABLE4,
        }
    }
}

/// Renders a grid as CSV with a header row and `\n` line endings.
pub fn emit_table(which: Table) -> String {
    match which {
        Table::CardinalityGrid => card_table(),
        Table::MatroidWithoutLast => matroid_table(0),
        Table::MatroidWithLast => matroid_table(1),
    }
}

fn card_table() -> String {
    let params = CardHardParams::new(14, 4, 4).expect("fixed parameters are valid");
    let mut out = String::new();
    let mut header = vec!["b".to_string()];
    for r in 0..params.k {
        header.push(format!("f_r{r}"));
        if r + 1 < params.k {
            header.push(format!("delta_r{r}"));
        }
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in card_grid(&params) {
        let mut cells = vec![row.b.to_string()];
        for r in 0..params.k {
            cells.push(row.f[r].to_string());
            if let Some(d) = row.delta_r.get(r) {
                cells.push(d.as_ref().map_or_else(|| "---".to_string(), |d| d.to_string()));
            }
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Blocks ordered `(r₁, r₂) = (0,0), (1,0), (0,1), (1,1)`; rows `b̂₁ = 0..=4`,
/// columns `b̂₂ = 0..=2`.
fn matroid_table(r3: u8) -> String {
    let mut out = String::from("r1,r2,b1,b2_0,b2_1,b2_2\n");
    for (r1, r2) in [(0u8, 0u8), (1, 0), (0, 1), (1, 1)] {
        for b1 in 0..=4usize {
            write!(out, "{r1},{r2},{b1}").expect("writing to a String");
            for b2 in 0..=2usize {
                let v = f_level(3, &[r1, r2, r3], &[b1, b2, 0]).expect("grid profiles are valid");
                write!(out, ",{v}").expect("writing to a String");
            }
            out.push('\n');
        }
    }
    out
}

/// One differing cell between an emitted table and its golden copy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellMismatch {
    pub line: usize,
    pub column: usize,
    pub expected: String,
    pub got: String,
}

/// Cell-by-cell comparison; also reports missing or extra lines as cells
/// with an empty side.
pub fn diff_against_golden(which: Table) -> Vec<CellMismatch> {
    diff_csv(which.golden(), &emit_table(which))
}

pub fn diff_csv(expected: &str, got: &str) -> Vec<CellMismatch> {
    let e: Vec<&str> = expected.lines().collect();
    let g: Vec<&str> = got.lines().collect();
    let mut out = Vec::new();
    for line in 0..e.len().max(g.len()) {
        let ec: Vec<&str> = e.get(line).map_or_else(Vec::new, |l| l.split(',').collect());
        let gc: Vec<&str> = g.get(line).map_or_else(Vec::new, |l| l.split(',').collect());
        for column in 0..ec.len().max(gc.len()) {
            let (x, y) = (ec.get(column).copied().unwrap_or(""), gc.get(column).copied().unwrap_or(""));
            if x != y {
                out.push(CellMismatch { line: line + 1, column: column + 1, expected: x.into(), got: y.into() });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(csv: &str, line: usize, column: usize) -> String {
        csv.lines().nth(line).unwrap().split(',').nth(column).unwrap().to_string()
    }

    #[test]
    fn spot_cells() {
        // r₁=r₂=0, b̂₁=2, b̂₂=1
        assert_eq!(cell(&emit_table(Table::MatroidWithoutLast), 3, 4), "92");
        // r₁=1, r₂=0, b̂₁=1, b̂₂=0
        assert_eq!(cell(&emit_table(Table::MatroidWithLast), 7, 3), "96");
        // b=5, r=1
        assert_eq!(cell(&emit_table(Table::CardinalityGrid), 6, 3), "27");
    }

    #[test]
    fn golden_copies_are_well_formed() {
        for t in Table::ALL {
            let lines: Vec<_> = t.golden().lines().collect();
            let width = lines[0].split(',').count();
            assert!(lines.iter().all(|l| l.split(',').count() == width));
        }
        assert_eq!(GOLDEN_TABLE3.lines().count(), 21);
        assert_eq!(GOLDEN_TABLE2.lines().count(), 12);
    }

    #[test]
    fn diff_reports_cells() {
        let d = diff_csv("a,b\n1,2\n", "a,b\n1,3\n4\n");
        assert_eq!(d.len(), 2);
        assert_eq!(d[0], CellMismatch { line: 2, column: 2, expected: "2".into(), got: "3".into() });
        assert_eq!(d[1].line, 3);
    }

    #[test]
    fn unknown_table() {
        assert!(Table::from_number(5).is_err());
        assert_eq!(Table::from_number(3).unwrap().number(), 3);
    }
}

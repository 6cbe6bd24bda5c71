use std::fmt::Write as _;

use crate::ensemble::SelectionMap;
use crate::eval::{mean_iou, ClassScoreTable, ClassScores};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TableFormat {
    /// Aligned columns, scores as percentages with one decimal.
    #[default]
    Text,
    /// Comma-separated, scores as fractions with four decimals.
    Csv,
}

/// Marker appended to a component's score where it won the class.
pub const WINNER_MARK: &str = "*";
/// Marker appended to an ensemble score that reaches the column maximum.
pub const BEST_MARK: &str = "**";

/// Renders one row per component, plus an `ensemble` row when `ensemble`
/// scores are given.
///
/// In component rows, the component the selection chose for a class is
/// marked with `*`; background and mIoU columns mark their argmax (first
/// listed on ties). In the ensemble row, cells that reach the maximum of
/// their column over all rows are marked with `**`.
pub fn render_score_table(
    table: &ClassScoreTable,
    selection: &SelectionMap,
    ensemble: Option<&ClassScores>,
    format: TableFormat,
) -> String {
    let c = table.class_count();
    let mut header = vec!["component".to_owned(), "bkg".to_owned()];
    header.extend((1..c).map(|k| table.class_label(k)));
    header.push("mIoU".to_owned());

    // Column values: classes 0..c, then mIoU.
    let with_mean = |row: &ClassScores| -> Vec<Option<f64>> {
        let mut v: Vec<Option<f64>> = (0..c).map(|k| row.get(k)).collect();
        v.push(mean_iou(row, true).ok());
        v
    };
    let comp_values: Vec<Vec<Option<f64>>> = table.rows().iter().map(with_mean).collect();
    let ens_values = ensemble.map(with_mean);

    let argmax = |col: usize| -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (k, row) in comp_values.iter().enumerate() {
            if let Some(v) = row[col] {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((k, v));
                }
            }
        }
        best.map(|(k, _)| k)
    };
    let winners: Vec<Option<usize>> = (0..=c)
        .map(|col| {
            if (1..c).contains(&col) {
                selection
                    .component_for(col as u8)
                    .and_then(|name| table.components.iter().position(|n| n == name))
            } else {
                argmax(col)
            }
        })
        .collect();

    let fmt = |v: Option<f64>| match (v, format) {
        (None, _) => String::new(),
        (Some(x), TableFormat::Text) => format!("{:.1}", x * 100.0),
        (Some(x), TableFormat::Csv) => format!("{x:.4}"),
    };

    let mut rows: Vec<Vec<String>> = vec![header];
    for (k, name) in table.components.iter().enumerate() {
        let mut r = vec![name.clone()];
        for (col, v) in comp_values[k].iter().enumerate() {
            let mark = if v.is_some() && winners[col] == Some(k) { WINNER_MARK } else { "" };
            r.push(format!("{}{mark}", fmt(*v)));
        }
        rows.push(r);
    }
    if let Some(ens) = &ens_values {
        let mut r = vec!["ensemble".to_owned()];
        for (col, v) in ens.iter().enumerate() {
            let top = comp_values
                .iter()
                .filter_map(|row| row[col])
                .fold(f64::NEG_INFINITY, f64::max);
            let mark = match v {
                Some(x) if *x >= top => BEST_MARK,
                _ => "",
            };
            r.push(format!("{}{mark}", fmt(*v)));
        }
        rows.push(r);
    }

    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.write_record(r).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
        }
        TableFormat::Text => align(&rows),
    }
}

/// One row per foreground class, one column per component, a check where
/// the selection picked that component, and a final row of win counts.
///
/// Components named by the selection but missing from `components` get
/// their own trailing column, so every class row has exactly one check.
pub fn render_checkmark_table(selection: &SelectionMap, components: &[impl AsRef<str>]) -> String {
    let mut cols: Vec<String> = components.iter().map(|c| c.as_ref().to_owned()).collect();
    for e in selection.entries() {
        if !cols.contains(&e.component) {
            cols.push(e.component.clone());
        }
    }
    let mut rows = vec![std::iter::once("class".to_owned()).chain(cols.iter().cloned()).collect::<Vec<_>>()];
    let mut wins = vec![0usize; cols.len()];
    for e in selection.entries() {
        let mut r = vec![e.class_name.clone()];
        for (k, col) in cols.iter().enumerate() {
            if *col == e.component {
                wins[k] += 1;
                r.push("✓".to_owned());
            } else {
                r.push("✗".to_owned());
            }
        }
        rows.push(r);
    }
    rows.push(
        std::iter::once("wins".to_owned())
            .chain(wins.iter().map(usize::to_string))
            .collect(),
    );
    align(&rows)
}

fn align(rows: &[Vec<String>]) -> String {
    let ncols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..ncols)
        .map(|i| {
            rows.iter()
                .filter_map(|r| r.get(i))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in rows {
        let mut line = String::new();
        for (i, cell) in r.iter().enumerate() {
            let pad = widths[i] - cell.chars().count();
            if i == 0 {
                let _ = write!(line, "{cell}{}", " ".repeat(pad));
            } else {
                let _ = write!(line, "  {}{cell}", " ".repeat(pad));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{select_best, SelectionEntry};
    use crate::eval::ScoringMode;

    fn table(components: &[&str], names: Vec<String>, rows: Vec<Vec<f64>>) -> ClassScoreTable {
        ClassScoreTable::new(
            ScoringMode::Accumulated,
            names,
            components.iter().map(|s| s.to_string()).collect(),
            rows.into_iter()
                .map(|r| ClassScores::new(r.into_iter().map(Some).collect()))
                .collect(),
        )
    }

    #[test]
    fn single_component_marks_every_cell() {
        let t = table(&["A"], vec![], vec![vec![0.9, 0.5, 0.25]]);
        let s = select_best(&t).unwrap();
        let text = render_score_table(&t, &s, None, TableFormat::Csv);
        assert_eq!(text, "component,bkg,1,2,mIoU\nA,0.9000*,0.5000*,0.2500*,0.5500*\n");
    }

    #[test]
    fn ensemble_row_gets_best_marks() {
        let names = vec!["background".into(), "cat".into(), "dog".into()];
        let t = table(&["A", "B"], names, vec![vec![0.8, 0.9, 0.1], vec![0.85, 0.2, 0.7]]);
        let s = select_best(&t).unwrap();
        let ens = ClassScores::new(vec![Some(0.9), Some(0.9), Some(0.6)]);
        let text = render_score_table(&t, &s, Some(&ens), TableFormat::Text);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("component"));
        assert!(lines[1].contains("90.0*") && !lines[1].contains("80.0*"));
        assert!(lines[2].contains("85.0*") && lines[2].contains("70.0*"));
        assert!(lines[3].contains("90.0**"));
        assert!(lines[3].contains("60.0") && !lines[3].contains("60.0*"));
    }

    #[test]
    fn checkmarks_one_per_row() {
        let s = SelectionMap::new(vec![
            SelectionEntry { class_id: 1, class_name: "cat".into(), component: "B".into(), score: 0.5 },
            SelectionEntry { class_id: 2, class_name: "dog".into(), component: "Z".into(), score: 0.5 },
        ])
        .unwrap();
        let text = render_checkmark_table(&s, &["A", "B"]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0].split_whitespace().collect::<Vec<_>>(), ["class", "A", "B", "Z"]);
        for l in &lines[1..3] {
            assert_eq!(l.matches('✓').count(), 1);
        }
        assert_eq!(lines[3].split_whitespace().collect::<Vec<_>>(), ["wins", "0", "1", "1"]);
    }

    #[test]
    fn single_class_single_row() {
        let s = SelectionMap::new(vec![SelectionEntry {
            class_id: 1,
            class_name: "cat".into(),
            component: "A".into(),
            score: 1.0,
        }])
        .unwrap();
        let text = render_checkmark_table(&s, &["A"]);
        assert_eq!(text, "class  A\ncat    ✓\nwins   1\n");
    }
}

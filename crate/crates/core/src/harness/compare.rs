//! Side-by-side comparison of the two modes over a corpus.

use super::report::ExplorationReport;
use crate::strategy::Mode;
use std::collections::BTreeMap;
use std::fmt::Write;

/// Per-mode numbers of one case.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cell {
    pub tentative: f64,
    pub valid: f64,
    pub steps: f64,
    pub elapsed_ms: f64,
}

impl Cell {
    fn of(r: &ExplorationReport) -> Cell {
        Cell {
            tentative: r.tentative as f64,
            valid: r.valid as f64,
            steps: r.steps as f64,
            elapsed_ms: r.elapsed_ms as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub label: String,
    pub template: Cell,
    pub meta: Cell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<Row>,
    pub total: Row,
    pub average: Row,
    pub median: Row,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn footer(label: &str, rows: &[Row], agg: impl Fn(Vec<f64>) -> f64) -> Row {
    let col = |f: &dyn Fn(&Row) -> f64| agg(rows.iter().map(f).collect());
    Row {
        label: label.to_string(),
        template: Cell {
            tentative: col(&|r| r.template.tentative),
            valid: col(&|r| r.template.valid),
            steps: col(&|r| r.template.steps),
            elapsed_ms: col(&|r| r.template.elapsed_ms),
        },
        meta: Cell {
            tentative: col(&|r| r.meta.tentative),
            valid: col(&|r| r.meta.valid),
            steps: col(&|r| r.meta.steps),
            elapsed_ms: col(&|r| r.meta.elapsed_ms),
        },
    }
}

/// Pairs reports by bug id (cases lacking either mode are skipped) and
/// computes the footer rows.
pub fn compare(reports: &[ExplorationReport]) -> Comparison {
    let mut by_bug: BTreeMap<&str, (Option<Cell>, Option<Cell>)> = BTreeMap::new();
    for r in reports {
        let e = by_bug.entry(&r.bug_id).or_default();
        match r.mode {
            Mode::Template => e.0 = Some(Cell::of(r)),
            Mode::Meta => e.1 = Some(Cell::of(r)),
        }
    }
    let rows: Vec<Row> = by_bug
        .into_iter()
        .filter_map(|(bug, cells)| match cells {
            (Some(template), Some(meta)) => Some(Row {
                label: bug.to_string(),
                template,
                meta,
            }),
            _ => None,
        })
        .collect();
    let n = rows.len().max(1) as f64;
    Comparison {
        total: footer("Total", &rows, |xs| xs.iter().sum()),
        average: footer("Average", &rows, |xs| xs.iter().sum::<f64>() / n),
        median: footer("Median", &rows, median),
        rows,
    }
}

impl Comparison {
    /// All rows with the number of decimals they are shown with.
    fn lines(&self) -> Vec<(&Row, usize)> {
        let mut out: Vec<(&Row, usize)> = self.rows.iter().map(|r| (r, 0)).collect();
        out.extend([(&self.total, 0), (&self.average, 2), (&self.median, 2)]);
        out
    }

    /// Aligned text table; `time` adds wall-clock columns.
    pub fn render(&self, time: bool) -> String {
        let fmt = |x: f64, d: usize| format!("{x:.d$}");
        let mut head = vec!["bug", "tmpl tentative", "tmpl valid", "tmpl steps"];
        if time {
            head.push("tmpl ms");
        }
        head.extend(["meta tentative", "meta valid", "meta steps"]);
        if time {
            head.push("meta ms");
        }
        let mut table: Vec<Vec<String>> = vec![head.iter().map(|s| s.to_string()).collect()];
        for (r, d) in self.lines() {
            let mut line = vec![r.label.clone()];
            for c in [&r.template, &r.meta] {
                line.extend([fmt(c.tentative, d), fmt(c.valid, d), fmt(c.steps, d)]);
                if time {
                    line.push(fmt(c.elapsed_ms, d));
                }
            }
            table.push(line);
        }
        let widths: Vec<usize> = (0..table[0].len())
            .map(|i| table.iter().map(|l| l[i].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, line) in table.iter().enumerate() {
            if i == table.len() - 3 {
                let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
                writeln!(out, "{}", rule.join("  ")).unwrap();
            }
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(j, (c, w))| if j == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "bug",
            "template_tentative",
            "template_valid",
            "template_steps",
            "template_ms",
            "meta_tentative",
            "meta_valid",
            "meta_steps",
            "meta_ms",
        ])
        .unwrap();
        for (r, d) in self.lines() {
            let mut rec = vec![r.label.clone()];
            for c in [&r.template, &r.meta] {
                rec.extend([c.tentative, c.valid, c.steps, c.elapsed_ms].map(|x| format!("{x:.d$}")));
            }
            w.write_record(&rec).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

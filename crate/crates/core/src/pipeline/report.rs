use std::fmt::Write as _;

/// One line of the evaluation table; `None` prints as `-`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub system: String,
    pub dev: Option<f64>,
    pub test: Option<f64>,
}

/// UAR table with `System`, `Dev` and `Test` columns, percentages to two
/// decimals.
pub fn format_table(rows: &[ReportRow]) -> String {
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |u| format!("{u:.2}"));
    let mut out = format!("{:<16}{:>8}{:>8}\n", "System", "Dev", "Test");
    for r in rows {
        writeln!(out, "{:<16}{:>8}{:>8}", r.system, cell(r.dev), cell(r.test)).expect("string write");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let t = format_table(&[
            ReportRow {
                system: "LFCC".into(),
                dev: Some(100.0),
                test: None,
            },
            ReportRow {
                system: "Score Fusion".into(),
                dev: Some(66.2449),
                test: Some(68.8),
            },
        ]);
        assert_eq!(
            t,
            "System               Dev    Test\n\
             LFCC              100.00       -\n\
             Score Fusion       66.24   68.80\n"
        );
    }
}

//! Batch survival forecasts: one firm per CSV row in, one report row out.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::bankruptcy::{report, BankruptcyReport, SweepPoint};
use crate::error::{Error, Result};
use crate::firm_model::{FirmParams, Param};

use super::csv_out::format_number;

pub const INPUT_HEADER: [&str; 10] = ["firm_id", "a", "b", "A", "B", "h0", "m", "c", "G", "q0"];
pub const OUTPUT_HEADER: [&str; 5] = [
    "firm_id",
    "q_star",
    "regime_class",
    "survival_time",
    "residual",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PortfolioSummary {
    pub rows: usize,
    pub errors: usize,
}

fn parse_row(record: &csv::StringRecord) -> std::result::Result<FirmParams, String> {
    if record.len() != INPUT_HEADER.len() {
        return Err(format!(
            "expected {} fields, got {}",
            INPUT_HEADER.len(),
            record.len()
        ));
    }
    let mut p = FirmParams::untrended(0.0, 0.0, 0.0, 0.0);
    for (name, field) in INPUT_HEADER.iter().zip(record.iter()).skip(1) {
        let v: f64 = field
            .trim()
            .parse()
            .map_err(|_| format!("{name}: `{field}` is not a number"))?;
        let param: Param = name.parse().expect("header names are parameter symbols");
        p.set(param, v);
    }
    p.validate().map_err(|e| e.to_string())?;
    Ok(p)
}

/// The regime column doubles as the error column for failed rows.
fn output_row(r: &BankruptcyReport) -> [String; 5] {
    let num = |x: Option<f64>| x.map(format_number).unwrap_or_default();
    let class = match &r.error {
        Some(e) => format!("error: {e}"),
        None => r.regime_class.to_string(),
    };
    [
        r.firm_id.clone(),
        num(r.q_star),
        class,
        num(r.survival_time),
        num(r.residual),
    ]
}

fn error_row(firm_id: &str, message: &str) -> [String; 5] {
    [
        firm_id.to_string(),
        String::new(),
        format!("error: {message}"),
        String::new(),
        String::new(),
    ]
}

/// Every input row yields exactly one output row, in input order. Rows are
/// evaluated in parallel; bad rows become error rows.
pub fn run_portfolio<R: Read, W: Write>(input: R, output: W) -> Result<PortfolioSummary> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(INPUT_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", INPUT_HEADER.join(",")),
        });
    }
    let records: Vec<std::result::Result<csv::StringRecord, String>> = rdr
        .records()
        .map(|r| r.map_err(|e| e.to_string()))
        .collect();

    let rows: Vec<([String; 5], bool)> = records
        .par_iter()
        .enumerate()
        .map(|(i, rec)| {
            let fallback_id = format!("row{}", i + 1);
            let rec = match rec {
                Ok(r) => r,
                Err(e) => return (error_row(&fallback_id, e), true),
            };
            let id = rec.get(0).filter(|s| !s.is_empty()).unwrap_or(&fallback_id);
            match parse_row(rec) {
                Ok(p) => {
                    let r = report(id, &p, false);
                    let failed = r.error.is_some();
                    (output_row(&r), failed)
                }
                Err(e) => (error_row(id, &e), true),
            }
        })
        .collect();

    let mut wtr = csv::Writer::from_writer(output);
    wtr.write_record(OUTPUT_HEADER)?;
    let mut summary = PortfolioSummary::default();
    for (row, failed) in &rows {
        wtr.write_record(row)?;
        summary.rows += 1;
        summary.errors += usize::from(*failed);
    }
    wtr.flush()?;
    Ok(summary)
}

/// Sweep results with the varied parameters as leading columns.
pub fn write_sweep<W: Write>(varied: &[Param], points: &[SweepPoint], output: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(output);
    let mut header: Vec<String> = vec!["index".into()];
    header.extend(varied.iter().map(|p| p.to_string()));
    header.extend(OUTPUT_HEADER.iter().skip(1).map(|s| s.to_string()));
    let sens: Vec<Param> = points
        .first()
        .map(|p| p.report.sensitivities.keys().copied().collect())
        .unwrap_or_default();
    header.extend(sens.iter().map(|p| format!("dT/d{p}")));
    wtr.write_record(&header)?;
    for pt in points {
        let mut row = vec![pt.index.to_string()];
        row.extend(varied.iter().map(|p| format_number(pt.params.get(*p))));
        row.extend(output_row(&pt.report).into_iter().skip(1));
        for p in &sens {
            row.push(match pt.report.sensitivities.get(p) {
                Some(Ok(g)) => format_number(*g),
                _ => String::new(),
            });
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Single-firm report as `field,value` lines.
pub fn write_report<W: Write>(r: &BankruptcyReport, output: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(output);
    let num = |x: Option<f64>| x.map(format_number).unwrap_or_default();
    wtr.write_record(["field", "value"])?;
    wtr.write_record(["regime_class", r.regime_class.as_str()])?;
    wtr.write_record(["q_star", &num(r.q_star)])?;
    wtr.write_record(["survival_time", &num(r.survival_time)])?;
    wtr.write_record(["residual", &num(r.residual)])?;
    for (p, g) in &r.sensitivities {
        let value = match g {
            Ok(g) => format_number(*g),
            Err(e) => format!("error: {e}"),
        };
        wtr.write_record([format!("dT/d{p}"), value])?;
    }
    if let Some(e) = &r.error {
        wtr.write_record(["error", e])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(input: &str) -> (String, PortfolioSummary) {
        let mut out = Vec::new();
        let s = run_portfolio(input.as_bytes(), &mut out).unwrap();
        (String::from_utf8(out).unwrap(), s)
    }

    #[test]
    fn mixed_portfolio() {
        let input = "firm_id,a,b,A,B,h0,m,c,G,q0\n\
                     stable,100,0,20,0.08,0,2,0,0,900\n\
                     falling,100,0,20,0.08,0,2,-4,0,1000\n\
                     broken,0,0,20,0.08,0,2,0,0,900\n\
                     short,1,2\n\
                     text,abc,0,20,0.08,0,2,0,0,900\n";
        let (out, summary) = run(input);
        assert_eq!(summary, PortfolioSummary { rows: 5, errors: 3 });
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(
            lines[0],
            "firm_id,q_star,regime_class,survival_time,residual"
        );
        assert_eq!(lines[1], "stable,1000,stable_equilibrium,,");
        let f: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(&f[..3], ["falling", "1000", "declining"]);
        let t: f64 = f[3].parse().unwrap();
        assert!(t > 39.0 && t < 40.0);
        assert_eq!(lines[3], "broken,,error: a > 0 violated,,");
        assert!(lines[4].starts_with("short,,\"error: expected 10 fields, got 3\""));
        assert!(lines[5].starts_with("text,,error: a:"));
    }

    #[test]
    fn wrong_header_is_fatal() {
        let mut out = Vec::new();
        assert!(run_portfolio("id,a\n".as_bytes(), &mut out).is_err());
    }
}

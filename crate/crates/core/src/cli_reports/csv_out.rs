use std::io::{BufWriter, Write};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

pub const HEADER: [&str; 7] = ["t", "q", "p", "C", "Pi", "Q", "series"];
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `%.12g`-style formatting: 12 significant digits, trailing zeros trimmed,
/// exponent notation only for very large or small magnitudes.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -5 || exp >= SIGNIFICANT_DIGITS as i32 {
        format!("{}e{exp}", trim(mantissa))
    } else {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// One row per sample per series; each series' events follow its rows as
/// `# event,<t>,<kind>` comment lines.
pub fn emit_csv<W: Write>(trajectories: &[Trajectory], out: W) -> Result<()> {
    if trajectories.is_empty() {
        return Err(Error::InvalidArgument("no trajectories to write".into()));
    }
    let mut out = BufWriter::new(out);
    writeln!(out, "{}", HEADER.join(","))?;
    for traj in trajectories {
        let label = quote(&traj.label);
        for s in &traj.samples {
            writeln!(
                out,
                "{},{},{},{},{},{},{label}",
                format_number(s.t),
                format_number(s.q),
                opt(s.price),
                opt(s.cost),
                opt(s.profit),
                format_number(s.accumulated),
            )?;
        }
        for e in &traj.events {
            writeln!(out, "# event,{},{}", format_number(e.t), e.kind)?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::closed_form_trajectory;
    use crate::firm_model::FirmParams;

    #[test]
    fn number_format() {
        assert_eq!(format_number(900.0), "900");
        assert_eq!(format_number(0.08), "0.08");
        assert_eq!(format_number(-20.0), "-20");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(9.591581091193483), "9.59158109119");
        assert_eq!(format_number(1.5e-7), "1.5e-7");
        assert_eq!(format_number(2.5e13), "2.5e13");
        assert_eq!(format_number(123456789012.4), "123456789012");
    }

    #[test]
    fn constant_series() {
        let p = FirmParams::untrended(100.0, 20.0, 0.08, 2.0);
        let mut t = closed_form_trajectory(&p, 1000.0, (0.0, 1.0), 0.25).unwrap();
        t.label = "flat".into();
        t.enrich(&p, None);
        let mut buf = Vec::new();
        emit_csv(&[t], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,q,p,C,Pi,Q,series");
        assert_eq!(lines[1], "0,1000,100,60000,40000,0,flat");
        assert!(lines[1..6]
            .iter()
            .all(|l| l.split(',').nth(1) == Some("1000")));
        assert_eq!(lines[6], "# event,1,horizon");
        assert!(emit_csv(&[], Vec::new()).is_err());
    }
}

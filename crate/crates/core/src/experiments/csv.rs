use std::io::{BufRead, Write};

use super::nmse::{format_db, NMSE_FLOOR_DB};
use super::SweepResult;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "sweep_db,nmse_dnn_db,nmse_blmmse_db,n_test,seed,config_hash";

pub fn write_sweep_csv<W: Write>(mut out: W, rows: &[SweepResult]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.sweep_db,
            format_db(r.nmse_dnn_db),
            format_db(r.nmse_blmmse_db),
            r.n_test,
            r.seed,
            r.config_hash
        )?;
    }
    Ok(())
}

fn parse_db(field: &str, line: usize) -> Result<f64> {
    if field == "<-100" {
        return Ok(f64::NEG_INFINITY);
    }
    let v: f64 = field.parse().map_err(|_| bad(line, format!("`{field}` is not a number")))?;
    Ok(if v < NMSE_FLOOR_DB { f64::NEG_INFINITY } else { v })
}

fn bad(line: usize, msg: String) -> Error {
    Error::Format {
        what: "sweep CSV".into(),
        msg: format!("line {line}: {msg}"),
    }
}

pub fn read_sweep_csv<R: BufRead>(input: R) -> Result<Vec<SweepResult>> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?;
    if header.as_deref().map(str::trim_end) != Some(CSV_HEADER) {
        return Err(bad(1, format!("expected header `{CSV_HEADER}`")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let ln = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim_end().split(',').collect();
        if f.len() != 6 {
            return Err(bad(ln, format!("expected 6 fields, found {}", f.len())));
        }
        rows.push(SweepResult {
            sweep_db: f[0].parse().map_err(|_| bad(ln, format!("`{}` is not a number", f[0])))?,
            nmse_dnn_db: parse_db(f[1], ln)?,
            nmse_blmmse_db: parse_db(f[2], ln)?,
            n_test: f[3].parse().map_err(|_| bad(ln, format!("`{}` is not a count", f[3])))?,
            seed: f[4].parse().map_err(|_| bad(ln, format!("`{}` is not a seed", f[4])))?,
            config_hash: f[5].to_string(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(x: f64, d: f64) -> SweepResult {
        SweepResult {
            sweep_db: x,
            nmse_dnn_db: d,
            nmse_blmmse_db: -13.25,
            n_test: 5000,
            seed: 7,
            config_hash: "00ff00ff00ff00ff".into(),
        }
    }

    #[test]
    fn round_trip() {
        let rows = vec![row(-5.0, -3.5), row(-5.0 + 30.0 / 19.0, f64::NEG_INFINITY)];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert!(text.contains("<-100"));
        assert_eq!(read_sweep_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(read_sweep_csv(&b"a,b\n1,2\n"[..]).is_err());
        let text = format!("{CSV_HEADER}\n1,2,3\n");
        assert!(read_sweep_csv(text.as_bytes()).is_err());
    }
}

//! Result table persistence.

use std::io::{Read, Write};

use thiserror::Error;

use super::scenario::ResultRow;
use crate::model::Protocol;

pub const CSV_COLUMNS: [&str; 12] = [
    "scenario",
    "protocol",
    "seed",
    "M",
    "K",
    "lambda_p",
    "lambda_s",
    "throughput_bps",
    "avg_service_time_s",
    "pu_su_collision_slots",
    "su_su_collision_slots",
    "handoffs",
];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: column `{column}`: {message}")]
    Field {
        line: u64,
        column: String,
        message: String,
    },
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Writes the header and one line per row. An undefined service time is an
/// empty field.
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CsvError::Io(e.into());
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in rows {
        let fields: Vec<String> = CSV_COLUMNS
            .iter()
            .map(|c| r.text(c).expect("known column"))
            .collect();
        w.write_record(&fields).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| CsvError::Row {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut idx = [0usize; CSV_COLUMNS.len()];
    for (slot, col) in idx.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == col)
            .ok_or_else(|| CsvError::MissingColumn(col.into()))?;
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CsvError::Row {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let get = |i: usize| rec.get(idx[i]).unwrap_or("");
        let field_err = |i: usize, message: String| CsvError::Field {
            line,
            column: CSV_COLUMNS[i].into(),
            message,
        };
        fn num<T: std::str::FromStr>(s: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            s.parse::<T>().map_err(|e| format!("`{s}`: {e}"))
        }
        let protocol: Protocol = get(1)
            .parse()
            .map_err(|e: crate::model::ConfigError| field_err(1, e.to_string()))?;
        let service = match get(8) {
            "" => None,
            s => Some(num::<f64>(s).map_err(|m| field_err(8, m))?),
        };
        rows.push(ResultRow {
            scenario: get(0).to_string(),
            protocol,
            seed: num(get(2)).map_err(|m| field_err(2, m))?,
            num_channels: num(get(3)).map_err(|m| field_err(3, m))?,
            num_pairs: num(get(4)).map_err(|m| field_err(4, m))?,
            lambda_p: num(get(5)).map_err(|m| field_err(5, m))?,
            lambda_s: num(get(6)).map_err(|m| field_err(6, m))?,
            throughput_bps: num(get(7)).map_err(|m| field_err(7, m))?,
            avg_service_time_s: service,
            pu_su_collision_slots: num(get(9)).map_err(|m| field_err(9, m))?,
            su_su_collision_slots: num(get(10)).map_err(|m| field_err(10, m))?,
            handoffs: num(get(11)).map_err(|m| field_err(11, m))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HEADER: &str = "scenario,protocol,seed,M,K,lambda_p,lambda_s,throughput_bps,avg_service_time_s,pu_su_collision_slots,su_su_collision_slots,handoffs";

    fn row(seed: u64, tp: f64, st: Option<f64>) -> ResultRow {
        ResultRow {
            scenario: "fig5".into(),
            protocol: Protocol::Probability,
            seed,
            num_channels: 10,
            num_pairs: 10,
            lambda_p: 2.5,
            lambda_s: 500.0,
            throughput_bps: tp,
            avg_service_time_s: st,
            pu_su_collision_slots: 12,
            su_su_collision_slots: 0,
            handoffs: 7,
        }
    }

    #[test]
    fn header_is_exact() {
        assert_eq!(CSV_COLUMNS.join(","), HEADER);
        assert_eq!(to_csv_string(&[]), format!("{HEADER}\n"));
    }

    #[test]
    fn round_trip() {
        let rows = vec![row(1, 123_456.789, Some(0.066)), row(2, 0.0, None)];
        let text = to_csv_string(&rows);
        assert_eq!(read_csv(text.as_bytes()).unwrap(), rows);
    }

    #[test]
    fn missing_column_is_named() {
        let text = HEADER.replace(",handoffs", "") + "\n";
        match read_csv(text.as_bytes()) {
            Err(CsvError::MissingColumn(c)) => assert_eq!(c, "handoffs"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = format!(
            "{HEADER}\nfig5,random,1,10,10,1,500,100,0.1,0,0,3\nfig5,random,x,10,10,1,500,100,0.1,0,0,3\n"
        );
        match read_csv(text.as_bytes()) {
            Err(CsvError::Field { line, column, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(column, "seed");
            }
            other => panic!("{other:?}"),
        }
        let text = format!("{HEADER}\nfig5,random,1\n");
        assert!(read_csv(text.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn floats_round_trip(tp in 0.0f64..2e6, st in proptest::option::of(0.0f64..10.0), seed in any::<u64>()) {
            let rows = vec![row(seed, tp, st)];
            prop_assert_eq!(read_csv(to_csv_string(&rows).as_bytes()).unwrap(), rows);
        }
    }
}

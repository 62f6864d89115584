use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::trace::{ExperimentTrace, TraceRow};

pub const TRACE_HEADER: &str = "wall_clock_ms,epoch,train_surrogate,test_measure";

pub fn write_trace<T: Serialize, W: Write>(trace: &ExperimentTrace<T>, out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(TRACE_HEADER.split(','))?;
    for row in &trace.rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_trace<T: DeserializeOwned, R: Read>(input: R) -> Result<ExperimentTrace<T>> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != TRACE_HEADER {
        return Err(Error::parse(1, format!("unexpected trace header `{}`", header.join(","))));
    }
    let rows = reader
        .deserialize::<TraceRow<T>>()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(ExperimentTrace { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let trace = ExperimentTrace {
            rows: vec![
                TraceRow { wall_clock_ms: 0, epoch: 0, train_surrogate: 1.0, test_measure: 0.5 },
                TraceRow { wall_clock_ms: 3, epoch: 1, train_surrogate: 0.1 + 0.2, test_measure: 2.0f64 / 3.0 },
            ],
        };
        let mut buf = Vec::new();
        write_trace(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("wall_clock_ms,epoch,train_surrogate,test_measure\n0,0,1.0,0.5\n"));
        assert_eq!(read_trace::<f64, _>(buf.as_slice()).unwrap(), trace);
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(read_trace::<f64, _>("a,b,c,d\n1,2,3,4\n".as_bytes()).is_err());
    }
}

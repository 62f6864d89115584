use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::data::{Dataset, Label, LabeledPoint};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Reads `<label> <index>:<value> ...` lines and normalizes the result so
/// the largest feature vector has unit norm.
pub fn parse_libsvm<T: Scalar, R: BufRead>(reader: R) -> Result<Dataset<T>> {
    read_libsvm(reader, true)
}

pub fn read_libsvm_file<T: Scalar>(path: impl AsRef<Path>, normalize: bool) -> Result<Dataset<T>> {
    read_libsvm(BufReader::new(File::open(path)?), normalize)
}

/// Labels greater than zero become positive, all others negative. Indices
/// must be 1-based and strictly increasing within a line. Blank lines and
/// `#` comments are skipped.
pub fn read_libsvm<T: Scalar, R: BufRead>(reader: R, normalize: bool) -> Result<Dataset<T>> {
    let mut points = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("nonempty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad label `{label_tok}`")))?;
        let mut features: Vec<(usize, T)> = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, format!("expected index:value, got `{tok}`")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad feature index `{idx}`")))?;
            let val: T = val
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad feature value `{val}`")))?;
            if idx == 0 {
                return Err(Error::parse(line_no, "feature indices are 1-based"));
            }
            if let Some(&(prev, _)) = features.last() {
                if idx == prev {
                    return Err(Error::parse(line_no, format!("duplicate feature index {idx}")));
                }
                if idx < prev {
                    return Err(Error::parse(line_no, format!("feature index {idx} after {prev} is not ascending")));
                }
            }
            features.push((idx, val));
        }
        let point = LabeledPoint::new(features, Label::from_value(label)).map_err(|e| Error::parse(line_no, e.to_string()))?;
        points.push(point);
    }
    let d = Dataset::new(points);
    Ok(if normalize { d.normalized() } else { d })
}

pub fn write_libsvm<T: Scalar, W: Write>(d: &Dataset<T>, mut out: W) -> Result<()> {
    for p in d.points() {
        out.write_all(if p.is_positive() { b"+1" } else { b"-1" })?;
        for &(i, v) in p.features() {
            write!(out, " {i}:{v}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(text: &str) -> Result<Dataset<f64>> {
        read_libsvm(text.as_bytes(), false)
    }

    #[test]
    fn parses_sparse_lines() {
        let d = raw("-1 3:0.5 7:1.2\n").unwrap();
        assert_eq!(d.point(0).label(), Label::Negative);
        assert_eq!(d.point(0).features(), &[(3, 0.5), (7, 1.2)]);
        assert_eq!(d.dimension(), 7);
        let d = raw("0 1:1\n+1 2:3 # comment\n\n").unwrap();
        assert_eq!(d.point(0).label(), Label::Negative);
        assert_eq!(d.point(1).label(), Label::Positive);
        assert_eq!((d.n_pos(), d.n_neg()), (1, 1));
    }

    #[test]
    fn reports_line_numbers() {
        let err = raw("+1 2:1 2:2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        assert!(err.to_string().contains("duplicate"));
        let err = raw("+1 1:1\n-1 4:1 2:2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(matches!(raw("+1 x:1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(raw("pos 1:1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(raw("+1 0:1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(raw("+1 1-1\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn normalizes_by_default() {
        let d: Dataset<f64> = parse_libsvm("+1 1:3 2:4\n-1 1:1\n".as_bytes()).unwrap();
        assert_eq!(d.point(0).features(), &[(1, 0.6), (2, 0.8)]);
        assert_eq!(d.point(1).features(), &[(1, 0.2)]);
    }

    #[test]
    fn write_then_read_is_identity() {
        let d = raw("+1 1:0.1 5:-2.5e-7\n-1 2:0.30000000000000004\n").unwrap();
        let mut buf = Vec::new();
        write_libsvm(&d, &mut buf).unwrap();
        assert_eq!(raw(std::str::from_utf8(&buf).unwrap()).unwrap(), d);
    }
}

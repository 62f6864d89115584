use std::io::{BufRead, Write};

use crate::data::WeightVector;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Writes the dimension on the first line and the coordinates, with 17
/// significant digits, on the second.
pub fn save_model<T: Scalar, W: Write>(w: &WeightVector<T>, mut out: W) -> Result<()> {
    writeln!(out, "{}", w.dimension())?;
    let coords: Vec<String> = w
        .as_slice()
        .iter()
        .map(|v| format!("{:.16e}", v.to_f64_lossy()))
        .collect();
    writeln!(out, "{}", coords.join(" "))?;
    out.flush()?;
    Ok(())
}

pub fn load_model<T: Scalar, R: BufRead>(reader: R) -> Result<WeightVector<T>> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| Error::parse(1, "missing dimension line"))??;
    let dimension: usize = header
        .trim()
        .parse()
        .map_err(|_| Error::parse(1, format!("bad dimension `{}`", header.trim())))?;
    let body = match lines.next() {
        Some(line) => line?,
        None if dimension == 0 => String::new(),
        None => return Err(Error::parse(2, "missing coordinate line")),
    };
    let coords = body
        .split_whitespace()
        .map(|tok| tok.parse::<T>().map_err(|_| Error::parse(2, format!("bad coordinate `{tok}`"))))
        .collect::<Result<Vec<T>>>()?;
    if coords.len() != dimension {
        return Err(Error::parse(2, format!("expected {dimension} coordinates, found {}", coords.len())));
    }
    Ok(WeightVector::from_vec(coords))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn file_layout() {
        let mut buf = Vec::new();
        save_model(&WeightVector::from_vec(vec![0.5, -2.0]), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "2\n5.0000000000000000e-1 -2.0000000000000000e0\n"
        );
    }

    #[test]
    fn rejects_wrong_length() {
        assert!(load_model::<f64, _>("3\n1 2\n".as_bytes()).is_err());
        assert!(load_model::<f64, _>("x\n".as_bytes()).is_err());
        assert!(load_model::<f64, _>("".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(v in proptest::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 0..8)) {
            let w = WeightVector::from_vec(v);
            let mut buf = Vec::new();
            save_model(&w, &mut buf).unwrap();
            prop_assert_eq!(load_model::<f64, _>(buf.as_slice()).unwrap(), w);
        }

        #[test]
        fn round_trip_is_exact_f32(v in proptest::collection::vec(-1e6f32..1e6, 1..8)) {
            let w = WeightVector::from_vec(v);
            let mut buf = Vec::new();
            save_model(&w, &mut buf).unwrap();
            prop_assert_eq!(load_model::<f32, _>(buf.as_slice()).unwrap(), w);
        }
    }
}

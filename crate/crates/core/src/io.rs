//! CSV and JSON serialization helpers.
//!
//! CSV reals are written with 17 significant digits in scientific notation,
//! which round-trips every `f64`. CSV uses a header row, commas and LF.

use std::fmt::Write as _;

/// Formats a real with 17 significant digits; non-finite values as `inf`, `-inf`, `nan`.
pub fn format_real(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}

/// In-memory CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
    index: bool,
}

impl Csv {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Csv { header: header.into_iter().map(Into::into).collect(), rows: Vec::new(), index: false }
    }

    /// Renders the first column as an integer counter.
    pub fn with_index_column(mut self) -> Self {
        self.index = true;
        self
    }

    /// Appends a row; its length must match the header.
    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "csv row width");
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                if i == 0 && self.index {
                    let _ = write!(s, "{}", *v as u64);
                } else {
                    let _ = write!(s, "{}", format_real(*v));
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Column names `prefix1..prefixn`, or `prefix` alone when `n == 1`.
pub fn coord_names(prefix: &str, n: usize) -> Vec<String> {
    if n == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=n).map(|i| format!("{prefix}{i}")).collect()
    }
}

/// Serde adapter writing non-finite reals as the strings `inf`, `-inf`, `nan`.
pub mod ext_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&super::format_real(*v))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("invalid extended real '{other}'"))),
            },
        }
    }
}

/// Serde adapter for vectors of extended reals.
pub mod ext_real_vec {
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    struct Wrap(f64);

    impl serde::Serialize for Wrap {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            super::ext_real::serialize(&self.0, s)
        }
    }

    #[derive(Deserialize)]
    struct Unwrap(#[serde(with = "super::ext_real")] f64);

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&Wrap(*x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Unwrap>::deserialize(d)?.into_iter().map(|u| u.0).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip_through_text() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 65.0, f64::MAX, 2f64.powf(-1.0 / 3.0)] {
            let s = format_real(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(format_real(65.0), "6.5000000000000000e1");
        assert_eq!(format_real(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(["t", "f"]);
        c.push(vec![0.0, 1.5]);
        assert_eq!(c.render(), "t,f\n0.0000000000000000e0,1.5000000000000000e0\n");
        assert_eq!(coord_names("x", 2), ["x1", "x2"]);
        assert_eq!(coord_names("y", 1), ["y"]);
    }
}

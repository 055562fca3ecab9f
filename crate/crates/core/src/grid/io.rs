//! Text interchange for grid functions.
//!
//! CSV: a header `x0[,x1[,x2]],value` followed by one row per node in storage
//! order. JSON: `{"dim", "extent", "points_per_axis", "values": [...]}`.
//! Both use shortest round-trip float formatting, so reading back is bit-exact.

use std::io::{Read, Write};

use serde::Deserialize;

use super::{GridFunction, GridSpec, MAX_POINTS};
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct JsonGridFunction {
    #[serde(flatten)]
    spec: GridSpec,
    values: Vec<f64>,
}

fn parse_err(e: impl std::fmt::Display) -> Error {
    Error::Parse(e.to_string())
}

impl GridFunction {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let d = self.spec.dim();
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..d).map(|a| format!("x{a}")).collect();
        header.push("value".into());
        w.write_record(&header).map_err(parse_err)?;
        let mut row = Vec::with_capacity(d + 1);
        for (i, v) in self.values.iter().enumerate() {
            row.clear();
            let x = self.spec.node(i);
            row.extend(x[..d].iter().map(|c| c.to_string()));
            row.push(v.to_string());
            w.write_record(&row).map_err(parse_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV layout written by [`GridFunction::write_csv`].
    ///
    /// The grid is recovered from the node coordinates, which must be exactly the
    /// nodes of a valid [`GridSpec`] in storage order.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let header = r.headers().map_err(parse_err)?.clone();
        let cols = header.len();
        if !(2..=4).contains(&cols) {
            return Err(Error::Parse(format!(
                "expected 2 to 4 columns, found {cols}"
            )));
        }
        let d = cols - 1;
        for a in 0..d {
            if header.get(a) != Some(format!("x{a}").as_str()) {
                return Err(Error::Parse(format!("column {a} must be named x{a}")));
            }
        }
        if header.get(d) != Some("value") {
            return Err(Error::Parse("last column must be named value".into()));
        }

        let mut coords: Vec<f64> = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(parse_err)?;
            if values.len() >= MAX_POINTS {
                return Err(Error::Parse(format!("more than {MAX_POINTS} rows")));
            }
            for a in 0..d {
                coords.push(parse_float(rec.get(a))?);
            }
            values.push(parse_float(rec.get(d))?);
        }
        let rows = values.len();
        let n = (rows as f64).powf(1.0 / d as f64).round() as usize;
        if n == 0 || n.checked_pow(d as u32) != Some(rows) {
            return Err(Error::Parse(format!(
                "{rows} rows is not a {d}-dimensional cube"
            )));
        }
        let extent = -coords[0];
        let spec = GridSpec::new(d, extent, n)?;
        let tol = 1e-9 * spec.extent();
        for i in 0..rows {
            let x = spec.node(i);
            for a in 0..d {
                if (coords[i * d + a] - x[a]).abs() > tol {
                    return Err(Error::Parse(format!(
                        "row {i}: coordinate {} does not match node {}",
                        coords[i * d + a],
                        x[a]
                    )));
                }
            }
        }
        GridFunction::new(spec, values)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(parse_err)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: JsonGridFunction = serde_json::from_str(text).map_err(parse_err)?;
        GridFunction::new(raw.spec, raw.values)
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self> {
        let raw: JsonGridFunction = serde_json::from_slice(bytes).map_err(parse_err)?;
        GridFunction::new(raw.spec, raw.values)
    }
}

fn parse_float(field: Option<&str>) -> Result<f64> {
    let s = field.ok_or_else(|| Error::Parse("missing field".into()))?;
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::super::sample;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_layout() {
        let s = GridSpec::new(1, 4.0, 8).unwrap();
        let g = sample(&s, |x| x[0] * 0.5).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x0,value"));
        assert_eq!(lines.next(), Some("-4,-2"));
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn csv_rejects_malformed() {
        let bad = [
            "",
            "a,b\n1,2\n",
            "x0,value\n",
            "x0,value\n-1,0\n0,0\n",
            "x0,value\n-4,0\n-3,0\n-2,0\n-1,0\n0,0\n1,0\n2,0\n9,0\n",
            "x0,value\n-4,0\n-3,0\n-2,0\n-1,0\n0,0\n1,0\n2,0\n3,nan\n",
            "x0,value\n-4,0\n-3,0\n-2,0\n-1,0\n0,0\n1,0\n2,0\n3,zz\n",
            "x0,x1,x2,x3,value\n",
        ];
        for text in bad {
            assert!(GridFunction::read_csv(text.as_bytes()).is_err(), "{text:?}");
        }
    }

    #[test]
    fn json_rejects_invalid_specs() {
        assert!(GridFunction::from_json(
            r#"{"dim":1,"extent":1.0,"points_per_axis":7,"values":[]}"#
        )
        .is_err());
        assert!(GridFunction::from_json(
            r#"{"dim":1,"extent":1.0,"points_per_axis":8,"values":[1]}"#
        )
        .is_err());
        assert!(GridFunction::from_json(
            r#"{"dim":9,"extent":1.0,"points_per_axis":8,"values":[]}"#
        )
        .is_err());
        assert!(GridFunction::from_json("[1,2").is_err());
    }

    fn arb_grid() -> impl Strategy<Value = GridFunction> {
        (1usize..=2, 0.1f64..1e3, 3u32..=5).prop_flat_map(|(d, l, log_n)| {
            let spec = GridSpec::new(d, l, 1 << log_n).unwrap();
            prop::collection::vec(-1e30f64..1e30, spec.len())
                .prop_map(move |v| GridFunction::new(spec, v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn csv_and_json_round_trip_bit_exact(g in arb_grid()) {
            let mut buf = Vec::new();
            g.write_csv(&mut buf).unwrap();
            let back = GridFunction::read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(&back, &g);
            let json = g.to_json().unwrap();
            prop_assert_eq!(GridFunction::from_json(&json).unwrap(), g);
        }
    }
}

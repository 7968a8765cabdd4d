//! Stable CSV and JSON output.
//!
//! CSV schemas:
//!
//! * profiles: `n,k,d_num,d_den,d_float`
//! * experiments: `n,schedule,median,q10,q90,pass_fraction`
//! * exact `D(t,n)` laws: `value_num,value_den,prob_num,prob_den`
//!
//! JSON documents are emitted with object keys sorted, so two emissions of
//! the same document differ at most in `generated_at`. The digest covers
//! everything except that field.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::discrepancy::{DiscrepancyValue, ProfilePoint};
use crate::error::{Error, Result};
use crate::montecarlo::{D1Atom, ExperimentResult};

/// Bumped on any change to a CSV column set or JSON document layout.
pub const SCHEMA_VERSION: u32 = 1;

pub const PROFILE_HEADER: [&str; 5] = ["n", "k", "d_num", "d_den", "d_float"];
pub const EXPERIMENT_HEADER: [&str; 6] = ["n", "schedule", "median", "q10", "q90", "pass_fraction"];
pub const DISTRIBUTION_HEADER: [&str; 4] = ["value_num", "value_den", "prob_num", "prob_den"];

/// Fixed-point rendering with 17 significant digits, e.g. `1.0000000000000000`.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { format!("{:.16}", 0.0) } else { x.to_string() };
    }
    let sci = format!("{:.16e}", x);
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    let decimals = (16 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

fn csv_err(e: csv::Error) -> Error {
    match e.position() {
        Some(pos) => Error::data_at(pos.line(), e.to_string()),
        None => Error::data(e.to_string()),
    }
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("writing to memory cannot fail")
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<()> {
    let headers = rdr.headers().map_err(csv_err)?;
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::data_at(1, format!("expected header {}, got {:?}", expected.join(","), headers)));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let line = rec.position().map_or(0, |p| p.line());
    rec.get(i)
        .ok_or_else(|| Error::data_at(line, format!("missing column {i}")))?
        .parse()
        .map_err(|e| Error::data_at(line, format!("column {i}: {e}")))
}

/// Profile rows, sorted by `n`.
pub fn emit_profile_csv(points: &[ProfilePoint]) -> Vec<u8> {
    let mut sorted = points.to_vec();
    sorted.sort_by_key(|p| p.n);
    let mut w = writer();
    w.write_record(PROFILE_HEADER).expect("in-memory");
    for p in &sorted {
        w.write_record([
            p.n.to_string(),
            p.k.to_string(),
            p.d.numerator().to_string(),
            p.d.denominator().to_string(),
            format_sig17(p.d.to_f64()),
        ])
        .expect("in-memory");
    }
    finish(w)
}

/// Reads profile rows back. The float column is not used.
pub fn parse_profile_csv(bytes: &[u8]) -> Result<Vec<ProfilePoint>> {
    let mut rdr = csv::Reader::from_reader(bytes);
    check_header(&mut rdr, &PROFILE_HEADER)?;
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            Ok(ProfilePoint {
                n: field(&rec, 0)?,
                k: field(&rec, 1)?,
                d: DiscrepancyValue::new(field(&rec, 2)?, field(&rec, 3)?)?,
            })
        })
        .collect()
}

/// One row of the experiment CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub n: u64,
    pub schedule: String,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
    pub pass_fraction: f64,
}

pub fn experiment_rows(result: &ExperimentResult) -> Vec<ExperimentRow> {
    let mut rows: Vec<(u64, usize, ExperimentRow)> = Vec::new();
    for (s, summary) in result.schedules.iter().enumerate() {
        for c in &summary.checkpoints {
            rows.push((
                c.n,
                s,
                ExperimentRow {
                    n: c.n,
                    schedule: summary.name.clone(),
                    median: c.median.to_f64(),
                    q10: c.q10.to_f64(),
                    q90: c.q90.to_f64(),
                    pass_fraction: summary.pass_fraction,
                },
            ));
        }
    }
    rows.sort_by_key(|(n, s, _)| (*n, *s));
    rows.into_iter().map(|(_, _, r)| r).collect()
}

/// Rows ascending in `n`, schedules in spec order within each `n`.
pub fn emit_experiment_csv(result: &ExperimentResult) -> Vec<u8> {
    let mut w = writer();
    w.write_record(EXPERIMENT_HEADER).expect("in-memory");
    for r in experiment_rows(result) {
        w.write_record([
            r.n.to_string(),
            r.schedule,
            format_sig17(r.median),
            format_sig17(r.q10),
            format_sig17(r.q90),
            format_sig17(r.pass_fraction),
        ])
        .expect("in-memory");
    }
    finish(w)
}

pub fn parse_experiment_csv(bytes: &[u8]) -> Result<Vec<ExperimentRow>> {
    let mut rdr = csv::Reader::from_reader(bytes);
    check_header(&mut rdr, &EXPERIMENT_HEADER)?;
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            Ok(ExperimentRow {
                n: field(&rec, 0)?,
                schedule: field(&rec, 1)?,
                median: field(&rec, 2)?,
                q10: field(&rec, 3)?,
                q90: field(&rec, 4)?,
                pass_fraction: field(&rec, 5)?,
            })
        })
        .collect()
}

pub fn emit_distribution_csv(atoms: &[D1Atom]) -> Vec<u8> {
    let mut w = writer();
    w.write_record(DISTRIBUTION_HEADER).expect("in-memory");
    for a in atoms {
        w.write_record([
            a.value.numerator().to_string(),
            a.value.denominator().to_string(),
            a.probability.numer().to_string(),
            a.probability.denom().to_string(),
        ])
        .expect("in-memory");
    }
    finish(w)
}

/// A self-describing result: what was asked for and what came out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument<P> {
    pub schema_version: u32,
    pub spec: Value,
    pub payload: P,
    /// RFC 3339 UTC; excluded from [`ResultDocument::digest`].
    pub generated_at: String,
}

impl<P: Serialize + DeserializeOwned> ResultDocument<P> {
    pub fn new<S: Serialize>(spec: &S, payload: P) -> Result<Self> {
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            spec: serde_json::to_value(spec).map_err(|e| Error::data(e.to_string()))?,
            payload,
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        })
    }

    /// SHA-256 over the canonical compact JSON of schema, spec and payload.
    pub fn digest(&self) -> Result<String> {
        let body = serde_json::json!({
            "schema_version": self.schema_version,
            "spec": self.spec,
            "payload": serde_json::to_value(&self.payload).map_err(|e| Error::data(e.to_string()))?,
        });
        let canonical = serde_json::to_vec(&body).map_err(|e| Error::data(e.to_string()))?;
        Ok(hex::encode(Sha256::digest(&canonical)))
    }
}

/// Pretty-printed JSON with keys in sorted order and a trailing newline.
pub fn emit_json<T: Serialize>(doc: &T) -> Result<Vec<u8>> {
    // Value objects are BTreeMaps, so going through Value sorts the keys.
    let value = serde_json::to_value(doc).map_err(|e| Error::data(e.to_string()))?;
    let mut out = serde_json::to_vec_pretty(&value).map_err(|e| Error::data(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn parse_json<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| Error::Data {
        offset: Some(e.line() as u64),
        message: format!("invalid JSON document: {e}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{exact_d1_distribution, run, Checkpoints, ExperimentSpec, NamedSchedule};
    use crate::thresholds::ThresholdFn;
    use proptest::prelude::*;

    fn spec() -> ExperimentSpec {
        ExperimentSpec {
            seed: 5,
            trials: 9,
            length: 1 << 10,
            checkpoints: Checkpoints::Geometric { from_exp: 4, to_exp: None },
            schedules: vec![
                NamedSchedule::new("two", ThresholdFn::constant(2)),
                NamedSchedule::new("grow", ThresholdFn::parse("form:1,-1,-1").unwrap()),
            ],
            epsilon: 0.3,
            min_checkpoint: 64,
            k_max: 28,
        }
    }

    #[test]
    fn sig17_rendering() {
        assert_eq!(format_sig17(1.0), "1.0000000000000000");
        assert_eq!(format_sig17(0.0), "0.0000000000000000");
        assert_eq!(format_sig17(0.25), "0.25000000000000000");
        assert_eq!(format_sig17(7.0), "7.0000000000000000");
        assert_eq!(format_sig17(12.5), "12.500000000000000");
        assert_eq!(format_sig17(1.0 / 3.0), "0.33333333333333331");
    }

    #[test]
    fn profile_csv_single_point() {
        let p = ProfilePoint { n: 4, k: 2, d: DiscrepancyValue::new(4, 4).unwrap() };
        let out = String::from_utf8(emit_profile_csv(&[p])).unwrap();
        assert_eq!(out, "n,k,d_num,d_den,d_float\n4,2,4,4,1.0000000000000000\n");
        assert_eq!(String::from_utf8(emit_profile_csv(&[])).unwrap(), "n,k,d_num,d_den,d_float\n");
    }

    #[test]
    fn profile_csv_rejects_garbage() {
        assert!(parse_profile_csv(b"n,k\n1,2\n").is_err());
        assert!(parse_profile_csv(b"n,k,d_num,d_den,d_float\n1,2,3,0,0\n").is_err());
        assert!(parse_profile_csv(b"n,k,d_num,d_den,d_float\n1,x,3,1,0\n").is_err());
    }

    #[test]
    fn experiment_csv_round_trip() {
        let result = run(&spec(), 1).unwrap();
        let bytes = emit_experiment_csv(&result);
        let rows = parse_experiment_csv(&bytes).unwrap();
        assert_eq!(rows, experiment_rows(&result));
        assert!(rows.windows(2).all(|w| w[0].n <= w[1].n));
        assert_eq!(rows.len(), 2 * 7);
    }

    #[test]
    fn distribution_csv() {
        let out = String::from_utf8(emit_distribution_csv(&exact_d1_distribution(2).unwrap())).unwrap();
        assert_eq!(out, "value_num,value_den,prob_num,prob_den\n0,2,1,2\n2,2,1,2\n");
    }

    #[test]
    fn json_round_trip_and_canonical_bytes() {
        let s = spec();
        let doc = ResultDocument::new(&s, run(&s, 1).unwrap()).unwrap();
        let bytes = emit_json(&doc).unwrap();
        let back: ResultDocument<ExperimentResult> = parse_json(&bytes).unwrap();
        assert_eq!(back, doc);
        let echoed: ExperimentSpec = serde_json::from_value(back.spec.clone()).unwrap();
        assert_eq!(echoed, s);

        let mut later = doc.clone();
        later.generated_at = "2000-01-01T00:00:00Z".into();
        assert_eq!(later.digest().unwrap(), doc.digest().unwrap());
        let strip = |b: Vec<u8>| {
            String::from_utf8(b).unwrap().lines().filter(|l| !l.contains("generated_at")).collect::<Vec<_>>().join("\n")
        };
        assert_eq!(strip(emit_json(&later).unwrap()), strip(bytes));
    }

    #[test]
    fn digest_is_thread_independent() {
        let s = spec();
        let one = ResultDocument::new(&s, run(&s, 1).unwrap()).unwrap();
        let many = ResultDocument::new(&s, run(&s, 8).unwrap()).unwrap();
        assert_eq!(one.digest().unwrap(), many.digest().unwrap());
    }

    #[test]
    fn keys_are_sorted() {
        let text = String::from_utf8(emit_json(&spec()).unwrap()).unwrap();
        let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
        assert!(pos("checkpoints") < pos("epsilon"));
        assert!(pos("epsilon") < pos("k_max"));
        assert!(pos("schedules") < pos("seed"));
    }

    proptest! {
        #[test]
        fn profile_csv_round_trip(raw in prop::collection::vec((1u64..1 << 40, 1u32..29, 0u64..1 << 40), 0..20)) {
            let mut points: Vec<ProfilePoint> = raw
                .into_iter()
                .map(|(n, k, num)| ProfilePoint { n, k, d: DiscrepancyValue::new(num, n).unwrap() })
                .collect();
            points.sort_by_key(|p| p.n);
            let back = parse_profile_csv(&emit_profile_csv(&points)).unwrap();
            prop_assert_eq!(back.len(), points.len());
            for (a, b) in back.iter().zip(&points) {
                prop_assert_eq!((a.n, a.k, a.d.numerator(), a.d.denominator()), (b.n, b.k, b.d.numerator(), b.d.denominator()));
            }
        }

        #[test]
        fn sig17_round_trips_f64(x in 0.0f64..1e6) {
            let s = format_sig17(x);
            prop_assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}

//! Integer schedules `s(n)`, the margin `φ_s(n) = ⌊log2 n − log2 log2 n − s(n)⌋`,
//! and the finite-prefix calculus on integer sequences (pointwise order,
//! generalized inverse, domination).
//!
//! All logarithms are base 2. Floors of transcendental quantities are
//! evaluated in `f64`. When every logarithm involved is an exact integer
//! (`n = 2^e`, and `e` a power of two where `log2 log2 n` is needed) the
//! floor is exact. Otherwise a result whose argument lies within
//! [`HAZARD_BAND`] of an integer is flagged as a hazard: the `f64` error
//! here is below 1e-13, so every unflagged floor is correct.

use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance to the nearest integer below which a floor is flagged.
pub const HAZARD_BAND: f64 = 1e-9;

/// A floor evaluation together with its numeric-hazard flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Eval {
    pub value: i64,
    pub hazard: bool,
}

#[derive(Clone, Copy, Debug)]
struct Logs {
    log2: f64,
    log2_exact: bool,
    loglog2: f64,
    loglog2_exact: bool,
}

/// For `n = 1` the `log2 log2` term is `-inf`; callers only use it for `n >= 2`.
fn logs(n: u64) -> Logs {
    debug_assert!(n >= 1);
    if n.is_power_of_two() {
        let e = n.trailing_zeros() as u64;
        Logs {
            log2: e as f64,
            log2_exact: true,
            loglog2: (e as f64).log2(),
            loglog2_exact: e.is_power_of_two(),
        }
    } else {
        let l = (n as f64).log2();
        Logs { log2: l, log2_exact: false, loglog2: l.log2(), loglog2_exact: false }
    }
}

fn floor_with_hazard(x: f64, exact: bool) -> Eval {
    let value = x.floor();
    let hazard = !exact && {
        let nearest = x.round();
        (x - nearest).abs() < HAZARD_BAND
    };
    Eval { value: value as i64, hazard }
}

/// `L(n) = log2 n − log2 log2 n` and whether it is exactly representable.
pub fn margin_base(n: u64) -> Result<(f64, bool)> {
    if n < 2 {
        return Err(Error::pre(format!("log2 log2 n is undefined for n = {n} (need n >= 2)")));
    }
    let l = logs(n);
    Ok((l.log2 - l.loglog2, l.log2_exact && l.loglog2_exact))
}

/// An integer-valued schedule `n ↦ s(n)`, defined from [`ThresholdFn::min_n`]
/// up to [`ThresholdFn::horizon`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdFn {
    /// `⌊a·log2 n + b·log2 log2 n + c⌋`, raised to `floor` when set.
    ClosedForm {
        a: f64,
        b: f64,
        c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        floor: Option<i64>,
    },
    /// `values[i] = s(i + 2)`; the horizon is `values.len() + 1`.
    Tabulated {
        values: Vec<i64>,
        /// Ascending `n` whose value came from a hazard-flagged evaluation.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        hazards: Vec<u64>,
    },
    /// `n ↦ φ_inner(n)`.
    PhiOf { inner: Box<ThresholdFn> },
    /// `n ↦ max(min, inner(n))`.
    Clamped { min: i64, inner: Box<ThresholdFn> },
}

impl ThresholdFn {
    pub fn constant(v: i64) -> Self {
        ThresholdFn::ClosedForm { a: 0.0, b: 0.0, c: v as f64, floor: None }
    }

    pub fn closed_form(a: f64, b: f64, c: f64, floor: Option<i64>) -> Self {
        ThresholdFn::ClosedForm { a, b, c, floor }
    }

    /// Schedule with `s(n) = values[n - 2]`.
    pub fn tabulated(values: Vec<i64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::pre("a tabulated schedule needs at least the value at n = 2"));
        }
        Ok(ThresholdFn::Tabulated { values, hazards: Vec::new() })
    }

    pub fn clamped(self, min: i64) -> Self {
        ThresholdFn::Clamped { min, inner: Box::new(self) }
    }

    /// Largest `n` the schedule is defined at, `None` when unbounded.
    pub fn horizon(&self) -> Option<u64> {
        match self {
            ThresholdFn::ClosedForm { .. } => None,
            ThresholdFn::Tabulated { values, .. } => Some(values.len() as u64 + 1),
            ThresholdFn::PhiOf { inner } | ThresholdFn::Clamped { inner, .. } => inner.horizon(),
        }
    }

    /// Smallest `n` the schedule is defined at: 1 when no `log2 log2 n`
    /// term is involved, otherwise 2.
    pub fn min_n(&self) -> u64 {
        match self {
            ThresholdFn::ClosedForm { b, .. } if *b == 0.0 => 1,
            ThresholdFn::ClosedForm { .. } | ThresholdFn::Tabulated { .. } | ThresholdFn::PhiOf { .. } => 2,
            ThresholdFn::Clamped { inner, .. } => inner.min_n(),
        }
    }

    pub fn eval(&self, n: u64) -> Result<Eval> {
        let lo = self.min_n();
        if n < lo {
            return Err(Error::pre(format!("schedule {self} is defined for n >= {lo}, got n = {n}")));
        }
        if let Some(h) = self.horizon() {
            if n > h {
                return Err(Error::pre(format!("n = {n} is beyond the schedule horizon {h}")));
            }
        }
        Ok(self.eval_unchecked(n))
    }

    fn eval_unchecked(&self, n: u64) -> Eval {
        match self {
            ThresholdFn::ClosedForm { a, b, c, floor } => {
                let l = logs(n);
                let exact = (*a == 0.0 || l.log2_exact) && (*b == 0.0 || l.loglog2_exact);
                let mut x = *c;
                if *a != 0.0 {
                    x += a * l.log2;
                }
                if *b != 0.0 {
                    x += b * l.loglog2;
                }
                let mut e = floor_with_hazard(x, exact);
                if let Some(f) = floor {
                    e.value = e.value.max(*f);
                }
                e
            }
            ThresholdFn::Tabulated { values, hazards } => Eval {
                value: values[(n - 2) as usize],
                hazard: hazards.binary_search(&n).is_ok(),
            },
            ThresholdFn::PhiOf { inner } => phi_unchecked(inner, n),
            ThresholdFn::Clamped { min, inner } => {
                let e = inner.eval_unchecked(n);
                Eval { value: e.value.max(*min), hazard: e.hazard }
            }
        }
    }

    /// Materializes the schedule on `[2, horizon]`.
    pub fn tabulate(&self, horizon: u64) -> Result<ThresholdFn> {
        if horizon < 2 {
            return Err(Error::pre("tabulation horizon must be at least 2"));
        }
        if let Some(h) = self.horizon() {
            if horizon > h {
                return Err(Error::pre(format!("cannot tabulate to {horizon}: schedule ends at {h}")));
            }
        }
        let mut values = Vec::with_capacity(horizon as usize - 1);
        let mut hazards = Vec::new();
        for n in 2..=horizon {
            let e = self.eval_unchecked(n);
            values.push(e.value);
            if e.hazard {
                hazards.push(n);
            }
        }
        Ok(ThresholdFn::Tabulated { values, hazards })
    }

    /// Parses the schedule mini-language:
    ///
    /// * `const:<v>`: `s(n) = v`
    /// * `form:<a>,<b>,<c>`: `⌊a·log2 n + b·log2 log2 n + c⌋`, clamped to at least 1
    /// * `table:<path>`: CSV file with header `n,s`
    /// * `phi-of:<spec>`: `φ` of the inner schedule
    /// * `clamp:<min>:<spec>`: `max(min, inner)`
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (head, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::data(format!("schedule {spec:?} lacks a '<kind>:' prefix")))?;
        match head {
            "const" => {
                let v = rest
                    .trim()
                    .parse::<i64>()
                    .map_err(|e| Error::data(format!("bad constant {rest:?}: {e}")))?;
                Ok(Self::constant(v))
            }
            "form" => {
                let coeffs: Vec<f64> = rest
                    .split(',')
                    .map(|c| c.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::data(format!("bad coefficients {rest:?}: {e}")))?;
                match coeffs[..] {
                    [a, b, c] if coeffs.iter().all(|x| x.is_finite()) => {
                        Ok(Self::closed_form(a, b, c, Some(1)))
                    }
                    _ => Err(Error::data(format!("form needs three finite coefficients, got {rest:?}"))),
                }
            }
            "table" => Self::read_table_file(rest),
            "phi-of" => Ok(phi_fn(&Self::parse(rest)?)),
            "clamp" => {
                let (min, inner) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::data(format!("clamp needs '<min>:<spec>', got {rest:?}")))?;
                let min = min
                    .trim()
                    .parse::<i64>()
                    .map_err(|e| Error::data(format!("bad clamp minimum {min:?}: {e}")))?;
                Ok(Self::parse(inner)?.clamped(min))
            }
            other => Err(Error::data(format!("unknown schedule kind {other:?}"))),
        }
    }

    pub fn read_table_file(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::read_table(file)
    }

    /// Reads the tabulated CSV format: header `n,s`, rows `n = 2, 3, …`.
    pub fn read_table<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::data(e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != ["n", "s"] {
            return Err(Error::data(format!("table header must be `n,s`, got {headers:?}")));
        }
        let mut values = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::data(e.to_string()))?;
            let line = row as u64 + 2;
            let parse = |i: usize| -> Result<i64> {
                rec.get(i)
                    .ok_or_else(|| Error::data_at(line, "missing column"))?
                    .parse::<i64>()
                    .map_err(|e| Error::data_at(line, e.to_string()))
            };
            let (n, s) = (parse(0)?, parse(1)?);
            let expected = values.len() as i64 + 2;
            if n != expected {
                return Err(Error::data_at(line, format!("expected n = {expected}, found {n}")));
            }
            values.push(s);
        }
        Self::tabulated(values).map_err(|_| Error::data("table has no rows"))
    }

    /// Writes `s` on `[2, horizon]` in the tabulated CSV format.
    pub fn write_table<W: std::io::Write>(&self, horizon: u64, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["n", "s"]).map_err(|e| Error::Io(e.to_string()))?;
        for n in 2..=horizon {
            let v = self.eval(n)?.value;
            w.write_record([n.to_string(), v.to_string()]).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

impl fmt::Display for ThresholdFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdFn::ClosedForm { a, b, c, floor } if *a == 0.0 && *b == 0.0 && floor.is_none() => {
                write!(f, "const:{c}")
            }
            ThresholdFn::ClosedForm { a, b, c, floor: Some(1) } => write!(f, "form:{a},{b},{c}"),
            ThresholdFn::ClosedForm { a, b, c, floor } => {
                write!(f, "floor({a}*log2 n + {b}*log2 log2 n + {c})")?;
                if let Some(m) = floor {
                    write!(f, " clamped >= {m}")?;
                }
                Ok(())
            }
            ThresholdFn::Tabulated { values, .. } => write!(f, "table[2..={}]", values.len() + 1),
            ThresholdFn::PhiOf { inner } => write!(f, "phi-of:{inner}"),
            ThresholdFn::Clamped { min, inner } => write!(f, "clamp:{min}:{inner}"),
        }
    }
}

fn phi_unchecked(s: &ThresholdFn, n: u64) -> Eval {
    let inner = s.eval_unchecked(n);
    let l = logs(n);
    let exact = l.log2_exact && l.loglog2_exact;
    let e = floor_with_hazard(l.log2 - l.loglog2 - inner.value as f64, exact);
    Eval { value: e.value, hazard: e.hazard || inner.hazard }
}

/// `φ_s(n) = ⌊log2 n − log2 log2 n − s(n)⌋`, with hazard flag.
pub fn phi(s: &ThresholdFn, n: u64) -> Result<Eval> {
    margin_base(n)?;
    s.eval(n)?;
    Ok(phi_unchecked(s, n))
}

/// The schedule `n ↦ φ_s(n)` on the domain of `s`.
///
/// Evaluated lazily; [`ThresholdFn::tabulate`] gives the explicit table.
/// For integer `s`, `φ_{φ_s} = s` at every non-hazard point.
pub fn phi_fn(s: &ThresholdFn) -> ThresholdFn {
    ThresholdFn::PhiOf { inner: Box::new(s.clone()) }
}

/// Summary of `φ_s` on `[2, horizon]`: the `φ_s ≥ 0` check and a
/// finite-prefix surrogate for `φ_s → ∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub horizon: u64,
    /// Minimum of `φ_s` over non-hazard points, and its first location.
    pub min_phi: i64,
    pub min_phi_at: u64,
    pub nonnegative: bool,
    /// `φ_s(horizon)`.
    pub last_phi: i64,
    /// Distinct values of the tail minimum `min_{n ≤ m ≤ horizon} φ_s(m)`,
    /// each with the first `n` at which it is attained.
    pub tail_min_levels: Vec<TailLevel>,
    /// The tail minimum rises above its initial plateau before the horizon.
    /// A prefix heuristic only; divergence is not decidable from a prefix.
    pub diverging_up_to_horizon: bool,
    pub heuristic: bool,
    /// Points excluded from the statistics because their floor was flagged.
    pub hazard_points: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailLevel {
    pub level: i64,
    pub first_n: u64,
}

pub fn admissible(s: &ThresholdFn, horizon: u64) -> Result<AdmissibilityReport> {
    if horizon < 2 {
        return Err(Error::pre("admissibility needs horizon >= 2"));
    }
    s.eval(horizon)?;
    let mut points = Vec::with_capacity(horizon as usize - 1);
    let mut hazard_points = Vec::new();
    for n in 2..=horizon {
        let e = phi_unchecked(s, n);
        if e.hazard {
            hazard_points.push(n);
        } else {
            points.push((n, e.value));
        }
    }
    let Some(&(_, last_phi)) = points.last() else {
        return Err(Error::pre("every point up to the horizon is hazard-flagged"));
    };
    let (min_phi_at, min_phi) = points
        .iter()
        .fold((0, i64::MAX), |(at, m), &(n, v)| if v < m { (n, v) } else { (at, m) });

    let mut tail_min = vec![0i64; points.len()];
    let mut running = i64::MAX;
    for (slot, &(_, v)) in tail_min.iter_mut().zip(&points).rev() {
        running = running.min(v);
        *slot = running;
    }
    let mut tail_min_levels: Vec<TailLevel> = Vec::new();
    for (&(n, _), &level) in points.iter().zip(&tail_min) {
        if tail_min_levels.last().map_or(true, |l| l.level != level) {
            tail_min_levels.push(TailLevel { level, first_n: n });
        }
    }
    Ok(AdmissibilityReport {
        horizon,
        min_phi,
        min_phi_at,
        nonnegative: min_phi >= 0,
        last_phi,
        diverging_up_to_horizon: tail_min_levels.len() >= 2,
        tail_min_levels,
        heuristic: true,
        hazard_points,
    })
}

/// A finite prefix `x(0), …, x(H−1)` of a sequence of naturals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FinitePrefixSeq {
    values: Vec<u64>,
}

/// Verdict of the pointwise order on equal-horizon prefixes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PointwiseOrder {
    Equal,
    /// `x ≤ x'` everywhere, strictly somewhere.
    Below,
    /// `x ≥ x'` everywhere, strictly somewhere.
    Above,
    Incomparable,
}

impl From<Vec<u64>> for FinitePrefixSeq {
    fn from(values: Vec<u64>) -> Self {
        Self { values }
    }
}

impl FinitePrefixSeq {
    pub fn new(values: Vec<u64>) -> Self {
        Self { values }
    }

    #[inline]
    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn get(&self, i: usize) -> Option<u64> {
        self.values.get(i).copied()
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// `x*(n) = min{m < H : x(m) ≥ n}` for `n = 0, 1, …` up to the first `n`
    /// with no witness in the prefix. Nondecreasing in `n`.
    pub fn invert(&self) -> FinitePrefixSeq {
        let mut out = Vec::new();
        let mut running_max: Option<u64> = None;
        for (m, &v) in self.values.iter().enumerate() {
            // every n in (previous max, v] first finds a witness at m
            let next = running_max.map_or(0, |r| r + 1);
            if running_max.map_or(true, |r| v > r) {
                for _ in next..=v {
                    out.push(m as u64);
                }
                running_max = Some(v);
            }
        }
        FinitePrefixSeq { values: out }
    }

    /// `x(m) = max{k < H : y(k) ≤ m}` for `m = 0, …, max y`, with the
    /// empty maximum taken as 0.
    pub fn dominate(&self) -> FinitePrefixSeq {
        let Some(&top) = self.values.iter().max() else {
            return FinitePrefixSeq::default();
        };
        let mut last_at = vec![None::<u64>; top as usize + 1];
        for (k, &v) in self.values.iter().enumerate() {
            last_at[v as usize] = Some(k as u64);
        }
        let mut best: Option<u64> = None;
        let values = last_at
            .into_iter()
            .map(|slot| {
                best = best.max(slot);
                best.unwrap_or(0)
            })
            .collect();
        FinitePrefixSeq { values }
    }

    pub fn compare(&self, other: &FinitePrefixSeq) -> Result<PointwiseOrder> {
        if self.horizon() != other.horizon() {
            return Err(Error::pre(format!(
                "pointwise comparison needs equal horizons, got {} and {}",
                self.horizon(),
                other.horizon()
            )));
        }
        let (mut below, mut above) = (false, false);
        for (a, b) in self.values.iter().zip(&other.values) {
            below |= a < b;
            above |= a > b;
        }
        Ok(match (below, above) {
            (false, false) => PointwiseOrder::Equal,
            (true, false) => PointwiseOrder::Below,
            (false, true) => PointwiseOrder::Above,
            (true, true) => PointwiseOrder::Incomparable,
        })
    }

    /// `x ≤ x'` in the pointwise order (equal horizons required).
    pub fn le(&self, other: &FinitePrefixSeq) -> Result<bool> {
        Ok(matches!(self.compare(other)?, PointwiseOrder::Equal | PointwiseOrder::Below))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: &[u64]) -> FinitePrefixSeq {
        FinitePrefixSeq::new(v.to_vec())
    }

    #[test]
    fn phi_exact_cases() {
        assert_eq!(phi(&ThresholdFn::constant(2), 256).unwrap(), Eval { value: 3, hazard: false });
        assert_eq!(phi(&ThresholdFn::constant(5), 256).unwrap(), Eval { value: 0, hazard: false });
        assert_eq!(phi(&ThresholdFn::constant(0), 2).unwrap(), Eval { value: 1, hazard: false });
    }

    #[test]
    fn phi_at_1000() {
        // log2 1000 − log2 log2 1000 = 6.64880093829631152… (120-bit evaluation)
        assert_eq!(phi(&ThresholdFn::constant(0), 1000).unwrap(), Eval { value: 6, hazard: false });
        let (l, exact) = margin_base(1000).unwrap();
        assert!(!exact);
        assert!((l - 6.648_800_938_296_311).abs() < 1e-13);
    }

    #[test]
    fn constant_defined_from_one() {
        assert_eq!(ThresholdFn::constant(1).eval(1).unwrap().value, 1);
        assert_eq!(ThresholdFn::closed_form(1.0, 0.0, 0.0, None).eval(1).unwrap().value, 0);
        assert!(ThresholdFn::parse("form:1,-1,0").unwrap().eval(1).is_err());
        assert!(phi_fn(&ThresholdFn::constant(1)).eval(1).is_err());
    }

    #[test]
    fn phi_domain() {
        assert!(matches!(phi(&ThresholdFn::constant(0), 1), Err(Error::Precondition(_))));
        let t = ThresholdFn::tabulated(vec![1, 1, 1]).unwrap();
        assert!(phi(&t, 4).is_ok());
        assert!(phi(&t, 5).is_err());
    }

    #[test]
    fn hazard_flag_on_near_integer() {
        // 631379 is the closest non-exact approach of L(n) to an integer
        // below 2^20 (distance 8.4e-7), still outside the band.
        assert!(!phi(&ThresholdFn::constant(0), 631_379).unwrap().hazard);
        let near = ThresholdFn::closed_form(1.0, 0.0, -1e-12, None);
        assert!(!near.eval(3).unwrap().hazard);
        // log2 3 + c lands 1e-11 above the integer 2
        let c = 2.0 - 3f64.log2() + 1e-11;
        let s = ThresholdFn::closed_form(1.0, 0.0, c, None);
        assert_eq!(s.eval(3).unwrap(), Eval { value: 2, hazard: true });
        assert!(phi_fn(&s).eval(3).unwrap().hazard);
    }

    #[test]
    fn phi_fn_examples() {
        let y = ThresholdFn::constant(0);
        let s = phi_fn(&y);
        for n in 2..2000u64 {
            let (l, _) = margin_base(n).unwrap();
            assert_eq!(s.eval(n).unwrap().value, l.floor() as i64);
        }
        let tab = ThresholdFn::tabulated(vec![0, 1, 2, 3, 1, 0, 2, 5, 1]).unwrap();
        let pt = phi_fn(&tab).tabulate(10).unwrap();
        for n in 2..=10 {
            assert_eq!(pt.eval(n).unwrap().value, phi(&tab, n).unwrap().value);
        }
    }

    #[test]
    fn involution_constant_two() {
        let s = ThresholdFn::constant(2);
        let back = phi_fn(&phi_fn(&s));
        for n in 2..=(1u64 << 20) {
            let e = back.eval(n).unwrap();
            if !e.hazard {
                assert_eq!(e.value, 2, "n = {n}");
            }
        }
    }

    #[test]
    fn admissible_examples() {
        let y = ThresholdFn::closed_form(0.0, 1.0, 0.0, None);
        let r = admissible(&phi_fn(&y), 1 << 20).unwrap();
        assert!(r.nonnegative);
        assert!(r.diverging_up_to_horizon);
        assert!(r.heuristic);
        assert_eq!(r.tail_min_levels.last().unwrap(), &TailLevel { level: 4, first_n: 1 << 16 });

        let bounded = phi_fn(&ThresholdFn::constant(0));
        let r = admissible(&bounded, 1 << 16).unwrap();
        assert_eq!((r.min_phi, r.last_phi), (0, 0));
        assert!(r.nonnegative && !r.diverging_up_to_horizon);

        let over = phi_fn(&ThresholdFn::constant(-1));
        let r = admissible(&over, 1 << 16).unwrap();
        assert_eq!(r.min_phi, -1);
        assert!(!r.nonnegative);
    }

    #[test]
    fn parse_mini_language() {
        assert_eq!(ThresholdFn::parse("const:2").unwrap(), ThresholdFn::constant(2));
        assert_eq!(
            ThresholdFn::parse("form:1,-2,0").unwrap(),
            ThresholdFn::closed_form(1.0, -2.0, 0.0, Some(1))
        );
        assert_eq!(ThresholdFn::parse("phi-of:const:3").unwrap(), phi_fn(&ThresholdFn::constant(3)));
        assert_eq!(
            ThresholdFn::parse("clamp:1:phi-of:const:0").unwrap(),
            phi_fn(&ThresholdFn::constant(0)).clamped(1)
        );
        for bad in ["", "const", "const:x", "form:1,2", "form:1,2,nan", "wat:1", "clamp:1"] {
            assert!(ThresholdFn::parse(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn form_is_clamped() {
        let s = ThresholdFn::parse("form:1,-2,0").unwrap();
        // log2 16 − 2·log2 4 = 0 → clamped to 1
        assert_eq!(s.eval(16).unwrap(), Eval { value: 1, hazard: false });
        assert_eq!(s.eval(256).unwrap(), Eval { value: 2, hazard: false });
    }

    #[test]
    fn table_csv() {
        let s = ThresholdFn::read_table("n,s\n2,1\n3,1\n4,2\n".as_bytes()).unwrap();
        assert_eq!(s.horizon(), Some(4));
        assert_eq!(s.eval(4).unwrap().value, 2);
        let mut out = Vec::new();
        s.write_table(4, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "n,s\n2,1\n3,1\n4,2\n");
        assert!(ThresholdFn::read_table("n,s\n3,1\n".as_bytes()).is_err());
        assert!(ThresholdFn::read_table("n,v\n2,1\n".as_bytes()).is_err());
        assert!(ThresholdFn::read_table("n,s\n".as_bytes()).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let s = phi_fn(&ThresholdFn::parse("form:0,1,0").unwrap()).clamped(1);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<ThresholdFn>(&json).unwrap(), s);
    }

    #[test]
    fn invert_examples() {
        let id = p(&(0..10).collect::<Vec<_>>());
        assert_eq!(id.invert(), id);
        let twice = p(&(0..10).map(|m| 2 * m).collect::<Vec<_>>());
        let inv = twice.invert();
        assert_eq!(inv.get(3), Some(2));
        for n in 0..inv.horizon() as u64 {
            assert_eq!(inv.get(n as usize), Some(n.div_ceil(2)));
        }
        assert_eq!(p(&[0, 0, 0]).invert(), p(&[0]));
        assert_eq!(p(&[]).invert(), p(&[]));
    }

    #[test]
    fn dominate_examples() {
        let y = p(&(0..10).map(|k| k + 1).collect::<Vec<_>>());
        let x = y.dominate();
        for m in 1..=10 {
            assert_eq!(x.get(m), Some(m as u64 - 1));
        }
        let zeros = p(&[0; 7]);
        assert_eq!(zeros.dominate(), p(&[6]));
    }

    #[test]
    fn compare_examples() {
        assert_eq!(p(&[1, 2]).compare(&p(&[1, 2])).unwrap(), PointwiseOrder::Equal);
        assert_eq!(p(&[1, 1]).compare(&p(&[2, 2])).unwrap(), PointwiseOrder::Below);
        assert_eq!(p(&[2, 2]).compare(&p(&[1, 1])).unwrap(), PointwiseOrder::Above);
        assert_eq!(p(&[1, 3]).compare(&p(&[2, 2])).unwrap(), PointwiseOrder::Incomparable);
        assert!(p(&[1]).compare(&p(&[1, 2])).is_err());
    }

    fn brute_invert(x: &[u64], n: u64) -> Option<u64> {
        (0..x.len()).find(|&m| x[m] >= n).map(|m| m as u64)
    }

    proptest! {
        #[test]
        fn invert_is_minimal_witness(x in prop::collection::vec(0u64..40, 0..50)) {
            let inv = FinitePrefixSeq::new(x.clone()).invert();
            for n in 0..45u64 {
                prop_assert_eq!(inv.get(n as usize), brute_invert(&x, n));
            }
            prop_assert!(inv.values().windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn dominate_is_max_witness(y in prop::collection::vec(0u64..40, 1..50)) {
            let x = FinitePrefixSeq::new(y.clone()).dominate();
            for m in 0..x.horizon() {
                let brute = (0..y.len()).filter(|&k| y[k] <= m as u64).max().unwrap_or(0) as u64;
                prop_assert_eq!(x.get(m), Some(brute));
            }
        }

        #[test]
        fn compare_is_partial_order(
            a in prop::collection::vec(0u64..4, 5),
            b in prop::collection::vec(0u64..4, 5),
            c in prop::collection::vec(0u64..4, 5),
        ) {
            let (a, b, c) = (p(&a), p(&b), p(&c));
            prop_assert_eq!(a.compare(&a).unwrap(), PointwiseOrder::Equal);
            if a.le(&b).unwrap() && b.le(&a).unwrap() {
                prop_assert_eq!(&a, &b);
            }
            if a.le(&b).unwrap() && b.le(&c).unwrap() {
                prop_assert!(a.le(&c).unwrap());
            }
        }

        #[test]
        fn involution_integer_tables(values in prop::collection::vec(-20i64..20, 1..300)) {
            let s = ThresholdFn::tabulated(values.clone()).unwrap();
            let back = phi_fn(&phi_fn(&s));
            for (i, v) in values.iter().enumerate() {
                let e = back.eval(i as u64 + 2).unwrap();
                if !e.hazard {
                    prop_assert_eq!(e.value, *v);
                }
            }
        }
    }
}

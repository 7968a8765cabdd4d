//! Exact discrepancies `D(t,n)` and `D_k(t,n)` of a bit sequence.
//!
//! With `c_w` the number of window starts `i < n` whose overlapping block
//! `t(i), …, t(i+k-1)` spells `w`,
//!
//! ```text
//! D_k(t,n) = 2^k · max_w |c_w / n − 2^-k| = max_w |2^k·c_w − n| / n
//! ```
//!
//! The right-hand form is integral in the numerator, so values are held as
//! an integer pair and compared by cross-multiplication. The last window
//! counted for checkpoint `n` reads bit `n + k − 2`; callers must supply at
//! least `n + k − 1` bits.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitseq::BitSequence;
use crate::error::{Error, Result};
use crate::thresholds::ThresholdFn;

/// Default ceiling on the block length: 2^28 eight-byte counters.
pub const DEFAULT_K_MAX: u32 = 28;

/// Hard upper bound accepted for `k_max` overrides (window held in a `u64`).
pub const K_MAX_LIMIT: u32 = 48;

/// An exact non-negative rational `numerator / denominator`.
///
/// For discrepancies the denominator is the prefix length `n`, and the
/// pair is kept unreduced so that it prints as `d_num d_den` directly.
/// Equality and ordering are by rational value.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(try_from = "DiscrepancyRepr", into = "DiscrepancyRepr")]
pub struct DiscrepancyValue {
    numerator: u64,
    denominator: u64,
}

#[derive(Serialize, Deserialize)]
struct DiscrepancyRepr {
    numerator: u64,
    denominator: u64,
    /// Convenience approximation; ignored on input.
    #[serde(default, skip_deserializing)]
    float: f64,
}

impl From<DiscrepancyValue> for DiscrepancyRepr {
    fn from(v: DiscrepancyValue) -> Self {
        Self { numerator: v.numerator, denominator: v.denominator, float: v.to_f64() }
    }
}

impl TryFrom<DiscrepancyRepr> for DiscrepancyValue {
    type Error = Error;

    fn try_from(r: DiscrepancyRepr) -> Result<Self> {
        DiscrepancyValue::new(r.numerator, r.denominator)
    }
}

impl DiscrepancyValue {
    pub fn new(numerator: u64, denominator: u64) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::pre("discrepancy denominator must be at least 1"));
        }
        Ok(Self { numerator, denominator })
    }

    pub const ZERO: Self = Self { numerator: 0, denominator: 1 };

    #[inline]
    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    #[inline]
    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// `self <= eps`, decided as `numerator <= eps · denominator` in IEEE
    /// double arithmetic. Monotone in the numerator for a fixed denominator.
    pub fn at_most(&self, eps: f64) -> bool {
        (self.numerator as f64) <= eps * self.denominator as f64
    }

    /// Exact `self >= ratio_num / ratio_den · other`.
    pub fn at_least_fraction_of(&self, other: &Self, ratio_num: u64, ratio_den: u64) -> bool {
        let lhs = self.numerator as u128 * other.denominator as u128 * ratio_den as u128;
        let rhs = other.numerator as u128 * self.denominator as u128 * ratio_num as u128;
        lhs >= rhs
    }
}

impl PartialEq for DiscrepancyValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for DiscrepancyValue {}

impl PartialOrd for DiscrepancyValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DiscrepancyValue {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.numerator as u128 * other.denominator as u128;
        let rhs = other.numerator as u128 * self.denominator as u128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for DiscrepancyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// One evaluated checkpoint of a profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub n: u64,
    pub k: u32,
    pub d: DiscrepancyValue,
}

/// Sequential reader of bits starting at an arbitrary position.
struct BitCursor<'a> {
    words: &'a [u64],
    word_idx: usize,
    current: u64,
    remaining_in_word: u32,
}

impl<'a> BitCursor<'a> {
    fn new(t: &'a BitSequence, pos: usize) -> Self {
        let words = t.words();
        let word_idx = pos / 64;
        let offset = (pos % 64) as u32;
        let current = words.get(word_idx).map_or(0, |w| w >> offset);
        Self { words, word_idx, current, remaining_in_word: 64 - offset }
    }

    #[inline(always)]
    fn next_bit(&mut self) -> u64 {
        if self.remaining_in_word == 0 {
            self.word_idx += 1;
            self.current = self.words[self.word_idx];
            self.remaining_in_word = 64;
        }
        let b = self.current & 1;
        self.current >>= 1;
        self.remaining_in_word -= 1;
        b
    }
}

/// Overlapping `k`-window counts over a growing prefix.
///
/// `counts[w]` is indexed by the window read most-significant-bit first,
/// so `t(i)` is the high bit of the window starting at `i`.
#[derive(Clone, Debug)]
pub struct BlockCountTable {
    k: u32,
    n: u64,
    counts: Vec<u64>,
    /// Window starting at `n - 1`, valid when `n > 0`.
    last_window: u64,
}

fn check_k(k: u32, k_max: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::pre("block length k must be at least 1"));
    }
    let ceiling = k_max.min(K_MAX_LIMIT);
    if k > ceiling {
        return Err(Error::Resource(format!("block length {k} exceeds k_max = {ceiling}")));
    }
    Ok(())
}

fn check_horizon(t: &BitSequence, k: u32, n: u64) -> Result<()> {
    let required = n + k as u64 - 1;
    if (t.len() as u64) < required {
        return Err(Error::Horizon { required, available: t.len() as u64 });
    }
    Ok(())
}

impl BlockCountTable {
    pub fn new(k: u32, k_max: u32) -> Result<Self> {
        check_k(k, k_max)?;
        let size = 1usize << k;
        let mut counts = Vec::new();
        counts
            .try_reserve_exact(size)
            .map_err(|e| Error::Resource(format!("cannot allocate 2^{k} counters: {e}")))?;
        counts.resize(size, 0);
        Ok(Self { k, n: 0, counts, last_window: 0 })
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of windows consumed so far.
    #[inline]
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Forgets all counts and switches to block length `k`, reusing the
    /// allocation when it is large enough.
    pub fn reset(&mut self, k: u32, k_max: u32) -> Result<()> {
        check_k(k, k_max)?;
        let size = 1usize << k;
        if self.counts.capacity() < size {
            *self = Self::new(k, k_max)?;
            return Ok(());
        }
        self.counts.clear();
        self.counts.resize(size, 0);
        self.k = k;
        self.n = 0;
        self.last_window = 0;
        Ok(())
    }

    /// Counts windows `i` for `self.n() <= i < n`.
    pub fn extend_to(&mut self, t: &BitSequence, n: u64) -> Result<()> {
        if n < self.n {
            return Err(Error::pre(format!("cannot rewind table from {} to {n}", self.n)));
        }
        if n == self.n {
            return Ok(());
        }
        check_horizon(t, self.k, n)?;
        let k = self.k as usize;
        let mask = if self.k == 64 { u64::MAX } else { (1u64 << self.k) - 1 };
        let mut window;
        let mut start = self.n as usize;
        if start == 0 {
            let mut cur = BitCursor::new(t, 0);
            window = 0;
            for _ in 0..k {
                window = (window << 1) | cur.next_bit();
            }
            self.counts[window as usize] += 1;
            start = 1;
        } else {
            window = self.last_window;
        }
        let end = n as usize;
        if start < end {
            // the window starting at i ends with bit i + k - 1
            let mut cur = BitCursor::new(t, start + k - 1);
            let counts = &mut self.counts[..];
            for _ in start..end {
                window = ((window << 1) | cur.next_bit()) & mask;
                counts[window as usize] += 1;
            }
        }
        self.last_window = window;
        self.n = n;
        Ok(())
    }

    /// `D_k` of the windows consumed so far. O(2^k).
    pub fn discrepancy(&self) -> Result<DiscrepancyValue> {
        if self.n == 0 {
            return Err(Error::pre("discrepancy needs at least one window (n >= 1)"));
        }
        let (mut lo, mut hi) = (u64::MAX, 0u64);
        for &c in &self.counts {
            lo = lo.min(c);
            hi = hi.max(c);
        }
        let n = self.n as u128;
        let scale = 1u128 << self.k;
        let over = (scale * hi as u128).saturating_sub(n);
        let under = n.saturating_sub(scale * lo as u128);
        let numerator = u64::try_from(over.max(under))
            .map_err(|_| Error::Resource("discrepancy numerator overflows 64 bits".into()))?;
        DiscrepancyValue::new(numerator, self.n)
    }
}

/// `D(t,n) = |2·zeros(n) − n| / n`.
pub fn d1(t: &BitSequence, n: u64) -> Result<DiscrepancyValue> {
    if n == 0 {
        return Err(Error::pre("d1 needs n >= 1"));
    }
    if n > t.len() as u64 {
        return Err(Error::Horizon { required: n, available: t.len() as u64 });
    }
    let zeros = t.zeros_in_prefix(n as usize)?;
    DiscrepancyValue::new((2 * zeros).abs_diff(n), n)
}

/// `D_k(t,n)` with the default `k_max`.
pub fn dk(t: &BitSequence, k: u32, n: u64) -> Result<DiscrepancyValue> {
    dk_bounded(t, k, n, DEFAULT_K_MAX)
}

pub fn dk_bounded(t: &BitSequence, k: u32, n: u64, k_max: u32) -> Result<DiscrepancyValue> {
    if n == 0 {
        return Err(Error::pre("dk needs n >= 1"));
    }
    check_k(k, k_max)?;
    check_horizon(t, k, n)?;
    let mut table = BlockCountTable::new(k, k_max)?;
    table.extend_to(t, n)?;
    table.discrepancy()
}

/// `D_{s(n)}(t,n)` at every checkpoint, in one left-to-right pass.
///
/// The count table is extended between checkpoints while `s(n)` stays the
/// same and rebuilt from position 0 whenever it changes. All checkpoints are
/// validated before any counting starts.
pub fn profile(
    t: &BitSequence,
    s: &ThresholdFn,
    checkpoints: &[u64],
    k_max: u32,
) -> Result<Vec<ProfilePoint>> {
    let plan = plan_profile(t.len() as u64, s, checkpoints, k_max)?;
    profile_planned(t, &plan, k_max)
}

/// Validated `(n, k)` pairs for a profile over a sequence of `available` bits.
pub fn plan_profile(
    available: u64,
    s: &ThresholdFn,
    checkpoints: &[u64],
    k_max: u32,
) -> Result<Vec<(u64, u32)>> {
    if let Some(w) = checkpoints.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::pre(format!(
            "checkpoints must be strictly ascending, found {} then {}",
            w[0], w[1]
        )));
    }
    let mut plan = Vec::with_capacity(checkpoints.len());
    for &n in checkpoints {
        if n == 0 {
            return Err(Error::pre("checkpoint n must be at least 1"));
        }
        let value = s.eval(n)?.value;
        if value < 1 {
            return Err(Error::pre(format!("schedule gives block length {value} < 1 at n = {n}")));
        }
        let k = u32::try_from(value).unwrap_or(u32::MAX);
        check_k(k, k_max)?;
        let required = n + k as u64 - 1;
        if available < required {
            return Err(Error::Horizon { required, available });
        }
        plan.push((n, k));
    }
    Ok(plan)
}

pub(crate) fn profile_planned(
    t: &BitSequence,
    plan: &[(u64, u32)],
    k_max: u32,
) -> Result<Vec<ProfilePoint>> {
    let mut table: Option<BlockCountTable> = None;
    let mut out = Vec::with_capacity(plan.len());
    for &(n, k) in plan {
        let table = match table.as_mut() {
            Some(tab) if tab.k() == k => tab,
            Some(tab) => {
                tab.reset(k, k_max)?;
                tab
            }
            None => table.insert(BlockCountTable::new(k, k_max)?),
        };
        table.extend_to(t, n)?;
        out.push(ProfilePoint { n, k, d: table.discrepancy()? });
    }
    Ok(out)
}

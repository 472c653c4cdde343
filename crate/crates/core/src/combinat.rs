//! Counting, enumeration and unranking.
//!
//! Non-decreasing sequences label the constant-probability regions of a
//! Kronecker multiplication table; unranking multiset permutations lets a
//! grass-hopper land directly on the `i`-th cell of a region; Morton codes
//! translate a multiplication-table position into a row and column.
//!
//! Counts are exact `u128` values. Anything that would overflow 128 bits is
//! reported as [`Error::Overflow`], which caps multiset cardinality (and so
//! the Kronecker power) at 34, since `34! < 2^128 < 35!`.

use std::collections::BTreeMap;
use std::fmt;

use crate::{Error, Result};

/// Exact nonnegative count.
pub type BigCount = u128;

/// Marker value filling an exhausted [`NdSequence`].
pub const SENTINEL: i64 = -1;

/// Non-decreasing sequence of symbols, or the all-`-1` sentinel that marks
/// the end of an enumeration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NdSequence {
    values: Vec<i64>,
}

impl NdSequence {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("sequence must have length at least 1".into()));
        }
        if values.iter().all(|&v| v == SENTINEL) {
            return Ok(NdSequence { values });
        }
        if values.iter().any(|&v| v < 0) {
            return Err(Error::Domain(format!("negative symbol in {values:?}")));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain(format!("{values:?} is not non-decreasing")));
        }
        Ok(NdSequence { values })
    }

    /// The smallest sequence of length `k`: all zeros.
    pub fn first(k: usize) -> Result<Self> {
        Self::new(vec![0; k])
    }

    pub fn sentinel(k: usize) -> Self {
        NdSequence {
            values: vec![SENTINEL; k],
        }
    }

    pub fn is_sentinel(&self) -> bool {
        self.values[0] == SENTINEL
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Symbols as `usize` indices. Meaningless for the sentinel.
    pub fn indices(&self) -> Vec<usize> {
        self.values.iter().map(|&v| v as usize).collect()
    }

    fn check_alphabet(&self, m: usize) -> Result<()> {
        match self.values.last() {
            Some(&last) if last as u64 >= m as u64 => Err(Error::Range(format!(
                "symbol {last} outside alphabet of size {m}"
            ))),
            _ => Ok(()),
        }
    }

    /// Advances in place to the lexicographic successor; see [`next_region`].
    pub fn advance(&mut self, m: usize) -> Result<()> {
        if self.is_sentinel() {
            return Err(Error::Contract("cannot advance past the sentinel".into()));
        }
        self.check_alphabet(m)?;
        let top = m as i64 - 1;
        match self.values.iter().rposition(|&v| v < top) {
            Some(i) => {
                let next = self.values[i] + 1;
                self.values[i..].fill(next);
            }
            None => self.values.fill(SENTINEL),
        }
        Ok(())
    }
}

impl fmt::Display for NdSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(i64::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Lexicographic successor of `cur` among non-decreasing sequences over
/// `[0, m)` of the same length; the sentinel after `[m-1, …, m-1]`.
pub fn next_region(cur: &NdSequence, m: usize) -> Result<NdSequence> {
    let mut next = cur.clone();
    next.advance(m)?;
    Ok(next)
}

/// Iterator over all non-decreasing sequences of a fixed length.
#[derive(Debug, Clone)]
pub struct Regions {
    m: usize,
    cur: NdSequence,
}

impl Iterator for Regions {
    type Item = NdSequence;

    fn next(&mut self) -> Option<NdSequence> {
        if self.cur.is_sentinel() {
            return None;
        }
        let out = self.cur.clone();
        self.cur
            .advance(self.m)
            .expect("iterator stays within its alphabet");
        Some(out)
    }
}

/// Lazily enumerates the non-decreasing length-`k` sequences over `[0, m)`
/// in lexicographic order.
pub fn regions_iter(m: usize, k: usize) -> Result<Regions> {
    if m == 0 || k == 0 {
        return Err(Error::Domain(format!(
            "regions need m >= 1 and k >= 1 (got m = {m}, k = {k})"
        )));
    }
    Ok(Regions {
        m,
        cur: NdSequence::first(k)?,
    })
}

/// All non-decreasing length-`k` sequences over `[0, m)`, in order.
pub fn regions(m: usize, k: usize) -> Result<Vec<NdSequence>> {
    Ok(regions_iter(m, k)?.collect())
}

/// `a * b / c` for values where the division is known to be exact, without
/// overflowing on the intermediate product when the result fits.
fn mul_div_exact(a: u128, b: u128, c: u128) -> Result<u128> {
    let overflow = || Error::Overflow(format!("{a} * {b} / {c}"));
    let q = a / c;
    let r = a % c;
    let high = q.checked_mul(b).ok_or_else(overflow)?;
    let low = r.checked_mul(b).ok_or_else(overflow)? / c;
    high.checked_add(low).ok_or_else(overflow)
}

/// Binomial coefficient `C(n, k)`, exact.
pub fn binomial(n: u128, k: u128) -> Result<BigCount> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc = C(n - k + i - 1, i - 1); each step yields C(n - k + i, i).
        acc = mul_div_exact(acc, n - k + i, i)
            .map_err(|_| Error::Overflow(format!("C({n}, {k}) exceeds 128 bits")))?;
    }
    Ok(acc)
}

/// Number of non-decreasing length-`k` sequences over `m` symbols,
/// `C(k + m - 1, k)`.
pub fn count_regions(m: usize, k: usize) -> Result<BigCount> {
    if m == 0 {
        return Err(Error::Domain("alphabet must be nonempty".into()));
    }
    binomial((k + m - 1) as u128, k as u128)
}

/// Number of distinct probability products of a symmetric `n × n`
/// initiator raised to the `k`-th power: `C(C(n + 1, 2) + k - 1, k)`.
pub fn count_regions_symmetric(n: usize, k: usize) -> Result<BigCount> {
    if n == 0 {
        return Err(Error::Domain("initiator side must be at least 1".into()));
    }
    let distinct = binomial(n as u128 + 1, 2)?;
    binomial(distinct + k as u128 - 1, k as u128)
}

/// Counter form of a multiset: multiplicity per distinct value.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MultisetCounter {
    counts: BTreeMap<i64, u32>,
}

impl MultisetCounter {
    /// Builds a counter from `(value, multiplicity)` pairs. Repeated values
    /// accumulate; zero multiplicities are rejected.
    pub fn from_counts<I: IntoIterator<Item = (i64, u32)>>(pairs: I) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for (value, mult) in pairs {
            if mult == 0 {
                return Err(Error::Domain(format!("value {value} has multiplicity 0")));
            }
            *counts.entry(value).or_insert(0) += mult;
        }
        Ok(MultisetCounter { counts })
    }

    pub fn count(&self, value: i64) -> u32 {
        self.counts.get(&value).copied().unwrap_or(0)
    }

    /// Distinct values in ascending order.
    pub fn keys(&self) -> Vec<i64> {
        self.counts.keys().copied().collect()
    }

    /// Total number of elements, with multiplicity.
    pub fn cardinality(&self) -> usize {
        self.counts.values().map(|&c| c as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u32)> + '_ {
        self.counts.iter().map(|(&v, &c)| (v, c))
    }
}

pub fn ndseq_to_counter(seq: &NdSequence) -> MultisetCounter {
    let mut counts = BTreeMap::new();
    for &v in seq.values() {
        *counts.entry(v).or_insert(0) += 1;
    }
    MultisetCounter { counts }
}

pub fn counter_to_ndseq(mset: &MultisetCounter) -> Result<NdSequence> {
    let values = mset
        .iter()
        .flat_map(|(v, c)| std::iter::repeat_n(v, c as usize))
        .collect();
    NdSequence::new(values)
}

/// Distinct arrangements of a multiset, `k! / (a_1! a_2! ⋯)`.
///
/// Computed as a product of binomials so intermediate values never exceed
/// the result.
pub fn num_multiset_permutations(mset: &MultisetCounter) -> Result<BigCount> {
    let mut total: u128 = 1;
    let mut placed: u128 = 0;
    for (_, c) in mset.iter() {
        placed += c as u128;
        total = total
            .checked_mul(binomial(placed, c as u128)?)
            .ok_or_else(|| Error::Overflow("multiset permutation count exceeds 128 bits".into()))?;
    }
    Ok(total)
}

/// The `rank`-th (0-based) distinct permutation of `seq` in lexicographic
/// order.
///
/// At each position the remaining symbols are tried in ascending order; a
/// symbol `s` with multiplicity `a_s` among `r` remaining elements prefixes
/// exactly `total * a_s / r` of the `total` remaining arrangements.
pub fn unrank_multiset(seq: &NdSequence, rank: u64) -> Result<Vec<i64>> {
    if seq.is_sentinel() {
        return Err(Error::Contract("cannot unrank the sentinel".into()));
    }
    let counter = ndseq_to_counter(seq);
    let mut total = num_multiset_permutations(&counter)?;
    let mut rank = rank as u128;
    if rank >= total {
        return Err(Error::Range(format!(
            "rank too large: {rank} >= {total} permutations of {seq}"
        )));
    }
    let mut scratch: Vec<(i64, u32)> = counter.iter().collect();
    let mut remaining = seq.len() as u128;
    let mut out = Vec::with_capacity(seq.len());
    while remaining > 0 {
        if rank == 0 {
            for &(v, c) in &scratch {
                out.extend(std::iter::repeat_n(v, c as usize));
            }
            break;
        }
        let mut chosen = false;
        for slot in scratch.iter_mut().filter(|s| s.1 > 0) {
            let with_prefix = mul_div_exact(total, slot.1 as u128, remaining)?;
            if rank < with_prefix {
                out.push(slot.0);
                slot.1 -= 1;
                total = with_prefix;
                remaining -= 1;
                chosen = true;
                break;
            }
            rank -= with_prefix;
        }
        // The prefix counts sum to `total`, and rank < total.
        debug_assert!(chosen);
    }
    Ok(out)
}

/// Repeated lexicographic unranking of one multiset's permutations.
///
/// The symbol counts and the permutation count are computed once. Each
/// step then needs only 64-bit arithmetic: the count of permutations
/// starting with a symbol of multiplicity `c` among `r` remaining slots is
/// `total / (r / g) * (c / g)` with `g = gcd(c, r)`, which is exact.
#[derive(Debug, Clone)]
pub struct MultisetUnranker {
    symbols: Vec<i64>,
    counts: Vec<u32>,
    scratch: Vec<u32>,
    len: u64,
    total: u64,
}

impl MultisetUnranker {
    pub fn new(seq: &NdSequence) -> Result<Self> {
        if seq.is_sentinel() {
            return Err(Error::Contract("cannot unrank the sentinel".into()));
        }
        let counter = ndseq_to_counter(seq);
        let total = num_multiset_permutations(&counter)?;
        let total = u64::try_from(total).map_err(|_| {
            Error::Capacity(format!("{seq} has {total} permutations, beyond 64 bits"))
        })?;
        let (symbols, counts): (Vec<i64>, Vec<u32>) = counter.iter().unzip();
        Ok(MultisetUnranker {
            scratch: counts.clone(),
            symbols,
            counts,
            len: seq.len() as u64,
            total,
        })
    }

    /// Number of distinct permutations.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Writes permutation `rank` into `out`, replacing its contents.
    pub fn unrank_into(&mut self, rank: u64, out: &mut Vec<i64>) -> Result<()> {
        if rank >= self.total {
            return Err(Error::Range(format!(
                "rank too large: {rank} >= {} permutations",
                self.total
            )));
        }
        out.clear();
        self.scratch.copy_from_slice(&self.counts);
        let (mut rank, mut total, mut remaining) = (rank, self.total, self.len);
        while remaining > 0 {
            if rank == 0 {
                for (&v, &c) in self.symbols.iter().zip(&self.scratch) {
                    out.extend(std::iter::repeat_n(v, c as usize));
                }
                break;
            }
            for (i, c) in self.scratch.iter_mut().enumerate() {
                if *c == 0 {
                    continue;
                }
                let with_prefix = match total.checked_mul(*c as u64) {
                    Some(x) => x / remaining,
                    None => {
                        let g = gcd(*c as u64, remaining);
                        total / (remaining / g) * (*c as u64 / g)
                    }
                };
                if rank < with_prefix {
                    out.push(self.symbols[i]);
                    *c -= 1;
                    total = with_prefix;
                    remaining -= 1;
                    break;
                }
                rank -= with_prefix;
            }
        }
        Ok(())
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The `rank`-th strictly increasing length-`length` sequence over
/// `[0, max_val)` in lexicographic order.
pub fn unrank_combination(rank: u128, max_val: u64, length: u64) -> Result<Vec<u64>> {
    let total = binomial(max_val as u128, length as u128)?;
    if rank >= total {
        return Err(Error::Range(format!(
            "rank {rank} >= C({max_val}, {length}) = {total}"
        )));
    }
    let mut out = Vec::with_capacity(length as usize);
    let mut rank = rank;
    let mut candidate: u64 = 0;
    if length == 0 {
        return Ok(out);
    }
    // `block` counts the combinations whose next element is `candidate`:
    // C(max_val - candidate - 1, length - out.len() - 1).
    let mut rest = length - 1;
    let mut block = binomial((max_val - 1) as u128, rest as u128)?;
    loop {
        let x = (max_val - candidate - 1) as u128;
        if rank < block {
            out.push(candidate);
            if rest == 0 {
                return Ok(out);
            }
            // C(x - 1, rest - 1) = C(x, rest) * rest / x
            block = mul_div_exact(block, rest as u128, x)?;
            rest -= 1;
        } else {
            rank -= block;
            // C(x - 1, rest) = C(x, rest) * (x - rest) / x
            block = mul_div_exact(block, x - rest as u128, x)?;
        }
        candidate += 1;
    }
}

/// Splits a Morton index into `(row, col)`.
///
/// The base-`n` digits of `index` are dealt out alternately starting from
/// the least significant: even positions to the row, odd to the column.
pub fn morton_decode(index: u128, n: u64) -> Result<(u128, u128)> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "Morton base must be at least 2, got {n}"
        )));
    }
    let n = n as u128;
    let (mut row, mut col) = (0u128, 0u128);
    let (mut row_base, mut col_base) = (1u128, 1u128);
    let mut rest = index;
    let mut to_row = true;
    while rest > 0 {
        let digit = rest % n;
        rest /= n;
        if to_row {
            row += row_base * digit;
            row_base = row_base.saturating_mul(n);
        } else {
            col += col_base * digit;
            col_base = col_base.saturating_mul(n);
        }
        to_row = !to_row;
    }
    Ok((row, col))
}

/// Interleaves the `k` base-`n` digits of `row` and `col`, row digit in the
/// lower position of each pair. Inverse of [`morton_decode`].
pub fn morton_encode(row: u128, col: u128, n: u64, k: u32) -> Result<u128> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "Morton base must be at least 2, got {n}"
        )));
    }
    let n = n as u128;
    let side = n
        .checked_pow(k)
        .filter(|s| s.checked_mul(*s).is_some())
        .ok_or_else(|| Error::Overflow(format!("{n}^(2*{k}) exceeds 128 bits")))?;
    if row >= side || col >= side {
        return Err(Error::Range(format!(
            "coordinate ({row}, {col}) outside [0, {side})^2"
        )));
    }
    let (mut row, mut col) = (row, col);
    let mut index = 0u128;
    let mut place = 1u128;
    for _ in 0..k {
        index += (row % n) * place;
        place *= n;
        index += (col % n) * place;
        place *= n;
        row /= n;
        col /= n;
    }
    Ok(index)
}

/// Reads `mind` as the digits of a base-`base` number, most significant
/// first.
pub fn multiindex_to_linear(mind: &[usize], base: u64) -> Result<u128> {
    let mut linear = 0u128;
    for &d in mind {
        if d as u64 >= base {
            return Err(Error::Range(format!("digit {d} outside base {base}")));
        }
        linear = linear
            .checked_mul(base as u128)
            .and_then(|l| l.checked_add(d as u128))
            .ok_or_else(|| Error::Overflow(format!("multi-index {mind:?} exceeds 128 bits")))?;
    }
    Ok(linear)
}

//! Rank and invariant factors of integer matrices.
//!
//! Elimination runs in two phases. The sparse phase pivots on unit entries
//! (which is nearly everything for cube differentials), choosing pivots with
//! short rows and columns to limit fill-in. Whatever is left has no unit
//! entries and goes through a dense Smith normal form. Arithmetic is checked
//! `i64`; on overflow the whole computation restarts over `BigInt`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::SparseMatrix;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SnfSummary {
    pub rank: usize,
    /// Invariant factors greater than one, each dividing the next.
    pub torsion: Vec<BigInt>,
}

#[derive(Debug)]
pub(crate) struct Overflow;

pub(crate) trait Coeff: Clone + Debug + PartialEq {
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn is_unit(&self) -> bool;
    /// `self - f * other`
    fn sub_mul(&self, f: &Self, other: &Self) -> Result<Self, Overflow>;
    fn mul(&self, other: &Self) -> Result<Self, Overflow>;
    /// Euclidean quotient with `|remainder| < |divisor|`.
    fn quot(&self, divisor: &Self) -> Result<Self, Overflow>;
    fn abs_cmp(&self, other: &Self) -> Ordering;
    fn divides(&self, other: &Self) -> bool;
    fn to_bigint(&self) -> BigInt;
}

impl Coeff for i64 {
    fn zero() -> Self {
        0
    }
    fn from_i64(v: i64) -> Self {
        v
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_unit(&self) -> bool {
        *self == 1 || *self == -1
    }
    fn sub_mul(&self, f: &Self, other: &Self) -> Result<Self, Overflow> {
        f.checked_mul(*other).and_then(|p| self.checked_sub(p)).ok_or(Overflow)
    }
    fn mul(&self, other: &Self) -> Result<Self, Overflow> {
        self.checked_mul(*other).ok_or(Overflow)
    }
    fn quot(&self, divisor: &Self) -> Result<Self, Overflow> {
        self.checked_div_euclid(*divisor).ok_or(Overflow)
    }
    fn abs_cmp(&self, other: &Self) -> Ordering {
        self.unsigned_abs().cmp(&other.unsigned_abs())
    }
    fn divides(&self, other: &Self) -> bool {
        *self != 0 && other % self == 0
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Coeff for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_unit(&self) -> bool {
        self.abs().is_one()
    }
    fn sub_mul(&self, f: &Self, other: &Self) -> Result<Self, Overflow> {
        Ok(self - f * other)
    }
    fn mul(&self, other: &Self) -> Result<Self, Overflow> {
        Ok(self * other)
    }
    fn quot(&self, divisor: &Self) -> Result<Self, Overflow> {
        Ok(self.div_floor(divisor))
    }
    fn abs_cmp(&self, other: &Self) -> Ordering {
        self.abs().cmp(&other.abs())
    }
    fn divides(&self, other: &Self) -> bool {
        !Zero::is_zero(self) && Zero::is_zero(&(other % self))
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
}

/// The field with two elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Z2(pub bool);

impl Coeff for Z2 {
    fn zero() -> Self {
        Z2(false)
    }
    fn from_i64(v: i64) -> Self {
        Z2(v % 2 != 0)
    }
    fn is_zero(&self) -> bool {
        !self.0
    }
    fn is_unit(&self) -> bool {
        self.0
    }
    fn sub_mul(&self, f: &Self, other: &Self) -> Result<Self, Overflow> {
        Ok(Z2(self.0 ^ (f.0 & other.0)))
    }
    fn mul(&self, other: &Self) -> Result<Self, Overflow> {
        Ok(Z2(self.0 & other.0))
    }
    fn quot(&self, divisor: &Self) -> Result<Self, Overflow> {
        Ok(Z2(self.0 && divisor.0))
    }
    fn abs_cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
    fn divides(&self, _other: &Self) -> bool {
        self.0
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(self.0 as i64)
    }
}

/// Integer rank and torsion of `m`.
pub fn snf_integer(m: &SparseMatrix) -> SnfSummary {
    match snf_generic::<i64>(m) {
        Ok(s) => s,
        Err(Overflow) => snf_generic::<BigInt>(m).expect("big integers cannot overflow"),
    }
}

/// Rank of `m` reduced mod 2.
pub fn rank_mod2(m: &SparseMatrix) -> usize {
    snf_generic::<Z2>(m).expect("Z2 cannot overflow").rank
}

pub(crate) fn snf_generic<T: Coeff>(m: &SparseMatrix) -> Result<SnfSummary, Overflow> {
    let mut rows: Vec<HashMap<u32, T>> = m
        .row_lists()
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|(c, v)| (c, T::from_i64(v)))
                .filter(|(_, v)| !v.is_zero())
                .collect()
        })
        .collect();
    let mut col_rows: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); m.cols()];
    for (r, row) in rows.iter().enumerate() {
        for &c in row.keys() {
            col_rows[c as usize].insert(r as u32);
        }
    }
    let mut rank = 0;
    // candidate rows ordered by length; stale entries are skipped on pop
    let mut queue: BTreeSet<(usize, u32)> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.is_empty())
        .map(|(i, r)| (r.len(), i as u32))
        .collect();
    let mut no_unit: BTreeSet<u32> = BTreeSet::new();
    while let Some((len, r)) = queue.pop_first() {
        let row = &rows[r as usize];
        if row.len() != len || len == 0 {
            if !row.is_empty() {
                queue.insert((row.len(), r));
            }
            continue;
        }
        let pivot = row
            .iter()
            .filter(|(_, v)| v.is_unit())
            .map(|(&c, _)| (col_rows[c as usize].len(), c))
            .min();
        let Some((_, pc)) = pivot else {
            no_unit.insert(r);
            continue;
        };
        rank += 1;
        let prow = std::mem::take(&mut rows[r as usize]);
        let pval = prow[&pc].clone();
        for &c in prow.keys() {
            col_rows[c as usize].remove(&r);
        }
        let targets: Vec<u32> = std::mem::take(&mut col_rows[pc as usize]).into_iter().collect();
        for t in targets {
            let trow = &mut rows[t as usize];
            let tval = trow.remove(&pc).expect("column index is consistent");
            // pivot is ±1, so tval / pval = tval * pval
            let f = tval.mul(&pval)?;
            for (&c, v) in prow.iter() {
                if c == pc {
                    continue;
                }
                let old = trow.get(&c).cloned().unwrap_or_else(T::zero);
                let new = old.sub_mul(&f, v)?;
                if new.is_zero() {
                    if trow.remove(&c).is_some() {
                        col_rows[c as usize].remove(&t);
                    }
                } else {
                    if !trow.contains_key(&c) {
                        col_rows[c as usize].insert(t);
                    }
                    trow.insert(c, new);
                }
            }
            let new_len = trow.len();
            if no_unit.remove(&t) || new_len > 0 {
                queue.insert((new_len, t));
            }
        }
    }
    // dense phase on rows that never offered a unit pivot
    let rest: Vec<u32> = no_unit.into_iter().filter(|&r| !rows[r as usize].is_empty()).collect();
    if rest.is_empty() {
        return Ok(SnfSummary {
            rank,
            torsion: Vec::new(),
        });
    }
    let cols: BTreeSet<u32> = rest.iter().flat_map(|&r| rows[r as usize].keys().copied()).collect();
    let col_index: HashMap<u32, usize> = cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut dense: Vec<Vec<T>> = rest
        .iter()
        .map(|&r| {
            let mut out = vec![T::zero(); cols.len()];
            for (c, v) in rows[r as usize].drain() {
                out[col_index[&c]] = v;
            }
            out
        })
        .collect();
    let diag = dense_snf(&mut dense)?;
    rank += diag.len();
    let torsion = normalize_chain(diag.iter().map(T::to_bigint).collect());
    Ok(SnfSummary { rank, torsion })
}

/// Diagonalizes `a` in place by unimodular row and column operations and
/// returns the nonzero diagonal entries.
pub(crate) fn dense_snf<T: Coeff>(a: &mut [Vec<T>]) -> Result<Vec<T>, Overflow> {
    let nr = a.len();
    let nc = a.first().map_or(0, Vec::len);
    let mut diag = Vec::new();
    let mut t = 0;
    while t < nr.min(nc) {
        // smallest nonzero entry in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, v) in row.iter().enumerate().skip(t) {
                if !v.is_zero() && best.is_none_or(|(bi, bj)| v.abs_cmp(&a[bi][bj]) == Ordering::Less) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        loop {
            let p = a[t][t].clone();
            let mut clean = true;
            for i in t + 1..nr {
                if a[i][t].is_zero() {
                    continue;
                }
                let f = a[i][t].quot(&p)?;
                for j in t..nc {
                    let pv = a[t][j].clone();
                    a[i][j] = a[i][j].sub_mul(&f, &pv)?;
                }
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..nc {
                if a[t][j].is_zero() {
                    continue;
                }
                let f = a[t][j].quot(&p)?;
                for row in a.iter_mut().skip(t) {
                    let pv = row[t].clone();
                    row[j] = row[j].sub_mul(&f, &pv)?;
                }
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if clean {
                // pivot must divide the rest; otherwise fold an offending row in
                let bad = (t + 1..nr).find(|&i| (t + 1..nc).any(|j| !p.divides(&a[i][j])));
                match bad {
                    Some(i) => {
                        for j in t..nc {
                            let v = a[i][j].clone();
                            a[t][j] = a[t][j].sub_mul(&T::from_i64(-1), &v)?;
                        }
                    }
                    None => break,
                }
                continue;
            }
            // move the smallest remaining entry of row/column t to the pivot
            let mut best = (t, t);
            for i in t + 1..nr {
                if !a[i][t].is_zero() && a[i][t].abs_cmp(&a[best.0][best.1]) == Ordering::Less {
                    best = (i, t);
                }
            }
            for j in t + 1..nc {
                if !a[t][j].is_zero() && a[t][j].abs_cmp(&a[best.0][best.1]) == Ordering::Less {
                    best = (t, j);
                }
            }
            if best.0 != t {
                a.swap(t, best.0);
            } else if best.1 != t {
                for row in a.iter_mut() {
                    row.swap(t, best.1);
                }
            }
        }
        diag.push(a[t][t].clone());
        t += 1;
    }
    Ok(diag)
}

/// Rewrites nonzero diagonal entries as a divisibility chain and keeps the
/// factors greater than one.
pub(crate) fn normalize_chain(diag: Vec<BigInt>) -> Vec<BigInt> {
    let mut d: Vec<BigInt> = diag.into_iter().map(|v| v.abs()).collect();
    // repeated gcd/lcm sweeps turn any diagonal into Smith form
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let g = d[i].gcd(&d[j]);
            let l = d[i].lcm(&d[j]);
            d[i] = g;
            d[j] = l;
        }
    }
    d.retain(|v| !v.is_one());
    d
}

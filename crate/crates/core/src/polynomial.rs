//! Laurent polynomials in `q`, the bracket/Jones state sum, and the
//! Vassiliev skein extension of scalar invariants.
//!
//! Everything here is computed directly from the diagram's states, without
//! building a chain complex, so it serves as the reference for the graded
//! Euler characteristics produced by the complex engine.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::diagram::{KnotDiagram, SingularDiagram};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("expansion order {0} exceeds the limit of {MAX_EXPANSION_ORDER}")]
    OrderTooLarge(usize),
    #[error("stratum {id} has {got} double points, expected {expected}")]
    DoubleCount { id: String, expected: usize, got: usize },
}

pub const MAX_EXPANSION_ORDER: usize = 16;

/// Finite sum `Σ c_e q^e` with integer coefficients; zero terms are never
/// stored, so structural equality is polynomial equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentPoly {
    terms: BTreeMap<i32, i64>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    /// `c q^e`
    pub fn monomial(c: i64, e: i32) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }

    pub fn q() -> Self {
        Self::monomial(1, 1)
    }

    /// `q + q⁻¹`, the graded rank of `V`.
    pub fn circle() -> Self {
        Self::from_terms([(1, 1), (-1, 1)])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i32, i64)>) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, e: i32, c: i64) {
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(e).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: i32) -> i64 {
        self.terms.get(&e).copied().unwrap_or(0)
    }

    /// `(exponent, coefficient)` pairs in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i32, i64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    /// Multiplication by `c q^e`.
    pub fn scale_shift(&self, c: i64, e: i32) -> Self {
        if c == 0 {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(&k, &v)| (k + e, v * c)).collect(),
        }
    }

    /// `p(q⁻¹)`
    pub fn inverted(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(&k, &v)| (-k, v)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Value at `q = 1`.
    pub fn at_one(&self) -> i64 {
        self.terms.values().sum()
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (&e, &c)) in self.terms.iter().enumerate() {
            let sign = if c < 0 { "-" } else { "+" };
            if i == 0 {
                if c < 0 {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.abs();
            match (a, e) {
                (_, 0) => write!(f, "{a}")?,
                (1, 1) => f.write_str("q")?,
                (1, _) => write!(f, "q^{e}")?,
                (_, 1) => write!(f, "{a}q")?,
                _ => write!(f, "{a}q^{e}")?,
            }
        }
        Ok(())
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, c);
        }
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, -c);
        }
        out
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in rhs.terms() {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale_shift(-1, 0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

impl std::iter::Sum for LaurentPoly {
    fn sum<I: Iterator<Item = LaurentPoly>>(iter: I) -> LaurentPoly {
        iter.fold(LaurentPoly::zero(), |a, b| &a + &b)
    }
}

/// `Σ_s (−1)^{|s|} q^{|s|} (q + q⁻¹)^{#circles(s)}` over all complete
/// smoothings `s`.
pub fn kauffman_bracket(d: &KnotDiagram) -> LaurentPoly {
    let n = d.crossing_count();
    // tally states by (weight, circle count), then expand once per class
    let tally = (0..1u64 << n)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<(u32, usize), i64>, bits| {
            *acc.entry((bits.count_ones(), d.circle_count(bits))).or_default() += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    let circle = LaurentPoly::circle();
    tally
        .into_iter()
        .map(|((w, c), count)| {
            let sign = if w % 2 == 0 { count } else { -count };
            circle.pow(c as u32).scale_shift(sign, w as i32)
        })
        .sum()
}

/// `(−1)^{n₋} q^{n₊ − 2n₋} ⟨D⟩`
pub fn jones_unnormalized(d: &KnotDiagram) -> LaurentPoly {
    let (np, nm) = d.signed_counts();
    let sign = if nm % 2 == 0 { 1 } else { -1 };
    kauffman_bracket(d).scale_shift(sign, np as i32 - 2 * nm as i32)
}

/// Coefficients of `h⁰ … h^order` in `p(e^h)`.
pub fn h_expansion(p: &LaurentPoly, order: usize) -> Result<Vec<BigRational>, PolyError> {
    if order > MAX_EXPANSION_ORDER {
        return Err(PolyError::OrderTooLarge(order));
    }
    let mut out = Vec::with_capacity(order + 1);
    let mut factorial = BigInt::one();
    for k in 0..=order {
        if k > 0 {
            factorial *= k;
        }
        let num: BigInt = p
            .terms()
            .map(|(e, c)| BigInt::from(c) * num_traits::pow(BigInt::from(e), k))
            .sum();
        out.push(BigRational::new(num, factorial.clone()));
    }
    Ok(out)
}

type Evaluator = dyn Fn(&KnotDiagram) -> BigRational + Send + Sync;

/// A rational-valued function on diagrams, expected (not assumed) to be a
/// knot invariant.
#[derive(Clone)]
pub struct ScalarInvariant {
    pub name: String,
    evaluate: Arc<Evaluator>,
}

impl fmt::Debug for ScalarInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarInvariant").field("name", &self.name).finish()
    }
}

impl ScalarInvariant {
    pub fn new(
        name: impl Into<String>,
        evaluate: impl Fn(&KnotDiagram) -> BigRational + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            evaluate: Arc::new(evaluate),
        }
    }

    pub fn evaluate(&self, d: &KnotDiagram) -> BigRational {
        (self.evaluate)(d)
    }

    pub fn constant(value: i64) -> Self {
        Self::new(format!("const {value}"), move |_| {
            BigRational::from_integer(value.into())
        })
    }

    /// `c_k`: coefficient of `h^k` in the unnormalized Jones polynomial at
    /// `q = e^h`, with the unknot's value subtracted so that the unknot maps
    /// to zero.
    pub fn jones_coefficient(k: usize) -> Self {
        assert!(k <= MAX_EXPANSION_ORDER);
        let unknot = h_expansion(&LaurentPoly::circle(), k).expect("order checked")[k].clone();
        Self::new(format!("c{k}"), move |d| {
            let c = h_expansion(&jones_unnormalized(d), k).expect("order checked");
            &c[k] - &unknot
        })
    }
}

/// `Σ_U (−1)^{|U|} inv(D_U)`, where `D_U` switches the double points in `U`
/// away from the base diagram's crossings.
pub fn vassiliev_extend(inv: &ScalarInvariant, s: &SingularDiagram) -> BigRational {
    let m = s.codimension();
    (0..1u64 << m)
        .map(|mask| {
            let v = inv.evaluate(&s.resolution(mask));
            if mask.count_ones() % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .fold(BigRational::zero(), |a, b| a + b)
}

/// The same extension computed by resolving double points one at a time in
/// the given order (positions into the doubled set), applying
/// `λ(×) = λ(over) − λ(under)` recursively.
pub fn vassiliev_extend_ordered(inv: &ScalarInvariant, s: &SingularDiagram, order: &[usize]) -> BigRational {
    let doubled = s.doubled_list();
    fn go(inv: &ScalarInvariant, d: &KnotDiagram, rest: &[usize]) -> BigRational {
        match rest.split_first() {
            None => inv.evaluate(d),
            Some((&k, tail)) => {
                let under = d.switch_crossing(k).expect("doubled crossing in range");
                go(inv, d, tail) - go(inv, &under, tail)
            }
        }
    }
    let ks: Vec<usize> = order.iter().map(|&t| doubled[t]).collect();
    go(inv, &s.base, &ks)
}

/// Every way to mark `doubled` double points on each knot diagram with at
/// most `max_crossings` crossings, combined with every over/under pattern on
/// the remaining crossings.
pub fn singular_corpus(diagrams: &[KnotDiagram], doubled: usize, max_crossings: usize) -> Vec<SingularDiagram> {
    let mut out = Vec::new();
    for d in diagrams
        .iter()
        .filter(|d| d.is_knot() && d.crossing_count() <= max_crossings)
    {
        let n = d.crossing_count();
        for ks in subsets(n, doubled) {
            let free: Vec<usize> = (0..n).filter(|k| !ks.contains(k)).collect();
            for pattern in 0..1u64 << free.len() {
                let switched: Vec<usize> = free
                    .iter()
                    .enumerate()
                    .filter(|&(t, _)| pattern >> t & 1 == 1)
                    .map(|(_, &k)| k)
                    .collect();
                let base = d.switch_all(&switched).expect("in range");
                let base = match d.name() {
                    Some(name) if pattern != 0 => base.with_name(format!("{name}~{pattern}")),
                    _ => base,
                };
                out.push(base.mark_singular(&ks).expect("distinct and in range"));
            }
        }
    }
    out
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        go(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

#[derive(Clone, Debug)]
pub struct OrderReport {
    pub invariant: String,
    pub order: usize,
    pub values: Vec<(String, BigRational)>,
    pub consistent: bool,
    pub witness: Option<(String, BigRational)>,
}

impl OrderReport {
    pub fn verdict(&self) -> String {
        match &self.witness {
            None => format!(
                "consistent with type <= {} ({} strata, all zero)",
                self.order,
                self.values.len()
            ),
            Some((id, v)) => format!("not of type <= {}: {id} gives {v}", self.order),
        }
    }
}

/// Evaluates the skein extension of `inv` on every `(n+1)`-singular
/// diagram in the corpus.
pub fn order_test(inv: &ScalarInvariant, n: usize, corpus: &[SingularDiagram]) -> Result<OrderReport, PolyError> {
    if let Some(bad) = corpus.iter().find(|s| s.codimension() != n + 1) {
        return Err(PolyError::DoubleCount {
            id: bad.id(),
            expected: n + 1,
            got: bad.codimension(),
        });
    }
    let values: Vec<(String, BigRational)> = corpus.par_iter().map(|s| (s.id(), vassiliev_extend(inv, s))).collect();
    let witness = values.iter().find(|(_, v)| !v.is_zero()).cloned();
    Ok(OrderReport {
        invariant: inv.name.clone(),
        order: n,
        consistent: witness.is_none(),
        witness,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_pd;

    fn p(terms: &[(i32, i64)]) -> LaurentPoly {
        LaurentPoly::from_terms(terms.iter().copied())
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn trefoil() -> KnotDiagram {
        parse_pd("PD[X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)]").unwrap()
    }

    #[test]
    fn display() {
        assert_eq!(LaurentPoly::circle().to_string(), "q^-1 + q");
        assert_eq!(p(&[(1, 1), (3, 1), (5, 1), (9, -1)]).to_string(), "q + q^3 + q^5 - q^9");
        assert_eq!(p(&[(-2, -3), (0, 4), (1, 2)]).to_string(), "-3q^-2 + 4 + 2q");
        assert_eq!(LaurentPoly::zero().to_string(), "0");
    }

    #[test]
    fn arithmetic_drops_zeros() {
        let a = LaurentPoly::circle();
        assert!((&a - &a).is_zero());
        assert_eq!(&a * &a, p(&[(-2, 1), (0, 2), (2, 1)]));
        assert_eq!(a.inverted(), a);
    }

    #[test]
    fn brackets_of_unlinks() {
        assert_eq!(kauffman_bracket(&KnotDiagram::unknot()), LaurentPoly::circle());
        assert_eq!(kauffman_bracket(&KnotDiagram::unlink(2)), LaurentPoly::circle().pow(2));
        assert_eq!(jones_unnormalized(&KnotDiagram::unknot()), LaurentPoly::circle());
    }

    #[test]
    fn trefoil_jones() {
        let j = jones_unnormalized(&trefoil());
        assert_eq!(j.to_string(), "q + q^3 + q^5 - q^9");
        assert_eq!(jones_unnormalized(&trefoil().mirror()), j.inverted());
    }

    #[test]
    fn switched_trefoil_is_unknot() {
        let t = trefoil();
        for k in 0..3 {
            let s = t.switch_crossing(k).unwrap();
            assert_eq!(jones_unnormalized(&s), LaurentPoly::circle());
        }
    }

    #[test]
    fn kinks_are_invisible_to_jones() {
        for pd in ["PD[X(1,1,2,2)]", "PD[X(1,2,2,1)]"] {
            assert_eq!(jones_unnormalized(&parse_pd(pd).unwrap()), LaurentPoly::circle());
        }
    }

    #[test]
    fn expansion_examples() {
        let c = h_expansion(&LaurentPoly::circle(), 2).unwrap();
        assert_eq!(c, vec![r(2, 1), r(0, 1), r(1, 1)]);
        assert_eq!(h_expansion(&LaurentPoly::q(), 1).unwrap(), vec![r(1, 1), r(1, 1)]);
        assert!(h_expansion(&LaurentPoly::zero(), 5)
            .unwrap()
            .iter()
            .all(|v| v.is_zero()));
        assert_eq!(h_expansion(&LaurentPoly::q(), 17), Err(PolyError::OrderTooLarge(17)));
        // e^{3h} at order 3: 27/6
        assert_eq!(h_expansion(&LaurentPoly::monomial(1, 3), 3).unwrap()[3], r(9, 2));
    }

    #[test]
    fn vassiliev_basics() {
        let t = trefoil();
        let c2 = ScalarInvariant::jones_coefficient(2);
        let empty = t.mark_singular(&[]).unwrap();
        assert_eq!(vassiliev_extend(&c2, &empty), c2.evaluate(&t));
        let one = t.mark_singular(&[0]).unwrap();
        let expected = c2.evaluate(&t) - c2.evaluate(&t.switch_crossing(0).unwrap());
        assert_eq!(vassiliev_extend(&c2, &one), expected);
        let k = ScalarInvariant::constant(7);
        assert!(vassiliev_extend(&k, &t.mark_singular(&[0, 2]).unwrap()).is_zero());
    }

    #[test]
    fn order_test_rejects_wrong_codimension() {
        let t = trefoil();
        let corpus = vec![t.mark_singular(&[0]).unwrap()];
        let err = order_test(&ScalarInvariant::constant(1), 1, &corpus).unwrap_err();
        assert!(matches!(
            err,
            PolyError::DoubleCount {
                expected: 2,
                got: 1,
                ..
            }
        ));
    }

    #[test]
    fn subsets_count() {
        assert_eq!(subsets(6, 3).len(), 20);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert!(subsets(2, 3).is_empty());
    }
}

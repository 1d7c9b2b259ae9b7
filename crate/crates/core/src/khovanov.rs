//! The Khovanov complex of a diagram, assembled from its cube of
//! resolutions.
//!
//! Generators are pairs `(state, labeling)`; bit `c` of the labeling is set
//! when circle `c` carries `v₋`. Raw gradings are `i = |s|` and
//! `j = #v₊ − #v₋ + |s|`; the orientation shift `(−n₋, n₊ − 2n₋)` is only
//! recorded as the complex's offsets.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use thiserror::Error;

use crate::complex::{Bidegree, ChainComplex, ComplexError, SparseMatrix};
use crate::diagram::{DiagramError, KnotDiagram, State};

pub const DEFAULT_MAX_STATES: u64 = 1 << 14;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KhovanovError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("diagram has {0} components; only knots are accepted here")]
    MultiComponent(usize),
    #[error("{crossings} crossings give 2^{crossings} states, above the limit of {max_states}")]
    TooManyStates { crossings: usize, max_states: u64 },
    #[error("bit {0} of the state is already 1")]
    BitAlreadySet(usize),
}

pub type Result<T> = std::result::Result<T, KhovanovError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubeGenerator {
    pub state: u64,
    /// Bit `c` set means circle `c` is labeled `v₋`.
    pub labeling: u64,
}

/// Raw-graded cube complex together with the `(state, labeling)` behind
/// every generator.
#[derive(Clone, Debug)]
pub struct CubeComplex {
    pub complex: ChainComplex,
    pub generators: BTreeMap<Bidegree, Vec<CubeGenerator>>,
    pub crossings: usize,
}

impl CubeComplex {
    /// `(state, labeling) -> (bidegree, index)`
    pub fn index(&self) -> HashMap<CubeGenerator, (Bidegree, usize)> {
        self.generators
            .iter()
            .flat_map(|(&d, gs)| gs.iter().enumerate().map(move |(i, &g)| (g, (d, i))))
            .collect()
    }
}

/// `011:+--`: state bits by crossing, then circle labels in circle order.
pub fn generator_label(n: usize, circles: usize, g: CubeGenerator) -> String {
    let mut s = State::new(g.state, n).to_string();
    s.push(':');
    for c in 0..circles {
        s.push(if g.labeling >> c & 1 == 1 { '-' } else { '+' });
    }
    s
}

fn check_states(d: &KnotDiagram, max_states: u64) -> Result<()> {
    let n = d.crossing_count();
    if n >= 63 || (1u64 << n) > max_states {
        return Err(KhovanovError::TooManyStates {
            crossings: n,
            max_states,
        });
    }
    Ok(())
}

struct Resolution {
    circle_of: Vec<u16>,
    circles: usize,
}

/// How an edge `s → s + e_i` acts on circles.
enum EdgeKind {
    /// Circles `a` and `b` of the source merge into circle `c` of the target.
    Merge { a: usize, b: usize, c: usize },
    /// Circle `a` of the source splits into circles `c1` and `c2`.
    Split { a: usize, c1: usize, c2: usize },
}

struct Edge {
    kind: EdgeKind,
    /// Target index of every source circle not involved in the edge.
    carry: Vec<Option<usize>>,
}

fn resolution(d: &KnotDiagram, bits: u64) -> Resolution {
    let (circle_of, arc_circles) = d.circle_assignment(bits);
    Resolution {
        circle_of,
        circles: arc_circles + d.loops() as usize,
    }
}

fn edge_kind(d: &KnotDiagram, i: usize, src: &Resolution, tgt: &Resolution) -> Edge {
    let [a, b, c, _] = d.crossings()[i];
    let circ = |r: &Resolution, arc: u32| r.circle_of[arc as usize - 1] as usize;
    let arc_circles_src = src.circles - d.loops() as usize;
    let arc_circles_tgt = tgt.circles - d.loops() as usize;
    let (ca, cb) = (circ(src, a), circ(src, b));
    let kind = if ca != cb {
        EdgeKind::Merge {
            a: ca,
            b: cb,
            c: circ(tgt, a),
        }
    } else {
        EdgeKind::Split {
            a: ca,
            c1: circ(tgt, a),
            c2: circ(tgt, c),
        }
    };
    let mut carry = vec![None; src.circles];
    for (arc, &cs) in src.circle_of.iter().enumerate() {
        let cs = cs as usize;
        if cs != ca && cs != cb && carry[cs].is_none() {
            carry[cs] = Some(tgt.circle_of[arc] as usize);
        }
    }
    for l in 0..d.loops() as usize {
        carry[arc_circles_src + l] = Some(arc_circles_tgt + l);
    }
    Edge { kind, carry }
}

/// Image of one labeled generator under the Frobenius map of an edge, as
/// `(target labeling, coefficient)` terms.
fn apply_edge(e: &Edge, labeling: u64) -> Vec<(u64, i64)> {
    let mut rest = 0u64;
    for (c, t) in e.carry.iter().enumerate() {
        if let Some(t) = t {
            rest |= (labeling >> c & 1) << t;
        }
    }
    match e.kind {
        EdgeKind::Merge { a, b, c } => {
            let (xa, xb) = (labeling >> a & 1, labeling >> b & 1);
            match (xa, xb) {
                (1, 1) => vec![],
                _ => vec![(rest | (xa | xb) << c, 1)],
            }
        }
        EdgeKind::Split { a, c1, c2 } => {
            if labeling >> a & 1 == 1 {
                vec![(rest | 1 << c1 | 1 << c2, 1)]
            } else {
                vec![(rest | 1 << c2, 1), (rest | 1 << c1, 1)]
            }
        }
    }
}

fn edge_sign(state: u64, i: usize) -> i64 {
    if (state & ((1u64 << i) - 1)).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn raw_q(circles: usize, state: u64, labeling: u64) -> i32 {
    circles as i32 - 2 * labeling.count_ones() as i32 + state.count_ones() as i32
}

/// The cube of resolutions in raw gradings. Links are accepted.
pub fn cube_complex(d: &KnotDiagram, max_states: u64) -> Result<CubeComplex> {
    check_states(d, max_states)?;
    let n = d.crossing_count();
    let states = 1u64 << n;
    let res: Vec<Resolution> = (0..states).into_par_iter().map(|s| resolution(d, s)).collect();

    // number generators bidegree by bidegree, in (state, labeling) order
    let mut generators: BTreeMap<Bidegree, Vec<CubeGenerator>> = BTreeMap::new();
    let mut position: Vec<Vec<u32>> = Vec::with_capacity(states as usize);
    for s in 0..states {
        let r = &res[s as usize];
        let h = s.count_ones() as i32;
        let pos = (0..1u64 << r.circles)
            .map(|l| {
                let list = generators.entry((h, raw_q(r.circles, s, l))).or_default();
                list.push(CubeGenerator { state: s, labeling: l });
                (list.len() - 1) as u32
            })
            .collect();
        position.push(pos);
    }

    let entries: Vec<(Bidegree, usize, usize, i64)> = (0..states)
        .into_par_iter()
        .flat_map_iter(|s| {
            let src = &res[s as usize];
            let mut out = Vec::new();
            for i in (0..n).filter(|&i| s >> i & 1 == 0) {
                let t = s | 1 << i;
                let e = edge_kind(d, i, src, &res[t as usize]);
                let sign = edge_sign(s, i);
                for l in 0..1u64 << src.circles {
                    let deg = (s.count_ones() as i32, raw_q(src.circles, s, l));
                    for (tl, v) in apply_edge(&e, l) {
                        out.push((
                            deg,
                            position[t as usize][tl as usize] as usize,
                            position[s as usize][l as usize] as usize,
                            sign * v,
                        ));
                    }
                }
            }
            out
        })
        .collect();

    let mut grouped: BTreeMap<Bidegree, Vec<(usize, usize, i64)>> = BTreeMap::new();
    for (deg, r, c, v) in entries {
        grouped.entry(deg).or_default().push((r, c, v));
    }
    let dim = |deg: Bidegree| generators.get(&deg).map_or(0, Vec::len);
    let diffs: BTreeMap<Bidegree, SparseMatrix> = grouped
        .into_par_iter()
        .map(|((i, j), t)| ((i, j), SparseMatrix::from_triplets(dim((i + 1, j)), dim((i, j)), t)))
        .collect();
    let labels = generators
        .iter()
        .map(|(&deg, gs)| {
            let names = gs
                .iter()
                .map(|&g| generator_label(n, res[g.state as usize].circles, g))
                .collect();
            (deg, names)
        })
        .collect();
    let complex = ChainComplex::from_parts(labels, diffs, 0, 0)?;
    Ok(CubeComplex {
        complex,
        generators,
        crossings: n,
    })
}

/// `(−n₋, n₊ − 2n₋)`
pub fn orientation_shift(d: &KnotDiagram) -> (i32, i32) {
    let (np, nm) = d.signed_counts();
    (-(nm as i32), np as i32 - 2 * nm as i32)
}

/// Khovanov complex of a knot diagram with the default state limit.
pub fn build_ckh(d: &KnotDiagram) -> Result<ChainComplex> {
    build_ckh_limited(d, DEFAULT_MAX_STATES)
}

pub fn build_ckh_limited(d: &KnotDiagram, max_states: u64) -> Result<ChainComplex> {
    if !d.is_knot() {
        return Err(KhovanovError::MultiComponent(d.component_count()));
    }
    let cube = cube_complex(d, max_states)?;
    let (h, q) = orientation_shift(d);
    Ok(cube.complex.with_offsets(h, q))
}

/// Signed Frobenius block of the edge `state → state + e_i`: rows index
/// labelings of the target resolution, columns those of the source.
pub fn edge_map(d: &KnotDiagram, state: &State, i: usize) -> Result<SparseMatrix> {
    let n = d.crossing_count();
    if state.len() != n {
        return Err(DiagramError::StateLength {
            got: state.len(),
            expected: n,
        }
        .into());
    }
    if i >= n {
        return Err(DiagramError::CrossingIndex { index: i, count: n }.into());
    }
    if state.bit(i) {
        return Err(KhovanovError::BitAlreadySet(i));
    }
    let s = state.bits();
    let src = resolution(d, s);
    let tgt = resolution(d, s | 1 << i);
    let e = edge_kind(d, i, &src, &tgt);
    let sign = edge_sign(s, i);
    let entries = (0..1u64 << src.circles).flat_map(|l| {
        apply_edge(&e, l)
            .into_iter()
            .map(move |(tl, v)| (tl as usize, l as usize, sign * v))
    });
    Ok(SparseMatrix::from_triplets(1 << tgt.circles, 1 << src.circles, entries))
}

/// Upper-triangular decomposition at crossing `k`: `c0` is spanned by states
/// with bit `k` clear, `c1` by those with it set.
#[derive(Clone, Debug)]
pub struct CrossingSplit {
    pub k: usize,
    pub c0: ChainComplex,
    pub c1: ChainComplex,
    /// Blocks `c0 → c1` keyed by effective source bidegree.
    pub d01: BTreeMap<Bidegree, SparseMatrix>,
    /// Nonzero entries found mapping `c1` back into `c0`.
    pub lower_left_entries: usize,
}

impl CrossingSplit {
    pub fn is_upper_triangular(&self) -> bool {
        self.lower_left_entries == 0
    }

    /// Reassembles `[d₀ d₀₁; 0 d₁]` on `c0 ⊕ c1`.
    pub fn reassemble(&self) -> Result<ChainComplex> {
        let mut degrees: Vec<Bidegree> = self.c0.bidegrees().chain(self.c1.bidegrees()).collect();
        degrees.sort_unstable();
        degrees.dedup();
        let gens = degrees
            .iter()
            .map(|&deg| {
                let labels = self
                    .c0
                    .generators(deg)
                    .iter()
                    .chain(self.c1.generators(deg))
                    .cloned()
                    .collect();
                (deg, labels)
            })
            .collect();
        let diffs = degrees
            .iter()
            .map(|&(i, j)| {
                let d01 = self
                    .d01
                    .get(&(i, j))
                    .cloned()
                    .unwrap_or_else(|| SparseMatrix::zeros(self.c1.dim((i + 1, j)), self.c0.dim((i, j))));
                let m = SparseMatrix::blocks(
                    &self.c0.differential((i, j)),
                    &SparseMatrix::zeros(self.c0.dim((i + 1, j)), self.c1.dim((i, j))),
                    &d01,
                    &self.c1.differential((i, j)),
                );
                ((i, j), m)
            })
            .collect();
        Ok(ChainComplex::from_parts(gens, diffs, 0, 0)?)
    }
}

pub fn crossing_split(d: &KnotDiagram, k: usize) -> Result<CrossingSplit> {
    crossing_split_limited(d, k, DEFAULT_MAX_STATES)
}

pub fn crossing_split_limited(d: &KnotDiagram, k: usize, max_states: u64) -> Result<CrossingSplit> {
    if k >= d.crossing_count() {
        return Err(DiagramError::CrossingIndex {
            index: k,
            count: d.crossing_count(),
        }
        .into());
    }
    if !d.is_knot() {
        return Err(KhovanovError::MultiComponent(d.component_count()));
    }
    let cube = cube_complex(d, max_states)?;
    let (sh, sq) = orientation_shift(d);
    let full = &cube.complex;
    // local index of each generator inside its half
    let side = |g: &CubeGenerator| (g.state >> k & 1) as usize;
    let mut local: BTreeMap<Bidegree, Vec<(usize, usize)>> = BTreeMap::new();
    let mut halves: [BTreeMap<Bidegree, Vec<String>>; 2] = Default::default();
    for (&deg, gs) in &cube.generators {
        let labels = full.generators(deg);
        let mut counts = [0usize; 2];
        let entry = local.entry(deg).or_default();
        for (g, label) in gs.iter().zip(labels) {
            let h = side(g);
            entry.push((h, counts[h]));
            counts[h] += 1;
            halves[h].entry(deg).or_default().push(label.clone());
        }
    }
    let dim = |h: usize, deg: Bidegree| halves[h].get(&deg).map_or(0, Vec::len);
    let mut blocks: [[BTreeMap<Bidegree, Vec<(usize, usize, i64)>>; 2]; 2] = Default::default();
    for ((i, j), m) in full.differentials() {
        let src = &local[&(i, j)];
        let tgt = &local[&(i + 1, j)];
        for (r, c, v) in m.triplets() {
            let (hs, cs) = src[c];
            let (ht, rt) = tgt[r];
            blocks[hs][ht].entry((i, j)).or_default().push((rt, cs, v));
        }
    }
    let to_matrices = |hs: usize, ht: usize, b: &BTreeMap<Bidegree, Vec<(usize, usize, i64)>>| {
        b.iter()
            .map(|(&(i, j), t)| {
                (
                    (i, j),
                    SparseMatrix::from_triplets(dim(ht, (i + 1, j)), dim(hs, (i, j)), t.iter().copied()),
                )
            })
            .collect::<BTreeMap<_, _>>()
    };
    let lower_left_entries = blocks[1][0].values().map(Vec::len).sum();
    let c0 = ChainComplex::from_parts(halves[0].clone(), to_matrices(0, 0, &blocks[0][0]), 0, 0)?;
    let c1 = ChainComplex::from_parts(halves[1].clone(), to_matrices(1, 1, &blocks[1][1]), 0, 0)?;
    let shift = |m: BTreeMap<Bidegree, SparseMatrix>| -> BTreeMap<Bidegree, SparseMatrix> {
        m.into_iter().map(|((i, j), x)| ((i + sh, j + sq), x)).collect()
    };
    Ok(CrossingSplit {
        k,
        c0: c0.with_offsets(sh, sq),
        c1: c1.with_offsets(sh, sq),
        d01: shift(to_matrices(0, 1, &blocks[0][1])),
        lower_left_entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{homology, BigradedGroups};
    use crate::diagram::parse_pd;
    use crate::polynomial::jones_unnormalized;

    fn trefoil() -> KnotDiagram {
        parse_pd("PD[X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)]").unwrap()
    }

    #[test]
    fn unknot_complex() {
        let c = build_ckh(&KnotDiagram::unknot()).unwrap();
        assert_eq!(c.total_dim(), 2);
        assert_eq!(c.generators((0, 1)), [":+".to_string()]);
        let h = homology(&c);
        assert_eq!(h, BigradedGroups::from_rows([(0, 1, 1, vec![]), (0, -1, 1, vec![])]));
    }

    #[test]
    fn trefoil_homology() {
        let c = build_ckh(&trefoil()).unwrap();
        let degrees: Vec<i32> = c.bidegrees().map(|d| d.0).collect();
        assert_eq!(degrees.iter().min(), Some(&0));
        assert_eq!(degrees.iter().max(), Some(&3));
        let h = homology(&c);
        let expected = BigradedGroups::from_rows([
            (0, 1, 1, vec![]),
            (0, 3, 1, vec![]),
            (2, 5, 1, vec![]),
            (3, 7, 0, vec![2]),
            (3, 9, 1, vec![]),
        ]);
        assert_eq!(h, expected);
        assert_eq!(c.euler_characteristic(), jones_unnormalized(&trefoil()));
    }

    #[test]
    fn generator_labels() {
        let cube = cube_complex(&trefoil(), DEFAULT_MAX_STATES).unwrap();
        let labels: Vec<&String> = cube
            .complex
            .bidegrees()
            .flat_map(|d| cube.complex.generators(d))
            .collect();
        assert!(labels.contains(&&"011:+-".to_string()));
        assert!(labels.contains(&&"111:---".to_string()));
    }

    #[test]
    fn frobenius_blocks() {
        let t = trefoil();
        // 000 has two circles, 100 has one: a merge
        let m = edge_map(&t, &"000".parse().unwrap(), 0).unwrap();
        assert_eq!(m.to_dense(), vec![vec![1, 0, 0, 0], vec![0, 1, 1, 0]]);
        // 100 (one circle) to 110 (two circles): a split with sign −1
        let s = edge_map(&t, &"100".parse().unwrap(), 1).unwrap();
        assert_eq!(s.to_dense(), vec![vec![0, 0], vec![-1, 0], vec![-1, 0], vec![0, -1]]);
        assert_eq!(
            edge_map(&t, &"100".parse().unwrap(), 0).unwrap_err(),
            KhovanovError::BitAlreadySet(0)
        );
    }

    #[test]
    fn guards() {
        let hopf = parse_pd("PD[X(1,3,2,4), X(3,1,4,2)]").unwrap();
        assert_eq!(hopf.component_count(), 2);
        assert_eq!(build_ckh(&hopf).unwrap_err(), KhovanovError::MultiComponent(2));
        assert!(matches!(
            build_ckh_limited(&trefoil(), 4),
            Err(KhovanovError::TooManyStates { crossings: 3, .. })
        ));
    }

    #[test]
    fn split_trefoil() {
        let t = trefoil();
        let split = crossing_split(&t, 0).unwrap();
        assert!(split.is_upper_triangular());
        let states = |c: &ChainComplex| -> Vec<String> {
            let mut v: Vec<String> = c
                .bidegrees()
                .flat_map(|d| c.generators(d).iter().map(|l| l[..3].to_string()).collect::<Vec<_>>())
                .collect();
            v.sort();
            v.dedup();
            v
        };
        assert_eq!(states(&split.c0), ["000", "001", "010", "011"]);
        assert_eq!(states(&split.c1), ["100", "101", "110", "111"]);
        assert_eq!(
            homology(&split.reassemble().unwrap()),
            homology(&build_ckh(&t).unwrap())
        );
    }
}

//! Bigraded chain complexes of free abelian groups.
//!
//! Generators are stored at raw bidegrees; the recorded offsets
//! `(shift_h, shift_q)` are added to obtain the effective bidegree that every
//! public accessor uses. Differentials raise the homological degree by one
//! and preserve the quantum degree.
//!
//! Cone convention: `Cone(f)^i = X^{i+1} ⊕ Y^i` with differential
//! `[−d_X 0; f d_Y]`.

mod matrix;
mod snf;

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use num_bigint::BigInt;
use rayon::prelude::*;
use thiserror::Error;

use crate::polynomial::LaurentPoly;

pub use matrix::SparseMatrix;
pub use snf::{rank_mod2, snf_integer, SnfSummary};

/// `(homological, quantum)`
pub type Bidegree = (i32, i32);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("d∘d is nonzero on bidegree ({0}, {1})")]
    DSquared(i32, i32),
    #[error("shape mismatch at bidegree ({i}, {j}): {msg}")]
    Shape { i: i32, j: i32, msg: String },
    #[error("differential entry {from} -> {to} must raise the homological degree by one and keep the quantum degree")]
    Degree { from: String, to: String },
    #[error("duplicate generator label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("map does not commute with the differentials at bidegree ({0}, {1})")]
    NotChainMap(i32, i32),
    #[error("cube has {0} vertices, which is not a power of two")]
    CubeShape(usize),
    #[error("cube edge at vertex {vertex:b} in direction {direction} is missing or has the wrong endpoints")]
    CubeEdge { vertex: u64, direction: usize },
    #[error("cube face at vertex {vertex:b} spanned by directions {t} and {u} does not commute")]
    FaceNotCommuting { vertex: u64, t: usize, u: usize },
    #[error("fold order {0:?} is not a permutation of the cube directions")]
    FoldOrder(Vec<usize>),
}

pub type Result<T> = std::result::Result<T, ComplexError>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplex {
    gens: BTreeMap<Bidegree, Vec<String>>,
    diffs: BTreeMap<Bidegree, SparseMatrix>,
    shift_h: i32,
    shift_q: i32,
}

fn add(a: Bidegree, b: Bidegree) -> Bidegree {
    (a.0 + b.0, a.1 + b.1)
}

fn sub(a: Bidegree, b: Bidegree) -> Bidegree {
    (a.0 - b.0, a.1 - b.1)
}

impl ChainComplex {
    pub fn zero() -> Self {
        Self {
            gens: BTreeMap::new(),
            diffs: BTreeMap::new(),
            shift_h: 0,
            shift_q: 0,
        }
    }

    /// Validates shapes, label uniqueness and `d∘d = 0`. `diffs[(i, j)]`
    /// maps raw degree `(i, j)` to `(i + 1, j)`.
    pub fn from_parts(
        gens: BTreeMap<Bidegree, Vec<String>>,
        diffs: BTreeMap<Bidegree, SparseMatrix>,
        shift_h: i32,
        shift_q: i32,
    ) -> Result<Self> {
        let gens: BTreeMap<_, _> = gens.into_iter().filter(|(_, v)| !v.is_empty()).collect();
        let mut seen = HashSet::new();
        for label in gens.values().flatten() {
            if !seen.insert(label.as_str()) {
                return Err(ComplexError::DuplicateLabel(label.clone()));
            }
        }
        let dim = |d: Bidegree| gens.get(&d).map_or(0, Vec::len);
        for (&(i, j), m) in &diffs {
            if m.cols() != dim((i, j)) || m.rows() != dim((i + 1, j)) {
                return Err(ComplexError::Shape {
                    i: i + shift_h,
                    j: j + shift_q,
                    msg: format!(
                        "differential is {}x{}, expected {}x{}",
                        m.rows(),
                        m.cols(),
                        dim((i + 1, j)),
                        dim((i, j))
                    ),
                });
            }
        }
        let diffs: BTreeMap<_, _> = diffs.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        let c = Self {
            gens,
            diffs,
            shift_h,
            shift_q,
        };
        c.check_d_squared()?;
        Ok(c)
    }

    fn check_d_squared(&self) -> Result<()> {
        let bad = self
            .diffs
            .par_iter()
            .filter_map(|(&(i, j), m)| {
                let next = self.diffs.get(&(i + 1, j))?;
                (!next.mul(m).is_zero()).then_some((i, j))
            })
            .min();
        match bad {
            Some((i, j)) => Err(ComplexError::DSquared(i + self.shift_h, j + self.shift_q)),
            None => Ok(()),
        }
    }

    pub fn shift_h(&self) -> i32 {
        self.shift_h
    }

    pub fn shift_q(&self) -> i32 {
        self.shift_q
    }

    fn offset(&self) -> Bidegree {
        (self.shift_h, self.shift_q)
    }

    /// Effective bidegrees with at least one generator.
    pub fn bidegrees(&self) -> impl Iterator<Item = Bidegree> + '_ {
        self.gens.keys().map(|&d| add(d, self.offset()))
    }

    pub fn generators(&self, deg: Bidegree) -> &[String] {
        self.gens.get(&sub(deg, self.offset())).map_or(&[], Vec::as_slice)
    }

    pub fn dim(&self, deg: Bidegree) -> usize {
        self.generators(deg).len()
    }

    pub fn total_dim(&self) -> usize {
        self.gens.values().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.gens.is_empty()
    }

    /// Differential out of effective bidegree `deg`.
    pub fn differential(&self, deg: Bidegree) -> Cow<'_, SparseMatrix> {
        let raw = sub(deg, self.offset());
        match self.diffs.get(&raw) {
            Some(m) => Cow::Borrowed(m),
            None => Cow::Owned(SparseMatrix::zeros(self.dim(add(deg, (1, 0))), self.dim(deg))),
        }
    }

    /// Nonzero differentials keyed by effective source bidegree.
    pub fn differentials(&self) -> impl Iterator<Item = (Bidegree, &SparseMatrix)> + '_ {
        self.diffs.iter().map(|(&d, m)| (add(d, self.offset()), m))
    }

    /// Moves every generator from degree `(i, j)` to `(i + dh, j + dq)`; the
    /// differential changes sign when `dh` is odd. `shift(c, -1, 0)` is
    /// `c[1]`.
    pub fn shift(&self, dh: i32, dq: i32) -> Self {
        let mut out = self.clone();
        out.shift_h += dh;
        out.shift_q += dq;
        if dh % 2 != 0 {
            for m in out.diffs.values_mut() {
                *m = m.scaled(-1);
            }
        }
        out
    }

    /// Same generators and differential with both offsets set to zero.
    pub fn strip_offsets(&self) -> Self {
        self.with_offsets(0, 0)
    }

    /// Replaces the recorded offsets without touching the differential.
    pub fn with_offsets(&self, shift_h: i32, shift_q: i32) -> Self {
        Self {
            shift_h,
            shift_q,
            ..self.clone()
        }
    }

    /// Prefixes every generator label.
    pub fn prefixed(&self, prefix: &str) -> Self {
        let mut out = self.clone();
        for labels in out.gens.values_mut() {
            for l in labels.iter_mut() {
                l.insert_str(0, prefix);
            }
        }
        out
    }

    /// `Σ (−1)^i dim C^{i,j} q^j` over effective bidegrees.
    pub fn euler_characteristic(&self) -> LaurentPoly {
        LaurentPoly::from_terms(self.bidegrees().map(|(i, j)| {
            let n = self.dim((i, j)) as i64;
            (j, if i.rem_euclid(2) == 0 { n } else { -n })
        }))
    }

    /// Plain-text dump: one `gen i j label` line per generator and one
    /// `d i j row col value` line per differential entry, in effective
    /// degrees with indices local to each bidegree.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# shift_h {} shift_q {}", self.shift_h, self.shift_q);
        for deg in self.bidegrees().collect::<Vec<_>>() {
            for l in self.generators(deg) {
                let _ = writeln!(out, "gen {} {} {l}", deg.0, deg.1);
            }
        }
        for (deg, m) in self.differentials() {
            for (r, c, v) in m.triplets() {
                let _ = writeln!(out, "d {} {} {r} {c} {v}", deg.0, deg.1);
            }
        }
        out
    }
}

/// Incremental construction from labeled generators and entries.
#[derive(Default, Debug, Clone)]
pub struct ComplexBuilder {
    gens: BTreeMap<Bidegree, Vec<String>>,
    index: HashMap<String, (Bidegree, usize)>,
    entries: Vec<(String, String, i64)>,
    duplicate: Option<String>,
}

impl ComplexBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_generator(&mut self, i: i32, j: i32, label: impl Into<String>) -> &mut Self {
        let label = label.into();
        let list = self.gens.entry((i, j)).or_default();
        if self.index.insert(label.clone(), ((i, j), list.len())).is_some() {
            self.duplicate.get_or_insert(label.clone());
        }
        list.push(label);
        self
    }

    /// Adds `value` to the coefficient of `to` in `d(from)`.
    pub fn add_entry(&mut self, from: &str, to: &str, value: i64) -> &mut Self {
        self.entries.push((from.to_string(), to.to_string(), value));
        self
    }

    pub fn finish(&self) -> Result<ChainComplex> {
        if let Some(l) = &self.duplicate {
            return Err(ComplexError::DuplicateLabel(l.clone()));
        }
        let mut triplets: BTreeMap<Bidegree, Vec<(usize, usize, i64)>> = BTreeMap::new();
        for (from, to, v) in &self.entries {
            let &(sd, si) = self
                .index
                .get(from)
                .ok_or_else(|| ComplexError::UnknownGenerator(from.clone()))?;
            let &(td, ti) = self
                .index
                .get(to)
                .ok_or_else(|| ComplexError::UnknownGenerator(to.clone()))?;
            if td != add(sd, (1, 0)) {
                return Err(ComplexError::Degree {
                    from: from.clone(),
                    to: to.clone(),
                });
            }
            triplets.entry(sd).or_default().push((ti, si, *v));
        }
        let dim = |d: Bidegree| self.gens.get(&d).map_or(0, Vec::len);
        let diffs = triplets
            .into_iter()
            .map(|(d, t)| (d, SparseMatrix::from_triplets(dim(add(d, (1, 0))), dim(d), t)))
            .collect();
        ChainComplex::from_parts(self.gens.clone(), diffs, 0, 0)
    }
}

/// Degree-preserving map of complexes, with blocks keyed by effective
/// bidegree (rows index target generators, columns source generators).
#[derive(Clone, Debug)]
pub struct ChainMap {
    source: Arc<ChainComplex>,
    target: Arc<ChainComplex>,
    blocks: BTreeMap<Bidegree, SparseMatrix>,
}

impl ChainMap {
    /// Checks block shapes and `d_Y f = f d_X` in every bidegree.
    pub fn new(
        source: Arc<ChainComplex>,
        target: Arc<ChainComplex>,
        blocks: BTreeMap<Bidegree, SparseMatrix>,
    ) -> Result<Self> {
        let f = Self::new_unchecked(source, target, blocks)?;
        f.verify()?;
        Ok(f)
    }

    /// Shape checks only.
    pub(crate) fn new_unchecked(
        source: Arc<ChainComplex>,
        target: Arc<ChainComplex>,
        blocks: BTreeMap<Bidegree, SparseMatrix>,
    ) -> Result<Self> {
        for (&(i, j), m) in &blocks {
            if m.rows() != target.dim((i, j)) || m.cols() != source.dim((i, j)) {
                return Err(ComplexError::Shape {
                    i,
                    j,
                    msg: format!(
                        "map block is {}x{}, expected {}x{}",
                        m.rows(),
                        m.cols(),
                        target.dim((i, j)),
                        source.dim((i, j))
                    ),
                });
            }
        }
        let blocks = blocks.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        Ok(Self { source, target, blocks })
    }

    /// Recomputes the chain-map identity; reports the first failing degree.
    pub fn verify(&self) -> Result<()> {
        let degrees: BTreeSet<Bidegree> = self.source.bidegrees().chain(self.target.bidegrees()).collect();
        let bad = degrees
            .par_iter()
            .filter(|&&(i, j)| {
                let lhs = self.target.differential((i, j)).mul(&self.block((i, j)));
                let rhs = self.block((i + 1, j)).mul(&self.source.differential((i, j)));
                lhs != rhs
            })
            .min()
            .copied();
        match bad {
            Some((i, j)) => Err(ComplexError::NotChainMap(i, j)),
            None => Ok(()),
        }
    }

    pub fn identity(c: Arc<ChainComplex>) -> Self {
        let blocks = c.bidegrees().map(|d| (d, SparseMatrix::identity(c.dim(d)))).collect();
        Self {
            source: c.clone(),
            target: c,
            blocks,
        }
    }

    pub fn zero(source: Arc<ChainComplex>, target: Arc<ChainComplex>) -> Self {
        Self {
            source,
            target,
            blocks: BTreeMap::new(),
        }
    }

    pub fn source(&self) -> &Arc<ChainComplex> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ChainComplex> {
        &self.target
    }

    pub fn block(&self, deg: Bidegree) -> Cow<'_, SparseMatrix> {
        match self.blocks.get(&deg) {
            Some(m) => Cow::Borrowed(m),
            None => Cow::Owned(SparseMatrix::zeros(self.target.dim(deg), self.source.dim(deg))),
        }
    }

    /// Nonzero blocks by effective bidegree.
    pub fn blocks(&self) -> &BTreeMap<Bidegree, SparseMatrix> {
        &self.blocks
    }

    /// `g ∘ self`
    pub fn then(&self, g: &ChainMap) -> Result<ChainMap> {
        if !Arc::ptr_eq(&g.source, &self.target) && g.source != self.target {
            return Err(ComplexError::Shape {
                i: 0,
                j: 0,
                msg: "composed maps do not share a complex".into(),
            });
        }
        let blocks = self
            .blocks
            .iter()
            .filter_map(|(&d, m)| g.blocks.get(&d).map(|gm| (d, gm.mul(m))))
            .collect();
        Self::new_unchecked(self.source.clone(), g.target.clone(), blocks)
    }

    pub fn scaled(&self, k: i64) -> ChainMap {
        Self {
            source: self.source.clone(),
            target: self.target.clone(),
            blocks: self.blocks.iter().map(|(&d, m)| (d, m.scaled(k))).collect(),
        }
        .pruned()
    }

    fn pruned(mut self) -> Self {
        self.blocks.retain(|_, m| !m.is_zero());
        self
    }

    /// The same map between `shift(source, dh, dq)` and
    /// `shift(target, dh, dq)`.
    pub fn shifted(&self, dh: i32, dq: i32) -> ChainMap {
        Self {
            source: Arc::new(self.source.shift(dh, dq)),
            target: Arc::new(self.target.shift(dh, dq)),
            blocks: self
                .blocks
                .iter()
                .map(|(&d, m)| (add(d, (dh, dq)), m.clone()))
                .collect(),
        }
    }

    /// Exact equality of all blocks (complexes compared structurally).
    pub fn same_as(&self, other: &ChainMap) -> bool {
        self.blocks == other.blocks
            && (Arc::ptr_eq(&self.source, &other.source) || self.source == other.source)
            && (Arc::ptr_eq(&self.target, &other.target) || self.target == other.target)
    }
}

/// `Cone(f)^i = X^{i+1} ⊕ Y^i`, `d = [−d_X 0; f d_Y]`. Source generators
/// are labeled `0/…`, target generators `1/…`; offsets of the result are
/// zero.
pub fn cone(f: &ChainMap) -> ChainComplex {
    cone_labeled(f, Some(("0/", "1/")))
}

fn cone_labeled(f: &ChainMap, prefixes: Option<(&str, &str)>) -> ChainComplex {
    let (x, y) = (&*f.source, &*f.target);
    let degrees: BTreeSet<Bidegree> = x.bidegrees().map(|d| add(d, (-1, 0))).chain(y.bidegrees()).collect();
    let label = |p: Option<&str>, l: &String| match p {
        Some(p) => format!("{p}{l}"),
        None => l.clone(),
    };
    let gens: BTreeMap<Bidegree, Vec<String>> = degrees
        .iter()
        .map(|&(i, j)| {
            let labels = x
                .generators((i + 1, j))
                .iter()
                .map(|l| label(prefixes.map(|p| p.0), l))
                .chain(y.generators((i, j)).iter().map(|l| label(prefixes.map(|p| p.1), l)))
                .collect();
            ((i, j), labels)
        })
        .collect();
    let diffs = degrees
        .par_iter()
        .map(|&(i, j)| {
            let m = SparseMatrix::blocks(
                &x.differential((i + 1, j)).scaled(-1),
                &SparseMatrix::zeros(x.dim((i + 2, j)), y.dim((i, j))),
                &f.block((i + 1, j)),
                &y.differential((i, j)),
            );
            ((i, j), m)
        })
        .collect();
    ChainComplex::from_parts(gens, diffs, 0, 0).expect("cone of a chain map is a complex")
}

/// A commutative cube of complexes. `vertices[r]` sits at the vertex with
/// bitmask `r`; `edges[(r, t)]` maps `vertices[r]` to
/// `vertices[r | 1 << t]` for each `r` with bit `t` clear.
#[derive(Clone, Debug)]
pub struct Cube {
    pub dim: usize,
    pub vertices: Vec<Arc<ChainComplex>>,
    pub edges: BTreeMap<(u64, usize), ChainMap>,
}

impl Cube {
    pub fn new(vertices: Vec<Arc<ChainComplex>>, edges: BTreeMap<(u64, usize), ChainMap>) -> Result<Self> {
        let n = vertices.len();
        if !n.is_power_of_two() {
            return Err(ComplexError::CubeShape(n));
        }
        let dim = n.trailing_zeros() as usize;
        let same = |a: &Arc<ChainComplex>, b: &Arc<ChainComplex>| Arc::ptr_eq(a, b) || a == b;
        for r in 0..n as u64 {
            for t in (0..dim).filter(|&t| r >> t & 1 == 0) {
                let ok = edges.get(&(r, t)).is_some_and(|f| {
                    same(f.source(), &vertices[r as usize]) && same(f.target(), &vertices[(r | 1 << t) as usize])
                });
                if !ok {
                    return Err(ComplexError::CubeEdge {
                        vertex: r,
                        direction: t,
                    });
                }
            }
        }
        Ok(Self { dim, vertices, edges })
    }

    /// Exact commutativity of every square face.
    pub fn check_faces(&self) -> Result<()> {
        let n = self.vertices.len() as u64;
        for r in 0..n {
            for t in 0..self.dim {
                for u in t + 1..self.dim {
                    if r >> t & 1 == 1 || r >> u & 1 == 1 {
                        continue;
                    }
                    let a = self.edges[&(r, t)].then(&self.edges[&(r | 1 << t, u)])?;
                    let b = self.edges[&(r, u)].then(&self.edges[&(r | 1 << u, t)])?;
                    if a.blocks != b.blocks {
                        return Err(ComplexError::FaceNotCommuting { vertex: r, t, u });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Total complex of a commutative cube, built by taking cones one direction
/// at a time in the given order. Vertex `r`'s generators are labeled
/// `{bits of r}/…` and land in homological degree `i − (dim − |r|)`.
pub fn cube_total(cube: &Cube, order: &[usize]) -> Result<ChainComplex> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..cube.dim).collect::<Vec<_>>() {
        return Err(ComplexError::FoldOrder(order.to_vec()));
    }
    cube.check_faces()?;
    if cube.dim == 0 {
        return Ok((*cube.vertices[0]).clone());
    }
    let bits = |r: u64| -> String { (0..cube.dim).map(|t| if r >> t & 1 == 1 { '1' } else { '0' }).collect() };
    let mut vertices: BTreeMap<u64, Arc<ChainComplex>> = cube
        .vertices
        .iter()
        .enumerate()
        .map(|(r, c)| (r as u64, Arc::new(c.prefixed(&format!("{}/", bits(r as u64))))))
        .collect();
    // rebase edge maps onto the relabeled vertices (labels do not enter blocks)
    let mut edges: BTreeMap<(u64, usize), ChainMap> = cube
        .edges
        .iter()
        .map(|(&(r, t), f)| {
            let g = ChainMap {
                source: vertices[&r].clone(),
                target: vertices[&(r | 1 << t)].clone(),
                blocks: f.blocks.clone(),
            };
            ((r, t), g)
        })
        .collect();
    let mut remaining: Vec<usize> = (0..cube.dim).collect();
    for &t in order {
        remaining.retain(|&u| u != t);
        let keys: Vec<u64> = vertices.keys().copied().filter(|r| r >> t & 1 == 0).collect();
        let new_vertices: BTreeMap<u64, Arc<ChainComplex>> = keys
            .par_iter()
            .map(|&r| (r, Arc::new(cone_labeled(&edges[&(r, t)], None))))
            .collect();
        let mut new_edges = BTreeMap::new();
        for &r in &keys {
            for &u in remaining.iter().filter(|&&u| r >> u & 1 == 0) {
                let gx = &edges[&(r, u)];
                let gy = &edges[&(r | 1 << t, u)];
                let src = new_vertices[&r].clone();
                let tgt = new_vertices[&(r | 1 << u)].clone();
                let blocks = src
                    .bidegrees()
                    .map(|(i, j)| {
                        (
                            (i, j),
                            SparseMatrix::block_diag(&gx.block((i + 1, j)), &gy.block((i, j))),
                        )
                    })
                    .collect();
                new_edges.insert((r, u), ChainMap::new_unchecked(src, tgt, blocks)?.pruned());
            }
        }
        vertices = new_vertices;
        edges = new_edges;
    }
    let total = vertices.remove(&0).expect("origin vertex survives folding");
    Ok(Arc::try_unwrap(total).unwrap_or_else(|a| (*a).clone()))
}

#[derive(Clone, Debug, PartialEq, Eq, Default, PartialOrd, Ord, Hash)]
pub struct Group {
    pub rank: usize,
    /// Divisibility chain of torsion orders, each greater than one.
    pub torsion: Vec<BigInt>,
}

impl Group {
    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// Homology by bidegree; zero groups are omitted so equality is
/// isomorphism of bigraded groups.
#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct BigradedGroups {
    groups: BTreeMap<Bidegree, Group>,
}

impl BigradedGroups {
    pub fn from_rows(rows: impl IntoIterator<Item = (i32, i32, usize, Vec<i64>)>) -> Self {
        let groups = rows
            .into_iter()
            .map(|(i, j, rank, torsion)| {
                let torsion = torsion.into_iter().map(BigInt::from).collect();
                ((i, j), Group { rank, torsion })
            })
            .filter(|(_, g)| !g.is_zero())
            .collect();
        Self { groups }
    }

    pub fn get(&self, deg: Bidegree) -> Option<&Group> {
        self.groups.get(&deg)
    }

    pub fn is_zero(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Bidegree, &Group)> {
        self.groups.iter().map(|(&d, g)| (d, g))
    }

    /// `(i, j, rank, torsion)` rows in ascending bidegree order.
    pub fn rows(&self) -> Vec<(i32, i32, usize, Vec<BigInt>)> {
        self.groups
            .iter()
            .map(|(&(i, j), g)| (i, j, g.rank, g.torsion.clone()))
            .collect()
    }

    /// `Σ (−1)^i rank q^j`
    pub fn euler_characteristic(&self) -> LaurentPoly {
        LaurentPoly::from_terms(self.groups.iter().map(|(&(i, j), g)| {
            let n = g.rank as i64;
            (j, if i.rem_euclid(2) == 0 { n } else { -n })
        }))
    }

    /// Applies `(i, j) ↦ (i + dh, j + dq)`.
    pub fn shifted(&self, dh: i32, dq: i32) -> Self {
        Self {
            groups: self
                .groups
                .iter()
                .map(|(&d, g)| (add(d, (dh, dq)), g.clone()))
                .collect(),
        }
    }

    /// Ranks after tensoring with ℤ/2: each even torsion factor adds a
    /// class in two adjacent degrees.
    pub fn mod2_ranks(&self) -> BTreeMap<Bidegree, usize> {
        let mut out: BTreeMap<Bidegree, usize> = BTreeMap::new();
        let two = BigInt::from(2);
        for (&(i, j), g) in &self.groups {
            let even = g.torsion.iter().filter(|t| (*t % &two) == BigInt::from(0)).count();
            *out.entry((i, j)).or_default() += g.rank + even;
            if even > 0 {
                *out.entry((i - 1, j)).or_default() += even;
            }
        }
        out.retain(|_, v| *v > 0);
        out
    }
}

impl fmt::Display for BigradedGroups {
    /// One `i j rank torsion` line per nonzero group.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (&(i, j), g) in &self.groups {
            let torsion: Vec<String> = g.torsion.iter().map(|t| t.to_string()).collect();
            writeln!(f, "{i} {j} {} [{}]", g.rank, torsion.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Coefficients {
    #[default]
    Integers,
    Z2,
}

pub fn homology(c: &ChainComplex) -> BigradedGroups {
    homology_with(c, Coefficients::Integers)
}

/// Over ℤ/2 only ranks are reported.
pub fn homology_with(c: &ChainComplex, coefficients: Coefficients) -> BigradedGroups {
    let snf: HashMap<Bidegree, SnfSummary> = c
        .diffs
        .par_iter()
        .map(|(&d, m)| {
            let s = match coefficients {
                Coefficients::Integers => snf_integer(m),
                Coefficients::Z2 => SnfSummary {
                    rank: rank_mod2(m),
                    torsion: Vec::new(),
                },
            };
            (d, s)
        })
        .collect();
    let empty = SnfSummary::default();
    let groups = c
        .gens
        .iter()
        .map(|(&(i, j), labels)| {
            let out = snf.get(&(i, j)).unwrap_or(&empty);
            let inc = snf.get(&(i - 1, j)).unwrap_or(&empty);
            let g = Group {
                rank: labels.len() - out.rank - inc.rank,
                torsion: inc.torsion.clone(),
            };
            ((i + c.shift_h, j + c.shift_q), g)
        })
        .filter(|(_, g)| !g.is_zero())
        .collect();
    BigradedGroups { groups }
}

pub fn euler_characteristic(c: &ChainComplex) -> LaurentPoly {
    c.euler_characteristic()
}

pub fn is_acyclic(c: &ChainComplex) -> bool {
    homology(c).is_zero()
}

/// Checks a contraction certificate: `h[(i, j)]` maps degree `(i, j)` to
/// `(i − 1, j)`, and the graded commutator `dH + Hd` must be the identity
/// in every bidegree. Missing entries are zero.
pub fn verify_contraction(c: &ChainComplex, h: &BTreeMap<Bidegree, SparseMatrix>) -> Result<bool> {
    for (&(i, j), m) in h {
        if m.rows() != c.dim((i - 1, j)) || m.cols() != c.dim((i, j)) {
            return Err(ComplexError::Shape {
                i,
                j,
                msg: format!(
                    "homotopy block is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    c.dim((i - 1, j)),
                    c.dim((i, j))
                ),
            });
        }
    }
    let block = |(i, j): Bidegree| match h.get(&(i, j)) {
        Some(m) => Cow::Borrowed(m),
        None => Cow::Owned(SparseMatrix::zeros(c.dim((i - 1, j)), c.dim((i, j)))),
    };
    let ok = c.bidegrees().collect::<Vec<_>>().par_iter().all(|&(i, j)| {
        let dh = c.differential((i - 1, j)).mul(&block((i, j)));
        let hd = block((i + 1, j)).mul(&c.differential((i, j)));
        dh.add(&hd) == SparseMatrix::identity(c.dim((i, j)))
    });
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_term(v: i64) -> ChainComplex {
        let mut b = ComplexBuilder::new();
        b.add_generator(0, 0, "a")
            .add_generator(1, 0, "b")
            .add_entry("a", "b", v);
        b.finish().unwrap()
    }

    fn rows(h: &BigradedGroups) -> Vec<(i32, i32, usize, Vec<i64>)> {
        h.rows()
            .into_iter()
            .map(|(i, j, r, t)| (i, j, r, t.iter().map(|x| i64::try_from(x).unwrap()).collect()))
            .collect()
    }

    #[test]
    fn single_generator() {
        let mut b = ComplexBuilder::new();
        b.add_generator(0, 1, "x");
        let c = b.finish().unwrap();
        assert_eq!(rows(&homology(&c)), vec![(0, 1, 1, vec![])]);
        assert_eq!(c.euler_characteristic(), LaurentPoly::q());
    }

    #[test]
    fn multiplication_by_two() {
        let c = two_term(2);
        assert_eq!(rows(&homology(&c)), vec![(1, 0, 0, vec![2])]);
        assert!(!is_acyclic(&c));
        assert!(is_acyclic(&two_term(1)));
        assert!(is_acyclic(&two_term(-1)));
        let z2 = homology_with(&c, Coefficients::Z2);
        assert_eq!(rows(&z2), vec![(0, 0, 1, vec![]), (1, 0, 1, vec![])]);
    }

    #[test]
    fn builder_errors() {
        let mut b = ComplexBuilder::new();
        b.add_generator(0, 0, "a")
            .add_generator(1, 0, "b")
            .add_generator(2, 0, "c");
        b.add_entry("a", "b", 1).add_entry("b", "c", 1);
        assert_eq!(b.finish(), Err(ComplexError::DSquared(0, 0)));

        let mut b = ComplexBuilder::new();
        b.add_generator(0, 0, "a")
            .add_generator(1, 2, "b")
            .add_entry("a", "b", 1);
        assert!(matches!(b.finish(), Err(ComplexError::Degree { .. })));

        let mut b = ComplexBuilder::new();
        b.add_generator(0, 0, "a").add_generator(1, 0, "a");
        assert_eq!(b.finish(), Err(ComplexError::DuplicateLabel("a".into())));

        let mut gens = BTreeMap::new();
        gens.insert((0, 0), vec!["a".to_string()]);
        let mut diffs = BTreeMap::new();
        diffs.insert((0, 0), SparseMatrix::identity(1));
        assert!(matches!(
            ChainComplex::from_parts(gens, diffs, 0, 0),
            Err(ComplexError::Shape { .. })
        ));
    }

    #[test]
    fn shifts() {
        let c = two_term(3);
        assert_eq!(c.shift(0, 0), c);
        assert_eq!(c.shift(1, 0).shift(-1, 0), c);
        assert_eq!(c.shift(1, 0).euler_characteristic(), -c.euler_characteristic());
        let s = c.shift(1, 2);
        assert_eq!(s.generators((1, 2)), ["a".to_string()]);
        assert_eq!(s.differential((1, 2)).get(0, 0), -3);
        assert_eq!(homology(&s), homology(&c).shifted(1, 2));
    }

    #[test]
    fn cone_of_identity_is_acyclic() {
        let c = Arc::new(two_term(2));
        let k = cone(&ChainMap::identity(c.clone()));
        assert!(is_acyclic(&k));
        assert_eq!(k.generators((-1, 0)), ["0/a".to_string()]);
        assert_eq!(k.euler_characteristic(), LaurentPoly::zero());
    }

    #[test]
    fn cone_of_zero_map() {
        let x = Arc::new(two_term(2));
        let y = Arc::new(two_term(1).shift(0, 5));
        let k = cone(&ChainMap::zero(x.clone(), y.clone()));
        let mut expected = homology(&x).shifted(-1, 0);
        for (d, g) in homology(&y).iter() {
            expected.groups.insert(d, g.clone());
        }
        assert_eq!(homology(&k), expected);
        assert_eq!(
            k.euler_characteristic(),
            &y.euler_characteristic() - &x.euler_characteristic()
        );
    }

    #[test]
    fn non_chain_map_rejected() {
        let x = Arc::new(two_term(1));
        let mut blocks = BTreeMap::new();
        blocks.insert((0, 0), SparseMatrix::identity(1));
        assert_eq!(
            ChainMap::new(x.clone(), x.clone(), blocks).unwrap_err(),
            ComplexError::NotChainMap(0, 0)
        );
    }

    #[test]
    fn contraction_checker() {
        let c = two_term(1);
        let mut h = BTreeMap::new();
        h.insert((1, 0), SparseMatrix::identity(1));
        assert!(verify_contraction(&c, &h).unwrap());
        assert!(!verify_contraction(&c, &BTreeMap::new()).unwrap());
        h.insert((1, 0), SparseMatrix::zeros(2, 1));
        assert!(verify_contraction(&c, &h).is_err());
    }

    #[test]
    fn identity_square_is_acyclic() {
        let c = Arc::new(two_term(2));
        let id = ChainMap::identity(c.clone());
        let mut edges = BTreeMap::new();
        for key in [(0, 0), (0, 1), (1, 1), (2, 0)] {
            edges.insert(key, id.clone());
        }
        let cube = Cube::new(vec![c.clone(); 4], edges).unwrap();
        for order in [[0, 1], [1, 0]] {
            assert!(is_acyclic(&cube_total(&cube, &order).unwrap()));
        }
        assert!(matches!(cube_total(&cube, &[0, 0]), Err(ComplexError::FoldOrder(_))));
    }

    #[test]
    fn non_commuting_face_reported() {
        let c = Arc::new(two_term(2));
        let id = ChainMap::identity(c.clone());
        let mut edges = BTreeMap::new();
        edges.insert((0, 0), id.clone());
        edges.insert((0, 1), id.clone());
        edges.insert((1, 1), id.clone());
        edges.insert((2, 0), id.scaled(-1));
        let cube = Cube::new(vec![c; 4], edges).unwrap();
        assert_eq!(
            cube_total(&cube, &[0, 1]).unwrap_err(),
            ComplexError::FaceNotCommuting { vertex: 0, t: 0, u: 1 }
        );
    }

    #[test]
    fn one_cube_is_cone() {
        let x = Arc::new(two_term(2));
        let f = ChainMap::identity(x.clone()).scaled(3);
        let mut edges = BTreeMap::new();
        edges.insert((0, 0), f.clone());
        let cube = Cube::new(vec![x.clone(), x], edges).unwrap();
        let total = cube_total(&cube, &[0]).unwrap();
        assert_eq!(homology(&total), homology(&cone(&f)));
    }

    #[test]
    fn mod2_ranks_from_torsion() {
        let h = homology(&two_term(2));
        let m = h.mod2_ranks();
        assert_eq!(m.get(&(0, 0)), Some(&1));
        assert_eq!(m.get(&(1, 0)), Some(&1));
    }
}

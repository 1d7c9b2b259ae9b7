//! Oriented knot and link diagrams in planar-diagram (PD) notation.
//!
//! A crossing `X(a,b,c,d)` lists its four arc ends in cyclic order starting
//! from the incoming under-strand, so the under-strand runs `a -> c` and the
//! over-strand joins `b` and `d`. A crossing is positive when the
//! over-strand enters at `b`.
//!
//! Smoothing convention: the 0-smoothing joins `(a,d)` and `(b,c)`, the
//! 1-smoothing joins `(a,b)` and `(c,d)`. With this choice the standard
//! trefoil code `PD[X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)]` is the right-handed
//! trefoil with 2, 1 and 3 circles at the states 000, 100 and 111.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("arc label {label} appears {count} time(s), expected exactly 2")]
    LabelCount { label: u32, count: usize },
    #[error("arc labels must form the range 1..={max}, but {missing} is missing")]
    NonContiguous { max: u32, missing: u32 },
    #[error("no coherent strand orientation exists (conflict at arc {arc})")]
    Orientation { arc: u32 },
    #[error("crossing index {index} out of range for a {count}-crossing diagram")]
    CrossingIndex { index: usize, count: usize },
    #[error("crossing index {0} listed twice")]
    DuplicateIndex(usize),
    #[error("state has length {got} but the diagram has {expected} crossings")]
    StateLength { got: usize, expected: usize },
    #[error("diagram has {0} crossings; at most 63 are supported")]
    TooManyCrossings(usize),
}

pub type Result<T> = std::result::Result<T, DiagramError>;

/// Position of an arc end: `(crossing index, slot 0..4)`.
pub type Slot = (usize, usize);

#[derive(Clone, Debug)]
pub struct KnotDiagram {
    crossings: Vec<[u32; 4]>,
    loops: u32,
    incoming: Vec<[bool; 4]>,
    components: usize,
    name: Option<String>,
}

impl PartialEq for KnotDiagram {
    fn eq(&self, other: &Self) -> bool {
        self.crossings == other.crossings && self.loops == other.loops
    }
}

impl Eq for KnotDiagram {}

impl std::hash::Hash for KnotDiagram {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.crossings.hash(state);
        self.loops.hash(state);
    }
}

impl KnotDiagram {
    /// Validates the arc labels and derives the strand orientation.
    ///
    /// `loops` counts crossingless circles; a diagram with no crossings and
    /// no loops is promoted to the one-loop unknot.
    pub fn new(crossings: Vec<[u32; 4]>, loops: u32) -> Result<Self> {
        if crossings.len() > 63 {
            return Err(DiagramError::TooManyCrossings(crossings.len()));
        }
        let loops = if crossings.is_empty() && loops == 0 { 1 } else { loops };
        let max = crossings.iter().flatten().copied().max().unwrap_or(0);
        let mut counts = vec![0usize; max as usize + 1];
        for &a in crossings.iter().flatten() {
            counts[a as usize] += 1;
        }
        if counts.first().copied().unwrap_or(0) > 0 {
            return Err(DiagramError::NonContiguous { max, missing: 0 });
        }
        for label in 1..=max {
            match counts[label as usize] {
                0 => return Err(DiagramError::NonContiguous { max, missing: label }),
                2 => {}
                count => return Err(DiagramError::LabelCount { label, count }),
            }
        }
        let (incoming, components) = orient(&crossings, true)?;
        Ok(Self {
            crossings,
            loops,
            incoming,
            components: components + loops as usize,
            name: None,
        })
    }

    pub fn unknot() -> Self {
        Self::new(vec![], 1).expect("unknot is valid")
    }

    /// Crossingless diagram of the `k`-component unlink.
    pub fn unlink(k: u32) -> Self {
        Self::new(vec![], k.max(1)).expect("unlink is valid")
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn crossings(&self) -> &[[u32; 4]] {
        &self.crossings
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    pub fn arc_count(&self) -> u32 {
        2 * self.crossings.len() as u32
    }

    /// Crossingless circle components.
    pub fn loops(&self) -> u32 {
        self.loops
    }

    pub fn component_count(&self) -> usize {
        self.components
    }

    pub fn is_knot(&self) -> bool {
        self.components == 1
    }

    /// Whether the arc end at `slot` points into its crossing.
    pub fn is_incoming(&self, slot: Slot) -> bool {
        self.incoming[slot.0][slot.1]
    }

    pub fn sign(&self, k: usize) -> i32 {
        if self.incoming[k][1] {
            1
        } else {
            -1
        }
    }

    pub fn signs(&self) -> Vec<i32> {
        (0..self.crossings.len()).map(|k| self.sign(k)).collect()
    }

    /// `(n₊, n₋)`
    pub fn signed_counts(&self) -> (usize, usize) {
        let pos = (0..self.crossings.len()).filter(|&k| self.sign(k) > 0).count();
        (pos, self.crossings.len() - pos)
    }

    pub fn writhe(&self) -> i32 {
        self.signs().iter().sum()
    }

    /// The two slots holding each arc, indexed by `label - 1`.
    pub fn arc_ends(&self) -> Vec<[Slot; 2]> {
        arc_ends(&self.crossings)
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.crossings.len() {
            return Err(DiagramError::CrossingIndex {
                index: k,
                count: self.crossings.len(),
            });
        }
        Ok(())
    }

    /// Exchanges the over- and under-strand at crossing `k` by re-rooting the
    /// tuple at the over-strand's incoming end.
    pub fn switch_crossing(&self, k: usize) -> Result<Self> {
        self.check_index(k)?;
        let mut out = self.clone();
        out.switch_in_place(k);
        Ok(out)
    }

    pub fn switch_all(&self, ks: &[usize]) -> Result<Self> {
        let mut out = self.clone();
        for &k in ks {
            self.check_index(k)?;
            out.switch_in_place(k);
        }
        Ok(out)
    }

    fn switch_in_place(&mut self, k: usize) {
        let [a, b, c, d] = self.crossings[k];
        let [ia, ib, ic, id] = self.incoming[k];
        if ib {
            self.crossings[k] = [b, c, d, a];
            self.incoming[k] = [ib, ic, id, ia];
        } else {
            self.crossings[k] = [d, a, b, c];
            self.incoming[k] = [id, ia, ib, ic];
        }
    }

    pub fn mirror(&self) -> Self {
        let mut out = self.clone();
        for k in 0..out.crossings.len() {
            out.switch_in_place(k);
        }
        out
    }

    /// Circle index of every arc (indexed by `label - 1`) in the complete
    /// smoothing `bits`, together with the number of arc circles. Circles
    /// are numbered in order of their smallest arc label; crossingless loops
    /// come after them and are not listed.
    pub fn circle_assignment(&self, bits: u64) -> (Vec<u16>, usize) {
        let arcs = self.arc_count() as usize;
        let mut parent: Vec<u32> = (0..arcs as u32).collect();
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                let up = parent[parent[x as usize] as usize];
                parent[x as usize] = up;
                x = up;
            }
            x
        }
        let join = |parent: &mut Vec<u32>, x: u32, y: u32| {
            let (rx, ry) = (find(parent, x - 1), find(parent, y - 1));
            if rx != ry {
                parent[rx.max(ry) as usize] = rx.min(ry);
            }
        };
        for (k, &[a, b, c, d]) in self.crossings.iter().enumerate() {
            if bits >> k & 1 == 0 {
                join(&mut parent, a, d);
                join(&mut parent, b, c);
            } else {
                join(&mut parent, a, b);
                join(&mut parent, c, d);
            }
        }
        let mut index = vec![u16::MAX; arcs];
        let mut circle_of = vec![0u16; arcs];
        let mut next = 0u16;
        for arc in 0..arcs {
            let root = find(&mut parent, arc as u32) as usize;
            if index[root] == u16::MAX {
                index[root] = next;
                next += 1;
            }
            circle_of[arc] = index[root];
        }
        (circle_of, next as usize)
    }

    pub fn circle_count(&self, bits: u64) -> usize {
        self.circle_assignment(bits).1 + self.loops as usize
    }

    pub fn resolve(&self, state: &State) -> Result<ResolutionState> {
        if state.len() != self.crossings.len() {
            return Err(DiagramError::StateLength {
                got: state.len(),
                expected: self.crossings.len(),
            });
        }
        let (circle_of, count) = self.circle_assignment(state.bits());
        let mut circles = vec![Vec::new(); count];
        for (arc, &c) in circle_of.iter().enumerate() {
            circles[c as usize].push(arc as u32 + 1);
        }
        Ok(ResolutionState {
            state: state.clone(),
            circles,
            loops: self.loops,
        })
    }

    pub fn mark_singular(&self, ks: &[usize]) -> Result<SingularDiagram> {
        let mut doubled = BTreeSet::new();
        for &k in ks {
            self.check_index(k)?;
            if !doubled.insert(k) {
                return Err(DiagramError::DuplicateIndex(k));
            }
        }
        Ok(SingularDiagram {
            base: self.clone(),
            doubled,
        })
    }

    /// Replaces crossing `k` by its `bit`-smoothing. The result may be a link
    /// and its components are re-oriented as needed.
    pub fn smooth(&self, k: usize, bit: bool) -> Result<Self> {
        self.check_index(k)?;
        let [a, b, c, d] = self.crossings[k];
        let merges = if bit { [(a, b), (c, d)] } else { [(a, d), (b, c)] };
        let rest: Vec<[u32; 4]> = self
            .crossings
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, t)| *t)
            .collect();
        reassemble(rest, &merges, self.arc_count(), self.loops)
    }

    /// Relabels arcs along the orientation and sorts the crossing list,
    /// minimizing over all starting arcs. Equal knot diagrams up to arc
    /// relabeling and crossing order have equal canonical forms.
    pub fn canonical(&self) -> Self {
        if self.crossings.is_empty() {
            return self.clone();
        }
        let starts: Vec<u32> = if self.is_knot() {
            (1..=self.arc_count()).collect()
        } else {
            vec![1]
        };
        let best = starts
            .into_iter()
            .map(|s| {
                let mut t = relabel_along_orientation(&self.crossings, &self.incoming, s);
                t.sort();
                t
            })
            .min()
            .expect("at least one start");
        let mut out = KnotDiagram::new(best, self.loops).expect("relabeling keeps validity");
        out.name = self.name.clone();
        out
    }

    /// Faces of the planar diagram, each a cyclic list of corners `(crossing,
    /// i)` lying between slots `i` and `i + 1`.
    pub fn faces(&self) -> Vec<Vec<Slot>> {
        let ends = self.arc_ends();
        let n = self.crossings.len();
        let mut seen = vec![[false; 4]; n];
        let mut faces = Vec::new();
        for x in 0..n {
            for i in 0..4 {
                if seen[x][i] {
                    continue;
                }
                let mut face = Vec::new();
                let (mut cx, mut ci) = (x, i);
                while !seen[cx][ci] {
                    seen[cx][ci] = true;
                    face.push((cx, ci));
                    let slot = (cx, (ci + 1) % 4);
                    let label = self.crossings[cx][slot.1];
                    let [e0, e1] = ends[label as usize - 1];
                    let other = if e0 == slot { e1 } else { e0 };
                    cx = other.0;
                    ci = other.1;
                }
                faces.push(face);
            }
        }
        faces
    }

    pub fn render_pd(&self) -> String {
        let mut items: Vec<String> = self
            .crossings
            .iter()
            .map(|[a, b, c, d]| format!("X({a},{b},{c},{d})"))
            .collect();
        if !(self.crossings.is_empty() && self.loops == 1) {
            items.extend((0..self.loops).map(|_| "O".to_string()));
        }
        format!("PD[{}]", items.join(", "))
    }
}

impl fmt::Display for KnotDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_pd())
    }
}

impl std::str::FromStr for KnotDiagram {
    type Err = DiagramError;

    fn from_str(s: &str) -> Result<Self> {
        parse_pd(s)
    }
}

pub(crate) fn arc_ends(crossings: &[[u32; 4]]) -> Vec<[Slot; 2]> {
    let max = crossings.iter().flatten().copied().max().unwrap_or(0) as usize;
    let mut ends = vec![[(usize::MAX, 0); 2]; max];
    let mut filled = vec![0usize; max];
    for (k, t) in crossings.iter().enumerate() {
        for (p, &a) in t.iter().enumerate() {
            let i = a as usize - 1;
            if filled[i] < 2 {
                ends[i][filled[i]] = (k, p);
            }
            filled[i] += 1;
        }
    }
    ends
}

/// Assigns in/out to every arc end. With `fixed`, slot 0 of every crossing is
/// forced incoming; otherwise each strand cycle is seeded from its first
/// crossing's slot 0. Returns the flags and the number of strand cycles.
fn orient(crossings: &[[u32; 4]], fixed: bool) -> Result<(Vec<[bool; 4]>, usize)> {
    let n = crossings.len();
    let ends = arc_ends(crossings);
    let mut dir: Vec<[Option<bool>; 4]> = vec![[None; 4]; n];
    let mut components = 0;
    let mut stack: Vec<(Slot, bool)> = Vec::new();
    let mut seeds: Vec<Slot> = (0..n).map(|k| (k, 0)).collect();
    seeds.extend((0..n).flat_map(|k| [(k, 1), (k, 3)]));
    for seed in seeds {
        if dir[seed.0][seed.1].is_some() {
            if fixed && seed.1 == 0 && dir[seed.0][0] != Some(true) {
                return Err(DiagramError::Orientation {
                    arc: crossings[seed.0][0],
                });
            }
            continue;
        }
        components += 1;
        stack.push((seed, true));
        while let Some(((k, p), inc)) = stack.pop() {
            match dir[k][p] {
                Some(v) if v == inc => continue,
                Some(_) => {
                    return Err(DiagramError::Orientation { arc: crossings[k][p] });
                }
                None => {}
            }
            if fixed && p % 2 == 0 && inc != (p == 0) {
                return Err(DiagramError::Orientation { arc: crossings[k][p] });
            }
            dir[k][p] = Some(inc);
            stack.push(((k, (p + 2) % 4), !inc));
            let [e0, e1] = ends[crossings[k][p] as usize - 1];
            let other = if e0 == (k, p) { e1 } else { e0 };
            stack.push((other, !inc));
        }
    }
    let incoming = dir
        .into_iter()
        .map(|d| d.map(|v| v.expect("every slot oriented")))
        .collect();
    Ok((incoming, components))
}

/// Relabels arcs consecutively along the orientation, starting with arc
/// `start` as label 1; further components continue from their smallest
/// remaining label.
fn relabel_along_orientation(crossings: &[[u32; 4]], incoming: &[[bool; 4]], start: u32) -> Vec<[u32; 4]> {
    let ends = arc_ends(crossings);
    let arcs = ends.len();
    let mut new_label = vec![0u32; arcs];
    let mut next = 1u32;
    let mut cursor = Some(start);
    while let Some(first) = cursor {
        let mut arc = first;
        while new_label[arc as usize - 1] == 0 {
            new_label[arc as usize - 1] = next;
            next += 1;
            let [e0, e1] = ends[arc as usize - 1];
            let head = if incoming[e0.0][e0.1] { e0 } else { e1 };
            arc = crossings[head.0][(head.1 + 2) % 4];
        }
        cursor = (1..=arcs as u32).find(|&a| new_label[a as usize - 1] == 0);
    }
    crossings.iter().map(|t| t.map(|a| new_label[a as usize - 1])).collect()
}

/// Rebuilds a diagram from crossings whose under-strand occupies slots 0 and
/// 2 (in either direction) after identifying the arc pairs in `merges`.
/// Arc groups that no longer touch a crossing become crossingless loops.
pub(crate) fn reassemble(
    mut tuples: Vec<[u32; 4]>,
    merges: &[(u32, u32)],
    old_arc_count: u32,
    old_loops: u32,
) -> Result<KnotDiagram> {
    let mut parent: Vec<u32> = (0..=old_arc_count).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            x = parent[x as usize];
        }
        x
    }
    for &(x, y) in merges {
        let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
        if rx != ry {
            parent[rx.max(ry) as usize] = rx.min(ry);
        }
    }
    let mut used = BTreeSet::new();
    for t in tuples.iter_mut() {
        for a in t.iter_mut() {
            *a = find(&mut parent, *a);
            used.insert(*a);
        }
    }
    let roots: BTreeSet<u32> = (1..=old_arc_count).map(|a| find(&mut parent, a)).collect();
    let new_loops = roots.iter().filter(|r| !used.contains(r)).count() as u32;
    let compact: std::collections::BTreeMap<u32, u32> =
        used.iter().enumerate().map(|(i, &r)| (r, i as u32 + 1)).collect();
    for t in tuples.iter_mut() {
        for a in t.iter_mut() {
            *a = compact[a];
        }
    }
    let (incoming, _) = orient(&tuples, false)?;
    for (t, inc) in tuples.iter_mut().zip(&incoming) {
        if !inc[0] {
            t.rotate_left(2);
        }
    }
    let loops = old_loops + new_loops;
    if tuples.is_empty() {
        return KnotDiagram::new(vec![], loops);
    }
    let (incoming, _) = orient(&tuples, true)?;
    let relabeled = relabel_along_orientation(&tuples, &incoming, 1);
    KnotDiagram::new(relabeled, loops)
}

/// Parses `PD[X(a,b,c,d), ...]`. Whitespace is ignored, `X[...]` is
/// accepted as well, and an `O` item stands for a crossingless circle.
pub fn parse_pd(text: &str) -> Result<KnotDiagram> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.expect_str("PD")?;
    p.expect(b'[')?;
    let mut crossings = Vec::new();
    let mut loops = 0;
    p.skip_ws();
    if p.peek() != Some(b']') {
        loop {
            p.skip_ws();
            match p.peek() {
                Some(b'X') => {
                    p.pos += 1;
                    p.skip_ws();
                    let close = match p.peek() {
                        Some(b'(') => b')',
                        Some(b'[') => b']',
                        _ => return Err(p.error("expected '(' after X")),
                    };
                    p.pos += 1;
                    let mut t = [0u32; 4];
                    for (i, slot) in t.iter_mut().enumerate() {
                        if i > 0 {
                            p.expect(b',')?;
                        }
                        *slot = p.label()?;
                    }
                    p.expect(close)?;
                    crossings.push(t);
                }
                Some(b'O') => {
                    p.pos += 1;
                    loops += 1;
                }
                _ => return Err(p.error("expected a crossing X(a,b,c,d)")),
            }
            p.skip_ws();
            match p.peek() {
                Some(b',') => p.pos += 1,
                Some(b']') => break,
                _ => return Err(p.error("expected ',' or ']'")),
            }
        }
    }
    p.expect(b']')?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input"));
    }
    KnotDiagram::new(crossings, loops)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> DiagramError {
        DiagramError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expect_str(&mut self, s: &str) -> Result<()> {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            Ok(())
        } else {
            Err(self.error(&format!("expected '{s}'")))
        }
    }

    fn label(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an arc label"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        match text.parse::<u32>() {
            Ok(v) if (1..u32::MAX / 2).contains(&v) => Ok(v),
            _ => Err(DiagramError::Syntax {
                pos: start,
                msg: "arc labels must be positive integers".into(),
            }),
        }
    }
}

/// Complete smoothing choice, one bit per crossing (bit `k` for crossing `k`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct State {
    bits: u64,
    len: usize,
}

impl State {
    pub fn new(bits: u64, len: usize) -> Self {
        assert!(len <= 63, "states are limited to 63 crossings");
        Self {
            bits: bits & ((1u64 << len) - 1),
            len,
        }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, k: usize) -> bool {
        self.bits >> k & 1 == 1
    }

    /// Number of 1-smoothings.
    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.len {
            f.write_str(if self.bit(k) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for State {
    type Err = DiagramError;

    /// Reads `"011"` as crossing 0 → 0, crossing 1 → 1, crossing 2 → 1.
    fn from_str(s: &str) -> Result<Self> {
        let mut bits = 0u64;
        for (k, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << k,
                _ => {
                    return Err(DiagramError::Syntax {
                        pos: k,
                        msg: "state must be a string of 0s and 1s".into(),
                    })
                }
            }
        }
        if s.len() > 63 {
            return Err(DiagramError::TooManyCrossings(s.len()));
        }
        Ok(State::new(bits, s.len()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolutionState {
    pub state: State,
    /// Arc circles, each listing its arcs, ordered by smallest arc label.
    pub circles: Vec<Vec<u32>>,
    pub loops: u32,
}

impl ResolutionState {
    pub fn circle_count(&self) -> usize {
        self.circles.len() + self.loops as usize
    }
}

/// A diagram with some crossings marked as transversal double points. The
/// base diagram carries each double point in its "over" resolution.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SingularDiagram {
    pub base: KnotDiagram,
    pub doubled: BTreeSet<usize>,
}

impl SingularDiagram {
    pub fn codimension(&self) -> usize {
        self.doubled.len()
    }

    pub fn doubled_list(&self) -> Vec<usize> {
        self.doubled.iter().copied().collect()
    }

    /// The complete resolution that switches the double points selected by
    /// `mask` (bit `t` refers to the `t`-th doubled crossing in ascending
    /// order) to their "under" version.
    pub fn resolution(&self, mask: u64) -> KnotDiagram {
        let chosen: Vec<usize> = self
            .doubled
            .iter()
            .enumerate()
            .filter(|&(t, _)| mask >> t & 1 == 1)
            .map(|(_, &k)| k)
            .collect();
        self.base.switch_all(&chosen).expect("doubled crossings are in range")
    }

    pub fn id(&self) -> String {
        let ks: Vec<String> = self.doubled.iter().map(|k| k.to_string()).collect();
        format!("{}@{{{}}}", self.base.name().unwrap_or("?"), ks.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TREFOIL: &str = "PD[X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)]";

    fn trefoil() -> KnotDiagram {
        parse_pd(TREFOIL).unwrap()
    }

    #[test]
    fn parse_empty_is_unknot() {
        let d = parse_pd("PD[]").unwrap();
        assert_eq!(d.crossing_count(), 0);
        assert_eq!(d.arc_count(), 0);
        assert_eq!(d.component_count(), 1);
        assert_eq!(d, KnotDiagram::unknot());
    }

    #[test]
    fn parse_trefoil() {
        let d = trefoil();
        assert_eq!(d.crossing_count(), 3);
        assert_eq!(d.arc_count(), 6);
        assert!(d.is_knot());
        assert_eq!(d.render_pd(), TREFOIL);
        let d2 = parse_pd(" PD [ X[1, 4,2,5],X(3,6,4,1) ,\n X(5,2,6,3) ] ").unwrap();
        assert_eq!(d, d2);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_pd("PD[X(1,1,3,3)]"),
            Err(DiagramError::NonContiguous { missing: 2, .. })
        ));
        assert!(matches!(
            parse_pd("PD[X(1,1,1,2)]"),
            Err(DiagramError::LabelCount { label: 1, count: 3 })
        ));
        assert!(matches!(parse_pd("PD[X(1,2,3)]"), Err(DiagramError::Syntax { .. })));
        assert!(matches!(parse_pd("PX[]"), Err(DiagramError::Syntax { pos: 0, .. })));
        assert!(matches!(
            parse_pd("PD[X(1,2,2,1)] x"),
            Err(DiagramError::Syntax { pos: 15, .. })
        ));
        assert!(matches!(parse_pd("PD[X(0,1,1,0)]"), Err(DiagramError::Syntax { .. })));
        // under-strand 1 -> 2 twice: arc 2 would leave both crossings
        assert!(matches!(
            parse_pd("PD[X(1,3,2,4), X(1,4,2,3)]"),
            Err(DiagramError::Orientation { .. })
        ));
    }

    #[test]
    fn kinks_are_valid() {
        let neg = parse_pd("PD[X(1,1,2,2)]").unwrap();
        let pos = parse_pd("PD[X(1,2,2,1)]").unwrap();
        assert_eq!(neg.writhe(), -1);
        assert_eq!(pos.writhe(), 1);
        assert!(neg.is_knot() && pos.is_knot());
    }

    #[test]
    fn trefoil_signs_and_writhe() {
        let d = trefoil();
        assert_eq!(d.signs(), vec![1, 1, 1]);
        assert_eq!(d.writhe(), 3);
        assert_eq!(d.mirror().writhe(), -3);
        assert_eq!(KnotDiagram::unknot().writhe(), 0);
    }

    #[test]
    fn trefoil_cube_circle_counts() {
        let d = trefoil();
        let count = |s: &str| d.resolve(&s.parse().unwrap()).unwrap().circle_count();
        assert_eq!(count("000"), 2);
        assert_eq!(count("111"), 3);
        assert_eq!(count("100"), 1);
        assert_eq!(count("010"), 1);
        assert_eq!(count("011"), 2);
    }

    #[test]
    fn resolve_rejects_wrong_length() {
        let d = trefoil();
        assert!(matches!(
            d.resolve(&"01".parse().unwrap()),
            Err(DiagramError::StateLength { got: 2, expected: 3 })
        ));
    }

    #[test]
    fn switch_is_involution() {
        let d = trefoil();
        for k in 0..3 {
            let s = d.switch_crossing(k).unwrap();
            assert_eq!(s.sign(k), -d.sign(k));
            assert_eq!(s.switch_crossing(k).unwrap(), d);
        }
        assert!(matches!(
            KnotDiagram::unknot().switch_crossing(0),
            Err(DiagramError::CrossingIndex { index: 0, count: 0 })
        ));
    }

    #[test]
    fn switch_exchanges_smoothings() {
        let d = trefoil();
        let s = d.switch_crossing(1).unwrap();
        for bits in 0..8u64 {
            let (a, _) = d.circle_assignment(bits);
            let (b, _) = s.circle_assignment(bits ^ 0b010);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn mirror_involution() {
        let d = trefoil();
        assert_eq!(d.mirror().mirror(), d);
        assert_eq!(KnotDiagram::unknot().mirror(), KnotDiagram::unknot());
        assert_eq!(d.mirror(), d.switch_all(&[0, 1, 2]).unwrap());
    }

    #[test]
    fn mark_singular_checks() {
        let d = trefoil();
        assert_eq!(d.mark_singular(&[]).unwrap().codimension(), 0);
        assert_eq!(d.mark_singular(&[0]).unwrap().codimension(), 1);
        assert_eq!(d.mark_singular(&[0, 1, 2]).unwrap().codimension(), 3);
        assert!(matches!(d.mark_singular(&[3]), Err(DiagramError::CrossingIndex { .. })));
        assert!(matches!(d.mark_singular(&[1, 1]), Err(DiagramError::DuplicateIndex(1))));
    }

    #[test]
    fn faces_satisfy_euler() {
        let d = trefoil();
        let faces = d.faces();
        assert_eq!(faces.len(), d.crossing_count() + 2);
        assert_eq!(faces.iter().map(|f| f.len()).sum::<usize>(), 4 * d.crossing_count());
    }

    #[test]
    fn smoothing_trefoil() {
        let d = trefoil();
        let s1 = d.smooth(0, true).unwrap();
        let s0 = d.smooth(0, false).unwrap();
        assert_eq!(s1.crossing_count(), 2);
        assert_eq!(s0.crossing_count(), 2);
        // one smoothing of a trefoil crossing is a Hopf link, the other an unknot
        let mut comps = [s0.component_count(), s1.component_count()];
        comps.sort();
        assert_eq!(comps, [1, 2]);
    }

    #[test]
    fn canonical_ignores_labels() {
        let d = trefoil();
        let shifted = parse_pd("PD[X(3,6,4,1), X(5,2,6,3), X(1,4,2,5)]").unwrap();
        assert_eq!(d.canonical(), shifted.canonical());
    }

    #[test]
    fn render_round_trip_with_loops() {
        let d = KnotDiagram::unlink(2);
        assert_eq!(d.render_pd(), "PD[O, O]");
        assert_eq!(parse_pd(&d.render_pd()).unwrap(), d);
        assert_eq!(d.component_count(), 2);
    }
}

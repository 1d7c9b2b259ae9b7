//! Bundled table of knot diagrams, one-step Reidemeister rewrites and the
//! cross-diagram invariance suite.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::complex::{homology, BigradedGroups};
use crate::diagram::{parse_pd, reassemble, DiagramError, KnotDiagram, Slot};
use crate::khovanov::{build_ckh, KhovanovError};

const BUNDLED: &str = include_str!("../data/atlas.tsv");

#[derive(Debug, Error)]
pub enum AtlasError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: expected `name<TAB>pd`")]
    Format { line: usize },
    #[error("line {line} ({name}): {source}")]
    Pd {
        line: usize,
        name: String,
        source: DiagramError,
    },
    #[error("line {line} ({name}): diagram has {components} components, expected a knot")]
    NotAKnot {
        line: usize,
        name: String,
        components: usize,
    },
    #[error(transparent)]
    Khovanov(#[from] KhovanovError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtlasEntry {
    pub name: String,
    pub pd: String,
    pub diagram: KnotDiagram,
    /// Crossing number read from the name (`7_4` → 7).
    pub known_crossing_number: Option<u32>,
}

impl AtlasEntry {
    pub fn new(name: &str, pd: &str) -> Result<Self, DiagramError> {
        let diagram = parse_pd(pd)?.with_name(name);
        Ok(Self {
            name: name.to_string(),
            pd: pd.to_string(),
            diagram,
            known_crossing_number: name.split('_').next().and_then(|n| n.parse().ok()),
        })
    }

    /// `name`, `pd` and `writhe` as `key: value` lines.
    pub fn record(&self) -> String {
        format!(
            "name: {}\npd: {}\nwrithe: {}\n",
            self.name,
            self.diagram.render_pd(),
            self.diagram.writhe()
        )
    }
}

/// Parses `name<TAB>pd` lines; blank lines and `#` comments are skipped.
pub fn parse_table(text: &str) -> Result<Vec<AtlasEntry>, AtlasError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (name, pd) = raw.split_once('\t').ok_or(AtlasError::Format { line })?;
        let (name, pd) = (name.trim(), pd.trim());
        if name.is_empty() || pd.is_empty() {
            return Err(AtlasError::Format { line });
        }
        let entry = AtlasEntry::new(name, pd).map_err(|source| AtlasError::Pd {
            line,
            name: name.to_string(),
            source,
        })?;
        if !entry.diagram.is_knot() {
            return Err(AtlasError::NotAKnot {
                line,
                name: name.to_string(),
                components: entry.diagram.component_count(),
            });
        }
        out.push(entry);
    }
    Ok(out)
}

pub fn load_table(path: impl AsRef<Path>) -> Result<Vec<AtlasEntry>, AtlasError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| AtlasError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_table(&text)
}

/// The table shipped with the crate.
pub fn bundled_table() -> Vec<AtlasEntry> {
    parse_table(BUNDLED).expect("bundled table is valid")
}

pub fn find<'a>(entries: &'a [AtlasEntry], name: &str) -> Option<&'a AtlasEntry> {
    entries.iter().find(|e| e.name == name)
}

/// Entries grouped by name, in first-appearance order.
pub fn groups(entries: &[AtlasEntry]) -> Vec<(String, Vec<&AtlasEntry>)> {
    let mut order: Vec<String> = Vec::new();
    let mut map: BTreeMap<&str, Vec<&AtlasEntry>> = BTreeMap::new();
    for e in entries {
        if !map.contains_key(e.name.as_str()) {
            order.push(e.name.clone());
        }
        map.entry(&e.name).or_default().push(e);
    }
    order
        .into_iter()
        .map(|n| {
            let v = map.remove(n.as_str()).unwrap_or_default();
            (n, v)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Reidemeister moves

/// Every diagram one Reidemeister move away from `d` that the local pattern
/// search finds: R1 kinks of both chiralities on both sides of every arc,
/// R1 removals, R2 pushes across every face and R2 removals on bigons, and
/// R3 slides on triangles. Results are deduplicated up to relabeling.
pub fn r_moves(d: &KnotDiagram) -> Vec<KnotDiagram> {
    let mut raw = Vec::new();
    raw.extend(r1_insertions(d));
    raw.extend(r1_removals(d));
    raw.extend(r2_insertions(d));
    raw.extend(r2_removals(d));
    raw.extend(r3_moves(d));
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for e in raw {
        let c = e.canonical();
        let key = (c.crossings().to_vec(), c.loops());
        if seen.insert(key) {
            out.push(match d.name() {
                Some(n) => c.with_name(n),
                None => c,
            });
        }
    }
    out
}

fn build(crossings: Vec<[u32; 4]>, loops: u32) -> Option<KnotDiagram> {
    let r = KnotDiagram::new(crossings, loops);
    debug_assert!(r.is_ok(), "move produced an invalid diagram: {r:?}");
    r.ok()
}

/// Slot where `arc` ends (enters a crossing) and where it starts.
fn head_tail(d: &KnotDiagram, ends: &[[Slot; 2]], arc: u32) -> (Slot, Slot) {
    let [e0, e1] = ends[arc as usize - 1];
    if d.is_incoming(e0) {
        (e0, e1)
    } else {
        (e1, e0)
    }
}

/// The four kinks `u → K → l → K → w` on every arc, plus kinks on
/// crossingless loops.
fn r1_insertions(d: &KnotDiagram) -> Vec<KnotDiagram> {
    let m = d.arc_count();
    let kinks = |u: u32, l: u32, w: u32| -> [[u32; 4]; 4] { [[u, l, l, w], [u, w, l, l], [l, u, w, l], [l, l, w, u]] };
    let mut out = Vec::new();
    if d.loops() > 0 {
        let (u, l) = (m + 1, m + 2);
        for k in kinks(u, l, u) {
            let mut cs = d.crossings().to_vec();
            cs.push(k);
            out.extend(build(cs, d.loops() - 1));
        }
    }
    let ends = d.arc_ends();
    for x in 1..=m {
        let (head, _) = head_tail(d, &ends, x);
        let (l, w) = (m + 1, m + 2);
        for k in kinks(x, l, w) {
            let mut cs = d.crossings().to_vec();
            cs[head.0][head.1] = w;
            cs.push(k);
            out.extend(build(cs, d.loops()));
        }
    }
    out
}

fn r1_removals(d: &KnotDiagram) -> Vec<KnotDiagram> {
    let mut out = Vec::new();
    for (k, t) in d.crossings().iter().enumerate() {
        for p in 0..4 {
            if t[p] != t[(p + 1) % 4] {
                continue;
            }
            let l = t[p];
            let others = [t[(p + 2) % 4], t[(p + 3) % 4]];
            let rest: Vec<[u32; 4]> = without(d, &[k]);
            let merges = [(others[0], l), (l, others[1])];
            out.extend(reassemble(rest, &merges, d.arc_count(), d.loops()).ok());
        }
    }
    out
}

fn without(d: &KnotDiagram, drop: &[usize]) -> Vec<[u32; 4]> {
    d.crossings()
        .iter()
        .enumerate()
        .filter(|(i, _)| !drop.contains(i))
        .map(|(_, t)| *t)
        .collect()
}

/// Rotates a counterclockwise ray list so it starts at the incoming ray of
/// the under-strand. `under_rays` is the slot pair (0/2 or 1/3) of the
/// under-strand and `incoming` the one of those two that enters.
fn rooted(rays: [u32; 4], incoming: usize) -> [u32; 4] {
    let mut t = rays;
    t.rotate_left(incoming);
    t
}

/// Pushes one face edge over or under another, creating a bigon.
fn r2_insertions(d: &KnotDiagram) -> Vec<KnotDiagram> {
    let m = d.arc_count();
    let mut out = Vec::new();
    for face in d.faces() {
        // edge e of the face runs from slot (X, i+1) to the next corner
        let edges: Vec<(Slot, Slot)> = (0..face.len())
            .map(|e| {
                let (x, i) = face[e];
                let next = face[(e + 1) % face.len()];
                ((x, (i + 1) % 4), next)
            })
            .collect();
        for a in 0..edges.len() {
            for b in a + 1..edges.len() {
                for (p, q) in [(a, b), (b, a)] {
                    let (xs, xe) = edges[p];
                    let (ys, ye) = edges[q];
                    let x = d.crossings()[xs.0][xs.1];
                    let y = d.crossings()[ys.0][ys.1];
                    if x == y {
                        continue;
                    }
                    let (x2, x3, yb, yc) = (m + 1, m + 2, m + 3, m + 4);
                    // along the walk, x meets L then R; y meets R then L
                    let l_rays = [x, yc, x2, yb];
                    let r_rays = [x3, yb, x2, y];
                    let x_fwd = !d.is_incoming(xs);
                    let y_fwd = !d.is_incoming(ys);
                    for x_over in [true, false] {
                        let (l, r) = if x_over {
                            // y is under: at L it enters via yb (fwd) or yc
                            let l = rooted(l_rays, if y_fwd { 3 } else { 1 });
                            let r = rooted(r_rays, if y_fwd { 3 } else { 1 });
                            (l, r)
                        } else {
                            let l = rooted(l_rays, if x_fwd { 0 } else { 2 });
                            let r = rooted(r_rays, if x_fwd { 2 } else { 0 });
                            (l, r)
                        };
                        let mut cs = d.crossings().to_vec();
                        cs[xe.0][xe.1] = x3;
                        cs[ye.0][ye.1] = yc;
                        cs.push(l);
                        cs.push(r);
                        out.extend(build(cs, d.loops()));
                    }
                }
            }
        }
    }
    out
}

/// Removes bigons whose two crossings have the same strand on top.
fn r2_removals(d: &KnotDiagram) -> Vec<KnotDiagram> {
    let t = d.crossings();
    let mut out = Vec::new();
    for face in d.faces() {
        let [(x, i), (y, j)] = face[..] else { continue };
        if x == y || (i + 1) % 2 != j % 2 {
            continue;
        }
        let e1 = t[x][(i + 1) % 4];
        let e2 = t[y][(j + 1) % 4];
        let merges = [
            (t[x][(i + 3) % 4], e1),
            (e1, t[y][(j + 2) % 4]),
            (t[x][(i + 2) % 4], e2),
            (e2, t[y][(j + 3) % 4]),
        ];
        out.extend(reassemble(without(d, &[x, y]), &merges, d.arc_count(), d.loops()).ok());
    }
    out
}

/// Slides the strand opposite each triangle vertex across that vertex when
/// it lies entirely above or below the other two.
fn r3_moves(d: &KnotDiagram) -> Vec<KnotDiagram> {
    let t = d.crossings();
    let mut out = Vec::new();
    for face in d.faces() {
        if face.len() != 3 {
            continue;
        }
        for rot in 0..3 {
            // walk order A → C → B
            let (a, i) = face[rot];
            let (c, j) = face[(rot + 1) % 3];
            let (b, l) = face[(rot + 2) % 3];
            if a == b || b == c || a == c {
                continue;
            }
            let s3_top = j % 2 == 0 && l % 2 == 1;
            let s3_bottom = j % 2 == 1 && l % 2 == 0;
            if !(s3_top || s3_bottom) {
                continue;
            }
            let ray = |x: usize, p: usize| t[x][p % 4];
            let (e1, e2, e3) = (ray(a, i), ray(a, i + 1), ray(c, j + 1));
            let (alpha1, alpha2) = (ray(a, i + 2), ray(a, i + 3));
            let (gamma2, gamma3) = (ray(c, j + 2), ray(c, j + 3));
            let (beta3, beta1) = (ray(b, l + 2), ray(b, l + 3));
            let (f1, f2, f3) = (e1, e2, e3);
            // strand directions: s1 β1→α1, s2 α2→γ2, s3 γ3→β3 when "forward"
            let s1_fwd = d.is_incoming((a, i % 4));
            let s2_fwd = d.is_incoming((a, (i + 3) % 4));
            let s3_fwd = d.is_incoming((c, (j + 3) % 4));
            let s1_under_at_a = i % 2 == 0;

            // A' = [β1, γ2, f1, f2]; s1 on slots 0/2, s2 on 1/3
            let a_rays = [beta1, gamma2, f1, f2];
            let a_new = if s1_under_at_a {
                rooted(a_rays, if s1_fwd { 0 } else { 2 })
            } else {
                rooted(a_rays, if s2_fwd { 3 } else { 1 })
            };
            // B' = [f3, f1, γ3, α1]; s3 on 0/2, s1 on 1/3
            let b_rays = [f3, f1, gamma3, alpha1];
            let b_new = if s3_bottom {
                rooted(b_rays, if s3_fwd { 2 } else { 0 })
            } else {
                rooted(b_rays, if s1_fwd { 1 } else { 3 })
            };
            // C' = [β3, f2, f3, α2]; s3 on 0/2, s2 on 1/3
            let c_rays = [beta3, f2, f3, alpha2];
            let c_new = if s3_bottom {
                rooted(c_rays, if s3_fwd { 2 } else { 0 })
            } else {
                rooted(c_rays, if s2_fwd { 3 } else { 1 })
            };
            let mut cs = t.to_vec();
            cs[a] = a_new;
            cs[b] = b_new;
            cs[c] = c_new;
            out.extend(build(cs, d.loops()));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Invariance suite

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NeighborPolicy {
    /// The first Reidemeister neighbor of each diagram.
    #[default]
    One,
    /// Every neighbor `r_moves` finds.
    All,
}

#[derive(Clone, Debug)]
pub struct GroupReport {
    pub name: String,
    pub diagrams: usize,
    pub neighbors: usize,
    pub homology: BigradedGroups,
    /// PD codes whose homology differs from the first diagram's.
    pub mismatches: Vec<String>,
}

impl GroupReport {
    pub fn consistent(&self) -> bool {
        self.mismatches.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct InvarianceReport {
    pub groups: Vec<GroupReport>,
}

impl InvarianceReport {
    pub fn all_consistent(&self) -> bool {
        self.groups.iter().all(GroupReport::consistent)
    }
}

/// Compares Khovanov homology across each name group and its Reidemeister
/// neighbors.
pub fn invariance_suite(entries: &[AtlasEntry], policy: NeighborPolicy) -> Result<InvarianceReport, AtlasError> {
    let groups = groups(entries);
    let reports = groups
        .par_iter()
        .map(|(name, members)| {
            let mut diagrams: Vec<KnotDiagram> = Vec::new();
            let mut neighbors = 0;
            for e in members {
                diagrams.push(e.diagram.clone());
                let moves = r_moves(&e.diagram);
                let picked: Vec<KnotDiagram> = match policy {
                    NeighborPolicy::One => moves.into_iter().take(1).collect(),
                    NeighborPolicy::All => moves,
                };
                neighbors += picked.len();
                diagrams.extend(picked);
            }
            let homologies = diagrams
                .par_iter()
                .map(|d| build_ckh(d).map(|c| homology(&c)))
                .collect::<Result<Vec<_>, _>>()?;
            let reference = homologies[0].clone();
            let mismatches = diagrams
                .iter()
                .zip(&homologies)
                .filter(|(_, h)| **h != reference)
                .map(|(d, _)| d.render_pd())
                .collect();
            Ok(GroupReport {
                name: name.clone(),
                diagrams: members.len(),
                neighbors,
                homology: reference,
                mismatches,
            })
        })
        .collect::<Result<Vec<_>, AtlasError>>()?;
    Ok(InvarianceReport { groups: reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::jones_unnormalized;

    #[test]
    fn table_parsing() {
        assert!(parse_table("").unwrap().is_empty());
        let t = parse_table("# comment\n\n3_1\tPD[X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)]\n").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].known_crossing_number, Some(3));
        assert!(matches!(parse_table("3_1 PD[]\n"), Err(AtlasError::Format { line: 1 })));
        let err = parse_table("0_1\tPD[]\nbad\tPD[X(1,2)]\n").unwrap_err();
        assert!(matches!(err, AtlasError::Pd { line: 2, .. }));
        assert!(err.to_string().contains("bad"));
        assert!(matches!(
            parse_table("hopf\tPD[X(1,3,2,4), X(3,1,4,2)]"),
            Err(AtlasError::NotAKnot { components: 2, .. })
        ));
    }

    #[test]
    fn unknot_kinks() {
        let moves = r_moves(&KnotDiagram::unknot());
        assert_eq!(moves.len(), 2);
        assert!(moves.iter().all(|m| m.crossing_count() == 1));
        let writhes: BTreeSet<i32> = moves.iter().map(|m| m.writhe()).collect();
        assert_eq!(writhes, [-1, 1].into_iter().collect());
    }

    #[test]
    fn kink_removal_returns_unknot() {
        let kink = parse_pd("PD[X(1,1,2,2)]").unwrap();
        let moves = r_moves(&kink);
        assert!(moves.iter().any(|m| *m == KnotDiagram::unknot()));
    }

    #[test]
    fn trefoil_moves_preserve_jones() {
        let t = parse_pd("PD[X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)]").unwrap();
        let j = jones_unnormalized(&t);
        let moves = r_moves(&t);
        let counts: BTreeSet<usize> = moves.iter().map(|m| m.crossing_count()).collect();
        assert!(counts.contains(&4) && counts.contains(&5));
        for m in &moves {
            assert_eq!(jones_unnormalized(m), j, "{}", m.render_pd());
        }
    }

    #[test]
    fn record_format() {
        let e = AtlasEntry::new("3_1", "PD[X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)]").unwrap();
        assert_eq!(
            e.record(),
            "name: 3_1\npd: PD[X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)]\nwrithe: 3\n"
        );
    }
}

//! Wall-crossing morphisms between the cubes of `K₊` and `K₋`, singular
//! knot complexes as iterated cones, and the finite-type acyclicity audit.
//!
//! Everything is built in raw cube gradings. Crossing the wall at `k` sends a
//! generator `(s, ℓ)` of `K₊` with `s_k = 0` to `±(s + e_k, ℓ)` of `K₋`, the
//! same resolution viewed from the other side, and kills `s_k = 1`. The
//! target is `K₋`'s cube shifted by `(−1, −1)` so that the map has bidegree
//! zero.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::complex::{
    cone, cube_total, homology, Bidegree, BigradedGroups, ChainComplex, ChainMap, ComplexError, Cube, SparseMatrix,
};
use crate::diagram::{DiagramError, KnotDiagram, SingularDiagram};
use crate::khovanov::{cube_complex, CubeComplex, CubeGenerator, KhovanovError, DEFAULT_MAX_STATES};
use crate::polynomial::{kauffman_bracket, LaurentPoly};

pub const MAX_AUDIT_CROSSINGS: usize = 7;
pub const MAX_AUDIT_CODIM: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WallError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Khovanov(#[from] KhovanovError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("a stratum needs at least one double point")]
    NotAStratum,
    #[error("diagram has {0} components; walls are only defined for knots")]
    MultiComponent(usize),
    #[error("circle partitions differ across the wall at crossing {k}, state {state:b}")]
    CirclePartition { k: usize, state: u64 },
    #[error("audit limited to {MAX_AUDIT_CROSSINGS} crossings and codimension {MAX_AUDIT_CODIM}, got {max_crossings} and {codim}")]
    AuditGuard { max_crossings: usize, codim: usize },
}

pub type Result<T> = std::result::Result<T, WallError>;

/// The wall map at crossing `k`, from the raw cube of `d` to the raw cube of
/// `switch_crossing(d, k)` shifted by `(−1, −1)`.
#[derive(Clone, Debug)]
pub struct WallMorphism {
    pub k: usize,
    pub map: ChainMap,
}

impl WallMorphism {
    pub fn source(&self) -> &ChainComplex {
        self.map.source()
    }

    pub fn target(&self) -> &ChainComplex {
        self.map.target()
    }
}

fn ensure_knot(d: &KnotDiagram) -> Result<()> {
    if !d.is_knot() {
        return Err(WallError::MultiComponent(d.component_count()));
    }
    Ok(())
}

fn sign_below(bits: u64, k: usize) -> i64 {
    if (bits & ((1u64 << k) - 1)).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Blocks of the wall map keyed by raw source bidegree. Generators with
/// `s_k = 0` go to `(s + e_k, ℓ)` with sign `(−1)^{#1s of s below k}`, which
/// is what makes the map commute with the edge signs of both cubes.
fn wall_blocks(
    d: &KnotDiagram,
    switched: &KnotDiagram,
    k: usize,
    src: &CubeComplex,
    tgt: &CubeComplex,
) -> Result<BTreeMap<Bidegree, SparseMatrix>> {
    for s in (0..1u64 << d.crossing_count()).filter(|s| s >> k & 1 == 0) {
        if d.circle_assignment(s) != switched.circle_assignment(s | 1 << k) {
            return Err(WallError::CirclePartition { k, state: s });
        }
    }
    let index = tgt.index();
    let blocks = src
        .generators
        .iter()
        .map(|(&(h, q), gens)| {
            let rows = tgt.generators.get(&(h + 1, q + 1)).map_or(0, Vec::len);
            let entries = gens
                .iter()
                .enumerate()
                .filter(|(_, g)| g.state >> k & 1 == 0)
                .map(|(c, g)| {
                    let image = CubeGenerator {
                        state: g.state | 1 << k,
                        labeling: g.labeling,
                    };
                    let (deg, r) = index[&image];
                    debug_assert_eq!(deg, (h + 1, q + 1));
                    (r, c, sign_below(g.state, k))
                });
            ((h, q), SparseMatrix::from_triplets(rows, gens.len(), entries))
        })
        .collect();
    Ok(blocks)
}

pub fn wall_morphism(d: &KnotDiagram, k: usize) -> Result<WallMorphism> {
    wall_morphism_limited(d, k, DEFAULT_MAX_STATES)
}

pub fn wall_morphism_limited(d: &KnotDiagram, k: usize, max_states: u64) -> Result<WallMorphism> {
    ensure_knot(d)?;
    let switched = d.switch_crossing(k)?;
    let src = cube_complex(d, max_states)?;
    let tgt = cube_complex(&switched, max_states)?;
    let blocks = wall_blocks(d, &switched, k, &src, &tgt)?;
    let map = ChainMap::new(
        Arc::new(src.complex.clone()),
        Arc::new(tgt.complex.shift(-1, -1)),
        blocks,
    )?;
    Ok(WallMorphism { k, map })
}

/// The commutative cube of a stratum: vertex `r` is the raw cube of the
/// resolution switching the double points in `r`, shifted by
/// `(−|r|, −|r|)`; edges are wall maps with the sign
/// `(−1)^{#1s of r below t}`.
pub fn singular_cube(s: &SingularDiagram) -> Result<Cube> {
    let m = s.codimension();
    if m == 0 {
        return Err(WallError::NotAStratum);
    }
    ensure_knot(&s.base)?;
    let doubled = s.doubled_list();
    let diagrams: Vec<KnotDiagram> = (0..1u64 << m).map(|r| s.resolution(r)).collect();
    let cubes: Vec<CubeComplex> = diagrams
        .par_iter()
        .map(|d| cube_complex(d, DEFAULT_MAX_STATES))
        .collect::<std::result::Result<_, _>>()?;
    let vertices: Vec<Arc<ChainComplex>> = cubes
        .iter()
        .enumerate()
        .map(|(r, c)| {
            let w = (r as u64).count_ones() as i32;
            Arc::new(c.complex.shift(-w, -w))
        })
        .collect();
    let keys: Vec<(u64, usize)> = (0..1u64 << m)
        .flat_map(|r| (0..m).filter(move |&t| r >> t & 1 == 0).map(move |t| (r, t)))
        .collect();
    let edges = keys
        .par_iter()
        .map(|&(r, t)| {
            let u = r | 1 << t;
            let (d, e) = (&diagrams[r as usize], &diagrams[u as usize]);
            let raw = wall_blocks(d, e, doubled[t], &cubes[r as usize], &cubes[u as usize])?;
            let w = r.count_ones() as i32;
            let sign = sign_below(r, t);
            let blocks = raw
                .into_iter()
                .map(|((h, q), b)| ((h - w, q - w), b.scaled(sign)))
                .collect();
            let f = ChainMap::new(vertices[r as usize].clone(), vertices[u as usize].clone(), blocks)?;
            Ok(((r, t), f))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(Cube::new(vertices, edges)?)
}

/// Iterated cone over the stratum's cube, folding directions in index order.
pub fn singular_complex(s: &SingularDiagram) -> Result<ChainComplex> {
    let order: Vec<usize> = (0..s.codimension()).collect();
    singular_complex_with_order(s, &order)
}

/// `order` lists positions in the sorted set of doubled crossings.
pub fn singular_complex_with_order(s: &SingularDiagram, order: &[usize]) -> Result<ChainComplex> {
    let cube = singular_cube(s)?;
    if cube.dim == 1 {
        return Ok(cone(&cube.edges[&(0, 0)]));
    }
    Ok(cube_total(&cube, order)?)
}

/// Graded Euler characteristic predicted from brackets alone:
/// `(−1)^m Σ_r q^{−|r|} ⟨D_r⟩`, each resolution entering at its
/// coorientation distance from the base.
pub fn graded_skein(s: &SingularDiagram) -> LaurentPoly {
    let m = s.codimension();
    let sum: LaurentPoly = (0..1u64 << m)
        .map(|r| kauffman_bracket(&s.resolution(r)).scale_shift(1, -(r.count_ones() as i32)))
        .sum();
    if m.is_multiple_of(2) {
        sum
    } else {
        -sum
    }
}

/// The classical skein combination `Σ_r (−1)^{|r|} ⟨D_r⟩`; for one double
/// point this is `⟨K₊⟩ − ⟨K₋⟩`.
pub fn raw_skein(s: &SingularDiagram) -> LaurentPoly {
    (0..1u64 << s.codimension())
        .map(|r| {
            let b = kauffman_bracket(&s.resolution(r));
            if r.count_ones() % 2 == 0 {
                b
            } else {
                -b
            }
        })
        .sum()
}

#[derive(Clone, Debug)]
pub struct FiniteTypeReport {
    pub stratum: SingularDiagram,
    pub cone_homology: BigradedGroups,
    pub euler: LaurentPoly,
    pub acyclic: bool,
    pub order_verdict: String,
    /// χ_q of the cone equals [`graded_skein`].
    pub chi_check: bool,
    /// χ_q of the cone equals `±` [`raw_skein`].
    pub raw_skein_check: bool,
}

pub fn finite_type_report(s: &SingularDiagram) -> Result<FiniteTypeReport> {
    let c = singular_complex(s)?;
    let h = homology(&c);
    let euler = c.euler_characteristic();
    let acyclic = h.is_zero();
    let m = s.codimension();
    let order_verdict = if acyclic {
        format!("acyclic: evidence for type <= {}", m - 1)
    } else {
        format!("not acyclic: no evidence for type <= {}", m - 1)
    };
    let raw = raw_skein(s);
    Ok(FiniteTypeReport {
        stratum: s.clone(),
        chi_check: euler == graded_skein(s),
        raw_skein_check: euler == raw || euler == -raw,
        cone_homology: h,
        euler,
        acyclic,
        order_verdict,
    })
}

/// Self-test: the cone of the identity on `d`'s cube must be acyclic.
pub fn identity_wall_report(d: &KnotDiagram) -> Result<FiniteTypeReport> {
    let c = Arc::new(cube_complex(d, DEFAULT_MAX_STATES)?.complex);
    let k = cone(&ChainMap::identity(c));
    let h = homology(&k);
    let euler = k.euler_characteristic();
    let acyclic = h.is_zero();
    Ok(FiniteTypeReport {
        stratum: d.mark_singular(&[])?,
        cone_homology: h,
        chi_check: euler.is_zero(),
        raw_skein_check: euler.is_zero(),
        euler,
        acyclic,
        order_verdict: if acyclic {
            "identity wall: acyclic"
        } else {
            "identity wall: NOT acyclic"
        }
        .into(),
    })
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub max_crossings: usize,
    pub codim: usize,
    pub reports: Vec<FiniteTypeReport>,
}

impl AuditReport {
    pub fn acyclic_count(&self) -> usize {
        self.reports.iter().filter(|r| r.acyclic).count()
    }

    pub fn fraction_acyclic(&self) -> f64 {
        if self.reports.is_empty() {
            return 1.0;
        }
        self.acyclic_count() as f64 / self.reports.len() as f64
    }

    pub fn discrepancies(&self) -> impl Iterator<Item = &FiniteTypeReport> {
        self.reports.iter().filter(|r| !r.acyclic)
    }
}

/// Reports for every way to mark `codim` double points on each knot
/// diagram with at most `max_crossings` crossings.
pub fn audit_subcategory(diagrams: &[KnotDiagram], max_crossings: usize, codim: usize) -> Result<AuditReport> {
    if max_crossings > MAX_AUDIT_CROSSINGS || codim > MAX_AUDIT_CODIM || codim == 0 {
        if codim == 0 {
            return Err(WallError::NotAStratum);
        }
        return Err(WallError::AuditGuard { max_crossings, codim });
    }
    let strata: Vec<SingularDiagram> = diagrams
        .iter()
        .filter(|d| d.is_knot() && d.crossing_count() <= max_crossings)
        .flat_map(|d| {
            crate::polynomial::subsets(d.crossing_count(), codim)
                .into_iter()
                .map(move |ks| d.mark_singular(&ks).expect("subsets are in range"))
        })
        .collect();
    let reports = strata.par_iter().map(finite_type_report).collect::<Result<Vec<_>>>()?;
    Ok(AuditReport {
        max_crossings,
        codim,
        reports,
    })
}

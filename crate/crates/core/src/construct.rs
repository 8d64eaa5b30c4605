//! Constructions on presentations: slices, restriction and fibers,
//! boundaries, fills, source horns, pasting-diagram targets, pushouts, and
//! the opetope determined by a pasting diagram.

use std::collections::{BTreeMap, BTreeSet};

use crate::axioms::is_opetope;
use crate::graph::{
    canonical_relabel, validate_morphism, ArrowId, Cell, CellId, Diamond, GenArrow, Morphism,
    OpetopicGraph, Polarity,
};
use crate::normalize::{hom, precompose_arrow, NormalForm};
use crate::{Error, Result};

/// An n-boundary candidate: an opetopic set of degree < n with every
/// degree-(n-1) cell marked Source or Target.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Boundary {
    pub graph: OpetopicGraph,
    pub n: u32,
    pub marking: BTreeMap<CellId, Polarity>,
}

/// An n-pasting-diagram candidate: an opetopic set of degree <= n with leaf
/// and root marks on degree-(n-1) cells. Marks are mark *lists*: the horn of
/// an invalid boundary can mark a cell more than once, and the axiom checker
/// must see that.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PastingDiagram {
    pub graph: OpetopicGraph,
    pub n: u32,
    pub leaves: Vec<CellId>,
    pub roots: Vec<CellId>,
}

impl PastingDiagram {
    pub fn top_cells(&self) -> Vec<CellId> {
        self.graph.cells_of_degree(self.n)
    }

    pub fn is_leaf(&self, x: CellId) -> bool {
        self.leaves.contains(&x)
    }

    pub fn is_root(&self, x: CellId) -> bool {
        self.roots.contains(&x)
    }

    /// The unique root object, when the marks are a singleton.
    pub fn root_object(&self) -> Option<CellId> {
        let set: BTreeSet<CellId> = self.roots.iter().copied().collect();
        if set.len() == 1 {
            Some(*set.iter().next().unwrap())
        } else {
            None
        }
    }
}

/// Keep cells of degree < n with all arrows and diamonds among them. Cell
/// names are preserved.
pub fn restrict_below(g: &OpetopicGraph, n: u32) -> OpetopicGraph {
    let keep: Vec<bool> = g.cell_ids().map(|c| g.degree(c) < n).collect();
    subgraph(g, &keep)
}

fn subgraph(g: &OpetopicGraph, keep: &[bool]) -> OpetopicGraph {
    let mut cell_map: Vec<Option<CellId>> = vec![None; g.cell_count()];
    let mut cells = Vec::new();
    for c in g.cell_ids() {
        if keep[c.0 as usize] {
            cell_map[c.0 as usize] = Some(CellId(cells.len() as u32));
            cells.push(g.cell(c).clone());
        }
    }
    let mut arrow_map: Vec<Option<ArrowId>> = vec![None; g.arrow_count()];
    let mut arrows = Vec::new();
    for a in g.arrow_ids() {
        let ar = g.arrow(a);
        if let (Some(d), Some(c)) = (cell_map[ar.dom.0 as usize], cell_map[ar.cod.0 as usize]) {
            arrow_map[a.0 as usize] = Some(ArrowId(arrows.len() as u32));
            arrows.push(GenArrow {
                name: ar.name.clone(),
                dom: d,
                cod: c,
                polarity: ar.polarity,
            });
        }
    }
    let diamonds = g
        .diamonds()
        .iter()
        .filter_map(|d| {
            Some(Diamond {
                het_outer: arrow_map[d.het_outer.0 as usize]?,
                het_inner: arrow_map[d.het_inner.0 as usize]?,
                hom_outer: arrow_map[d.hom_outer.0 as usize]?,
                hom_inner: arrow_map[d.hom_inner.0 as usize]?,
            })
        })
        .collect();
    OpetopicGraph::from_parts(cells, arrows, diamonds).expect("subgraph keeps names unique")
}

/// Cells of degree exactly n.
pub fn fiber(g: &OpetopicGraph, n: u32) -> Vec<CellId> {
    g.cells_of_degree(n)
}

/// The slice at `x`: objects are the normal forms into `x` (the identity
/// included), a one-step arrow `nf1 -> nf2` is a generator `e` with
/// `compose(e, nf2) = nf1`, and polarities and diamonds are inherited.
/// Returns the slice together with the projection onto `g`.
pub fn slice(g: &OpetopicGraph, x: CellId) -> Result<(OpetopicGraph, Morphism)> {
    let mut nfs: Vec<NormalForm> = Vec::new();
    for y in g.cell_ids() {
        if g.degree(y) <= g.degree(x) {
            nfs.extend(hom(g, y, x)?);
        }
    }
    nfs.sort_by(|a, b| (g.degree(a.dom), a).cmp(&(g.degree(b.dom), b)));
    let index_of = |nf: &NormalForm| -> usize {
        nfs.binary_search_by(|m| (g.degree(m.dom), m).cmp(&(g.degree(nf.dom), nf)))
            .expect("normal form not in slice")
    };

    let cells: Vec<Cell> = nfs
        .iter()
        .map(|nf| Cell {
            name: nf.render(g),
            degree: g.degree(nf.dom),
        })
        .collect();

    let mut arrows = Vec::new();
    let mut arrow_proj = Vec::new();
    // (slice dom, slice cod, generator) -> slice arrow, for diamond lookups.
    let mut arrow_index: BTreeMap<(usize, usize, ArrowId), ArrowId> = BTreeMap::new();
    for (j, nf) in nfs.iter().enumerate() {
        for e in g.arrows_into(nf.dom) {
            let pre = precompose_arrow(g, *e, nf)?;
            let i = index_of(&pre);
            let id = ArrowId(arrows.len() as u32);
            arrows.push(GenArrow {
                name: format!("{}@{}", g.arrow(*e).name, cells[j].name),
                dom: CellId(i as u32),
                cod: CellId(j as u32),
                polarity: g.arrow(*e).polarity,
            });
            arrow_proj.push(*e);
            arrow_index.insert((i, j, *e), id);
        }
    }

    let mut diamonds = Vec::new();
    for (j, nf) in nfs.iter().enumerate() {
        for d in g.diamonds() {
            if !g.diamond_is_well_formed(d) || g.arrow(d.het_outer).cod != nf.dom {
                continue;
            }
            let het_mid = index_of(&precompose_arrow(g, d.het_outer, nf)?);
            let hom_mid = index_of(&precompose_arrow(g, d.hom_outer, nf)?);
            let low = index_of(&precompose_arrow(g, d.het_inner, &nfs[het_mid])?);
            let lookup = |key: (usize, usize, ArrowId)| {
                arrow_index.get(&key).copied().ok_or_else(|| {
                    Error::Precondition(
                        "slice diamond does not close; the input violates the axioms".into(),
                    )
                })
            };
            diamonds.push(Diamond {
                het_outer: lookup((het_mid, j, d.het_outer))?,
                het_inner: lookup((low, het_mid, d.het_inner))?,
                hom_outer: lookup((hom_mid, j, d.hom_outer))?,
                hom_inner: lookup((low, hom_mid, d.hom_inner))?,
            });
        }
    }

    let sl = OpetopicGraph::from_parts(cells, arrows, diamonds)?;
    let proj = Morphism {
        source: sl.clone(),
        target: g.clone(),
        cell_map: nfs.iter().map(|nf| nf.dom).collect(),
        arrow_map: arrow_proj,
    };
    Ok((sl, proj))
}

/// The boundary of an opetope: everything below the top cell, each
/// codimension-1 cell marked by the polarity of its generator into the top.
pub fn boundary(g: &OpetopicGraph) -> Result<Boundary> {
    let top = is_opetope(g).ok_or_else(|| {
        Error::Precondition("boundary requires an opetope (no terminal cell found)".into())
    })?;
    let n = g.degree(top);
    let graph = restrict_below(g, n);
    let mut marking = BTreeMap::new();
    if n >= 1 {
        for z in g.cells_of_degree(n - 1) {
            let gens: Vec<ArrowId> = g
                .arrows_into(top)
                .iter()
                .copied()
                .filter(|a| g.arrow(*a).dom == z)
                .collect();
            if gens.len() != 1 {
                return Err(Error::Precondition(format!(
                    "cell {} has {} generators into the top cell",
                    g.cell_name(z),
                    gens.len()
                )));
            }
            let marked = graph
                .cell_by_name(g.cell_name(z))
                .expect("restriction keeps names");
            marking.insert(marked, g.arrow(gens[0]).polarity);
        }
    }
    Ok(Boundary { graph, n, marking })
}

fn fresh_name(taken: &mut BTreeSet<String>, base: &str) -> String {
    let mut name = base.to_string();
    while !taken.insert(name.clone()) {
        name.push('\'');
    }
    name
}

/// Freely adjoin a terminal cell to a boundary: one generator per marked
/// cell, with the forced diamond matching into the new top. Returns the
/// filled graph and the id of the new top cell; the boundary's cells keep
/// their ids and names.
pub fn fill(b: &Boundary) -> Result<(OpetopicGraph, CellId)> {
    let g = &b.graph;
    let n = b.n;
    let (mut cells, mut arrows, mut diamonds) = g.parts();
    let mut taken: BTreeSet<String> = cells.iter().map(|c| c.name.clone()).collect();
    let top_name = fresh_name(&mut taken, "top");
    let top = CellId(cells.len() as u32);
    cells.push(Cell {
        name: top_name,
        degree: n,
    });

    let mut arrow_taken: BTreeSet<String> = arrows.iter().map(|a| a.name.clone()).collect();
    let mut gen_into_top: BTreeMap<CellId, ArrowId> = BTreeMap::new();
    if n >= 1 {
        for z in g.cells_of_degree(n - 1) {
            let pol = *b.marking.get(&z).ok_or_else(|| {
                Error::Precondition(format!("cell {} is unmarked", g.cell_name(z)))
            })?;
            let id = ArrowId(arrows.len() as u32);
            arrows.push(GenArrow {
                name: fresh_name(&mut arrow_taken, &format!("m_{}", g.cell_name(z))),
                dom: z,
                cod: top,
                polarity: pol,
            });
            gen_into_top.insert(z, id);
        }
    }

    // Forced matching: each degree-(n-2) cell contributes exactly one
    // heterogeneous and one homogeneous pair into the top.
    if n >= 2 {
        for y in g.cells_of_degree(n - 2) {
            let mut homs = Vec::new();
            let mut hets = Vec::new();
            for e in g.arrows_from(y) {
                let z = g.arrow(*e).cod;
                let Some(mark) = b.marking.get(&z) else { continue };
                let outer = gen_into_top[&z];
                if *mark == g.arrow(*e).polarity {
                    homs.push((outer, *e));
                } else {
                    hets.push((outer, *e));
                }
            }
            if homs.len() != 1 || hets.len() != 1 {
                return Err(Error::MatchingFailure {
                    cell: g.cell_name(y).to_string(),
                    detail: format!(
                        "{} homogeneous and {} heterogeneous pairs into the top",
                        homs.len(),
                        hets.len()
                    ),
                });
            }
            diamonds.push(Diamond {
                het_outer: hets[0].0,
                het_inner: hets[0].1,
                hom_outer: homs[0].0,
                hom_inner: homs[0].1,
            });
        }
    }

    let filled = OpetopicGraph::from_parts(cells, arrows, diamonds)?;
    Ok((filled, top))
}

/// Drop the Target-marked cells of a boundary and remark what remains as a
/// pasting diagram: a degree-(n-2) cell is a leaf once per source arrow into
/// a dropped target cell and a root once per target arrow into one.
pub fn source_horn(b: &Boundary) -> Result<PastingDiagram> {
    if b.n == 0 {
        return Err(Error::Precondition("source horn needs degree >= 1".into()));
    }
    let g = &b.graph;
    let n = b.n;
    let dropped: BTreeSet<CellId> = b
        .marking
        .iter()
        .filter(|(_, p)| **p == Polarity::Target)
        .map(|(c, _)| *c)
        .collect();

    let keep: Vec<bool> = g
        .cell_ids()
        .map(|c| g.degree(c) < n - 1 || (g.degree(c) == n - 1 && !dropped.contains(&c)))
        .collect();
    let graph = subgraph(g, &keep);

    let mut leaves = Vec::new();
    let mut roots = Vec::new();
    for a in g.arrow_ids() {
        let ar = g.arrow(a);
        if dropped.contains(&ar.cod) {
            if let Some(x) = graph.cell_by_name(g.cell_name(ar.dom)) {
                match ar.polarity {
                    Polarity::Source => leaves.push(x),
                    Polarity::Target => roots.push(x),
                }
            }
        }
    }
    leaves.sort();
    roots.sort();
    Ok(PastingDiagram {
        graph,
        n: n - 1,
        leaves,
        roots,
    })
}

/// The boundary of a pasting diagram: top cells are dropped and each
/// degree-(n-1) cell is replaced by one copy per leaf/root mark (so a cell
/// marked both ways is doubled). Returns the boundary together with the map
/// from its cells and arrows back to the diagram.
pub fn boundary_of_pd(p: &PastingDiagram) -> (Boundary, Morphism) {
    let g = &p.graph;
    let n = p.n;
    let mut cells = Vec::new();
    let mut marking = BTreeMap::new();
    let mut cell_back = Vec::new();
    let mut copies: BTreeMap<CellId, Vec<CellId>> = BTreeMap::new();
    let mut taken = BTreeSet::new();
    for c in g.cell_ids() {
        let deg = g.degree(c);
        if deg >= n {
            continue;
        }
        if deg + 1 == n {
            let leaf_marks = p.leaves.iter().filter(|x| **x == c).count();
            let root_marks = p.roots.iter().filter(|x| **x == c).count();
            let single = leaf_marks + root_marks == 1;
            for (count, pol, tag) in [
                (leaf_marks, Polarity::Source, "s"),
                (root_marks, Polarity::Target, "t"),
            ] {
                for k in 0..count {
                    let id = CellId(cells.len() as u32);
                    let base = if single {
                        g.cell_name(c).to_string()
                    } else if k == 0 {
                        format!("{}_{tag}", g.cell_name(c))
                    } else {
                        format!("{}_{tag}{k}", g.cell_name(c))
                    };
                    cells.push(Cell {
                        name: fresh_name(&mut taken, &base),
                        degree: deg,
                    });
                    marking.insert(id, pol);
                    cell_back.push(c);
                    copies.entry(c).or_default().push(id);
                }
            }
        } else {
            let id = CellId(cells.len() as u32);
            cells.push(Cell {
                name: fresh_name(&mut taken, g.cell_name(c)),
                degree: deg,
            });
            cell_back.push(c);
            copies.entry(c).or_default().push(id);
        }
    }

    let mut arrows = Vec::new();
    let mut arrow_back = Vec::new();
    let mut arrow_taken = BTreeSet::new();
    // (original arrow, copy of its codomain) -> new arrow
    let mut arrow_copies: BTreeMap<(ArrowId, CellId), ArrowId> = BTreeMap::new();
    for a in g.arrow_ids() {
        let ar = g.arrow(a);
        let (Some(doms), Some(cods)) = (copies.get(&ar.dom), copies.get(&ar.cod)) else {
            continue;
        };
        for cod in cods {
            let id = ArrowId(arrows.len() as u32);
            arrows.push(GenArrow {
                name: fresh_name(
                    &mut arrow_taken,
                    &format!("{}@{}", ar.name, cells[cod.0 as usize].name),
                ),
                dom: doms[0],
                cod: *cod,
                polarity: ar.polarity,
            });
            arrow_back.push(a);
            arrow_copies.insert((a, *cod), id);
        }
    }

    let mut diamonds = Vec::new();
    for d in g.diamonds() {
        let cod = g.arrow(d.het_outer).cod;
        let Some(cods) = copies.get(&cod) else { continue };
        for c in cods {
            let het_mid = copies.get(&g.arrow(d.het_inner).cod).map(|v| v[0]);
            let hom_mid = copies.get(&g.arrow(d.hom_inner).cod).map(|v| v[0]);
            let (Some(het_mid), Some(hom_mid)) = (het_mid, hom_mid) else { continue };
            let (Some(ho), Some(hi), Some(mo), Some(mi)) = (
                arrow_copies.get(&(d.het_outer, *c)).copied(),
                arrow_copies.get(&(d.het_inner, het_mid)).copied(),
                arrow_copies.get(&(d.hom_outer, *c)).copied(),
                arrow_copies.get(&(d.hom_inner, hom_mid)).copied(),
            ) else {
                continue;
            };
            diamonds.push(Diamond {
                het_outer: ho,
                het_inner: hi,
                hom_outer: mo,
                hom_inner: mi,
            });
        }
    }

    let graph = OpetopicGraph::from_parts(cells, arrows, diamonds)
        .expect("boundary copies have fresh names");
    let back = Morphism {
        source: graph.clone(),
        target: g.clone(),
        cell_map: cell_back,
        arrow_map: arrow_back,
    };
    (Boundary { graph, n, marking }, back)
}

/// The source horn of a pasting diagram (the horn of its boundary).
pub fn source_horn_of_pd(p: &PastingDiagram) -> Result<PastingDiagram> {
    Ok(source_horn_of_pd_mapped(p)?.0)
}

/// As `source_horn_of_pd`, also returning the map from horn cells back to
/// diagram cells (through the boundary copies).
pub fn source_horn_of_pd_mapped(
    p: &PastingDiagram,
) -> Result<(PastingDiagram, BTreeMap<CellId, CellId>)> {
    let (b, back) = boundary_of_pd(p);
    let horn = source_horn(&b)?;
    let mut map = BTreeMap::new();
    for c in horn.graph.cell_ids() {
        let in_bd = b
            .graph
            .cell_by_name(horn.graph.cell_name(c))
            .expect("horn cells keep boundary names");
        map.insert(c, back.apply(in_bd));
    }
    Ok((horn, map))
}

/// Slice at the unique root object, canonically relabeled. Returns the
/// opetope and its projection into the diagram.
pub fn pd_target(p: &PastingDiagram) -> Result<(OpetopicGraph, Morphism)> {
    let r = p
        .root_object()
        .ok_or_else(|| Error::Precondition("pasting diagram has no unique root object".into()))?;
    let (sl, proj) = slice(&p.graph, r)?;
    let (relabeled, cmap, amap) = canonical_relabel(&sl);
    Ok((relabeled.clone(), relabel_then(&relabeled, &cmap, &amap, &proj)))
}

/// Projection of a relabeled graph through the original projection.
pub(crate) fn relabel_then(
    relabeled: &OpetopicGraph,
    cmap: &[CellId],
    amap: &[ArrowId],
    proj: &Morphism,
) -> Morphism {
    let mut cell_map = vec![CellId(0); relabeled.cell_count()];
    for (old, new) in cmap.iter().enumerate() {
        cell_map[new.0 as usize] = proj.cell_map[old];
    }
    let mut arrow_map = vec![ArrowId(0); relabeled.arrow_count()];
    for (old, new) in amap.iter().enumerate() {
        arrow_map[new.0 as usize] = proj.arrow_map[old];
    }
    Morphism {
        source: relabeled.clone(),
        target: proj.target.clone(),
        cell_map,
        arrow_map,
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins, keeping class representatives deterministic.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// A pushout of opetopic sets along a span, with its two injections.
#[derive(Clone, Debug)]
pub struct PushoutResult {
    pub graph: OpetopicGraph,
    /// Injection of the left leg's target.
    pub left: Morphism,
    /// Injection of the right leg's target.
    pub right: Morphism,
}

/// Compute the pushout of `f: C -> A` and `g: C -> B` degreewise by
/// union-find, and verify that each degree fiber is the set-level pushout of
/// the corresponding fibers.
pub fn pushout(f: &Morphism, g: &Morphism) -> Result<PushoutResult> {
    if f.source != g.source {
        return Err(Error::IllformedSpan {
            detail: "span legs have different apexes".into(),
        });
    }
    for (leg, name) in [(f, "left"), (g, "right")] {
        let report = validate_morphism(leg);
        if !report.is_empty() {
            return Err(Error::IllformedSpan {
                detail: format!("{name} leg invalid: {}", report.join("; ")),
            });
        }
    }
    let a = &f.target;
    let b = &g.target;
    let c = &f.source;

    let nc = a.cell_count() + b.cell_count();
    let bcell = |x: CellId| a.cell_count() + x.0 as usize;
    let mut uf = UnionFind::new(nc);
    for x in c.cell_ids() {
        uf.union(f.apply(x).0 as usize, bcell(g.apply(x)));
    }
    let mut class_of = vec![usize::MAX; nc];
    let mut cells = Vec::new();
    let mut taken = BTreeSet::new();
    for i in 0..nc {
        let r = uf.find(i);
        if class_of[r] == usize::MAX {
            let (name, degree) = if r < a.cell_count() {
                (a.cell_name(CellId(r as u32)), a.degree(CellId(r as u32)))
            } else {
                let id = CellId((r - a.cell_count()) as u32);
                (b.cell_name(id), b.degree(id))
            };
            class_of[r] = cells.len();
            cells.push(Cell {
                name: fresh_name(&mut taken, name),
                degree,
            });
        }
        class_of[i] = class_of[r];
    }

    let na = a.arrow_count() + b.arrow_count();
    let barrow = |x: ArrowId| a.arrow_count() + x.0 as usize;
    let mut auf = UnionFind::new(na);
    for h in c.arrow_ids() {
        auf.union(f.apply_arrow(h).0 as usize, barrow(g.apply_arrow(h)));
    }
    let mut aclass_of = vec![usize::MAX; na];
    let mut arrows = Vec::new();
    let mut arrow_taken = BTreeSet::new();
    for i in 0..na {
        let r = auf.find(i);
        if aclass_of[r] == usize::MAX {
            let (ar, dom, cod) = if r < a.arrow_count() {
                let ar = a.arrow(ArrowId(r as u32));
                (
                    ar,
                    class_of[ar.dom.0 as usize],
                    class_of[ar.cod.0 as usize],
                )
            } else {
                let ar = b.arrow(ArrowId((r - a.arrow_count()) as u32));
                (ar, class_of[bcell(ar.dom)], class_of[bcell(ar.cod)])
            };
            aclass_of[r] = arrows.len();
            arrows.push(GenArrow {
                name: fresh_name(&mut arrow_taken, &ar.name),
                dom: CellId(dom as u32),
                cod: CellId(cod as u32),
                polarity: ar.polarity,
            });
        }
        aclass_of[i] = aclass_of[r];
    }

    let mut diamonds: BTreeSet<Diamond> = BTreeSet::new();
    for d in a.diamonds() {
        diamonds.insert(Diamond {
            het_outer: ArrowId(aclass_of[d.het_outer.0 as usize] as u32),
            het_inner: ArrowId(aclass_of[d.het_inner.0 as usize] as u32),
            hom_outer: ArrowId(aclass_of[d.hom_outer.0 as usize] as u32),
            hom_inner: ArrowId(aclass_of[d.hom_inner.0 as usize] as u32),
        });
    }
    for d in b.diamonds() {
        diamonds.insert(Diamond {
            het_outer: ArrowId(aclass_of[barrow(d.het_outer)] as u32),
            het_inner: ArrowId(aclass_of[barrow(d.het_inner)] as u32),
            hom_outer: ArrowId(aclass_of[barrow(d.hom_outer)] as u32),
            hom_inner: ArrowId(aclass_of[barrow(d.hom_inner)] as u32),
        });
    }

    let graph = OpetopicGraph::from_parts(cells, arrows, diamonds.into_iter().collect())?;
    let left = Morphism {
        source: a.clone(),
        target: graph.clone(),
        cell_map: a
            .cell_ids()
            .map(|x| CellId(class_of[x.0 as usize] as u32))
            .collect(),
        arrow_map: a
            .arrow_ids()
            .map(|x| ArrowId(aclass_of[x.0 as usize] as u32))
            .collect(),
    };
    let right = Morphism {
        source: b.clone(),
        target: graph.clone(),
        cell_map: b
            .cell_ids()
            .map(|x| CellId(class_of[bcell(x)] as u32))
            .collect(),
        arrow_map: b
            .arrow_ids()
            .map(|x| ArrowId(aclass_of[barrow(x)] as u32))
            .collect(),
    };

    // Degreewise law: each fiber of the result is the set pushout of the
    // fibers, i.e. the class partition restricted to one degree.
    let max_deg = graph.max_degree().unwrap_or(0);
    for m in 0..=max_deg {
        let mut expected: BTreeSet<usize> = BTreeSet::new();
        for x in a.cells_of_degree(m) {
            expected.insert(class_of[x.0 as usize]);
        }
        for x in b.cells_of_degree(m) {
            expected.insert(class_of[bcell(x)]);
        }
        let got: BTreeSet<usize> = graph
            .cells_of_degree(m)
            .iter()
            .map(|c| c.0 as usize)
            .collect();
        if expected != got {
            return Err(Error::IllformedSpan {
                detail: format!("degree {m} fiber is not a set pushout"),
            });
        }
    }

    debug_assert!(validate_morphism(&left).is_empty());
    debug_assert!(validate_morphism(&right).is_empty());
    Ok(PushoutResult { graph, left, right })
}

/// The opetope of degree n+1 determined by an n-pasting diagram.
#[derive(Clone, Debug)]
pub struct OpetopeOfPd {
    pub graph: OpetopicGraph,
    pub top: CellId,
    pub target_cell: CellId,
    /// The diagram embedded in the result.
    pub pd_injection: Morphism,
}

/// Fill the diagram's boundary to get the target opetope, glue it to the
/// diagram along the shared boundary, mark the diagram's top cells as
/// sources and the new target on the other side, and fill.
pub fn opetope_of_pd(p: &PastingDiagram) -> Result<OpetopeOfPd> {
    let (bd, back) = boundary_of_pd(p);
    let (t_graph, t_top) = fill(&bd)?;

    // The boundary graph is a prefix of the filled graph.
    let leg_t = Morphism {
        source: bd.graph.clone(),
        target: t_graph.clone(),
        cell_map: bd.graph.cell_ids().collect(),
        arrow_map: bd.graph.arrow_ids().collect(),
    };
    let po = pushout(&leg_t, &back)?;

    let mut marking = BTreeMap::new();
    for x in p.top_cells() {
        marking.insert(po.right.apply(x), Polarity::Source);
    }
    marking.insert(po.left.apply(t_top), Polarity::Target);
    let b2 = Boundary {
        graph: po.graph.clone(),
        n: p.n + 1,
        marking,
    };
    let (filled, w) = fill(&b2)?;

    let (final_graph, cmap, amap) = canonical_relabel(&filled);
    // The pushout's cells are a prefix of the filled graph, so the pushout
    // injections compose directly with the relabeling.
    let pd_injection = Morphism {
        source: p.graph.clone(),
        target: final_graph.clone(),
        cell_map: po
            .right
            .cell_map
            .iter()
            .map(|c| cmap[c.0 as usize])
            .collect(),
        arrow_map: po
            .right
            .arrow_map
            .iter()
            .map(|a| amap[a.0 as usize])
            .collect(),
    };
    Ok(OpetopeOfPd {
        graph: final_graph,
        top: cmap[w.0 as usize],
        target_cell: cmap[po.left.apply(t_top).0 as usize],
        pd_injection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::check_opetopic;
    use crate::fixtures;
    use crate::graph::find_isomorphism;

    #[test]
    fn restrict_tri2_below_two_has_six_cells() {
        let g = fixtures::tri(2);
        let r = restrict_below(&g, 2);
        assert_eq!(r.cell_count(), 6);
        assert_eq!(r.diamonds().len(), 0);
        assert!(r.well_formed().is_empty());
    }

    #[test]
    fn restrict_below_zero_is_empty() {
        let g = fixtures::tri(2);
        assert_eq!(restrict_below(&g, 0).cell_count(), 0);
    }

    #[test]
    fn fiber_of_tri2_at_one_is_the_edges() {
        let g = fixtures::tri(2);
        let names: Vec<&str> = fiber(&g, 1).iter().map(|c| g.cell_name(*c)).collect();
        assert_eq!(names, vec!["a1", "a2", "b"]);
    }

    #[test]
    fn slice_at_terminal_reproduces_tri2() {
        let g = fixtures::tri(2);
        let c = g.cell_by_name("c").unwrap();
        let (sl, proj) = slice(&g, c).unwrap();
        assert!(validate_morphism(&proj).is_empty());
        assert!(find_isomorphism(&sl, &g).unwrap().is_some());
    }

    #[test]
    fn slice_at_edge_is_the_arrow() {
        let g = fixtures::tri(2);
        let a1 = g.cell_by_name("a1").unwrap();
        let (sl, _) = slice(&g, a1).unwrap();
        assert!(find_isomorphism(&sl, &fixtures::arr()).unwrap().is_some());
    }

    #[test]
    fn slice_at_a_loop_edge_is_still_the_arrow() {
        // Both endpoints of the loop's edge are the same point, but the two
        // arrows into it stay distinct in the slice.
        let g = fixtures::loop_();
        let b = g.cell_by_name("b").unwrap();
        let (sl, _) = slice(&g, b).unwrap();
        assert!(find_isomorphism(&sl, &fixtures::arr()).unwrap().is_some());
    }

    #[test]
    fn slice_of_op3_at_source_face_is_tri2() {
        let g = fixtures::op3();
        let n = g.cell_by_name("n").unwrap();
        let (sl, _) = slice(&g, n).unwrap();
        assert!(find_isomorphism(&sl, &fixtures::tri(2)).unwrap().is_some());
    }

    #[test]
    fn boundary_of_arr_marks_its_ends() {
        let g = fixtures::arr();
        let b = boundary(&g).unwrap();
        assert_eq!(b.n, 1);
        assert_eq!(b.graph.cell_count(), 2);
        let s = b.graph.cell_by_name("s").unwrap();
        let t = b.graph.cell_by_name("t").unwrap();
        assert_eq!(b.marking[&s], Polarity::Source);
        assert_eq!(b.marking[&t], Polarity::Target);
    }

    #[test]
    fn boundary_of_pt_is_empty() {
        let b = boundary(&fixtures::pt()).unwrap();
        assert_eq!(b.n, 0);
        assert_eq!(b.graph.cell_count(), 0);
    }

    #[test]
    fn boundary_inclusion_is_a_valid_morphism() {
        let g = fixtures::tri(2);
        let b = boundary(&g).unwrap();
        let incl = Morphism {
            source: b.graph.clone(),
            target: g.clone(),
            cell_map: b
                .graph
                .cell_ids()
                .map(|c| g.cell_by_name(b.graph.cell_name(c)).unwrap())
                .collect(),
            arrow_map: b
                .graph
                .arrow_ids()
                .map(|a| g.arrow_by_name(&b.graph.arrow(a).name).unwrap())
                .collect(),
        };
        assert!(validate_morphism(&incl).is_empty());
    }

    #[test]
    fn fill_of_tri2_boundary_is_tri2() {
        let g = fixtures::tri(2);
        let b = boundary(&g).unwrap();
        let (filled, top) = fill(&b).unwrap();
        assert_eq!(filled.degree(top), 2);
        assert!(find_isomorphism(&filled, &g).unwrap().is_some());
    }

    #[test]
    fn fill_of_loop_boundary_regenerates_the_degen_diamond() {
        let g = fixtures::loop_();
        let b = boundary(&g).unwrap();
        let (filled, _) = fill(&b).unwrap();
        assert_eq!(filled.diamonds().len(), 1);
        assert!(find_isomorphism(&filled, &g).unwrap().is_some());
        assert!(check_opetopic(&filled).all_pass());
    }

    #[test]
    fn fill_of_empty_boundary_is_the_point() {
        let b = Boundary {
            graph: OpetopicGraph::from_parts(vec![], vec![], vec![]).unwrap(),
            n: 0,
            marking: BTreeMap::new(),
        };
        let (filled, _) = fill(&b).unwrap();
        assert!(find_isomorphism(&filled, &fixtures::pt()).unwrap().is_some());
    }

    #[test]
    fn horn_of_tri2_is_the_two_chain() {
        let g = fixtures::tri(2);
        let h = source_horn(&boundary(&g).unwrap()).unwrap();
        assert_eq!(h.n, 1);
        assert_eq!(h.graph.cell_count(), 5); // p0 p1 p2 a1 a2
        let p0 = h.graph.cell_by_name("p0").unwrap();
        let p2 = h.graph.cell_by_name("p2").unwrap();
        assert_eq!(h.leaves, vec![p0]);
        assert_eq!(h.roots, vec![p2]);
    }

    #[test]
    fn horn_of_arr_is_the_point_diagram() {
        let g = fixtures::arr();
        let h = source_horn(&boundary(&g).unwrap()).unwrap();
        assert_eq!(h.n, 0);
        assert_eq!(h.graph.cell_count(), 1);
    }

    #[test]
    fn horn_of_loop_is_the_degenerate_point_diagram() {
        let g = fixtures::loop_();
        let h = source_horn(&boundary(&g).unwrap()).unwrap();
        assert_eq!(h.n, 1);
        assert_eq!(h.graph.cell_count(), 1);
        assert_eq!(h.leaves.len(), 1);
        assert_eq!(h.roots.len(), 1);
        assert_eq!(h.leaves, h.roots);
    }

    #[test]
    fn pushout_over_empty_apex_is_disjoint_union() {
        let a = fixtures::arr();
        let empty = OpetopicGraph::from_parts(vec![], vec![], vec![]).unwrap();
        let leg = |t: &OpetopicGraph| Morphism {
            source: empty.clone(),
            target: t.clone(),
            cell_map: vec![],
            arrow_map: vec![],
        };
        let po = pushout(&leg(&a), &leg(&a)).unwrap();
        assert_eq!(po.graph.cell_count(), 6);
        assert_eq!(po.graph.cells_of_degree(0).len(), 4);
        assert_eq!(po.graph.cells_of_degree(1).len(), 2);
    }

    #[test]
    fn pushout_along_identity_leg_is_the_other_object() {
        let a = fixtures::tri(2);
        let id = Morphism::identity(&a);
        let po = pushout(&id, &id).unwrap();
        assert!(find_isomorphism(&po.graph, &a).unwrap().is_some());
    }

    #[test]
    fn opetope_of_one_node_diagram_is_op3() {
        let g = fixtures::tri(2);
        let pd = crate::calculus::shift(&g).unwrap();
        let res = opetope_of_pd(&pd).unwrap();
        assert!(check_opetopic(&res.graph).all_pass());
        assert_eq!(res.graph.cells_of_degree(2).len(), 2);
        assert_eq!(res.graph.cells_of_degree(3).len(), 1);
        assert!(find_isomorphism(&res.graph, &fixtures::op3())
            .unwrap()
            .is_some());
        assert!(validate_morphism(&res.pd_injection).is_empty());
    }
}

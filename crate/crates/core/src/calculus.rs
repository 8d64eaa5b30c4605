//! Substitution and grafting of pasting diagrams, with their units.
//!
//! Substitution replaces the top cells of a diagram by diagrams with
//! matching boundaries; grafting attaches diagrams at the leaves, glued
//! along their targets. Both are computed as one multi-way pushout by
//! union-find over the disjoint union of the base and the parts. The
//! identifications themselves are recovered from rigidity: between the
//! glued interfaces there is exactly one decorated isomorphism.

use std::collections::{BTreeMap, BTreeSet};

use crate::axioms::is_opetope;
use crate::construct::{
    boundary, boundary_of_pd, pd_target, slice, Boundary, PastingDiagram,
};
use crate::graph::{
    find_decorated_isomorphism, find_isomorphism, ArrowId, Cell, CellId, Diamond, GenArrow,
    Morphism, OpetopicGraph, Polarity,
};
use crate::{Error, Result};

/// The unit pasting diagram for substitution: the opetope itself, with the
/// leaves and the root read off the arrows into its top cell.
pub fn shift(x: &OpetopicGraph) -> Result<PastingDiagram> {
    let top = is_opetope(x)
        .ok_or_else(|| Error::Precondition("shift requires an opetope".into()))?;
    let n = x.degree(top);
    let mut leaves = Vec::new();
    let mut roots = Vec::new();
    if n >= 1 {
        for a in x.arrows_into(top) {
            match x.arrow(*a).polarity {
                Polarity::Source => leaves.push(x.arrow(*a).dom),
                Polarity::Target => roots.push(x.arrow(*a).dom),
            }
        }
    }
    leaves.sort();
    roots.sort();
    Ok(PastingDiagram {
        graph: x.clone(),
        n,
        leaves,
        roots,
    })
}

/// The unit pasting diagram for grafting: the opetope one degree up, with
/// an empty top fiber and its terminal cell marked both leaf and root.
pub fn degen(x: &OpetopicGraph) -> Result<PastingDiagram> {
    let top = is_opetope(x)
        .ok_or_else(|| Error::Precondition("degen requires an opetope".into()))?;
    let n = x.degree(top);
    Ok(PastingDiagram {
        graph: x.clone(),
        n: n + 1,
        leaves: vec![top],
        roots: vec![top],
    })
}

/// Cell/arrow maps out of an apex graph, by index.
struct RawMap {
    cells: Vec<CellId>,
    arrows: Vec<ArrowId>,
}

/// One gluing instruction: identify the apex's image in the base with its
/// image in part `part`.
struct Span {
    apex: OpetopicGraph,
    into_base: RawMap,
    part: usize,
    into_part: RawMap,
}

struct Glued {
    graph: OpetopicGraph,
    base_cells: Vec<CellId>,
    base_arrows: Vec<ArrowId>,
    part_cells: Vec<Vec<CellId>>,
    part_arrows: Vec<Vec<ArrowId>>,
}

fn fresh_name(taken: &mut BTreeSet<String>, base: &str) -> String {
    let mut name = base.to_string();
    while !taken.insert(name.clone()) {
        name.push('\'');
    }
    name
}

/// Union-find gluing of several parts onto a base along spans.
fn multi_pushout(base: &OpetopicGraph, parts: &[&OpetopicGraph], spans: &[Span]) -> Result<Glued> {
    let mut cell_offsets = vec![base.cell_count()];
    let mut arrow_offsets = vec![base.arrow_count()];
    for p in parts {
        cell_offsets.push(cell_offsets.last().unwrap() + p.cell_count());
        arrow_offsets.push(arrow_offsets.last().unwrap() + p.arrow_count());
    }
    let ncells = *cell_offsets.last().unwrap();
    let narrows = *arrow_offsets.last().unwrap();

    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    fn union(parent: &mut Vec<usize>, a: usize, b: usize) {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent[hi] = lo;
        }
    }

    let mut cuf: Vec<usize> = (0..ncells).collect();
    let mut auf: Vec<usize> = (0..narrows).collect();
    for s in spans {
        let co = cell_offsets[s.part];
        let ao = arrow_offsets[s.part];
        for c in s.apex.cell_ids() {
            union(
                &mut cuf,
                s.into_base.cells[c.0 as usize].0 as usize,
                co + s.into_part.cells[c.0 as usize].0 as usize,
            );
        }
        for a in s.apex.arrow_ids() {
            union(
                &mut auf,
                s.into_base.arrows[a.0 as usize].0 as usize,
                ao + s.into_part.arrows[a.0 as usize].0 as usize,
            );
        }
    }

    let global_cell = |i: usize| -> (&OpetopicGraph, CellId) {
        if i < base.cell_count() {
            (base, CellId(i as u32))
        } else {
            let k = cell_offsets[1..].partition_point(|o| *o <= i);
            (parts[k], CellId((i - cell_offsets[k]) as u32))
        }
    };
    let global_arrow = |i: usize| -> (&OpetopicGraph, ArrowId, usize) {
        if i < base.arrow_count() {
            (base, ArrowId(i as u32), 0)
        } else {
            let k = arrow_offsets[1..].partition_point(|o| *o <= i);
            (parts[k], ArrowId((i - arrow_offsets[k]) as u32), k + 1)
        }
    };

    let mut cell_class = vec![usize::MAX; ncells];
    let mut cells = Vec::new();
    let mut taken = BTreeSet::new();
    for i in 0..ncells {
        let r = find(&mut cuf, i);
        if cell_class[r] == usize::MAX {
            let (g, id) = global_cell(r);
            cell_class[r] = cells.len();
            cells.push(Cell {
                name: fresh_name(&mut taken, g.cell_name(id)),
                degree: g.degree(id),
            });
        }
        cell_class[i] = cell_class[r];
    }

    let mut arrow_class = vec![usize::MAX; narrows];
    let mut arrows = Vec::new();
    let mut arrow_taken = BTreeSet::new();
    for i in 0..narrows {
        let r = find(&mut auf, i);
        if arrow_class[r] == usize::MAX {
            let (g, id, gi) = global_arrow(r);
            let ar = g.arrow(id);
            let dom = if gi == 0 {
                ar.dom.0 as usize
            } else {
                cell_offsets[gi - 1] + ar.dom.0 as usize
            };
            let cod = if gi == 0 {
                ar.cod.0 as usize
            } else {
                cell_offsets[gi - 1] + ar.cod.0 as usize
            };
            arrow_class[r] = arrows.len();
            arrows.push(GenArrow {
                name: fresh_name(&mut arrow_taken, &ar.name),
                dom: CellId(cell_class[dom] as u32),
                cod: CellId(cell_class[cod] as u32),
                polarity: ar.polarity,
            });
        }
        arrow_class[i] = arrow_class[r];
    }

    let mut diamonds: BTreeSet<Diamond> = BTreeSet::new();
    let mut push_diamonds = |g: &OpetopicGraph, ao: usize| {
        for d in g.diamonds() {
            diamonds.insert(Diamond {
                het_outer: ArrowId(arrow_class[ao + d.het_outer.0 as usize] as u32),
                het_inner: ArrowId(arrow_class[ao + d.het_inner.0 as usize] as u32),
                hom_outer: ArrowId(arrow_class[ao + d.hom_outer.0 as usize] as u32),
                hom_inner: ArrowId(arrow_class[ao + d.hom_inner.0 as usize] as u32),
            });
        }
    };
    push_diamonds(base, 0);
    for (k, p) in parts.iter().enumerate() {
        push_diamonds(p, arrow_offsets[k]);
    }

    let graph = OpetopicGraph::from_parts(cells, arrows, diamonds.into_iter().collect())?;
    let base_cells = (0..base.cell_count())
        .map(|i| CellId(cell_class[i] as u32))
        .collect();
    let base_arrows = (0..base.arrow_count())
        .map(|i| ArrowId(arrow_class[i] as u32))
        .collect();
    let mut part_cells = Vec::new();
    let mut part_arrows = Vec::new();
    for (k, p) in parts.iter().enumerate() {
        part_cells.push(
            (0..p.cell_count())
                .map(|i| CellId(cell_class[cell_offsets[k] + i] as u32))
                .collect(),
        );
        part_arrows.push(
            (0..p.arrow_count())
                .map(|i| ArrowId(arrow_class[arrow_offsets[k] + i] as u32))
                .collect(),
        );
    }
    Ok(Glued {
        graph,
        base_cells,
        base_arrows,
        part_cells,
        part_arrows,
    })
}

fn boundary_code_for_error(b: &Boundary) -> String {
    crate::construct::fill(b)
        .ok()
        .and_then(|(g, _)| crate::codec::encode(&g).ok())
        .map(|c| c.to_string())
        .unwrap_or_else(|| format!("<unencodable boundary at degree {}>", b.n))
}

fn opetope_code_for_error(g: &OpetopicGraph) -> String {
    crate::codec::encode(g)
        .map(|c| c.to_string())
        .unwrap_or_else(|_| "<unencodable opetope>".to_string())
}

/// The result of substitution or grafting, with the embeddings of the base
/// remainder and of each part.
pub struct GlueOutcome {
    pub pd: PastingDiagram,
    /// For grafting, the embedding of the whole base diagram; for
    /// substitution, of its restriction below the top degree.
    pub base_leg: Morphism,
    pub part_legs: BTreeMap<CellId, Morphism>,
}

/// Leaf and root marks must sit one degree below the top.
fn check_marks(p: &PastingDiagram) -> Result<()> {
    for x in p.leaves.iter().chain(p.roots.iter()) {
        if p.n == 0 || p.graph.degree(*x) != p.n - 1 {
            return Err(Error::Precondition(format!(
                "mark on cell {} at the wrong degree",
                p.graph.cell_name(*x)
            )));
        }
    }
    Ok(())
}

fn marking_decoration(b: &Boundary) -> BTreeMap<CellId, String> {
    b.marking
        .iter()
        .map(|(c, p)| (*c, p.as_str().to_string()))
        .collect()
}

/// Substitution: replace each top cell `x` of `base` by `parts[x]`, a
/// diagram with the same boundary as the slice at `x`. Missing assignments
/// default to the unit (the shift of the slice).
pub fn subst(
    base: &PastingDiagram,
    parts: &BTreeMap<CellId, PastingDiagram>,
) -> Result<GlueOutcome> {
    let n = base.n;
    check_marks(base)?;
    let tops = base.top_cells();
    for x in parts.keys() {
        if !tops.contains(x) {
            return Err(Error::Precondition(format!(
                "substitution assignment at non-top cell {}",
                base.graph.cell_name(*x)
            )));
        }
    }

    let arest = crate::construct::restrict_below(&base.graph, n);
    let mut owned_parts: Vec<(CellId, PastingDiagram)> = Vec::new();
    for x in &tops {
        match parts.get(x) {
            Some(p) => owned_parts.push((*x, p.clone())),
            None => {
                let (sl, _) = slice(&base.graph, *x)?;
                owned_parts.push((*x, shift(&sl)?));
            }
        }
    }

    let mut spans = Vec::new();
    for (k, (x, part)) in owned_parts.iter().enumerate() {
        let (sl, proj) = slice(&base.graph, *x)?;
        let bd = boundary(&sl)?;
        let (part_bd, part_back) = boundary_of_pd(part);
        let iso = find_decorated_isomorphism(
            &bd.graph,
            &part_bd.graph,
            &marking_decoration(&bd),
            &marking_decoration(&part_bd),
        )?
        .ok_or_else(|| Error::BoundaryMismatch {
            cell: base.graph.cell_name(*x).to_string(),
            expected: boundary_code_for_error(&bd),
            got: boundary_code_for_error(&part_bd),
        })?;
        // Apex: the boundary of the slice. Into the base remainder: through
        // the slice projection (all cells have degree < n, so they lie in
        // the restriction). Into the part: through the isomorphism and the
        // copies-to-diagram map.
        let into_base = RawMap {
            cells: bd
                .graph
                .cell_ids()
                .map(|c| {
                    let in_slice = sl.cell_by_name(bd.graph.cell_name(c)).expect("prefix");
                    let in_a = proj.apply(in_slice);
                    arest
                        .cell_by_name(base.graph.cell_name(in_a))
                        .expect("below top degree")
                })
                .collect(),
            arrows: bd
                .graph
                .arrow_ids()
                .map(|a| {
                    let in_slice = sl.arrow_by_name(&bd.graph.arrow(a).name).expect("prefix");
                    let in_a = proj.apply_arrow(in_slice);
                    arest
                        .arrow_by_name(&base.graph.arrow(in_a).name)
                        .expect("below top degree")
                })
                .collect(),
        };
        let into_part = RawMap {
            cells: bd
                .graph
                .cell_ids()
                .map(|c| part_back.apply(iso.apply(c)))
                .collect(),
            arrows: bd
                .graph
                .arrow_ids()
                .map(|a| part_back.apply_arrow(iso.apply_arrow(a)))
                .collect(),
        };
        spans.push(Span {
            apex: bd.graph.clone(),
            into_base,
            part: k,
            into_part,
        });
    }

    let part_graphs: Vec<&OpetopicGraph> = owned_parts.iter().map(|(_, p)| &p.graph).collect();
    let glued = multi_pushout(&arest, &part_graphs, &spans)?;

    let remap = |marks: &[CellId]| -> Vec<CellId> {
        let mut out: Vec<CellId> = marks
            .iter()
            .map(|c| {
                let in_rest = arest
                    .cell_by_name(base.graph.cell_name(*c))
                    .expect("marks live below the top degree");
                glued.base_cells[in_rest.0 as usize]
            })
            .collect();
        out.sort();
        out
    };
    let leaves = remap(&base.leaves);
    let roots = remap(&base.roots);

    let mut part_legs = BTreeMap::new();
    for (k, (x, part)) in owned_parts.iter().enumerate() {
        part_legs.insert(
            *x,
            Morphism {
                source: part.graph.clone(),
                target: glued.graph.clone(),
                cell_map: glued.part_cells[k].clone(),
                arrow_map: glued.part_arrows[k].clone(),
            },
        );
    }

    let base_leg = Morphism {
        source: arest.clone(),
        target: glued.graph.clone(),
        cell_map: glued.base_cells,
        arrow_map: glued.base_arrows,
    };
    let pd = PastingDiagram {
        graph: glued.graph,
        n,
        leaves,
        roots,
    };
    // Cardinality law: the top fiber is the sum of the parts' top fibers.
    debug_assert_eq!(
        pd.top_cells().len(),
        owned_parts
            .iter()
            .map(|(_, p)| p.top_cells().len())
            .sum::<usize>()
    );
    Ok(GlueOutcome {
        pd,
        base_leg,
        part_legs,
    })
}

/// Grafting: attach `parts[x]` at each leaf object `x` of `base`, glued
/// along the part's target. Missing assignments default to the unit (the
/// degenerate diagram on the slice).
pub fn graft(
    base: &PastingDiagram,
    parts: &BTreeMap<CellId, PastingDiagram>,
) -> Result<GlueOutcome> {
    check_marks(base)?;
    let leaves: BTreeSet<CellId> = base.leaves.iter().copied().collect();
    for x in parts.keys() {
        if !leaves.contains(x) {
            return Err(Error::Precondition(format!(
                "graft assignment at non-leaf cell {}",
                base.graph.cell_name(*x)
            )));
        }
    }

    let mut owned_parts: Vec<(CellId, PastingDiagram)> = Vec::new();
    for x in &leaves {
        match parts.get(x) {
            Some(p) => owned_parts.push((*x, p.clone())),
            None => {
                let (sl, _) = slice(&base.graph, *x)?;
                owned_parts.push((*x, degen(&sl)?));
            }
        }
    }

    let mut spans = Vec::new();
    for (k, (x, part)) in owned_parts.iter().enumerate() {
        let (sl, proj) = slice(&base.graph, *x)?;
        let (tgt, tgt_proj) = pd_target(part)?;
        let iso = find_isomorphism(&sl, &tgt)?.ok_or_else(|| Error::TargetMismatch {
            cell: base.graph.cell_name(*x).to_string(),
            expected: opetope_code_for_error(&sl),
            got: opetope_code_for_error(&tgt),
        })?;
        let into_base = RawMap {
            cells: sl.cell_ids().map(|c| proj.apply(c)).collect(),
            arrows: sl.arrow_ids().map(|a| proj.apply_arrow(a)).collect(),
        };
        let into_part = RawMap {
            cells: sl
                .cell_ids()
                .map(|c| tgt_proj.apply(iso.apply(c)))
                .collect(),
            arrows: sl
                .arrow_ids()
                .map(|a| tgt_proj.apply_arrow(iso.apply_arrow(a)))
                .collect(),
        };
        spans.push(Span {
            apex: sl,
            into_base,
            part: k,
            into_part,
        });
    }

    let part_graphs: Vec<&OpetopicGraph> = owned_parts.iter().map(|(_, p)| &p.graph).collect();
    let glued = multi_pushout(&base.graph, &part_graphs, &spans)?;

    let mut new_leaves = Vec::new();
    for (k, (_, part)) in owned_parts.iter().enumerate() {
        for l in &part.leaves {
            new_leaves.push(glued.part_cells[k][l.0 as usize]);
        }
    }
    new_leaves.sort();
    let mut roots: Vec<CellId> = base
        .roots
        .iter()
        .map(|c| glued.base_cells[c.0 as usize])
        .collect();
    roots.sort();

    let mut part_legs = BTreeMap::new();
    for (k, (x, part)) in owned_parts.iter().enumerate() {
        part_legs.insert(
            *x,
            Morphism {
                source: part.graph.clone(),
                target: glued.graph.clone(),
                cell_map: glued.part_cells[k].clone(),
                arrow_map: glued.part_arrows[k].clone(),
            },
        );
    }

    let base_leg = Morphism {
        source: base.graph.clone(),
        target: glued.graph.clone(),
        cell_map: glued.base_cells,
        arrow_map: glued.base_arrows,
    };
    let pd = PastingDiagram {
        graph: glued.graph,
        n: base.n,
        leaves: new_leaves,
        roots,
    };
    // Cardinality law: top fiber adds the base's and the parts' tops.
    debug_assert_eq!(
        pd.top_cells().len(),
        base.top_cells().len()
            + owned_parts
                .iter()
                .map(|(_, p)| p.top_cells().len())
                .sum::<usize>()
    );
    Ok(GlueOutcome {
        pd,
        base_leg,
        part_legs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::check_pasting_diagram;
    use crate::construct::source_horn_of_pd;
    use crate::fixtures;

    #[test]
    fn shift_of_arr_marks_its_ends() {
        let pd = shift(&fixtures::arr()).unwrap();
        assert_eq!(pd.n, 1);
        assert_eq!(pd.leaves.len(), 1);
        assert_eq!(pd.roots.len(), 1);
        assert_eq!(pd.graph.cell_name(pd.leaves[0]), "s");
        assert_eq!(pd.graph.cell_name(pd.roots[0]), "t");
        assert!(check_pasting_diagram(&pd).all_pass());
    }

    #[test]
    fn shift_of_tri2_has_the_expected_marks() {
        let pd = shift(&fixtures::tri(2)).unwrap();
        let names: Vec<&str> = pd.leaves.iter().map(|c| pd.graph.cell_name(*c)).collect();
        assert_eq!(names, vec!["a1", "a2"]);
        assert_eq!(pd.graph.cell_name(pd.roots[0]), "b");
        assert!(check_pasting_diagram(&pd).all_pass());
    }

    #[test]
    fn shift_of_pt_is_the_point_diagram() {
        let pd = shift(&fixtures::pt()).unwrap();
        assert_eq!(pd.n, 0);
        assert!(pd.leaves.is_empty());
        assert!(pd.roots.is_empty());
        assert!(check_pasting_diagram(&pd).all_pass());
    }

    #[test]
    fn degen_of_pt_and_arr_pass() {
        for g in [fixtures::pt(), fixtures::arr()] {
            let pd = degen(&g).unwrap();
            assert_eq!(pd.leaves, pd.roots);
            assert!(pd.top_cells().is_empty());
            let r = check_pasting_diagram(&pd);
            assert!(r.all_pass(), "{:?}", r.lines());
        }
    }

    #[test]
    fn degen_horn_and_target_are_the_opetope() {
        let g = fixtures::arr();
        let pd = degen(&g).unwrap();
        let horn = source_horn_of_pd(&pd).unwrap();
        assert!(find_isomorphism(&horn.graph, &g).unwrap().is_some());
        let (tgt, _) = pd_target(&pd).unwrap();
        assert!(find_isomorphism(&tgt, &g).unwrap().is_some());
    }

    #[test]
    fn subst_unit_right_returns_the_base() {
        // subst(A, x -> shift(A/x)) = A, computed with explicit units.
        let base = shift(&fixtures::tri(2)).unwrap();
        let out = subst(&base, &BTreeMap::new()).unwrap();
        assert!(check_pasting_diagram(&out.pd).all_pass());
        assert!(find_isomorphism(&out.pd.graph, &base.graph).unwrap().is_some());
    }

    #[test]
    fn subst_unit_left_returns_the_part() {
        // subst(shift(X), B) = B with the single nontrivial assignment.
        let x = fixtures::tri(2);
        let base = shift(&x).unwrap();
        let top = base.top_cells()[0];
        // A two-node diagram with the same boundary as tri2.
        let part = {
            let op3 = fixtures::op3();
            let b = boundary(&op3).unwrap();
            crate::construct::source_horn(&b).unwrap()
        };
        let mut parts = BTreeMap::new();
        parts.insert(top, part.clone());
        let out = subst(&base, &parts).unwrap();
        assert!(check_pasting_diagram(&out.pd).all_pass());
        assert!(find_isomorphism(&out.pd.graph, &part.graph).unwrap().is_some());
        assert_eq!(out.pd.top_cells().len(), part.top_cells().len());
    }

    #[test]
    fn graft_unit_right_returns_the_base() {
        let base = shift(&fixtures::tri(2)).unwrap();
        let out = graft(&base, &BTreeMap::new()).unwrap();
        assert!(check_pasting_diagram(&out.pd).all_pass());
        assert!(find_isomorphism(&out.pd.graph, &base.graph).unwrap().is_some());
    }

    #[test]
    fn graft_unit_left_returns_the_part() {
        // graft(degen(X), B) = B when pd_target(B) = X.
        let x = fixtures::arr();
        let base = degen(&x).unwrap();
        let leaf = base.leaves[0];
        let part = shift(&fixtures::tri(3)).unwrap();
        let mut parts = BTreeMap::new();
        parts.insert(leaf, part.clone());
        let out = graft(&base, &parts).unwrap();
        assert!(check_pasting_diagram(&out.pd).all_pass());
        assert!(find_isomorphism(&out.pd.graph, &part.graph).unwrap().is_some());
    }

    #[test]
    fn graft_attaches_a_node_at_one_leaf() {
        let base = shift(&fixtures::tri(2)).unwrap();
        let a1 = base.graph.cell_by_name("a1").unwrap();
        let mut parts = BTreeMap::new();
        parts.insert(a1, shift(&fixtures::tri(1)).unwrap());
        let out = graft(&base, &parts).unwrap();
        let r = check_pasting_diagram(&out.pd);
        assert!(r.all_pass(), "{:?}", r.lines());
        assert_eq!(out.pd.top_cells().len(), 2);
        assert_eq!(out.pd.leaves.len(), 2); // tri1's source + the untouched a2
        assert_eq!(out.pd.roots.len(), 1);
    }

    #[test]
    fn subst_boundary_mismatch_is_reported() {
        let base = shift(&fixtures::tri(2)).unwrap();
        let top = base.top_cells()[0];
        let mut parts = BTreeMap::new();
        parts.insert(top, shift(&fixtures::tri(3)).unwrap());
        match subst(&base, &parts) {
            Err(Error::BoundaryMismatch { .. }) => {}
            other => panic!("expected BoundaryMismatch, got {:?}", other.map(|o| o.pd.n)),
        }
    }

    #[test]
    fn graft_target_mismatch_is_reported() {
        let base = shift(&fixtures::tri(2)).unwrap();
        let a1 = base.graph.cell_by_name("a1").unwrap();
        let mut parts = BTreeMap::new();
        // A 2-diagram whose target is not an arrow slice: use degen(tri1)
        // shifted up; simplest is a diagram at the wrong degree.
        parts.insert(a1, degen(&fixtures::tri(1)).unwrap());
        match graft(&base, &parts) {
            Err(Error::TargetMismatch { .. }) | Err(Error::Precondition(_)) => {}
            other => panic!("expected TargetMismatch, got {:?}", other.map(|o| o.pd.n)),
        }
    }
}

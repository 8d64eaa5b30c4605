//! The presented-category data model: cells, polarized one-step generator
//! arrows, diamonds, and morphisms between presentations.
//!
//! A graph is immutable after construction. Validity is not enforced here:
//! invalid candidates are representable on purpose, and the axiom engine
//! decides what they violate. [`OpetopicGraph::well_formed`] only checks the
//! structural invariants of the representation itself.

use std::collections::BTreeMap;
use std::fmt;

use crate::{Error, Result};

/// Index of a cell, stable within one graph. Ordering is insertion order and
/// is used only for deterministic iteration.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CellId(pub u32);

/// Index of a generator arrow within one graph.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ArrowId(pub u32);

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for ArrowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "~{}", self.0)
    }
}

/// Whether a generator arrow exhibits its domain as a source or as the
/// target of its codomain.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Polarity {
    Source,
    Target,
}

impl Polarity {
    pub fn complement(self) -> Polarity {
        match self {
            Polarity::Source => Polarity::Target,
            Polarity::Target => Polarity::Source,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Source => "source",
            Polarity::Target => "target",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cell {
    pub name: String,
    pub degree: u32,
}

/// A one-step generator arrow: `degree(cod) = degree(dom) + 1` when well
/// formed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GenArrow {
    pub name: String,
    pub dom: CellId,
    pub cod: CellId,
    pub polarity: Polarity,
}

/// One relation of the canonical presentation: the heterogeneous pair
/// `(het_outer, het_inner)` equals the homogeneous pair
/// `(hom_outer, hom_inner)` as two-step composites.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Diamond {
    pub het_outer: ArrowId,
    pub het_inner: ArrowId,
    pub hom_outer: ArrowId,
    pub hom_inner: ArrowId,
}

/// A finite presentation of an opetopic-set candidate.
#[derive(Clone, Debug)]
pub struct OpetopicGraph {
    cells: Vec<Cell>,
    arrows: Vec<GenArrow>,
    diamonds: Vec<Diamond>,
    /// Optional override for the rewriting fuel bound, for adversarial
    /// inputs. Not part of the value; never serialized.
    pub fuel_override: Option<u64>,
    // Derived lookup tables, rebuilt on construction.
    into: Vec<Vec<ArrowId>>,
    from: Vec<Vec<ArrowId>>,
    cell_names: BTreeMap<String, CellId>,
    arrow_names: BTreeMap<String, ArrowId>,
}

impl PartialEq for OpetopicGraph {
    fn eq(&self, other: &Self) -> bool {
        self.cells == other.cells
            && self.arrows == other.arrows
            && self.diamonds == other.diamonds
    }
}

impl Eq for OpetopicGraph {}

impl OpetopicGraph {
    /// Build a graph from raw parts. Fails only on duplicate names or
    /// out-of-range references; semantic validity is a separate question.
    pub fn from_parts(
        cells: Vec<Cell>,
        arrows: Vec<GenArrow>,
        diamonds: Vec<Diamond>,
    ) -> Result<OpetopicGraph> {
        let mut cell_names = BTreeMap::new();
        for (i, c) in cells.iter().enumerate() {
            if cell_names.insert(c.name.clone(), CellId(i as u32)).is_some() {
                return Err(Error::ParseError(format!("duplicate cell id {:?}", c.name)));
            }
        }
        let mut arrow_names = BTreeMap::new();
        for (i, a) in arrows.iter().enumerate() {
            if a.dom.0 as usize >= cells.len() || a.cod.0 as usize >= cells.len() {
                return Err(Error::ParseError(format!(
                    "arrow {:?} references a missing cell",
                    a.name
                )));
            }
            if arrow_names.insert(a.name.clone(), ArrowId(i as u32)).is_some() {
                return Err(Error::ParseError(format!("duplicate arrow id {:?}", a.name)));
            }
        }
        for d in &diamonds {
            for a in [d.het_outer, d.het_inner, d.hom_outer, d.hom_inner] {
                if a.0 as usize >= arrows.len() {
                    return Err(Error::ParseError(format!(
                        "diamond references a missing arrow {a}"
                    )));
                }
            }
        }
        let mut into = vec![Vec::new(); cells.len()];
        let mut from = vec![Vec::new(); cells.len()];
        for (i, a) in arrows.iter().enumerate() {
            into[a.cod.0 as usize].push(ArrowId(i as u32));
            from[a.dom.0 as usize].push(ArrowId(i as u32));
        }
        Ok(OpetopicGraph {
            cells,
            arrows,
            diamonds,
            fuel_override: None,
            into,
            from,
            cell_names,
            arrow_names,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn cell_ids(&self) -> impl Iterator<Item = CellId> + '_ {
        (0..self.cells.len() as u32).map(CellId)
    }

    pub fn arrow_ids(&self) -> impl Iterator<Item = ArrowId> + '_ {
        (0..self.arrows.len() as u32).map(ArrowId)
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id.0 as usize]
    }

    pub fn arrow(&self, id: ArrowId) -> &GenArrow {
        &self.arrows[id.0 as usize]
    }

    pub fn diamonds(&self) -> &[Diamond] {
        &self.diamonds
    }

    pub fn degree(&self, id: CellId) -> u32 {
        self.cells[id.0 as usize].degree
    }

    pub fn cell_name(&self, id: CellId) -> &str {
        &self.cells[id.0 as usize].name
    }

    pub fn cell_by_name(&self, name: &str) -> Option<CellId> {
        self.cell_names.get(name).copied()
    }

    pub fn arrow_by_name(&self, name: &str) -> Option<ArrowId> {
        self.arrow_names.get(name).copied()
    }

    /// All generator arrows into `x` (the one-step slice of `x`).
    pub fn arrows_into(&self, x: CellId) -> &[ArrowId] {
        &self.into[x.0 as usize]
    }

    pub fn arrows_from(&self, x: CellId) -> &[ArrowId] {
        &self.from[x.0 as usize]
    }

    pub fn source_slice(&self, x: CellId) -> Vec<ArrowId> {
        self.arrows_into(x)
            .iter()
            .copied()
            .filter(|a| self.arrow(*a).polarity == Polarity::Source)
            .collect()
    }

    pub fn target_slice(&self, x: CellId) -> Vec<ArrowId> {
        self.arrows_into(x)
            .iter()
            .copied()
            .filter(|a| self.arrow(*a).polarity == Polarity::Target)
            .collect()
    }

    /// The unique target arrow into `x`, when there is exactly one.
    pub fn target_arrow_into(&self, x: CellId) -> Option<ArrowId> {
        let ts = self.target_slice(x);
        if ts.len() == 1 {
            Some(ts[0])
        } else {
            None
        }
    }

    pub fn cells_of_degree(&self, n: u32) -> Vec<CellId> {
        self.cell_ids().filter(|c| self.degree(*c) == n).collect()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.cells.iter().map(|c| c.degree).max()
    }

    /// Is `(outer, inner)` a composable pair, i.e. a two-step path
    /// `dom(inner) -> cod(outer)`?
    pub fn composable(&self, outer: ArrowId, inner: ArrowId) -> bool {
        self.arrow(inner).cod == self.arrow(outer).dom
    }

    pub fn pair_is_homogeneous(&self, outer: ArrowId, inner: ArrowId) -> bool {
        self.arrow(outer).polarity == self.arrow(inner).polarity
    }

    pub fn pair_is_heterogeneous(&self, outer: ArrowId, inner: ArrowId) -> bool {
        !self.pair_is_homogeneous(outer, inner)
    }

    /// Does the diamond satisfy the structural pair conditions (composable,
    /// het/hom as labeled, matching endpoints)?
    pub fn diamond_is_well_formed(&self, d: &Diamond) -> bool {
        self.composable(d.het_outer, d.het_inner)
            && self.composable(d.hom_outer, d.hom_inner)
            && self.pair_is_heterogeneous(d.het_outer, d.het_inner)
            && self.pair_is_homogeneous(d.hom_outer, d.hom_inner)
            && self.arrow(d.het_outer).cod == self.arrow(d.hom_outer).cod
            && self.arrow(d.het_inner).dom == self.arrow(d.hom_inner).dom
    }

    /// Structural violations of the representation invariants. Empty means
    /// well-formed; semantic axioms are checked by the axiom engine.
    pub fn well_formed(&self) -> Vec<String> {
        let mut out = Vec::new();
        for a in self.arrow_ids() {
            let ar = self.arrow(a);
            let (dd, dc) = (self.degree(ar.dom), self.degree(ar.cod));
            if dc != dd + 1 {
                out.push(format!(
                    "non-consecutive degrees: arrow {:?} goes from degree {dd} to degree {dc}",
                    ar.name
                ));
            }
        }
        let mut het_seen: BTreeMap<(ArrowId, ArrowId), usize> = BTreeMap::new();
        let mut hom_seen: BTreeMap<(ArrowId, ArrowId), usize> = BTreeMap::new();
        for (i, d) in self.diamonds.iter().enumerate() {
            if !self.composable(d.het_outer, d.het_inner)
                || !self.composable(d.hom_outer, d.hom_inner)
                || self.arrow(d.het_outer).cod != self.arrow(d.hom_outer).cod
                || self.arrow(d.het_inner).dom != self.arrow(d.hom_inner).dom
            {
                out.push(format!("diamond endpoint mismatch in diamond {i}"));
            }
            if self.composable(d.het_outer, d.het_inner)
                && !self.pair_is_heterogeneous(d.het_outer, d.het_inner)
            {
                out.push(format!("diamond {i} labels a homogeneous pair as heterogeneous"));
            }
            if self.composable(d.hom_outer, d.hom_inner)
                && !self.pair_is_homogeneous(d.hom_outer, d.hom_inner)
            {
                out.push(format!("diamond {i} labels a heterogeneous pair as homogeneous"));
            }
            if let Some(j) = het_seen.insert((d.het_outer, d.het_inner), i) {
                out.push(format!(
                    "heterogeneous pair ({}, {}) appears in diamonds {j} and {i}",
                    self.arrow(d.het_outer).name,
                    self.arrow(d.het_inner).name
                ));
            }
            if let Some(j) = hom_seen.insert((d.hom_outer, d.hom_inner), i) {
                out.push(format!(
                    "homogeneous pair ({}, {}) appears in diamonds {j} and {i}",
                    self.arrow(d.hom_outer).name,
                    self.arrow(d.hom_inner).name
                ));
            }
        }
        out
    }

    /// Raw parts, for serialization and for building mutated candidates in
    /// tests.
    pub fn parts(&self) -> (Vec<Cell>, Vec<GenArrow>, Vec<Diamond>) {
        (self.cells.clone(), self.arrows.clone(), self.diamonds.clone())
    }

    /// Fuel bound for rewriting a three-step tuple whose codomain is `x`:
    /// twice the one-slice size summed over the sources of `x`, plus the two
    /// boundary vertices a rewrite path may carry a target prefix on.
    pub fn fuel_bound(&self, x: CellId) -> u64 {
        if let Some(f) = self.fuel_override {
            return f;
        }
        let mut fuel: u64 = 2;
        for a in self.source_slice(x) {
            fuel += 2 * self.arrows_into(self.arrow(a).dom).len() as u64;
        }
        fuel
    }
}

/// A builder for hand-written presentations.
#[derive(Default)]
pub struct GraphBuilder {
    cells: Vec<Cell>,
    arrows: Vec<GenArrow>,
    diamonds: Vec<Diamond>,
}

impl GraphBuilder {
    pub fn new() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn cell(&mut self, name: &str, degree: u32) -> CellId {
        self.cells.push(Cell {
            name: name.to_string(),
            degree,
        });
        CellId(self.cells.len() as u32 - 1)
    }

    pub fn arrow(&mut self, name: &str, dom: CellId, cod: CellId, polarity: Polarity) -> ArrowId {
        self.arrows.push(GenArrow {
            name: name.to_string(),
            dom,
            cod,
            polarity,
        });
        ArrowId(self.arrows.len() as u32 - 1)
    }

    pub fn source(&mut self, name: &str, dom: CellId, cod: CellId) -> ArrowId {
        self.arrow(name, dom, cod, Polarity::Source)
    }

    pub fn target(&mut self, name: &str, dom: CellId, cod: CellId) -> ArrowId {
        self.arrow(name, dom, cod, Polarity::Target)
    }

    pub fn diamond(
        &mut self,
        het_outer: ArrowId,
        het_inner: ArrowId,
        hom_outer: ArrowId,
        hom_inner: ArrowId,
    ) {
        self.diamonds.push(Diamond {
            het_outer,
            het_inner,
            hom_outer,
            hom_inner,
        });
    }

    pub fn finish(self) -> OpetopicGraph {
        OpetopicGraph::from_parts(self.cells, self.arrows, self.diamonds)
            .expect("builder produced duplicate names")
    }
}

/// A degree-, polarity-, and diamond-preserving map between presentations.
#[derive(Clone, Debug)]
pub struct Morphism {
    pub source: OpetopicGraph,
    pub target: OpetopicGraph,
    /// Indexed by source cell id.
    pub cell_map: Vec<CellId>,
    /// Indexed by source arrow id.
    pub arrow_map: Vec<ArrowId>,
}

impl Morphism {
    pub fn identity(g: &OpetopicGraph) -> Morphism {
        Morphism {
            source: g.clone(),
            target: g.clone(),
            cell_map: g.cell_ids().collect(),
            arrow_map: g.arrow_ids().collect(),
        }
    }

    pub fn apply(&self, x: CellId) -> CellId {
        self.cell_map[x.0 as usize]
    }

    pub fn apply_arrow(&self, a: ArrowId) -> ArrowId {
        self.arrow_map[a.0 as usize]
    }

    /// `second` after `self`; the targets and sources must match.
    pub fn then(&self, second: &Morphism) -> Morphism {
        debug_assert_eq!(self.target, second.source);
        Morphism {
            source: self.source.clone(),
            target: second.target.clone(),
            cell_map: self.cell_map.iter().map(|c| second.apply(*c)).collect(),
            arrow_map: self
                .arrow_map
                .iter()
                .map(|a| second.apply_arrow(*a))
                .collect(),
        }
    }
}

/// Violations of the morphism invariants; empty means valid.
pub fn validate_morphism(f: &Morphism) -> Vec<String> {
    let mut out = Vec::new();
    if f.cell_map.len() != f.source.cell_count() {
        out.push("cell map has wrong length".to_string());
        return out;
    }
    if f.arrow_map.len() != f.source.arrow_count() {
        out.push("arrow map has wrong length".to_string());
        return out;
    }
    for x in f.source.cell_ids() {
        let y = f.apply(x);
        if y.0 as usize >= f.target.cell_count() {
            out.push(format!("cell {} maps out of range", f.source.cell_name(x)));
            continue;
        }
        if f.source.degree(x) != f.target.degree(y) {
            out.push(format!(
                "degree not preserved at cell {}",
                f.source.cell_name(x)
            ));
        }
    }
    for a in f.source.arrow_ids() {
        let b = f.apply_arrow(a);
        if b.0 as usize >= f.target.arrow_count() {
            out.push(format!(
                "arrow {} maps out of range",
                f.source.arrow(a).name
            ));
            continue;
        }
        let sa = f.source.arrow(a);
        let tb = f.target.arrow(b);
        if sa.polarity != tb.polarity {
            out.push(format!("polarity not preserved at arrow {}", sa.name));
        }
        if f.apply(sa.dom) != tb.dom || f.apply(sa.cod) != tb.cod {
            out.push(format!("endpoints not preserved at arrow {}", sa.name));
        }
    }
    if out.is_empty() {
        for (i, d) in f.source.diamonds().iter().enumerate() {
            let image = Diamond {
                het_outer: f.apply_arrow(d.het_outer),
                het_inner: f.apply_arrow(d.het_inner),
                hom_outer: f.apply_arrow(d.hom_outer),
                hom_inner: f.apply_arrow(d.hom_inner),
            };
            if !f.target.diamonds().contains(&image) {
                out.push(format!("diamond {i} is not preserved"));
            }
        }
    }
    out
}

const DEFAULT_ISO_LIMIT: usize = 64;

/// Exhaustive isomorphism search with pruning; returns the first hit.
pub fn find_isomorphism(g: &OpetopicGraph, h: &OpetopicGraph) -> Result<Option<Morphism>> {
    find_isomorphism_limited(g, h, DEFAULT_ISO_LIMIT)
}

pub fn find_isomorphism_limited(
    g: &OpetopicGraph,
    h: &OpetopicGraph,
    limit: usize,
) -> Result<Option<Morphism>> {
    let mut found = None;
    search_isomorphisms(g, h, limit, &mut |m| {
        found = Some(m);
        false
    })?;
    Ok(found)
}

/// All isomorphisms `g -> g`.
pub fn automorphisms(g: &OpetopicGraph, limit: usize) -> Result<Vec<Morphism>> {
    let mut all = Vec::new();
    search_isomorphisms(g, g, limit, &mut |m| {
        all.push(m);
        true
    })?;
    Ok(all)
}

/// An isomorphism that additionally matches a cell decoration (used for
/// boundary markings). Decorations are compared for equality.
pub fn find_decorated_isomorphism(
    g: &OpetopicGraph,
    h: &OpetopicGraph,
    deco_g: &BTreeMap<CellId, String>,
    deco_h: &BTreeMap<CellId, String>,
) -> Result<Option<Morphism>> {
    let mut found = None;
    search_isomorphisms_decorated(g, h, DEFAULT_ISO_LIMIT, deco_g, deco_h, &mut |m| {
        found = Some(m);
        false
    })?;
    Ok(found)
}

fn search_isomorphisms(
    g: &OpetopicGraph,
    h: &OpetopicGraph,
    limit: usize,
    visit: &mut dyn FnMut(Morphism) -> bool,
) -> Result<()> {
    let empty = BTreeMap::new();
    search_isomorphisms_decorated(g, h, limit, &empty, &empty, visit)
}

/// Backtracking search over degree-respecting cell bijections, extended to
/// arrows, with the diamond sets compared last. `visit` returns false to stop.
fn search_isomorphisms_decorated(
    g: &OpetopicGraph,
    h: &OpetopicGraph,
    limit: usize,
    deco_g: &BTreeMap<CellId, String>,
    deco_h: &BTreeMap<CellId, String>,
    visit: &mut dyn FnMut(Morphism) -> bool,
) -> Result<()> {
    if g.cell_count() > limit || h.cell_count() > limit {
        return Err(Error::SizeLimit {
            cells: g.cell_count().max(h.cell_count()),
            limit,
        });
    }
    if g.cell_count() != h.cell_count() || g.arrow_count() != h.arrow_count() {
        return Ok(());
    }
    let mut deg_g: Vec<u32> = g.cell_ids().map(|c| g.degree(c)).collect();
    let mut deg_h: Vec<u32> = h.cell_ids().map(|c| h.degree(c)).collect();
    deg_g.sort_unstable();
    deg_h.sort_unstable();
    if deg_g != deg_h {
        return Ok(());
    }

    // Local invariant used for pruning: per-cell arrow counts by direction
    // and polarity.
    let profile = |gr: &OpetopicGraph, c: CellId| -> [usize; 4] {
        let ins = gr.arrows_into(c);
        let outs = gr.arrows_from(c);
        [
            ins.iter()
                .filter(|a| gr.arrow(**a).polarity == Polarity::Source)
                .count(),
            ins.len(),
            outs.iter()
                .filter(|a| gr.arrow(**a).polarity == Polarity::Source)
                .count(),
            outs.len(),
        ]
    };

    let mut order: Vec<CellId> = g.cell_ids().collect();
    order.sort_by_key(|c| (g.degree(*c), c.0));

    let mut cell_map: Vec<Option<CellId>> = vec![None; g.cell_count()];
    let mut used: Vec<bool> = vec![false; h.cell_count()];

    struct Ctx<'a> {
        g: &'a OpetopicGraph,
        h: &'a OpetopicGraph,
        order: Vec<CellId>,
        deco_g: &'a BTreeMap<CellId, String>,
        deco_h: &'a BTreeMap<CellId, String>,
    }

    fn arrows_consistent(
        ctx: &Ctx,
        cell_map: &[Option<CellId>],
        just_assigned: CellId,
    ) -> bool {
        // Every g-arrow with both endpoints assigned must have a matching
        // h-arrow family of the same size between the images.
        let g = ctx.g;
        let h = ctx.h;
        for a in g
            .arrows_into(just_assigned)
            .iter()
            .chain(g.arrows_from(just_assigned).iter())
        {
            let ar = g.arrow(*a);
            let (Some(d), Some(c)) = (
                cell_map[ar.dom.0 as usize],
                cell_map[ar.cod.0 as usize],
            ) else {
                continue;
            };
            let gn = g
                .arrows_into(ar.cod)
                .iter()
                .filter(|x| {
                    let xa = g.arrow(**x);
                    xa.dom == ar.dom && xa.polarity == ar.polarity
                })
                .count();
            let hn = h
                .arrows_into(c)
                .iter()
                .filter(|x| {
                    let xa = h.arrow(**x);
                    xa.dom == d && xa.polarity == ar.polarity
                })
                .count();
            if gn != hn {
                return false;
            }
        }
        true
    }

    fn extend_arrows(
        ctx: &Ctx,
        cell_map: &[CellId],
        visit: &mut dyn FnMut(Morphism) -> bool,
    ) -> bool {
        // Cells fixed; match arrows within parallel families, then compare
        // diamond sets.
        let g = ctx.g;
        let h = ctx.h;
        let mut groups: BTreeMap<(CellId, CellId, Polarity), (Vec<ArrowId>, Vec<ArrowId>)> =
            BTreeMap::new();
        for a in g.arrow_ids() {
            let ar = g.arrow(a);
            let key = (
                cell_map[ar.dom.0 as usize],
                cell_map[ar.cod.0 as usize],
                ar.polarity,
            );
            groups.entry(key).or_default().0.push(a);
        }
        for b in h.arrow_ids() {
            let br = h.arrow(b);
            groups
                .entry((br.dom, br.cod, br.polarity))
                .or_default()
                .1
                .push(b);
        }
        let groups: Vec<(Vec<ArrowId>, Vec<ArrowId>)> = groups.into_values().collect();
        if groups.iter().any(|(a, b)| a.len() != b.len()) {
            return true; // no match here; keep searching
        }
        // Assign arrows group by group; groups are almost always singletons.
        fn assign(
            ctx: &Ctx,
            cell_map: &[CellId],
            groups: &[(Vec<ArrowId>, Vec<ArrowId>)],
            gi: usize,
            arrow_map: &mut Vec<Option<ArrowId>>,
            visit: &mut dyn FnMut(Morphism) -> bool,
        ) -> bool {
            if gi == groups.len() {
                let amap: Vec<ArrowId> = arrow_map.iter().map(|x| x.unwrap()).collect();
                // Diamond preservation, both ways.
                let g = ctx.g;
                let h = ctx.h;
                let mapped: std::collections::BTreeSet<Diamond> = g
                    .diamonds()
                    .iter()
                    .map(|d| Diamond {
                        het_outer: amap[d.het_outer.0 as usize],
                        het_inner: amap[d.het_inner.0 as usize],
                        hom_outer: amap[d.hom_outer.0 as usize],
                        hom_inner: amap[d.hom_inner.0 as usize],
                    })
                    .collect();
                let hset: std::collections::BTreeSet<Diamond> =
                    h.diamonds().iter().copied().collect();
                if mapped != hset {
                    return true;
                }
                let m = Morphism {
                    source: g.clone(),
                    target: h.clone(),
                    cell_map: cell_map.to_vec(),
                    arrow_map: amap,
                };
                return visit(m);
            }
            let (ga, ha) = &groups[gi];
            // Permute ha; gi-th group.
            fn perms(
                ctx: &Ctx,
                cell_map: &[CellId],
                groups: &[(Vec<ArrowId>, Vec<ArrowId>)],
                gi: usize,
                ga: &[ArrowId],
                ha: &[ArrowId],
                chosen: &mut Vec<ArrowId>,
                used: &mut Vec<bool>,
                arrow_map: &mut Vec<Option<ArrowId>>,
                visit: &mut dyn FnMut(Morphism) -> bool,
            ) -> bool {
                if chosen.len() == ga.len() {
                    for (a, b) in ga.iter().zip(chosen.iter()) {
                        arrow_map[a.0 as usize] = Some(*b);
                    }
                    let cont = assign(ctx, cell_map, groups, gi + 1, arrow_map, visit);
                    for a in ga.iter() {
                        arrow_map[a.0 as usize] = None;
                    }
                    return cont;
                }
                for (i, b) in ha.iter().enumerate() {
                    if used[i] {
                        continue;
                    }
                    used[i] = true;
                    chosen.push(*b);
                    let cont = perms(
                        ctx, cell_map, groups, gi, ga, ha, chosen, used, arrow_map, visit,
                    );
                    chosen.pop();
                    used[i] = false;
                    if !cont {
                        return false;
                    }
                }
                true
            }
            let mut chosen = Vec::new();
            let mut used = vec![false; ha.len()];
            perms(
                ctx, cell_map, groups, gi, ga, ha, &mut chosen, &mut used, arrow_map, visit,
            )
        }
        let mut arrow_map: Vec<Option<ArrowId>> = vec![None; g.arrow_count()];
        assign(ctx, cell_map, &groups, 0, &mut arrow_map, visit)
    }

    // All search levels return a continue flag: false means a visitor asked
    // to stop the whole search.
    fn rec(
        ctx: &Ctx,
        i: usize,
        cell_map: &mut Vec<Option<CellId>>,
        used: &mut Vec<bool>,
        profile: &dyn Fn(&OpetopicGraph, CellId) -> [usize; 4],
        visit: &mut dyn FnMut(Morphism) -> bool,
    ) -> bool {
        if i == ctx.order.len() {
            let cm: Vec<CellId> = cell_map.iter().map(|x| x.unwrap()).collect();
            return extend_arrows(ctx, &cm, visit);
        }
        let x = ctx.order[i];
        for y in ctx.h.cell_ids() {
            if used[y.0 as usize] {
                continue;
            }
            if ctx.g.degree(x) != ctx.h.degree(y) {
                continue;
            }
            if profile(ctx.g, x) != profile(ctx.h, y) {
                continue;
            }
            if ctx.deco_g.get(&x) != ctx.deco_h.get(&y) {
                continue;
            }
            cell_map[x.0 as usize] = Some(y);
            used[y.0 as usize] = true;
            let mut cont = true;
            if arrows_consistent(ctx, cell_map, x) {
                cont = rec(ctx, i + 1, cell_map, used, profile, visit);
            }
            cell_map[x.0 as usize] = None;
            used[y.0 as usize] = false;
            if !cont {
                return false;
            }
        }
        true
    }

    let ctx = Ctx {
        g,
        h,
        order,
        deco_g,
        deco_h,
    };
    rec(&ctx, 0, &mut cell_map, &mut used, &profile, visit);
    Ok(())
}

/// Rebuild a graph with deterministic names: cells sorted by degree then
/// insertion order become `x0, x1, ...`; arrows sorted by (cod, dom,
/// polarity, insertion) become `e0, e1, ...`. Returns the relabeled graph and
/// the cell/arrow maps from the old graph.
pub fn canonical_relabel(g: &OpetopicGraph) -> (OpetopicGraph, Vec<CellId>, Vec<ArrowId>) {
    let mut cell_order: Vec<CellId> = g.cell_ids().collect();
    cell_order.sort_by_key(|c| (g.degree(*c), c.0));
    let mut cell_map = vec![CellId(0); g.cell_count()];
    let mut cells = Vec::with_capacity(g.cell_count());
    for (i, old) in cell_order.iter().enumerate() {
        cell_map[old.0 as usize] = CellId(i as u32);
        cells.push(Cell {
            name: format!("x{i}"),
            degree: g.degree(*old),
        });
    }
    let mut arrow_order: Vec<ArrowId> = g.arrow_ids().collect();
    arrow_order.sort_by_key(|a| {
        let ar = g.arrow(*a);
        (
            cell_map[ar.cod.0 as usize],
            cell_map[ar.dom.0 as usize],
            ar.polarity,
            a.0,
        )
    });
    let mut arrow_map = vec![ArrowId(0); g.arrow_count()];
    let mut arrows = Vec::with_capacity(g.arrow_count());
    for (i, old) in arrow_order.iter().enumerate() {
        arrow_map[old.0 as usize] = ArrowId(i as u32);
        let ar = g.arrow(*old);
        arrows.push(GenArrow {
            name: format!("e{i}"),
            dom: cell_map[ar.dom.0 as usize],
            cod: cell_map[ar.cod.0 as usize],
            polarity: ar.polarity,
        });
    }
    let mut diamonds: Vec<Diamond> = g
        .diamonds()
        .iter()
        .map(|d| Diamond {
            het_outer: arrow_map[d.het_outer.0 as usize],
            het_inner: arrow_map[d.het_inner.0 as usize],
            hom_outer: arrow_map[d.hom_outer.0 as usize],
            hom_inner: arrow_map[d.hom_inner.0 as usize],
        })
        .collect();
    diamonds.sort();
    let relabeled = OpetopicGraph::from_parts(cells, arrows, diamonds)
        .expect("relabeling cannot introduce duplicates");
    (relabeled, cell_map, arrow_map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn graphs_and_morphisms_are_sendable() {
        fn assert_sync_send<T: Send + Sync>() {}
        assert_sync_send::<OpetopicGraph>();
        assert_sync_send::<Morphism>();
    }

    #[test]
    fn polarity_complement_is_an_involution() {
        for p in [Polarity::Source, Polarity::Target] {
            assert_eq!(p.complement().complement(), p);
            assert_ne!(p.complement(), p);
        }
    }

    #[test]
    fn tri2_is_well_formed() {
        assert!(fixtures::tri(2).well_formed().is_empty());
    }

    #[test]
    fn rewired_arrow_reports_nonconsecutive_degrees() {
        let g = fixtures::tri(2);
        let (cells, mut arrows, diamonds) = g.parts();
        // Rewire the first point-to-edge arrow to point at the top cell.
        let c = g.cell_by_name("c").unwrap();
        arrows[0].cod = c;
        let bad = OpetopicGraph::from_parts(cells, arrows, diamonds).unwrap();
        let report = bad.well_formed();
        assert!(report.iter().any(|v| v.contains("non-consecutive degrees")));
    }

    #[test]
    fn broken_diamond_endpoint_is_reported() {
        let g = fixtures::tri(2);
        let (cells, arrows, mut diamonds) = g.parts();
        // Point one diamond's hom_inner at an arrow with a different domain.
        let other = (0..arrows.len() as u32)
            .map(ArrowId)
            .find(|a| arrows[a.0 as usize].dom != arrows[diamonds[0].hom_inner.0 as usize].dom)
            .unwrap();
        diamonds[0].hom_inner = other;
        let bad = OpetopicGraph::from_parts(cells, arrows, diamonds).unwrap();
        let report = bad.well_formed();
        assert!(report.iter().any(|v| v.contains("diamond")));
    }

    #[test]
    fn identity_morphism_is_valid() {
        let g = fixtures::tri(2);
        assert!(validate_morphism(&Morphism::identity(&g)).is_empty());
    }

    #[test]
    fn flipped_polarity_in_image_is_invalid() {
        let g = fixtures::arr();
        let (cells, mut arrows, diamonds) = g.parts();
        arrows[0].polarity = arrows[0].polarity.complement();
        let h = OpetopicGraph::from_parts(cells, arrows, diamonds).unwrap();
        let f = Morphism {
            source: g.clone(),
            target: h,
            cell_map: g.cell_ids().collect(),
            arrow_map: g.arrow_ids().collect(),
        };
        let report = validate_morphism(&f);
        assert!(report.iter().any(|v| v.contains("polarity not preserved")));
    }

    #[test]
    fn renamed_tri2_has_a_unique_isomorphism() {
        let g = fixtures::tri(2);
        let (h, _, _) = canonical_relabel(&g);
        let isos = {
            let mut all = Vec::new();
            search_isomorphisms(&g, &h, 64, &mut |m| {
                all.push(m);
                true
            })
            .unwrap();
            all
        };
        assert_eq!(isos.len(), 1);
        assert!(validate_morphism(&isos[0]).is_empty());
    }

    #[test]
    fn tri2_and_tri3_are_not_isomorphic() {
        let g = fixtures::tri(2);
        let h = fixtures::tri(3);
        assert!(find_isomorphism(&g, &h).unwrap().is_none());
    }

    #[test]
    fn size_limit_is_enforced() {
        let g = fixtures::tri(2);
        match find_isomorphism_limited(&g, &g, 3) {
            Err(Error::SizeLimit { .. }) => {}
            other => panic!("expected SizeLimit, got {other:?}"),
        }
    }
}

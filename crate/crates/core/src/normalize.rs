//! Diamond rewriting of composable tuples into normal forms, and the
//! hom-set computation built on it.
//!
//! A composite arrow is stored as a path of generator arrows in diagrammatic
//! order (first entry leaves the domain). A tuple of length k >= 2 is normal
//! when its first two arrows form a homogeneous pair and the remaining k - 2
//! are target arrows. Rewriting replaces a heterogeneous pair by its diamond
//! partner (and back) inside a three-arrow window, in the three
//! configurations that make progress; each non-normal window has exactly
//! one applicable rewrite, and rewriting terminates within a bound computed
//! from the one-slices of the graph.

use std::collections::BTreeSet;

use crate::graph::{ArrowId, CellId, OpetopicGraph, Polarity};
use crate::{Error, Result};

/// A composite arrow in normal form. `path` is in diagrammatic order:
/// `path[0]` leaves `dom`, the last entry lands in `cod`. The empty path is
/// the identity on `dom == cod`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NormalForm {
    pub dom: CellId,
    pub cod: CellId,
    pub path: Vec<ArrowId>,
}

impl NormalForm {
    pub fn identity(at: CellId) -> NormalForm {
        NormalForm {
            dom: at,
            cod: at,
            path: Vec::new(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.path.is_empty()
    }

    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }

    /// The homogeneous tail: the first two arrows of the path, present when
    /// the length is at least 2.
    pub fn homogeneous_tail(&self) -> Option<(ArrowId, ArrowId)> {
        if self.path.len() >= 2 {
            Some((self.path[1], self.path[0]))
        } else {
            None
        }
    }

    /// The chain of target generators above the tail, outermost last.
    pub fn target_chain(&self) -> &[ArrowId] {
        if self.path.len() >= 2 {
            &self.path[2..]
        } else {
            &[]
        }
    }

    /// Structural normal-form predicate, used by the axiom engine.
    pub fn is_normal_shape(&self, g: &OpetopicGraph) -> bool {
        match self.path.len() {
            0 | 1 => true,
            _ => {
                g.pair_is_homogeneous(self.path[1], self.path[0])
                    && self.path[2..]
                        .iter()
                        .all(|a| g.arrow(*a).polarity == Polarity::Target)
            }
        }
    }

    pub fn render(&self, g: &OpetopicGraph) -> String {
        if self.path.is_empty() {
            return format!("id({})", g.cell_name(self.dom));
        }
        let names: Vec<&str> = self.path.iter().map(|a| g.arrow(*a).name.as_str()).collect();
        names.join(";")
    }
}

fn check_composable(g: &OpetopicGraph, path: &[ArrowId]) -> Result<()> {
    for i in 1..path.len() {
        if g.arrow(path[i]).dom != g.arrow(path[i - 1]).cod {
            return Err(Error::NotComposable { position: i });
        }
    }
    Ok(())
}

/// Look up the unique diamond containing `(outer, inner)` on the given side.
/// `Err` carries the ambiguity when the pair sits in several diamonds.
fn partner(
    g: &OpetopicGraph,
    outer: ArrowId,
    inner: ArrowId,
    het_side: bool,
) -> std::result::Result<Option<(ArrowId, ArrowId)>, String> {
    let mut hit = None;
    for d in g.diamonds() {
        if !g.diamond_is_well_formed(d) {
            continue; // malformed quotient data contributes nothing
        }
        let (o, i, po, pi) = if het_side {
            (d.het_outer, d.het_inner, d.hom_outer, d.hom_inner)
        } else {
            (d.hom_outer, d.hom_inner, d.het_outer, d.het_inner)
        };
        if o == outer && i == inner {
            if hit.is_some() {
                return Err(format!(
                    "pair ({}, {}) sits in more than one diamond",
                    g.arrow(outer).name,
                    g.arrow(inner).name
                ));
            }
            hit = Some((po, pi));
        }
    }
    Ok(hit)
}

/// Rewrite the three-arrow window `path[lo..lo+3]` (diagrammatic order) to
/// normal form in place. Returns the number of steps taken.
fn normalize_window(g: &OpetopicGraph, path: &mut [ArrowId], lo: usize) -> Result<u64> {
    let top = g.arrow(path[lo + 2]).cod;
    let fuel = g.fuel_bound(top);
    let mut steps = 0u64;
    loop {
        // Composition order (p, q, r): p outermost.
        let r = path[lo];
        let q = path[lo + 1];
        let p = path[lo + 2];
        let p_pol = g.arrow(p).polarity;
        let r_pol = g.arrow(r).polarity;
        let inner_het = g.pair_is_heterogeneous(q, r);
        let outer_hom = g.pair_is_homogeneous(p, q);

        let normal = p_pol == Polarity::Target && !inner_het;
        if normal {
            return Ok(steps);
        }
        if steps >= fuel {
            return Err(Error::FuelExhausted {
                bound: fuel,
                at: g.cell_name(top).to_string(),
            });
        }

        // Exactly one of the successor conditions applies to a non-normal
        // window; which one is determined by the polarity pattern.
        let rewrite = if inner_het && p_pol == Polarity::Source {
            // inner het -> hom, outer source fixed
            partner(g, q, r, true)
                .map_err(|detail| Error::AmbiguousRewrite { position: lo, detail })?
                .map(|(q2, r2)| (r2, q2, p))
                .ok_or((q, r))
        } else if outer_hom && r_pol == Polarity::Source {
            // outer hom -> het, inner source fixed
            partner(g, p, q, false)
                .map_err(|detail| Error::AmbiguousRewrite { position: lo, detail })?
                .map(|(p2, q2)| (r, q2, p2))
                .ok_or((p, q))
        } else if !outer_hom && r_pol == Polarity::Target {
            // outer het -> hom, inner target fixed
            partner(g, p, q, true)
                .map_err(|detail| Error::AmbiguousRewrite { position: lo, detail })?
                .map(|(p2, q2)| (r, q2, p2))
                .ok_or((p, q))
        } else {
            Err((q, r))
        };

        match rewrite {
            Ok((nr, nq, np)) => {
                path[lo] = nr;
                path[lo + 1] = nq;
                path[lo + 2] = np;
                steps += 1;
            }
            Err((outer, inner)) => {
                return Err(Error::MissingRewrite {
                    position: lo,
                    outer: g.arrow(outer).name.clone(),
                    inner: g.arrow(inner).name.clone(),
                });
            }
        }
    }
}

/// Normalize a composable path of generator arrows (diagrammatic order).
pub fn normalize(g: &OpetopicGraph, path: &[ArrowId]) -> Result<NormalForm> {
    check_composable(g, path)?;
    let mut p = path.to_vec();
    match p.len() {
        0 => return Err(Error::Precondition("empty path has no endpoints; use NormalForm::identity".into())),
        1 => {}
        2 => {
            if g.pair_is_heterogeneous(p[1], p[0]) {
                match partner(g, p[1], p[0], true) {
                    Ok(Some((o, i))) => {
                        p[0] = i;
                        p[1] = o;
                    }
                    Ok(None) => {
                        return Err(Error::MissingRewrite {
                            position: 0,
                            outer: g.arrow(p[1]).name.clone(),
                            inner: g.arrow(p[0]).name.clone(),
                        })
                    }
                    Err(detail) => {
                        return Err(Error::AmbiguousRewrite { position: 0, detail })
                    }
                }
            }
        }
        k => {
            // Normalize the outermost window, pin its outermost arrow (a
            // target generator), and recurse inward.
            let mut end = k;
            while end > 2 {
                normalize_window(g, &mut p, end - 3)?;
                end -= 1;
            }
        }
    }
    let nf = NormalForm {
        dom: g.arrow(p[0]).dom,
        cod: g.arrow(*p.last().unwrap()).cod,
        path: p,
    };
    debug_assert!(nf.is_normal_shape(g));
    Ok(nf)
}

/// All composable generator paths from `x` to `y`, in diagrammatic order.
/// Finite because generator arrows raise degree; the explicit length bound
/// keeps the walk finite even on malformed inputs with degree-violating
/// arrows.
pub fn paths_between(g: &OpetopicGraph, x: CellId, y: CellId) -> Vec<Vec<ArrowId>> {
    let mut out = Vec::new();
    let mut stack = Vec::new();
    let max_len = g.degree(y).saturating_sub(g.degree(x)) as usize;
    fn dfs(
        g: &OpetopicGraph,
        at: CellId,
        y: CellId,
        max_len: usize,
        stack: &mut Vec<ArrowId>,
        out: &mut Vec<Vec<ArrowId>>,
    ) {
        if at == y && !stack.is_empty() {
            out.push(stack.clone());
            return;
        }
        if g.degree(at) >= g.degree(y) || stack.len() >= max_len {
            return;
        }
        for a in g.arrows_from(at) {
            stack.push(*a);
            dfs(g, g.arrow(*a).cod, y, max_len, stack, out);
            stack.pop();
        }
    }
    dfs(g, x, y, max_len, &mut stack, &mut out);
    out
}

/// The hom-set from `x` to `y` as a set of normal forms. `{identity}` when
/// `x == y`, empty when the degree of `x` exceeds that of `y`.
pub fn hom(g: &OpetopicGraph, x: CellId, y: CellId) -> Result<BTreeSet<NormalForm>> {
    let mut out = BTreeSet::new();
    if x == y {
        out.insert(NormalForm::identity(x));
        return Ok(out);
    }
    for p in paths_between(g, x, y) {
        out.insert(normalize(g, &p)?);
    }
    Ok(out)
}

/// Compose two normal forms with matching endpoints: concatenate and
/// normalize.
pub fn compose(g: &OpetopicGraph, inner: &NormalForm, outer: &NormalForm) -> Result<NormalForm> {
    if inner.cod != outer.dom {
        return Err(Error::Precondition(format!(
            "compose endpoints do not match: {} vs {}",
            g.cell_name(inner.cod),
            g.cell_name(outer.dom)
        )));
    }
    if inner.is_identity() {
        return Ok(outer.clone());
    }
    if outer.is_identity() {
        return Ok(inner.clone());
    }
    let mut path = inner.path.clone();
    path.extend_from_slice(&outer.path);
    normalize(g, &path)
}

/// Precompose a normal form with a single generator arrow.
pub fn precompose_arrow(g: &OpetopicGraph, e: ArrowId, outer: &NormalForm) -> Result<NormalForm> {
    if g.arrow(e).cod != outer.dom {
        return Err(Error::Precondition("arrow does not land in the domain".into()));
    }
    let mut path = vec![e];
    path.extend_from_slice(&outer.path);
    normalize(g, &path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::collections::BTreeSet;

    fn aid(g: &OpetopicGraph, name: &str) -> ArrowId {
        g.arrow_by_name(name).unwrap_or_else(|| panic!("no arrow {name}"))
    }

    fn cid(g: &OpetopicGraph, name: &str) -> CellId {
        g.cell_by_name(name).unwrap_or_else(|| panic!("no cell {name}"))
    }

    /// Independent oracle: the congruence class of a tuple under replacing
    /// adjacent pairs by their diamond partners, closed breadth-first.
    pub(crate) fn closure_class(g: &OpetopicGraph, start: &[ArrowId]) -> BTreeSet<Vec<ArrowId>> {
        let mut seen: BTreeSet<Vec<ArrowId>> = BTreeSet::new();
        let mut queue = vec![start.to_vec()];
        seen.insert(start.to_vec());
        while let Some(t) = queue.pop() {
            for i in 0..t.len().saturating_sub(1) {
                let (inner, outer) = (t[i], t[i + 1]);
                for d in g.diamonds() {
                    if !g.diamond_is_well_formed(d) {
                        continue;
                    }
                    let mut push = |o: ArrowId, inr: ArrowId| {
                        let mut t2 = t.clone();
                        t2[i] = inr;
                        t2[i + 1] = o;
                        if seen.insert(t2.clone()) {
                            queue.push(t2);
                        }
                    };
                    if d.het_outer == outer && d.het_inner == inner {
                        push(d.hom_outer, d.hom_inner);
                    }
                    if d.hom_outer == outer && d.hom_inner == inner {
                        push(d.het_outer, d.het_inner);
                    }
                }
            }
        }
        seen
    }

    #[test]
    fn homogeneous_pair_is_already_normal() {
        let g = fixtures::tri(2);
        let p = vec![aid(&g, "s_a1"), aid(&g, "s1_c")];
        let nf = normalize(&g, &p).unwrap();
        assert_eq!(nf.path, p);
    }

    #[test]
    fn heterogeneous_pair_rewrites_to_its_partner() {
        let g = fixtures::tri(2);
        // p1 => a1 -> c rewrites to p1 -> a2 -> c.
        let p = vec![aid(&g, "t_a1"), aid(&g, "s1_c")];
        let nf = normalize(&g, &p).unwrap();
        assert_eq!(nf.path, vec![aid(&g, "s_a2"), aid(&g, "s2_c")]);
        // Cross-check with the closure oracle: both tuples in one class.
        let class = closure_class(&g, &p);
        assert!(class.contains(&nf.path));
        assert_eq!(class.len(), 2);
    }

    #[test]
    fn op3_three_step_normal_form_shape() {
        let g = fixtures::op3();
        let p = vec![aid(&g, "s_a1"), aid(&g, "s1_n"), aid(&g, "s_w")];
        let nf = normalize(&g, &p).unwrap();
        assert_eq!(nf.target_chain().len(), 1);
        let (o, i) = nf.homogeneous_tail().unwrap();
        assert!(g.pair_is_homogeneous(o, i));
        // The closure oracle agrees on the whole class.
        for t in closure_class(&g, &p) {
            assert_eq!(normalize(&g, &t).unwrap(), nf);
        }
    }

    #[test]
    fn hom_arr_source_to_top_is_a_singleton() {
        let g = fixtures::arr();
        let h = hom(&g, cid(&g, "s"), cid(&g, "a")).unwrap();
        assert_eq!(h.len(), 1);
    }

    #[test]
    fn hom_same_cell_is_identity() {
        let g = fixtures::tri(2);
        let c = cid(&g, "c");
        let h = hom(&g, c, c).unwrap();
        assert_eq!(h.len(), 1);
        assert!(h.iter().next().unwrap().is_identity());
    }

    #[test]
    fn hom_point_to_top_is_a_singleton() {
        let g = fixtures::tri(2);
        let h = hom(&g, cid(&g, "p1"), cid(&g, "c")).unwrap();
        assert_eq!(h.len(), 1);
    }

    #[test]
    fn compose_with_identity_is_identity_law() {
        let g = fixtures::tri(2);
        let f = hom(&g, cid(&g, "p1"), cid(&g, "c"))
            .unwrap()
            .into_iter()
            .next()
            .unwrap();
        let l = compose(&g, &NormalForm::identity(f.dom), &f).unwrap();
        let r = compose(&g, &f, &NormalForm::identity(f.cod)).unwrap();
        assert_eq!(l, f);
        assert_eq!(r, f);
    }

    #[test]
    fn compose_matches_the_spec_example() {
        let g = fixtures::tri(2);
        let inner = normalize(&g, &[aid(&g, "t_a1")]).unwrap();
        let outer = normalize(&g, &[aid(&g, "s1_c")]).unwrap();
        let got = compose(&g, &inner, &outer).unwrap();
        assert_eq!(got.path, vec![aid(&g, "s_a2"), aid(&g, "s2_c")]);
    }

    #[test]
    fn associativity_on_op3_chains() {
        let g = fixtures::op3();
        for path in paths_between(&g, cid(&g, "p0"), cid(&g, "w")) {
            let f = normalize(&g, &path[..1]).unwrap();
            let gg = normalize(&g, &path[1..2]).unwrap();
            let h = normalize(&g, &path[2..]).unwrap();
            let left = compose(&g, &compose(&g, &f, &gg).unwrap(), &h).unwrap();
            let right = compose(&g, &f, &compose(&g, &gg, &h).unwrap()).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn hom_terminates_on_a_degree_violating_cycle() {
        let mut b = crate::graph::GraphBuilder::new();
        let p = b.cell("p", 0);
        let q = b.cell("q", 0);
        let top = b.cell("t", 2);
        b.source("pq", p, q);
        b.source("qp", q, p);
        b.source("in", p, top);
        let g = b.finish();
        assert!(!g.well_formed().is_empty());
        let h = hom(&g, q, top).unwrap();
        assert!(h.len() <= 2);
    }

    #[test]
    fn missing_diamond_is_reported() {
        let g = fixtures::tri(2);
        let (cells, arrows, mut diamonds) = g.parts();
        diamonds.remove(1); // the interior diamond at p1
        let bad = OpetopicGraph::from_parts(cells, arrows, diamonds).unwrap();
        let p = vec![aid(&bad, "t_a1"), aid(&bad, "s1_c")];
        match normalize(&bad, &p) {
            Err(Error::MissingRewrite { .. }) => {}
            other => panic!("expected MissingRewrite, got {other:?}"),
        }
    }

    #[test]
    fn fuel_override_is_respected() {
        let g = {
            let mut g = fixtures::op3();
            g.fuel_override = Some(0);
            g
        };
        let p = [aid(&g, "s_a1"), aid(&g, "t_a1")];
        // A two-step het pair still rewrites (no window involved)...
        assert!(normalize(&g, &[p[0]]).is_ok());
        // ...but any three-step tuple that needs a step trips the zero fuel.
        let q = vec![aid(&g, "s_a1"), aid(&g, "s1_n"), aid(&g, "s_w")];
        match normalize(&g, &q) {
            Err(Error::FuelExhausted { bound: 0, .. }) => {}
            other => panic!("expected FuelExhausted, got {other:?}"),
        }
    }
}

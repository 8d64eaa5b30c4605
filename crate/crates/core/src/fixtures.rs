//! Hand-written presentations used throughout the test suites and as CLI
//! demo inputs: the point, the arrow, the loop, the two-cells with m
//! sources, and the three-cell filler of the one-node pasting diagram on
//! tri2.

use crate::graph::{GraphBuilder, OpetopicGraph};

/// The unique degree-0 opetope: one point, no arrows.
pub fn pt() -> OpetopicGraph {
    let mut b = GraphBuilder::new();
    b.cell("p", 0);
    b.finish()
}

/// The unique degree-1 opetope: `s -> a <- t` with one source and one
/// target arrow.
pub fn arr() -> OpetopicGraph {
    let mut b = GraphBuilder::new();
    let s = b.cell("s", 0);
    let t = b.cell("t", 0);
    let a = b.cell("a", 1);
    b.source("s_a", s, a);
    b.target("t_a", t, a);
    b.finish()
}

/// The degree-2 opetope with `m` sources: points `p0..pm`, source edges
/// `a1..am` chained along the points, target edge `b` from `p0` to `pm`,
/// and top cell `c`. `m = 0` gives the loop: a single point carrying both
/// ends of `b`, and a top cell with no sources.
pub fn tri(m: usize) -> OpetopicGraph {
    tri_named(m, "p", "a", "b", "c")
}

/// The two-cell with no sources. Cells `p`, `b`, `c`; `b` is a loop on `p`.
pub fn loop_() -> OpetopicGraph {
    tri(0)
}

fn tri_named(m: usize, p: &str, a: &str, edge: &str, top: &str) -> OpetopicGraph {
    let mut g = GraphBuilder::new();
    let points: Vec<_> = (0..=m).map(|i| g.cell(&format!("{p}{i}"), 0)).collect();
    let edges: Vec<_> = (1..=m).map(|i| g.cell(&format!("{a}{i}"), 1)).collect();
    let b = g.cell(edge, 1);
    let c = g.cell(top, 2);

    let mut s_edge = Vec::new();
    let mut t_edge = Vec::new();
    for i in 1..=m {
        s_edge.push(g.source(&format!("s_{a}{i}"), points[i - 1], edges[i - 1]));
        t_edge.push(g.target(&format!("t_{a}{i}"), points[i], edges[i - 1]));
    }
    let s_b = g.source(&format!("s_{edge}"), points[0], b);
    let t_b = g.target(&format!("t_{edge}"), points[m], b);
    let s_top: Vec<_> = (1..=m)
        .map(|i| g.source(&format!("s{i}_{top}"), edges[i - 1], c))
        .collect();
    let t_top = g.target(&format!("t_{top}"), b, c);

    // One diamond per point: the two-step arrows into the top cell.
    if m == 0 {
        g.diamond(t_top, s_b, t_top, t_b);
    } else {
        g.diamond(t_top, s_b, s_top[0], s_edge[0]);
        for j in 1..m {
            g.diamond(s_top[j - 1], t_edge[j - 1], s_top[j], s_edge[j]);
        }
        g.diamond(s_top[m - 1], t_edge[m - 1], t_top, t_b);
    }
    g.finish()
}

/// The degree-3 opetope whose source pasting diagram is the one-node
/// diagram on tri2: two parallel tri2-shaped cells `n` (source) and `u`
/// (target) over the same 1-skeleton, filled by the top cell `w`.
pub fn op3() -> OpetopicGraph {
    let mut g = GraphBuilder::new();
    let p0 = g.cell("p0", 0);
    let p1 = g.cell("p1", 0);
    let p2 = g.cell("p2", 0);
    let a1 = g.cell("a1", 1);
    let a2 = g.cell("a2", 1);
    let b = g.cell("b", 1);
    let n = g.cell("n", 2);
    let u = g.cell("u", 2);
    let w = g.cell("w", 3);

    let s_a1 = g.source("s_a1", p0, a1);
    let t_a1 = g.target("t_a1", p1, a1);
    let s_a2 = g.source("s_a2", p1, a2);
    let t_a2 = g.target("t_a2", p2, a2);
    let s_b = g.source("s_b", p0, b);
    let t_b = g.target("t_b", p2, b);

    let s1_n = g.source("s1_n", a1, n);
    let s2_n = g.source("s2_n", a2, n);
    let t_n = g.target("t_n", b, n);
    let s1_u = g.source("s1_u", a1, u);
    let s2_u = g.source("s2_u", a2, u);
    let t_u = g.target("t_u", b, u);

    let s_w = g.source("s_w", n, w);
    let t_w = g.target("t_w", u, w);

    // tri2 diamonds into n and into u.
    g.diamond(t_n, s_b, s1_n, s_a1);
    g.diamond(s1_n, t_a1, s2_n, s_a2);
    g.diamond(s2_n, t_a2, t_n, t_b);
    g.diamond(t_u, s_b, s1_u, s_a1);
    g.diamond(s1_u, t_a1, s2_u, s_a2);
    g.diamond(s2_u, t_a2, t_u, t_b);
    // Two-step arrows into w, one diamond per edge of the shared skeleton.
    g.diamond(s_w, t_n, t_w, t_u);
    g.diamond(t_w, s1_u, s_w, s1_n);
    g.diamond(t_w, s2_u, s_w, s2_n);
    g.finish()
}

/// All seven hand fixtures, with names, in a fixed order.
pub fn all() -> Vec<(&'static str, OpetopicGraph)> {
    vec![
        ("pt", pt()),
        ("arr", arr()),
        ("loop", loop_()),
        ("tri1", tri(1)),
        ("tri2", tri(2)),
        ("tri3", tri(3)),
        ("op3", op3()),
    ]
}

/// Convenience used by tests that need a disjoint union.
pub fn disjoint_union(g: &OpetopicGraph, h: &OpetopicGraph) -> OpetopicGraph {
    use crate::graph::{Cell, Diamond, GenArrow};
    let (gc, ga, gd) = g.parts();
    let (hc, ha, hd) = h.parts();
    let co = gc.len() as u32;
    let ao = ga.len() as u32;
    let mut cells = gc;
    cells.extend(hc.into_iter().map(|c| Cell {
        name: format!("r.{}", c.name),
        degree: c.degree,
    }));
    let mut arrows = ga;
    arrows.extend(ha.into_iter().map(|a| GenArrow {
        name: format!("r.{}", a.name),
        dom: crate::CellId(a.dom.0 + co),
        cod: crate::CellId(a.cod.0 + co),
        polarity: a.polarity,
    }));
    let mut diamonds = gd;
    diamonds.extend(hd.into_iter().map(|d| Diamond {
        het_outer: crate::ArrowId(d.het_outer.0 + ao),
        het_inner: crate::ArrowId(d.het_inner.0 + ao),
        hom_outer: crate::ArrowId(d.hom_outer.0 + ao),
        hom_inner: crate::ArrowId(d.hom_inner.0 + ao),
    }));
    OpetopicGraph::from_parts(cells, arrows, diamonds).unwrap()
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_well_formed() {
        for (name, g) in all() {
            assert!(g.well_formed().is_empty(), "{name} not well formed");
        }
    }

    #[test]
    fn tri_counts() {
        for m in 0..=4 {
            let g = tri(m);
            assert_eq!(g.cell_count(), 2 * m + 3);
            assert_eq!(g.cells_of_degree(0).len(), m + 1);
            assert_eq!(g.cells_of_degree(1).len(), m + 1);
            assert_eq!(g.cells_of_degree(2).len(), 1);
            assert_eq!(g.diamonds().len(), m + 1);
        }
    }
}

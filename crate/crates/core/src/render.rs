//! Plain-text renderers: indented ASCII for decorated trees, DOT for the
//! incidence graphs. Display only; nothing here feeds back into the
//! computations.

use crate::axioms::{ograph, pdgraph};
use crate::codec::{DecoratedTree, TreeInput};
use crate::construct::PastingDiagram;
use crate::graph::{CellId, OpetopicGraph, Polarity};

/// Indented ASCII rendering of a decorated tree.
pub fn ascii_tree(t: &DecoratedTree) -> String {
    let mut out = String::new();
    fn walk(t: &DecoratedTree, prefix: &str, out: &mut String) {
        match t {
            DecoratedTree::Degenerate(c) => {
                out.push_str(prefix);
                out.push_str(&format!("deg {c}\n"));
            }
            DecoratedTree::Node(c, inputs) => {
                out.push_str(prefix);
                out.push_str(&format!("nd {c}\n"));
                let child_prefix = format!("{prefix}  ");
                for i in inputs {
                    match i {
                        TreeInput::Leaf => {
                            out.push_str(&child_prefix);
                            out.push_str("lf\n");
                        }
                        TreeInput::Sub(s) => walk(s, &child_prefix, out),
                    }
                }
            }
        }
    }
    walk(t, "", &mut out);
    out
}

fn edge_style(p: Polarity) -> &'static str {
    match p {
        Polarity::Source => "solid",
        Polarity::Target => "dashed",
    }
}

/// DOT rendering of the node/cell incidence graph of a pasting diagram.
/// Source edges are solid, target edges dashed.
pub fn dot_pdgraph(p: &PastingDiagram) -> String {
    let (verts, edges) = pdgraph(p);
    let g = &p.graph;
    let mut out = String::from("digraph pd {\n");
    for (i, v) in verts.iter().enumerate() {
        let shape = if g.degree(*v) == p.n { "box" } else { "ellipse" };
        out.push_str(&format!(
            "  v{i} [label=\"{}\", shape={shape}];\n",
            g.cell_name(*v)
        ));
    }
    for (a, b) in &edges {
        // Recover the polarity: node -> cell edges are targets.
        let style = if g.degree(verts[*a]) == p.n {
            edge_style(Polarity::Target)
        } else {
            edge_style(Polarity::Source)
        };
        out.push_str(&format!("  v{a} -> v{b} [style={style}];\n"));
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of the source/two-step graph at a cell.
pub fn dot_ograph(g: &OpetopicGraph, x: CellId) -> String {
    let og = ograph(g, x);
    let mut out = String::from("digraph ograph {\n");
    for (i, s) in og.sources.iter().enumerate() {
        out.push_str(&format!(
            "  v{i} [label=\"{}\", shape=ellipse];\n",
            g.arrow(*s).name
        ));
    }
    for (k, class) in og.classes.iter().enumerate() {
        let label: Vec<String> = class
            .iter()
            .map(|(o, i)| format!("{}.{}", g.arrow(*o).name, g.arrow(*i).name))
            .collect();
        let mark = if og.root == Some(og.sources.len() + k) {
            ", penwidth=2"
        } else {
            ""
        };
        out.push_str(&format!(
            "  v{} [label=\"{}\", shape=box{mark}];\n",
            og.sources.len() + k,
            label.join(" = ")
        ));
    }
    for (a, b) in &og.edges {
        out.push_str(&format!("  v{a} -> v{b};\n"));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::shift;
    use crate::codec::Codec;
    use crate::fixtures;

    #[test]
    fn ascii_tree_of_tri2_horn() {
        let mut codec = Codec::new();
        let pd = shift(&fixtures::tri(2)).unwrap();
        let (tree, _) = codec.pd_to_tree(&pd).unwrap();
        let text = ascii_tree(&tree);
        assert!(text.starts_with("nd "));
        let leaf_lines = text.lines().filter(|l| l.trim() == "lf").count();
        assert_eq!(leaf_lines, 2);
    }

    #[test]
    fn dot_outputs_are_well_formed() {
        let g = fixtures::tri(2);
        let pd = shift(&g).unwrap();
        let dot = dot_pdgraph(&pd);
        assert!(dot.starts_with("digraph"));
        assert!(dot.ends_with("}\n"));
        let c = g.cell_by_name("c").unwrap();
        let dot = dot_ograph(&g, c);
        assert!(dot.contains("penwidth=2"));
    }
}

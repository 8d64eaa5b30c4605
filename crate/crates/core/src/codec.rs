//! Canonical tree encodings: pasting diagram <-> decorated tree, textual
//! opetope codes, positional addresses, the four diamond families, and the
//! finite polynomial fragment.
//!
//! Code grammar (ASCII, whitespace-insensitive on input, none on output):
//!
//! ```text
//! code   := "o" | "{" tree "}"
//! tree   := "deg(" code ")" | "nd(" code ")(" inputs ")"
//! inputs := "" | input ("," input)*
//! input  := "lf" | tree
//! ```
//!
//! The sources of an opetope are addressed by the post-order traversal of
//! its horn tree: children first in input order, the root-adjacent node
//! last. Degenerate subtrees are only allowed at the top level; inside a
//! larger tree they are absorbed by the grafting unit.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::axioms::{is_opetope, AxiomLabel, AxiomReport};
use crate::calculus::{degen, graft, shift};
use crate::construct::{boundary, opetope_of_pd, slice, source_horn, PastingDiagram};
use crate::graph::{CellId, Diamond, OpetopicGraph, Polarity};
use crate::{Error, Result};

/// Canonical textual name of an opetope. Lexicographic order on the text is
/// the canonical total order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct OpetopeCode(String);

impl OpetopeCode {
    /// Parse and validate a code.
    pub fn parse(s: &str) -> Result<OpetopeCode> {
        let ast = parse_code(s)?;
        Ok(OpetopeCode(render_code(&ast)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn point() -> OpetopeCode {
        OpetopeCode("o".to_string())
    }

    pub fn is_point(&self) -> bool {
        self.0 == "o"
    }

    fn from_tree(t: &DecoratedTree) -> OpetopeCode {
        OpetopeCode(format!("{{{}}}", render_tree(t)))
    }

    /// The tree inside a non-point code.
    pub fn tree(&self) -> Result<DecoratedTree> {
        match parse_code(&self.0)? {
            CodeAst::Point => Err(Error::Precondition("the point has no tree".into())),
            CodeAst::Tree(t) => Ok(t),
        }
    }

    /// Degree of the encoded opetope: nesting depth of the code.
    pub fn degree(&self) -> u32 {
        fn tree_degree(t: &DecoratedTree) -> u32 {
            match t {
                DecoratedTree::Degenerate(c) => c.degree() + 2,
                DecoratedTree::Node(c, _) => c.degree() + 1,
            }
        }
        match parse_code(&self.0).expect("codes are validated on construction") {
            CodeAst::Point => 0,
            CodeAst::Tree(t) => tree_degree(&t),
        }
    }
}

impl fmt::Display for OpetopeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The tree presentation of a pasting diagram: either degenerate on a
/// shape, or a node decorated by a shape with one input per source address.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum DecoratedTree {
    Degenerate(OpetopeCode),
    Node(OpetopeCode, Vec<TreeInput>),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum TreeInput {
    Leaf,
    Sub(DecoratedTree),
}

impl DecoratedTree {
    pub fn node_count(&self) -> usize {
        match self {
            DecoratedTree::Degenerate(_) => 0,
            DecoratedTree::Node(_, inputs) => {
                1 + inputs
                    .iter()
                    .map(|i| match i {
                        TreeInput::Leaf => 0,
                        TreeInput::Sub(t) => t.node_count(),
                    })
                    .sum::<usize>()
            }
        }
    }

    pub fn render(&self) -> String {
        render_tree(self)
    }
}

enum CodeAst {
    Point,
    Tree(DecoratedTree),
}

fn render_tree(t: &DecoratedTree) -> String {
    match t {
        DecoratedTree::Degenerate(c) => format!("deg({c})"),
        DecoratedTree::Node(c, inputs) => {
            let body: Vec<String> = inputs
                .iter()
                .map(|i| match i {
                    TreeInput::Leaf => "lf".to_string(),
                    TreeInput::Sub(t) => render_tree(t),
                })
                .collect();
            format!("nd({c})({})", body.join(","))
        }
    }
}

fn render_code(c: &CodeAst) -> String {
    match c {
        CodeAst::Point => "o".to_string(),
        CodeAst::Tree(t) => format!("{{{}}}", render_tree(t)),
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::ParseError(format!("{msg} at byte {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, token: &str) -> Result<()> {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            Ok(())
        } else {
            Err(self.err(&format!("expected {token:?}")))
        }
    }

    fn try_eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn code(&mut self) -> Result<CodeAst> {
        if self.try_eat("o") {
            return Ok(CodeAst::Point);
        }
        self.eat("{")?;
        let t = self.tree(true)?;
        self.eat("}")?;
        Ok(CodeAst::Tree(t))
    }

    fn tree(&mut self, top_level: bool) -> Result<DecoratedTree> {
        if self.try_eat("deg(") {
            if !top_level {
                return Err(self.err("degenerate subtree below the top level"));
            }
            let c = self.code()?;
            self.eat(")")?;
            return Ok(DecoratedTree::Degenerate(OpetopeCode(render_code(&c))));
        }
        self.eat("nd(")?;
        let c = self.code()?;
        self.eat(")")?;
        self.eat("(")?;
        let mut inputs = Vec::new();
        if self.peek() != Some(b')') {
            loop {
                if self.try_eat("lf") {
                    inputs.push(TreeInput::Leaf);
                } else {
                    inputs.push(TreeInput::Sub(self.tree(false)?));
                }
                if !self.try_eat(",") {
                    break;
                }
            }
        }
        self.eat(")")?;
        Ok(DecoratedTree::Node(OpetopeCode(render_code(&c)), inputs))
    }
}

fn parse_code(s: &str) -> Result<CodeAst> {
    let mut p = Parser {
        src: s.as_bytes(),
        pos: 0,
    };
    let c = p.code()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(c)
}

/// A decoded opetope: the canonical graph, its terminal cell, and its
/// source cells in address order.
#[derive(Clone, Debug)]
pub struct DecodedOpetope {
    pub graph: OpetopicGraph,
    pub top: CellId,
    pub sources: Vec<CellId>,
}

/// A pasted tree: the diagram and its top cells in post-order.
#[derive(Clone, Debug)]
pub struct AddressedPd {
    pub pd: PastingDiagram,
    pub node_cells: Vec<CellId>,
}

/// Encoder/decoder with a per-instance memo. All operations are pure; the
/// cache only avoids re-decoding shared subcodes.
#[derive(Default)]
pub struct Codec {
    decode_memo: HashMap<String, DecodedOpetope>,
    target_memo: HashMap<String, OpetopeCode>,
    source_memo: HashMap<String, Vec<OpetopeCode>>,
}

impl Codec {
    pub fn new() -> Codec {
        Codec::default()
    }

    /// Canonical code of an opetope.
    pub fn encode(&mut self, g: &OpetopicGraph) -> Result<OpetopeCode> {
        Ok(self.encode_addressed(g)?.0)
    }

    /// Canonical code plus the source cells of `g` in address order.
    pub fn encode_addressed(&mut self, g: &OpetopicGraph) -> Result<(OpetopeCode, Vec<CellId>)> {
        let top = is_opetope(g)
            .ok_or_else(|| Error::Precondition("encode requires an opetope".into()))?;
        if g.degree(top) == 0 {
            return Ok((OpetopeCode::point(), Vec::new()));
        }
        let b = boundary(g)?;
        let horn = source_horn(&b)?;
        let (tree, nodes) = self.pd_to_tree(&horn)?;
        let sources = nodes
            .iter()
            .map(|c| {
                g.cell_by_name(horn.graph.cell_name(*c))
                    .expect("horn cells keep their names")
            })
            .collect();
        Ok((OpetopeCode::from_tree(&tree), sources))
    }

    /// Tree of a pasting diagram, with its top cells in post-order.
    pub fn pd_to_tree(&mut self, p: &PastingDiagram) -> Result<(DecoratedTree, Vec<CellId>)> {
        let tops = p.top_cells();
        if p.n == 0 {
            // A 0-diagram is a single point; its tree is one bare node.
            if tops.len() != 1 {
                return Err(Error::Precondition(
                    "a 0-diagram must have exactly one cell".into(),
                ));
            }
            let (sl, _) = slice(&p.graph, tops[0])?;
            let code = self.encode(&sl)?;
            return Ok((DecoratedTree::Node(code, Vec::new()), tops));
        }
        if tops.is_empty() {
            if p.n == 0 {
                return Err(Error::Precondition(
                    "a 0-diagram cannot be degenerate".into(),
                ));
            }
            let below = p.graph.cells_of_degree(p.n - 1);
            if below.len() != 1 {
                return Err(Error::Precondition(
                    "degenerate diagram without a unique cell below the top".into(),
                ));
            }
            let (sl, _) = slice(&p.graph, below[0])?;
            let code = self.encode(&sl)?;
            return Ok((DecoratedTree::Degenerate(code), Vec::new()));
        }
        let root_obj = p
            .root_object()
            .ok_or_else(|| Error::Precondition("no unique root object".into()))?;
        let root_node = tops
            .iter()
            .copied()
            .find(|y| {
                p.graph
                    .target_arrow_into(*y)
                    .map(|t| p.graph.arrow(t).dom == root_obj)
                    .unwrap_or(false)
            })
            .ok_or_else(|| Error::Precondition("no node adjacent to the root object".into()))?;
        let mut nodes = Vec::new();
        let tree = self.subtree_at(p, root_node, &mut nodes, 0)?;
        Ok((tree, nodes))
    }

    fn subtree_at(
        &mut self,
        p: &PastingDiagram,
        y: CellId,
        nodes: &mut Vec<CellId>,
        depth: u32,
    ) -> Result<DecoratedTree> {
        if depth as usize > p.graph.cell_count() {
            return Err(Error::Precondition(
                "diagram tree recursion exceeds the cell count".into(),
            ));
        }
        let g = &p.graph;
        let (sl, proj) = slice(g, y)?;
        let (code, sl_sources) = self.encode_addressed(&sl)?;
        let mut inputs = Vec::new();
        for s in sl_sources {
            let z = proj.apply(s);
            // The node hanging below z, if z is not a leaf: the top cell
            // whose target arrow comes from z.
            let child = g.arrows_from(z).iter().copied().find(|a| {
                g.arrow(*a).polarity == Polarity::Target && g.degree(g.arrow(*a).cod) == p.n
            });
            match child {
                None => inputs.push(TreeInput::Leaf),
                Some(a) => {
                    let sub = self.subtree_at(p, g.arrow(a).cod, nodes, depth + 1)?;
                    inputs.push(TreeInput::Sub(sub));
                }
            }
        }
        nodes.push(y);
        Ok(DecoratedTree::Node(code, inputs))
    }

    /// Canonical code of a pasting diagram (the rendered tree).
    pub fn pd_code(&mut self, p: &PastingDiagram) -> Result<String> {
        Ok(self.pd_to_tree(p)?.0.render())
    }

    /// Paste a tree back into a pasting diagram.
    pub fn tree_to_pd(&mut self, t: &DecoratedTree) -> Result<AddressedPd> {
        match t {
            DecoratedTree::Degenerate(c) => {
                let d = self.decode(c)?;
                Ok(AddressedPd {
                    pd: degen(&d.graph)?,
                    node_cells: Vec::new(),
                })
            }
            DecoratedTree::Node(c, inputs) => {
                let d = self.decode(c)?.clone();
                if inputs.len() != d.sources.len() {
                    return Err(Error::ParseError(format!(
                        "node {c} expects {} inputs, got {}",
                        d.sources.len(),
                        inputs.len()
                    )));
                }
                let shapes = self.source_shapes(c)?;
                let base = shift(&d.graph)?;
                let mut parts = BTreeMap::new();
                let mut subs: Vec<(usize, CellId, AddressedPd)> = Vec::new();
                for (i, input) in inputs.iter().enumerate() {
                    let TreeInput::Sub(sub) = input else { continue };
                    let root_code = match sub {
                        DecoratedTree::Node(c2, _) => c2.clone(),
                        DecoratedTree::Degenerate(_) => {
                            return Err(Error::ParseError(
                                "degenerate subtree below the top level".into(),
                            ))
                        }
                    };
                    let got = self.target_shape(&root_code)?;
                    if got != shapes[i] {
                        return Err(Error::ShapeMismatch {
                            address: i,
                            expected: shapes[i].to_string(),
                            got: got.to_string(),
                        });
                    }
                    let apd = self.tree_to_pd(sub)?;
                    parts.insert(d.sources[i], apd.pd.clone());
                    subs.push((i, d.sources[i], apd));
                }
                let out = graft(&base, &parts)?;
                let mut node_cells = Vec::new();
                for i in 0..inputs.len() {
                    if let Some((_, z, apd)) = subs.iter().find(|(j, _, _)| *j == i) {
                        let leg = &out.part_legs[z];
                        node_cells.extend(apd.node_cells.iter().map(|n| leg.apply(*n)));
                    }
                }
                node_cells.push(out.base_leg.apply(d.top));
                Ok(AddressedPd {
                    pd: out.pd,
                    node_cells,
                })
            }
        }
    }

    /// Decode a code into its canonical opetope.
    pub fn decode(&mut self, c: &OpetopeCode) -> Result<DecodedOpetope> {
        if let Some(d) = self.decode_memo.get(c.as_str()) {
            return Ok(d.clone());
        }
        let out = match parse_code(c.as_str())? {
            CodeAst::Point => {
                let g = OpetopicGraph::from_parts(
                    vec![crate::graph::Cell {
                        name: "x0".to_string(),
                        degree: 0,
                    }],
                    vec![],
                    vec![],
                )?;
                DecodedOpetope {
                    top: CellId(0),
                    sources: Vec::new(),
                    graph: g,
                }
            }
            CodeAst::Tree(t) => {
                let apd = self.tree_to_pd(&t)?;
                let res = opetope_of_pd(&apd.pd)?;
                let sources = apd
                    .node_cells
                    .iter()
                    .map(|n| res.pd_injection.apply(*n))
                    .collect();
                DecodedOpetope {
                    graph: res.graph,
                    top: res.top,
                    sources,
                }
            }
        };
        self.decode_memo.insert(c.as_str().to_string(), out.clone());
        Ok(out)
    }

    /// Shape of a cell: the code of the slice at it.
    pub fn shape_of(&mut self, g: &OpetopicGraph, x: CellId) -> Result<OpetopeCode> {
        let (sl, _) = slice(g, x)?;
        self.encode(&sl)
    }

    /// The shape of the target of a non-point code.
    pub fn target_shape(&mut self, c: &OpetopeCode) -> Result<OpetopeCode> {
        if let Some(t) = self.target_memo.get(c.as_str()) {
            return Ok(t.clone());
        }
        if c.is_point() {
            return Err(Error::Precondition("the point has no target".into()));
        }
        let d = self.decode(c)?;
        let t_arrow = d
            .graph
            .target_arrow_into(d.top)
            .ok_or_else(|| Error::Precondition("decoded opetope has no target".into()))?;
        let out = self.shape_of(&d.graph, d.graph.arrow(t_arrow).dom)?;
        self.target_memo.insert(c.as_str().to_string(), out.clone());
        Ok(out)
    }

    /// Shapes of the sources of a code, in address order.
    pub fn source_shapes(&mut self, c: &OpetopeCode) -> Result<Vec<OpetopeCode>> {
        if let Some(s) = self.source_memo.get(c.as_str()) {
            return Ok(s.clone());
        }
        let d = self.decode(c)?.clone();
        let mut out = Vec::new();
        for s in &d.sources {
            out.push(self.shape_of(&d.graph, *s)?);
        }
        self.source_memo.insert(c.as_str().to_string(), out.clone());
        Ok(out)
    }

    /// Exact cell count of the decoded opetope, computed from the code.
    pub fn code_cell_count(&mut self, c: &OpetopeCode) -> Result<usize> {
        if c.is_point() {
            return Ok(1);
        }
        let t = c.tree()?;
        Ok(self.tree_cell_count(&t)? + 2)
    }

    /// Cell count of the pasted tree.
    pub fn tree_cell_count(&mut self, t: &DecoratedTree) -> Result<usize> {
        match t {
            DecoratedTree::Degenerate(c) => self.code_cell_count(c),
            DecoratedTree::Node(c, inputs) => {
                let shapes = self.source_shapes(c)?;
                let mut total = self.code_cell_count(c)?;
                for (i, input) in inputs.iter().enumerate() {
                    if let TreeInput::Sub(sub) = input {
                        total += self.tree_cell_count(sub)? - self.code_cell_count(&shapes[i])?;
                    }
                }
                Ok(total)
            }
        }
    }
}

/// One-off encode with a fresh codec.
pub fn encode(g: &OpetopicGraph) -> Result<OpetopeCode> {
    Codec::new().encode(g)
}

/// One-off decode with a fresh codec.
pub fn decode(c: &OpetopeCode) -> Result<DecodedOpetope> {
    Codec::new().decode(c)
}

/// The four relation families, classified by the polarity pattern of the
/// diamond `(f1, g1, f2, g2)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum DiamondFamily {
    Inner,
    Glob1,
    Glob2,
    Degen,
}

impl fmt::Display for DiamondFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DiamondFamily::Inner => "Inner",
            DiamondFamily::Glob1 => "Glob1",
            DiamondFamily::Glob2 => "Glob2",
            DiamondFamily::Degen => "Degen",
        };
        f.write_str(s)
    }
}

/// Classify a diamond whose pairs satisfy the het/hom invariants. Exactly
/// one family applies: the heterogeneous pair fixes two of the four
/// patterns and the homogeneous pair picks between them.
pub fn classify_diamond(g: &OpetopicGraph, d: &Diamond) -> Result<DiamondFamily> {
    if !g.diamond_is_well_formed(d) {
        return Err(Error::Precondition("diamond is malformed".into()));
    }
    let f1 = g.arrow(d.het_outer).polarity;
    let f2 = g.arrow(d.hom_outer).polarity;
    Ok(match (f1, f2) {
        (Polarity::Source, Polarity::Source) => DiamondFamily::Inner,
        (Polarity::Source, Polarity::Target) => DiamondFamily::Glob1,
        (Polarity::Target, Polarity::Source) => DiamondFamily::Glob2,
        (Polarity::Target, Polarity::Target) => DiamondFamily::Degen,
    })
}

/// A finite polynomial presentation: colors, and nodes with addressed
/// inputs and a target, all by index into `colors`.
#[derive(Clone, Debug)]
pub struct Polynomial {
    pub colors: Vec<String>,
    pub nodes: Vec<PolyNode>,
}

#[derive(Clone, Debug)]
pub struct PolyNode {
    pub name: String,
    pub inputs: Vec<usize>,
    pub target: usize,
}

/// PT1-PT3 plus the leaf/root characterizations.
pub fn check_polynomial_tree(
    p: &Polynomial,
    expected_leaves: Option<&BTreeSet<usize>>,
    expected_root: Option<usize>,
) -> AxiomReport {
    let mut r = AxiomReport::default();
    for l in [AxiomLabel::Pt1, AxiomLabel::Pt2, AxiomLabel::Pt3] {
        r.mark_checked(l);
    }
    // PT1: finiteness is intrinsic to the data; out-of-range indices are
    // structural problems.
    for n in &p.nodes {
        for i in n.inputs.iter().chain(std::iter::once(&n.target)) {
            if *i >= p.colors.len() {
                r.structural
                    .push(format!("node {} references a missing color", n.name));
            }
        }
    }
    if !r.structural.is_empty() {
        return r;
    }

    // PT2: target and source maps are injective.
    let mut target_seen: BTreeMap<usize, &str> = BTreeMap::new();
    for n in &p.nodes {
        if let Some(prev) = target_seen.insert(n.target, &n.name) {
            r.fail(
                AxiomLabel::Pt2,
                format!(
                    "nodes {prev} and {} share the target color {}",
                    n.name, p.colors[n.target]
                ),
            );
        }
    }
    let mut source_seen: BTreeMap<usize, String> = BTreeMap::new();
    for n in &p.nodes {
        for (k, i) in n.inputs.iter().enumerate() {
            let here = format!("{}[{k}]", n.name);
            if let Some(prev) = source_seen.insert(*i, here.clone()) {
                r.fail(
                    AxiomLabel::Pt2,
                    format!(
                        "inputs {prev} and {here} share the source color {}",
                        p.colors[*i]
                    ),
                );
            }
        }
    }

    // PT3: the incidence graph is a tree rooted at the color outside the
    // source image.
    let nv = p.colors.len() + p.nodes.len();
    let mut edges = Vec::new();
    for (ni, n) in p.nodes.iter().enumerate() {
        for i in &n.inputs {
            edges.push((*i, p.colors.len() + ni));
        }
        edges.push((p.colors.len() + ni, n.target));
    }
    let root_candidates: Vec<usize> = (0..p.colors.len())
        .filter(|i| !source_seen.contains_key(i))
        .collect();
    if root_candidates.len() != 1 {
        r.fail(
            AxiomLabel::Pt3,
            format!(
                "{} colors outside the source image",
                root_candidates.len()
            ),
        );
    } else {
        let root = root_candidates[0];
        if let Some(why) = tree_failure(nv, &edges, root) {
            r.fail(AxiomLabel::Pt3, why);
        }
        if let Some(expected) = expected_root {
            if expected != root {
                r.fail(
                    AxiomLabel::Pt3,
                    format!(
                        "root is {}, expected {}",
                        p.colors[root], p.colors[expected]
                    ),
                );
            }
        }
    }
    if let Some(expected) = expected_leaves {
        let leaves: BTreeSet<usize> = (0..p.colors.len())
            .filter(|i| !target_seen.contains_key(i))
            .collect();
        if &leaves != expected {
            r.fail(
                AxiomLabel::Pt3,
                format!(
                    "leaves {:?} differ from the expected {:?}",
                    leaves, expected
                ),
            );
        }
    }
    r
}

fn tree_failure(nv: usize, edges: &[(usize, usize)], root: usize) -> Option<String> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (a, b) in edges {
        out[*a].push(*b);
    }
    if !out[root].is_empty() {
        return Some("root has an outgoing edge".to_string());
    }
    for v in 0..nv {
        if v != root && out[v].len() != 1 {
            return Some(format!("vertex {v} has out-degree {}", out[v].len()));
        }
    }
    for mut v in 0..nv {
        let mut steps = 0;
        while v != root {
            v = out[v][0];
            steps += 1;
            if steps > nv {
                return Some("edges cycle without reaching the root".to_string());
            }
        }
    }
    None
}

/// The polynomial underlying a pasting diagram: colors are the
/// codimension-1 cells, nodes the top cells with inputs in address order.
pub fn polynomial_of_pd(codec: &mut Codec, p: &PastingDiagram) -> Result<Polynomial> {
    let g = &p.graph;
    if p.n == 0 {
        return Ok(Polynomial {
            colors: g
                .cells_of_degree(0)
                .iter()
                .map(|c| g.cell_name(*c).to_string())
                .collect(),
            nodes: Vec::new(),
        });
    }
    let colors: Vec<CellId> = g.cells_of_degree(p.n - 1);
    let index: BTreeMap<CellId, usize> = colors.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut nodes = Vec::new();
    for y in p.top_cells() {
        let (sl, proj) = slice(g, y)?;
        let (_, sl_sources) = codec.encode_addressed(&sl)?;
        let inputs = sl_sources
            .iter()
            .map(|s| index[&proj.apply(*s)])
            .collect();
        let t = g
            .target_arrow_into(y)
            .ok_or_else(|| Error::Precondition("node without a target".into()))?;
        nodes.push(PolyNode {
            name: g.cell_name(y).to_string(),
            inputs,
            target: index[&g.arrow(t).dom],
        });
    }
    Ok(Polynomial {
        colors: colors.iter().map(|c| g.cell_name(*c).to_string()).collect(),
        nodes,
    })
}

/// The fragment of the opetope polynomial spanned by a set of
/// degree-(n+1) codes: colors are all source and target shapes, inputs in
/// address order.
#[derive(Clone, Debug)]
pub struct PolyFragment {
    pub colors: BTreeSet<OpetopeCode>,
    pub nodes: Vec<FragmentNode>,
}

#[derive(Clone, Debug)]
pub struct FragmentNode {
    pub code: OpetopeCode,
    pub inputs: Vec<OpetopeCode>,
    pub target: OpetopeCode,
}

pub fn poly_fragment(codec: &mut Codec, codes: &BTreeSet<OpetopeCode>) -> Result<PolyFragment> {
    let mut colors = BTreeSet::new();
    let mut nodes = Vec::new();
    for c in codes {
        let inputs = codec.source_shapes(c)?;
        let target = codec.target_shape(c)?;
        colors.extend(inputs.iter().cloned());
        colors.insert(target.clone());
        nodes.push(FragmentNode {
            code: c.clone(),
            inputs,
            target,
        });
    }
    Ok(PolyFragment { colors, nodes })
}

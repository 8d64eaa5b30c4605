//! The `.ost` document format: a JSON text layout with a fixed key order on
//! serialization, covering opetopic sets, boundaries, pasting diagrams,
//! opetope codes, and morphisms. Parsing rejects unknown fields; canonical
//! documents round-trip byte-exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codec::OpetopeCode;
use crate::construct::{Boundary, PastingDiagram};
use crate::graph::{ArrowId, Cell, CellId, Diamond, GenArrow, Morphism, OpetopicGraph, Polarity};
use crate::{Error, Result};

pub const FORMAT_VERSION: &str = "1";

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocKind {
    OpetopicSet,
    Boundary,
    PastingDiagram,
    OpetopeCode,
    Morphism,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellDoc {
    pub id: String,
    pub degree: u32,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowDoc {
    pub id: String,
    pub dom: String,
    pub cod: String,
    pub polarity: PolarityDoc,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarityDoc {
    Source,
    Target,
}

impl From<Polarity> for PolarityDoc {
    fn from(p: Polarity) -> PolarityDoc {
        match p {
            Polarity::Source => PolarityDoc::Source,
            Polarity::Target => PolarityDoc::Target,
        }
    }
}

impl From<PolarityDoc> for Polarity {
    fn from(p: PolarityDoc) -> Polarity {
        match p {
            PolarityDoc::Source => Polarity::Source,
            PolarityDoc::Target => Polarity::Target,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiamondDoc {
    pub het_outer: String,
    pub het_inner: String,
    pub hom_outer: String,
    pub hom_inner: String,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub cells: Vec<CellDoc>,
    pub arrows: Vec<ArrowDoc>,
    pub diamonds: Vec<DiamondDoc>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    pub source: GraphDoc,
    pub target: GraphDoc,
    pub cell_map: BTreeMap<String, String>,
    pub arrow_map: BTreeMap<String, String>,
}

/// One `.ost` document. Exactly the fields of the declared kind are
/// populated; the rest stay empty and are omitted from the output.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub format_version: String,
    pub kind: DocKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphDoc>,
    /// Boundary or diagram degree.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// Boundary marking: cell id to polarity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marking: Option<BTreeMap<String, PolarityDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leaves: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub morphism: Option<MorphismDoc>,
}

fn graph_to_doc(g: &OpetopicGraph) -> GraphDoc {
    // Fixed order: cells by degree then id, arrows by id, diamonds by
    // het_outer id.
    let mut cells: Vec<CellDoc> = g
        .cell_ids()
        .map(|c| CellDoc {
            id: g.cell_name(c).to_string(),
            degree: g.degree(c),
        })
        .collect();
    cells.sort_by(|a, b| (a.degree, &a.id).cmp(&(b.degree, &b.id)));
    let mut arrows: Vec<ArrowDoc> = g
        .arrow_ids()
        .map(|a| {
            let ar = g.arrow(a);
            ArrowDoc {
                id: ar.name.clone(),
                dom: g.cell_name(ar.dom).to_string(),
                cod: g.cell_name(ar.cod).to_string(),
                polarity: ar.polarity.into(),
            }
        })
        .collect();
    arrows.sort_by(|a, b| a.id.cmp(&b.id));
    let mut diamonds: Vec<DiamondDoc> = g
        .diamonds()
        .iter()
        .map(|d| DiamondDoc {
            het_outer: g.arrow(d.het_outer).name.clone(),
            het_inner: g.arrow(d.het_inner).name.clone(),
            hom_outer: g.arrow(d.hom_outer).name.clone(),
            hom_inner: g.arrow(d.hom_inner).name.clone(),
        })
        .collect();
    diamonds.sort_by(|a, b| a.het_outer.cmp(&b.het_outer));
    GraphDoc {
        cells,
        arrows,
        diamonds,
    }
}

fn graph_from_doc(doc: &GraphDoc) -> Result<OpetopicGraph> {
    let cells: Vec<Cell> = doc
        .cells
        .iter()
        .map(|c| Cell {
            name: c.id.clone(),
            degree: c.degree,
        })
        .collect();
    let mut cell_index: BTreeMap<&str, CellId> = BTreeMap::new();
    for (i, c) in doc.cells.iter().enumerate() {
        if cell_index.insert(&c.id, CellId(i as u32)).is_some() {
            return Err(Error::ParseError(format!("duplicate cell id {:?}", c.id)));
        }
    }
    let lookup_cell = |name: &str| -> Result<CellId> {
        cell_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::ParseError(format!("unknown cell id {name:?}")))
    };
    let mut arrows = Vec::new();
    let mut arrow_index: BTreeMap<&str, ArrowId> = BTreeMap::new();
    for (i, a) in doc.arrows.iter().enumerate() {
        if arrow_index.insert(&a.id, ArrowId(i as u32)).is_some() {
            return Err(Error::ParseError(format!("duplicate arrow id {:?}", a.id)));
        }
        arrows.push(GenArrow {
            name: a.id.clone(),
            dom: lookup_cell(&a.dom)?,
            cod: lookup_cell(&a.cod)?,
            polarity: a.polarity.into(),
        });
    }
    let lookup_arrow = |name: &str| -> Result<ArrowId> {
        arrow_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::ParseError(format!("unknown arrow id {name:?}")))
    };
    let mut diamonds = Vec::new();
    for d in &doc.diamonds {
        diamonds.push(Diamond {
            het_outer: lookup_arrow(&d.het_outer)?,
            het_inner: lookup_arrow(&d.het_inner)?,
            hom_outer: lookup_arrow(&d.hom_outer)?,
            hom_inner: lookup_arrow(&d.hom_inner)?,
        });
    }
    OpetopicGraph::from_parts(cells, arrows, diamonds)
}

fn empty_document(kind: DocKind) -> Document {
    Document {
        format_version: FORMAT_VERSION.to_string(),
        kind,
        graph: None,
        n: None,
        marking: None,
        leaves: None,
        roots: None,
        code: None,
        morphism: None,
    }
}

pub fn opetopic_set_document(g: &OpetopicGraph) -> Document {
    Document {
        graph: Some(graph_to_doc(g)),
        ..empty_document(DocKind::OpetopicSet)
    }
}

pub fn boundary_document(b: &Boundary) -> Document {
    Document {
        graph: Some(graph_to_doc(&b.graph)),
        n: Some(b.n),
        marking: Some(
            b.marking
                .iter()
                .map(|(c, p)| (b.graph.cell_name(*c).to_string(), (*p).into()))
                .collect(),
        ),
        ..empty_document(DocKind::Boundary)
    }
}

pub fn pasting_diagram_document(p: &PastingDiagram) -> Document {
    let names = |marks: &[CellId]| -> Vec<String> {
        let mut v: Vec<String> = marks
            .iter()
            .map(|c| p.graph.cell_name(*c).to_string())
            .collect();
        v.sort();
        v
    };
    Document {
        graph: Some(graph_to_doc(&p.graph)),
        n: Some(p.n),
        leaves: Some(names(&p.leaves)),
        roots: Some(names(&p.roots)),
        ..empty_document(DocKind::PastingDiagram)
    }
}

pub fn code_document(code: &OpetopeCode) -> Document {
    Document {
        code: Some(code.to_string()),
        ..empty_document(DocKind::OpetopeCode)
    }
}

pub fn morphism_document(f: &Morphism) -> Document {
    Document {
        morphism: Some(MorphismDoc {
            source: graph_to_doc(&f.source),
            target: graph_to_doc(&f.target),
            cell_map: f
                .source
                .cell_ids()
                .map(|c| {
                    (
                        f.source.cell_name(c).to_string(),
                        f.target.cell_name(f.apply(c)).to_string(),
                    )
                })
                .collect(),
            arrow_map: f
                .source
                .arrow_ids()
                .map(|a| {
                    (
                        f.source.arrow(a).name.clone(),
                        f.target.arrow(f.apply_arrow(a)).name.clone(),
                    )
                })
                .collect(),
        }),
        ..empty_document(DocKind::Morphism)
    }
}

/// The payload of a parsed document.
pub enum Payload {
    OpetopicSet(OpetopicGraph),
    Boundary(Boundary),
    PastingDiagram(PastingDiagram),
    Code(OpetopeCode),
    Morphism(Morphism),
}

impl Document {
    /// Decode the payload, validating kind/field consistency.
    pub fn payload(&self) -> Result<Payload> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::VersionError(self.format_version.clone()));
        }
        let need_graph = || {
            self.graph
                .as_ref()
                .ok_or_else(|| Error::ParseError("missing graph".into()))
        };
        let forbid = |cond: bool, what: &str| {
            if cond {
                Err(Error::ParseError(format!(
                    "field {what} is not allowed for kind {:?}",
                    self.kind
                )))
            } else {
                Ok(())
            }
        };
        match self.kind {
            DocKind::OpetopicSet => {
                forbid(self.n.is_some(), "n")?;
                forbid(self.marking.is_some(), "marking")?;
                forbid(self.leaves.is_some() || self.roots.is_some(), "leaves/roots")?;
                forbid(self.code.is_some(), "code")?;
                forbid(self.morphism.is_some(), "morphism")?;
                Ok(Payload::OpetopicSet(graph_from_doc(need_graph()?)?))
            }
            DocKind::Boundary => {
                forbid(self.leaves.is_some() || self.roots.is_some(), "leaves/roots")?;
                forbid(self.code.is_some(), "code")?;
                forbid(self.morphism.is_some(), "morphism")?;
                let graph = graph_from_doc(need_graph()?)?;
                let n = self
                    .n
                    .ok_or_else(|| Error::ParseError("missing n".into()))?;
                let mut marking = BTreeMap::new();
                for (name, p) in self
                    .marking
                    .as_ref()
                    .ok_or_else(|| Error::ParseError("missing marking".into()))?
                {
                    let c = graph
                        .cell_by_name(name)
                        .ok_or_else(|| Error::ParseError(format!("unknown cell id {name:?}")))?;
                    marking.insert(c, (*p).into());
                }
                Ok(Payload::Boundary(Boundary { graph, n, marking }))
            }
            DocKind::PastingDiagram => {
                forbid(self.marking.is_some(), "marking")?;
                forbid(self.code.is_some(), "code")?;
                forbid(self.morphism.is_some(), "morphism")?;
                let graph = graph_from_doc(need_graph()?)?;
                let n = self
                    .n
                    .ok_or_else(|| Error::ParseError("missing n".into()))?;
                let lookup = |names: &Option<Vec<String>>, what: &str| -> Result<Vec<CellId>> {
                    let mut out = Vec::new();
                    for name in names
                        .as_ref()
                        .ok_or_else(|| Error::ParseError(format!("missing {what}")))?
                    {
                        out.push(graph.cell_by_name(name).ok_or_else(|| {
                            Error::ParseError(format!("unknown cell id {name:?}"))
                        })?);
                    }
                    out.sort();
                    Ok(out)
                };
                let leaves = lookup(&self.leaves, "leaves")?;
                let roots = lookup(&self.roots, "roots")?;
                Ok(Payload::PastingDiagram(PastingDiagram {
                    graph,
                    n,
                    leaves,
                    roots,
                }))
            }
            DocKind::OpetopeCode => {
                forbid(self.graph.is_some(), "graph")?;
                forbid(self.n.is_some(), "n")?;
                forbid(self.morphism.is_some(), "morphism")?;
                let code = self
                    .code
                    .as_ref()
                    .ok_or_else(|| Error::ParseError("missing code".into()))?;
                Ok(Payload::Code(OpetopeCode::parse(code)?))
            }
            DocKind::Morphism => {
                forbid(self.graph.is_some(), "graph")?;
                forbid(self.code.is_some(), "code")?;
                let m = self
                    .morphism
                    .as_ref()
                    .ok_or_else(|| Error::ParseError("missing morphism".into()))?;
                let source = graph_from_doc(&m.source)?;
                let target = graph_from_doc(&m.target)?;
                let mut cell_map = vec![CellId(0); source.cell_count()];
                for (from, to) in &m.cell_map {
                    let f = source
                        .cell_by_name(from)
                        .ok_or_else(|| Error::ParseError(format!("unknown cell id {from:?}")))?;
                    let t = target
                        .cell_by_name(to)
                        .ok_or_else(|| Error::ParseError(format!("unknown cell id {to:?}")))?;
                    cell_map[f.0 as usize] = t;
                }
                if m.cell_map.len() != source.cell_count() {
                    return Err(Error::ParseError("incomplete cell map".into()));
                }
                let mut arrow_map = vec![ArrowId(0); source.arrow_count()];
                for (from, to) in &m.arrow_map {
                    let f = source
                        .arrow_by_name(from)
                        .ok_or_else(|| Error::ParseError(format!("unknown arrow id {from:?}")))?;
                    let t = target
                        .arrow_by_name(to)
                        .ok_or_else(|| Error::ParseError(format!("unknown arrow id {to:?}")))?;
                    arrow_map[f.0 as usize] = t;
                }
                if m.arrow_map.len() != source.arrow_count() {
                    return Err(Error::ParseError("incomplete arrow map".into()));
                }
                Ok(Payload::Morphism(Morphism {
                    source,
                    target,
                    cell_map,
                    arrow_map,
                }))
            }
        }
    }
}

/// Parse a document from JSON text. Errors carry the line and column.
pub fn parse(text: &str) -> Result<Document> {
    let doc: Document = serde_json::from_str(text)
        .map_err(|e| Error::ParseError(format!("{e} (line {}, column {})", e.line(), e.column())))?;
    // Surface payload-level problems (duplicate ids, kind mismatches) now.
    doc.payload()?;
    Ok(doc)
}

/// Serialize a document to canonical JSON text (two-space indentation and a
/// trailing newline).
pub fn serialize(doc: &Document) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("documents are serializable");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::boundary;
    use crate::fixtures;
    use crate::graph::validate_morphism;
    use proptest::prelude::*;

    #[test]
    fn tri2_round_trips_byte_exactly() {
        let g = fixtures::tri(2);
        let text = serialize(&opetopic_set_document(&g));
        let doc = parse(&text).unwrap();
        assert_eq!(serialize(&doc), text);
        let Payload::OpetopicSet(back) = doc.payload().unwrap() else {
            panic!("wrong payload")
        };
        // Ids and structure survive; the graph re-serializes identically.
        assert_eq!(serialize(&opetopic_set_document(&back)), text);
        for c in g.cell_ids() {
            assert!(back.cell_by_name(g.cell_name(c)).is_some());
        }
    }

    #[test]
    fn duplicate_cell_id_is_rejected_by_name() {
        let text = r#"{
  "format_version": "1",
  "kind": "opetopic_set",
  "graph": {
    "cells": [{"id": "p", "degree": 0}, {"id": "p", "degree": 0}],
    "arrows": [],
    "diamonds": []
  }
}"#;
        match parse(text) {
            Err(Error::ParseError(msg)) => assert!(msg.contains("\"p\""), "{msg}"),
            other => panic!("expected ParseError, got {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"format_version": "1", "kind": "opetope_code", "code": "o", "shiny": true}"#;
        assert!(parse(text).is_err());
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let text = r#"{"format_version": "99", "kind": "opetope_code", "code": "o"}"#;
        match parse(text) {
            Err(Error::VersionError(v)) => assert_eq!(v, "99"),
            other => panic!("expected VersionError, got {other:?}"),
        }
    }

    #[test]
    fn code_document_decodes_to_the_loop() {
        let doc = parse(r#"{"format_version": "1", "kind": "opetope_code", "code": "{deg(o)}"}"#)
            .unwrap();
        let Payload::Code(code) = doc.payload().unwrap() else {
            panic!("wrong payload")
        };
        let d = crate::codec::decode(&code).unwrap();
        assert!(
            crate::graph::find_isomorphism(&d.graph, &fixtures::loop_())
                .unwrap()
                .is_some()
        );
    }

    #[test]
    fn boundary_and_morphism_documents_round_trip() {
        let b = boundary(&fixtures::tri(2)).unwrap();
        let text = serialize(&boundary_document(&b));
        let doc = parse(&text).unwrap();
        assert_eq!(serialize(&doc), text);
        let Payload::Boundary(back) = doc.payload().unwrap() else {
            panic!("wrong payload")
        };
        assert_eq!(serialize(&boundary_document(&back)), text);

        let f = Morphism::identity(&fixtures::arr());
        let text = serialize(&morphism_document(&f));
        let Payload::Morphism(back) = parse(&text).unwrap().payload().unwrap() else {
            panic!("wrong payload")
        };
        assert!(validate_morphism(&back).is_empty());
    }

    proptest! {
        // Round trip over arbitrary small well-formed-ish graphs: documents
        // built from any graph value parse back to the same value.
        #[test]
        fn document_round_trip(cells in 1usize..5, seed in 0u64..500) {
            let mut s = seed;
            let mut next = || {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 33) as usize
            };
            let mut b = crate::graph::GraphBuilder::new();
            let mut ids = Vec::new();
            for i in 0..cells {
                ids.push(b.cell(&format!("c{i}"), (next() % 3) as u32));
            }
            let g0 = b.finish();
            // Arrows between degree-consecutive cells only, at random.
            let mut b = crate::graph::GraphBuilder::new();
            let mut ids2 = Vec::new();
            for c in g0.cell_ids() {
                ids2.push(b.cell(g0.cell_name(c), g0.degree(c)));
           }
            let mut k = 0;
            for x in 0..cells {
                for y in 0..cells {
                    if g0.degree(ids[y]) == g0.degree(ids[x]) + 1 && next() % 2 == 0 {
                        let pol = if next() % 2 == 0 { Polarity::Source } else { Polarity::Target };
                        b.arrow(&format!("e{k}"), ids2[x], ids2[y], pol);
                        k += 1;
                    }
                }
            }
            let g = b.finish();
            let text = serialize(&opetopic_set_document(&g));
            let doc = parse(&text).unwrap();
            prop_assert_eq!(serialize(&doc), text.clone());
            let Payload::OpetopicSet(back) = doc.payload().unwrap() else {
                panic!("wrong payload")
            };
            prop_assert_eq!(serialize(&opetopic_set_document(&back)), text);
        }
    }
}

//! Structural laws beyond the acceptance gate: slice transport along
//! morphisms, compatibility of restriction with pushouts, boundary marking
//! stability, the finite monad packaging of substitution, and closure of
//! the enumerated families under taking targets.

use std::collections::BTreeMap;

use proptest::prelude::*;

use opetopes::calculus::{shift, subst};
use opetopes::codec::{poly_fragment, Codec, OpetopeCode};
use opetopes::construct::{
    boundary, boundary_of_pd, fill, opetope_of_pd, pushout, restrict_below, slice, source_horn,
};
use opetopes::enumerate::{enumerate_opetopes, SizeBudget};
use opetopes::fixtures;
use opetopes::graph::{find_isomorphism, Morphism, OpetopicGraph, Polarity};
use opetopes::normalize::{hom, normalize};

fn budget(degree: u32, nodes: usize, arity: usize, cells: usize) -> SizeBudget {
    SizeBudget {
        degree,
        max_top_cells: nodes,
        max_arity: arity,
        max_total_cells: cells,
    }
}

#[test]
fn hom_sets_are_finite_and_same_degree_rigid() {
    for (name, g) in fixtures::all() {
        for x in g.cell_ids() {
            for y in g.cell_ids() {
                let h = hom(&g, x, y).unwrap();
                if g.degree(x) == g.degree(y) {
                    if x == y {
                        assert_eq!(h.len(), 1, "{name}: hom({x},{x})");
                        assert!(h.iter().next().unwrap().is_identity());
                    } else {
                        assert!(h.is_empty(), "{name}: same-degree hom not empty");
                    }
                }
                if g.degree(x) > g.degree(y) {
                    assert!(h.is_empty());
                }
            }
        }
    }
}

#[test]
fn slices_transport_along_morphisms() {
    // The projection of any diagram into the opetope it determines is a
    // morphism; slices must transport to isomorphic slices along it.
    for m in 0..=2 {
        let pd = shift(&fixtures::tri(m)).unwrap();
        let built = opetope_of_pd(&pd).unwrap();
        let f = &built.pd_injection;
        for x in f.source.cell_ids() {
            let (sa, _) = slice(&f.source, x).unwrap();
            let (sb, _) = slice(&f.target, f.apply(x)).unwrap();
            assert!(
                find_isomorphism(&sa, &sb).unwrap().is_some(),
                "slice at {} does not transport",
                f.source.cell_name(x)
            );
        }
    }
}

/// Restrict a morphism to the cells below a degree (names are preserved by
/// the restriction).
fn restrict_morphism(f: &Morphism, m: u32) -> Morphism {
    let src = restrict_below(&f.source, m);
    let dst = restrict_below(&f.target, m);
    let cell_map = src
        .cell_ids()
        .map(|c| {
            let orig = f.source.cell_by_name(src.cell_name(c)).unwrap();
            dst.cell_by_name(f.target.cell_name(f.apply(orig))).unwrap()
        })
        .collect();
    let arrow_map = src
        .arrow_ids()
        .map(|a| {
            let orig = f.source.arrow_by_name(&src.arrow(a).name).unwrap();
            dst.arrow_by_name(&f.target.arrow(f.apply_arrow(orig)).name)
                .unwrap()
        })
        .collect();
    Morphism {
        source: src,
        target: dst,
        cell_map,
        arrow_map,
    }
}

#[test]
fn restriction_commutes_with_pushout() {
    // The span glued by opetope_of_pd: the boundary of the one-node diagram
    // on tri2 into its fill and into the diagram.
    let pd = shift(&fixtures::tri(2)).unwrap();
    let (bd, back) = boundary_of_pd(&pd);
    let (t_graph, _) = fill(&bd).unwrap();
    let leg_t = Morphism {
        source: bd.graph.clone(),
        target: t_graph.clone(),
        cell_map: bd.graph.cell_ids().collect(),
        arrow_map: bd.graph.arrow_ids().collect(),
    };
    let whole = pushout(&leg_t, &back).unwrap();
    for m in 0..=2u32 {
        let restricted = pushout(&restrict_morphism(&leg_t, m), &restrict_morphism(&back, m))
            .unwrap();
        let of_whole = restrict_below(&whole.graph, m);
        assert!(
            find_isomorphism(&restricted.graph, &of_whole).unwrap().is_some(),
            "restriction below {m} does not commute"
        );
    }
}

#[test]
fn horn_markings_match_the_arrow_formulas() {
    // A cell of the horn is a leaf once per source arrow into the dropped
    // target and a root once per target arrow into it.
    for (name, g) in fixtures::all() {
        let Some(top) = opetopes::axioms::is_opetope(&g) else {
            panic!("{name} is not an opetope")
        };
        if g.degree(top) == 0 {
            continue;
        }
        let b = boundary(&g).unwrap();
        let horn = source_horn(&b).unwrap();
        let dropped: Vec<_> = b
            .marking
            .iter()
            .filter(|(_, p)| **p == Polarity::Target)
            .map(|(c, _)| *c)
            .collect();
        assert_eq!(dropped.len(), 1, "{name}");
        let t = dropped[0];
        for x in horn.graph.cell_ids() {
            let orig = b.graph.cell_by_name(horn.graph.cell_name(x)).unwrap();
            let srcs = b
                .graph
                .arrows_into(t)
                .iter()
                .filter(|a| {
                    b.graph.arrow(**a).dom == orig
                        && b.graph.arrow(**a).polarity == Polarity::Source
                })
                .count();
            let tgts = b
                .graph
                .arrows_into(t)
                .iter()
                .filter(|a| {
                    b.graph.arrow(**a).dom == orig
                        && b.graph.arrow(**a).polarity == Polarity::Target
                })
                .count();
            assert_eq!(
                horn.leaves.iter().filter(|c| **c == x).count(),
                srcs,
                "{name}: leaf marks at {}",
                horn.graph.cell_name(x)
            );
            assert_eq!(
                horn.roots.iter().filter(|c| **c == x).count(),
                tgts,
                "{name}: root marks at {}",
                horn.graph.cell_name(x)
            );
        }
    }
}

#[test]
fn fragment_units_and_multiplication_behave() {
    // The finite shadow of the monad structure on the degree-2 fragment:
    // substitution is the multiplication, the one-node diagram on the fill
    // is the unit, and the unit laws hold at the level of codes.
    let mut codec = Codec::new();
    let mut codes: std::collections::BTreeSet<OpetopeCode> = (0..=3)
        .map(|m| codec.encode(&fixtures::tri(m)).unwrap())
        .collect();
    codes.insert(codec.encode(&fixtures::op3()).unwrap());
    let frag = poly_fragment(&mut codec, &codes).unwrap();
    for node in &frag.nodes {
        let d = codec.decode(&node.code).unwrap();
        let horn = source_horn(&boundary(&d.graph).unwrap()).unwrap();
        let horn_code = codec.pd_code(&horn).unwrap();

        // Left unit: substituting the node's diagram into the unit on its
        // target boundary gives the diagram back.
        let target = codec.decode(&node.target).unwrap();
        let unit = shift(&fill(&boundary(&target.graph).unwrap()).unwrap().0).unwrap();
        let top = unit.top_cells()[0];
        let mut parts = BTreeMap::new();
        parts.insert(top, horn.clone());
        let out = subst(&unit, &parts).unwrap();
        assert_eq!(codec.pd_code(&out.pd).unwrap(), horn_code, "left unit at {}", node.code);

        // Right unit: substituting units at every top cell changes nothing.
        let out = subst(&horn, &BTreeMap::new()).unwrap();
        assert_eq!(codec.pd_code(&out.pd).unwrap(), horn_code, "right unit at {}", node.code);

        // The fragment's input shapes agree with the diagram's top cells.
        let mut top_shapes: Vec<String> = horn
            .top_cells()
            .iter()
            .map(|y| codec.shape_of(&horn.graph, *y).unwrap().to_string())
            .collect();
        top_shapes.sort();
        let mut inputs: Vec<String> = node.inputs.iter().map(|c| c.to_string()).collect();
        inputs.sort();
        assert_eq!(top_shapes, inputs, "inputs of {}", node.code);
    }
}

#[test]
fn degree_three_profiles_agree_with_brute_force() {
    // Dual-enumerator agreement one degree above the acceptance family:
    // group the degree-3 codes by cell profile and compare each group with
    // the skeleton search, including the nine-cell profile of the one-node
    // diagram on the two-source cell.
    let mut codec = Codec::new();
    let codes = enumerate_opetopes(&mut codec, &budget(3, 3, 3, 9)).unwrap();
    let mut by_profile: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for c in &codes {
        let d = codec.decode(c).unwrap();
        let maxd = d.graph.max_degree().unwrap() as usize;
        let mut profile = vec![0usize; maxd + 1];
        for cell in d.graph.cell_ids() {
            profile[d.graph.degree(cell) as usize] += 1;
        }
        *by_profile.entry(profile).or_default() += 1;
    }
    for profile in [
        vec![2, 1, 1, 1], // the globular filler and the degenerate filler
        vec![1, 1, 2, 1], // the filler of the one-node diagram on the loop
        vec![2, 2, 2, 1], // the filler of the one-node diagram on tri1
        vec![3, 3, 2, 1], // the filler of the one-node diagram on tri2
    ] {
        let expected = by_profile.get(&profile).copied().unwrap_or(0);
        let got = opetopes::enumerate::oracle_enumerate(&profile).unwrap().len();
        assert_eq!(got, expected, "profile {profile:?}");
        assert!(got >= 1, "profile {profile:?} unexpectedly empty");
    }
}

/// Construct the mediating morphism from a pushout to another cocone over
/// the same span, determined cell by cell through the injections.
fn mediate(
    po: &opetopes::construct::PushoutResult,
    u: &Morphism,
    v: &Morphism,
) -> Option<Morphism> {
    let d = &po.graph;
    let z = &u.target;
    let mut cell_map = vec![None; d.cell_count()];
    let mut arrow_map = vec![None; d.arrow_count()];
    for x in po.left.source.cell_ids() {
        let slot = &mut cell_map[po.left.apply(x).0 as usize];
        if slot.is_some_and(|prev| prev != u.apply(x)) {
            return None;
        }
        *slot = Some(u.apply(x));
    }
    for x in po.right.source.cell_ids() {
        let slot = &mut cell_map[po.right.apply(x).0 as usize];
        if slot.is_some_and(|prev| prev != v.apply(x)) {
            return None;
        }
        *slot = Some(v.apply(x));
    }
    for a in po.left.source.arrow_ids() {
        let slot = &mut arrow_map[po.left.apply_arrow(a).0 as usize];
        if slot.is_some_and(|prev| prev != u.apply_arrow(a)) {
            return None;
        }
        *slot = Some(u.apply_arrow(a));
    }
    for a in po.right.source.arrow_ids() {
        let slot = &mut arrow_map[po.right.apply_arrow(a).0 as usize];
        if slot.is_some_and(|prev| prev != v.apply_arrow(a)) {
            return None;
        }
        *slot = Some(v.apply_arrow(a));
    }
    // Joint surjectivity makes the mediating map total and unique.
    let cell_map: Option<Vec<_>> = cell_map.into_iter().collect();
    let arrow_map: Option<Vec<_>> = arrow_map.into_iter().collect();
    Some(Morphism {
        source: d.clone(),
        target: z.clone(),
        cell_map: cell_map?,
        arrow_map: arrow_map?,
    })
}

#[test]
fn pushout_is_universal_on_a_small_instance() {
    // The span glued by opetope_of_pd for the one-node diagram on tri2.
    let pd = shift(&fixtures::tri(2)).unwrap();
    let (bd, back) = boundary_of_pd(&pd);
    let (t_graph, _) = fill(&bd).unwrap();
    let leg_t = Morphism {
        source: bd.graph.clone(),
        target: t_graph.clone(),
        cell_map: bd.graph.cell_ids().collect(),
        arrow_map: bd.graph.arrow_ids().collect(),
    };
    let po = pushout(&leg_t, &back).unwrap();

    // The square commutes and the injections are jointly surjective, so a
    // mediating morphism to any cocone is determined uniquely.
    for c in bd.graph.cell_ids() {
        assert_eq!(po.left.apply(leg_t.apply(c)), po.right.apply(back.apply(c)));
    }
    let mut hit = vec![false; po.graph.cell_count()];
    for x in po.left.source.cell_ids() {
        hit[po.left.apply(x).0 as usize] = true;
    }
    for x in po.right.source.cell_ids() {
        hit[po.right.apply(x).0 as usize] = true;
    }
    assert!(hit.iter().all(|h| *h), "injections are not jointly surjective");

    // Cocone 1: the pushout itself; the mediating map is the identity.
    let m = mediate(&po, &po.left, &po.right).expect("pushout mediates to itself");
    assert_eq!(m.cell_map, po.graph.cell_ids().collect::<Vec<_>>());

    // Cocone 2: the pushout sitting inside a larger object.
    let bigger = fixtures::disjoint_union(&po.graph, &fixtures::pt());
    let embed = Morphism {
        source: po.graph.clone(),
        target: bigger.clone(),
        cell_map: po
            .graph
            .cell_ids()
            .map(|c| bigger.cell_by_name(po.graph.cell_name(c)).unwrap())
            .collect(),
        arrow_map: po
            .graph
            .arrow_ids()
            .map(|a| bigger.arrow_by_name(&po.graph.arrow(a).name).unwrap())
            .collect(),
    };
    let u = po.left.then(&embed);
    let v = po.right.then(&embed);
    let m = mediate(&po, &u, &v).expect("mediating morphism exists");
    assert!(opetopes::graph::validate_morphism(&m).is_empty());
    assert_eq!(m.cell_map, embed.cell_map);
}

#[test]
fn enumerated_targets_stay_enumerated() {
    // Targets of degree-(n+1) codes appear among the degree-n codes once
    // the arity budget accounts for the leaves a tree can expose.
    let mut codec = Codec::new();
    let nodes = 3;
    let arity = 2;
    for n in 1..=2u32 {
        let upper = enumerate_opetopes(&mut codec, &budget(n + 1, nodes, arity, 64)).unwrap();
        let lower =
            enumerate_opetopes(&mut codec, &budget(n, nodes * arity, nodes * arity, 64)).unwrap();
        for c in &upper {
            let t = codec.target_shape(c).unwrap();
            assert!(lower.contains(&t), "target {t} of {c} not enumerated");
        }
    }
}

#[test]
fn validity_of_everything_enumerated() {
    let mut codec = Codec::new();
    for d in 0..=3u32 {
        for code in enumerate_opetopes(&mut codec, &budget(d, 3, 3, 12)).unwrap() {
            let dec = codec.decode(&code).unwrap();
            let r = opetopes::axioms::check_opetopic(&dec.graph);
            assert!(r.all_pass(), "{code}: {:?}", r.lines());
            assert!(opetopes::axioms::is_opetope(&dec.graph).is_some(), "{code}");
        }
    }
}

/// A deterministic composable tuple inside a fixture, long enough to be
/// interesting.
fn random_tuple(g: &OpetopicGraph, seed: u64) -> Option<Vec<opetopes::ArrowId>> {
    let mut s = seed;
    let mut next = move || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 33) as usize
    };
    let starts: Vec<_> = g.cells_of_degree(0);
    if starts.is_empty() {
        return None;
    }
    let mut at = starts[next() % starts.len()];
    let mut path = Vec::new();
    loop {
        let outs = g.arrows_from(at);
        if outs.is_empty() {
            break;
        }
        let a = outs[next() % outs.len()];
        path.push(a);
        at = g.arrow(a).cod;
    }
    if path.len() >= 2 {
        Some(path)
    } else {
        None
    }
}

proptest! {
    // Normalization is idempotent: the normal form of a normal form is
    // itself.
    #[test]
    fn normalize_is_idempotent(fixture in 0usize..7, seed in 0u64..2000) {
        let (_, g) = fixtures::all().swap_remove(fixture);
        if let Some(tuple) = random_tuple(&g, seed) {
            let nf = normalize(&g, &tuple).unwrap();
            prop_assert_eq!(normalize(&g, &nf.path).unwrap(), nf);
        }
    }

    // The axiom engine is total: arbitrary candidate presentations get a
    // report (usually a failing one), never a panic or a hang.
    #[test]
    fn axiom_engine_is_total_on_candidates(cells in 1usize..6, seed in 0u64..3000) {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 33) as usize
        };
        let mut b = opetopes::graph::GraphBuilder::new();
        let ids: Vec<_> = (0..cells).map(|i| b.cell(&format!("c{i}"), (next() % 3) as u32)).collect();
        let g0 = b.finish();
        let mut b = opetopes::graph::GraphBuilder::new();
        let ids2: Vec<_> = g0.cell_ids().map(|c| b.cell(g0.cell_name(c), g0.degree(c))).collect();
        let mut arrows = Vec::new();
        for x in 0..cells {
            for y in 0..cells {
                if g0.degree(ids[y]) == g0.degree(ids[x]) + 1 && next() % 3 != 0 {
                    let pol = if next() % 2 == 0 { Polarity::Source } else { Polarity::Target };
                    arrows.push(b.arrow(&format!("e{}", arrows.len()), ids2[x], ids2[y], pol));
                }
            }
        }
        // Random diamonds over composable pairs, correctness not required.
        if arrows.len() >= 2 {
            for _ in 0..(next() % 4) {
                let pick = |next: &mut dyn FnMut() -> usize| arrows[next() % arrows.len()];
                b.diamond(pick(&mut next), pick(&mut next), pick(&mut next), pick(&mut next));
            }
        }
        let g = b.finish();
        let report = opetopes::axioms::check_opetopic(&g);
        prop_assert!(!report.lines().is_empty());
        let _ = opetopes::axioms::is_opetope(&g);
    }
}

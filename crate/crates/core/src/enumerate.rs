//! Two independent enumeration strategies for opetopes: generation through
//! the tree encoding (recursing on degree), and brute force over diamond
//! graphs on a fixed cell skeleton filtered through the axiom engine. The
//! two must agree wherever both apply; `count_table` cross-checks them.

use std::collections::{BTreeMap, BTreeSet};

use crate::axioms::{check_opetopic, is_opetope};
use crate::codec::{Codec, DecoratedTree, OpetopeCode, TreeInput};
use crate::graph::{
    canonical_relabel, find_isomorphism, Cell, CellId, Diamond, GenArrow, OpetopicGraph,
    Polarity,
};
use crate::{Error, Result};

/// Bounds for tree-based enumeration. Enumeration is exhaustive within the
/// bounds; enlarging any field never removes codes.
#[derive(Clone, Copy, Debug)]
pub struct SizeBudget {
    /// Degree of the opetopes to enumerate.
    pub degree: u32,
    /// Maximum number of nodes in the horn tree (= number of sources).
    pub max_top_cells: usize,
    /// Maximum arity of any decoration used, at every level.
    pub max_arity: usize,
    /// Maximum total cell count of an enumerated opetope.
    pub max_total_cells: usize,
}

impl SizeBudget {
    pub fn new(degree: u32) -> SizeBudget {
        SizeBudget {
            degree,
            max_top_cells: 4,
            max_arity: 4,
            max_total_cells: 64,
        }
    }
}

/// Soft cap on the number of generated codes.
pub const RESULT_CAP: usize = 100_000;

/// Exhaustively enumerate opetope codes of the budgeted degree: decorated
/// trees over the enumeration one degree down, compatible at every
/// attachment, deduplicated by code.
pub fn enumerate_opetopes(codec: &mut Codec, b: &SizeBudget) -> Result<BTreeSet<OpetopeCode>> {
    let levels = enumerate_levels(codec, b)?;
    Ok(levels.into_iter().last().unwrap_or_default())
}

/// All levels `0..=degree` of the enumeration under one budget.
pub fn enumerate_levels(codec: &mut Codec, b: &SizeBudget) -> Result<Vec<BTreeSet<OpetopeCode>>> {
    let mut levels: Vec<BTreeSet<OpetopeCode>> = Vec::new();
    for d in 0..=b.degree {
        let level = if d == 0 {
            if b.max_total_cells >= 1 {
                BTreeSet::from([OpetopeCode::point()])
            } else {
                BTreeSet::new()
            }
        } else {
            let mut out = BTreeSet::new();
            // Degenerate horns: one per code two levels down.
            if d >= 2 {
                for c in &levels[d as usize - 2] {
                    if codec.code_cell_count(c)? + 2 <= b.max_total_cells {
                        out.insert(OpetopeCode::parse(&format!("{{deg({c})}}"))?);
                    }
                }
            }
            // Node trees over the previous level.
            let decorations: Vec<OpetopeCode> = levels[d as usize - 1]
                .iter()
                .filter(|c| {
                    codec
                        .source_shapes(c)
                        .map(|s| s.len() <= b.max_arity)
                        .unwrap_or(false)
                })
                .cloned()
                .collect();
            // Candidates for a subtree at an attachment point, by the shape
            // they must target.
            let mut by_target: BTreeMap<OpetopeCode, Vec<OpetopeCode>> = BTreeMap::new();
            for c in &decorations {
                if c.is_point() {
                    continue; // the point decorates leaves of degree-1 trees only
                }
                by_target
                    .entry(codec.target_shape(c)?)
                    .or_default()
                    .push(c.clone());
            }
            let mut gen = TreeGen {
                codec,
                by_target: &by_target,
                budget: b,
                produced: 0,
                memo: BTreeMap::new(),
            };
            for root in &decorations {
                let trees = gen.grow(root, b.max_top_cells)?;
                for (t, _, cells) in trees.iter() {
                    if cells + 2 <= b.max_total_cells {
                        out.insert(OpetopeCode::parse(&format!("{{{}}}", t.render()))?);
                    }
                }
            }
            out
        };
        if level.len() > RESULT_CAP {
            return Err(Error::BudgetExceeded { cap: RESULT_CAP });
        }
        levels.push(level);
    }
    Ok(levels)
}

struct TreeGen<'a> {
    codec: &'a mut Codec,
    by_target: &'a BTreeMap<OpetopeCode, Vec<OpetopeCode>>,
    budget: &'a SizeBudget,
    produced: usize,
    /// (root code, node budget) -> trees, shared across attachment points.
    memo: BTreeMap<(OpetopeCode, usize), std::rc::Rc<Vec<(DecoratedTree, usize, usize)>>>,
}

impl TreeGen<'_> {
    /// All trees rooted at a node decorated `root`, with at most
    /// `nodes_left` nodes in total (the root included) and within the cell
    /// budget. Returns (tree, nodes used, pasted cell count).
    fn grow(
        &mut self,
        root: &OpetopeCode,
        nodes_left: usize,
    ) -> Result<std::rc::Rc<Vec<(DecoratedTree, usize, usize)>>> {
        if nodes_left == 0 {
            return Ok(std::rc::Rc::new(Vec::new()));
        }
        if let Some(hit) = self.memo.get(&(root.clone(), nodes_left)) {
            return Ok(hit.clone());
        }
        let root_cells = self.codec.code_cell_count(root)?;
        let shapes = self.codec.source_shapes(root)?;
        let shape_cells: Vec<usize> = shapes
            .iter()
            .map(|s| self.codec.code_cell_count(s))
            .collect::<Result<_>>()?;
        // Fill inputs left to right, sharing the node budget.
        let mut fills: Vec<(Vec<TreeInput>, usize, usize)> = vec![(Vec::new(), 0, root_cells)];
        for (i, shape) in shapes.iter().enumerate() {
            let mut next = Vec::new();
            let candidates = self.by_target.get(shape).cloned().unwrap_or_default();
            for (prefix, used, cells) in &fills {
                // Leaf at this input.
                let mut with_leaf = prefix.clone();
                with_leaf.push(TreeInput::Leaf);
                next.push((with_leaf, *used, *cells));
                // Or any compatible subtree.
                for c in &candidates {
                    let subs = self.grow(c, nodes_left - 1 - used)?;
                    for (t, n, tc) in subs.iter() {
                        let total_cells = cells + tc - shape_cells[i];
                        if total_cells + 2 > self.budget.max_total_cells
                            || used + n + 1 > nodes_left
                        {
                            continue;
                        }
                        let mut with_sub = prefix.clone();
                        with_sub.push(TreeInput::Sub(t.clone()));
                        next.push((with_sub, used + n, total_cells));
                    }
                }
            }
            fills = next;
            self.produced += fills.len();
            if self.produced > RESULT_CAP {
                return Err(Error::BudgetExceeded { cap: RESULT_CAP });
            }
        }
        let out: Vec<(DecoratedTree, usize, usize)> = fills
            .into_iter()
            .map(|(inputs, used, cells)| {
                (DecoratedTree::Node(root.clone(), inputs), used + 1, cells)
            })
            .collect();
        let rc = std::rc::Rc::new(out);
        self.memo.insert((root.clone(), nodes_left), rc.clone());
        Ok(rc)
    }
}

/// Hard cap on brute-force profiles.
pub const PROFILE_CAP: usize = 9;

/// Enumerate all opetopes on a fixed cell skeleton (`profile[k]` cells of
/// degree `k`) by brute force: every target assignment, every source-set
/// assignment, every diamond matching, filtered through the axiom engine
/// and deduplicated by isomorphism search. Independent of the tree codec.
pub fn oracle_enumerate(profile: &[usize]) -> Result<Vec<OpetopicGraph>> {
    let total: usize = profile.iter().sum();
    if total > PROFILE_CAP {
        return Err(Error::ProfileTooLarge {
            cells: total,
            cap: PROFILE_CAP,
        });
    }
    if profile.is_empty() || profile.contains(&0) {
        return Ok(Vec::new());
    }
    // A terminal cell must be alone at the top degree.
    if *profile.last().unwrap() != 1 {
        return Ok(Vec::new());
    }

    // Fixed cells.
    let mut cells = Vec::new();
    let mut level_range = Vec::new(); // cell index range per degree
    for (k, count) in profile.iter().enumerate() {
        let start = cells.len();
        for i in 0..*count {
            cells.push(Cell {
                name: format!("x{k}_{i}"),
                degree: k as u32,
            });
        }
        level_range.push(start..cells.len());
    }

    // Choice space: for each cell of degree >= 1, a target domain and a
    // source assignment (exactly one source for degree 1, any subset above).
    struct Slot {
        cell: usize,
        prev: std::ops::Range<usize>,
        subset_sources: bool,
    }
    let mut slots = Vec::new();
    for k in 1..profile.len() {
        for c in level_range[k].clone() {
            slots.push(Slot {
                cell: c,
                prev: level_range[k - 1].clone(),
                subset_sources: k >= 2,
            });
        }
    }
    let radix: Vec<usize> = slots
        .iter()
        .map(|s| {
            let p = s.prev.len();
            if s.subset_sources {
                p << p // target choice * source bitmask
            } else {
                p * p
            }
        })
        .collect();

    let mut survivors: Vec<OpetopicGraph> = Vec::new();
    let mut counters = vec![0usize; slots.len()];
    let mut raw: Vec<(u32, u32, Polarity)> = Vec::new();
    let mut delta = vec![0i32; cells.len() * cells.len()];
    'outer: loop {
        // Materialize the arrows for this assignment as bare triples; names
        // are only minted for the few candidates that reach a matching.
        raw.clear();
        for (s, c) in slots.iter().zip(&counters) {
            let p = s.prev.len();
            let (target_choice, source_bits) = if s.subset_sources {
                (c % p, c / p)
            } else {
                (c % p, 1usize << (c / p))
            };
            raw.push((
                (s.prev.start + target_choice) as u32,
                s.cell as u32,
                Polarity::Target,
            ));
            for (j, prev_cell) in s.prev.clone().enumerate() {
                if source_bits & (1 << j) != 0 {
                    raw.push((prev_cell as u32, s.cell as u32, Polarity::Source));
                }
            }
        }

        if !quick_balance(&raw, cells.len(), &mut delta) {
            // Advance without the allocating group pass.
            let mut i = 0;
            loop {
                if i == slots.len() {
                    break 'outer;
                }
                counters[i] += 1;
                if counters[i] < radix[i] {
                    break;
                }
                counters[i] = 0;
                i += 1;
            }
            continue;
        }
        if let Some(matchings) = balanced_pair_groups(&raw) {
            let arrows: Vec<GenArrow> = raw
                .iter()
                .enumerate()
                .map(|(i, (dom, cod, pol))| GenArrow {
                    name: format!("e{i}"),
                    dom: CellId(*dom),
                    cod: CellId(*cod),
                    polarity: *pol,
                })
                .collect();
            try_matchings(&cells, &arrows, &matchings, &mut survivors)?;
        }

        // Advance the mixed-radix counter.
        let mut i = 0;
        loop {
            if i == slots.len() {
                break 'outer;
            }
            counters[i] += 1;
            if counters[i] < radix[i] {
                break;
            }
            counters[i] = 0;
            i += 1;
        }
    }

    Ok(survivors
        .into_iter()
        .map(|g| canonical_relabel(&g).0)
        .collect())
}

/// Allocation-free necessary condition: per two-step endpoint pair, the
/// heterogeneous and homogeneous pair counts must balance.
fn quick_balance(raw: &[(u32, u32, Polarity)], ncells: usize, delta: &mut [i32]) -> bool {
    delta.fill(0);
    for outer in raw {
        for inner in raw {
            if inner.1 != outer.0 {
                continue;
            }
            let k = inner.0 as usize * ncells + outer.1 as usize;
            if outer.2 == inner.2 {
                delta[k] -= 1;
            } else {
                delta[k] += 1;
            }
        }
    }
    delta.iter().all(|d| *d == 0)
}

/// Group composable pairs by their two-step endpoints and check the
/// heterogeneous and homogeneous sides balance. Returns the groups when
/// they do.
#[allow(clippy::type_complexity)]
fn balanced_pair_groups(
    raw: &[(u32, u32, Polarity)],
) -> Option<Vec<(Vec<(usize, usize)>, Vec<(usize, usize)>)>> {
    let mut groups: BTreeMap<(u32, u32), (Vec<(usize, usize)>, Vec<(usize, usize)>)> =
        BTreeMap::new();
    for (oi, outer) in raw.iter().enumerate() {
        for (ii, inner) in raw.iter().enumerate() {
            if inner.1 != outer.0 {
                continue;
            }
            let entry = groups.entry((inner.0, outer.1)).or_default();
            if outer.2 == inner.2 {
                entry.1.push((oi, ii));
            } else {
                entry.0.push((oi, ii));
            }
        }
    }
    let groups: Vec<_> = groups.into_values().collect();
    if groups.iter().any(|(het, hom)| het.len() != hom.len()) {
        return None;
    }
    Some(groups)
}

/// Enumerate every perfect matching of the balanced groups, build the
/// candidate graph, and keep the ones that are opetopes and new up to
/// isomorphism.
#[allow(clippy::type_complexity)]
fn try_matchings(
    cells: &[Cell],
    arrows: &[GenArrow],
    groups: &[(Vec<(usize, usize)>, Vec<(usize, usize)>)],
    survivors: &mut Vec<OpetopicGraph>,
) -> Result<()> {
    fn rec(
        cells: &[Cell],
        arrows: &[GenArrow],
        groups: &[(Vec<(usize, usize)>, Vec<(usize, usize)>)],
        gi: usize,
        acc: &mut Vec<Diamond>,
        survivors: &mut Vec<OpetopicGraph>,
    ) -> Result<()> {
        if gi == groups.len() {
            let g = OpetopicGraph::from_parts(cells.to_vec(), arrows.to_vec(), acc.clone())?;
            if check_opetopic(&g).all_pass() && is_opetope(&g).is_some() {
                for seen in survivors.iter() {
                    if find_isomorphism(seen, &g)?.is_some() {
                        return Ok(());
                    }
                }
                survivors.push(g);
            }
            return Ok(());
        }
        let (het, hom) = &groups[gi];
        // Permute the homogeneous side against the fixed heterogeneous side.
        fn perms(
            cells: &[Cell],
            arrows: &[GenArrow],
            groups: &[(Vec<(usize, usize)>, Vec<(usize, usize)>)],
            gi: usize,
            het: &[(usize, usize)],
            hom: &[(usize, usize)],
            used: &mut Vec<bool>,
            acc: &mut Vec<Diamond>,
            survivors: &mut Vec<OpetopicGraph>,
        ) -> Result<()> {
            let k = acc.len() - groups[..gi].iter().map(|(h, _)| h.len()).sum::<usize>();
            if k == het.len() {
                return rec(cells, arrows, groups, gi + 1, acc, survivors);
            }
            for j in 0..hom.len() {
                if used[j] {
                    continue;
                }
                used[j] = true;
                acc.push(Diamond {
                    het_outer: crate::graph::ArrowId(het[k].0 as u32),
                    het_inner: crate::graph::ArrowId(het[k].1 as u32),
                    hom_outer: crate::graph::ArrowId(hom[j].0 as u32),
                    hom_inner: crate::graph::ArrowId(hom[j].1 as u32),
                });
                perms(cells, arrows, groups, gi, het, hom, used, acc, survivors)?;
                acc.pop();
                used[j] = false;
            }
            Ok(())
        }
        let mut used = vec![false; hom.len()];
        perms(cells, arrows, groups, gi, het, hom, &mut used, acc, survivors)
    }
    let mut acc = Vec::new();
    rec(cells, arrows, groups, 0, &mut acc, survivors)
}

/// One row of the count table: opetopes of a degree with a given number of
/// source cells, as counted by the tree enumerator, cross-checked against
/// the brute-force oracle over every profile within its cap.
#[derive(Clone, Debug)]
pub struct CountRow {
    pub degree: u32,
    pub top_cells: usize,
    pub count: usize,
    /// Total oracle count over the checkable profiles, if any were.
    pub oracle_count: Option<usize>,
    /// Whether every checkable profile agreed.
    pub agreed: Option<bool>,
}

pub fn count_table(
    codec: &mut Codec,
    max_degree: u32,
    budget: &SizeBudget,
) -> Result<Vec<CountRow>> {
    let levels = enumerate_levels(
        codec,
        &SizeBudget {
            degree: max_degree,
            ..*budget
        },
    )?;
    let mut rows = Vec::new();
    for (d, level) in levels.iter().enumerate() {
        let mut by_nodes: BTreeMap<usize, Vec<&OpetopeCode>> = BTreeMap::new();
        for c in level {
            let nodes = if c.is_point() {
                0
            } else {
                c.tree()?.node_count()
            };
            by_nodes.entry(nodes).or_default().push(c);
        }
        for (nodes, codes) in by_nodes {
            // Group by cell profile for the oracle cross-check.
            let mut profiles: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
            for c in &codes {
                let dec = codec.decode(c)?;
                let maxd = dec.graph.max_degree().unwrap_or(0) as usize;
                let mut profile = vec![0usize; maxd + 1];
                for cell in dec.graph.cell_ids() {
                    profile[dec.graph.degree(cell) as usize] += 1;
                }
                *profiles.entry(profile).or_default() += 1;
            }
            let mut oracle_count = None;
            let mut agreed = None;
            for (profile, cnt) in profiles {
                if profile.iter().sum::<usize>() > PROFILE_CAP {
                    continue;
                }
                let oracle = oracle_enumerate(&profile)?.len();
                *oracle_count.get_or_insert(0) += oracle;
                let ok = agreed.get_or_insert(true);
                *ok = *ok && oracle == cnt;
            }
            rows.push(CountRow {
                degree: d as u32,
                top_cells: nodes,
                count: codes.len(),
                oracle_count,
                agreed,
            });
        }
    }
    Ok(rows)
}

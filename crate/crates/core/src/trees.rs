//! Rooted Δ-ary trees: Huffman code trees, leaf promotion and balanced trees.
//!
//! A [`RootedTree`] is an arena of positions; each position may carry an item
//! (an original node id). Huffman code trees carry items on leaves only;
//! after [`promote_leaves`] every position carries an item, so the tree can be
//! laid out directly as host-network edges.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::{pairwise_sum, Distribution, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub item: Option<usize>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Positions are stored in BFS order, so position 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedTree {
    arity: usize,
    nodes: Vec<TreeNode>,
}

/// A Δ-ary Huffman code: items on the leaves of `tree`.
#[derive(Debug, Clone, PartialEq)]
pub struct HuffmanCode {
    pub tree: RootedTree,
    /// Item weights as given (not necessarily normalized).
    pub weights: Vec<(usize, f64)>,
    /// Weighted mean leaf depth.
    pub expected_depth: f64,
}

impl RootedTree {
    /// Rebuilds a tree from an arbitrary arena, keeping the subtree reachable
    /// from `root` and dropping positions for which `keep` is false (their
    /// children are dropped with them). Positions are renumbered in BFS order.
    fn compact(arity: usize, arena: &[TreeNode], root: usize, keep: impl Fn(usize) -> bool) -> Self {
        let mut nodes = Vec::new();
        let mut queue = VecDeque::new();
        queue.push_back((root, None));
        while let Some((old, parent)) = queue.pop_front() {
            let idx = nodes.len();
            nodes.push(TreeNode {
                item: arena[old].item,
                parent,
                children: Vec::new(),
            });
            if let Some(p) = parent {
                let p: usize = p;
                nodes[p].children.push(idx);
            }
            for &c in &arena[old].children {
                if keep(c) {
                    queue.push_back((c, Some(idx)));
                }
            }
        }
        Self { arity, nodes }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root_item(&self) -> Option<usize> {
        self.nodes.first().and_then(|n| n.item)
    }

    /// Depth of every position (root = 0).
    pub fn depths(&self) -> Vec<u32> {
        let mut depth = vec![0u32; self.nodes.len()];
        // BFS order guarantees parents precede children.
        for i in 1..self.nodes.len() {
            depth[i] = depth[self.nodes[i].parent.expect("non-root has parent")] + 1;
        }
        depth
    }

    pub fn height(&self) -> u32 {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// `item -> depth` for every item in the tree.
    pub fn item_depths(&self) -> HashMap<usize, u32> {
        let depth = self.depths();
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.item.map(|it| (it, depth[i])))
            .collect()
    }

    pub fn depth_of(&self, item: usize) -> Option<u32> {
        let depth = self.depths();
        self.nodes
            .iter()
            .position(|n| n.item == Some(item))
            .map(|i| depth[i])
    }

    pub fn items(&self) -> Vec<usize> {
        self.nodes.iter().filter_map(|n| n.item).collect()
    }

    /// Parent-child pairs of items, for trees where every position is
    /// occupied.
    pub fn item_edges(&self) -> Vec<(usize, usize)> {
        self.nodes
            .iter()
            .filter_map(|n| {
                let p = n.parent?;
                Some((self.nodes[p].item?, n.item?))
            })
            .collect()
    }

    pub fn max_children(&self) -> usize {
        self.nodes.iter().map(|n| n.children.len()).max().unwrap_or(0)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&TreeFile {
            arity: self.arity,
            parent: self.nodes.iter().map(|n| n.parent).collect(),
            items: self.nodes.iter().map(|n| n.item).collect(),
        })
        .expect("tree serializes")
    }
}

/// Debug serialization: parent array plus item map, positions in BFS order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeFile {
    pub arity: usize,
    pub parent: Vec<Option<usize>>,
    pub items: Vec<Option<usize>>,
}

#[derive(Debug, Clone, Copy)]
struct HeapKey {
    weight: f64,
    tiebreak: usize,
    position: usize,
}

impl PartialEq for HeapKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapKey {}
impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapKey {
    // Reversed: BinaryHeap pops the lightest, then the lowest id.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .weight
            .total_cmp(&self.weight)
            .then(other.tiebreak.cmp(&self.tiebreak))
    }
}

/// Δ-ary Huffman code over the support of `d`.
pub fn huffman_dary(d: &Distribution, arity: usize) -> Result<HuffmanCode> {
    huffman_weighted(&d.support(), arity)
}

/// Δ-ary Huffman code over `(item, weight)` pairs; weights need not sum to
/// one, zero weights are ignored.
pub fn huffman_weighted(items: &[(usize, f64)], arity: usize) -> Result<HuffmanCode> {
    if arity < 2 {
        return Err(Error::BadArity(arity));
    }
    let weights: Vec<(usize, f64)> = items.iter().copied().filter(|(_, w)| *w > 0.0).collect();
    if weights.is_empty() {
        return Err(Error::EmptyDemand);
    }
    let mut arena: Vec<TreeNode> = Vec::new();
    let mut heap = BinaryHeap::new();
    for &(item, w) in &weights {
        heap.push(HeapKey {
            weight: w,
            tiebreak: item,
            position: arena.len(),
        });
        arena.push(TreeNode {
            item: Some(item),
            parent: None,
            children: Vec::new(),
        });
    }
    // Pad so that every merge takes exactly `arity` subtrees.
    let mut dummies = 0;
    while !(weights.len() + dummies - 1).is_multiple_of(arity - 1) {
        heap.push(HeapKey {
            weight: 0.0,
            tiebreak: usize::MAX - dummies,
            position: arena.len(),
        });
        arena.push(TreeNode {
            item: None,
            parent: None,
            children: Vec::new(),
        });
        dummies += 1;
    }
    let first_dummy = weights.len();
    while heap.len() > 1 {
        let parent = arena.len();
        let mut children = Vec::with_capacity(arity);
        let mut weight = 0.0;
        let mut tiebreak = usize::MAX;
        for _ in 0..arity {
            let k = heap.pop().expect("padding keeps counts aligned");
            weight += k.weight;
            tiebreak = tiebreak.min(k.tiebreak);
            arena[k.position].parent = Some(parent);
            children.push(k.position);
        }
        arena.push(TreeNode {
            item: None,
            parent: None,
            children,
        });
        heap.push(HeapKey {
            weight,
            tiebreak,
            position: parent,
        });
    }
    let root = heap.pop().expect("nonempty").position;
    let is_dummy = |p: usize| p >= first_dummy && p < first_dummy + dummies;
    let tree = RootedTree::compact(arity, &arena, root, |p| !is_dummy(p));

    let depths = tree.item_depths();
    let total = pairwise_sum(&weights.iter().map(|w| w.1).collect::<Vec<_>>());
    let weighted: Vec<f64> = weights
        .iter()
        .map(|(it, w)| w * depths[it] as f64)
        .collect();
    Ok(HuffmanCode {
        expected_depth: pairwise_sum(&weighted) / total,
        tree,
        weights,
    })
}

/// Moves items from leaves into the empty internal positions of a code tree.
///
/// Internal positions are filled top-down in BFS order; each takes the
/// heaviest remaining leaf item of its own subtree (ties: lowest item id), so
/// no item ever gets deeper. Positions left without any item below them are
/// removed.
pub fn promote_leaves(code: &HuffmanCode) -> RootedTree {
    let tree = &code.tree;
    let weight: HashMap<usize, f64> = code.weights.iter().copied().collect();
    let mut arena: Vec<TreeNode> = tree.nodes.clone();
    for slot in 0..arena.len() {
        if arena[slot].item.is_some() || arena[slot].children.is_empty() {
            continue;
        }
        // Heaviest leaf item strictly below `slot`.
        let mut best: Option<(usize, usize)> = None; // (position, item)
        let mut stack = arena[slot].children.clone();
        while let Some(p) = stack.pop() {
            if arena[p].children.is_empty() {
                if let Some(item) = arena[p].item {
                    let better = match best {
                        None => true,
                        Some((_, b)) => match weight[&item].total_cmp(&weight[&b]) {
                            Ordering::Greater => true,
                            Ordering::Equal => item < b,
                            Ordering::Less => false,
                        },
                    };
                    if better {
                        best = Some((p, item));
                    }
                }
            } else {
                stack.extend(arena[p].children.iter().copied());
            }
        }
        if let Some((p, item)) = best {
            arena[p].item = None;
            arena[slot].item = Some(item);
        }
    }
    // Every surviving position holds an item; empty positions have no items
    // below them (they were filled top-down otherwise).
    RootedTree::compact(tree.arity, &arena, 0, |p| arena[p].item.is_some())
}

/// `sum p_i * d(i)` over the support of `d`, where `d(i)` is the depth of
/// item `i`, plus one when the tree hangs off node `hang_from` through an
/// edge to the root. Mass on `hang_from` itself costs nothing.
pub fn rooted_epl(d: &Distribution, tree: &RootedTree, hang_from: Option<usize>) -> Result<f64> {
    rooted_epl_weighted(&d.support(), tree, hang_from)
}

/// [`rooted_epl`] for unnormalized weights (the result is normalized).
pub fn rooted_epl_weighted(
    items: &[(usize, f64)],
    tree: &RootedTree,
    hang_from: Option<usize>,
) -> Result<f64> {
    let depths = tree.item_depths();
    let extra = if hang_from.is_some() { 1.0 } else { 0.0 };
    let mut terms = Vec::with_capacity(items.len());
    let mut total = Vec::with_capacity(items.len());
    for &(item, w) in items {
        if w <= 0.0 {
            continue;
        }
        total.push(w);
        if Some(item) == hang_from {
            continue;
        }
        let depth = depths.get(&item).ok_or(Error::ItemNotInTree(item))?;
        terms.push(w * (*depth as f64 + extra));
    }
    let total = pairwise_sum(&total);
    if total <= 0.0 {
        return Ok(0.0);
    }
    Ok(pairwise_sum(&terms) / total)
}

/// Complete Δ-ary tree over `items`, filled level by level from the left;
/// `items[0]` is the root.
pub fn balanced_tree(items: &[usize], arity: usize) -> Result<RootedTree> {
    if arity < 2 {
        return Err(Error::BadArity(arity));
    }
    if items.is_empty() {
        return Err(Error::EmptyDemand);
    }
    let k = items.len();
    let nodes = (0..k)
        .map(|i| TreeNode {
            item: Some(items[i]),
            parent: if i == 0 { None } else { Some((i - 1) / arity) },
            children: (i * arity + 1..(i * arity + arity + 1).min(k)).collect(),
        })
        .collect();
    Ok(RootedTree { arity, nodes })
}

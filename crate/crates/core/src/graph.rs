//! Structure of signed interaction digraphs: strongly connected components,
//! structural balance, gauge transformation, canonic ordering and
//! Gershgorin discs.
//!
//! Edge convention: a nonzero `S[(i, j)]` means node `i` receives
//! information from node `j`, i.e. an arc `j → i`.

use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::cmp::Reverse;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a generated network came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkMeta {
    pub seed: u64,
    pub scenario: String,
}

/// Raw interaction matrix `S` of a signed network.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedNetwork {
    entries: DMatrix<f64>,
    meta: Option<NetworkMeta>,
}

impl SignedNetwork {
    /// Validates that `entries` is square, finite, nonempty and has a zero
    /// diagonal.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 {
            return Err(Error::EmptyNodeSet);
        }
        if entries.ncols() != n {
            return Err(Error::InvalidNetwork(format!(
                "interaction matrix must be square, got {}x{}",
                n,
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidNetwork("non-finite interaction strength".into()));
        }
        if let Some(i) = (0..n).find(|&i| entries[(i, i)] != 0.0) {
            return Err(Error::InvalidNetwork(format!(
                "diagonal entry {i} is {} (self-interaction must be 0)",
                entries[(i, i)]
            )));
        }
        Ok(Self { entries, meta: None })
    }

    /// Builds a network from row-major data.
    pub fn from_rows(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidNetwork(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, n, data))
    }

    pub fn with_meta(mut self, meta: NetworkMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn meta(&self) -> Option<&NetworkMeta> {
        self.meta.as_ref()
    }

    /// Row sums of `|S|`.
    pub fn row_abs_sums(&self) -> Vec<f64> {
        self.entries
            .row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum())
            .collect()
    }
}

/// Strongly connected components of the digraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SccDecomposition {
    /// Node sets, each sorted ascending.
    pub components: Vec<Vec<usize>>,
    /// `closed_flags[c]` is true when no arc enters component `c` from outside.
    pub closed_flags: Vec<bool>,
    /// Component indices ordered so that every cross-component arc points
    /// from a later block to an earlier one. Closed components come last.
    pub topo_order: Vec<usize>,
}

impl SccDecomposition {
    /// Component index of every node.
    pub fn membership(&self, n: usize) -> Vec<usize> {
        let mut of = vec![usize::MAX; n];
        for (c, nodes) in self.components.iter().enumerate() {
            for &v in nodes {
                of[v] = c;
            }
        }
        of
    }

    pub fn closed_components(&self) -> impl Iterator<Item = &[usize]> {
        self.components
            .iter()
            .zip(&self.closed_flags)
            .filter(|(_, &closed)| closed)
            .map(|(c, _)| c.as_slice())
    }
}

/// Tarjan's algorithm, iterative. Successors of `i` are the nodes it
/// receives from.
pub fn scc_decompose(net: &SignedNetwork) -> SccDecomposition {
    let s = net.entries();
    let n = net.n();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && s[(i, j)] != 0.0).collect())
        .collect();

    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0;
    // (node, next successor position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = succ[v].get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                components.push(comp);
            }
        }
    }

    let k = components.len();
    let mut of = vec![0; n];
    for (c, nodes) in components.iter().enumerate() {
        for &v in nodes {
            of[v] = c;
        }
    }
    // Receiver component must precede the source component.
    let mut closed = vec![true; k];
    let mut before: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    let mut indeg = vec![0usize; k];
    for i in 0..n {
        for &j in &succ[i] {
            let (ci, cj) = (of[i], of[j]);
            if ci != cj {
                closed[ci] = false;
                if before[ci].insert(cj) {
                    indeg[cj] += 1;
                }
            }
        }
    }
    // Kahn with the smallest-node tie break so block-triangular inputs keep
    // their order.
    let mut ready: BinaryHeap<Reverse<(usize, usize)>> = (0..k)
        .filter(|&c| indeg[c] == 0)
        .map(|c| Reverse((components[c][0], c)))
        .collect();
    let mut topo_order = Vec::with_capacity(k);
    while let Some(Reverse((_, c))) = ready.pop() {
        topo_order.push(c);
        for &next in &before[c] {
            indeg[next] -= 1;
            if indeg[next] == 0 {
                ready.push(Reverse((components[next][0], next)));
            }
        }
    }
    debug_assert_eq!(topo_order.len(), k, "condensation must be acyclic");

    SccDecomposition {
        components,
        closed_flags: closed,
        topo_order,
    }
}

/// Two-sided split of a node set. `first` gets gauge sign +1, `second` −1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

/// Why a node set is not structurally balanced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnbalanceWitness {
    /// `S[(i, j)]` and `S[(j, i)]` have strictly opposite signs.
    OppositePair(usize, usize),
    /// Closed walk through an odd number of negative links.
    OddNegativeCycle(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceResult {
    pub balanced: bool,
    pub bipartition: Option<Bipartition>,
    pub witness: Option<UnbalanceWitness>,
}

fn validate_nodes(n: usize, nodes: &[usize]) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::EmptyNodeSet);
    }
    let mut seen = vec![false; n];
    for &v in nodes {
        if v >= n {
            return Err(Error::Precondition(format!("node {v} out of range for n = {n}")));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::Precondition(format!("node {v} listed twice")));
        }
    }
    Ok(())
}

/// Structural balance of the subgraph induced by `nodes`.
pub fn is_structurally_balanced(net: &SignedNetwork, nodes: &[usize]) -> Result<BalanceResult> {
    let n = net.n();
    validate_nodes(n, nodes)?;
    let s = net.entries();
    let unbalanced = |w| BalanceResult {
        balanced: false,
        bipartition: None,
        witness: Some(w),
    };

    // Link sign per unordered pair; an opposite-signed pair settles it.
    let mut links: Vec<Vec<(usize, bool)>> = vec![Vec::new(); nodes.len()];
    for (a, &i) in nodes.iter().enumerate() {
        for (b, &j) in nodes.iter().enumerate().skip(a + 1) {
            let (x, y) = (s[(i, j)], s[(j, i)]);
            if x * y < 0.0 {
                return Ok(unbalanced(UnbalanceWitness::OppositePair(i.min(j), i.max(j))));
            }
            let v = if x != 0.0 { x } else { y };
            if v != 0.0 {
                let negative = v < 0.0;
                links[a].push((b, negative));
                links[b].push((a, negative));
            }
        }
    }

    // Two-color each connected piece independently.
    let mut color: Vec<Option<bool>> = vec![None; nodes.len()];
    let mut parent = vec![usize::MAX; nodes.len()];
    for start in 0..nodes.len() {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(false);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let cu = color[u].unwrap();
            for &(v, negative) in &links[u] {
                let want = cu ^ negative;
                match color[v] {
                    None => {
                        color[v] = Some(want);
                        parent[v] = u;
                        queue.push_back(v);
                    }
                    Some(cv) if cv != want => {
                        let cycle = tree_cycle(&parent, u, v)
                            .into_iter()
                            .map(|k| nodes[k])
                            .collect();
                        return Ok(unbalanced(UnbalanceWitness::OddNegativeCycle(cycle)));
                    }
                    Some(_) => {}
                }
            }
        }
    }

    let mut first = Vec::new();
    let mut second = Vec::new();
    for (k, c) in color.iter().enumerate() {
        if c.unwrap() {
            second.push(nodes[k]);
        } else {
            first.push(nodes[k]);
        }
    }
    first.sort_unstable();
    second.sort_unstable();
    Ok(BalanceResult {
        balanced: true,
        bipartition: Some(Bipartition { first, second }),
        witness: None,
    })
}

/// Cycle formed by the BFS tree paths to `u` and `v` plus the link `u–v`.
fn tree_cycle(parent: &[usize], u: usize, v: usize) -> Vec<usize> {
    let path = |mut x: usize| {
        let mut p = vec![x];
        while parent[x] != usize::MAX {
            x = parent[x];
            p.push(x);
        }
        p
    };
    let pu = path(u);
    let pv = path(v);
    // Strip the shared tail down to the lowest common ancestor.
    let mut iu = pu.len();
    let mut iv = pv.len();
    while iu > 1 && iv > 1 && pu[iu - 2] == pv[iv - 2] {
        iu -= 1;
        iv -= 1;
    }
    let mut cycle: Vec<usize> = pu[..iu].to_vec();
    cycle.extend(pv[..iv - 1].iter().rev());
    cycle
}

/// ±1 gauge signs: −1 on `bipartition.second`, +1 elsewhere.
pub fn gauge_signs(n: usize, bipartition: &Bipartition) -> Result<Vec<f64>> {
    let mut d = vec![1.0; n];
    let mut seen = vec![false; n];
    for (&v, sign) in bipartition
        .first
        .iter()
        .map(|v| (v, 1.0))
        .chain(bipartition.second.iter().map(|v| (v, -1.0)))
    {
        if v >= n {
            return Err(Error::InconsistentBipartition(format!("node {v} out of range")));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::InconsistentBipartition(format!("node {v} on both sides")));
        }
        d[v] = sign;
    }
    Ok(d)
}

/// `D·A·D` for a ±1 diagonal `D` given by `signs`.
pub fn apply_gauge(a: &DMatrix<f64>, signs: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| signs[i] * a[(i, j)] * signs[j])
}

/// `D·S·D`; every entry among the bipartitioned nodes becomes nonnegative.
pub fn gauge_transform(net: &SignedNetwork, bipartition: &Bipartition) -> Result<SignedNetwork> {
    let n = net.n();
    let d = gauge_signs(n, bipartition)?;
    let out = apply_gauge(net.entries(), &d);
    let members: Vec<usize> = bipartition
        .first
        .iter()
        .chain(&bipartition.second)
        .copied()
        .collect();
    for &i in &members {
        for &j in &members {
            if out[(i, j)] < 0.0 {
                return Err(Error::InconsistentBipartition(format!(
                    "entry ({i}, {j}) stays negative after the gauge"
                )));
            }
        }
    }
    let mut g = SignedNetwork::new(out)?;
    g.meta = net.meta.clone();
    Ok(g)
}

/// Node order that makes the matrix block upper triangular with one
/// irreducible diagonal block per component; closed components last.
pub fn canonic_permutation(dec: &SccDecomposition) -> Vec<usize> {
    dec.topo_order
        .iter()
        .flat_map(|&c| dec.components[c].iter().copied())
        .collect()
}

/// Gershgorin disc of one row: center `A_ii`, radius `Σ_{j≠i} |A_ij|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: f64,
    pub radius: f64,
}

pub fn gershgorin_discs(w: &DMatrix<f64>) -> Vec<Disc> {
    (0..w.nrows())
        .map(|i| Disc {
            center: w[(i, i)],
            radius: (0..w.ncols()).filter(|&j| j != i).map(|j| w[(i, j)].abs()).sum(),
        })
        .collect()
}

/// Largest modulus in the disc union, an upper bound on the spectral radius.
pub fn gershgorin_bound(discs: &[Disc]) -> f64 {
    discs
        .iter()
        .map(|d| d.center.abs() + d.radius)
        .fold(0.0, f64::max)
}

/// Whether `z` lies in the union of `discs`, with absolute slack `tol`.
pub fn in_disc_union(discs: &[Disc], z: num_complex::Complex64, tol: f64) -> bool {
    discs
        .iter()
        .any(|d| (z - num_complex::Complex64::new(d.center, 0.0)).norm() <= d.radius + tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(n: usize, rows: &[f64]) -> SignedNetwork {
        SignedNetwork::from_rows(n, rows).unwrap()
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(matches!(SignedNetwork::from_rows(2, &[1.0, 0.0, 0.0, 0.0]), Err(Error::InvalidNetwork(_))));
        assert!(matches!(SignedNetwork::from_rows(2, &[0.0, f64::NAN, 0.0, 0.0]), Err(Error::InvalidNetwork(_))));
        assert!(matches!(SignedNetwork::new(DMatrix::zeros(0, 0)), Err(Error::EmptyNodeSet)));
    }

    #[test]
    fn no_edges_gives_closed_singletons() {
        let dec = scc_decompose(&net(4, &[0.0; 16]));
        assert_eq!(dec.components.len(), 4);
        assert!(dec.closed_flags.iter().all(|&c| c));
        assert_eq!(canonic_permutation(&dec), vec![0, 1, 2, 3]);
    }

    #[test]
    fn single_arc_receiver_is_open() {
        // Node 0 receives from node 1.
        let dec = scc_decompose(&net(2, &[0.0, 1.0, 0.0, 0.0]));
        let of = dec.membership(2);
        assert_ne!(of[0], of[1]);
        assert!(!dec.closed_flags[of[0]]);
        assert!(dec.closed_flags[of[1]]);
        // Closed block last.
        assert_eq!(canonic_permutation(&dec), vec![0, 1]);
    }

    #[test]
    fn balance_of_small_triangles() {
        let all_pos = net(3, &[0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
        let r = is_structurally_balanced(&all_pos, &[0, 1, 2]).unwrap();
        assert!(r.balanced);
        assert_eq!(
            r.bipartition.unwrap(),
            Bipartition {
                first: vec![0, 1, 2],
                second: vec![]
            }
        );

        // (−/−, −/−, +/+): pair {0,1} trusts, node 2 distrusts both.
        let two_neg = net(3, &[0.0, 1.0, -1.0, 1.0, 0.0, -1.0, -1.0, -1.0, 0.0]);
        let r = is_structurally_balanced(&two_neg, &[0, 1, 2]).unwrap();
        assert!(r.balanced);
        let b = r.bipartition.unwrap();
        assert_eq!(b.first, vec![0, 1]);
        assert_eq!(b.second, vec![2]);

        let all_neg = net(3, &[0.0, -1.0, -1.0, -1.0, 0.0, -1.0, -1.0, -1.0, 0.0]);
        let r = is_structurally_balanced(&all_neg, &[0, 1, 2]).unwrap();
        assert!(!r.balanced);
        match r.witness.unwrap() {
            UnbalanceWitness::OddNegativeCycle(c) => {
                let mut c = c;
                c.sort_unstable();
                assert_eq!(c, vec![0, 1, 2]);
            }
            w => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn opposite_pair_is_the_witness() {
        let s = net(3, &[0.0, 2.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let r = is_structurally_balanced(&s, &[0, 1, 2]).unwrap();
        assert!(!r.balanced);
        assert_eq!(r.witness, Some(UnbalanceWitness::OppositePair(0, 1)));
    }

    #[test]
    fn zero_direction_follows_the_nonzero_one() {
        // (−/0) pair: nodes must be split.
        let s = net(2, &[0.0, -1.0, 0.0, 0.0]);
        let b = is_structurally_balanced(&s, &[0, 1]).unwrap().bipartition.unwrap();
        assert_eq!((b.first, b.second), (vec![0], vec![1]));
    }

    #[test]
    fn empty_or_bad_node_sets() {
        let s = net(2, &[0.0; 4]);
        assert!(matches!(is_structurally_balanced(&s, &[]), Err(Error::EmptyNodeSet)));
        assert!(is_structurally_balanced(&s, &[2]).is_err());
        assert!(is_structurally_balanced(&s, &[1, 1]).is_err());
    }

    #[test]
    fn gauge_flips_mutual_mistrust() {
        let s = net(2, &[0.0, -1.0, -1.0, 0.0]);
        let b = Bipartition {
            first: vec![0],
            second: vec![1],
        };
        let g = gauge_transform(&s, &b).unwrap();
        assert_eq!(g.entries(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));

        let same_side = Bipartition {
            first: vec![0, 1],
            second: vec![],
        };
        assert!(matches!(gauge_transform(&s, &same_side), Err(Error::InconsistentBipartition(_))));

        let pos = net(2, &[0.0, 3.0, 1.0, 0.0]);
        assert_eq!(gauge_transform(&pos, &same_side).unwrap().entries(), pos.entries());
    }

    #[test]
    fn gershgorin_row_of_a_normalized_matrix() {
        let full = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.25, 0.25, -0.25, 0.25, //
                0.5, 0.5, 0.0, 0.0, //
                0.25, -0.25, 0.25, -0.25, //
                0.0, 0.0, -0.5, 0.5,
            ],
        );
        let discs = gershgorin_discs(&full);
        assert_eq!(discs[0], Disc { center: 0.25, radius: 0.75 });
        assert_eq!(gershgorin_bound(&discs), 1.0);
        let id = DMatrix::<f64>::identity(3, 3);
        assert!(gershgorin_discs(&id).iter().all(|d| *d == Disc { center: 1.0, radius: 0.0 }));
    }
}

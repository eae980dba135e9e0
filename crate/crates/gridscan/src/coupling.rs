//! Staged greedy coupling of two weighted sets of block colourings.
//!
//! For boundary colourings `Z`, `Z'` that differ in one slot, the coupling
//! pairs the product distribution on `C_Z x C_Z'` (each colouring of `C_Z`
//! carries weight `|C_Z'|` and vice versa, total `M = |C_Z| * |C_Z'|`) so
//! that the weight on pairs disagreeing at a block vertex upper-bounds the
//! disagreement probability of the two heat-bath updates.
//!
//! The phases, in order, each assign as much weight as possible:
//!
//! 1. identical colourings are matched with weight `min(w_left, w_right)`;
//! 2. colourings equal everywhere except possibly `v1` (the vertex next to
//!    the discrepancy) are matched greedily in canonical order;
//! 3. colourings equal everywhere except possibly the two least significant
//!    vertices of the canonical order are matched greedily;
//! 4. the remainder is matched greedily in canonical order.
//!
//! Within a phase "greedily in canonical order" means: walk both sides in
//! ascending canonical key order and repeatedly pair the first entries that
//! still carry weight, assigning the minimum of the two residuals.  Each
//! phase therefore matches on a coarser prefix of the canonical key (all
//! digits, all but one, all but two, none), which is what keeps the
//! disagreement weight small at the more significant vertices.

use std::io;

use crate::block::{BlockColouring, BlockGeometry, BoundaryColouring};
use crate::rat::{ratio, Rational};

/// A set of block colourings (as packed canonical keys) with integer weights.
#[derive(Clone, Debug)]
pub struct WeightedSet {
    /// `(canonical key, weight)`, strictly ascending by key.
    pub entries: Vec<(u32, u64)>,
    /// Sum of all weights.
    pub total: u64,
}

impl WeightedSet {
    /// Uniform weight `w` on every key.  `keys` must be strictly ascending.
    pub fn uniform(keys: &[u32], w: u64) -> WeightedSet {
        debug_assert!(keys.windows(2).all(|p| p[0] < p[1]));
        WeightedSet {
            entries: keys.iter().map(|&k| (k, w)).collect(),
            total: keys.len() as u64 * w,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The canonical integer key of a block colouring (vertices taken in
/// decreasing distance from `v1`, so `v1` is the least significant digit).
pub fn canonical_order(c: &BlockColouring, g: &BlockGeometry, q: u8) -> u64 {
    g.key_of(&c.0, q) as u64
}

/// Weighted sets for a pair of enumerations: each colouring of `cz` gets
/// weight `|cz'|` and vice versa, so both sides total `M = |cz| * |cz'|`.
pub fn build_weighted_sets(
    g: &BlockGeometry,
    q: u8,
    cz: &[BlockColouring],
    czp: &[BlockColouring],
) -> (WeightedSet, WeightedSet) {
    assert!(!cz.is_empty() && !czp.is_empty(), "empty colouring set");
    let mut kl: Vec<u32> = cz.iter().map(|c| g.key_of(&c.0, q)).collect();
    let mut kr: Vec<u32> = czp.iter().map(|c| g.key_of(&c.0, q)).collect();
    kl.sort_unstable();
    kr.sort_unstable();
    (
        WeightedSet::uniform(&kl, kr.len() as u64),
        WeightedSet::uniform(&kr, kl.len() as u64),
    )
}

/// Sparse edge-weighted bipartite graph realising the coupling.
#[derive(Clone, Debug)]
pub struct CouplingGraph {
    pub left: WeightedSet,
    pub right: WeightedSet,
    /// `(left entry index, right entry index, weight)`, positive weights
    /// only, in assignment order.
    pub edges: Vec<(u32, u32, u64)>,
    /// `edges[..phase_ends[p]]` is the work of phases `1..=p+1`.
    pub phase_ends: [usize; 4],
    q: u8,
    /// `q^digit_pos(v)` per block vertex.
    digit_pow: Vec<u64>,
}

/// Run the four phases over `(key, weight)` slices.  `on_edge` receives
/// `(left_index, right_index, weight, phase)` for every positive assignment.
/// Residual buffers are caller-provided so sweeps can reuse them.
pub(crate) fn coupling_phases_core(
    left: &[(u32, u64)],
    right: &[(u32, u64)],
    q: u32,
    resid_l: &mut Vec<u64>,
    resid_r: &mut Vec<u64>,
    on_edge: impl FnMut(usize, usize, u64, u8),
) {
    resid_l.clear();
    resid_l.extend(left.iter().map(|e| e.1));
    resid_r.clear();
    resid_r.extend(right.iter().map(|e| e.1));
    let keys_l: Vec<u32> = left.iter().map(|e| e.0).collect();
    let keys_r: Vec<u32> = right.iter().map(|e| e.0).collect();
    coupling_phases_keys(&keys_l, &keys_r, q, resid_l, resid_r, on_edge);
}

/// One greedy matching pass restricted to groups of equal `key / divisor`.
/// Both key slices are strictly ascending, so groups merge in order; inside
/// a shared group the first left and right entries that still carry weight
/// are paired with the minimum of the two residuals.
fn greedy_pass(
    keys_l: &[u32],
    keys_r: &[u32],
    divisor: u32,
    resid_l: &mut [u64],
    resid_r: &mut [u64],
    phase: u8,
    on_edge: &mut impl FnMut(usize, usize, u64, u8),
) {
    let (mut i, mut j) = (0usize, 0usize);
    while i < keys_l.len() && j < keys_r.len() {
        if resid_l[i] == 0 {
            i += 1;
            continue;
        }
        if resid_r[j] == 0 {
            j += 1;
            continue;
        }
        match (keys_l[i] / divisor).cmp(&(keys_r[j] / divisor)) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let w = resid_l[i].min(resid_r[j]);
                on_edge(i, j, w, phase);
                resid_l[i] -= w;
                resid_r[j] -= w;
            }
        }
    }
}

/// The four phases over bare key slices with residuals already filled in
/// (the sweep hot path: uniform weights, reused buffers, no `(key, weight)`
/// materialisation).  Phase `p` matches keys equal above the `p - 1` least
/// significant digits; the last phase is unrestricted.
pub(crate) fn coupling_phases_keys(
    keys_l: &[u32],
    keys_r: &[u32],
    q: u32,
    resid_l: &mut [u64],
    resid_r: &mut [u64],
    mut on_edge: impl FnMut(usize, usize, u64, u8),
) {
    debug_assert_eq!(keys_l.len(), resid_l.len());
    debug_assert_eq!(keys_r.len(), resid_r.len());

    // u32::MAX collapses every key into one group: the unrestricted pass.
    let divisors = [1, q, q * q, u32::MAX];
    for (phase0, &d) in divisors.iter().enumerate() {
        greedy_pass(keys_l, keys_r, d, resid_l, resid_r, phase0 as u8 + 1, &mut on_edge);
    }
    debug_assert!(resid_l.iter().all(|&w| w == 0), "left weight unmatched");
    debug_assert!(resid_r.iter().all(|&w| w == 0), "right weight unmatched");
}

/// Couple two weighted sets of equal total weight.
pub fn couple_staged(
    left: &WeightedSet,
    right: &WeightedSet,
    g: &BlockGeometry,
    q: u8,
) -> CouplingGraph {
    assert_eq!(left.total, right.total, "weighted sets must balance");
    assert!(!left.is_empty() && !right.is_empty(), "empty weighted set");
    let mut edges = Vec::new();
    let mut phase_ends = [0usize; 4];
    let (mut rl, mut rr) = (Vec::new(), Vec::new());
    coupling_phases_core(
        &left.entries,
        &right.entries,
        q as u32,
        &mut rl,
        &mut rr,
        |i, j, w, phase| {
            edges.push((i as u32, j as u32, w));
            for p in phase as usize - 1..4 {
                phase_ends[p] = edges.len();
            }
        },
    );
    let digit_pow = (0..g.block_len())
        .map(|v| (q as u64).pow(g.digit_pos(v)))
        .collect();
    CouplingGraph {
        left: left.clone(),
        right: right.clone(),
        edges,
        phase_ends,
        q,
        digit_pow,
    }
}

/// Enumerate both sides for a pair of boundary colourings and couple them.
pub fn coupling_for_pair(
    g: &BlockGeometry,
    q: u8,
    z: &BoundaryColouring,
    zp: &BoundaryColouring,
) -> CouplingGraph {
    let cz = g.enumerate_agreeing(q, z);
    let czp = g.enumerate_agreeing(q, zp);
    let (l, r) = build_weighted_sets(g, q, &cz, &czp);
    couple_staged(&l, &r, g, q)
}

impl CouplingGraph {
    /// Total coupled weight `M`.
    pub fn total(&self) -> u64 {
        self.left.total
    }

    fn digit(&self, key: u32, vertex: usize) -> u64 {
        key as u64 / self.digit_pow[vertex] % self.q as u64
    }

    /// Weight on edges whose endpoints disagree at `vertex`.
    pub fn mismatch_weight(&self, vertex: usize) -> u64 {
        self.edges
            .iter()
            .filter(|&&(i, j, _)| {
                let kl = self.left.entries[i as usize].0;
                let kr = self.right.entries[j as usize].0;
                self.digit(kl, vertex) != self.digit(kr, vertex)
            })
            .map(|&(_, _, w)| w)
            .sum()
    }

    /// Probability (exact rational) that the coupled pair disagrees at
    /// `vertex`.
    pub fn mismatch_probability(&self, vertex: usize) -> Rational {
        ratio(self.mismatch_weight(vertex), self.total())
    }

    /// Verify that edge sums reproduce both marginals exactly.
    pub fn check_marginals(&self) -> Result<(), String> {
        let mut lsum = vec![0u64; self.left.len()];
        let mut rsum = vec![0u64; self.right.len()];
        let mut total = 0u64;
        for &(i, j, w) in &self.edges {
            if w == 0 {
                return Err("zero-weight edge".into());
            }
            lsum[i as usize] += w;
            rsum[j as usize] += w;
            total += w;
        }
        if total != self.total() {
            return Err(format!("total {} != M {}", total, self.total()));
        }
        for (i, &(_, w)) in self.left.entries.iter().enumerate() {
            if lsum[i] != w {
                return Err(format!("left entry {i}: edge sum {} != weight {w}", lsum[i]));
            }
        }
        for (j, &(_, w)) in self.right.entries.iter().enumerate() {
            if rsum[j] != w {
                return Err(format!("right entry {j}: edge sum {} != weight {w}", rsum[j]));
            }
        }
        Ok(())
    }

    /// Debug dump: one `<left> <right> <weight>` line per edge, with phase
    /// marker comments.
    pub fn write_dump<W: io::Write>(&self, g: &BlockGeometry, out: &mut W) -> io::Result<()> {
        let q = self.q;
        let mut phase = 0usize;
        for (n, &(i, j, w)) in self.edges.iter().enumerate() {
            while phase < 4 && n == if phase == 0 { 0 } else { self.phase_ends[phase - 1] } {
                writeln!(out, "# phase {}", phase + 1)?;
                phase += 1;
            }
            let kl = self.left.entries[i as usize].0;
            let kr = self.right.entries[j as usize].0;
            let cl = BlockColouring(g.colours_of_key(kl, q));
            let cr = BlockColouring(g.colours_of_key(kr, q));
            writeln!(out, "{cl} {cr} {w}")?;
        }
        Ok(())
    }
}

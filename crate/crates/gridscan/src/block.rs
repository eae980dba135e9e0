//! Block geometry: the 2x2, 2x3 and 3x3 sub-grids whose heat-bath updates the
//! certification sweeps analyse.
//!
//! Conventions (fixed; everything downstream depends on them):
//!
//! * Coordinates are `(x, y)` with `x` growing rightwards and `y` upwards.
//! * **2x2 block**: `v1` bottom-left, `v2` top-left, `v3` top-right, `v4`
//!   bottom-right.  Boundary slots start at `z1` immediately left of `v1` and
//!   continue counter-clockwise (`z2` below `v1`, ..., `z8` left of `v2`).
//! * **2x3 / 3x3 blocks**: vertices are labelled row-major from the top-left
//!   (`v1` top-left).  Boundary slots start at `z1` immediately left of `v1`
//!   and continue counter-clockwise (down the left side first).
//! * A *boundary colouring* may leave slots unconstrained; the wildcard is
//!   stored as `0` and printed as `*`.  Real colours are `1..=q`, `q <= 9`,
//!   and print as single digits.
//! * The *canonical order* on block colourings sorts vertices by decreasing
//!   graph distance from `v1` (ties by label), so `v1` is the least
//!   significant digit of the packed integer key.  For the 2x2 block this is
//!   the digit order `v3, v2, v4, v1`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

/// Largest supported number of colours (colours print as single digits).
pub const MAX_Q: u8 = 9;
/// Largest number of block vertices (3x3).
pub const MAX_BLOCK: usize = 9;

/// A colour, 1-based.  `0` is reserved for the boundary wildcard.
pub type Colour = u8;
pub const WILDCARD: Colour = 0;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum BlockShape {
    TwoByTwo,
    TwoByThree,
    ThreeByThree,
}

impl BlockShape {
    /// `(rows, cols)`
    pub fn dims(self) -> (usize, usize) {
        match self {
            BlockShape::TwoByTwo => (2, 2),
            BlockShape::TwoByThree => (2, 3),
            BlockShape::ThreeByThree => (3, 3),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BlockShape::TwoByTwo => "2x2",
            BlockShape::TwoByThree => "2x3",
            BlockShape::ThreeByThree => "3x3",
        }
    }
}

impl FromStr for BlockShape {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "2x2" => Ok(BlockShape::TwoByTwo),
            "2x3" => Ok(BlockShape::TwoByThree),
            "3x3" => Ok(BlockShape::ThreeByThree),
            other => Err(format!("unknown block shape {other:?} (want 2x2, 2x3 or 3x3)")),
        }
    }
}

impl fmt::Display for BlockShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which kind of canonical discrepancy slot a boundary position reduces to.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SlotClass {
    /// Slot adjacent to a corner vertex (`z1`, next to `v1`).
    Corner,
    /// Slot adjacent to a degree-1 ("middle of a side") vertex.
    Middle,
}

/// A canonical position for the boundary discrepancy in pair sweeps.
#[derive(Clone, Copy, Debug)]
pub struct CanonicalSlot {
    pub class: SlotClass,
    /// Boundary slot index (0-based).
    pub slot: usize,
    /// The block vertex the slot is adjacent to.
    pub vertex: usize,
}

/// An automorphism of the block-plus-boundary graph.
#[derive(Clone, Debug)]
pub struct Symmetry {
    pub name: &'static str,
    /// `block_perm[v]` is the image of block vertex `v`.
    pub block_perm: Vec<usize>,
    /// `boundary_perm[z]` is the image of boundary slot `z`.
    pub boundary_perm: Vec<usize>,
}

/// Geometry of one block shape, with everything the sweeps need precomputed.
#[derive(Clone, Debug)]
pub struct BlockGeometry {
    shape: BlockShape,
    rows: usize,
    cols: usize,
    block_coords: Vec<(i32, i32)>,
    boundary_coords: Vec<(i32, i32)>,
    internal_edges: Vec<(usize, usize)>,
    /// `(slot, vertex)` pairs.
    boundary_edges: Vec<(usize, usize)>,
    slots_of_vertex: Vec<Vec<usize>>,
    vertex_of_slot: Vec<usize>,
    /// Vertex visited at each recursion rank, most significant digit first.
    significance: Vec<usize>,
    /// Digit position of each vertex in the packed key (0 = least significant).
    digit_pos: Vec<u32>,
    /// For each rank, the earlier ranks holding internal neighbours.
    prior_ranks: Vec<Vec<usize>>,
    symmetries: Vec<Symmetry>,
    canonical_slots: Vec<CanonicalSlot>,
}

type Xf = fn((i64, i64)) -> (i64, i64);

const XFS_SQUARE: [(&str, Xf); 8] = [
    ("id", |(a, b)| (a, b)),
    ("rot90", |(a, b)| (-b, a)),
    ("rot180", |(a, b)| (-a, -b)),
    ("rot270", |(a, b)| (b, -a)),
    ("mirror_x", |(a, b)| (-a, b)),
    ("mirror_y", |(a, b)| (a, -b)),
    ("diag", |(a, b)| (b, a)),
    ("antidiag", |(a, b)| (-b, -a)),
];

const XFS_RECT: [(&str, Xf); 4] = [
    ("id", |(a, b)| (a, b)),
    ("rot180", |(a, b)| (-a, -b)),
    ("mirror_x", |(a, b)| (-a, b)),
    ("mirror_y", |(a, b)| (a, -b)),
];

impl BlockGeometry {
    pub fn new(shape: BlockShape) -> BlockGeometry {
        let (rows, cols) = shape.dims();

        // Block vertex coordinates in label order.
        let block_coords: Vec<(i32, i32)> = if shape == BlockShape::TwoByTwo {
            vec![(0, 0), (0, 1), (1, 1), (1, 0)]
        } else {
            // Row-major from the top-left.
            (0..rows * cols)
                .map(|k| ((k % cols) as i32, (rows - 1 - k / cols) as i32))
                .collect()
        };

        // Counter-clockwise boundary ring, rotated to start at the slot left
        // of v1.
        let mut ring: Vec<(i32, i32)> = Vec::new();
        for y in (0..rows as i32).rev() {
            ring.push((-1, y));
        }
        for x in 0..cols as i32 {
            ring.push((x, -1));
        }
        for y in 0..rows as i32 {
            ring.push((cols as i32, y));
        }
        for x in (0..cols as i32).rev() {
            ring.push((x, rows as i32));
        }
        let z1 = (-1, block_coords[0].1);
        let start = ring.iter().position(|&p| p == z1).unwrap();
        ring.rotate_left(start);
        let boundary_coords = ring;

        let vertex_at: HashMap<(i32, i32), usize> = block_coords
            .iter()
            .enumerate()
            .map(|(i, &p)| (p, i))
            .collect();
        let slot_at: HashMap<(i32, i32), usize> = boundary_coords
            .iter()
            .enumerate()
            .map(|(i, &p)| (p, i))
            .collect();

        let mut internal_edges = Vec::new();
        for v in 0..block_coords.len() {
            for w in v + 1..block_coords.len() {
                let (a, b) = (block_coords[v], block_coords[w]);
                if (a.0 - b.0).abs() + (a.1 - b.1).abs() == 1 {
                    internal_edges.push((v, w));
                }
            }
        }

        let mut boundary_edges = Vec::new();
        let mut slots_of_vertex = vec![Vec::new(); block_coords.len()];
        let mut vertex_of_slot = vec![usize::MAX; boundary_coords.len()];
        for (z, &(x, y)) in boundary_coords.iter().enumerate() {
            for &(dx, dy) in &[(1, 0), (-1, 0), (0, 1), (0, -1)] {
                if let Some(&v) = vertex_at.get(&(x + dx, y + dy)) {
                    boundary_edges.push((z, v));
                    slots_of_vertex[v].push(z);
                    vertex_of_slot[z] = v;
                }
            }
        }
        // Middle vertices of a side have one slot, corners two, the 3x3
        // centre none; no slot touches two vertices.
        debug_assert!(vertex_of_slot.iter().all(|&v| v != usize::MAX));

        // Canonical digit order: decreasing distance from v1, ties by label.
        let dist = |v: usize| {
            let (a, b) = (block_coords[v], block_coords[0]);
            (a.0 - b.0).abs() + (a.1 - b.1).abs()
        };
        let mut significance: Vec<usize> = (0..block_coords.len()).collect();
        significance.sort_by_key(|&v| (std::cmp::Reverse(dist(v)), v));
        let n = significance.len();
        let mut digit_pos = vec![0u32; n];
        for (rank, &v) in significance.iter().enumerate() {
            digit_pos[v] = (n - 1 - rank) as u32;
        }
        let mut prior_ranks = vec![Vec::new(); n];
        for r in 0..n {
            for p in 0..r {
                let (a, b) = (significance[p], significance[r]);
                let e = if a < b { (a, b) } else { (b, a) };
                if internal_edges.contains(&e) {
                    prior_ranks[r].push(p);
                }
            }
        }

        // Dihedral symmetries, as permutations of vertices and slots.
        let xfs: &[(&str, Xf)] = if rows == cols { &XFS_SQUARE } else { &XFS_RECT };
        let map_coord = |t: Xf, (x, y): (i32, i32)| -> (i32, i32) {
            let p = (
                2 * x as i64 - (cols as i64 - 1),
                2 * y as i64 - (rows as i64 - 1),
            );
            let (a, b) = t(p);
            let nx = a + (cols as i64 - 1);
            let ny = b + (rows as i64 - 1);
            debug_assert!(nx % 2 == 0 && ny % 2 == 0);
            ((nx / 2) as i32, (ny / 2) as i32)
        };
        let mut symmetries = Vec::new();
        for &(name, t) in xfs {
            let block_perm: Vec<usize> = block_coords
                .iter()
                .map(|&p| vertex_at[&map_coord(t, p)])
                .collect();
            let boundary_perm: Vec<usize> = boundary_coords
                .iter()
                .map(|&p| slot_at[&map_coord(t, p)])
                .collect();
            symmetries.push(Symmetry {
                name,
                block_perm,
                boundary_perm,
            });
        }

        // Canonical discrepancy slots: z1 (corner class) plus, where a
        // degree-1 vertex exists, the slot next to the first such vertex.
        let mut canonical_slots = vec![CanonicalSlot {
            class: SlotClass::Corner,
            slot: 0,
            vertex: vertex_of_slot[0],
        }];
        if let Some(v) = (0..n).find(|&v| slots_of_vertex[v].len() == 1) {
            canonical_slots.push(CanonicalSlot {
                class: SlotClass::Middle,
                slot: slots_of_vertex[v][0],
                vertex: v,
            });
        }

        BlockGeometry {
            shape,
            rows,
            cols,
            block_coords,
            boundary_coords,
            internal_edges,
            boundary_edges,
            slots_of_vertex,
            vertex_of_slot,
            significance,
            digit_pos,
            prior_ranks,
            symmetries,
            canonical_slots,
        }
    }

    pub fn shape(&self) -> BlockShape {
        self.shape
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn block_len(&self) -> usize {
        self.block_coords.len()
    }
    pub fn boundary_len(&self) -> usize {
        self.boundary_coords.len()
    }
    pub fn block_coords(&self) -> &[(i32, i32)] {
        &self.block_coords
    }
    pub fn boundary_coords(&self) -> &[(i32, i32)] {
        &self.boundary_coords
    }
    pub fn internal_edges(&self) -> &[(usize, usize)] {
        &self.internal_edges
    }
    pub fn boundary_edges(&self) -> &[(usize, usize)] {
        &self.boundary_edges
    }
    pub fn slots_of_vertex(&self, v: usize) -> &[usize] {
        &self.slots_of_vertex[v]
    }
    pub fn vertex_of_slot(&self, z: usize) -> usize {
        self.vertex_of_slot[z]
    }
    pub fn symmetries(&self) -> &[Symmetry] {
        &self.symmetries
    }
    pub fn canonical_slots(&self) -> &[CanonicalSlot] {
        &self.canonical_slots
    }
    /// Digit order of the canonical key, most significant vertex first.
    pub fn significance(&self) -> &[usize] {
        &self.significance
    }
    /// Digit position of vertex `v` in the packed key (0 = least significant).
    pub fn digit_pos(&self, v: usize) -> u32 {
        self.digit_pos[v]
    }

    pub fn vertex_name(&self, v: usize) -> String {
        format!("v{}", v + 1)
    }
    pub fn slot_name(&self, z: usize) -> String {
        format!("z{}", z + 1)
    }

    /// Packed canonical key of a full block colouring.
    pub fn key_of(&self, colours: &[Colour], q: u8) -> u32 {
        assert_eq!(colours.len(), self.block_len());
        let mut key = 0u32;
        for &v in &self.significance {
            debug_assert!(colours[v] >= 1 && colours[v] <= q);
            key = key * q as u32 + (colours[v] - 1) as u32;
        }
        key
    }

    /// Inverse of [`key_of`].
    pub fn colours_of_key(&self, mut key: u32, q: u8) -> Vec<Colour> {
        let mut colours = vec![0u8; self.block_len()];
        for &v in self.significance.iter().rev() {
            colours[v] = (key % q as u32) as u8 + 1;
            key /= q as u32;
        }
        debug_assert_eq!(key, 0);
        colours
    }

    /// Does block colouring `c` agree with boundary colouring `z`?  Wildcard
    /// slots constrain nothing.
    pub fn agrees(&self, c: &BlockColouring, z: &BoundaryColouring) -> bool {
        assert_eq!(c.0.len(), self.block_len());
        assert_eq!(z.0.len(), self.boundary_len());
        for &(a, b) in &self.internal_edges {
            if c.0[a] == c.0[b] {
                return false;
            }
        }
        for &(slot, v) in &self.boundary_edges {
            if z.0[slot] != WILDCARD && z.0[slot] == c.0[v] {
                return false;
            }
        }
        true
    }

    /// Per-vertex forbidden-colour bitmasks induced by a boundary colouring
    /// (bit `c-1` set means colour `c` is unavailable at that vertex).
    pub fn forbidden_masks(&self, z: &BoundaryColouring) -> Vec<u16> {
        assert_eq!(z.0.len(), self.boundary_len());
        let mut masks = vec![0u16; self.block_len()];
        for &(slot, v) in &self.boundary_edges {
            if z.0[slot] != WILDCARD {
                masks[v] |= 1 << (z.0[slot] - 1);
            }
        }
        masks
    }

    /// Enumerate the packed keys of all proper block colourings consistent
    /// with the given forbidden masks, in ascending key order, appending to
    /// `out`.
    pub fn enumerate_keys_into(&self, q: u8, masks: &[u16], out: &mut Vec<u32>) {
        assert_eq!(masks.len(), self.block_len());
        assert!(q >= 1 && q <= MAX_Q);
        let mut digits = [0u8; MAX_BLOCK];
        self.enum_rec(q, masks, 0, &mut digits, 0, out);
    }

    fn enum_rec(
        &self,
        q: u8,
        masks: &[u16],
        rank: usize,
        digits: &mut [u8; MAX_BLOCK],
        prefix: u32,
        out: &mut Vec<u32>,
    ) {
        if rank == self.significance.len() {
            out.push(prefix);
            return;
        }
        let v = self.significance[rank];
        let mask = masks[v];
        'colour: for d in 0..q {
            if mask >> d & 1 != 0 {
                continue;
            }
            for &p in &self.prior_ranks[rank] {
                if digits[p] == d {
                    continue 'colour;
                }
            }
            digits[rank] = d;
            self.enum_rec(q, masks, rank + 1, digits, prefix * q as u32 + d as u32, out);
        }
    }

    /// Number of proper block colourings consistent with the masks.
    pub fn count_agreeing(&self, q: u8, masks: &[u16]) -> u64 {
        let (total, _) = self.count_by_vertex_colour(q, masks);
        total
    }

    /// Total count plus, for every vertex and colour, how many of the counted
    /// colourings give that vertex that colour.  `counts[v][c-1]`.
    pub fn count_by_vertex_colour(&self, q: u8, masks: &[u16]) -> (u64, Vec<[u64; MAX_Q as usize]>) {
        assert_eq!(masks.len(), self.block_len());
        assert!(q >= 1 && q <= MAX_Q);
        let mut counts = vec![[0u64; MAX_Q as usize]; self.block_len()];
        let mut digits = [0u8; MAX_BLOCK];
        let total = self.count_rec(q, masks, 0, &mut digits, &mut counts);
        (total, counts)
    }

    fn count_rec(
        &self,
        q: u8,
        masks: &[u16],
        rank: usize,
        digits: &mut [u8; MAX_BLOCK],
        counts: &mut [[u64; MAX_Q as usize]],
    ) -> u64 {
        if rank == self.significance.len() {
            return 1;
        }
        let v = self.significance[rank];
        let mask = masks[v];
        let mut total = 0u64;
        'colour: for d in 0..q {
            if mask >> d & 1 != 0 {
                continue;
            }
            for &p in &self.prior_ranks[rank] {
                if digits[p] == d {
                    continue 'colour;
                }
            }
            digits[rank] = d;
            let sub = self.count_rec(q, masks, rank + 1, digits, counts);
            counts[v][d as usize] += sub;
            total += sub;
        }
        total
    }

    /// All proper block colourings agreeing with `z`, ascending by canonical
    /// key.
    pub fn enumerate_agreeing(&self, q: u8, z: &BoundaryColouring) -> Vec<BlockColouring> {
        let masks = self.forbidden_masks(z);
        let mut keys = Vec::new();
        self.enumerate_keys_into(q, &masks, &mut keys);
        keys.into_iter()
            .map(|k| BlockColouring(self.colours_of_key(k, q)))
            .collect()
    }

    /// Boundary colouring number `idx` in the lexicographic order with `z1`
    /// as the most significant digit.  Inverse of [`boundary_index`].
    pub fn boundary_from_index(&self, mut idx: u64, q: u8) -> BoundaryColouring {
        let l = self.boundary_len();
        let mut entries = vec![0u8; l];
        for k in (0..l).rev() {
            entries[k] = (idx % q as u64) as u8 + 1;
            idx /= q as u64;
        }
        assert_eq!(idx, 0, "index out of range");
        BoundaryColouring(entries)
    }

    pub fn boundary_index(&self, z: &BoundaryColouring, q: u8) -> u64 {
        assert_eq!(z.0.len(), self.boundary_len());
        let mut idx = 0u64;
        for &e in &z.0 {
            assert!(e != WILDCARD, "wildcard boundary has no index");
            assert!(e <= q);
            idx = idx * q as u64 + (e - 1) as u64;
        }
        idx
    }

    /// Candidates `(canonical_slot_index, mapped_vertex)` over all symmetries
    /// that map boundary slot `i` exactly onto a canonical slot, in the fixed
    /// symmetry order.
    pub fn map_position_exact(&self, i: usize, j: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (ci, cs) in self.canonical_slots.iter().enumerate() {
            for s in &self.symmetries {
                if s.boundary_perm[i] == cs.slot {
                    let cand = (ci, s.block_perm[j]);
                    if !out.contains(&cand) {
                        out.push(cand);
                    }
                }
            }
        }
        out
    }

    /// Like [`map_position_exact`], but if no symmetry maps slot `i` onto a
    /// canonical slot, fall back to the other slots adjacent to the same
    /// block vertex.  Enumeration counts depend on the boundary only through
    /// the per-vertex forbidden sets, so sibling slots of one vertex induce
    /// identical count families and their bounds are interchangeable.
    pub fn map_position(&self, i: usize, j: usize) -> Vec<(usize, usize)> {
        let exact = self.map_position_exact(i, j);
        if !exact.is_empty() {
            return exact;
        }
        let mut out = Vec::new();
        for &sib in &self.slots_of_vertex[self.vertex_of_slot[i]] {
            if sib == i {
                continue;
            }
            for cand in self.map_position_exact(sib, j) {
                if !out.contains(&cand) {
                    out.push(cand);
                }
            }
        }
        out
    }

    /// First exact candidate: the canonical boundary slot `i` reduces to and
    /// where block vertex `j` lands under the same symmetry.  Unique for the
    /// 2x2 block.  Returns `(canonical_slot, mapped_vertex)` as indices.
    pub fn symmetry_map_position(&self, i: usize, j: usize) -> Option<(usize, usize)> {
        self.map_position_exact(i, j)
            .first()
            .map(|&(ci, v)| (self.canonical_slots[ci].slot, v))
    }
}

/// Colouring of a block's boundary; `0` entries are wildcards.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BoundaryColouring(pub Vec<Colour>);

/// Proper colouring of the block vertices, in label order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BlockColouring(pub Vec<Colour>);

fn parse_digits(s: &str, q: u8, len: usize, allow_wildcard: bool) -> Result<Vec<u8>, String> {
    if s.chars().count() != len {
        return Err(format!("expected {len} symbols, got {:?}", s));
    }
    let mut out = Vec::with_capacity(len);
    for ch in s.chars() {
        match ch {
            '*' if allow_wildcard => out.push(WILDCARD),
            '1'..='9' => {
                let c = ch as u8 - b'0';
                if c > q {
                    return Err(format!("colour {c} out of range 1..={q} in {s:?}"));
                }
                out.push(c);
            }
            other => return Err(format!("bad symbol {other:?} in {s:?}")),
        }
    }
    Ok(out)
}

impl BoundaryColouring {
    pub fn uniform(len: usize, colour: Colour) -> BoundaryColouring {
        BoundaryColouring(vec![colour; len])
    }
    pub fn wildcards(len: usize) -> BoundaryColouring {
        BoundaryColouring(vec![WILDCARD; len])
    }
    pub fn is_fully_specified(&self) -> bool {
        self.0.iter().all(|&e| e != WILDCARD)
    }
    /// Parse the digit/`*` encoding, slots in `z` order.
    pub fn parse(s: &str, q: u8, len: usize) -> Result<BoundaryColouring, String> {
        Ok(BoundaryColouring(parse_digits(s, q, len, true)?))
    }
}

impl fmt::Display for BoundaryColouring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &e in &self.0 {
            if e == WILDCARD {
                f.write_str("*")?;
            } else {
                write!(f, "{e}")?;
            }
        }
        Ok(())
    }
}

impl BlockColouring {
    pub fn parse(s: &str, q: u8, len: usize) -> Result<BlockColouring, String> {
        Ok(BlockColouring(parse_digits(s, q, len, false)?))
    }
}

impl fmt::Display for BlockColouring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &e in &self.0 {
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(seed: u64) -> impl FnMut() -> u64 {
        let mut s = seed;
        move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            s >> 33
        }
    }

    #[test]
    fn two_by_two_layout() {
        let g = BlockGeometry::new(BlockShape::TwoByTwo);
        assert_eq!(g.block_len(), 4);
        assert_eq!(g.boundary_len(), 8);
        assert_eq!(g.block_coords(), &[(0, 0), (0, 1), (1, 1), (1, 0)]);
        assert_eq!(
            g.boundary_coords(),
            &[(-1, 0), (0, -1), (1, -1), (2, 0), (2, 1), (1, 2), (0, 2), (-1, 1)]
        );
        // v1-v2, v2-v3, v3-v4, v1-v4
        assert_eq!(g.internal_edges(), &[(0, 1), (0, 3), (1, 2), (2, 3)]);
        // z1,z2 -> v1; z3,z4 -> v4; z5,z6 -> v3; z7,z8 -> v2
        let by_slot: Vec<usize> = (0..8).map(|z| g.vertex_of_slot(z)).collect();
        assert_eq!(by_slot, vec![0, 0, 3, 3, 2, 2, 1, 1]);
        // canonical digit order v3, v2, v4, v1
        assert_eq!(g.significance(), &[2, 1, 3, 0]);
        assert_eq!(g.symmetries().len(), 8);
        assert_eq!(g.canonical_slots().len(), 1);
        assert_eq!(g.canonical_slots()[0].slot, 0);
        assert_eq!(g.canonical_slots()[0].vertex, 0);
    }

    #[test]
    fn rectangle_layouts() {
        let g = BlockGeometry::new(BlockShape::TwoByThree);
        assert_eq!(g.block_len(), 6);
        assert_eq!(g.boundary_len(), 10);
        assert_eq!(g.symmetries().len(), 4);
        assert_eq!(g.significance(), &[5, 2, 4, 1, 3, 0]);
        // corners have two slots, middles one
        let degs: Vec<usize> = (0..6).map(|v| g.slots_of_vertex(v).len()).collect();
        assert_eq!(degs, vec![2, 1, 2, 2, 1, 2]);
        // canonical slots: z1 next to v1, and the slot above v2
        assert_eq!(g.canonical_slots().len(), 2);
        assert_eq!(g.canonical_slots()[1].vertex, 1);
        assert_eq!(g.boundary_coords()[g.canonical_slots()[1].slot], (1, 2));

        let g = BlockGeometry::new(BlockShape::ThreeByThree);
        assert_eq!(g.block_len(), 9);
        assert_eq!(g.boundary_len(), 12);
        assert_eq!(g.symmetries().len(), 8);
        assert_eq!(g.significance(), &[8, 5, 7, 2, 4, 6, 1, 3, 0]);
        let degs: Vec<usize> = (0..9).map(|v| g.slots_of_vertex(v).len()).collect();
        assert_eq!(degs, vec![2, 1, 2, 1, 0, 1, 2, 1, 2]);
        assert_eq!(g.canonical_slots().len(), 2);
        assert_eq!(g.canonical_slots()[1].vertex, 1);
        assert_eq!(g.boundary_coords()[g.canonical_slots()[1].slot], (1, 3));
    }

    #[test]
    fn symmetries_are_automorphisms() {
        for shape in [BlockShape::TwoByTwo, BlockShape::TwoByThree, BlockShape::ThreeByThree] {
            let g = BlockGeometry::new(shape);
            for s in g.symmetries() {
                let mut seen_v = vec![false; g.block_len()];
                for &v in &s.block_perm {
                    assert!(!seen_v[v], "{}: block perm not bijective", s.name);
                    seen_v[v] = true;
                }
                let mut seen_z = vec![false; g.boundary_len()];
                for &z in &s.boundary_perm {
                    assert!(!seen_z[z], "{}: boundary perm not bijective", s.name);
                    seen_z[z] = true;
                }
                for &(a, b) in g.internal_edges() {
                    let (x, y) = (s.block_perm[a], s.block_perm[b]);
                    let e = if x < y { (x, y) } else { (y, x) };
                    assert!(g.internal_edges().contains(&e), "{}: breaks internal edge", s.name);
                }
                for &(z, v) in g.boundary_edges() {
                    let e = (s.boundary_perm[z], s.block_perm[v]);
                    assert!(g.boundary_edges().contains(&e), "{}: breaks boundary edge", s.name);
                }
            }
        }
    }

    #[test]
    fn enumeration_counts_two_by_two() {
        let g = BlockGeometry::new(BlockShape::TwoByTwo);
        // Unconstrained: proper colourings of the 4-cycle, (q-1)^4 + q - 1.
        let all = BoundaryColouring::wildcards(8);
        assert_eq!(g.count_agreeing(7, &g.forbidden_masks(&all)), 1302);
        // One colour forbidden everywhere.
        let ones = BoundaryColouring::uniform(8, 1);
        let masks = g.forbidden_masks(&ones);
        assert_eq!(g.count_agreeing(7, &masks), 630);
        // Same boundary with z1 recoloured to 2.
        let mut z2 = ones.clone();
        z2.0[0] = 2;
        assert_eq!(g.count_agreeing(7, &g.forbidden_masks(&z2)), 525);
    }

    #[test]
    fn enumeration_is_sorted_and_first_key_is_least() {
        let g = BlockGeometry::new(BlockShape::TwoByTwo);
        let ones = BoundaryColouring::uniform(8, 1);
        let masks = g.forbidden_masks(&ones);
        let mut keys = Vec::new();
        g.enumerate_keys_into(7, &masks, &mut keys);
        assert_eq!(keys.len(), 630);
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        // Least colouring in (v3, v2, v4, v1) digit order.
        let first = g.colours_of_key(keys[0], 7);
        assert_eq!(first, vec![2, 3, 2, 3]);
        assert_eq!(g.key_of(&first, 7), keys[0]);
    }

    #[test]
    fn enumeration_matches_filter_all() {
        // Random partially-wild boundaries on the 2x2 at q=4: backtracking
        // enumeration must equal brute-force filtering of all q^4 colourings.
        let g = BlockGeometry::new(BlockShape::TwoByTwo);
        let q = 4u8;
        let mut rnd = lcg(7);
        for _ in 0..200 {
            let z = BoundaryColouring(
                (0..8)
                    .map(|_| (rnd() % (q as u64 + 1)) as u8) // 0 = wildcard
                    .collect(),
            );
            let fast = g.enumerate_agreeing(q, &z);
            let mut slow = Vec::new();
            for idx in 0..(q as u32).pow(4) {
                let mut rem = idx;
                let mut colours = vec![0u8; 4];
                for v in 0..4 {
                    colours[v] = (rem % q as u32) as u8 + 1;
                    rem /= q as u32;
                }
                let c = BlockColouring(colours);
                if g.agrees(&c, &z) {
                    slow.push(c);
                }
            }
            slow.sort_by_key(|c| g.key_of(&c.0, q));
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn count_by_vertex_colour_consistent() {
        let g = BlockGeometry::new(BlockShape::TwoByTwo);
        let ones = BoundaryColouring::uniform(8, 1);
        let masks = g.forbidden_masks(&ones);
        let (total, counts) = g.count_by_vertex_colour(7, &masks);
        assert_eq!(total, 630);
        for v in 0..4 {
            assert_eq!(counts[v][0], 0); // colour 1 forbidden everywhere
            assert_eq!(counts[v].iter().sum::<u64>(), 630);
            // colours 2..=7 interchangeable here
            for c in 1..7 {
                assert_eq!(counts[v][c], 105, "v{} colour {}", v + 1, c + 1);
            }
        }
        // Cross-check against explicit enumeration on a rectangle.
        let g = BlockGeometry::new(BlockShape::TwoByThree);
        let mut rnd = lcg(23);
        for _ in 0..20 {
            let z = BoundaryColouring((0..10).map(|_| (rnd() % 5) as u8).collect());
            let masks = g.forbidden_masks(&z);
            let (total, counts) = g.count_by_vertex_colour(4, &masks);
            let listed = g.enumerate_agreeing(4, &z);
            assert_eq!(total as usize, listed.len());
            for v in 0..6 {
                for c in 1..=4u8 {
                    let want = listed.iter().filter(|b| b.0[v] == c).count() as u64;
                    assert_eq!(counts[v][c as usize - 1], want);
                }
            }
        }
    }

    #[test]
    fn boundary_text_round_trip() {
        let g = BlockGeometry::new(BlockShape::TwoByTwo);
        let z = BoundaryColouring::parse("12*4567*", 7, 8).unwrap();
        assert_eq!(z.to_string(), "12*4567*");
        assert!(!z.is_fully_specified());
        assert!(BoundaryColouring::parse("12345678", 7, 8).is_err()); // 8 > q
        assert!(BoundaryColouring::parse("1234567", 7, 8).is_err()); // short
        assert!(BlockColouring::parse("12*4", 7, 4).is_err()); // wildcard in block
        let c = BlockColouring::parse("1234", 7, 4).unwrap();
        assert_eq!(c.to_string(), "1234");

        let z = g.boundary_from_index(0, 7);
        assert_eq!(z.to_string(), "11111111");
        let z = g.boundary_from_index(7u64.pow(8) - 1, 7);
        assert_eq!(z.to_string(), "77777777");
        let mut rnd = lcg(99);
        for _ in 0..50 {
            let idx = rnd() % 7u64.pow(8);
            assert_eq!(g.boundary_index(&g.boundary_from_index(idx, 7), 7), idx);
        }
    }

    #[test]
    fn canonical_position_map_two_by_two() {
        let g = BlockGeometry::new(BlockShape::TwoByTwo);
        // Which vertex the bound for v1-at-z1 applies to, per position.
        let images: Vec<usize> = (0..8)
            .map(|i| g.symmetry_map_position(i, 0).unwrap().1)
            .collect();
        assert_eq!(images, vec![0, 0, 1, 3, 2, 2, 3, 1]);
        for i in 0..8 {
            assert_eq!(g.symmetry_map_position(i, 0).unwrap().0, 0); // slot z1
            // exact candidates all agree for the 2x2 (trivial stabiliser)
            let cands = g.map_position_exact(i, 0);
            assert!(cands.iter().all(|&c| c == cands[0]));
        }
    }

    #[test]
    fn position_map_rectangle_fallback() {
        let g = BlockGeometry::new(BlockShape::TwoByThree);
        // Slot z3 (below v4, long side) has no symmetry onto z1 but shares v4
        // with z2 which does.
        assert!(g.map_position_exact(2, 0).is_empty());
        let cands = g.map_position(2, 0);
        assert!(!cands.is_empty());
        // the corner-class bound for target v1 maps to vertex v4 (index 3)
        assert!(cands.contains(&(0, 3)));
        // Exact map of z2 itself agrees.
        assert!(g.map_position_exact(1, 0).contains(&(0, 3)));
        // Middle slots map to the middle canonical slot.
        let cands = g.map_position_exact(3, 0); // below v5
        assert!(cands.iter().any(|&(ci, _)| ci == 1));
    }

    #[test]
    fn keys_round_trip_all_shapes() {
        for shape in [BlockShape::TwoByTwo, BlockShape::TwoByThree, BlockShape::ThreeByThree] {
            let g = BlockGeometry::new(shape);
            let mut rnd = lcg(5);
            for q in [3u8, 6, 7] {
                for _ in 0..50 {
                    let colours: Vec<u8> =
                        (0..g.block_len()).map(|_| (rnd() % q as u64) as u8 + 1).collect();
                    let key = g.key_of(&colours, q);
                    assert_eq!(g.colours_of_key(key, q), colours);
                }
            }
        }
    }
}

//! Exhaustive certification sweep for 7 colours on the 2x2 block, the
//! per-position influence table, and the mixing-constant arithmetic.
//!
//! The sweep visits every ordered pair `(Z, Z')` of fully coloured boundaries
//! that differ exactly at slot `z1` (`7^8` choices of `Z`, 6 recolourings of
//! `z1`), builds the deterministic three-phase coupling for each pair, and
//! records the exact per-vertex maxima of the mismatch probabilities together
//! with the first pair attaining them.  The certified claim is that the four
//! maxima are strictly below 283/1000, 79/1000, 51/1000 and 79/1000.

use rayon::prelude::*;

use crate::block::{BlockGeometry, BlockShape, BoundaryColouring, Colour};
use crate::coupling::{coupling_for_pair, three_phase_keys};
use crate::rat::{ceil_u64, Frac, Rational};

/// Lemma thresholds for `(v1, v2, v3, v4)` as exact fractions.
pub const THRESHOLDS: [Frac; 4] = [
    Frac { num: 283, den: 1000 },
    Frac { num: 79, den: 1000 },
    Frac { num: 51, den: 1000 },
    Frac { num: 79, den: 1000 },
];

#[derive(Clone, Debug)]
pub struct SweepConfig {
    /// Restrict to `Z(z1) = 1`, `Z'(z1) = 2` (fast, NOT certifying: the
    /// heuristic's lexicographic phases are not colour-permutation
    /// equivariant).
    pub fix_colours: bool,
    /// Total shards the index space is cut into.
    pub shards: u64,
    /// Which shard to run; `None` runs all of them.
    pub shard: Option<u64>,
    /// Worker threads; 0 uses the rayon default.
    pub threads: usize,
    /// Chatter progress to stderr.
    pub progress: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            fix_colours: false,
            shards: 1,
            shard: None,
            threads: 0,
            progress: false,
        }
    }
}

/// Running maximum for one block vertex, with its witness pair.  `Z` is the
/// boundary with index `z_index`; `Z'` equals it except `z1 -> new_colour`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexMax {
    pub vertex: usize,
    pub max: Frac,
    pub z_index: u64,
    pub new_colour: Colour,
}

impl VertexMax {
    fn sentinel(vertex: usize) -> VertexMax {
        VertexMax {
            vertex,
            max: Frac::ZERO,
            z_index: u64::MAX,
            new_colour: 0,
        }
    }

    /// Fold in a candidate.  Ties keep the smallest `(z_index, new_colour)`,
    /// which makes the sweep result independent of visit order and sharding.
    fn offer(&mut self, max: Frac, z_index: u64, new_colour: Colour) {
        let better = match max.cmp(&self.max) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Equal => (z_index, new_colour) < (self.z_index, self.new_colour),
            std::cmp::Ordering::Less => false,
        };
        if better {
            self.max = max;
            self.z_index = z_index;
            self.new_colour = new_colour;
        }
    }

    /// Reconstruct the witness boundary pair.
    pub fn witness(&self, g: &BlockGeometry, q: u8) -> (BoundaryColouring, BoundaryColouring) {
        let z = g.boundary_from_index(self.z_index, q);
        let mut zp = z.clone();
        zp.0[0] = self.new_colour;
        (z, zp)
    }
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub q: u8,
    pub fix_colours: bool,
    pub pairs: u64,
    /// One entry per block vertex, in vertex order.
    pub maxima: Vec<VertexMax>,
}

impl SweepReport {
    fn empty(q: u8, fix_colours: bool) -> SweepReport {
        SweepReport {
            q,
            fix_colours,
            pairs: 0,
            maxima: (0..4).map(VertexMax::sentinel).collect(),
        }
    }

    /// Associative, commutative merge of partial sweeps.
    pub fn merge(mut self, other: &SweepReport) -> SweepReport {
        assert_eq!(self.q, other.q, "cannot merge sweeps at different q");
        assert_eq!(
            self.fix_colours, other.fix_colours,
            "cannot merge certifying and fix-colours sweeps"
        );
        self.pairs += other.pairs;
        for (mine, theirs) in self.maxima.iter_mut().zip(&other.maxima) {
            mine.offer(theirs.max, theirs.z_index, theirs.new_colour);
        }
        self
    }

    /// Reduced per-vertex maxima as exact rationals.
    pub fn maxima_rationals(&self) -> Vec<Rational> {
        self.maxima.iter().map(|m| m.max.to_rational()).collect()
    }

    /// True iff every maximum is strictly below its threshold.
    pub fn pass(&self) -> bool {
        self.maxima.iter().zip(&THRESHOLDS).all(|(m, t)| m.max < *t)
    }
}

/// Number of `Z` indices in the sweep's index space.
fn index_space(q: u8, fix_colours: bool) -> u64 {
    let l = if fix_colours { 7 } else { 8 };
    (q as u64).pow(l)
}

/// `[lo, hi)` index range of one shard: contiguous balanced cuts, so shard
/// counts that are powers of q correspond to fixed prefixes of `Z` digits.
pub fn shard_range(q: u8, fix_colours: bool, shards: u64, shard: u64) -> (u64, u64) {
    assert!(shards >= 1 && shard < shards, "bad shard spec");
    let total = index_space(q, fix_colours);
    let lo = total * shard / shards;
    let hi = total * (shard + 1) / shards;
    (lo, hi)
}

/// Scratch buffers reused across all pairs of one chunk.
struct Workspace {
    prefixes: Vec<(u32, u32, u32)>, // (key of v3v2v4, digit spread, allowed v1 mask)
    keys_l: Vec<u32>,
    spread_l: Vec<u32>,
    keys_r: Vec<u32>,
    spread_r: Vec<u32>,
    resid_l: Vec<u64>,
    resid_r: Vec<u64>,
}

impl Workspace {
    fn new() -> Workspace {
        Workspace {
            prefixes: Vec::with_capacity(512),
            keys_l: Vec::with_capacity(1536),
            spread_l: Vec::with_capacity(1536),
            keys_r: Vec::with_capacity(1536),
            spread_r: Vec::with_capacity(1536),
            resid_l: Vec::with_capacity(1536),
            resid_r: Vec::with_capacity(1536),
        }
    }
}

/// Sweep the ordered pairs whose `Z` index lies in `[lo, hi)`.
///
/// Hot path notes: `v1` is the deepest (least significant) digit of the
/// canonical order, so the backtracking trees of `C_Z` and all six `C_Z'`
/// variants share everything above the leaf level.  The prefix list over
/// `(v3, v2, v4)` is built once per `Z`; each variant then only filters the
/// leaf masks.  Mismatch checks use byte-spread digit keys and XOR.
fn sweep_range(g: &BlockGeometry, q: u8, fix_colours: bool, lo: u64, hi: u64) -> SweepReport {
    assert_eq!(g.shape(), BlockShape::TwoByTwo);
    assert!(q >= 5 && q <= 7, "sweep tuned for small q with nonempty sets");
    // Slot -> vertex wiring, from the geometry (z1,z2 -> v1 etc.).
    let vertex_of_slot: Vec<usize> = (0..8).map(|z| g.vertex_of_slot(z)).collect();
    assert_eq!(vertex_of_slot, vec![0, 0, 3, 3, 2, 2, 1, 1]);
    assert_eq!(g.significance(), &[2, 1, 3, 0]);

    let mut report = SweepReport::empty(q, fix_colours);
    report.pairs = 0;

    let qq = q as u32;
    let full: u32 = (1 << q) - 1;
    let ws = &mut Workspace::new();

    let mut digits = [0u8; 8]; // boundary digits 0-based, z1 first
    for z_index in lo..hi {
        // Decode Z. In fix-colours mode the index space covers z2..z8 and
        // z1 is pinned to digit 0 (colour 1).
        let mut idx = z_index;
        let nslots = if fix_colours { 7 } else { 8 };
        for k in (0..nslots).rev() {
            let off = if fix_colours { 1 } else { 0 };
            digits[k + off] = (idx % q as u64) as u8;
            idx /= q as u64;
        }
        if fix_colours {
            digits[0] = 0;
        }

        // Forbidden masks per vertex; v1 split into its z1 and z2 parts.
        let m_v2 = 1u32 << digits[6] | 1 << digits[7];
        let m_v3 = 1u32 << digits[4] | 1 << digits[5];
        let m_v4 = 1u32 << digits[2] | 1 << digits[3];
        let m_v1_base = 1u32 << digits[1]; // z2 only
        let z1d = digits[0];

        // Prefix pass over (v3, v2, v4).
        ws.prefixes.clear();
        let mut a3 = full & !m_v3;
        while a3 != 0 {
            let d3 = a3.trailing_zeros();
            a3 &= a3 - 1;
            let mut a2 = full & !m_v2 & !(1 << d3);
            while a2 != 0 {
                let d2 = a2.trailing_zeros();
                a2 &= a2 - 1;
                let key32 = (d3 * qq + d2) * qq;
                let spread32 = d3 << 24 | d2 << 16;
                let mut a4 = full & !m_v4 & !(1 << d3);
                while a4 != 0 {
                    let d4 = a4.trailing_zeros();
                    a4 &= a4 - 1;
                    let allowed = full & !m_v1_base & !(1 << d2) & !(1 << d4);
                    if allowed != 0 {
                        ws.prefixes
                            .push((key32 + d4, spread32 | d4 << 8, allowed));
                    }
                }
            }
        }

        // C_Z: leaf filter excludes the z1 colour.
        ws.keys_l.clear();
        ws.spread_l.clear();
        for &(pk, ps, allowed) in &ws.prefixes {
            let mut m = allowed & !(1 << z1d);
            while m != 0 {
                let d1 = m.trailing_zeros();
                m &= m - 1;
                ws.keys_l.push(pk * qq + d1);
                ws.spread_l.push(ps | d1);
            }
        }
        debug_assert!(!ws.keys_l.is_empty());

        for new_digit in 0..q {
            if new_digit == z1d {
                continue;
            }
            if fix_colours && new_digit != 1 {
                continue;
            }
            ws.keys_r.clear();
            ws.spread_r.clear();
            for &(pk, ps, allowed) in &ws.prefixes {
                let mut m = allowed & !(1 << new_digit);
                while m != 0 {
                    let d1 = m.trailing_zeros();
                    m &= m - 1;
                    ws.keys_r.push(pk * qq + d1);
                    ws.spread_r.push(ps | d1);
                }
            }
            let nl = ws.keys_l.len() as u64;
            let nr = ws.keys_r.len() as u64;
            debug_assert!(nr > 0);
            let total = nl * nr;

            ws.resid_l.clear();
            ws.resid_l.resize(ws.keys_l.len(), nr);
            ws.resid_r.clear();
            ws.resid_r.resize(ws.keys_r.len(), nl);

            // Mismatch weight per digit position (0 = v1's position).
            let mut mism = [0u64; 4];
            let (spread_l, spread_r) = (&ws.spread_l, &ws.spread_r);
            three_phase_keys(
                &ws.keys_l,
                &ws.keys_r,
                qq,
                &mut ws.resid_l,
                &mut ws.resid_r,
                |i, j, w, phase| {
                    if phase == 1 {
                        return; // identical colourings
                    }
                    let x = spread_l[i] ^ spread_r[j];
                    if x & 0x0000_00ff != 0 {
                        mism[0] += w;
                    }
                    if x & 0x0000_ff00 != 0 {
                        mism[1] += w;
                    }
                    if x & 0x00ff_0000 != 0 {
                        mism[2] += w;
                    }
                    if x & 0xff00_0000 != 0 {
                        mism[3] += w;
                    }
                },
            );

            report.pairs += 1;
            for v in 0..4 {
                let num = mism[g.digit_pos(v) as usize];
                report.maxima[v].offer(
                    Frac { num, den: total },
                    z_index,
                    new_digit + 1,
                );
            }
        }
    }
    report
}

/// Run the Lemma 3 sweep (full or fix-colours; one shard or all).
pub fn sweep_lemma3(g: &BlockGeometry, cfg: &SweepConfig) -> SweepReport {
    let q = 7u8;
    let (lo, hi) = match cfg.shard {
        Some(k) => shard_range(q, cfg.fix_colours, cfg.shards, k),
        None => (0, index_space(q, cfg.fix_colours)),
    };
    let run = || sweep_chunked(g, q, cfg.fix_colours, lo, hi, cfg.progress);
    if cfg.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .expect("thread pool");
        pool.install(run)
    } else {
        run()
    }
}

fn sweep_chunked(
    g: &BlockGeometry,
    q: u8,
    fix_colours: bool,
    lo: u64,
    hi: u64,
    progress: bool,
) -> SweepReport {
    const CHUNK: u64 = 16_807; // 7^5 indices per work unit
    let starts: Vec<u64> = (lo..hi).step_by(CHUNK as usize).collect();
    let done = std::sync::atomic::AtomicU64::new(0);
    let t0 = std::time::Instant::now();
    starts
        .par_iter()
        .map(|&s| {
            let part = sweep_range(g, q, fix_colours, s, (s + CHUNK).min(hi));
            if progress {
                let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                if n % 16 == 0 || n as usize == starts.len() {
                    eprintln!(
                        "verify7: {}/{} chunks ({:.1}%), {:.0}s elapsed",
                        n,
                        starts.len(),
                        100.0 * n as f64 / starts.len() as f64,
                        t0.elapsed().as_secs_f64()
                    );
                }
            }
            part
        })
        .reduce(
            || SweepReport::empty(q, fix_colours),
            |a, b| a.merge(&b),
        )
}

/// Recompute one pair's per-vertex mismatch probabilities through the
/// general (cold) path: enumeration plus [`coupling_for_pair`].  Used to
/// re-verify recorded witnesses independently of the sweep's fast path.
pub fn verify_pair(
    g: &BlockGeometry,
    q: u8,
    z: &BoundaryColouring,
    zp: &BoundaryColouring,
) -> Vec<Rational> {
    let k = coupling_for_pair(g, q, z, zp);
    k.check_marginals().expect("coupling marginals");
    (0..g.block_len()).map(|v| k.mismatch_probability(v)).collect()
}

/// One row of the Corollary-style position table: the influence bound a
/// boundary position exerts on the target vertex, reduced by symmetry to one
/// of the per-vertex maxima.
#[derive(Clone, Debug)]
pub struct PositionRho {
    pub position: usize,
    /// Which vertex's maximum the bound comes from after the symmetry map.
    pub vertex: usize,
    pub rho: Rational,
}

#[derive(Clone, Debug)]
pub struct InfluenceTable {
    /// Target vertex the table is assembled for (any choice gives the same
    /// multiset; v1 by convention).
    pub target: usize,
    pub rho: Vec<PositionRho>,
    pub alpha: Rational,
}

/// Assemble the per-position influence table for target vertex `v1` from
/// per-vertex maxima (sweep output or the published thresholds).  Positions
/// beyond the boundary ring have influence 0 and are not listed; `alpha` is
/// the sum over the ring.
pub fn corollary_table(maxima: &[Rational], g: &BlockGeometry) -> InfluenceTable {
    assert_eq!(maxima.len(), g.block_len());
    let target = 0usize;
    let mut rho = Vec::new();
    let mut alpha = Rational::from_integer(0.into());
    for i in 0..g.boundary_len() {
        let cands = g.map_position(i, target);
        // Every candidate is a valid upper bound for this position (the true
        // influences agree under symmetry), so take the smallest.
        let best = cands
            .iter()
            .map(|&(_, v)| (maxima[v].clone(), v))
            .min_by(|a, b| a.0.cmp(&b.0))
            .expect("position must reduce to a canonical slot");
        alpha += &best.0;
        rho.push(PositionRho {
            position: i,
            vertex: best.1,
            rho: best.0,
        });
    }
    InfluenceTable { target, rho, alpha }
}

/// Outcome of the mixing computation.
#[derive(Clone, Debug, PartialEq)]
pub enum MixingOutcome {
    Bound {
        alpha: Rational,
        /// `1/(1-alpha)`, exact.
        constant: Rational,
        /// `ceil(constant)`: the integer scan-bound constant.
        scan_constant: u64,
        /// `ceil(ln(n/eps) * constant)` — decimal rendering of the log, for
        /// display; the certified quantities are the two fields above.
        scans: u64,
    },
    NoBound { alpha: Rational },
}

/// Evaluate the mixing bound `Mix <= log(n/eps) / (1 - alpha)` from an
/// influence table; `alpha >= 1` yields `NoBound`.
pub fn alpha_and_mixing(table: &InfluenceTable, n: u64, eps: &Rational) -> MixingOutcome {
    let one = Rational::from_integer(1.into());
    assert!(n >= 1, "n must be positive");
    assert!(eps > &Rational::from_integer(0.into()) && eps < &one, "eps in (0,1)");
    if table.alpha >= one {
        return MixingOutcome::NoBound {
            alpha: table.alpha.clone(),
        };
    }
    let constant = &one / (&one - &table.alpha);
    let scan_constant = ceil_u64(&constant).expect("positive constant");
    let log_term = (n as f64 / crate::rat::decimal(eps)).ln();
    let scans = (log_term * crate::rat::decimal(&constant)).ceil().max(0.0) as u64;
    MixingOutcome::Bound {
        alpha: table.alpha.clone(),
        constant,
        scan_constant,
        scans,
    }
}

/// The published per-vertex thresholds as rationals.
pub fn thresholds_rational() -> Vec<Rational> {
    THRESHOLDS.iter().map(|t| t.to_rational()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{format_ratio, ratio};

    fn geometry() -> BlockGeometry {
        BlockGeometry::new(BlockShape::TwoByTwo)
    }

    #[test]
    fn sweep_single_boundary_matches_cold_path() {
        let g = geometry();
        // Z index 0 is the all-ones boundary; its six variant pairs include
        // the frozen-value pair (z1 -> 2).
        let rep = sweep_range(&g, 7, false, 0, 1);
        assert_eq!(rep.pairs, 6);
        for v in 0..4 {
            // Recompute the maximum over the six pairs via the cold path.
            let z = g.boundary_from_index(0, 7);
            let mut best = Rational::from_integer(0.into());
            for c in 2..=7u8 {
                let mut zp = z.clone();
                zp.0[0] = c;
                let p = verify_pair(&g, 7, &z, &zp);
                if p[v] > best {
                    best = p[v].clone();
                }
            }
            assert_eq!(rep.maxima[v].max.to_rational(), best, "v{}", v + 1);
        }
    }

    #[test]
    fn sweep_agrees_with_cold_path_on_random_indices() {
        let g = geometry();
        let mut s: u64 = 42;
        for _ in 0..40 {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let z_index = (s >> 33) % 7u64.pow(8);
            let rep = sweep_range(&g, 7, false, z_index, z_index + 1);
            let z = g.boundary_from_index(z_index, 7);
            let mut best = vec![Rational::from_integer(0.into()); 4];
            for c in (1..=7u8).filter(|&c| c != z.0[0]) {
                let mut zp = z.clone();
                zp.0[0] = c;
                for (v, p) in verify_pair(&g, 7, &z, &zp).into_iter().enumerate() {
                    if p > best[v] {
                        best[v] = p;
                    }
                }
            }
            for v in 0..4 {
                assert_eq!(rep.maxima[v].max.to_rational(), best[v], "z={z} v{}", v + 1);
            }
        }
    }

    #[test]
    fn merge_is_order_independent() {
        let g = geometry();
        let whole = sweep_range(&g, 7, false, 500, 560);
        let a = sweep_range(&g, 7, false, 500, 530);
        let b = sweep_range(&g, 7, false, 530, 560);
        let ab = a.clone().merge(&b);
        let ba = b.merge(&a);
        assert_eq!(whole.pairs, ab.pairs);
        for v in 0..4 {
            assert_eq!(whole.maxima[v], ab.maxima[v]);
            assert_eq!(ab.maxima[v], ba.maxima[v]);
        }
    }

    #[test]
    fn shard_ranges_partition() {
        for shards in [1u64, 7, 49, 64, 100] {
            let mut prev = 0u64;
            for k in 0..shards {
                let (lo, hi) = shard_range(7, false, shards, k);
                assert_eq!(lo, prev);
                assert!(hi >= lo);
                prev = hi;
            }
            assert_eq!(prev, 7u64.pow(8));
        }
    }

    #[test]
    fn corollary_table_from_thresholds() {
        let g = geometry();
        let table = corollary_table(&thresholds_rational(), &g);
        assert_eq!(table.rho.len(), 8);
        // positions z1..z8 pull the maxima of v1,v1,v2,v4,v3,v3,v4,v2
        let vs: Vec<usize> = table.rho.iter().map(|r| r.vertex).collect();
        assert_eq!(vs, vec![0, 0, 1, 3, 2, 2, 3, 1]);
        assert_eq!(format_ratio(&table.alpha), "123/125"); // 0.984
    }

    #[test]
    fn mixing_constant_exact() {
        let g = geometry();
        let table = corollary_table(&thresholds_rational(), &g);
        let out = alpha_and_mixing(&table, 1024, &ratio(1, 100));
        match out {
            MixingOutcome::Bound {
                alpha,
                constant,
                scan_constant,
                scans,
            } => {
                assert_eq!(format_ratio(&alpha), "123/125");
                assert_eq!(format_ratio(&constant), "125/2"); // 62.5
                assert_eq!(scan_constant, 63);
                // ln(1024/0.01) ~ 11.537; 62.5 * that ~ 721.1
                assert_eq!(scans, 722);
            }
            MixingOutcome::NoBound { .. } => panic!("expected a bound"),
        }
    }

    #[test]
    fn mixing_no_bound_when_alpha_exceeds_one() {
        let table = InfluenceTable {
            target: 0,
            rho: vec![],
            alpha: ratio(1286, 1000),
        };
        match alpha_and_mixing(&table, 16, &ratio(1, 2)) {
            MixingOutcome::NoBound { alpha } => {
                assert_eq!(alpha, ratio(643, 500));
            }
            _ => panic!("alpha >= 1 must yield NoBound"),
        }
    }

    #[test]
    fn zero_table_scan_bound() {
        let g = geometry();
        let zeros = vec![Rational::from_integer(0.into()); 4];
        let table = corollary_table(&zeros, &g);
        match alpha_and_mixing(&table, 1, &ratio(1, 100)) {
            MixingOutcome::Bound { constant, scans, .. } => {
                assert_eq!(format_ratio(&constant), "1/1");
                assert_eq!(scans, 5); // ceil(ln 100) = 5
            }
            _ => panic!(),
        }
    }

    #[test]
    fn fix_colours_restriction() {
        let g = geometry();
        // One boundary in fix mode = one pair, z1 colour 1 -> 2.
        let rep = sweep_range(&g, 7, true, 0, 1);
        assert_eq!(rep.pairs, 1);
        assert!(rep.fix_colours);
        let (z, zp) = rep.maxima[0].witness(&g, 7);
        assert_eq!(z.to_string(), "11111111");
        assert_eq!(zp.to_string(), "21111111");
        // frozen values for this pair
        assert_eq!(format_ratio(&rep.maxima[0].max.to_rational()), "1/6");
        assert_eq!(format_ratio(&rep.maxima[1].max.to_rational()), "23/450");
        assert_eq!(format_ratio(&rep.maxima[2].max.to_rational()), "127/3150");
        assert_eq!(format_ratio(&rep.maxima[3].max.to_rational()), "169/3150");
    }
}

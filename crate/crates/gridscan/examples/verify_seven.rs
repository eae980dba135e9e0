//! Reduced Lemma-3 sweep: all boundaries with `Z(z1)=1`, `Z'(z1)=2` (7^7
//! pairs), reporting per-vertex maxima against the published thresholds and
//! the resulting alpha/mixing constants.  The full certifying sweep is the
//! `verify7` CLI subcommand (or `cargo test --test acceptance`).

use gridscan::block::{BlockGeometry, BlockShape};
use gridscan::rat::{decimal, format_ratio, ratio};
use gridscan::verify7::{
    alpha_and_mixing, corollary_table, sweep_lemma3, MixingOutcome, SweepConfig, THRESHOLDS,
};

fn main() {
    let g = BlockGeometry::new(BlockShape::TwoByTwo);
    let cfg = SweepConfig {
        fix_colours: true,
        ..SweepConfig::default()
    };
    let t0 = std::time::Instant::now();
    let rep = sweep_lemma3(&g, &cfg);
    println!(
        "swept {} pairs (fix-colours mode, not certifying) in {:.1}s",
        rep.pairs,
        t0.elapsed().as_secs_f64()
    );
    for m in &rep.maxima {
        let (z, zp) = m.witness(&g, 7);
        println!(
            "  v{}: max {} = {:.6}  (threshold {})  witness {} / {}",
            m.vertex + 1,
            m.max,
            decimal(&m.max.to_rational()),
            THRESHOLDS[m.vertex],
            z,
            zp
        );
    }
    println!("pass (maxima strictly below thresholds): {}", rep.pass());

    // The certified constants come from the published thresholds.
    let table = corollary_table(&gridscan::verify7::thresholds_rational(), &g);
    println!("alpha from thresholds: {} = {}", format_ratio(&table.alpha), decimal(&table.alpha));
    match alpha_and_mixing(&table, 64 * 64, &ratio(1, 1000)) {
        MixingOutcome::Bound {
            constant,
            scan_constant,
            scans,
            ..
        } => println!(
            "mixing constant {} (<= {}); e.g. 64x64 torus, eps 1e-3: <= {} scans",
            format_ratio(&constant),
            scan_constant,
            scans
        ),
        MixingOutcome::NoBound { alpha } => println!("no bound (alpha = {})", format_ratio(&alpha)),
    }
}

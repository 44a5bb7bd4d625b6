//! Runs APM at several resolutions and reports passes and cluster sizes.

use llp_core::apm::{self, ApmConfig};
use llp_core::synthetic::{sbm_probabilities, stochastic_block_model};

fn main() -> llp_core::Result<()> {
    let (p_in, p_out) = sbm_probabilities(40, 50, 10.0, 3.0);
    let g = stochastic_block_model(&[50; 40], p_in, p_out, 4);

    for gamma in [0.0, 0.01, 0.1, 0.5, 1.0] {
        let cfg = ApmConfig {
            gamma,
            seed: 4,
            ..ApmConfig::default()
        };
        let out = apm::run_apm_observed(&g, &cfg, |report, barrier| {
            if report.pass < 3 {
                let lab = barrier.snapshot();
                println!(
                    "  gamma {gamma}: pass {} changed {} labels, {} clusters",
                    report.pass,
                    report.changes,
                    lab.num_clusters()
                );
            }
        })?;
        let lab = &out.labelling;
        let hist = lab.cluster_size_histogram();
        let largest = hist.keys().next_back().copied().unwrap_or(0);
        println!(
            "gamma {gamma}: {} passes, converged={}, fixed point={}, {} clusters, largest {largest}",
            out.passes.len(),
            out.converged,
            apm::is_fixed_point(&g, lab, gamma),
            lab.num_clusters()
        );
    }
    Ok(())
}

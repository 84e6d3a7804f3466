//! Randomised instances for the stability and energy bounds.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::autodiff::Tensor;
use crate::error::Result;
use crate::graph::{spectral_pack, Graph};
use crate::layers::EdgeWeights;
use crate::metrics::{energy_bound_check, theorem1_check};

const SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct TheoryRow {
    pub check: &'static str,
    pub instance: usize,
    pub nodes: usize,
    pub edges: usize,
    pub asserted: bool,
    pub holds: bool,
    /// `lhs − rhs` (theorem rows) or the distance outside the sandwich,
    /// negative when inside (energy rows).
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoryReport {
    pub rows: Vec<TheoryRow>,
}

fn normal(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Tensor {
    let data = (0..rows * cols).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
    Tensor::new(rows, cols, data).expect("shape matches data")
}

/// Erdős–Rényi graph with 1..=12 nodes and a random density.
pub fn random_graph(rng: &mut ChaCha8Rng) -> Graph {
    let n = rng.gen_range(1..=12);
    let p: f64 = rng.gen_range(0.1..0.8);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges, Tensor::ones(n, 1), 0).expect("valid random graph")
}

/// Runs `instances` stability checks (all-ones mask, asserted), the same
/// number with random binary masks (reported), and `instances` energy
/// sandwiches (asserted) plus the λ₀/λ₁ factors (reported).
pub fn theory_suite(instances: usize, seed: u64) -> Result<TheoryReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(instances * 4);
    for i in 0..instances {
        let g = random_graph(&mut rng);
        let d_in = rng.gen_range(1..=5);
        let d_out = rng.gen_range(1..=5);
        let h = normal(&mut rng, g.num_nodes(), d_in, 1.0);
        let wa = normal(&mut rng, d_in, d_out, 1.0);
        let wn = normal(&mut rng, d_in, d_out, 1.0);
        let scale = rng.gen_range(0.01..1.0);
        let wa2 = wa.zip_map(&normal(&mut rng, d_in, d_out, scale), |a, b| a + b);
        let wn2 = wn.zip_map(&normal(&mut rng, d_in, d_out, scale), |a, b| a + b);
        let full = theorem1_check(&wa, &wa2, &wn, &wn2, &h, &g, &EdgeWeights::ones(&g))?;
        rows.push(TheoryRow {
            check: "theorem1_full_mask",
            instance: i,
            nodes: g.num_nodes(),
            edges: g.num_edges(),
            asserted: true,
            holds: full.holds(SLACK),
            gap: full.max_gap(),
        });
        let mask = EdgeWeights::from_values(
            &g,
            (0..g.num_edges()).map(|_| if rng.gen::<bool>() { 1.0 } else { 0.0 }).collect(),
        )?;
        let masked = theorem1_check(&wa, &wa2, &wn, &wn2, &h, &g, &mask)?;
        rows.push(TheoryRow {
            check: "theorem1_random_mask",
            instance: i,
            nodes: g.num_nodes(),
            edges: g.num_edges(),
            asserted: false,
            holds: masked.holds(SLACK),
            gap: masked.max_gap(),
        });

        let g = random_graph(&mut rng);
        let pack = spectral_pack(&g)?;
        let d_in = rng.gen_range(1..=5);
        let d_out = rng.gen_range(1..=5);
        let h = normal(&mut rng, g.num_nodes(), d_in, 1.0);
        let w = normal(&mut rng, d_in, d_out, 1.0);
        let b = energy_bound_check(&pack, &h, &w)?;
        let outside = (b.lower - b.energy_next).max(b.energy_next - b.upper);
        rows.push(TheoryRow {
            check: "energy_spectrum_exact",
            instance: i,
            nodes: g.num_nodes(),
            edges: g.num_edges(),
            asserted: true,
            holds: b.holds(SLACK),
            gap: outside,
        });
        let paper_outside = (b.paper_lower - b.energy_next).max(b.energy_next - b.paper_upper);
        rows.push(TheoryRow {
            check: "energy_paper_factors",
            instance: i,
            nodes: g.num_nodes(),
            edges: g.num_edges(),
            asserted: false,
            holds: b.paper_holds(SLACK),
            gap: paper_outside,
        });
    }
    Ok(TheoryReport { rows })
}

impl TheoryReport {
    /// Failing asserted rows.
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.asserted && !r.holds).count()
    }

    pub fn count(&self, check: &str) -> (usize, usize) {
        let rs: Vec<_> = self.rows.iter().filter(|r| r.check == check).collect();
        (rs.iter().filter(|r| r.holds).count(), rs.len())
    }

    pub fn worst_gap(&self, check: &str) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.check == check)
            .map(|r| r.gap)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn summary(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (check, label) in [
            ("theorem1_full_mask", "stability bound, full mask (asserted)"),
            ("energy_spectrum_exact", "energy sandwich, spectrum-exact (asserted)"),
            ("theorem1_random_mask", "stability bound, random masks (reported)"),
            ("energy_paper_factors", "energy sandwich, lambda0/lambda1 factors (reported)"),
        ] {
            let (ok, n) = self.count(check);
            out.push(format!("{label}: {ok}/{n} hold, worst gap {:.3e}", self.worst_gap(check)));
        }
        out.push(if self.violations() == 0 {
            "all asserted bounds hold".into()
        } else {
            format!("{} asserted bound(s) violated", self.violations())
        });
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["check", "instance", "nodes", "edges", "asserted", "holds", "gap"])?;
        for r in &self.rows {
            w.write_record([
                r.check.to_string(),
                r.instance.to_string(),
                r.nodes.to_string(),
                r.edges.to_string(),
                r.asserted.to_string(),
                r.holds.to_string(),
                r.gap.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_has_no_violations() {
        let rep = theory_suite(100, 0).unwrap();
        assert_eq!(rep.violations(), 0, "{:?}", rep.summary());
        assert_eq!(rep.count("theorem1_full_mask"), (100, 100));
        assert_eq!(rep.count("energy_spectrum_exact"), (100, 100));
    }
}

use super::linalg::{spectral_norm, symmetric_eigen};
use super::smoothing::dirichlet_energy;
use crate::autodiff::{sigmoid, Tensor};
use crate::error::{Error, Result};
use crate::graph::{Graph, SpectralPack};
use crate::layers::EdgeWeights;

const ZERO_EIGENVALUE: f64 = 1e-9;
const PRESENT_FRACTION: f64 = 1e-12;

/// Energy of one linear propagation step `H' = P H W` against its bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBound {
    pub energy_prev: f64,
    pub energy_next: f64,
    /// `min (1−λ)² · s_min · E(H)` over nonzero eigenvalues whose component
    /// is present in `H`.
    pub lower: f64,
    /// `max (1−λ)² · s_max · E(H)` over all nonzero eigenvalues.
    pub upper: f64,
    /// `(1−λ₁)² · s_min · E(H)` with λ₁ the nonzero eigenvalue closest to 1.
    pub paper_lower: f64,
    /// `(1−λ₀)² · s_max · E(H)` with λ₀ the nonzero eigenvalue closest to 0.
    pub paper_upper: f64,
    /// Extreme eigenvalues of `W Wᵀ`.
    pub s_min: f64,
    pub s_max: f64,
}

impl EnergyBound {
    /// Whether `lower ≤ E(H') ≤ upper` up to an absolute `slack`.
    pub fn holds(&self, slack: f64) -> bool {
        self.lower - slack <= self.energy_next && self.energy_next <= self.upper + slack
    }

    pub fn paper_holds(&self, slack: f64) -> bool {
        self.paper_lower - slack <= self.energy_next && self.energy_next <= self.paper_upper + slack
    }
}

/// Evaluates `E(P H W)` and both the spectrum-exact and the λ₀/λ₁ bounds.
///
/// Writing `H = Σ u_i c_iᵀ` in the eigenbasis of Δ̃ gives
/// `E(P H W) = Σ λ_i (1−λ_i)² ‖Wᵀ c_i‖²`, and `‖Wᵀ c‖²` lies between the
/// extreme eigenvalues of `W Wᵀ` times `‖c‖²`.
pub fn energy_bound_check(pack: &SpectralPack, h: &Tensor, w: &Tensor) -> Result<EnergyBound> {
    if h.cols() != w.rows() {
        return Err(Error::Dimension {
            op: "energy_bound_check",
            left: h.shape(),
            right: w.shape(),
        });
    }
    let energy_prev = dirichlet_energy(h, pack)?;
    let next = pack.p.matmul(h)?.matmul(w)?;
    let energy_next = dirichlet_energy(&next, pack)?;

    let wwt = w.matmul_t(w)?;
    let eig = symmetric_eigen(&wwt)?;
    let s_min = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let s_max = eig.values.last().copied().unwrap_or(0.0).max(0.0);

    // Component weights λ_i ‖c_i‖² with c_i = Hᵀ u_i.
    let coeffs = pack.eigenvectors.t_matmul(h)?;
    let nonzero: Vec<(f64, f64)> = pack
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, l)| l.abs() >= ZERO_EIGENVALUE)
        .map(|(i, &l)| (l, l * coeffs.row(i).iter().map(|c| c * c).sum::<f64>()))
        .collect();
    let factor = |l: f64| (1.0 - l) * (1.0 - l);
    let present = nonzero
        .iter()
        .filter(|(_, weight)| *weight > PRESENT_FRACTION * energy_prev)
        .map(|&(l, _)| factor(l));
    let min_factor = present.fold(f64::INFINITY, f64::min);
    let min_factor = if min_factor.is_finite() { min_factor } else { 0.0 };
    let max_factor = nonzero.iter().map(|&(l, _)| factor(l)).fold(0.0, f64::max);

    let closest = |target: f64| {
        nonzero
            .iter()
            .map(|&(l, _)| l)
            .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
    };
    let lambda1 = closest(1.0).unwrap_or(0.0);
    let lambda0 = closest(0.0).unwrap_or(0.0);

    Ok(EnergyBound {
        energy_prev,
        energy_next,
        lower: min_factor * s_min * energy_prev,
        upper: max_factor * s_max * energy_prev,
        paper_lower: factor(lambda1) * s_min * energy_prev,
        paper_upper: factor(lambda0) * s_max * energy_prev,
        s_min,
        s_max,
    })
}

/// Per-node sides of the weight-perturbation bound for one layer
/// `h_u = σ(h_u W_a + Σ_v s_uv h_v W_n)` with the logistic σ.
#[derive(Clone, Debug, PartialEq)]
pub struct Theorem1Report {
    /// `‖h_u − h'_u‖₂`.
    pub lhs: Vec<f64>,
    /// `‖W_a − W_a'‖₂ ‖h_u‖₂ + ‖W_n − W_n'‖₂ Σ_{v∈N(u)} ‖h_v‖₂`.
    pub rhs: Vec<f64>,
}

impl Theorem1Report {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs.iter().zip(&self.rhs).all(|(l, r)| *l <= r + slack)
    }

    /// Largest `lhs − rhs` over nodes (negative when the bound holds with room).
    pub fn max_gap(&self) -> f64 {
        self.lhs
            .iter()
            .zip(&self.rhs)
            .map(|(l, r)| l - r)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Compares the layer with weights `(wa, wn)` on the full graph against the
/// layer with `(wa2, wn2)` whose aggregation is weighted by `mask`, both fed
/// the same `h_prev`. With an all-ones mask the bound is unconditional.
pub fn theorem1_check(
    wa: &Tensor,
    wa2: &Tensor,
    wn: &Tensor,
    wn2: &Tensor,
    h_prev: &Tensor,
    graph: &Graph,
    mask: &EdgeWeights,
) -> Result<Theorem1Report> {
    let shape = wa.shape();
    if [wa2.shape(), wn.shape(), wn2.shape()].iter().any(|s| *s != shape) {
        return Err(Error::Dimension {
            op: "theorem1_check",
            left: shape,
            right: wn.shape(),
        });
    }
    if h_prev.rows() != graph.num_nodes() || h_prev.cols() != shape.0 {
        return Err(Error::Dimension {
            op: "theorem1_check",
            left: h_prev.shape(),
            right: shape,
        });
    }
    if mask.len() != graph.num_edges() {
        return Err(crate::error::contract("mask does not match the graph"));
    }
    let ones = EdgeWeights::ones(graph);
    let full = layer(h_prev, wa, wn, graph, &ones)?;
    let masked = layer(h_prev, wa2, wn2, graph, mask)?;
    let lhs = (0..graph.num_nodes())
        .map(|u| {
            full.row(u)
                .iter()
                .zip(masked.row(u))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect();

    let da = spectral_norm(&wa.zip_map(wa2, |a, b| a - b))?;
    let dn = spectral_norm(&wn.zip_map(wn2, |a, b| a - b))?;
    let norms: Vec<f64> = (0..h_prev.rows())
        .map(|u| h_prev.row(u).iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut neighbour_norm = vec![0.0; graph.num_nodes()];
    for &(u, v) in graph.edges().iter() {
        neighbour_norm[u] += norms[v];
        neighbour_norm[v] += norms[u];
    }
    let rhs = norms
        .iter()
        .zip(&neighbour_norm)
        .map(|(hu, nb)| da * hu + dn * nb)
        .collect();
    Ok(Theorem1Report { lhs, rhs })
}

fn layer(h: &Tensor, wa: &Tensor, wn: &Tensor, graph: &Graph, weights: &EdgeWeights) -> Result<Tensor> {
    let (n, d) = h.shape();
    let mut agg = vec![0.0; n * d];
    for (&(u, v), &s) in graph.edges().iter().zip(weights.values()) {
        for k in 0..d {
            agg[u * d + k] += s * h.get(v, k);
            agg[v * d + k] += s * h.get(u, k);
        }
    }
    let agg = Tensor::new(n, d, agg)?;
    let own = h.matmul(wa)?;
    let nb = agg.matmul(wn)?;
    Ok(own.zip_map(&nb, |a, b| sigmoid(a + b)))
}

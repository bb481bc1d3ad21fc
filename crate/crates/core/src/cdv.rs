//! Weighted graphs with vertex measure `2 pi (d_i - 2)`, the Dirichlet form
//! `q(x) = (1/pi) sum theta_ij |x_i - x_j|^2`, and the star graphs with a
//! loop on every leaf.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formulas::cdv_conjecture_target;
use crate::graph::{Edge, WeightedGraph};
use crate::spectral::{eigendecompose_default, Spectrum, SymmetricOperator};

/// A connected graph whose edge weights are lengths `theta`, with every
/// degree at least 3 and measure `2 pi (d - 2)` at each vertex.
#[derive(Debug, Clone, Serialize)]
pub struct MeasuredGraph {
    graph: WeightedGraph,
    degree: Vec<usize>,
    measure: Vec<f64>,
}

impl MeasuredGraph {
    pub fn new(graph: WeightedGraph) -> Result<Self> {
        if !graph.is_connected() {
            return Err(Error::NotConnected);
        }
        let degree: Vec<usize> = (0..graph.n()).map(|v| graph.combinatorial_degree(v)).collect();
        if let Some((vertex, &d)) = degree.iter().enumerate().find(|(_, &d)| d < 3) {
            return Err(Error::InvalidDegree { vertex, degree: d });
        }
        let measure = degree.iter().map(|&d| 2.0 * PI * (d as f64 - 2.0)).collect();
        Ok(Self { graph, degree, measure })
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn degree(&self) -> &[usize] {
        &self.degree
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    /// `|E| - |V| + 1`, loops included.
    pub fn genus(&self) -> i64 {
        self.graph.edges().len() as i64 - self.graph.n() as i64 + 1
    }
}

/// Star with `n` branches and a unit loop at each leaf. Vertex 0 is the centre.
pub fn star_graph(n: usize) -> Result<MeasuredGraph> {
    if n < 3 {
        return Err(Error::InvalidOrder(n));
    }
    let mut edges: Vec<Edge> = (1..=n).map(|v| Edge { u: 0, v, w: 1.0 }).collect();
    edges.extend((1..=n).map(|v| Edge { u: v, v, w: 1.0 }));
    MeasuredGraph::new(WeightedGraph::new(n + 1, edges)?)
}

/// Matrix `Q` with `x^T Q x = (1/pi) sum_{ij} theta_ij |x_i - x_j|^2`.
pub fn q_theta_form(g: &MeasuredGraph) -> SymmetricOperator {
    let lap = g.graph.laplacian().into_matrix();
    SymmetricOperator::new(lap / PI).expect("square nonempty")
}

fn inv_sqrt_scaled(a: &SymmetricOperator, diag: &[f64]) -> SymmetricOperator {
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        diag.len(),
        diag.iter().map(|d| 1.0 / d.sqrt()),
    ));
    SymmetricOperator::new(&s * a.matrix() * &s).expect("square nonempty")
}

/// Eigenvalues of `Q v = zeta M v` with `M = diag(measure)`, via the
/// symmetric operator `M^{-1/2} Q M^{-1/2}`.
pub fn generalized_spectrum(g: &MeasuredGraph) -> Result<Spectrum> {
    eigendecompose_default(&inv_sqrt_scaled(&q_theta_form(g), &g.measure))
}

/// Spectrum of `(Delta x)_i = (1/(d_i - 2)) sum_{j ~ i} (x_i - x_j)`, as the
/// similar symmetric operator `D'^{-1/2} L D'^{-1/2}`. Unit lengths only.
pub fn cdv_operator(g: &MeasuredGraph) -> Result<Spectrum> {
    if !g.graph.has_unit_weights() {
        return Err(Error::Unsupported(
            "the combinatorial operator is defined for unit edge lengths".into(),
        ));
    }
    let reduced: Vec<f64> = g.degree.iter().map(|&d| d as f64 - 2.0).collect();
    eigendecompose_default(&inv_sqrt_scaled(&g.graph.combinatorial_laplacian(), &reduced))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstructionReport {
    pub n: usize,
    pub genus: i64,
    /// Generalized eigenvalues, ascending.
    pub spectrum: Vec<f64>,
    /// Combinatorial operator eigenvalues, ascending.
    pub cdv_spectrum: Vec<f64>,
    pub near_degenerate_count: usize,
    pub chr_target: i64,
    /// Mean of `zeta_k / lambda_k` over the nonzero eigenvalues.
    pub ratio: f64,
    /// Largest deviation of an individual ratio from `ratio`, relative.
    pub ratio_spread: f64,
}

/// Builds the star graph with `n` branches and compares both spectra.
pub fn construction_report(n: usize) -> Result<ConstructionReport> {
    let g = star_graph(n)?;
    let zeta = generalized_spectrum(&g)?;
    let cdv = cdv_operator(&g)?;
    let groups = zeta.groups();
    // values are descending, so the second-smallest distinct group is the
    // one before last
    let near_degenerate_count = if groups.len() >= 2 {
        groups[groups.len() - 2].len()
    } else {
        0
    };
    let zs = zeta.ascending();
    let cs = cdv.ascending();
    let ratios: Vec<f64> = zs
        .iter()
        .zip(&cs)
        .skip(1)
        .map(|(z, c)| z / c)
        .collect();
    let ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let ratio_spread = ratios
        .iter()
        .map(|r| (r / ratio - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(ConstructionReport {
        n,
        genus: g.genus(),
        spectrum: zs,
        cdv_spectrum: cs,
        near_degenerate_count,
        chr_target: cdv_conjecture_target(g.genus())?.target,
        ratio,
        ratio_spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::complete;

    fn k4() -> MeasuredGraph {
        MeasuredGraph::new(complete(4).unwrap()).unwrap()
    }

    #[test]
    fn star_shape() {
        let g = star_graph(3).unwrap();
        assert_eq!(g.graph().n(), 4);
        assert_eq!(g.graph().edges().len(), 6);
        assert_eq!(g.degree(), &[3, 3, 3, 3]);
        let g5 = star_graph(5).unwrap();
        assert_eq!(g5.genus(), 5);
        assert_eq!(g5.degree()[0], 5);
        assert!((g5.measure()[0] - 6.0 * PI).abs() < 1e-15);
        assert!((g5.measure()[1] - 2.0 * PI).abs() < 1e-15);
        assert!(matches!(star_graph(2), Err(Error::InvalidOrder(2))));
    }

    #[test]
    fn loops_only_change_degree() {
        let g = star_graph(4).unwrap();
        let q = q_theta_form(&g);
        let spokes = WeightedGraph::unweighted(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let q_spokes = spokes.laplacian().into_matrix() / PI;
        assert_eq!(q.matrix(), &q_spokes);
        assert_eq!(g.degree()[1], 3);
        assert_eq!(spokes.combinatorial_degree(1), 1);
    }

    #[test]
    fn constants_in_kernel() {
        for g in [star_graph(3).unwrap(), star_graph(7).unwrap(), k4()] {
            let q = q_theta_form(&g);
            let ones = nalgebra::DVector::from_element(g.graph().n(), 1.0);
            assert!(q.apply(&ones).amax() < 1e-14);
        }
    }

    #[test]
    fn k4_spectra() {
        let g = k4();
        let q = eigendecompose_default(&q_theta_form(&g)).unwrap().ascending();
        let expect = [0.0, 4.0 / PI, 4.0 / PI, 4.0 / PI];
        for (a, b) in q.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let z = generalized_spectrum(&g).unwrap().ascending();
        let expect = [0.0, 2.0 / (PI * PI), 2.0 / (PI * PI), 2.0 / (PI * PI)];
        for (a, b) in z.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn small_degree_rejected() {
        let tri = MeasuredGraph::new(crate::graph::generators::cycle(3).unwrap());
        assert!(matches!(tri, Err(Error::InvalidDegree { vertex: 0, degree: 2 })));
    }

    #[test]
    fn star_operator_spectra() {
        let s3 = cdv_operator(&star_graph(3).unwrap()).unwrap().ascending();
        for (a, b) in s3.iter().zip([0.0, 1.0, 1.0, 4.0]) {
            assert!((a - b).abs() < 1e-12, "{s3:?}");
        }
        let s4 = cdv_operator(&star_graph(4).unwrap()).unwrap().ascending();
        for (a, b) in s4.iter().zip([0.0, 1.0, 1.0, 1.0, 3.0]) {
            assert!((a - b).abs() < 1e-12, "{s4:?}");
        }
        let s10 = cdv_operator(&star_graph(10).unwrap()).unwrap();
        assert_eq!(s10.multiplicity(1.0, 1e-9), 9);
    }

    #[test]
    fn weighted_operator_unsupported() {
        let mut edges: Vec<Edge> = (1..=3).map(|v| Edge { u: 0, v, w: 2.0 }).collect();
        edges.extend((1..=3).map(|v| Edge { u: v, v, w: 1.0 }));
        let g = MeasuredGraph::new(WeightedGraph::new(4, edges).unwrap()).unwrap();
        assert!(matches!(cdv_operator(&g), Err(Error::Unsupported(_))));
        assert!(generalized_spectrum(&g).is_ok());
    }

    #[test]
    fn reports() {
        let r = construction_report(3).unwrap();
        assert_eq!(r.genus, 3);
        assert_eq!(r.near_degenerate_count, 2);
        assert_eq!(r.chr_target, 8);
        let r = construction_report(17).unwrap();
        assert_eq!(r.near_degenerate_count, 16);
        assert!((r.ratio - 1.0 / (2.0 * PI * PI)).abs() < 1e-12);
        assert!(r.ratio_spread < 1e-8);
        assert!(r.spectrum[0].abs() < 1e-10);
    }
}

//! Metric side of the construction: hop distances, separated sets, nets,
//! Voronoi cells and the projection off normalized cell indicators.
//!
//! Distances are hop counts regardless of edge weights; weights only enter
//! the operators.

mod cheeger;

pub use cheeger::{buser_gap_to_separation, cheeger_constant, CHEEGER_MAX_VERTICES};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::spectral::Projection;

/// Hop distances from `src`; `None` marks unreachable vertices.
pub fn bfs_distance(g: &WeightedGraph, src: usize) -> Result<Vec<Option<usize>>> {
    if src >= g.n() {
        return Err(Error::InvalidParams(format!("vertex {src} out of range")));
    }
    Ok(g.bfs_from(src))
}

/// All-pairs hop distances (`usize::MAX` for unreachable pairs).
pub fn distance_matrix(g: &WeightedGraph) -> Vec<Vec<usize>> {
    (0..g.n())
        .map(|s| g.bfs_from(s).into_iter().map(|d| d.unwrap_or(usize::MAX)).collect())
        .collect()
}

/// Largest finite hop distance, or `None` when the graph is disconnected.
pub fn diameter(g: &WeightedGraph) -> Option<usize> {
    let mut best = 0;
    for s in 0..g.n() {
        for d in g.bfs_from(s) {
            best = best.max(d?);
        }
    }
    Some(best)
}

/// Greedy maximal `r`-separated set scanning vertices in `seed_order`.
///
/// A vertex is kept when it lies at distance `>= r` from everything kept so
/// far. The result is maximal by inclusion, hence an `r`-net.
pub fn maximal_separated_set(g: &WeightedGraph, r: usize, seed_order: &[usize]) -> Result<Vec<usize>> {
    if r == 0 {
        return Err(Error::InvalidParams("separation must be >= 1".into()));
    }
    let mut seen = vec![false; g.n()];
    for &v in seed_order {
        if v >= g.n() || std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidParams(
                "seed_order must be a permutation of the vertices".into(),
            ));
        }
    }
    if seed_order.len() != g.n() {
        return Err(Error::InvalidParams(
            "seed_order must be a permutation of the vertices".into(),
        ));
    }

    let mut closest = vec![usize::MAX; g.n()];
    let mut chosen = Vec::new();
    for &v in seed_order {
        if closest[v] >= r {
            chosen.push(v);
            for (u, d) in g.bfs_from(v).into_iter().enumerate() {
                if let Some(d) = d {
                    closest[u] = closest[u].min(d);
                }
            }
        }
    }
    Ok(chosen)
}

pub fn ascending_order(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Voronoi cells of the centers with a net selection on top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetPartition {
    /// Radius of the net, once selected.
    pub radius: Option<usize>,
    pub centers: Vec<usize>,
    /// Selected cell indices, ascending.
    pub net_indices: Vec<usize>,
    /// Representative point `x_k` in cell `k` for each selected index.
    pub net_points: Vec<usize>,
    /// Cell index of every vertex.
    pub cell_of: Vec<usize>,
    /// Vertices of each cell, ascending.
    pub cell_members: Vec<Vec<usize>>,
}

impl NetPartition {
    pub fn n_cells(&self) -> usize {
        self.centers.len()
    }

    pub fn is_net_cell(&self, k: usize) -> bool {
        self.net_indices.binary_search(&k).is_ok()
    }
}

/// Assigns every vertex to its nearest center; ties go to the lowest
/// center index.
pub fn voronoi_partition(g: &WeightedGraph, centers: &[usize]) -> Result<NetPartition> {
    if centers.is_empty() {
        return Err(Error::InvalidPartition("no centers".into()));
    }
    let mut seen = vec![false; g.n()];
    for &c in centers {
        if c >= g.n() || std::mem::replace(&mut seen[c], true) {
            return Err(Error::InvalidPartition(format!("invalid or repeated center {c}")));
        }
    }
    let mut best = vec![(usize::MAX, usize::MAX); g.n()];
    for (k, &c) in centers.iter().enumerate() {
        for (v, d) in g.bfs_from(c).into_iter().enumerate() {
            if let Some(d) = d {
                // strict comparison keeps the lower index on ties
                if d < best[v].0 {
                    best[v] = (d, k);
                }
            }
        }
    }
    if best.iter().any(|&(d, _)| d == usize::MAX) {
        return Err(Error::NotConnected);
    }
    let cell_of: Vec<usize> = best.iter().map(|&(_, k)| k).collect();
    let mut cell_members = vec![Vec::new(); centers.len()];
    for (v, &k) in cell_of.iter().enumerate() {
        cell_members[k].push(v);
    }
    Ok(NetPartition {
        radius: None,
        centers: centers.to_vec(),
        net_indices: Vec::new(),
        net_points: Vec::new(),
        cell_of,
        cell_members,
    })
}

/// Selects net cells: takes an `r`-net of points and keeps the cell of each
/// point. When the diameter is at most `r` a single point suffices.
pub fn select_net(g: &WeightedGraph, partition: &NetPartition, r: usize) -> Result<NetPartition> {
    if r == 0 {
        return Err(Error::InvalidParams("net radius must be >= 1".into()));
    }
    if partition.cell_of.len() != g.n() {
        return Err(Error::DimMismatch {
            expected: g.n(),
            actual: partition.cell_of.len(),
        });
    }
    let points = match diameter(g) {
        None => return Err(Error::NotConnected),
        Some(d) if d <= r => vec![0],
        Some(_) => maximal_separated_set(g, r, &ascending_order(g.n()))?,
    };
    let mut pairs: Vec<(usize, usize)> = points.iter().map(|&x| (partition.cell_of[x], x)).collect();
    pairs.sort_unstable();
    pairs.dedup_by_key(|p| p.0);
    let mut out = partition.clone();
    out.radius = Some(r);
    out.net_indices = pairs.iter().map(|p| p.0).collect();
    out.net_points = pairs.iter().map(|p| p.1).collect();
    Ok(out)
}

/// Builds the cell partition and net used by the pipeline: centers form a
/// maximal `cell_separation`-separated set, net radius `net_radius`.
pub fn build_net(g: &WeightedGraph, cell_separation: usize, net_radius: usize) -> Result<NetPartition> {
    let centers = maximal_separated_set(g, cell_separation, &ascending_order(g.n()))?;
    let partition = voronoi_partition(g, &centers)?;
    select_net(g, &partition, net_radius)
}

/// Normalized indicator `1_{cell k} / sqrt(|cell k|)`.
pub fn cell_indicator(partition: &NetPartition, k: usize, dim: usize) -> Result<DVector<f64>> {
    let members = partition
        .cell_members
        .get(k)
        .ok_or_else(|| Error::InvalidPartition(format!("no cell {k}")))?;
    if members.is_empty() {
        return Err(Error::InvalidPartition(format!("cell {k} is empty")));
    }
    let mut v = DVector::zeros(dim);
    let h = 1.0 / (members.len() as f64).sqrt();
    for &x in members {
        if x >= dim {
            return Err(Error::DimMismatch { expected: dim, actual: x + 1 });
        }
        v[x] = h;
    }
    Ok(v)
}

/// Projection onto the orthogonal complement of the net cell indicators.
pub fn cell_projection(partition: &NetPartition, dim: usize) -> Result<Projection> {
    if partition.net_indices.is_empty() {
        return Err(Error::InvalidPartition("no net cells selected".into()));
    }
    if partition.cell_of.len() != dim {
        return Err(Error::DimMismatch {
            expected: dim,
            actual: partition.cell_of.len(),
        });
    }
    let basis = partition
        .net_indices
        .iter()
        .map(|&k| cell_indicator(partition, k, dim))
        .collect::<Result<Vec<_>>>()?;
    Projection::new(dim, basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::{complete, cycle, path};

    #[test]
    fn bfs_on_small_graphs() {
        let d = bfs_distance(&path(3).unwrap(), 0).unwrap();
        assert_eq!(d, vec![Some(0), Some(1), Some(2)]);
        let d = bfs_distance(&complete(4).unwrap(), 0).unwrap();
        assert_eq!(d, vec![Some(0), Some(1), Some(1), Some(1)]);
        let d: Vec<usize> = bfs_distance(&cycle(6).unwrap(), 0).unwrap().into_iter().flatten().collect();
        assert_eq!(d, vec![0, 1, 2, 3, 2, 1]);
    }

    #[test]
    fn bfs_marks_unreachable() {
        let g = WeightedGraph::unweighted(3, &[(0, 1)]).unwrap();
        assert_eq!(bfs_distance(&g, 0).unwrap()[2], None);
    }

    #[test]
    fn separated_sets() {
        let p5 = path(5).unwrap();
        assert_eq!(maximal_separated_set(&p5, 2, &ascending_order(5)).unwrap(), vec![0, 2, 4]);
        assert_eq!(maximal_separated_set(&p5, 1, &ascending_order(5)).unwrap(), vec![0, 1, 2, 3, 4]);
        let c6 = cycle(6).unwrap();
        assert_eq!(maximal_separated_set(&c6, 3, &ascending_order(6)).unwrap(), vec![0, 3]);
        assert!(maximal_separated_set(&c6, 0, &ascending_order(6)).is_err());
        assert!(maximal_separated_set(&c6, 2, &[0, 0, 1, 2, 3, 4]).is_err());
    }

    #[test]
    fn voronoi_tie_rule() {
        let part = voronoi_partition(&path(3).unwrap(), &[0, 2]).unwrap();
        assert_eq!(part.cell_members, vec![vec![0, 1], vec![2]]);
        let part = voronoi_partition(&cycle(6).unwrap(), &[0, 3]).unwrap();
        assert_eq!(part.cell_members, vec![vec![0, 1, 5], vec![2, 3, 4]]);
    }

    #[test]
    fn voronoi_all_centers_gives_singletons() {
        let g = cycle(5).unwrap();
        let part = voronoi_partition(&g, &ascending_order(5)).unwrap();
        assert!(part.cell_members.iter().enumerate().all(|(k, c)| c == &vec![k]));
    }

    #[test]
    fn net_on_path_of_nine() {
        let g = path(9).unwrap();
        let part = voronoi_partition(&g, &ascending_order(9)).unwrap();
        let net = select_net(&g, &part, 4).unwrap();
        assert!(net.net_indices.len() <= 3);
        assert_eq!(net.net_indices, vec![0, 4, 8]);
    }

    #[test]
    fn small_diameter_needs_one_cell() {
        let g = path(3).unwrap();
        let part = voronoi_partition(&g, &ascending_order(3)).unwrap();
        let net = select_net(&g, &part, 2).unwrap();
        assert_eq!(net.net_indices.len(), 1);
    }

    #[test]
    fn projection_from_whole_graph_cell() {
        let g = path(4).unwrap();
        let part = voronoi_partition(&g, &[0]).unwrap();
        let net = select_net(&g, &part, 1).unwrap();
        let p = cell_projection(&net, 4).unwrap();
        let psi = &p.basis()[0];
        assert!(psi.iter().all(|&x| (x - 0.5).abs() < 1e-15));
        let ones = DVector::from_element(4, 1.0);
        assert!(p.apply(&ones).norm() < 1e-15);
    }

    #[test]
    fn projection_from_singleton_cells_is_zero() {
        let g = path(3).unwrap();
        let mut part = voronoi_partition(&g, &ascending_order(3)).unwrap();
        part.net_indices = vec![0, 1, 2];
        let p = cell_projection(&part, 3).unwrap();
        assert!(p.matrix().iter().all(|&x| x.abs() < 1e-15));
        assert_eq!(p.rank_deficit(), 3);
    }

    #[test]
    fn projection_kills_its_indicators() {
        let g = path(3).unwrap();
        let mut part = voronoi_partition(&g, &[0, 2]).unwrap();
        part.net_indices = vec![0, 1];
        let p = cell_projection(&part, 3).unwrap();
        for psi in p.basis() {
            assert!(p.apply(psi).norm() < 1e-15);
        }
        assert!((p.basis()[0].dot(&p.basis()[1])).abs() < 1e-15);
        assert!(p.idempotency_defect() < 1e-12);
    }

    #[test]
    fn empty_net_rejected() {
        let g = path(3).unwrap();
        let part = voronoi_partition(&g, &[0]).unwrap();
        assert!(matches!(cell_projection(&part, 3), Err(Error::InvalidPartition(_))));
    }
}

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Largest vertex count accepted by the exhaustive Cheeger computation.
pub const CHEEGER_MAX_VERTICES: usize = 24;

// Fixed split of the subset lattice; the result does not depend on how many
// workers process the chunks.
const CHUNK_BITS: usize = 6;

/// Exact discrete Cheeger constant `min |dS| / |S|` over nonempty `S` with
/// `|S| <= n/2`, where `|dS|` is the total weight of edges leaving `S`.
///
/// Enumerates all subsets in Gray-code order, updating the boundary one
/// vertex flip at a time.
pub fn cheeger_constant(g: &WeightedGraph) -> Result<f64> {
    let n = g.n();
    if n > CHEEGER_MAX_VERTICES {
        return Err(Error::TooLargeForExact {
            n,
            max: CHEEGER_MAX_VERTICES,
        });
    }
    if n < 2 {
        return Err(Error::InvalidParams("Cheeger constant needs n >= 2".into()));
    }
    let mut incident: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in g.edges().iter().filter(|e| !e.is_loop()) {
        incident[e.u].push((e.v, e.w));
        incident[e.v].push((e.u, e.w));
    }
    let top = CHUNK_BITS.min(n);
    let low = n - top;
    let best = (0u64..(1u64 << top))
        .into_par_iter()
        .map(|prefix| chunk_min(&incident, n, low, prefix << low))
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(best)
}

fn boundary_of(incident: &[Vec<(usize, f64)>], mask: u64) -> f64 {
    let mut total = 0.0;
    for (v, list) in incident.iter().enumerate() {
        if mask >> v & 1 == 1 {
            total += list
                .iter()
                .filter(|(u, _)| mask >> u & 1 == 0)
                .map(|(_, w)| w)
                .sum::<f64>();
        }
    }
    total
}

fn chunk_min(incident: &[Vec<(usize, f64)>], n: usize, low: usize, base: u64) -> f64 {
    let mut mask = base;
    let mut size = mask.count_ones() as usize;
    let mut boundary = boundary_of(incident, mask);
    let mut best = f64::INFINITY;
    let mut consider = |size: usize, boundary: f64| {
        if size >= 1 && 2 * size <= n {
            best = best.min(boundary / size as f64);
        }
    };
    consider(size, boundary);
    for step in 1u64..(1u64 << low) {
        let v = step.trailing_zeros() as usize;
        let was_in = mask >> v & 1 == 1;
        let mut delta = 0.0;
        for &(u, w) in &incident[v] {
            let u_in = mask >> u & 1 == 1;
            delta += if u_in == was_in { w } else { -w };
        }
        mask ^= 1 << v;
        boundary += delta;
        if was_in {
            size -= 1;
        } else {
            size += 1;
        }
        consider(size, boundary);
    }
    best
}

/// Separation exponent `max(sqrt(delta)/sqrt(20), delta/(4 sqrt|b|))`
/// obtained from a spectral gap `delta` through Buser's inequality.
pub fn buser_gap_to_separation(delta: f64, b: f64) -> Result<f64> {
    if !(delta > 0.0) || !(b < 0.0) {
        return Err(Error::InvalidParams(format!(
            "need delta > 0 and b < 0, got delta = {delta}, b = {b}"
        )));
    }
    Ok((delta.sqrt() / 20f64.sqrt()).max(delta / (4.0 * b.abs().sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::{complete, cycle, path};

    /// Straight enumeration from the top mask down, recomputing every
    /// boundary from scratch.
    fn cheeger_by_descending_scan(g: &WeightedGraph) -> f64 {
        let n = g.n();
        let mut best = f64::INFINITY;
        for mask in (1u64..(1u64 << n)).rev() {
            let size = mask.count_ones() as usize;
            if 2 * size > n {
                continue;
            }
            let cut: f64 = g
                .edges()
                .iter()
                .filter(|e| (mask >> e.u & 1) != (mask >> e.v & 1))
                .map(|e| e.w)
                .sum();
            best = best.min(cut / size as f64);
        }
        best
    }

    #[test]
    fn known_values() {
        assert_eq!(cheeger_constant(&cycle(4).unwrap()).unwrap(), 1.0);
        assert_eq!(cheeger_constant(&complete(4).unwrap()).unwrap(), 2.0);
        let triangles = WeightedGraph::unweighted(
            6,
            &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)],
        )
        .unwrap();
        assert!((cheeger_constant(&triangles).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn agrees_with_descending_scan() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [2, 5, 8, 11] {
            let g = crate::graph::generators::random_connected(n, 0.3, &mut rng).unwrap();
            let a = cheeger_constant(&g).unwrap();
            let b = cheeger_by_descending_scan(&g);
            assert!((a - b).abs() <= 1e-12 * (1.0 + b), "n={n}: {a} vs {b}");
        }
        let g = path(9).unwrap();
        assert_eq!(cheeger_constant(&g).unwrap(), cheeger_by_descending_scan(&g));
    }

    #[test]
    fn size_limit() {
        let g = path(25).unwrap();
        assert!(matches!(
            cheeger_constant(&g),
            Err(Error::TooLargeForExact { n: 25, max: 24 })
        ));
    }

    #[test]
    fn buser_separation_values() {
        assert_eq!(buser_gap_to_separation(20.0, -1.0).unwrap(), 5.0);
        assert_eq!(buser_gap_to_separation(1.0, -1.0).unwrap(), 0.25);
        assert!(buser_gap_to_separation(1e-12, -1.0).unwrap() < 1e-6);
        assert!(buser_gap_to_separation(0.0, -1.0).is_err());
        assert!(buser_gap_to_separation(1.0, 0.0).is_err());
    }
}

//! Optimal linear assignment over gated cost matrices.
//!
//! Gated cells are priced above the sum of every admissible cost, so the
//! Hungarian optimum first maximizes the number of admissible pairs and only
//! then minimizes their total cost. Gated pairs are dropped from the result.

use thiserror::Error;

use crate::geometry::iou;
use crate::model::BoundingBox;

#[derive(Debug, Error, PartialEq, Clone)]
pub enum AssignmentError {
    #[error("cost matrix must have positive dimensions, got {rows}x{cols}")]
    Empty { rows: usize, cols: usize },
    #[error("expected {expected} cells, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("cost at ({row}, {col}) is {value}; costs must be finite and non-negative")]
    BadCost { row: usize, col: usize, value: f64 },
}

/// Row-major cost matrix; `gated[i]` forbids the corresponding pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    costs: Vec<f64>,
    gated: Vec<bool>,
}

impl CostMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        costs: Vec<f64>,
        gated: Vec<bool>,
    ) -> Result<Self, AssignmentError> {
        if rows == 0 || cols == 0 {
            return Err(AssignmentError::Empty { rows, cols });
        }
        let expected = rows * cols;
        if costs.len() != expected {
            return Err(AssignmentError::Shape {
                expected,
                got: costs.len(),
            });
        }
        if gated.len() != expected {
            return Err(AssignmentError::Shape {
                expected,
                got: gated.len(),
            });
        }
        if let Some(k) = costs.iter().position(|c| !c.is_finite() || *c < 0.0) {
            return Err(AssignmentError::BadCost {
                row: k / cols,
                col: k % cols,
                value: costs[k],
            });
        }
        Ok(Self {
            rows,
            cols,
            costs,
            gated,
        })
    }

    /// Matrix with no gated cells.
    pub fn ungated(rows: usize, cols: usize, costs: Vec<f64>) -> Result<Self, AssignmentError> {
        Self::new(rows, cols, costs, vec![false; rows * cols])
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, AssignmentError> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        Self::ungated(n, m, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn cost(&self, row: usize, col: usize) -> f64 {
        self.costs[row * self.cols + col]
    }

    #[inline]
    pub fn is_gated(&self, row: usize, col: usize) -> bool {
        self.gated[row * self.cols + col]
    }

    pub fn gate(&mut self, row: usize, col: usize) {
        self.gated[row * self.cols + col] = true;
    }

    pub fn transpose(&self) -> Self {
        let mut costs = Vec::with_capacity(self.costs.len());
        let mut gated = Vec::with_capacity(self.gated.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                costs.push(self.cost(r, c));
                gated.push(self.is_gated(r, c));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            costs,
            gated,
        }
    }

    /// Sum of the costs of `pairs`.
    pub fn total(&self, pairs: &[(usize, usize)]) -> f64 {
        pairs.iter().map(|&(r, c)| self.cost(r, c)).sum()
    }
}

/// Minimum-cost maximum-cardinality matching over the admissible cells.
///
/// Returned pairs are sorted by row.
pub fn solve_assignment(m: &CostMatrix) -> Vec<(usize, usize)> {
    let admissible: f64 = m
        .costs
        .iter()
        .zip(&m.gated)
        .filter(|(_, g)| !**g)
        .map(|(c, _)| *c)
        .sum();
    if m.gated.iter().all(|g| *g) {
        return Vec::new();
    }
    let forbidden = admissible + 1.0;

    let transposed = m.rows > m.cols;
    let (n, k) = if transposed {
        (m.cols, m.rows)
    } else {
        (m.rows, m.cols)
    };
    let cell = |i: usize, j: usize| -> f64 {
        let (r, c) = if transposed { (j, i) } else { (i, j) };
        if m.is_gated(r, c) {
            forbidden
        } else {
            m.cost(r, c)
        }
    };

    let assigned = hungarian(n, k, cell);

    let mut pairs: Vec<(usize, usize)> = assigned
        .into_iter()
        .enumerate()
        .map(|(i, j)| if transposed { (j, i) } else { (i, j) })
        .filter(|&(r, c)| !m.is_gated(r, c))
        .collect();
    pairs.sort_unstable();
    pairs
}

/// Shortest augmenting path Hungarian method with potentials, `n <= k`.
/// Returns the column assigned to each row.
fn hungarian(n: usize, k: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    debug_assert!(n <= k);
    let inf = f64::INFINITY;
    // 1-based; index 0 is the virtual root
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; k + 1];
    let mut owner = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    let mut minv = vec![inf; k + 1];
    let mut used = vec![false; k + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = inf);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut result = vec![0usize; n];
    for j in 1..=k {
        if owner[j] != 0 {
            result[owner[j] - 1] = j - 1;
        }
    }
    result
}

/// `1 - IOU` costs between track boxes (rows) and detection boxes (columns),
/// gated where the overlap falls below `iou_min`.
pub fn iou_cost(
    tracks: &[BoundingBox],
    dets: &[BoundingBox],
    iou_min: f64,
) -> Result<CostMatrix, AssignmentError> {
    let mut costs = Vec::with_capacity(tracks.len() * dets.len());
    let mut gated = Vec::with_capacity(tracks.len() * dets.len());
    for t in tracks {
        for d in dets {
            let o = iou(t, d);
            costs.push(1.0 - o);
            gated.push(o < iou_min);
        }
    }
    CostMatrix::new(tracks.len(), dets.len(), costs, gated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exhaustive search over all injections of the smaller side: maximize the
    /// number of admissible pairs, then minimize cost.
    pub(crate) fn brute_force(m: &CostMatrix) -> (usize, f64) {
        fn rec(
            m: &CostMatrix,
            row: usize,
            used: &mut Vec<bool>,
            count: usize,
            cost: f64,
            best: &mut (usize, f64),
        ) {
            if row == m.rows() {
                if count > best.0 || (count == best.0 && cost < best.1) {
                    *best = (count, cost);
                }
                return;
            }
            // leave the row unmatched
            rec(m, row + 1, used, count, cost, best);
            for c in 0..m.cols() {
                if !used[c] && !m.is_gated(row, c) {
                    used[c] = true;
                    rec(m, row + 1, used, count + 1, cost + m.cost(row, c), best);
                    used[c] = false;
                }
            }
        }
        let mut best = (0, 0.0);
        rec(m, 0, &mut vec![false; m.cols()], 0, 0.0, &mut best);
        best
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, gate_p: f64) -> CostMatrix {
        let costs = (0..rows * cols).map(|_| rng.random_range(0.0..10.0)).collect();
        let gated = (0..rows * cols).map(|_| rng.random_bool(gate_p)).collect();
        CostMatrix::new(rows, cols, costs, gated).unwrap()
    }

    fn assert_valid(m: &CostMatrix, pairs: &[(usize, usize)]) {
        let mut rows = vec![false; m.rows()];
        let mut cols = vec![false; m.cols()];
        for &(r, c) in pairs {
            assert!(!m.is_gated(r, c));
            assert!(!rows[r] && !cols[c]);
            rows[r] = true;
            cols[c] = true;
        }
    }

    #[test]
    fn single_cell() {
        let m = CostMatrix::from_rows(&[vec![5.0]]).unwrap();
        assert_eq!(solve_assignment(&m), vec![(0, 0)]);
    }

    #[test]
    fn diagonal_dominance() {
        let m = CostMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let pairs = solve_assignment(&m);
        assert_eq!(pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(m.total(&pairs), 2.0);
    }

    #[test]
    fn equal_costs_pick_identity() {
        let m = CostMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(solve_assignment(&m), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn all_gated_gives_empty_matching() {
        let m = CostMatrix::new(2, 2, vec![0.0; 4], vec![true; 4]).unwrap();
        assert!(solve_assignment(&m).is_empty());
    }

    #[test]
    fn gated_optimum_does_not_suppress_alternative() {
        // Without gating (0,0)+(1,1) costs 0; gating (1,1) must still leave a
        // two-pair matching (0,1)+(1,0) rather than the lone cheap pair.
        let mut m = CostMatrix::from_rows(&[vec![0.0, 5.0], vec![5.0, 0.0]]).unwrap();
        m.gate(1, 1);
        assert_eq!(solve_assignment(&m), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn rectangular_shapes() {
        let wide = CostMatrix::from_rows(&[vec![3.0, 1.0, 2.0]]).unwrap();
        assert_eq!(solve_assignment(&wide), vec![(0, 1)]);
        let tall = wide.transpose();
        assert_eq!(solve_assignment(&tall), vec![(1, 0)]);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(CostMatrix::ungated(0, 3, vec![]).is_err());
        assert!(CostMatrix::ungated(1, 2, vec![1.0]).is_err());
        assert!(matches!(
            CostMatrix::ungated(1, 2, vec![1.0, -1.0]),
            Err(AssignmentError::BadCost { row: 0, col: 1, .. })
        ));
        assert!(CostMatrix::ungated(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn matches_brute_force_on_6x6_with_gating() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let m = random_matrix(&mut rng, 6, 6, 0.2);
            let pairs = solve_assignment(&m);
            assert_valid(&m, &pairs);
            let (count, cost) = brute_force(&m);
            assert_eq!(pairs.len(), count);
            assert!((m.total(&pairs) - cost).abs() < 1e-9);
        }
    }

    #[test]
    fn scale_invariance_and_transpose_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let rows = rng.random_range(1..=7);
            let cols = rng.random_range(1..=7);
            let m = random_matrix(&mut rng, rows, cols, 0.25);
            let pairs = solve_assignment(&m);

            let k = rng.random_range(0.1..100.0);
            let scaled = CostMatrix::new(
                rows,
                cols,
                m.costs.iter().map(|c| c * k).collect(),
                m.gated.clone(),
            )
            .unwrap();
            assert_eq!(solve_assignment(&scaled), pairs);

            let mut swapped: Vec<(usize, usize)> = solve_assignment(&m.transpose())
                .into_iter()
                .map(|(r, c)| (c, r))
                .collect();
            swapped.sort_unstable();
            assert_eq!(swapped, pairs);
        }
    }

    #[test]
    fn iou_cost_cells() {
        let b = |x: f64| BoundingBox::new(x, 0.0, x + 10.0, 10.0).unwrap();
        let same = [b(0.0), b(50.0)];
        let m = iou_cost(&same, &same, 0.3).unwrap();
        assert_eq!(m.cost(0, 0), 0.0);
        assert_eq!(m.cost(1, 1), 0.0);
        assert!(!m.is_gated(0, 0) && !m.is_gated(1, 1));
        assert!(m.is_gated(0, 1) && m.is_gated(1, 0));

        let far = [b(200.0), b(400.0)];
        let m = iou_cost(&same, &far, 0.3).unwrap();
        assert!((0..2).all(|r| (0..2).all(|c| m.is_gated(r, c))));

        let tracks = [b(0.0), b(4.0), b(30.0)];
        let dets = [b(1.0), b(5.0), b(27.0), b(100.0)];
        let m = iou_cost(&tracks, &dets, 0.3).unwrap();
        for (i, t) in tracks.iter().enumerate() {
            for (j, d) in dets.iter().enumerate() {
                // 1-D overlap of two length-10 intervals times unit height
                let shift = (t.x_min() - d.x_min()).abs();
                let inter = (10.0 - shift).max(0.0);
                let o = inter / (20.0 - inter);
                assert!((m.cost(i, j) - (1.0 - o)).abs() < 1e-12);
                assert_eq!(m.is_gated(i, j), o < 0.3);
            }
        }
    }
}

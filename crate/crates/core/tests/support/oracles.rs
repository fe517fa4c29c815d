//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the engine.

#![allow(dead_code)]

pub type Mat = Vec<Vec<f64>>;

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![0.0; c]; r]
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn diag(v: &[f64]) -> Mat {
    let mut m = zeros(v.len(), v.len());
    for (i, x) in v.iter().enumerate() {
        m[i][i] = *x;
    }
    m
}

pub fn mul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            let mut s = 0.0;
            for t in 0..k {
                s += a[i][t] * b[t][j];
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn transpose(a: &Mat) -> Mat {
    let mut out = zeros(a[0].len(), a.len());
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            out[j][i] = *x;
        }
    }
    out
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
        .collect()
}

pub fn sub(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect())
        .collect()
}

pub fn col(v: &[f64]) -> Mat {
    v.iter().map(|x| vec![*x]).collect()
}

/// Gauss-Jordan elimination with partial pivoting.
pub fn inverse(a: &Mat) -> Mat {
    let n = a.len();
    let mut m: Mat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))
            .unwrap();
        m.swap(c, p);
        let pivot = m[c][c];
        assert!(pivot.abs() > 1e-300, "singular matrix");
        for x in m[c].iter_mut() {
            *x /= pivot;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    for j in 0..2 * n {
                        m[r][j] -= f * m[c][j];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Noise scalars of the box motion model, mirroring the engine's config
/// fields by name.
#[derive(Debug, Clone, Copy)]
pub struct KalmanNoise {
    pub init_position_var: f64,
    pub init_velocity_var: f64,
    pub meas_center_weight: f64,
    pub meas_area_weight: f64,
    pub meas_aspect_var: f64,
    pub process_position_var: f64,
    pub process_velocity_var: f64,
    pub process_area_rate_var: f64,
}

/// Textbook Kalman filter on dense matrices over (u, v, s, r, u', v', s').
#[derive(Debug, Clone)]
pub struct TextbookKalman {
    pub x: Mat,
    pub p: Mat,
    noise: KalmanNoise,
}

impl TextbookKalman {
    pub fn start(noise: KalmanNoise, b: [f64; 4]) -> Self {
        let z = Self::measure(b);
        let mut x = zeros(7, 1);
        for i in 0..4 {
            x[i][0] = z[i];
        }
        let (pp, pv) = (noise.init_position_var, noise.init_velocity_var);
        Self {
            x,
            p: diag(&[pp, pp, pp, pp, pv, pv, pv]),
            noise,
        }
    }

    pub fn measure(b: [f64; 4]) -> [f64; 4] {
        let (w, h) = (b[2] - b[0], b[3] - b[1]);
        [(b[0] + b[2]) / 2.0, (b[1] + b[3]) / 2.0, w * h, w / h]
    }

    fn f() -> Mat {
        let mut f = identity(7);
        f[0][4] = 1.0;
        f[1][5] = 1.0;
        f[2][6] = 1.0;
        f
    }

    fn h() -> Mat {
        let mut h = zeros(4, 7);
        for i in 0..4 {
            h[i][i] = 1.0;
        }
        h
    }

    pub fn predict(&mut self) {
        let f = Self::f();
        let q = self.noise.process_position_var;
        let qm = diag(&[
            q,
            q,
            q,
            q,
            self.noise.process_velocity_var,
            self.noise.process_velocity_var,
            self.noise.process_area_rate_var,
        ]);
        self.x = mul(&f, &self.x);
        self.p = add(&mul(&mul(&f, &self.p), &transpose(&f)), &qm);
        if self.x[2][0] <= 0.0 {
            self.x[2][0] = 1.0;
        }
    }

    pub fn update(&mut self, b: [f64; 4]) {
        let z = Self::measure(b);
        let (w, hh) = (b[2] - b[0], b[3] - b[1]);
        let c = self.noise.meas_center_weight * hh;
        let a = self.noise.meas_area_weight * w * hh;
        let r = diag(&[c * c, c * c, a * a, self.noise.meas_aspect_var]);
        let h = Self::h();
        let ht = transpose(&h);
        let s = add(&mul(&mul(&h, &self.p), &ht), &r);
        let k = mul(&mul(&self.p, &ht), &inverse(&s));
        let y = sub(&col(&z), &mul(&h, &self.x));
        self.x = add(&self.x, &mul(&k, &y));
        self.p = mul(&sub(&identity(7), &mul(&k, &h)), &self.p);
    }
}

/// Overlap ratio of two integer boxes by counting unit cells.
pub fn raster_iou(a: [i64; 4], b: [i64; 4]) -> f64 {
    let (mut inter, mut union) = (0u64, 0u64);
    let x0 = a[0].min(b[0]);
    let x1 = a[2].max(b[2]);
    let y0 = a[1].min(b[1]);
    let y1 = a[3].max(b[3]);
    let inside = |r: [i64; 4], x: i64, y: i64| x >= r[0] && x < r[2] && y >= r[1] && y < r[3];
    for y in y0..y1 {
        for x in x0..x1 {
            let (ia, ib) = (inside(a, x, y), inside(b, x, y));
            if ia && ib {
                inter += 1;
            }
            if ia || ib {
                union += 1;
            }
        }
    }
    inter as f64 / union as f64
}

/// Exhaustive assignment search: the largest number of admissible pairs,
/// then the smallest total cost among those.
pub fn brute_force_assignment(
    rows: usize,
    cols: usize,
    costs: &[f64],
    gated: &[bool],
) -> (usize, f64) {
    fn rec(
        r: usize,
        rows: usize,
        cols: usize,
        costs: &[f64],
        gated: &[bool],
        used: &mut [bool],
        acc: (usize, f64),
        best: &mut (usize, f64),
    ) {
        if r == rows {
            if acc.0 > best.0 || (acc.0 == best.0 && acc.1 < best.1) {
                *best = acc;
            }
            return;
        }
        rec(r + 1, rows, cols, costs, gated, used, acc, best);
        for c in 0..cols {
            let k = r * cols + c;
            if !used[c] && !gated[k] {
                used[c] = true;
                rec(r + 1, rows, cols, costs, gated, used, (acc.0 + 1, acc.1 + costs[k]), best);
                used[c] = false;
            }
        }
    }
    let mut best = (0, 0.0);
    rec(0, rows, cols, costs, gated, &mut vec![false; cols], (0, 0.0), &mut best);
    best
}

/// Most pairs with overlap at least `threshold` over all one-to-one pairings.
pub fn brute_force_max_matches(overlaps: &[Vec<f64>], threshold: f64) -> usize {
    let rows = overlaps.len();
    if rows == 0 {
        return 0;
    }
    let cols = overlaps[0].len();
    let costs = vec![0.0; rows * cols];
    let gated: Vec<bool> = overlaps.iter().flatten().map(|o| *o < threshold).collect();
    brute_force_assignment(rows, cols, &costs, &gated).0
}

/// Heat-map accumulation of integer boxes over integer cells by counting the
/// unit pixels of each box inside each cell.
pub fn raster_heatmap(boxes: &[[i64; 4]], cols: usize, rows: usize, cell: i64) -> Vec<f64> {
    let mut grid = vec![0.0; cols * rows];
    let unit = (cell * cell) as f64;
    for b in boxes {
        for y in b[1]..b[3] {
            for x in b[0]..b[2] {
                if x < 0 || y < 0 {
                    continue;
                }
                let (c, r) = ((x / cell) as usize, (y / cell) as usize);
                if c < cols && r < rows {
                    grid[r * cols + c] += 1.0 / unit;
                }
            }
        }
    }
    grid
}

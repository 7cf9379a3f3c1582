//! Exact Euclidean distance transform (squared), two-pass 1D lower
//! envelope of parabolas per axis.

const INF: f64 = 1e20;

/// 1D squared distance transform of a sampled function.
fn dt_1d(f: &[f64], out: &mut Vec<f64>) {
    let n = f.len();
    out.clear();
    out.resize(n, 0.0);
    let mut v = vec![0usize; n]; // parabola sites
    let mut z = vec![0.0f64; n + 1]; // boundaries
    let mut k = 0usize;
    z[0] = -INF;
    z[1] = INF;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = INF;
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        out[q] = d * d + f[p];
    }
}

/// Squared distance from every pixel to the nearest `false` pixel of the
/// mask. Pixels that are `false` get 0; a mask with no `false` pixels at
/// all comes back saturated (effectively infinite).
pub fn squared_distance_to_uncovered(mask: &[bool], width: usize, height: usize) -> Vec<f64> {
    assert_eq!(mask.len(), width * height);
    let mut field: Vec<f64> = mask.iter().map(|&m| if m { INF } else { 0.0 }).collect();

    // columns
    let mut col = vec![0.0f64; height];
    let mut out = Vec::new();
    for x in 0..width {
        for y in 0..height {
            col[y] = field[y * width + x];
        }
        dt_1d(&col, &mut out);
        for y in 0..height {
            field[y * width + x] = out[y];
        }
    }
    // rows
    let mut row = vec![0.0f64; width];
    for y in 0..height {
        row.copy_from_slice(&field[y * width..(y + 1) * width]);
        dt_1d(&row, &mut out);
        field[y * width..(y + 1) * width].copy_from_slice(&out);
    }
    field
}

use std::sync::OnceLock;

/// Orthonormal DCT-II basis, `C[u][x] = a(u) cos((2x + 1) u pi / 16)`.
fn basis() -> &'static [[f32; 8]; 8] {
    static BASIS: OnceLock<[[f32; 8]; 8]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut c = [[0.0f32; 8]; 8];
        for (u, row) in c.iter_mut().enumerate() {
            let a = if u == 0 { (1.0f64 / 8.0).sqrt() } else { (2.0f64 / 8.0).sqrt() };
            for (x, v) in row.iter_mut().enumerate() {
                *v = (a * ((2 * x + 1) as f64 * u as f64 * std::f64::consts::PI / 16.0).cos()) as f32;
            }
        }
        c
    })
}

/// Forward 8x8 type-II DCT. The DC coefficient equals 8x the block mean.
pub fn fdct_8x8(block: &[f32; 64]) -> [f32; 64] {
    let c = basis();
    let mut tmp = [0.0f32; 64];
    // tmp = C * B
    for u in 0..8 {
        for x in 0..8 {
            let mut s = 0.0;
            for y in 0..8 {
                s += c[u][y] * block[y * 8 + x];
            }
            tmp[u * 8 + x] = s;
        }
    }
    // out = tmp * C^T
    let mut out = [0.0f32; 64];
    for u in 0..8 {
        for v in 0..8 {
            let mut s = 0.0;
            for x in 0..8 {
                s += tmp[u * 8 + x] * c[v][x];
            }
            out[u * 8 + v] = s;
        }
    }
    out
}

pub fn idct_8x8(coef: &[f32; 64]) -> [f32; 64] {
    let c = basis();
    let mut tmp = [0.0f32; 64];
    // tmp = C^T * F
    for y in 0..8 {
        for v in 0..8 {
            let mut s = 0.0;
            for u in 0..8 {
                s += c[u][y] * coef[u * 8 + v];
            }
            tmp[y * 8 + v] = s;
        }
    }
    // out = tmp * C
    let mut out = [0.0f32; 64];
    for y in 0..8 {
        for x in 0..8 {
            let mut s = 0.0;
            for v in 0..8 {
                s += tmp[y * 8 + v] * c[v][x];
            }
            out[y * 8 + x] = s;
        }
    }
    out
}

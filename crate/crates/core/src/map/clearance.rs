//! Chebyshev (chessboard) distance transform over blocking cells.
//!
//! `0` marks a blocking cell; `k > 0` means every cell within Chebyshev index
//! distance `k - 1` is free. Cells outside the map count as free. Values
//! saturate at 255.

use super::VoxelMap;

pub(super) fn chebyshev_clearance(map: &VoxelMap) -> Vec<u8> {
    let [nx, ny, nz] = map.dims();
    let n = nx * ny * nz;
    let mut d: Vec<u8> = (0..n)
        .map(|i| if map.state_linear(i).is_blocking() { 0 } else { u8::MAX })
        .collect();

    // Half of the 26-neighbourhood preceding a cell in raster order.
    let mut back: Vec<(i64, i64, i64)> = Vec::with_capacity(13);
    for dz in -1i64..=1 {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dz < 0 || (dz == 0 && dy < 0) || (dz == 0 && dy == 0 && dx < 0) {
                    back.push((dx, dy, dz));
                }
            }
        }
    }
    let (sx, sy) = (1i64, nx as i64);
    let sz = (nx * ny) as i64;
    let offsets: Vec<i64> = back.iter().map(|(x, y, z)| x * sx + y * sy + z * sz).collect();

    let relax = |d: &mut Vec<u8>, x: usize, y: usize, z: usize, sign: i64| {
        let i = x + nx * (y + ny * z);
        let cur = d[i];
        if cur == 0 {
            return;
        }
        let mut best = cur;
        for (k, &(dx, dy, dz)) in back.iter().enumerate() {
            let (xx, yy, zz) = (x as i64 + sign * dx, y as i64 + sign * dy, z as i64 + sign * dz);
            if xx < 0 || yy < 0 || zz < 0 || xx >= nx as i64 || yy >= ny as i64 || zz >= nz as i64 {
                continue;
            }
            let j = (i as i64 + sign * offsets[k]) as usize;
            best = best.min(d[j].saturating_add(1));
        }
        d[i] = best;
    };

    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                relax(&mut d, x, y, z, 1);
            }
        }
    }
    for z in (0..nz).rev() {
        for y in (0..ny).rev() {
            for x in (0..nx).rev() {
                relax(&mut d, x, y, z, -1);
            }
        }
    }
    d
}

//! Grid helpers shared by the integration tests.

#![allow(dead_code)]

use std::collections::VecDeque;

/// 4-connected components of the cells where `inside` holds on an
/// `nx × ny` grid, with the column axis periodic when `wrap` is set.
/// Returns the label of every cell (0 outside) and the component count.
pub fn label_components(inside: &[bool], nx: usize, ny: usize, wrap: bool) -> (Vec<u32>, u32) {
    let mut label = vec![0u32; nx * ny];
    let mut next = 0u32;
    for start in 0..nx * ny {
        if !inside[start] || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(idx) = queue.pop_front() {
            for j in neighbours(idx, nx, ny, wrap).into_iter().flatten() {
                if inside[j] && label[j] == 0 {
                    label[j] = next;
                    queue.push_back(j);
                }
            }
        }
    }
    (label, next)
}

/// 8-connected components on a non-wrapping grid, the digital dual of
/// 4-connectivity: a 4-connected set and its 8-connected complement obey
/// the Jordan curve theorem on the pixel lattice.
pub fn label_components_8(inside: &[bool], nx: usize, ny: usize) -> (Vec<u32>, u32) {
    let mut label = vec![0u32; nx * ny];
    let mut next = 0u32;
    for start in 0..nx * ny {
        if !inside[start] || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(idx) = queue.pop_front() {
            let (x, y) = ((idx % nx) as i64, (idx / nx) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (u, v) = (x + dx, y + dy);
                    if u < 0 || v < 0 || u >= nx as i64 || v >= ny as i64 {
                        continue;
                    }
                    let j = v as usize * nx + u as usize;
                    if inside[j] && label[j] == 0 {
                        label[j] = next;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    (label, next)
}

pub fn neighbours(idx: usize, nx: usize, ny: usize, wrap: bool) -> [Option<usize>; 4] {
    let (x, y) = (idx % nx, idx / nx);
    let left = if x > 0 {
        Some(idx - 1)
    } else {
        wrap.then(|| idx + nx - 1)
    };
    let right = if x + 1 < nx {
        Some(idx + 1)
    } else {
        wrap.then(|| idx + 1 - nx)
    };
    [
        left,
        right,
        (y > 0).then(|| idx - nx),
        (y + 1 < ny).then(|| idx + nx),
    ]
}

/// Labels of components that reach the outer frame of a non-wrapping grid.
pub fn border_labels(label: &[u32], nx: usize, ny: usize) -> Vec<u32> {
    let mut out: Vec<u32> = (0..nx * ny)
        .filter(|&i| {
            let (x, y) = (i % nx, i / nx);
            x == 0 || y == 0 || x == nx - 1 || y == ny - 1
        })
        .map(|i| label[i])
        .filter(|&l| l != 0)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

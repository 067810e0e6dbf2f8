//! Published reference values, in percent unless noted. Objective order is
//! all2all, th-10%, th-50%, acc-2%, acc-5%.

pub const OBJECTIVES: [&str; 5] = ["all2all", "th-10%", "th-50%", "acc-2%", "acc-5%"];

/// Predicted performance, perfect grading, Borda.
pub const PERFECT_BORDA_THEORY: [f64; 5] = [92.01, 96.94, 94.13, 93.57, 95.47];
pub const PERFECT_BORDA_SIM: [f64; 5] = [92.02, 96.95, 94.14, 93.57, 95.47];

pub const REAL_OPT_THEORY: [f64; 5] = [80.01, 87.61, 83.62, 81.27, 82.97];
pub const REAL_BORDA_THEORY: [f64; 5] = [79.57, 87.18, 83.43, 80.73, 82.42];
pub const REAL_OPT_SIM: [f64; 5] = [80.09, 87.60, 83.62, 81.27, 82.97];
pub const REAL_BORDA_SIM: [f64; 5] = [79.57, 87.17, 83.43, 80.74, 82.42];

pub const MALLOWS_OPT_THEORY: [f64; 5] = [85.15, 92.05, 88.39, 86.52, 88.42];
pub const MALLOWS_BORDA_THEORY: [f64; 5] = [84.38, 90.52, 87.80, 85.72, 87.61];
pub const MALLOWS_OPT_SIM: [f64; 5] = [85.16, 92.07, 88.40, 86.52, 88.42];
pub const MALLOWS_BORDA_SIM: [f64; 5] = [84.39, 90.54, 87.81, 85.73, 87.62];

/// Rules optimised on the sampled approximations, scored under Mallows.
pub const P100_THEORY: [f64; 5] = [84.95, 91.82, 88.21, 86.31, 88.19];
pub const P1000_THEORY: [f64; 5] = [85.14, 92.05, 88.39, 86.51, 88.41];

/// Objectives of the component-size table.
pub const SCC_OBJECTIVES: [&str; 4] = ["all2all", "th-50%", "acc-2%", "acc-5%"];

/// Rows `[1, 3-7, 8-11, >=12, max]` per objective. The first entry is the
/// contracted count (types minus multi-type components).
pub const REAL_SCC: [[usize; 5]; 4] = [
    [448, 13, 1, 0, 10],
    [460, 2, 0, 0, 3],
    [449, 12, 1, 0, 10],
    [451, 10, 1, 0, 10],
];
pub const MALLOWS_SCC: [[usize; 5]; 4] = [
    [453, 6, 2, 1, 20],
    [459, 3, 0, 0, 4],
    [449, 10, 2, 1, 20],
    [449, 12, 0, 1, 20],
];

/// First 14 types of the all2all-optimal orderings.
pub const MALLOWS_PREFIX: [[u8; 6]; 14] = [
    [1, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 1, 6],
    [1, 1, 1, 1, 1, 5],
    [1, 1, 1, 1, 1, 2],
    [1, 1, 1, 1, 1, 4],
    [1, 1, 1, 1, 1, 3],
    [1, 1, 1, 1, 2, 6],
    [1, 1, 1, 1, 2, 2],
    [1, 1, 1, 1, 6, 6],
    [1, 1, 1, 1, 2, 5],
    [1, 1, 1, 1, 5, 6],
    [1, 1, 1, 1, 2, 4],
    [1, 1, 1, 1, 2, 3],
    [1, 1, 1, 1, 5, 5],
];
pub const P100_PREFIX: [[u8; 6]; 14] = [
    [1, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 1, 5],
    [1, 1, 1, 1, 1, 2],
    [1, 1, 1, 1, 1, 4],
    [1, 1, 1, 1, 1, 3],
    [1, 1, 1, 1, 1, 6],
    [1, 1, 1, 1, 2, 2],
    [1, 1, 1, 1, 2, 5],
    [1, 1, 1, 1, 5, 5],
    [1, 1, 1, 1, 2, 4],
    [1, 1, 1, 1, 2, 3],
    [1, 1, 1, 1, 3, 5],
    [1, 1, 1, 1, 4, 5],
    [1, 1, 1, 1, 3, 3],
];
pub const P1000_PREFIX: [[u8; 6]; 14] = [
    [1, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 1, 6],
    [1, 1, 1, 1, 1, 5],
    [1, 1, 1, 1, 1, 2],
    [1, 1, 1, 1, 1, 4],
    [1, 1, 1, 1, 1, 3],
    [1, 1, 1, 1, 2, 6],
    [1, 1, 1, 1, 2, 2],
    [1, 1, 1, 1, 2, 5],
    [1, 1, 1, 1, 6, 6],
    [1, 1, 1, 1, 5, 6],
    [1, 1, 1, 1, 5, 5],
    [1, 1, 1, 1, 2, 4],
    [1, 1, 1, 1, 2, 3],
];

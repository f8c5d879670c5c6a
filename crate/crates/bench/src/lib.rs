//! Parameter grids shared by the criterion benches.

/// Imaginary parts swept at fixed real part; term counts grow with `|t|`.
pub const T_GRID: [f64; 4] = [0.0, 10.0, 20.0, 50.0];

/// Moment-table sizes for the recurrence cost curve.
pub const TABLE_SIZES: [usize; 3] = [100, 200, 400];

/// Output digits used throughout the benches.
pub const TARGET_DIGITS: u32 = 30;

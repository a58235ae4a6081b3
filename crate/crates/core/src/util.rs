/// Rounds to `decimals` places, ties to even, normalizing `-0.0` to `0.0`.
pub fn round_half_even(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (x * scale).round_ties_even() / scale + 0.0
}

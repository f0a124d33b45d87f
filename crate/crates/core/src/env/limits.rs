/// True iff any observation leaves its closed `[min, max]` interval.
/// Infinite bounds never trip, and a NaN element always does.
pub fn check_limits(obs: &[f64], bounds: &[[f64; 2]]) -> bool {
    obs.iter()
        .zip(bounds)
        .any(|(&x, b)| !(x >= b[0] && x <= b[1]))
}

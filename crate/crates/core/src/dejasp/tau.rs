//! Shipped defaults for `tau'` and the fidelity weight.

/// Weight `gamma` of the masked data term, equal to the default `mu`.
pub const DEFAULT_FIDELITY: f64 = 2.7e-3;

/// `(sigma, impulse ratio, tau')` from a logarithmic sweep on a held-out
/// image, frozen per cell.
pub const TAU_PRIME_TABLE: &[(f64, f64, f64)] = &[(20.0, 0.2, 1.3e-3), (30.0, 0.2, 2.4e-3), (30.0, 0.3, 2.4e-3)];

/// `tau'` for a noise cell. Exact table hits are returned as is; otherwise
/// the entry with the nearest sigma (then ratio) is scaled by sigma.
pub fn default_tau_prime(sigma: f64, ratio: f64) -> f64 {
    let &(s0, _, t0) = TAU_PRIME_TABLE
        .iter()
        .min_by(|a, b| {
            (a.0 - sigma)
                .abs()
                .total_cmp(&(b.0 - sigma).abs())
                .then((a.1 - ratio).abs().total_cmp(&(b.1 - ratio).abs()))
        })
        .expect("nonempty table");
    t0 * sigma.max(0.0) / s0
}

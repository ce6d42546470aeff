//! Physical constants (CODATA 2018, SI units).
//!
//! Only the noise module works in SI. The transport modules use simulation
//! units with ħ = m = 1.

/// Label written into metadata sidecars so outputs can be traced to a table.
pub const TABLE_VERSION: &str = "CODATA 2018";

/// Reduced Planck constant ħ, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant k_B, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Vacuum permittivity ε₀, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light c, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Bohr magneton μ_B, J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Resistivity of copper at room temperature, Ω·m.
pub const RHO_COPPER: f64 = 1.7e-8;

/// `(symbol, value, unit)` rows, in the order printed by `wgt --constants`.
pub fn table() -> [(&'static str, f64, &'static str); 6] {
    [
        ("hbar", HBAR, "J s"),
        ("k_B", BOLTZMANN, "J/K"),
        ("epsilon_0", EPSILON_0, "F/m"),
        ("c", SPEED_OF_LIGHT, "m/s"),
        ("mu_B", BOHR_MAGNETON, "J/T"),
        ("rho_Cu", RHO_COPPER, "ohm m"),
    ]
}

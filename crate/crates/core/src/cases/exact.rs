/// Manufactured solution `h = H + a sin(th)`, `u = b cos(th)`, `v = 0`
/// with `th = kx x + ky y - omega t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsParams {
    pub a: f64,
    pub b: f64,
    pub depth: f64,
    pub kx: f64,
    pub ky: f64,
    pub omega: f64,
    pub g: f64,
    pub f: f64,
}

/// Conserved variables `(h, hu, hv)` of the manufactured solution.
pub fn mms_fields(p: &MmsParams, x: f64, y: f64, t: f64) -> [f64; 3] {
    let th = p.kx * x + p.ky * y - p.omega * t;
    let (s, c) = th.sin_cos();
    let h = p.depth + p.a * s;
    [h, h * p.b * c, 0.0]
}

/// Source that makes the manufactured fields an exact solution of the
/// nonlinear system with Coriolis forcing `(0, f hv, -f hu)`.
pub fn mms_source(p: &MmsParams, x: f64, y: f64, t: f64) -> [f64; 3] {
    let th = p.kx * x + p.ky * y - p.omega * t;
    let (s, c) = th.sin_cos();
    let h = p.depth + p.a * s;
    let u = p.b * c;
    // Derivatives of h and u along the phase, then the chain rule.
    let dh = p.a * c;
    let du = -p.b * s;
    let (h_t, h_x, h_y) = (-p.omega * dh, p.kx * dh, p.ky * dh);
    let (u_t, u_x) = (-p.omega * du, p.kx * du);

    let mass = h_t + h_x * u + h * u_x;
    let hu_t = h_t * u + h * u_t;
    let momentum_x = hu_t + h_x * u * u + 2.0 * h * u * u_x + p.g * h * h_x;
    // v = 0: only the pressure gradient and the Coriolis turning of hu remain.
    let momentum_y = p.g * h * h_y + p.f * h * u;
    [mass, momentum_x, momentum_y]
}

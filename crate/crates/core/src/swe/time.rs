use super::{rhs, ConservedState, EpsPolicy, Field, RhsContext, StepTolerances, SweError};

/// One SSP-RK3 step with a caller-supplied operator `l(u, t)`.
///
/// Every stage is rounded per component at `tol.per_var`; dense states pass through unchanged.
pub fn ssprk3<L>(
    state: &ConservedState,
    t: f64,
    dt: f64,
    tol: &StepTolerances,
    mut l: L,
) -> Result<ConservedState, SweError>
where
    L: FnMut(&ConservedState, f64) -> Result<ConservedState, SweError>,
{
    let mut euler = |u: &ConservedState, at: f64| -> Result<ConservedState, SweError> {
        let du = l(u, at)?;
        blend(u, &[(1.0, u), (dt, &du)], tol)
    };
    let u1 = euler(state, t)?;
    let f1 = euler(&u1, t + dt)?;
    let u2 = blend(state, &[(0.75, state), (0.25, &f1)], tol)?;
    let f2 = euler(&u2, t + 0.5 * dt)?;
    blend(state, &[(1.0 / 3.0, state), (2.0 / 3.0, &f2)], tol)
}

/// One step of the finite-volume operator, with tolerances computed from `state`.
pub fn ssprk3_with(
    ctx: &RhsContext<'_>,
    state: &ConservedState,
    t: f64,
    dt: f64,
    policy: &EpsPolicy,
    eps_calls: &mut usize,
) -> Result<(ConservedState, StepTolerances), SweError> {
    let tol = StepTolerances::for_state(state, policy, ctx.grid.dx(), eps_calls);
    let next = ssprk3(state, t, dt, &tol, |u, at| rhs(ctx, u, at, &tol))?;
    Ok((next, tol))
}

fn blend(
    like: &ConservedState,
    terms: &[(f64, &ConservedState)],
    tol: &StepTolerances,
) -> Result<ConservedState, SweError> {
    let mut comps = Vec::with_capacity(3);
    for k in 0..3 {
        let fields: Vec<(f64, &Field)> = terms.iter().map(|(a, s)| (*a, &s.comps[k])).collect();
        comps.push(Field::combine(&fields, tol.per_var[k])?);
    }
    ConservedState::new(like.model, comps.try_into().expect("three components"))
}

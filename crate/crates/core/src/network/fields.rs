use super::GreenTrajectory;
use crate::numkit::Unitary;
use crate::synth::PulseSet;
use crate::{Error, Result, C64};

fn target_column(traj: &GreenTrajectory, target: &Unitary, column: usize, k: usize) -> Result<Vec<C64>> {
    let n = traj.n();
    if target.dim() != n {
        return Err(Error::invalid("target dimension does not match trajectory"));
    }
    if column >= n {
        return Err(Error::invalid(format!("column {column} out of range for N = {n}")));
    }
    let g = traj
        .at(k)
        .ok_or_else(|| Error::invalid(format!("no Green's function sample stored at index {k}")))?;
    // [G U^dag]_{mu, l} = sum_k G_{mu k} conj(U_{l k})
    Ok((0..2 * n)
        .map(|mu| (0..n).map(|j| g[(mu, j)] * target.get(column, j).conj()).sum())
        .collect())
}

/// Out-field amplitude in the channel right after the first `after` modes,
/// for the initial excitation `Psi_column^dag |vac>`:
/// `F_{after, column}(t_k) = sum_{nu < after} g*_nu(t_k) [G(t_k, t0) U^dag]_{nu, column}`.
///
/// `after = 0` is the vacuum input and always gives zero; `column` is zero
/// based.
pub fn out_field(
    traj: &GreenTrajectory,
    pulses: &PulseSet,
    target: &Unitary,
    after: usize,
    column: usize,
    k: usize,
) -> Result<C64> {
    let modes = 2 * traj.n();
    if after > modes {
        return Err(Error::invalid(format!("mode index {after} exceeds 2N = {modes}")));
    }
    if pulses.modes() != modes || pulses.grid().len() != traj.grid().len() {
        return Err(Error::invalid("pulses do not match the trajectory"));
    }
    let v = target_column(traj, target, column, k)?;
    let g = pulses.values_at(k);
    Ok((0..after).map(|nu| g[nu].conj() * v[nu]).sum())
}

/// Probability that the excitation started in `Psi_column^dag |vac>` sits in
/// the first `N + column + 1` modes (register A and receivers up to `column`).
pub fn excitation_probability(traj: &GreenTrajectory, target: &Unitary, column: usize, k: usize) -> Result<f64> {
    let v = target_column(traj, target, column, k)?;
    Ok(v[..traj.n() + column + 1].iter().map(|z| z.norm_sqr()).sum())
}

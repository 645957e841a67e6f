use crate::C64;

/// Bounds a synthesized coupling to the physical range `|g| <= 1`.
///
/// Values inside the unit disc pass through. Larger or indeterminate values
/// (the `0/0` and `x/0` cases at the start of the protocol) are replaced by
/// the unit-magnitude number with the phase of `phase_source`, or of `raw`
/// itself if `phase_source` vanishes. Returns `None` when no phase can be
/// assigned.
pub fn clamp_pulse(raw: C64, phase_source: C64) -> Option<C64> {
    let finite = raw.re.is_finite() && raw.im.is_finite();
    if finite && raw.norm() <= 1.0 {
        return Some(raw);
    }
    unit_phase(phase_source).or_else(|| if finite { unit_phase(raw) } else { None })
}

fn unit_phase(z: C64) -> Option<C64> {
    let r = z.norm();
    if r > 0.0 && r.is_finite() {
        Some(z / r)
    } else {
        None
    }
}

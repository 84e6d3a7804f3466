use super::{Tape, Tensor, Var};
use crate::error::{contract, Result};

/// Outcome of a finite-difference gradient comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct GradCheck {
    /// max over compared entries of |analytic − cd| / max(|analytic|, |cd|, 1e-8)
    pub max_rel_error: f64,
    pub compared: usize,
    /// Entries whose difference stencil crossed a ReLU kink.
    pub skipped: usize,
}

/// Compares the tape gradient of `f` at `x` with the five-point central
/// difference `(−f(x+2h) + 8f(x+h) − 8f(x−h) + f(x−2h)) / 12h`, `h = eps`.
///
/// `f` receives a fresh tape and the leaf for `x` and must return a scalar
/// node. Entries where any ReLU input sits exactly at zero, or changes sign
/// inside the `[x − 2eps, x + 2eps]` stencil, are skipped.
pub fn grad_check<F>(f: F, x: &Tensor, eps: f64) -> Result<GradCheck>
where
    F: Fn(&mut Tape, Var) -> Result<Var>,
{
    if !(eps > 0.0 && eps <= 1e-2) {
        return Err(contract(format!("grad_check eps {eps} outside (0, 1e-2]")));
    }
    let mut tape = Tape::new();
    let xv = tape.leaf(x.clone());
    let loss = f(&mut tape, xv)?;
    let grads = tape.backward(loss)?;
    let analytic = grads.get_or_zeros(xv, x.shape());
    let base_sig = tape.relu_signature();
    let base_has_kink = base_sig.contains(&1);

    let eval = |probe: Tensor| -> Result<(f64, Vec<u8>)> {
        let mut t = Tape::new();
        let v = t.leaf(probe);
        let out = f(&mut t, v)?;
        Ok((t.scalar(out), t.relu_signature()))
    };

    let mut report = GradCheck {
        max_rel_error: 0.0,
        compared: 0,
        skipped: 0,
    };
    for i in 0..x.len() {
        let xi = x.data()[i];
        let mut f = [0.0; 4];
        let mut kink = base_has_kink;
        for (slot, step) in f.iter_mut().zip([2.0, 1.0, -1.0, -2.0]) {
            let (v, sig) = eval(x.with_entry(i, xi + step * eps)?)?;
            *slot = v;
            kink |= sig != base_sig;
        }
        if kink {
            report.skipped += 1;
            continue;
        }
        let cd = (8.0 * (f[1] - f[2]) - (f[0] - f[3])) / (12.0 * eps);
        let a = analytic.data()[i];
        let rel = (a - cd).abs() / a.abs().max(cd.abs()).max(1e-8);
        report.max_rel_error = report.max_rel_error.max(rel);
        report.compared += 1;
    }
    Ok(report)
}

use crate::autodiff::Tensor;
use crate::error::{Error, Result};

/// Adam moments for a fixed list of parameter tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(shapes: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let (m, v) = shapes
            .into_iter()
            .map(|(r, c)| (Tensor::zeros(r, c), Tensor::zeros(r, c)))
            .unzip();
        Self {
            m,
            v,
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam update of every parameter in place.
pub fn adam_step(params: &mut [&mut Tensor], grads: &[&Tensor], state: &mut AdamState, lr: f64) -> Result<()> {
    if params.len() != state.m.len() || grads.len() != params.len() {
        return Err(Error::Contract(format!(
            "adam_step got {} params, {} grads for {} moment slots",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    for ((p, g), m) in params.iter().zip(grads).zip(&state.m) {
        if p.shape() != g.shape() || p.shape() != m.shape() {
            return Err(Error::Dimension {
                op: "adam_step",
                left: p.shape(),
                right: g.shape(),
            });
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2, eps) = (state.beta1, state.beta2, state.eps);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        let (pd, md, vd) = (p.data_mut(), m.data_mut(), v.data_mut());
        for (((x, &gi), mi), vi) in pd.iter_mut().zip(g.data()).zip(md.iter_mut()).zip(vd.iter_mut()) {
            *mi = b1 * *mi + (1.0 - b1) * gi;
            *vi = b2 * *vi + (1.0 - b2) * gi * gi;
            let m_hat = *mi / c1;
            let v_hat = *vi / c2;
            *x -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = Tensor::from_rows(&[[1.0, -2.0]]).unwrap();
        let before = p.clone();
        let g = Tensor::zeros(1, 2);
        let mut s = AdamState::new([(1, 2)]);
        adam_step(&mut [&mut p], &[&g], &mut s, 0.01).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        let mut p = Tensor::from_rows(&[[1.0, 1.0]]).unwrap();
        let g = Tensor::from_rows(&[[0.3, -4.0]]).unwrap();
        let mut s = AdamState::new([(1, 2)]);
        adam_step(&mut [&mut p], &[&g], &mut s, 0.01).unwrap();
        assert!((p.data()[0] - 0.99).abs() < 1e-7);
        assert!((p.data()[1] - 1.01).abs() < 1e-7);
        assert_eq!(s.step_count(), 1);
    }

    #[test]
    fn deterministic_and_shape_checked() {
        let g = Tensor::from_rows(&[[0.5, 0.25]]).unwrap();
        let run = || {
            let mut p = Tensor::ones(1, 2);
            let mut s = AdamState::new([(1, 2)]);
            for _ in 0..3 {
                adam_step(&mut [&mut p], &[&g], &mut s, 0.1).unwrap();
            }
            (p, s)
        };
        assert_eq!(run(), run());
        let mut p = Tensor::ones(2, 1);
        let mut s = AdamState::new([(2, 1)]);
        assert!(adam_step(&mut [&mut p], &[&g], &mut s, 0.1).is_err());
    }
}

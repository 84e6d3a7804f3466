//! Reverse-mode gradients on a small tape, checked against central differences.

use expass::autodiff::{grad_check, Tape, Tensor};

fn main() -> expass::Result<()> {
    let x = Tensor::from_rows(&[[0.5, -1.0], [2.0, 0.25]])?;
    let w = Tensor::from_rows(&[[1.0, -0.5, 0.2], [0.3, 0.8, -1.2]])?;

    let mut tape = Tape::new();
    let xv = tape.leaf(x.clone());
    let wv = tape.constant(w.clone());
    let h = tape.matmul(xv, wv)?;
    let s = tape.sigmoid(h)?;
    let ls = tape.log_softmax(s)?;
    let loss = tape.sum(ls)?;
    let grads = tape.backward(loss)?;
    println!("loss = {:.6}", tape.scalar(loss));
    println!("dloss/dx = {:?}", grads.get(xv).map(|g| g.data().to_vec()));

    let rep = grad_check(
        |t, xv| {
            let wv = t.constant(w.clone());
            let h = t.matmul(xv, wv)?;
            let s = t.sigmoid(h)?;
            let ls = t.log_softmax(s)?;
            t.sum(ls)
        },
        &x,
        1e-5,
    )?;
    println!("grad check: max rel error {:.2e} over {} entries", rep.max_rel_error, rep.compared);
    Ok(())
}

//! AUROC with ties, positive and macro F1, and GEF between two distributions.

use expass::metrics::{auroc, f1_score, gef, F1Average};

fn main() -> expass::Result<()> {
    let scores = [0.9, 0.8, 0.8, 0.3, 0.2, 0.6];
    let labels = [1, 1, 0, 0, 0, 1];
    println!("auroc {:.4}", auroc(&scores, &labels)?);
    let preds: Vec<usize> = scores.iter().map(|&s| usize::from(s > 0.5)).collect();
    println!("f1 positive {:.4}", f1_score(&preds, &labels, F1Average::Positive, 2));
    println!("f1 macro {:.4}", f1_score(&preds, &labels, F1Average::Macro, 2));
    println!("gef {:.4}", gef(&[0.9, 0.1], &[0.6, 0.4])?);
    println!("gef identical {:.4}", gef(&[0.9, 0.1], &[0.9, 0.1])?);
    Ok(())
}

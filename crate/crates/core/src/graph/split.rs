use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::GraphSet;
use crate::error::{contract, Error, Result};

/// Indices into a [`GraphSet`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified split with part sizes from largest-remainder rounding.
///
/// Each class is shuffled, the classes are interleaved in proportion to their
/// size, and the resulting order is cut into contiguous train/val/test chunks,
/// so every part sees close to the global class mix. A part with ratio 0 is
/// empty; every other part must be nonempty.
pub fn split(set: &GraphSet, ratios: [f64; 3], seed: u64) -> Result<Split> {
    if ratios.iter().any(|r| !(0.0..=1.0).contains(r)) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(contract(format!("split ratios {ratios:?} must be in [0, 1] and sum to 1")));
    }
    let n = set.len();
    let sizes = largest_remainder(n, &ratios);
    for (i, (&r, &s)) in ratios.iter().zip(&sizes).enumerate() {
        if r > 0.0 && s == 0 {
            return Err(Error::Stratification(format!("part {i} is empty after rounding {n} graphs")));
        }
    }
    let parts = ratios.iter().filter(|&&r| r > 0.0).count();

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); set.num_classes()];
    for (i, g) in set.graphs().iter().enumerate() {
        by_class[g.label()].push(i);
    }
    for (c, members) in by_class.iter().enumerate() {
        if !members.is_empty() && members.len() < parts {
            return Err(Error::Stratification(format!(
                "class {c} has {} graphs for {parts} parts",
                members.len()
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keyed = Vec::with_capacity(n);
    for (c, members) in by_class.iter_mut().enumerate() {
        members.shuffle(&mut rng);
        let m = members.len() as f64;
        for (k, &i) in members.iter().enumerate() {
            keyed.push(((k as f64 + 0.5) / m, c, i));
        }
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let order: Vec<usize> = keyed.into_iter().map(|(_, _, i)| i).collect();

    let (train, rest) = order.split_at(sizes[0]);
    let (val, test) = rest.split_at(sizes[1]);
    Ok(Split {
        train: train.to_vec(),
        val: val.to_vec(),
        test: test.to_vec(),
    })
}

fn largest_remainder(n: usize, ratios: &[f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut sizes = [0usize; 3];
    for (s, e) in sizes.iter_mut().zip(&exact) {
        *s = e.floor() as usize;
    }
    let mut left = n - sizes.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if ratios[i] > 0.0 {
            sizes[i] += 1;
            left -= 1;
        }
    }
    sizes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Tensor;
    use crate::graph::Graph;

    fn set_with_labels(labels: &[usize]) -> GraphSet {
        let graphs = labels
            .iter()
            .map(|&l| Graph::new(1, [], Tensor::ones(1, 1), l).unwrap())
            .collect();
        GraphSet::new("t", graphs, 2).unwrap()
    }

    #[test]
    fn exact_division() {
        let set = set_with_labels(&[0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
        let s = split(&set, [0.8, 0.1, 0.1], 0).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (8, 1, 1));
    }

    #[test]
    fn disjoint_covering_deterministic() {
        let labels: Vec<usize> = (0..37).map(|i| usize::from(i % 3 == 0)).collect();
        let set = set_with_labels(&labels);
        let a = split(&set, [0.7, 0.15, 0.15], 5).unwrap();
        assert_eq!(a, split(&set, [0.7, 0.15, 0.15], 5).unwrap());
        let mut all: Vec<usize> = a.train.iter().chain(&a.val).chain(&a.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..37).collect::<Vec<_>>());
    }

    #[test]
    fn stratification_keeps_class_mix() {
        let labels: Vec<usize> = (0..100).map(|i| usize::from(i < 30)).collect();
        let set = set_with_labels(&labels);
        let s = split(&set, [0.8, 0.0, 0.2], 1).unwrap();
        assert!(s.val.is_empty());
        let pos = s.test.iter().filter(|&&i| labels[i] == 1).count();
        assert_eq!(pos, 6);
    }

    #[test]
    fn tiny_class_is_rejected() {
        let set = set_with_labels(&[0, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
        assert!(matches!(split(&set, [0.8, 0.1, 0.1], 0), Err(Error::Stratification(_))));
        assert!(split(&set, [0.5, 0.5, 0.1], 0).is_err());
    }
}

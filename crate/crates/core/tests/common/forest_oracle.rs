//! A single CART tree that scores every feature and every midpoint at every
//! node (no bootstrap, no feature sampling).

enum Tree {
    Leaf(usize),
    Split(usize, f64, Box<Tree>, Box<Tree>),
}

fn gini(labels: &[usize], classes: usize) -> f64 {
    let n = labels.len() as f64;
    let mut g = 1.0;
    for c in 0..classes {
        let p = labels.iter().filter(|&&l| l == c).count() as f64 / n;
        g -= p * p;
    }
    g
}

fn majority(labels: &[usize], classes: usize) -> usize {
    let mut best = 0;
    let mut best_count = 0;
    for c in 0..classes {
        let k = labels.iter().filter(|&&l| l == c).count();
        if k > best_count {
            best = c;
            best_count = k;
        }
    }
    best
}

fn grow(x: &[Vec<f64>], y: &[usize], rows: &[usize], depth: usize, max_depth: usize, classes: usize) -> Tree {
    let labels: Vec<usize> = rows.iter().map(|&i| y[i]).collect();
    if depth == max_depth || rows.len() < 2 || labels.iter().all(|&l| l == labels[0]) {
        return Tree::Leaf(majority(&labels, classes));
    }
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..x[0].len() {
        let mut values: Vec<f64> = rows.iter().map(|&i| x[i][f]).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        for w in values.windows(2) {
            let thr = (w[0] + w[1]) / 2.0;
            let left: Vec<usize> = rows.iter().filter(|&&i| x[i][f] <= thr).map(|&i| y[i]).collect();
            let right: Vec<usize> = rows.iter().filter(|&&i| x[i][f] > thr).map(|&i| y[i]).collect();
            let n = rows.len() as f64;
            let score = (left.len() as f64 * gini(&left, classes) + right.len() as f64 * gini(&right, classes)) / n;
            if best.is_none_or(|(s, _, _)| score < s) {
                best = Some((score, f, thr));
            }
        }
    }
    match best {
        None => Tree::Leaf(majority(&labels, classes)),
        Some((_, f, thr)) => {
            let l: Vec<usize> = rows.iter().copied().filter(|&i| x[i][f] <= thr).collect();
            let r: Vec<usize> = rows.iter().copied().filter(|&i| x[i][f] > thr).collect();
            Tree::Split(
                f,
                thr,
                Box::new(grow(x, y, &l, depth + 1, max_depth, classes)),
                Box::new(grow(x, y, &r, depth + 1, max_depth, classes)),
            )
        }
    }
}

fn predict(t: &Tree, v: &[f64]) -> usize {
    match t {
        Tree::Leaf(c) => *c,
        Tree::Split(f, thr, l, r) => {
            if v[*f] <= *thr {
                predict(l, v)
            } else {
                predict(r, v)
            }
        }
    }
}

/// Training accuracy of the exhaustive tree.
pub fn training_accuracy(x: &[Vec<f64>], y: &[usize], max_depth: usize, classes: usize) -> f64 {
    let rows: Vec<usize> = (0..x.len()).collect();
    let tree = grow(x, y, &rows, 0, max_depth, classes);
    let correct = x.iter().zip(y).filter(|(v, &l)| predict(&tree, v) == l).count();
    correct as f64 / x.len() as f64
}

/// Mean training accuracy of the forest and of the exhaustive tree over
/// `seeds` toy sets.
pub fn mean_accuracies(seeds: std::ops::Range<u64>) -> (f64, f64) {
    let n = seeds.end - seeds.start;
    let (mut forest, mut oracle) = (0.0, 0.0);
    for seed in seeds {
        let (x, y) = super::fixtures::toy_set(seed);
        let f = gaitsense::RandomForest::fit(&x, &y, 2, seed).unwrap();
        forest += x.iter().zip(&y).filter(|(v, &l)| f.predict(v) == l).count() as f64 / x.len() as f64;
        oracle += training_accuracy(&x, &y, gaitsense::forest::MAX_DEPTH, 2);
    }
    (forest / n as f64, oracle / n as f64)
}

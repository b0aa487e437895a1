use rand::Rng;

use super::Embeddings;
use crate::text::tokenize;
use crate::{seeded_rng, Error, Result};

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the centroid closest to `point` in Euclidean distance; ties go to
/// the lowest index.
pub fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    /// Nearest final centroid of every input point.
    pub assignments: Vec<usize>,
    /// Sum of squared distances after each assignment step.
    pub inertia_history: Vec<f64>,
}

impl KMeansResult {
    pub fn inertia(&self) -> f64 {
        self.inertia_history.last().copied().unwrap_or(0.0)
    }
}

/// Lloyd's algorithm from k-means++ seeds. Stops when assignments no longer
/// change or after `max_iters` updates. A cluster that loses all its points
/// is moved onto the point currently farthest from its centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, max_iters: usize) -> Result<KMeansResult> {
    if k == 0 {
        return Err(Error::Config("k-means needs k ≥ 1".into()));
    }
    if k > points.len() {
        return Err(Error::Config(format!(
            "k-means with k = {k} needs at least {k} points, got {}",
            points.len()
        )));
    }
    let dim = points[0].len();
    if let Some(i) = points.iter().position(|p| p.len() != dim) {
        return Err(Error::shape(format!("k-means point {i}"), dim, points[i].len()));
    }
    let mut rng = seeded_rng(seed);
    let mut centroids = plus_plus_seeds(points, k, &mut rng);
    let mut assignments = vec![usize::MAX; points.len()];
    let mut inertia_history = Vec::new();
    for iter in 0..=max_iters {
        let mut changed = false;
        let mut inertia = 0.0;
        for (p, a) in points.iter().zip(assignments.iter_mut()) {
            let c = nearest(p, &centroids);
            inertia += sq_dist(p, &centroids[c]);
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        inertia_history.push(inertia);
        if !changed || iter == max_iters {
            break;
        }
        update_centroids(points, &assignments, &mut centroids);
    }
    Ok(KMeansResult {
        centroids,
        assignments,
        inertia_history,
    })
}

fn plus_plus_seeds<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut chosen = vec![rng.random_range(0..points.len())];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && target < acc {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).expect("positive total"))
        } else {
            // Every point coincides with a seed; take unused indices in order.
            (0..points.len()).find(|i| !chosen.contains(i)).expect("k ≤ point count")
        };
        chosen.push(next);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

fn update_centroids(points: &[Vec<f64>], assignments: &[usize], centroids: &mut [Vec<f64>]) {
    let dim = points[0].len();
    let k = centroids.len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(p) {
            *s += x;
        }
    }
    let mut taken: Vec<usize> = Vec::new();
    for c in 0..k {
        if counts[c] > 0 {
            centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
        }
    }
    for c in 0..k {
        if counts[c] == 0 {
            let far = points
                .iter()
                .enumerate()
                .filter(|(i, _)| !taken.contains(i))
                .map(|(i, p)| (i, sq_dist(p, &centroids[assignments[i]])))
                .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
                .0;
            taken.push(far);
            centroids[c] = points[far].clone();
        }
    }
}

/// k centroids over an embedding table plus the nearest centroid of every
/// word in it.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidCodebook {
    pub embeddings: Embeddings,
    pub centroids: Vec<Vec<f64>>,
    word_cluster: Vec<usize>,
}

impl CentroidCodebook {
    pub fn build(embeddings: Embeddings, k: usize, seed: u64, max_iters: usize) -> Result<Self> {
        let result = kmeans(embeddings.vectors(), k, seed, max_iters)?;
        Ok(Self::from_centroids(embeddings, result.centroids))
    }

    pub fn from_centroids(embeddings: Embeddings, centroids: Vec<Vec<f64>>) -> Self {
        let word_cluster = embeddings
            .vectors()
            .iter()
            .map(|v| nearest(v, &centroids))
            .collect();
        CentroidCodebook {
            embeddings,
            centroids,
            word_cluster,
        }
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Nearest centroid of `token`, if the embedding table knows it.
    pub fn cluster_of(&self, token: &str) -> Option<usize> {
        self.embeddings.lookup(token).map(|i| self.word_cluster[i])
    }
}

/// Per-centroid counts of the tokens of `text` found in the embedding table.
pub fn featurize_centroids(text: &str, codebook: &CentroidCodebook) -> Vec<f64> {
    let mut out = vec![0.0; codebook.k()];
    for token in tokenize(text) {
        let core = token.core_str(text);
        if core.is_empty() {
            continue;
        }
        if let Some(c) = codebook.cluster_of(core) {
            out[c] += 1.0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_centroid_per_point() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 5.0], vec![-3.0, 2.0]];
        let r = kmeans(&pts, 3, 7, 10).unwrap();
        assert_eq!(r.inertia(), 0.0);
        let mut sorted = r.assignments.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, [0, 1, 2]);
    }

    #[test]
    fn rejects_too_many_clusters() {
        assert!(kmeans(&[vec![1.0]], 2, 0, 5).is_err());
    }

    #[test]
    fn duplicate_points_still_seed() {
        let pts = vec![vec![1.0]; 4];
        let r = kmeans(&pts, 3, 0, 5).unwrap();
        assert_eq!(r.centroids.len(), 3);
        assert_eq!(r.inertia(), 0.0);
    }

    #[test]
    fn nearest_ties_low_index() {
        let cs = vec![vec![1.0], vec![-1.0]];
        assert_eq!(nearest(&[0.0], &cs), 0);
    }

    #[test]
    fn centroid_features() {
        let emb = Embeddings::parse("cat 0 0\ndog 0.1 0\ncar 10 10\n").unwrap();
        let book = CentroidCodebook::from_centroids(emb, vec![vec![0.0, 0.0], vec![10.0, 10.0]]);
        assert_eq!(featurize_centroids("Cat dog, car! unknown", &book), [2.0, 1.0]);
        assert_eq!(featurize_centroids("nothing known", &book), [0.0, 0.0]);
        assert_eq!(featurize_centroids("car", &book), [0.0, 1.0]);
    }
}

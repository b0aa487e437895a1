mod common;

use rand::Rng;

use chartcn::baselines::{featurize_centroids, kmeans, nearest, CentroidCodebook, Embeddings};
use chartcn::model::Model;
use chartcn::quantizer::encode;
use chartcn::tensor_ops::{conv_forward, conv_forward_onehot, maxpool_forward, ConvKernel, FrameSeq, PoolSpec};
use common::{naive_conv, naive_pool, random_rows};

fn to_rows(f: &FrameSeq<f64>) -> Vec<Vec<f64>> {
    (0..f.frames()).map(|j| f.row(j).to_vec()).collect()
}

fn flatten_weights(w: &[Vec<Vec<f64>>]) -> Vec<f64> {
    w.iter().flatten().flatten().copied().collect()
}

#[test]
fn conv_matches_definition_exactly() {
    let mut rng = chartcn::seeded_rng(1);
    for _ in 0..300 {
        let (m, n) = (rng.random_range(1..5), rng.random_range(1..5));
        let k = rng.random_range(1..6);
        let d = rng.random_range(1..=k);
        let l = k + rng.random_range(0..15);
        let input = random_rows(&mut rng, m, l);
        let weights: Vec<Vec<Vec<f64>>> = (0..n).map(|_| random_rows(&mut rng, m, k)).collect();
        let kernel = ConvKernel::new(n, m, k, d, flatten_weights(&weights)).unwrap();
        let got = conv_forward(&FrameSeq::from_rows(&input).unwrap(), &kernel).unwrap();
        assert_eq!(to_rows(&got), naive_conv(&input, &weights, k, d), "m={m} n={n} k={k} d={d} l={l}");
    }
}

#[test]
fn onehot_conv_agrees_with_definition() {
    let alphabet = chartcn::quantizer::Alphabet::standard();
    let mut rng = chartcn::seeded_rng(2);
    for _ in 0..100 {
        let l = rng.random_range(7..40);
        let text: String = (0..rng.random_range(0..50))
            .map(|_| char::from(rng.random_range(b' '..=b'~')))
            .collect();
        let enc = encode(&text, &alphabet, l);
        let dense = enc.to_frames::<f64>();
        let (n, k) = (3, 7);
        let weights: Vec<Vec<Vec<f64>>> = (0..n).map(|_| random_rows(&mut rng, alphabet.len(), k)).collect();
        let kernel = ConvKernel::new(n, alphabet.len(), k, 1, flatten_weights(&weights)).unwrap();
        let got = conv_forward_onehot(enc.active(), &kernel).unwrap();
        // The fast path adds the same terms in tap-major order, so only
        // rounding may differ.
        let want = naive_conv(&to_rows(&dense), &weights, k, 1);
        for (a, b) in to_rows(&got).concat().iter().zip(want.concat()) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}

#[test]
fn pool_matches_definition_exactly() {
    let mut rng = chartcn::seeded_rng(3);
    for _ in 0..300 {
        let f = rng.random_range(1..5);
        let k = rng.random_range(1..6);
        let d = rng.random_range(1..=k);
        let l = k + rng.random_range(0..15);
        let input = random_rows(&mut rng, f, l);
        let got = maxpool_forward(&FrameSeq::from_rows(&input).unwrap(), PoolSpec::with_stride(k, d).unwrap()).unwrap();
        assert_eq!(to_rows(&got.output), naive_pool(&input, k, d));
    }
}

/// The model's logits against the same network assembled from the
/// definitional conv and pool, with FC layers as plain dot products.
#[test]
fn model_forward_matches_naive_pipeline() {
    let mut rng = chartcn::seeded_rng(4);
    for seed in 0..20 {
        let model = Model::<f64>::build(common::checks::tiny_model_config(seed)).unwrap();
        let text: String = (0..20).map(|_| "abcde .".chars().nth(rng.random_range(0..7)).unwrap()).collect();
        let enc = model.encode(&text);
        let mut h = to_rows(&enc.to_frames::<f64>());
        for (spec, layer) in model.config().conv_layers.iter().zip(&model.params().conv) {
            let k = &layer.kernel;
            let w: Vec<Vec<Vec<f64>>> = (0..k.out_frames())
                .map(|j| (0..k.in_frames()).map(|i| k.taps(j, i).to_vec()).collect())
                .collect();
            h = naive_conv(&h, &w, k.width(), k.stride());
            for (row, b) in h.iter_mut().zip(&layer.bias) {
                row.iter_mut().for_each(|v| *v = (*v + b).max(0.0));
            }
            if let Some(p) = spec.pool {
                h = naive_pool(&h, p, p);
            }
        }
        let mut v: Vec<f64> = h.concat();
        let last = model.params().fc.len() - 1;
        for (idx, fc) in model.params().fc.iter().enumerate() {
            v = (0..fc.out_units())
                .map(|o| fc.bias[o] + fc.row(o).iter().zip(&v).map(|(a, b)| a * b).sum::<f64>())
                .map(|z| if idx == last { z } else { z.max(0.0) })
                .collect();
        }
        let got = model.logits(&enc).unwrap();
        for (a, b) in got.iter().zip(&v) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{got:?} vs {v:?}");
        }
    }
}

fn brute_nearest(p: &[f64], cs: &[Vec<f64>]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, c) in cs.iter().enumerate() {
        let d: f64 = p.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum();
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

#[test]
fn kmeans_assignment_matches_brute_force() {
    let mut rng = chartcn::seeded_rng(5);
    for trial in 0..30 {
        let n = rng.random_range(5..80);
        let dim = rng.random_range(1..6);
        let k = rng.random_range(1..=n.min(12));
        let points = random_rows(&mut rng, n, dim);
        let r = kmeans(&points, k, trial, 50).unwrap();
        for (p, &a) in points.iter().zip(&r.assignments) {
            assert_eq!(a, brute_nearest(p, &r.centroids));
            assert_eq!(nearest(p, &r.centroids), a);
        }
        for pair in r.inertia_history.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-12), "inertia rose: {:?}", r.inertia_history);
        }
    }
}

#[test]
fn centroid_features_match_brute_force() {
    let mut rng = chartcn::seeded_rng(6);
    let words: Vec<String> = (0..40).map(|i| format!("w{i}")).collect();
    let entries = words.iter().map(|w| (w.clone(), common::random_vec(&mut rng, 3))).collect();
    let emb = Embeddings::new(entries).unwrap();
    let book = CentroidCodebook::build(emb.clone(), 6, 9, 100).unwrap();
    for _ in 0..50 {
        let text: Vec<&str> = (0..10).map(|_| words[rng.random_range(0..40)].as_str()).collect();
        let text = text.join(" ") + " unknown";
        let mut want = vec![0.0; 6];
        for w in text.split(' ') {
            if let Some(i) = emb.index_of(w) {
                want[brute_nearest(&emb.vectors()[i], &book.centroids)] += 1.0;
            }
        }
        assert_eq!(featurize_centroids(&text, &book), want);
    }
}

#[test]
fn kmeans_recovers_separated_blobs() {
    let mut rng = chartcn::seeded_rng(7);
    let means = [[-5.0, 2.0], [4.0, -3.0]];
    let mut points = Vec::new();
    for i in 0..400 {
        let m = means[i % 2];
        points.push(vec![m[0] + rng.random_range(-0.5..0.5), m[1] + rng.random_range(-0.5..0.5)]);
    }
    let r = kmeans(&points, 2, 1, 100).unwrap();
    for m in means {
        let closest = r
            .centroids
            .iter()
            .map(|c| ((c[0] - m[0]).powi(2) + (c[1] - m[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(closest < 0.1, "no centroid near {m:?}: {:?}", r.centroids);
    }
}

//! Word-level comparison models: bag-of-words counts and bag-of-centroids
//! over word embeddings, both classified by multinomial logistic regression.

mod embeddings;
mod kmeans;
mod logreg;
mod vocab;

pub use embeddings::Embeddings;
pub use kmeans::{featurize_centroids, kmeans, nearest, CentroidCodebook, KMeansResult};
pub use logreg::{train_logreg, LogRegModel, LogRegOptions};
pub use vocab::{build_vocabulary, featurize_bow, Vocabulary, DEFAULT_VOCAB_CAP};

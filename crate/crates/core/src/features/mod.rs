//! Featurization: vocabulary, bag-of-words, TF-IDF, LSI, skip-gram word
//! vectors and PV-DM document vectors.

mod doc2vec;
pub mod linalg;
mod lsi;
pub mod sgns;
mod sparse;
mod tfidf;
mod vocab;
mod word2vec;

pub use doc2vec::{train_doc2vec, Doc2VecConfig, DocEmbeddings};
pub use lsi::{lsi_fit, lsi_fit_with, LsiConfig, LsiFitReport, LsiModel};
pub use sparse::{bow, SparseVector};
pub use tfidf::{tfidf_fit, tfidf_transform, IdfWeights};
pub use vocab::{build_vocab, Vocabulary};
pub use word2vec::{cosine, doc_vector_avg, train_word2vec, Word2VecConfig, WordEmbeddings};

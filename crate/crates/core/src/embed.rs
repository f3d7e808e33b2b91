//! Sentence vectors from precomputed embeddings.
//!
//! Three providers are supported: precomputed sentence vectors keyed by a
//! sentence id, word vectors averaged over a sentence's tokens, and a
//! hash-seeded pseudo-random embedder that needs no external files.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::hash::Hasher;
use std::io::{BufRead, BufReader};
use std::path::Path;

use fnv::FnvHasher;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::preprocess::tokenize;

pub const DEFAULT_DIM: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provider {
    PrecomputedSentence,
    WordAverage,
    HashFallback,
}

impl fmt::Display for Provider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provider::PrecomputedSentence => "precomputed-sentence",
            Provider::WordAverage => "word-average",
            Provider::HashFallback => "hash-fallback",
        })
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
    provider: Provider,
    seed: u64,
}

impl EmbeddingStore {
    /// Store with no vectors that embeds each token as a seeded unit vector.
    pub fn hash_fallback(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            vectors: HashMap::new(),
            provider: Provider::HashFallback,
            seed,
        })
    }

    pub fn from_vectors(
        provider: Provider,
        vectors: HashMap<String, Vec<f64>>,
        dim: usize,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        if let Some((key, v)) = vectors.iter().find(|(_, v)| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                context: format!("vector `{key}`"),
                expected: dim,
                found: v.len(),
            });
        }
        Ok(Self {
            dim,
            vectors,
            provider,
            seed: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provider(&self) -> Provider {
        self.provider
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.vectors.get(key).map(Vec::as_slice)
    }
}

fn parse_vector_file(
    path: &Path,
    split: impl Fn(&str) -> Option<(&str, &str)>,
) -> Result<(HashMap<String, Vec<f64>>, usize)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut vectors = HashMap::new();
    let mut dim: Option<usize> = None;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end();
        if line.trim().is_empty() {
            continue;
        }
        let (key, rest) =
            split(line).ok_or_else(|| Error::parse(path, line_no, "missing vector"))?;
        let fields: Vec<&str> = rest.split_whitespace().collect();
        // word2vec text files may open with a "<count> <dim>" header
        if line_no == 1
            && fields.len() == 1
            && key.parse::<usize>().is_ok()
            && fields[0].parse::<usize>().is_ok()
        {
            continue;
        }
        let values = fields
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::parse(path, line_no, e))?;
        if values.is_empty() {
            return Err(Error::parse(path, line_no, "missing vector"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(path, line_no, "non-finite component"));
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("expected {d} components, found {}", values.len()),
                ))
            }
            _ => {}
        }
        vectors.insert(key.to_string(), values);
    }
    let dim = dim.ok_or_else(|| Error::parse(path, 0, "no vectors; dimension undeterminable"))?;
    Ok((vectors, dim))
}

/// Word-vector text format: `term v1 v2 ... vd` per line.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let (vectors, dim) = parse_vector_file(path.as_ref(), |line| {
        let line = line.trim_start();
        let cut = line.find(char::is_whitespace)?;
        Some((&line[..cut], &line[cut..]))
    })?;
    EmbeddingStore::from_vectors(Provider::WordAverage, vectors, dim)
}

/// Sentence-vector format: `sentence_id<TAB>v1 v2 ... vd` per line.
pub fn load_sentence_vectors(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let (vectors, dim) = parse_vector_file(path.as_ref(), |line| line.split_once('\t'))?;
    EmbeddingStore::from_vectors(Provider::PrecomputedSentence, vectors, dim)
}

/// Key used for precomputed sentence vectors: `<doc id>#<sentence index>`.
pub fn sentence_key(doc_id: &str, index: usize) -> String {
    format!("{doc_id}#{index}")
}

fn token_hash(token: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(token.as_bytes());
    h.finish()
}

/// Seeded unit vector for one token; stable across runs and platforms.
pub fn hash_token_vector(token: &str, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(token_hash(token) ^ seed.rotate_left(32));
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn mean_of<'a>(vectors: impl Iterator<Item = &'a [f64]>, dim: usize) -> (Vec<f64>, usize) {
    let mut acc = vec![0.0; dim];
    let mut n = 0usize;
    for v in vectors {
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
        n += 1;
    }
    if n > 0 {
        for a in &mut acc {
            *a /= n as f64;
        }
    }
    (acc, n)
}

/// Vector for one sentence. `key` is consulted only by the precomputed
/// sentence provider; the other providers average token vectors.
pub fn embed_sentence(tokens: &[String], key: &str, store: &EmbeddingStore) -> Result<Vec<f64>> {
    if tokens.is_empty() {
        return Err(Error::Empty("sentence has no tokens"));
    }
    match store.provider {
        Provider::PrecomputedSentence => store
            .get(key)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| Error::MissingSentenceVector(key.to_string())),
        Provider::WordAverage => {
            let (v, hits) = mean_of(tokens.iter().filter_map(|t| store.get(t)), store.dim);
            if hits == 0 {
                log::debug!(
                    "sentence `{key}`: all {} tokens out of vocabulary, using zero vector",
                    tokens.len()
                );
            }
            Ok(v)
        }
        Provider::HashFallback => {
            let vecs: Vec<Vec<f64>> = tokens
                .iter()
                .map(|t| hash_token_vector(t, store.dim, store.seed))
                .collect();
            Ok(mean_of(vecs.iter().map(Vec::as_slice), store.dim).0)
        }
    }
}

/// Embeds every sentence of every document, replacing stored vectors.
/// Sentences without tokens are tokenized from their text first. Runs in
/// parallel across documents on the current rayon pool; results do not
/// depend on the thread count.
pub fn embed_corpus(corpus: &mut [Document], store: &EmbeddingStore) -> Result<()> {
    corpus.par_iter_mut().try_for_each(|doc| {
        for (i, s) in doc.sentences.iter_mut().enumerate() {
            let key = sentence_key(&doc.id, i);
            let v = if s.tokens.is_empty() {
                embed_sentence(&tokenize(&s.text), &key, store)
            } else {
                embed_sentence(&s.tokens, &key, store)
            };
            s.embedding = Some(v.map_err(|e| match e {
                Error::Empty(_) => Error::Config(format!("sentence `{key}` has no tokens")),
                e => e,
            })?);
        }
        Ok(())
    })
}

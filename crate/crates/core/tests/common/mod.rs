#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use alignscore::scorer::{AlignmentJudgment, FixtureScorer};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// Judgment whose three heads all read `v`.
pub fn uniform(v: f64) -> AlignmentJudgment {
    AlignmentJudgment::new([v, (1.0 - v) / 2.0, (1.0 - v) / 2.0], [v, 1.0 - v], v).unwrap()
}

pub fn context_sentence(i: usize) -> String {
    format!("Unit {i} holds.")
}

pub fn claim_sentence(j: usize) -> String {
    format!("Claim {j} stands.")
}

/// A context/claim pair plus a fixture scorer realizing `m[row][col]` for
/// context sentence `row` against claim sentence `col`. With a chunk budget
/// of 1 every context sentence is its own chunk.
pub struct MatrixInstance {
    pub context: String,
    pub claim: String,
    pub scorer: FixtureScorer,
}

pub fn matrix_instance(m: &[Vec<f64>]) -> MatrixInstance {
    let rows = m.len();
    let cols = m[0].len();
    let mut scorer = FixtureScorer::new();
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            scorer.insert(&context_sentence(i), &claim_sentence(j), uniform(*v));
        }
    }
    MatrixInstance {
        context: (0..rows)
            .map(context_sentence)
            .collect::<Vec<_>>()
            .join(" "),
        claim: (0..cols).map(claim_sentence).collect::<Vec<_>>().join(" "),
        scorer,
    }
}

// Independent oracles.

/// Mean over columns of the column maximum, by explicit loops.
pub fn oracle_mean_of_max(m: &[Vec<f64>]) -> f64 {
    let cols = m[0].len();
    let mut total = 0.0;
    for j in 0..cols {
        let mut best = f64::NEG_INFINITY;
        for row in m {
            if row[j] > best {
                best = row[j];
            }
        }
        total += best;
    }
    total / cols as f64
}

/// AUC by enumerating every (positive, negative) pair; ties count one half.
pub fn oracle_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (k, sk) in scores.iter().enumerate() {
            if labels[k] {
                continue;
            }
            pairs += 1.0;
            if si > sk {
                wins += 1.0;
            } else if si == sk {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Tau-b by counting all pairs.
pub fn oracle_kendall(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (mut concordant, mut discordant, mut tie_x, mut tie_y) = (0.0f64, 0.0, 0.0, 0.0);
    for i in 0..n {
        for k in i + 1..n {
            let dx = x[i] - x[k];
            let dy = y[i] - y[k];
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tie_x += 1.0;
            } else if dy == 0.0 {
                tie_y += 1.0;
            } else if (dx > 0.0) == (dy > 0.0) {
                concordant += 1.0;
            } else {
                discordant += 1.0;
            }
        }
    }
    (concordant - discordant)
        / ((concordant + discordant + tie_x) * (concordant + discordant + tie_y)).sqrt()
}

/// Mid-ranks (1-based) by counting smaller and equal values.
pub fn oracle_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|v| {
            let less = x.iter().filter(|u| *u < v).count() as f64;
            let equal = x.iter().filter(|u| *u == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn oracle_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

pub fn oracle_spearman(x: &[f64], y: &[f64]) -> f64 {
    oracle_pearson(&oracle_ranks(x), &oracle_ranks(y))
}

pub fn oracle_balanced_accuracy(pred: &[bool], gold: &[bool]) -> f64 {
    let tp = pred.iter().zip(gold).filter(|(p, g)| **p && **g).count() as f64;
    let tn = pred.iter().zip(gold).filter(|(p, g)| !**p && !**g).count() as f64;
    let pos = gold.iter().filter(|g| **g).count() as f64;
    let neg = gold.len() as f64 - pos;
    (tp / pos + tn / neg) / 2.0
}

/// A minimal backend speaking the alignment wire protocol on a random port.
pub struct MockBackend {
    pub endpoint: String,
    pub requests: Arc<AtomicUsize>,
    pub peak_in_flight: Arc<AtomicUsize>,
    server: Arc<tiny_http::Server>,
    workers: Vec<JoinHandle<()>>,
}

/// What the mock answers for a request body.
pub type Handler = dyn Fn(&str) -> (u16, String) + Send + Sync;

impl MockBackend {
    pub fn start(threads: usize, handler: Arc<Handler>) -> Self {
        let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").unwrap());
        let port = server.server_addr().to_ip().unwrap().port();
        let requests = Arc::new(AtomicUsize::new(0));
        let active = Arc::new(AtomicUsize::new(0));
        let peak = Arc::new(AtomicUsize::new(0));
        let workers = (0..threads)
            .map(|_| {
                let server = Arc::clone(&server);
                let handler = Arc::clone(&handler);
                let requests = Arc::clone(&requests);
                let active = Arc::clone(&active);
                let peak = Arc::clone(&peak);
                std::thread::spawn(move || {
                    while let Ok(mut request) = server.recv() {
                        let now = active.fetch_add(1, Ordering::SeqCst) + 1;
                        peak.fetch_max(now, Ordering::SeqCst);
                        requests.fetch_add(1, Ordering::SeqCst);
                        let mut body = String::new();
                        let _ = request.as_reader().read_to_string(&mut body);
                        let (status, reply) = if request.url() == "/v1/align" {
                            handler(&body)
                        } else {
                            (404, r#"{"error":"not found"}"#.to_string())
                        };
                        active.fetch_sub(1, Ordering::SeqCst);
                        let response = tiny_http::Response::from_string(reply)
                            .with_status_code(status)
                            .with_header(
                                "Content-Type: application/json"
                                    .parse::<tiny_http::Header>()
                                    .unwrap(),
                            );
                        let _ = request.respond(response);
                    }
                })
            })
            .collect();
        Self {
            endpoint: format!("http://127.0.0.1:{port}"),
            requests,
            peak_in_flight: peak,
            server,
            workers,
        }
    }
}

impl Drop for MockBackend {
    fn drop(&mut self) {
        for _ in 0..self.workers.len() {
            self.server.unblock();
        }
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

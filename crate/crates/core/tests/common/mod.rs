#![allow(dead_code, clippy::needless_range_loop)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use linloop::geometry::EmbeddingVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct Request {
    pub path: String,
    pub authorization: Option<String>,
    pub body: serde_json::Value,
}

type Handler = dyn Fn(&Request, usize) -> (u16, String) + Send + Sync;

/// Minimal HTTP/1.1 server answering every request through `handler`, which
/// also receives the zero-based request count.
pub struct MockServer {
    pub url: String,
    pub requests: Arc<Mutex<Vec<Request>>>,
}

impl MockServer {
    pub fn start(handler: impl Fn(&Request, usize) -> (u16, String) + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let requests = Arc::new(Mutex::new(Vec::new()));
        let log = Arc::clone(&requests);
        let handler: Arc<Handler> = Arc::new(handler);
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let log = Arc::clone(&log);
                let handler = Arc::clone(&handler);
                thread::spawn(move || serve(stream, &log, &*handler));
            }
        });
        Self { url, requests }
    }

    pub fn count(&self) -> usize {
        self.requests.lock().unwrap().len()
    }

    pub fn bodies(&self) -> Vec<serde_json::Value> {
        self.requests
            .lock()
            .unwrap()
            .iter()
            .map(|r| r.body.clone())
            .collect()
    }
}

fn serve(stream: TcpStream, log: &Mutex<Vec<Request>>, handler: &Handler) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut line = String::new();
    if reader.read_line(&mut line).unwrap_or(0) == 0 {
        return;
    }
    let path = line.split_whitespace().nth(1).unwrap_or("").to_string();
    let mut length = 0;
    let mut authorization = None;
    loop {
        let mut h = String::new();
        reader.read_line(&mut h).unwrap();
        let h = h.trim_end();
        if h.is_empty() {
            break;
        }
        let (name, value) = h.split_once(':').unwrap();
        match name.to_ascii_lowercase().as_str() {
            "content-length" => length = value.trim().parse().unwrap(),
            "authorization" => authorization = Some(value.trim().to_string()),
            _ => {}
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).unwrap();
    let request = Request {
        path,
        authorization,
        body: serde_json::from_slice(&body).unwrap_or(serde_json::Value::Null),
    };
    let index = {
        let mut log = log.lock().unwrap();
        log.push(request.clone());
        log.len() - 1
    };
    let (status, reply) = handler(&request, index);
    let mut stream = stream;
    let _ = write!(
        stream,
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
        reply.len()
    );
}

/// Embeddings reply for `input`, each text mapped through `embed`, listed in
/// reverse index order to exercise reordering.
pub fn embeddings_reply(request: &Request, embed: impl Fn(&str) -> Vec<f64>) -> String {
    let input = request.body["input"].as_array().unwrap();
    let data: Vec<serde_json::Value> = input
        .iter()
        .enumerate()
        .rev()
        .map(|(i, t)| serde_json::json!({"index": i, "embedding": embed(t.as_str().unwrap())}))
        .collect();
    serde_json::json!({ "data": data }).to_string()
}

pub fn chat_reply(content: &str) -> String {
    serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nonzero vector with components uniform in `[-1, 1)`.
pub fn random_vector(rng: &mut impl Rng, n: usize) -> EmbeddingVector {
    loop {
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if c.iter().any(|x| *x != 0.0) {
            return EmbeddingVector::new(c).unwrap();
        }
    }
}

pub fn unit(v: &EmbeddingVector) -> Vec<f64> {
    v.normalized().unwrap().into_inner()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub type Dense = Vec<Vec<f64>>;

/// Number of eigenvalues below `sigma`: the sign changes of the leading
/// principal minors of `M − σI`, read off as negative pivots of symmetric
/// Gaussian elimination.
pub fn count_below(m: &Dense, sigma: f64) -> usize {
    let n = m.len();
    let mut a: Dense = m.clone();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= sigma;
    }
    let mut negatives = 0;
    for k in 0..n {
        let mut pivot = a[k][k];
        if pivot == 0.0 {
            pivot = f64::EPSILON * (1.0 + sigma.abs());
        }
        if pivot < 0.0 {
            negatives += 1;
        }
        for i in k + 1..n {
            let f = a[i][k] / pivot;
            for j in k + 1..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    negatives
}

/// Eigenvalues in descending order by bisection on [`count_below`].
pub fn bisection_eigenvalues(m: &Dense) -> Vec<f64> {
    let n = m.len();
    let radius = (0..n)
        .map(|i| m[i].iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    (0..n)
        .map(|k| {
            // The (k+1)-th smallest eigenvalue.
            let (mut lo, mut hi) = (-radius, radius);
            while hi - lo > 1e-13 * radius {
                let mid = 0.5 * (lo + hi);
                if count_below(m, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .rev()
        .collect()
}

pub fn random_symmetric(r: &mut impl Rng, n: usize) -> Dense {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let x = r.random_range(-1.0..1.0);
            m[i][j] = x;
            m[j][i] = x;
        }
    }
    m
}

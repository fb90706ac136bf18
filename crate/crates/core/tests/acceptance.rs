//! The acceptance suite. Every criterion prints one `PASS` / `FAIL` line;
//! the test fails if any criterion does.

mod common;

use std::f64::consts::PI;
use std::io::Write as _;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{bisection_eigenvalues, max_abs_diff, random_symmetric, random_vector, rng, unit};
use linloop::embedding::{EmbedderFingerprint, MockEmbedder};
use linloop::engine::{analyze, AnalysisOptions, CorpusElement, DeficitReport, Pipeline, Trajectory};
use linloop::geometry::{
    compose_chain, minimal_rotation, representing_matrix, signature_of, symmetric_eigenvalues,
    EmbeddingVector, SymmetricMatrix,
};
use linloop::synthetic::{expected_signature, generate_chain, Plane, SyntheticSpec, SyntheticStep};
use linloop::transform::{EchoTransformer, MockTransform, SubstitutionTable, TransformationStep};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn column(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

fn trajectory(vectors: Vec<EmbeddingVector>) -> Trajectory {
    let dim = vectors[0].dim();
    let texts = (0..vectors.len()).map(|i| format!("t{i}")).collect();
    Trajectory::new(
        "e",
        texts,
        vectors,
        "s",
        EmbedderFingerprint {
            model: "acceptance".into(),
            dim,
        },
    )
    .unwrap()
}

/// Component of a random vector orthogonal to `span{a, b}` (orthonormalized).
fn complement_sample(r: &mut impl Rng, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.len();
    let q1 = a.normalize();
    let b_perp = b - &q1 * q1.dot(b);
    let q2 = (b_perp.norm() > 1e-8).then(|| b_perp.normalize());
    let mut z = column(random_vector(r, n).as_slice());
    z -= &q1 * q1.dot(&z);
    if let Some(q2) = &q2 {
        z -= q2 * q2.dot(&z);
    }
    z
}

fn minimal_rotation_suite() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let plan = [(2, 300), (3, 300), (8, 200), (64, 180), (768, 20)];
    let mut worst = [0.0f64; 4];
    for (n, count) in plan {
        for _ in 0..count {
            let x = random_vector(&mut r, n);
            let y = random_vector(&mut r, n);
            let (xh, yh) = (column(&unit(&x)), column(&unit(&y)));
            let rot = minimal_rotation(&x, &y).map_err(|e| e.to_string())?;
            let orth = rot.orthogonality_defect();
            let det = (rot.determinant() - 1.0).abs();
            let map = (rot.matrix() * &xh - &yh).amax();
            let mut fix = 0.0f64;
            if n > 2 {
                for _ in 0..5 {
                    let z = complement_sample(&mut r, &xh, &yh);
                    fix = fix.max((rot.matrix() * &z - &z).amax());
                }
            }
            check(orth <= 1e-10 * n as f64, || {
                format!("n={n}: orthogonality defect {orth:e}")
            })?;
            check(det <= 1e-9, || format!("n={n}: |det - 1| = {det:e}"))?;
            check(map <= 1e-10, || format!("n={n}: |R x - y|_inf = {map:e}"))?;
            check(fix <= 1e-10, || format!("n={n}: complement moved by {fix:e}"))?;
            for (w, v) in worst.iter_mut().zip([orth / n as f64, det, map, fix]) {
                *w = w.max(v);
            }
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "1000 pairs in {elapsed:.2?}; worst orth/n {:.1e}, det {:.1e}, map {:.1e}, complement {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

fn random_chains() -> Vec<Vec<EmbeddingVector>> {
    let mut r = rng(2);
    (0..200)
        .map(|_| {
            let n = r.random_range(2..=64);
            let len = r.random_range(2..=11);
            (0..len).map(|_| random_vector(&mut r, n)).collect()
        })
        .collect()
}

fn chain_identity() -> Outcome {
    let mut worst = 0.0f64;
    for chain in random_chains() {
        let rot = compose_chain(&chain).map_err(|e| e.to_string())?;
        let first = column(&unit(&chain[0]));
        let last = column(&unit(chain.last().unwrap()));
        let gap = (rot.matrix() * first - last).amax();
        check(gap <= 1e-9, || {
            format!("n={}, L={}: gap {gap:e}", chain[0].dim(), chain.len() - 1)
        })?;
        worst = worst.max(gap);
    }
    Ok(format!("200 chains; worst |v_L - R v_0|_inf = {worst:.1e}"))
}

fn deficit_identity(emitted: &mut Vec<DeficitReport>) -> Outcome {
    let mut worst = 0.0f64;
    for chain in random_chains() {
        let report = analyze(&trajectory(chain), &AnalysisOptions::new(0.3)).map_err(|e| e.to_string())?;
        check(report.identity_gap <= 1e-9, || {
            format!("gap {:e}", report.identity_gap)
        })?;
        worst = worst.max(report.identity_gap);
        emitted.push(report);
    }
    Ok(format!("200 chains; worst |delta - Q| = {worst:.1e}"))
}

fn random_orthogonal(r: &mut impl Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0)).qr().q()
}

fn sylvester_invariance(generated: &mut Vec<SymmetricMatrix>) -> Outcome {
    let mut r = rng(4);
    let mut matrices = Vec::new();
    while matrices.len() < 20 {
        let n = r.random_range(4..=12);
        let len = r.random_range(2..=4);
        let chain: Vec<EmbeddingVector> = (0..len).map(|_| random_vector(&mut r, n)).collect();
        let m = representing_matrix(&compose_chain(&chain).unwrap());
        let ev = symmetric_eigenvalues(&m).unwrap();
        // Keep matrices whose nonzero eigenvalues are clearly separated from zero.
        if ev.iter().all(|e| e.abs() < 1e-9 || e.abs() >= 1e-2) {
            matrices.push(m);
        }
    }
    let mut inertias = Vec::new();
    for m in &matrices {
        let n = m.dim();
        let before = signature_of(m, 1e-9).unwrap().inertia();
        for _ in 0..100 {
            let sigma = DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    10f64.powf(r.random_range(0.0..3.0))
                } else {
                    0.0
                }
            });
            let s = random_orthogonal(&mut r, n) * sigma * random_orthogonal(&mut r, n).transpose();
            let c = m.congruence(&s).unwrap();
            let scale = (s.transpose() * &s).norm();
            let after = signature_of(&c, 1e-9 * scale).unwrap().inertia();
            check(before == after, || {
                format!("n={n}: inertia {before:?} became {after:?}")
            })?;
        }
        inertias.push(before);
    }
    generated.extend(matrices);
    Ok(format!(
        "2000 congruences over 20 matrices; inertias e.g. {:?}",
        &inertias[..3]
    ))
}

fn positive_semidefinite(generated: &[SymmetricMatrix], emitted: &[DeficitReport]) -> Outcome {
    let mut min_ev = f64::INFINITY;
    for chain in random_chains() {
        let m = representing_matrix(&compose_chain(&chain).unwrap());
        let ev = symmetric_eigenvalues(&m).unwrap();
        min_ev = min_ev.min(*ev.last().unwrap());
    }
    for m in generated {
        min_ev = min_ev.min(*symmetric_eigenvalues(m).unwrap().last().unwrap());
    }
    check(min_ev >= -1e-9, || format!("min eigenvalue {min_ev:e}"))?;
    let negative = emitted.iter().filter(|d| d.signature.n_minus != 0).count();
    check(negative == 0, || {
        format!("{negative} emitted signatures with n_minus > 0")
    })?;
    Ok(format!(
        "{} matrices, min eigenvalue {min_ev:.1e}; {} emitted signatures all n_minus = 0",
        220,
        emitted.len()
    ))
}

fn single_plane_oracle(emitted: &mut Vec<DeficitReport>) -> Outcome {
    let mut worst = 0.0f64;
    for theta in [PI / 6.0, PI / 4.0, PI / 3.0, PI / 2.0, 3.0 * PI / 4.0] {
        for n in [4, 6, 768] {
            let mut v0 = vec![0.0; n];
            v0[0] = 1.0;
            let spec = SyntheticSpec {
                dim: n,
                steps: vec![SyntheticStep {
                    plane: Plane::Axes([0, 1]),
                    angle: theta,
                    scale: 1.0,
                }],
                seed: 0,
                noise_sigma: 0.0,
                v0: Some(v0),
            };
            let chain = generate_chain(&spec).map_err(|e| e.to_string())?;
            let report = analyze(
                &chain.to_trajectory(&spec, "synthetic"),
                &AnalysisOptions::new(0.3),
            )
            .map_err(|e| e.to_string())?;
            let err = (report.delta - (1.0 - theta.cos())).abs();
            check(err <= 1e-9, || {
                format!("theta={theta}, n={n}: delta error {err:e}")
            })?;
            check(report.signature.inertia() == (2, n - 2, 0), || {
                format!("theta={theta}, n={n}: signature {:?}", report.signature.inertia())
            })?;
            let oracle = expected_signature(&spec, None).map_err(|e| e.to_string())?;
            check(oracle.inertia() == (2, n - 2, 0), || {
                format!("oracle signature {:?}", oracle.inertia())
            })?;
            worst = worst.max(err);
            emitted.push(report);
        }
    }
    Ok(format!(
        "15 cases; worst delta error {worst:.1e}; signatures (2, n-2, 0)"
    ))
}

fn eigensolver_vs_oracle() -> Outcome {
    let mut r = rng(7);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = 1 + i % 8;
        let m = random_symmetric(&mut r, n);
        let sym = SymmetricMatrix::from_row_major(n, &m.concat()).unwrap();
        let got = symmetric_eigenvalues(&sym).map_err(|e| e.to_string())?;
        let want = bisection_eigenvalues(&m);
        let err = max_abs_diff(&got, &want);
        check(err <= 1e-8, || format!("n={n}: {got:?} vs {want:?}"))?;
        worst = worst.max(err);
    }
    let mut worst_tr = 0.0f64;
    let mut worst_det = 0.0f64;
    for n in [2, 4, 8, 16, 32, 48, 64] {
        for _ in 0..3 {
            let m = random_symmetric(&mut r, n);
            let sym = SymmetricMatrix::from_row_major(n, &m.concat()).unwrap();
            let ev = symmetric_eigenvalues(&sym).map_err(|e| e.to_string())?;
            let tr = sym.trace();
            let tr_err = (ev.iter().sum::<f64>() - tr).abs() / tr.abs().max(sym.frobenius_norm());
            let det = sym.matrix().clone().lu().determinant();
            let det_err = (ev.iter().product::<f64>() - det).abs() / det.abs();
            check(tr_err <= 1e-8, || {
                format!("n={n}: trace relative error {tr_err:e}")
            })?;
            check(det_err <= 1e-8, || {
                format!("n={n}: determinant relative error {det_err:e}")
            })?;
            worst_tr = worst_tr.max(tr_err);
            worst_det = worst_det.max(det_err);
        }
    }
    Ok(format!(
        "100 matrices, worst eigenvalue error {worst:.1e}; trace {worst_tr:.1e}, det {worst_det:.1e} (n <= 64)"
    ))
}

const WORDS: [&str; 12] = [
    "cat", "dog", "river", "stone", "light", "song", "north", "paper", "window", "garden", "cloud", "bread",
];

fn lowercase_corpus(r: &mut impl Rng) -> Vec<String> {
    (0..50)
        .map(|_| {
            let len = r.random_range(2..7);
            (0..len)
                .map(|_| WORDS[r.random_range(0..WORDS.len())])
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

fn audit_correctness() -> Outcome {
    let mut r = rng(8);
    let lower = lowercase_corpus(&mut r);
    let upper: Vec<String> = lower.iter().map(|t| t.to_uppercase()).collect();
    let embedder = MockEmbedder::new(64, 8).unwrap();
    let pipeline = Pipeline::new(&EchoTransformer, &embedder);
    let table = SubstitutionTable::new([
        ("cat".to_string(), "feline".to_string()),
        ("feline".to_string(), "cat".to_string()),
        ("river".to_string(), "stream".to_string()),
        ("stream".to_string(), "river".to_string()),
    ])
    .unwrap();
    let pairs: Vec<(MockTransform, &[String])> = vec![
        (MockTransform::Identity, &lower),
        (MockTransform::ReverseWords, &lower),
        (MockTransform::Caesar(3), &lower),
        (MockTransform::Caesar(13), &upper),
        (MockTransform::Caesar(25), &lower),
        (MockTransform::WordSubstitution(table), &lower),
        (MockTransform::Uppercase, &lower),
        (MockTransform::Lowercase, &upper),
    ];
    for (t, texts) in &pairs {
        let step = TransformationStep::mock(t.to_string(), t);
        let record = pipeline
            .audit_reversibility(&step, &CorpusElement::from_texts(texts), 0.15)
            .map_err(|e| e.to_string())?;
        check(
            record.passes && record.distances.iter().all(|&d| d == 0.0),
            || format!("{t}: distances {:?}", record.distances),
        )?;
    }
    let broken = TransformationStep::mock("c3", &MockTransform::Caesar(3)).with_inverse("caesar(5)");
    let record = pipeline
        .audit_reversibility(&broken, &CorpusElement::from_texts(&lower), 0.15)
        .map_err(|e| e.to_string())?;
    check(!record.passes, || {
        "caesar(3) with caesar(5) as inverse passed".into()
    })?;
    Ok(format!(
        "{} mock pairs exact on 50 elements; broken pair pass_fraction {}",
        pairs.len(),
        record.pass_fraction
    ))
}

fn write_e2e_workspace(dir: &Path) {
    let mut r = rng(9);
    let corpus: Vec<String> = lowercase_corpus(&mut r)
        .into_iter()
        .chain(lowercase_corpus(&mut r))
        .enumerate()
        .map(|(i, t)| format!("{t} {i}"))
        .collect();
    std::fs::write(dir.join("corpus.txt"), corpus.join("\n")).unwrap();
    let steps = [
        ("up", "uppercase"),
        ("rev1", "reverse_words"),
        ("c3", "caesar(3)"),
        ("down", "lowercase"),
        ("swap", "word_substitution(cat:dog,dog:cat)"),
        ("rev2", "reverse_words"),
        ("c23", "caesar(23)"),
        ("id", "identity"),
    ];
    let mut config = String::from("corpus = \"corpus.txt\"\n[embedding]\nprovider = \"mock\"\ndim = 768\n[[sequences]]\nid = \"eight\"\n");
    for (id, instruction) in steps {
        config.push_str(&format!(
            "[[sequences.steps]]\nid = \"{id}\"\nkind = \"mock\"\ninstruction = \"{instruction}\"\n"
        ));
    }
    std::fs::write(dir.join("run.toml"), config).unwrap();
}

fn end_to_end_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    write_e2e_workspace(dir.path());
    let mut timings = Vec::new();
    for out in ["a.jsonl", "b.jsonl"] {
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_linloop"))
            .args([
                "analyze", "--config", "run.toml", "--mock", "--seed", "7", "--out", out,
            ])
            .current_dir(dir.path())
            .status()
            .unwrap();
        let elapsed = start.elapsed();
        check(status.code() == Some(0), || format!("exit status {status}"))?;
        check(elapsed < Duration::from_secs(60), || {
            format!("run took {elapsed:?}")
        })?;
        timings.push(elapsed);
    }
    let a = std::fs::read(dir.path().join("a.jsonl")).unwrap();
    let b = std::fs::read(dir.path().join("b.jsonl")).unwrap();
    check(a == b, || "reports differ".into())?;
    let lines = a.iter().filter(|&&c| c == b'\n').count();
    check(lines == 102, || format!("expected 102 records, found {lines}"))?;
    Ok(format!(
        "100 elements, n = 768, L = 8; identical {} byte reports; runs {:.2?} and {:.2?}",
        a.len(),
        timings[0],
        timings[1]
    ))
}

fn antipodal_handling() -> Outcome {
    let mut r = rng(10);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in [2, 3, 8, 64, 768] {
        for trial in 0..4 {
            let x = column(&unit(&random_vector(&mut r, n)));
            let mut w = column(random_vector(&mut r, n).as_slice());
            w -= &x * x.dot(&w);
            let w = w.normalize();
            // x̂·ŷ = −cos φ = −1 + 1e-12, or an exact antipode on the first trial.
            let y = if trial == 0 {
                -&x
            } else {
                let phi = (1.0f64 - 1e-12).acos();
                -&x * phi.cos() + &w * phi.sin()
            };
            let xv = EmbeddingVector::new(x.as_slice().to_vec()).unwrap();
            let yv = EmbeddingVector::new(y.as_slice().to_vec()).unwrap();
            let rot = minimal_rotation(&xv, &yv).map_err(|e| e.to_string())?;
            let again = minimal_rotation(&xv, &yv).map_err(|e| e.to_string())?;
            check(rot == again, || format!("n={n}: not deterministic"))?;
            let orth = rot.orthogonality_defect();
            let det = (rot.determinant() - 1.0).abs();
            let map = (rot.matrix() * &x - column(&unit(&yv))).amax();
            check(orth <= 1e-10 * n as f64, || {
                format!("n={n}: orthogonality defect {orth:e}")
            })?;
            check(det <= 1e-9, || format!("n={n}: |det - 1| = {det:e}"))?;
            check(map <= 1e-8, || format!("n={n}: |R x - y|_inf = {map:e}"))?;
            worst = worst.max(map);
            cases += 1;
        }
    }
    Ok(format!(
        "{cases} near/exact antipodes; worst |R x - y|_inf = {worst:.1e}; repeat calls bit-identical"
    ))
}

#[test]
fn acceptance() {
    let mut emitted = Vec::new();
    let mut generated = Vec::new();
    let results: Vec<(&str, Outcome)> = vec![
        ("minimal-rotation suite", minimal_rotation_suite()),
        ("chain identity", chain_identity()),
        ("deficit identity", deficit_identity(&mut emitted)),
        ("Sylvester invariance", sylvester_invariance(&mut generated)),
        ("single-plane oracle", single_plane_oracle(&mut emitted)),
        ("eigensolver vs oracle", eigensolver_vs_oracle()),
        ("audit correctness", audit_correctness()),
        ("end-to-end determinism", end_to_end_determinism()),
        ("antipodal handling", antipodal_handling()),
    ];
    let psd = positive_semidefinite(&generated, &emitted);
    let order = [0, 1, 2, 3, usize::MAX, 4, 5, 6, 7, 8];
    let mut stderr = std::io::stderr().lock();
    let mut failures = 0;
    for (number, &index) in order.iter().enumerate() {
        let (name, outcome) = if index == usize::MAX {
            ("positive semidefiniteness", &psd)
        } else {
            (results[index].0, &results[index].1)
        };
        let line = match outcome {
            Ok(detail) => format!("PASS criterion {:>2} ({name}): {detail}", number + 1),
            Err(why) => {
                failures += 1;
                format!("FAIL criterion {:>2} ({name}): {why}", number + 1)
            }
        };
        let _ = writeln!(stderr, "{line}");
    }
    assert_eq!(failures, 0, "{failures} acceptance criteria failed");
}

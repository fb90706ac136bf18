// Generates a chain from known planar rotations and compares the measured
// deficit and signature with the ground truth.

use linloop::engine::{analyze, AnalysisOptions};
use linloop::synthetic::{expected_signature, generate_chain, SyntheticSpec};

const SPEC: &str = r#"
dim = 8
seed = 42

[[steps]]
plane = [0, 1]
angle = 0.7

[[steps]]
plane = [2, 3]
angle = -1.1
scale = 2.5
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SyntheticSpec::from_toml_str(SPEC)?;
    let chain = generate_chain(&spec)?;
    let report = analyze(
        &chain.to_trajectory(&spec, "synthetic"),
        &AnalysisOptions::new(0.3),
    )?;
    println!(
        "measured delta {:.12}, identity gap {:.1e}",
        report.delta, report.identity_gap
    );
    println!("measured signature {:?}", report.signature.inertia());
    // The measured chain composes minimal rotations, so it need not equal the
    // generating rotation even though both carry v0 to the last vector.
    println!(
        "generator signature {:?}",
        expected_signature(&spec, None)?.inertia()
    );
    Ok(())
}

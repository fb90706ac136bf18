// Runs a corpus through a deterministic transformation sequence with the
// mock embedder, then scores every trajectory and classifies the loop.

use linloop::embedding::MockEmbedder;
use linloop::engine::{analyze, classify_loop, AnalysisOptions, CorpusElement, Pipeline, SequenceSpec};
use linloop::transform::{EchoTransformer, MockTransform, TransformationStep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = CorpusElement::from_texts(&[
        "the river bends north",
        "a dog sleeps by the window",
        "bread cools on the table",
    ]);
    let spec = SequenceSpec::new(
        "shout-and-back",
        vec![
            TransformationStep::mock("up", &MockTransform::Uppercase),
            TransformationStep::mock("rev", &MockTransform::ReverseWords),
            TransformationStep::mock("c3", &MockTransform::Caesar(3)),
            TransformationStep::mock("c23", &MockTransform::Caesar(23)),
            TransformationStep::mock("rev-again", &MockTransform::ReverseWords),
            TransformationStep::mock("down", &MockTransform::Lowercase),
        ],
    )?;
    let embedder = MockEmbedder::new(64, 7)?;
    let pipeline = Pipeline::new(&EchoTransformer, &embedder).with_parallelism(2);

    let options = AnalysisOptions::new(0.3);
    let mut reports = Vec::new();
    for trajectory in pipeline.build_trajectories(&corpus, &spec) {
        let trajectory = trajectory?;
        let report = analyze(&trajectory, &options)?;
        println!(
            "{} delta={:.3e} gap={:.1e} signature={:?}",
            report.element_id,
            report.delta,
            report.identity_gap,
            report.signature.inertia()
        );
        reports.push(report);
    }
    let verdict = classify_loop(&reports, options.xi)?;
    println!(
        "loop: {} (max deficit {:.3e})",
        verdict.is_loop, verdict.max_deficit
    );
    Ok(())
}

// Audits transformation steps against their declared inverses.

use linloop::embedding::MockEmbedder;
use linloop::engine::{CorpusElement, Pipeline};
use linloop::transform::{EchoTransformer, MockTransform, TransformationStep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = CorpusElement::from_texts(&["green light at dawn", "paper boats drift", "cold stone steps"]);
    let embedder = MockEmbedder::new(32, 1)?;
    let pipeline = Pipeline::new(&EchoTransformer, &embedder);

    let honest = TransformationStep::mock("caesar", &MockTransform::Caesar(3));
    let broken = TransformationStep::mock("caesar", &MockTransform::Caesar(3)).with_inverse("caesar(5)");
    for step in [honest, broken] {
        let record = pipeline.audit_reversibility(&step, &corpus, 0.15)?;
        println!(
            "{} undone by {}: pass fraction {}, passes {}",
            record.step_id, record.inverse_step_id, record.pass_fraction, record.passes
        );
        println!("  distances {:?}", record.distances);
    }
    Ok(())
}

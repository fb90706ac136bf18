// Caches embeddings on disk and stores a trajectory as a JSONL file.

use linloop::embedding::{read_trajectory, write_trajectory, CachedEmbedder, Embedder, MockEmbedder};
use linloop::engine::{CorpusElement, Pipeline, SequenceSpec};
use linloop::transform::{EchoTransformer, MockTransform, TransformationStep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let cached = CachedEmbedder::new(MockEmbedder::new(16, 3)?, dir.path().join("cache"))?;
    let texts = vec!["north wind".to_string(), "south wind".to_string()];
    cached.embed_batch(&texts)?;
    cached.embed_batch(&texts)?;
    let stats = cached.stats();
    println!("cache hits {}, misses {}", stats.hits, stats.misses);

    let spec = SequenceSpec::new(
        "rev",
        vec![TransformationStep::mock("rev", &MockTransform::ReverseWords)],
    )?;
    let pipeline = Pipeline::new(&EchoTransformer, &cached);
    let trajectory = pipeline.build_trajectory(&CorpusElement::new("wind", "north wind"), &spec)?;
    let path = dir.path().join("wind.jsonl");
    write_trajectory(&trajectory, &path)?;
    let back = read_trajectory(&path)?;
    println!("{} -> {:?}", path.display(), back.texts());
    assert_eq!(back, trajectory);
    Ok(())
}

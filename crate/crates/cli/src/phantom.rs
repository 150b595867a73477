use anyhow::{Context, Result};

use meibo::io::write_phantom;
use meibo::phantom::{generate, PhantomSpec};

use crate::args::PhantomArgs;

pub fn run(a: &PhantomArgs) -> Result<()> {
    let specs: Vec<(String, PhantomSpec)> = match (&a.spec, a.corpus) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let spec = PhantomSpec::from_toml(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            let stem = path
                .file_stem()
                .map_or("phantom".into(), |s| s.to_string_lossy().into_owned());
            vec![(stem, spec)]
        }
        (None, Some(n)) => PhantomSpec::corpus(n, a.seed)
            .into_iter()
            .enumerate()
            .map(|(i, s)| (format!("phantom_{i:03}"), s))
            .collect(),
        (None, None) => unreachable!("clap requires a spec or a corpus size"),
    };
    for (stem, spec) in &specs {
        let (img, truth) = generate(spec).with_context(|| format!("generating {stem}"))?;
        let files = write_phantom(&a.out, stem, spec, &img, &truth)?;
        log::info!("{stem}: {} files", files.len());
    }
    Ok(())
}

use std::path::PathBuf;

use vscreen_core::chem::synth;
use vscreen_core::codec::{self, Dictionary};

use super::{read, read_text, write, Classify, Outcome};
use crate::Globals;

#[derive(clap::Args, Debug)]
pub struct CompressArgs {
    /// Dictionary file; the built-in one when omitted.
    #[arg(long)]
    dict: Option<PathBuf>,
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct DecompressArgs {
    #[arg(long)]
    dict: Option<PathBuf>,
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct TrainArgs {
    /// One SMILES per line; anything after the first whitespace is ignored.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, default_value_t = codec::MAX_ENTRIES)]
    max_entries: usize,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct GenArgs {
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, short)]
    output: PathBuf,
}

fn load_dict(path: &Option<PathBuf>) -> Result<Dictionary, super::Failure> {
    match path {
        Some(p) => Dictionary::from_bytes(&read(p)?).config(),
        None => Ok(codec::default_dictionary()),
    }
}

pub fn compress(a: CompressArgs) -> Outcome {
    let dict = load_dict(&a.dict)?;
    let text = read_text(&a.input)?;
    let lines: Vec<&str> = text.lines().collect();
    let packed = codec::write_compressed_library(&lines, &dict).config()?;
    eprintln!("{} lines, {} -> {} bytes", lines.len(), text.len(), packed.len());
    write(&a.output, packed)
}

pub fn decompress(a: DecompressArgs) -> Outcome {
    let dict = load_dict(&a.dict)?;
    let lines = codec::read_compressed_library(&read(&a.input)?, &dict).config()?;
    let mut out = Vec::new();
    for l in lines {
        out.extend_from_slice(&l);
        out.push(b'\n');
    }
    write(&a.output, out)
}

pub fn train(a: TrainArgs) -> Outcome {
    let text = read_text(&a.input)?;
    let corpus: Vec<&str> = text.lines().filter_map(|l| l.split_whitespace().next()).collect();
    let dict = codec::train_dictionary(&corpus, a.max_entries).config()?;
    eprintln!("{} entries from {} lines", dict.len(), corpus.len());
    write(&a.output, dict.to_bytes())
}

pub fn generate(a: GenArgs, g: &Globals) -> Outcome {
    write(&a.output, synth::library_text(a.count, g.seed()))
}

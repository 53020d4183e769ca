use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use npop_core::nanopub::{assemble, assemble_streaming, Nanopub};
use npop_core::rdf::{self, Format, QuadWriter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Trig,
    Nquads,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Trig => Format::TriG,
            FormatArg::Nquads => Format::NQuads,
        }
    }
}

fn reader_for(path: &Path, fallback: Format) -> Result<(Box<dyn io::BufRead>, Format)> {
    if path.as_os_str() == "-" {
        let stdin = rdf::maybe_decompress(io::stdin().lock()).context("reading standard input")?;
        return Ok((stdin, fallback));
    }
    let reader = rdf::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok((reader, Format::from_path(path).unwrap_or(fallback)))
}

/// Nanopublications from each input in turn; standard input when `inputs` is empty.
/// Streams unless `interleaved`, which buffers each input so its quads may come in any order.
pub fn nanopubs(inputs: &[PathBuf], format: Option<FormatArg>, interleaved: bool) -> impl Iterator<Item = Result<Nanopub>> + '_ {
    let fallback = format.map_or(Format::TriG, Format::from);
    let stdin = [PathBuf::from("-")];
    let paths: Vec<PathBuf> = if inputs.is_empty() { stdin.to_vec() } else { inputs.to_vec() };
    paths.into_iter().flat_map(move |path| -> Box<dyn Iterator<Item = Result<Nanopub>>> {
        match reader_for(&path, fallback) {
            Ok((reader, fmt)) => {
                let shown = path.display().to_string();
                let quads = rdf::parse(reader, fmt);
                let nps: Box<dyn Iterator<Item = _>> =
                    if interleaved { Box::new(assemble(quads)) } else { Box::new(assemble_streaming(quads)) };
                Box::new(nps.map(move |r| r.with_context(|| format!("in {shown}"))))
            }
            Err(e) => Box::new(std::iter::once(Err(e))),
        }
    })
}

pub fn read_all(inputs: &[PathBuf], format: Option<FormatArg>) -> Result<Vec<Nanopub>> {
    nanopubs(inputs, format, true).collect()
}

/// Standard output or a file.
pub fn sink(output: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match output {
        Some(p) if p.as_os_str() != "-" => {
            Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?))
        }
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub struct NanopubSink {
    writer: QuadWriter<Box<dyn Write>>,
}

impl NanopubSink {
    pub fn open(output: Option<&Path>, format: FormatArg) -> Result<Self> {
        Ok(NanopubSink { writer: QuadWriter::new(sink(output)?, format.into()) })
    }

    pub fn write(&mut self, np: &Nanopub) -> Result<()> {
        self.writer.write_all(np.iter())?;
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        self.writer.finish()?;
        Ok(())
    }
}

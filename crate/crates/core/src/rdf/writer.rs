use std::io::{self, Write};

use super::{Format, Iri, Quad};

/// Streaming serializer. TriG output groups runs of consecutive quads that
/// share a graph into one block; call [`QuadWriter::finish`] to close the last
/// block.
pub struct QuadWriter<W: Write> {
    out: W,
    format: Format,
    open_graph: Option<Iri>,
}

impl<W: Write> QuadWriter<W> {
    pub fn new(out: W, format: Format) -> Self {
        QuadWriter { out, format, open_graph: None }
    }

    pub fn write_quad(&mut self, quad: &Quad) -> io::Result<()> {
        match self.format {
            Format::NQuads => writeln!(self.out, "{quad}"),
            Format::TriG => {
                if self.open_graph.as_ref() != Some(&quad.graph) {
                    if self.open_graph.is_some() {
                        self.out.write_all(b"}\n\n")?;
                    }
                    writeln!(self.out, "{} {{", quad.graph)?;
                    self.open_graph = Some(quad.graph.clone());
                }
                writeln!(self.out, "  {} {} {} .", quad.subject, quad.predicate, quad.object)
            }
        }
    }

    pub fn write_all<'a>(&mut self, quads: impl IntoIterator<Item = &'a Quad>) -> io::Result<()> {
        quads.into_iter().try_for_each(|q| self.write_quad(q))
    }

    /// Closes any open graph block and flushes. Returns the inner writer.
    pub fn finish(mut self) -> io::Result<W> {
        if self.open_graph.take().is_some() {
            self.out.write_all(b"}\n")?;
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn serialize<'a>(quads: impl IntoIterator<Item = &'a Quad>, format: Format) -> Vec<u8> {
    let mut w = QuadWriter::new(Vec::new(), format);
    w.write_all(quads).expect("writing to a Vec cannot fail");
    w.finish().expect("writing to a Vec cannot fail")
}

pub fn serialize_to_string<'a>(quads: impl IntoIterator<Item = &'a Quad>, format: Format) -> String {
    String::from_utf8(serialize(quads, format)).expect("serializer emits UTF-8")
}

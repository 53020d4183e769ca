use std::collections::{HashMap, VecDeque};
use std::io::BufRead;

use super::lexer::{Lexer, Position, Token};
use super::{Format, Iri, Literal, ParseError, Quad, Term};
use crate::vocab;

/// Streaming quad parser. Yields quads in document order and stops at the
/// first error.
pub struct QuadReader<R> {
    lexer: Lexer<R>,
    format: Format,
    prefixes: HashMap<String, String>,
    graph: Option<Iri>,
    lookahead: Option<(Token, Position)>,
    pending: VecDeque<Quad>,
    done: bool,
}

/// Parses `reader` as `format`, lazily.
pub fn parse<R: BufRead>(reader: R, format: Format) -> QuadReader<R> {
    QuadReader {
        lexer: Lexer::new(reader),
        format,
        prefixes: HashMap::new(),
        graph: None,
        lookahead: None,
        pending: VecDeque::new(),
        done: false,
    }
}

/// Parses a whole in-memory document.
pub fn parse_str(input: &str, format: Format) -> Result<Vec<Quad>, ParseError> {
    parse(input.as_bytes(), format).collect()
}

impl<R: BufRead> Iterator for QuadReader<R> {
    type Item = Result<Quad, ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(q) = self.pending.pop_front() {
                return Some(Ok(q));
            }
            if self.done {
                return None;
            }
            let step = match self.format {
                Format::TriG => self.trig_statement(),
                Format::NQuads => self.nquads_statement(),
            };
            match step {
                Ok(true) => {}
                Ok(false) => self.done = true,
                Err(e) => {
                    self.done = true;
                    self.pending.clear();
                    return Some(Err(e));
                }
            }
        }
    }
}

impl<R: BufRead> QuadReader<R> {
    fn next_tok(&mut self) -> Result<(Token, Position), ParseError> {
        match self.lookahead.take() {
            Some(t) => Ok(t),
            None => self.lexer.next_token(),
        }
    }

    fn peek_tok(&mut self) -> Result<&Token, ParseError> {
        if self.lookahead.is_none() {
            self.lookahead = Some(self.lexer.next_token()?);
        }
        Ok(&self.lookahead.as_ref().unwrap().0)
    }

    fn unexpected(tok: &Token, pos: Position, expected: &str) -> ParseError {
        match tok {
            Token::BlankLabel(_) | Token::LBracket => ParseError::BlankNode { pos },
            Token::LParen => ParseError::BlankNode { pos },
            _ => ParseError::Syntax { pos, message: format!("expected {expected}, found {}", tok.describe()) },
        }
    }

    fn make_iri(value: String, pos: Position) -> Result<Iri, ParseError> {
        Iri::new(value).map_err(|e| ParseError::Syntax { pos, message: e.to_string() })
    }

    fn expand(&self, prefix: &str, local: &str, pos: Position) -> Result<Iri, ParseError> {
        let ns = self.prefixes.get(prefix).ok_or_else(|| ParseError::Syntax {
            pos,
            message: format!("undefined prefix `{prefix}:`"),
        })?;
        Self::make_iri(format!("{ns}{local}"), pos)
    }

    fn iri_from(&self, tok: Token, pos: Position, expected: &str) -> Result<Iri, ParseError> {
        match tok {
            Token::IriRef(i) => Self::make_iri(i, pos),
            Token::PrefixedName { prefix, local } if self.format == Format::TriG => {
                self.expand(&prefix, &local, pos)
            }
            other => Err(Self::unexpected(&other, pos, expected)),
        }
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), ParseError> {
        let (tok, pos) = self.next_tok()?;
        if tok == want {
            Ok(())
        } else {
            Err(Self::unexpected(&tok, pos, what))
        }
    }

    // ---- N-Quads ----

    fn nquads_statement(&mut self) -> Result<bool, ParseError> {
        let (tok, pos) = self.next_tok()?;
        if tok == Token::Eof {
            return Ok(false);
        }
        let subject = self.iri_from(tok, pos, "subject IRI")?;
        let (tok, pos) = self.next_tok()?;
        let predicate = self.iri_from(tok, pos, "predicate IRI")?;
        let object = self.object()?;
        let (tok, pos) = self.next_tok()?;
        let graph = match tok {
            Token::Dot => return Err(ParseError::DefaultGraph { pos }),
            Token::IriRef(i) => Self::make_iri(i, pos)?,
            other => return Err(Self::unexpected(&other, pos, "graph IRI")),
        };
        self.expect(Token::Dot, "`.`")?;
        self.pending.push_back(Quad { graph, subject, predicate, object });
        Ok(true)
    }

    // ---- TriG ----

    fn trig_statement(&mut self) -> Result<bool, ParseError> {
        let (tok, pos) = self.next_tok()?;
        if let Some(graph) = self.graph.clone() {
            match tok {
                Token::RBrace => {
                    self.graph = None;
                    // Tolerate a stray `.` after a graph block.
                    if *self.peek_tok()? == Token::Dot {
                        self.next_tok()?;
                    }
                }
                Token::Eof => {
                    return Err(ParseError::Syntax { pos, message: "unterminated graph block".into() });
                }
                tok => {
                    let subject = self.iri_from(tok, pos, "subject")?;
                    self.predicate_object_list(&graph, &subject)?;
                    match self.peek_tok()? {
                        Token::Dot => {
                            self.next_tok()?;
                        }
                        Token::RBrace => {}
                        _ => {
                            let (t, p) = self.next_tok()?;
                            return Err(Self::unexpected(&t, p, "`.` or `}`"));
                        }
                    }
                }
            }
            return Ok(true);
        }
        match tok {
            Token::Eof => return Ok(false),
            Token::AtPrefix => {
                self.prefix_decl()?;
                self.expect(Token::Dot, "`.` after @prefix")?;
            }
            Token::SparqlPrefix => self.prefix_decl()?,
            Token::AtBase | Token::SparqlBase => {
                return Err(ParseError::Syntax { pos, message: "base IRIs are not supported".into() });
            }
            Token::Graph => {
                let (t, p) = self.next_tok()?;
                let g = self.iri_from(t, p, "graph name")?;
                self.expect(Token::LBrace, "`{`")?;
                self.graph = Some(g);
            }
            Token::LBrace => return Err(ParseError::DefaultGraph { pos }),
            tok @ (Token::IriRef(_) | Token::PrefixedName { .. }) => {
                let name = self.iri_from(tok, pos, "graph name")?;
                if *self.peek_tok()? == Token::LBrace {
                    self.next_tok()?;
                    self.graph = Some(name);
                } else {
                    return Err(ParseError::DefaultGraph { pos });
                }
            }
            other => return Err(Self::unexpected(&other, pos, "directive or graph block")),
        }
        Ok(true)
    }

    fn prefix_decl(&mut self) -> Result<(), ParseError> {
        let (tok, pos) = self.next_tok()?;
        let prefix = match tok {
            Token::PrefixedName { prefix, local } if local.is_empty() => prefix,
            other => return Err(Self::unexpected(&other, pos, "prefix name")),
        };
        let (tok, pos) = self.next_tok()?;
        let ns = match tok {
            Token::IriRef(i) => Self::make_iri(i, pos)?,
            other => return Err(Self::unexpected(&other, pos, "namespace IRI")),
        };
        self.prefixes.insert(prefix, ns.into_string());
        Ok(())
    }

    fn predicate_object_list(&mut self, graph: &Iri, subject: &Iri) -> Result<(), ParseError> {
        loop {
            let (tok, pos) = self.next_tok()?;
            let predicate = match tok {
                Token::A => Iri::new(vocab::RDF_TYPE).expect("constant IRI"),
                other => self.iri_from(other, pos, "predicate")?,
            };
            loop {
                let object = self.object()?;
                self.pending.push_back(Quad {
                    graph: graph.clone(),
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if *self.peek_tok()? == Token::Comma {
                    self.next_tok()?;
                } else {
                    break;
                }
            }
            if *self.peek_tok()? != Token::Semicolon {
                return Ok(());
            }
            while *self.peek_tok()? == Token::Semicolon {
                self.next_tok()?;
            }
            // `;` may end the list
            if matches!(self.peek_tok()?, Token::Dot | Token::RBrace) {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> Result<Term, ParseError> {
        let (tok, pos) = self.next_tok()?;
        let trig = self.format == Format::TriG;
        let typed = |value: String, dt: &str| Term::Literal(Literal::typed(value, Iri::new(dt).expect("constant IRI")));
        Ok(match tok {
            Token::String(value) => {
                match self.peek_tok()? {
                    Token::LangTag(_) | Token::AtPrefix | Token::AtBase => {
                        let (t, p) = self.next_tok()?;
                        let tag = match t {
                            Token::LangTag(tag) => tag,
                            Token::AtPrefix => "prefix".into(),
                            _ => "base".into(),
                        };
                        Term::Literal(
                            Literal::lang(value, tag)
                                .map_err(|e| ParseError::Syntax { pos: p, message: e.to_string() })?,
                        )
                    }
                    Token::DoubleCaret => {
                        self.next_tok()?;
                        let (t, p) = self.next_tok()?;
                        let dt = self.iri_from(t, p, "datatype IRI")?;
                        Term::Literal(Literal::typed(value, dt))
                    }
                    _ => Term::Literal(Literal::plain(value)),
                }
            }
            Token::Integer(v) if trig => typed(v, vocab::XSD_INTEGER),
            Token::Decimal(v) if trig => typed(v, vocab::XSD_DECIMAL),
            Token::Double(v) if trig => typed(v, vocab::XSD_DOUBLE),
            Token::Boolean(b) if trig => typed(b.to_string(), vocab::XSD_BOOLEAN),
            other => Term::Iri(self.iri_from(other, pos, "object")?),
        })
    }
}

mod io;

use std::collections::{BTreeSet, HashSet};
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use npop_core::analytics::{self, Decontextualizer};
use npop_core::diff::{self, DiffReport, FingerprintProfile, ReuseConfig, TopicConfig, TopicStrategy};
use npop_core::index::{self, IndexMetadata, IndexNanopub, IreuseOutcome};
use npop_core::nanopub::{validate, GraphRole, Nanopub, NanopubError};
use npop_core::net::{Client, Fault, MockRegistry, ServerList, DEFAULT_PARALLELISM};
use npop_core::rdf::Iri;
use npop_core::trusty::{self, make_trusty, TrustyUri, Verification};

use crate::io::{nanopubs, read_all, sink, FormatArg, NanopubSink};

const DEFAULT_BASE: &str = "http://purl.org/np/";

#[derive(Parser)]
#[command(name = "npop", version, about = "Nanopublication operations: count, filter, version, index, verify and retrieve")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Inputs {
    /// Input files (TriG or N-Quads, optionally gzipped); standard input if none or `-`.
    files: Vec<PathBuf>,
    /// Format for standard input and files without a known extension.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Accept quads of different graphs in any order (reads each input fully before assembling).
    #[arg(long)]
    interleaved: bool,
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long = "out-format", value_enum, default_value = "trig")]
    out_format: FormatArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileArg {
    IgnoreTimestamp,
    IgnorePubinfo,
    Custom,
}

#[derive(Args)]
struct ProfileOpts {
    /// What to ignore when fingerprinting.
    #[arg(long, value_enum, default_value = "ignore-timestamp")]
    profile: ProfileArg,
    /// Pubinfo predicate to ignore with `--profile custom` (repeatable; none means ignore nothing).
    #[arg(long = "strip", value_name = "IRI")]
    strip: Vec<String>,
}

impl ProfileOpts {
    fn profile(&self) -> Result<FingerprintProfile> {
        if self.profile != ProfileArg::Custom && !self.strip.is_empty() {
            bail!("--strip only applies to --profile custom");
        }
        Ok(match self.profile {
            ProfileArg::IgnoreTimestamp => FingerprintProfile::IgnoreTimestamp,
            ProfileArg::IgnorePubinfo => FingerprintProfile::IgnorePubinfo,
            ProfileArg::Custom => FingerprintProfile::Custom(self.strip.iter().map(|s| parse_iri(s)).collect::<Result<BTreeSet<_>>>()?),
        })
    }
}

#[derive(Args)]
struct TopicOpts {
    /// Use the most frequent object of this assertion predicate as topic.
    #[arg(long = "topic-predicate", value_name = "IRI")]
    topic_predicate: Option<String>,
    /// IRI prefix never used as a topic (repeatable).
    #[arg(long = "exclude", value_name = "PREFIX")]
    exclude: Vec<String>,
}

impl TopicOpts {
    fn config(&self) -> Result<TopicConfig> {
        let strategy = match &self.topic_predicate {
            Some(p) => TopicStrategy::FixedPredicate(parse_iri(p)?),
            None => TopicStrategy::DominantSubject,
        };
        Ok(TopicConfig { strategy, exclusions: self.exclude.clone() })
    }
}

#[derive(Args)]
struct IndexOpts {
    #[arg(long, default_value = "nanopublication index")]
    title: String,
    #[arg(long)]
    description: Option<String>,
    /// Creator IRI recorded in the provenance graph.
    #[arg(long)]
    creator: Option<String>,
    /// Creation timestamp (xsd:dateTime); defaults to now.
    #[arg(long)]
    date: Option<String>,
    /// File with one element URI per line, used instead of the URIs of input nanopublications.
    #[arg(long = "uri-list")]
    uri_list: Option<PathBuf>,
    /// Sub-index URI (repeatable).
    #[arg(long = "subindex", value_name = "URI")]
    subindexes: Vec<String>,
    /// Base the new index URIs are derived from.
    #[arg(long, default_value = DEFAULT_BASE)]
    placeholder: String,
}

impl IndexOpts {
    fn metadata(&self) -> Result<IndexMetadata> {
        Ok(IndexMetadata {
            title: self.title.clone(),
            description: self.description.clone(),
            created: Some(self.date.clone().unwrap_or_else(now)),
            creator: self.creator.as_deref().map(parse_iri).transpose()?,
        })
    }

    fn entries(&self, inputs: &Inputs) -> Result<(Vec<TrustyUri>, Vec<TrustyUri>)> {
        let elements = match &self.uri_list {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(parse_trusty).collect::<Result<_>>()?
            }
            None => nanopubs(&inputs.files, inputs.format, inputs.interleaved)
                .map(|np| np.and_then(|np| parse_trusty(np.uri().as_str())))
                .collect::<Result<_>>()?,
        };
        let subs = self.subindexes.iter().map(|s| parse_trusty(s)).collect::<Result<_>>()?;
        Ok((elements, subs))
    }
}

#[derive(Args)]
struct ServerOpts {
    /// Server base URL ending in `/` (repeatable, tried in order).
    #[arg(long = "server", value_name = "URL")]
    server: Vec<String>,
    /// File with one server base URL per line.
    #[arg(long = "servers", value_name = "FILE")]
    servers: Option<PathBuf>,
    /// Concurrent requests.
    #[arg(long, default_value_t = DEFAULT_PARALLELISM)]
    parallel: usize,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 30)]
    timeout: u64,
}

impl ServerOpts {
    fn client(&self) -> Result<Client> {
        let mut urls = Vec::new();
        if let Some(path) = &self.servers {
            urls.extend(ServerList::from_file(path)?.iter().map(str::to_owned));
        }
        urls.extend(self.server.iter().cloned());
        if urls.is_empty() {
            bail!("no servers given (use --server or --servers)");
        }
        Ok(Client::new(ServerList::new(urls)?)?
            .with_parallelism(self.parallel)
            .with_timeout(Duration::from_secs(self.timeout))?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FaultArg {
    NotFound,
    Corrupt,
    RejectPosts,
}

#[derive(Subcommand)]
enum Command {
    /// Count nanopublications and triples per graph.
    Count {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum, default_value = "table")]
        report: ReportFormat,
    },
    /// Keep nanopublications that mention any of the given IRIs or literal values.
    Filter {
        #[command(flatten)]
        inputs: Inputs,
        /// IRI or literal value to look for (repeatable).
        #[arg(short = 'n', long = "needle", required = true)]
        needles: Vec<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Output the quads of selected graphs.
    Extract {
        #[command(flatten)]
        inputs: Inputs,
        /// Graphs to keep.
        #[arg(short, long, value_delimiter = ',', required = true, value_parser = parse_role)]
        graphs: Vec<GraphRole>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long = "out-format", value_enum, default_value = "nquads")]
        out_format: FormatArg,
    },
    /// Build the next incremental version from a snapshot, reusing unchanged nanopublications.
    Reuse {
        /// Previous version (trusty nanopublications).
        #[arg(long, required = true)]
        prev: Vec<PathBuf>,
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        profile: ProfileOpts,
        #[command(flatten)]
        topic: TopicOpts,
        #[arg(long, default_value = DEFAULT_BASE)]
        placeholder: String,
        /// Version label for the report.
        #[arg(long, default_value = "next")]
        label: String,
        /// Report format on stderr.
        #[arg(long, value_enum, default_value = "table")]
        report: ReportFormat,
        #[command(flatten)]
        output: Output,
    },
    /// Build the next version of an index, linking unchanged chunks of the previous one.
    Ireuse {
        /// Previous index nanopublications (other nanopublications in the file are ignored).
        #[arg(long, required = true)]
        prev: Vec<PathBuf>,
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        index: IndexOpts,
        #[command(flatten)]
        output: Output,
    },
    /// Build index nanopublications over the input nanopublications or a URI list.
    Mkindex {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        index: IndexOpts,
        /// Previous top index this index replaces.
        #[arg(long)]
        supersedes: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Give each nanopublication a trusty URI derived from its current URI.
    Mktrusty {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        output: Output,
    },
    /// Print `URI<TAB>fingerprint` per nanopublication.
    Fingerprint {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        profile: ProfileOpts,
    },
    /// Print `URI<TAB>topic` per nanopublication (empty topic when none).
    Topic {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        topic: TopicOpts,
    },
    /// Output deduplicated dataset-level triples (N-Triples) and report d/t on stderr.
    Decontext {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        report: ReportFormat,
    },
    /// Check trusty URIs; exits 1 if any nanopublication fails.
    Verify {
        #[command(flatten)]
        inputs: Inputs,
        /// Also report structural warnings.
        #[arg(long)]
        strict: bool,
    },
    /// Retrieve nanopublications, verified, from a server network.
    Get {
        /// Trusty URIs to retrieve.
        #[arg(required = true)]
        uris: Vec<String>,
        /// Treat each URI as an index and retrieve its whole content.
        #[arg(short = 'c', long)]
        content: bool,
        #[command(flatten)]
        servers: ServerOpts,
        #[command(flatten)]
        output: Output,
    },
    /// Publish verified nanopublications to the first accepting server.
    Publish {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        servers: ServerOpts,
    },
    /// Run a local registry serving `<dir>/<artifact code>.trig`.
    Serve {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value = "127.0.0.1:0")]
        addr: SocketAddr,
        /// Fault injected into every request (repeatable).
        #[arg(long, value_enum)]
        fault: Vec<FaultArg>,
        /// Delay every response by this many milliseconds.
        #[arg(long)]
        delay_ms: Option<u64>,
    },
}

fn parse_role(s: &str) -> Result<GraphRole, String> {
    GraphRole::from_name(s).ok_or_else(|| format!("unknown graph `{s}` (head, assertion, provenance, pubinfo)"))
}

fn parse_iri(s: &str) -> Result<Iri> {
    Iri::new(s).with_context(|| format!("invalid IRI `{s}`"))
}

fn parse_trusty(s: &str) -> Result<TrustyUri> {
    TrustyUri::parse(s).with_context(|| format!("`{s}` is not a trusty URI"))
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => tracing::Level::WARN,
        1 => tracing::Level::INFO,
        _ => tracing::Level::DEBUG,
    };
    tracing_subscriber::fmt().with_writer(std::io::stderr).with_max_level(level).init();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("npop: error: {e:#}");
            if e.chain().any(|c| matches!(c.downcast_ref(), Some(NanopubError::GraphReopened { .. }))) {
                eprintln!("npop: hint: rerun with --interleaved to accept quads in any order");
            }
            ExitCode::FAILURE
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| c.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe))
}

fn write_all(output: &Output, nps: &[Nanopub]) -> Result<()> {
    let mut out = NanopubSink::open(output.output.as_deref(), output.out_format)?;
    for np in nps {
        out.write(np)?;
    }
    out.finish()
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Count { inputs, report } => {
            let mut counts = analytics::CountReport::default();
            for np in nanopubs(&inputs.files, inputs.format, inputs.interleaved) {
                counts.add(&np?);
            }
            let mut out = sink(None)?;
            match report {
                ReportFormat::Table => write!(out, "{counts}")?,
                ReportFormat::Json => writeln!(out, "{}", counts.to_json_line())?,
            }
            out.flush()?;
        }
        Command::Filter { inputs, needles, output } => {
            let needles: HashSet<String> = needles.into_iter().collect();
            let mut out = NanopubSink::open(output.output.as_deref(), output.out_format)?;
            for np in nanopubs(&inputs.files, inputs.format, inputs.interleaved) {
                let np = np?;
                if analytics::mentions(&np, &needles) {
                    out.write(&np)?;
                }
            }
            out.finish()?;
        }
        Command::Extract { inputs, graphs, output, out_format } => {
            let mut w = npop_core::rdf::QuadWriter::new(sink(output.as_deref())?, out_format.into());
            for np in nanopubs(&inputs.files, inputs.format, inputs.interleaved) {
                let np = np?;
                w.write_all(analytics::extract(&np, &graphs))?;
            }
            w.finish()?;
        }
        Command::Reuse { prev, inputs, profile, topic, placeholder, label, report, output } => {
            let prev = read_all(&prev, None)?;
            let next = read_all(&inputs.files, inputs.format)?;
            let config = ReuseConfig {
                profile: profile.profile()?,
                topic: topic.config()?,
                placeholder_base: parse_iri(&placeholder)?,
                version_label: label,
            };
            let outcome = diff::reuse(&prev, &next, &config)?;
            write_all(&output, &outcome.output)?;
            for w in &outcome.warnings {
                eprintln!("npop: warning: {w}");
            }
            match report {
                ReportFormat::Table => eprint!("{}", DiffReport::render_table([&outcome.report])),
                ReportFormat::Json => eprintln!("{}", outcome.report.to_json_line()),
            }
        }
        Command::Ireuse { prev, inputs, index, output } => {
            let prev: Vec<IndexNanopub> = read_all(&prev, None)?
                .into_iter()
                .filter(IndexNanopub::is_index)
                .map(IndexNanopub::from_nanopub)
                .collect::<Result<_, _>>()?;
            if prev.is_empty() {
                bail!("no index nanopublications in --prev");
            }
            let (elements, subs) = index.entries(&inputs)?;
            let base = parse_iri(&index.placeholder)?;
            match index::ireuse(&prev, &elements, &subs, &index.metadata()?, &base)? {
                IreuseOutcome::NoChange => eprintln!("npop: no change"),
                IreuseOutcome::Built { reused, emitted } => {
                    write_all(&output, &emitted)?;
                    eprintln!("npop: {} index chunks reused, {} new", reused.len(), emitted.len());
                    if let Some(top) = emitted.last() {
                        eprintln!("npop: top index {}", top.uri().as_str());
                    }
                }
            }
        }
        Command::Mkindex { inputs, index, supersedes, output } => {
            let (elements, subs) = index.entries(&inputs)?;
            let supersedes = supersedes.as_deref().map(parse_trusty).transpose()?;
            let base = parse_iri(&index.placeholder)?;
            let chain = index::build_index(&elements, &subs, &index.metadata()?, supersedes.as_ref(), &base)?;
            write_all(&output, &chain)?;
            if let Some(top) = chain.last() {
                eprintln!("npop: top index {}", top.uri().as_str());
            }
        }
        Command::Mktrusty { inputs, output } => {
            let mut out = NanopubSink::open(output.output.as_deref(), output.out_format)?;
            for np in nanopubs(&inputs.files, inputs.format, inputs.interleaved) {
                let np = np?;
                let done = make_trusty(&np, np.uri()).with_context(|| format!("<{}>", np.uri().as_str()))?;
                out.write(&done)?;
            }
            out.finish()?;
        }
        Command::Fingerprint { inputs, profile } => {
            let profile = profile.profile()?;
            let mut out = sink(None)?;
            for np in nanopubs(&inputs.files, inputs.format, inputs.interleaved) {
                let np = np?;
                writeln!(out, "{}\t{}", np.uri().as_str(), diff::fingerprint(&np, &profile))?;
            }
            out.flush()?;
        }
        Command::Topic { inputs, topic } => {
            let config = topic.config()?;
            let mut out = sink(None)?;
            for np in nanopubs(&inputs.files, inputs.format, inputs.interleaved) {
                let np = np?;
                let t = diff::topic(&np, &config);
                writeln!(out, "{}\t{}", np.uri().as_str(), t.as_ref().map_or("", Iri::as_str))?;
            }
            out.flush()?;
        }
        Command::Decontext { inputs, output, report } => {
            let mut d = Decontextualizer::new();
            for np in nanopubs(&inputs.files, inputs.format, inputs.interleaved) {
                d.add(&np?);
            }
            d.write_ntriples(sink(output.as_deref())?)?;
            let r = d.report();
            match report {
                ReportFormat::Table => eprint!("{r}"),
                ReportFormat::Json => eprintln!("{}", r.to_json_line()),
            }
        }
        Command::Verify { inputs, strict } => {
            let mut failed = 0usize;
            let mut out = sink(None)?;
            for np in nanopubs(&inputs.files, inputs.format, inputs.interleaved) {
                let np = np?;
                let status = match trusty::verify(&np) {
                    Ok(Verification::Valid) => "valid".to_string(),
                    Ok(v) => {
                        failed += 1;
                        format!("invalid\t{v}")
                    }
                    Err(e) => {
                        failed += 1;
                        format!("invalid\t{e}")
                    }
                };
                writeln!(out, "{}\t{status}", np.uri().as_str())?;
                let findings = validate(&np, strict);
                for f in &findings.findings {
                    eprintln!("npop: <{}> {f}", np.uri().as_str());
                }
                if !findings.is_publishable() {
                    failed += 1;
                }
            }
            out.flush()?;
            if failed > 0 {
                eprintln!("npop: {failed} problem(s) found");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Get { uris, content, servers, output } => {
            let client = servers.client()?;
            let uris: Vec<TrustyUri> = uris.iter().map(|u| parse_trusty(u)).collect::<Result<_>>()?;
            let mut out = NanopubSink::open(output.output.as_deref(), output.out_format)?;
            for uri in &uris {
                if content {
                    let nps = client.fetch_content(uri)?;
                    eprintln!("npop: retrieved {} nanopublications for {uri}", nps.len());
                    for np in &nps {
                        out.write(np)?;
                    }
                } else {
                    let found = client.fetch(uri)?;
                    tracing::info!(%uri, server = %found.server, "retrieved");
                    out.write(&found.nanopub)?;
                }
            }
            out.finish()?;
        }
        Command::Publish { inputs, servers } => {
            let client = servers.client()?;
            let mut out = sink(None)?;
            for np in nanopubs(&inputs.files, inputs.format, inputs.interleaved) {
                let np = np?;
                let ack = client.publish(&np)?;
                writeln!(out, "{}\t{}", np.uri().as_str(), ack.server)?;
            }
            out.flush()?;
        }
        Command::Serve { dir, addr, fault, delay_ms } => serve(&dir, addr, &fault, delay_ms)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn serve(dir: &Path, addr: SocketAddr, faults: &[FaultArg], delay_ms: Option<u64>) -> Result<()> {
    let registry = MockRegistry::start_on(dir, addr).with_context(|| format!("binding {addr}"))?;
    for f in faults {
        registry.add_fault(match f {
            FaultArg::NotFound => Fault::NotFound,
            FaultArg::Corrupt => Fault::Corrupt,
            FaultArg::RejectPosts => Fault::RejectPosts,
        });
    }
    if let Some(ms) = delay_ms {
        registry.add_fault(Fault::Delay(Duration::from_millis(ms)));
    }
    println!("{}", registry.base_url());
    std::io::stdout().flush()?;
    registry.wait();
    Ok(())
}

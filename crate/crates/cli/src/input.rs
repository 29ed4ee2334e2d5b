//! Resolving a digit stream from flags: a live source, an `.nbits` file, or
//! the digit cache.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use normlab::digits::{read_bits_file, read_sidecar, write_bits_file, BitBuffer, SourceSpec};
use normlab::{Error, Result};

pub const CACHE_ENV: &str = "NORMLAB_CACHE_DIR";

/// Exactly one constant to generate.
#[derive(Debug, Clone, Args)]
#[group(id = "source", multiple = false)]
pub struct SourceArgs {
    /// Square root of a non-square integer M ≥ 2.
    #[arg(long, value_name = "M")]
    pub sqrt: Option<u64>,
    /// The rational P/Q.
    #[arg(long, value_name = "P/Q", value_parser = parse_rational)]
    pub rational: Option<(u64, u64)>,
    /// Concatenation of 1, 10, 11, 100, … in binary.
    #[arg(long)]
    pub champernowne2: bool,
    /// Concatenation of the primes in binary.
    #[arg(long)]
    pub copeland_erdos2: bool,
    /// The all-ones stream.
    #[arg(long)]
    pub ones: bool,
    /// The stream 1010….
    #[arg(long)]
    pub alternating: bool,
}

impl SourceArgs {
    pub fn spec(&self) -> Option<SourceSpec> {
        if let Some(m) = self.sqrt {
            Some(SourceSpec::Sqrt { m })
        } else if let Some((p, q)) = self.rational {
            Some(SourceSpec::Rational { p, q })
        } else if self.champernowne2 {
            Some(SourceSpec::Champernowne2)
        } else if self.copeland_erdos2 {
            Some(SourceSpec::CopelandErdos2)
        } else if self.ones {
            Some(SourceSpec::ConstantOnes)
        } else if self.alternating {
            Some(SourceSpec::Alternating)
        } else {
            None
        }
    }
}

/// A stored file or a live source with a digit count.
#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Read digits from an `.nbits` file.
    #[arg(long = "in", value_name = "PATH", conflicts_with = "source")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Digits to generate when reading from a live source.
    #[arg(long, value_name = "N", default_value_t = 1 << 20)]
    pub bits: usize,
}

pub struct Stream {
    pub spec: SourceSpec,
    pub bits: Arc<BitBuffer>,
    pub significand: Option<f64>,
}

impl InputArgs {
    pub fn load(&self) -> Result<Stream> {
        match (&self.input, self.source.spec()) {
            (Some(path), _) => load_file(path),
            (None, Some(_)) if self.bits == 0 => {
                Err(Error::InvalidConfig("--bits must be at least 1".into()))
            }
            (None, Some(spec)) => {
                let bits = generate_cached(&spec, self.bits)?;
                Ok(Stream {
                    significand: spec.open()?.significand(),
                    spec,
                    bits: Arc::new(bits),
                })
            }
            (None, None) => Err(Error::InvalidConfig(
                "give --in PATH or one source flag (--sqrt, --rational, …)".into(),
            )),
        }
    }
}

/// Reads an `.nbits` file; its sidecar, when present, names the constant.
fn load_file(path: &Path) -> Result<Stream> {
    let bits = read_bits_file(path)?;
    let known = read_sidecar(path).ok().and_then(|sc| {
        let mut obj = match sc.parameters {
            serde_json::Value::Object(map) => map,
            _ => serde_json::Map::new(),
        };
        obj.insert("kind".into(), sc.kind.into());
        serde_json::from_value::<SourceSpec>(obj.into()).ok()
    });
    let (spec, significand) = match known {
        Some(spec) if !matches!(spec, SourceSpec::File { .. }) => {
            let significand = spec.open().ok().and_then(|s| s.significand());
            (spec, significand)
        }
        _ => (
            SourceSpec::File {
                path: path.to_path_buf(),
            },
            None,
        ),
    };
    Ok(Stream {
        spec,
        bits: Arc::new(bits),
        significand,
    })
}

/// Generates `n` digits, reusing and extending `$NORMLAB_CACHE_DIR` if set.
pub fn generate_cached(spec: &SourceSpec, n: usize) -> Result<BitBuffer> {
    let Some(dir) = std::env::var_os(CACHE_ENV).filter(|d| !d.is_empty()) else {
        return spec.generate(n);
    };
    let path = PathBuf::from(dir).join(cache_name(spec));
    if let Ok(cached) = read_bits_file(&path) {
        if cached.len() >= n {
            return Ok(cached.prefix(n));
        }
    }
    let bits = spec.generate(n)?;
    std::fs::create_dir_all(path.parent().unwrap_or(Path::new(".")))?;
    // Write then rename so concurrent readers never see a partial file.
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    write_bits_file(&bits, &tmp)?;
    std::fs::rename(&tmp, &path)?;
    Ok(bits)
}

fn cache_name(spec: &SourceSpec) -> String {
    match spec {
        SourceSpec::Sqrt { m } => format!("sqrt_{m}.nbits"),
        SourceSpec::Rational { p, q } => format!("rational_{p}_{q}.nbits"),
        other => format!("{}.nbits", other.kind_name()),
    }
}

fn parse_rational(s: &str) -> std::result::Result<(u64, u64), String> {
    let (p, q) = s
        .split_once('/')
        .ok_or_else(|| format!("expected P/Q, got `{s}`"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<u64>()
            .map_err(|e| format!("bad integer `{t}`: {e}"))
    };
    Ok((parse(p)?, parse(q)?))
}

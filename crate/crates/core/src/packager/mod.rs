//! Embeds a binary module in a text source artifact.
//!
//! Two encodings are supported: a base64 string constant that must be
//! decoded at load time, and a byte-array literal that the host's script
//! parser turns into bytes directly. [`bench_report`] measures the
//! trade-off: on-disk size, compressed transfer size and decode time.

use std::fmt::Write as _;
use std::io::Write as _;
use std::time::Instant;

use base64::Engine as _;
use serde::{Deserialize, Serialize};

mod loader;

pub use loader::{loader_artifacts, LoaderArtifacts, DEFAULT_PROCESSOR_NAME};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PackError {
    #[error("malformed payload: {0}")]
    MalformedPayload(String),
    #[error("invalid processor name {0:?}")]
    InvalidName(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    Base64,
    ByteArrayLiteral,
}

impl Encoding {
    pub const ALL: [Encoding; 2] = [Encoding::Base64, Encoding::ByteArrayLiteral];

    pub fn header(self) -> &'static str {
        match self {
            Encoding::Base64 => BASE64_HEADER,
            Encoding::ByteArrayLiteral => BYTES_HEADER,
        }
    }

    pub fn footer(self) -> &'static str {
        match self {
            Encoding::Base64 => BASE64_FOOTER,
            Encoding::ByteArrayLiteral => BYTES_FOOTER,
        }
    }

    /// Bytes of wrapper text around the payload.
    pub fn wrapper_len(self) -> usize {
        self.header().len() + self.footer().len()
    }
}

pub const BASE64_HEADER: &str = "const MODULE_BASE64 = \"";
pub const BASE64_FOOTER: &str = "\";\n";
pub const BYTES_HEADER: &str = "const MODULE_BYTES = new Uint8Array([";
pub const BYTES_FOOTER: &str = "]);\n";

/// A binary module encoded as text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackagedModule {
    pub encoding: Encoding,
    pub payload: String,
    pub original_len: usize,
}

impl PackagedModule {
    /// The complete source artifact: header, payload, footer.
    pub fn artifact(&self) -> String {
        let mut s = String::with_capacity(self.file_size());
        s.push_str(self.encoding.header());
        s.push_str(&self.payload);
        s.push_str(self.encoding.footer());
        s
    }

    /// Size of [`artifact`](Self::artifact) in bytes.
    pub fn file_size(&self) -> usize {
        self.encoding.wrapper_len() + self.payload.len()
    }

    /// Recognises an artifact by its header and strips the wrapper.
    pub fn from_artifact(text: &str) -> Result<Self, PackError> {
        for enc in Encoding::ALL {
            if let Some(rest) = text.strip_prefix(enc.header()) {
                let payload = rest
                    .strip_suffix(enc.footer())
                    .or_else(|| rest.strip_suffix(enc.footer().trim_end()))
                    .ok_or_else(|| PackError::MalformedPayload("missing artifact footer".into()))?;
                let original_len = decode_payload(enc, payload)?.len();
                return Ok(Self {
                    encoding: enc,
                    payload: payload.to_owned(),
                    original_len,
                });
            }
        }
        Err(PackError::MalformedPayload("unrecognised artifact header".into()))
    }
}

pub fn encode(bytes: &[u8], encoding: Encoding) -> PackagedModule {
    let payload = match encoding {
        Encoding::Base64 => base64::engine::general_purpose::STANDARD.encode(bytes),
        Encoding::ByteArrayLiteral => {
            let mut s = String::with_capacity(bytes.len() * 4);
            for (i, b) in bytes.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{b}");
            }
            s
        }
    };
    PackagedModule {
        encoding,
        payload,
        original_len: bytes.len(),
    }
}

pub fn decode(pkg: &PackagedModule) -> Result<Vec<u8>, PackError> {
    decode_payload(pkg.encoding, &pkg.payload)
}

pub fn decode_payload(encoding: Encoding, payload: &str) -> Result<Vec<u8>, PackError> {
    match encoding {
        Encoding::Base64 => base64::engine::general_purpose::STANDARD
            .decode(payload)
            .map_err(|e| PackError::MalformedPayload(e.to_string())),
        Encoding::ByteArrayLiteral => parse_byte_list(payload),
    }
}

fn parse_byte_list(payload: &str) -> Result<Vec<u8>, PackError> {
    if payload.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(payload.len() / 3 + 1);
    for (idx, item) in payload.split(',').enumerate() {
        if item.is_empty() {
            return Err(PackError::MalformedPayload(format!("empty element at index {idx}")));
        }
        if !item.bytes().all(|b| b.is_ascii_digit()) || item.len() > 3 {
            return Err(PackError::MalformedPayload(format!("invalid byte {item:?} at index {idx}")));
        }
        let v: u16 = item.parse().expect("at most three ascii digits");
        if v > 255 {
            return Err(PackError::MalformedPayload(format!("byte value {v} > 255 at index {idx}")));
        }
        out.push(v as u8);
    }
    Ok(out)
}

/// Size of `text` after deflate at the default compression level.
pub fn deflate_size(text: &[u8]) -> usize {
    let mut enc = flate2::write::DeflateEncoder::new(Vec::new(), flate2::Compression::default());
    enc.write_all(text).expect("writing to a Vec cannot fail");
    enc.finish().expect("writing to a Vec cannot fail").len()
}

/// Number of timed decodes per measurement; the median is reported.
pub const DECODE_RUNS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncodingStats {
    /// Artifact size on disk.
    pub file_size: usize,
    /// Artifact size after deflate.
    pub network_size: usize,
    /// Median time to obtain the module bytes once the artifact is loaded.
    pub decode_time_ns: u64,
}

fn median_ns(mut f: impl FnMut() -> usize) -> u64 {
    let mut times: Vec<u64> = (0..DECODE_RUNS)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(f());
            t.elapsed().as_nanos() as u64
        })
        .collect();
    times.sort_unstable();
    times[times.len() / 2]
}

/// Measures both encodings of `bytes`.
///
/// For base64 the decode time covers turning the string constant back
/// into bytes. A byte-array literal is already materialised when the host
/// parses the script, so its decode time covers only handing the parsed
/// array over as a byte buffer; script parse time is not included for
/// either encoding.
pub fn measure(bytes: &[u8]) -> (EncodingStats, EncodingStats) {
    let b64 = encode(bytes, Encoding::Base64);
    let lit = encode(bytes, Encoding::ByteArrayLiteral);

    let b64_time = median_ns(|| decode(&b64).expect("fresh payload decodes").len());
    let parsed = decode(&lit).expect("fresh payload decodes");
    let lit_time = median_ns(|| std::hint::black_box(&parsed).to_vec().len());

    let stats = |pkg: &PackagedModule, decode_time_ns| EncodingStats {
        file_size: pkg.file_size(),
        network_size: deflate_size(pkg.artifact().as_bytes()),
        decode_time_ns,
    };
    (stats(&b64, b64_time), stats(&lit, lit_time))
}

/// Byte-array-literal value divided by base64 value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    pub file_size: f64,
    pub network_size: f64,
    pub decode_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub input_len: usize,
    pub base64: EncodingStats,
    pub byte_array_literal: EncodingStats,
    pub ratios: Ratios,
}

pub const REPORT_ROWS: [&str; 3] = ["file_size", "network_size", "decode_time"];

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

pub fn bench_report(bytes: &[u8]) -> BenchReport {
    let (base64, lit) = measure(bytes);
    BenchReport {
        input_len: bytes.len(),
        ratios: Ratios {
            file_size: ratio(lit.file_size as f64, base64.file_size as f64),
            network_size: ratio(lit.network_size as f64, base64.network_size as f64),
            decode_time: ratio(lit.decode_time_ns as f64, base64.decode_time_ns as f64),
        },
        base64,
        byte_array_literal: lit,
    }
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Rows in [`REPORT_ROWS`] order: (name, base64, literal, ratio).
    pub fn rows(&self) -> [(&'static str, String, String, f64); 3] {
        let (b, l, r) = (&self.base64, &self.byte_array_literal, &self.ratios);
        [
            (REPORT_ROWS[0], format!("{} B", b.file_size), format!("{} B", l.file_size), r.file_size),
            (REPORT_ROWS[1], format!("{} B", b.network_size), format!("{} B", l.network_size), r.network_size),
            (
                REPORT_ROWS[2],
                format!("{:.3} ms", b.decode_time_ns as f64 / 1e6),
                format!("{:.3} ms", l.decode_time_ns as f64 / 1e6),
                r.decode_time,
            ),
        ]
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("input: {} bytes\n", self.input_len);
        let _ = writeln!(s, "{:<14}{:>16}{:>20}{:>10}", "property", "base64", "byte_array_literal", "ratio");
        for (name, b, l, r) in self.rows() {
            let _ = writeln!(s, "{name:<14}{b:>16}{l:>20}{r:>10.3}");
        }
        s
    }
}

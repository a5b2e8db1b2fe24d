//! Loader artifacts for the browser deployment.
//!
//! The render scope cannot fetch or compile asynchronously, so the worklet
//! path adds three scripts in order: the module bytes, a loader that
//! instantiates them synchronously, and the processor registration. The
//! control-scope fallback must instantiate asynchronously and gets its own
//! loader.

use super::{encode, Encoding, PackError, PackagedModule};

pub const DEFAULT_PROCESSOR_NAME: &str = "engine-processor";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoaderArtifacts {
    pub processor_name: String,
    /// The module as a byte-array literal declaring `MODULE_BYTES`.
    pub module_payload: PackagedModule,
    /// Render scope: compiles and instantiates `MODULE_BYTES` synchronously.
    pub loader_script: String,
    /// Render scope: defines and registers the processor class.
    pub processor_script: String,
    /// Control scope: instantiates `MODULE_BYTES` asynchronously.
    pub fallback_loader: String,
}

impl LoaderArtifacts {
    /// Scripts for the worklet path, in the order they must be added.
    pub fn worklet_modules(&self) -> [(&'static str, String); 3] {
        [
            ("module.js", self.module_payload.artifact()),
            ("loader.js", self.loader_script.clone()),
            ("processor.js", self.processor_script.clone()),
        ]
    }

    /// Scripts for the fallback path, in load order.
    pub fn fallback_modules(&self) -> [(&'static str, String); 2] {
        [
            ("module.js", self.module_payload.artifact()),
            ("fallback-loader.js", self.fallback_loader.clone()),
        ]
    }
}

fn class_name(name: &str) -> String {
    name.split(['-', '_'])
        .filter(|p| !p.is_empty())
        .map(|p| {
            let mut c = p.chars();
            c.next().map(|f| f.to_ascii_uppercase().to_string() + c.as_str()).unwrap_or_default()
        })
        .collect()
}

/// Builds the loader artifacts for `bytes`. `processor_name` is the name
/// the processor registers under: ASCII letters, digits, `-` and `_`,
/// starting with a letter.
pub fn loader_artifacts(bytes: &[u8], processor_name: &str) -> Result<LoaderArtifacts, PackError> {
    let valid = processor_name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && processor_name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if !valid {
        return Err(PackError::InvalidName(processor_name.to_owned()));
    }
    let class = class_name(processor_name);

    let loader_script = "\
const engineModule = new WebAssembly.Module(MODULE_BYTES);
globalThis.createEngine = (imports = {}) => new WebAssembly.Instance(engineModule, imports);
"
    .to_owned();

    let processor_script = format!(
        "\
class {class} extends AudioWorkletProcessor {{
  constructor(options) {{
    super(options);
    this.engine = globalThis.createEngine();
    this.inbox = [];
    this.port.onmessage = (e) => this.inbox.push(e.data);
  }}

  process(inputs, outputs) {{
    const messages = this.inbox.splice(0);
    return this.engine.exports.process(messages, inputs, outputs, (reply) => this.port.postMessage(reply)) !== false;
  }}
}}

registerProcessor(\"{processor_name}\", {class});
"
    );

    let fallback_loader = "\
async function createEngine(imports = {}) {
  const { instance } = await WebAssembly.instantiate(MODULE_BYTES, imports);
  return instance;
}
"
    .to_owned();

    Ok(LoaderArtifacts {
        processor_name: processor_name.to_owned(),
        module_payload: encode(bytes, Encoding::ByteArrayLiteral),
        loader_script,
        processor_script,
        fallback_loader,
    })
}

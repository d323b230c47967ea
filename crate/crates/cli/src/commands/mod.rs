pub mod codec;
pub mod dock;
pub mod fep;
pub mod run;
pub mod sched;
pub mod tune;

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;

pub const CONFIG_ERROR: u8 = 2;
pub const STAGE_FAILURE: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub inner: anyhow::Error,
}

pub type Outcome = Result<(), Failure>;

pub trait Classify<T> {
    /// Bad input files or arguments.
    fn config(self) -> Result<T, Failure>;
    /// A stage ran and failed.
    fn stage(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn config(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: CONFIG_ERROR, inner: e.into() })
    }

    fn stage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: STAGE_FAILURE, inner: e.into() })
    }
}

pub fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display())).config()
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display())).config()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display())).config()
}

pub fn write(path: &Path, data: impl AsRef<[u8]>) -> Outcome {
    fs::write(path, data).map_err(|e| anyhow::anyhow!("{}: {e}", path.display())).stage()
}

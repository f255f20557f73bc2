use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_ORACLE: u8 = 3;
pub const EXIT_BUDGET: u8 = 4;

/// A failed command: a machine-readable error record plus its exit code.
#[derive(Debug)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    pub code: u8,
}

impl Failure {
    pub fn config(kind: &str, message: impl ToString) -> Self {
        Self {
            kind: kind.to_owned(),
            message: message.to_string(),
            code: EXIT_CONFIG,
        }
    }

    pub fn oracle(message: impl ToString) -> Self {
        Self {
            kind: "oracle_mismatch".to_owned(),
            message: message.to_string(),
            code: EXIT_ORACLE,
        }
    }

    pub fn budget(message: impl ToString) -> Self {
        Self {
            kind: "budget_exhausted".to_owned(),
            message: message.to_string(),
            code: EXIT_BUDGET,
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.code
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self.kind, "message": self.message, "exit_code": self.code }).to_string()
    }
}

pub struct OutDir {
    dir: PathBuf,
    timestamp: bool,
}

impl OutDir {
    pub fn create(dir: &Path, timestamp: bool) -> Result<Self, Failure> {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::config("output_dir", format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_owned(),
            timestamp,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes the full effective configuration as `config.json`.
    pub fn echo_config<C: Serialize>(&self, config: &C) -> Result<(), Failure> {
        let mut value = serde_json::to_value(config).map_err(|e| Failure::config("config", e))?;
        if let Some(map) = value.as_object_mut() {
            map.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
            map.insert(
                "prng".into(),
                json!("ChaCha8 (rand_chacha), seed_from_u64(seed), stream = item index"),
            );
            if self.timestamp {
                let secs = SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                map.insert("timestamp_unix".into(), json!(secs));
            }
        }
        self.write_json("config.json", &value)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), Failure> {
        let mut text =
            serde_json::to_string_pretty(value).map_err(|e| Failure::config("serialize", e))?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<(), Failure> {
        let path = self.path(name);
        let mut f = fs::File::create(&path)
            .map_err(|e| Failure::config("io", format!("{}: {e}", path.display())))?;
        f.write_all(text.as_bytes())
            .map_err(|e| Failure::config("io", format!("{}: {e}", path.display())))
    }
}

/// Prints one JSON value on stdout.
pub fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string(value).expect("serializable output")
    );
}

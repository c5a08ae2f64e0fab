use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::CliError;

pub const FORMAT_TAG: &str = "splineproj-v1";

/// Writes the files of one run, each stamped with the format tag and the configuration.
pub struct Outputs {
    dir: PathBuf,
    config: serde_json::Value,
    written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Document<'a, S> {
    format: &'a str,
    config: &'a serde_json::Value,
    result: &'a S,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Shortest round-trip text of a float.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

impl Outputs {
    pub fn new(dir: &Path, config: &impl Serialize) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let config = serde_json::to_value(config)
            .map_err(|e| CliError::Config(format!("cannot serialize configuration: {e}")))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            config,
            written: Vec::new(),
        })
    }

    pub fn into_paths(self) -> Vec<PathBuf> {
        self.written
    }

    fn comment_block(&self) -> String {
        format!("# {FORMAT_TAG}\n# config: {}\n", self.config)
    }

    /// Writes `bytes` to a temporary sibling, then renames it over `name`.
    fn commit(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        {
            let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
            f.write_all(bytes).map_err(io_err(&tmp))?;
            f.sync_all().map_err(io_err(&tmp))?;
        }
        fs::rename(&tmp, &path).map_err(io_err(&path))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let mut s = self.comment_block();
        s.push_str(body);
        self.commit(name, s.as_bytes())
    }

    pub fn csv<R>(&mut self, name: &str, header: &[String], rows: R) -> Result<PathBuf, CliError>
    where
        R: IntoIterator<Item = Vec<String>>,
    {
        let mut buf = self.comment_block().into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let csv_err = |e: csv::Error| CliError::Config(format!("{name}: {e}"));
            w.write_record(header).map_err(csv_err)?;
            for r in rows {
                w.write_record(&r).map_err(csv_err)?;
            }
            w.flush().map_err(|e| CliError::Io {
                path: self.dir.join(name),
                source: e,
            })?;
        }
        self.commit(name, &buf)
    }

    pub fn json<S: Serialize>(&mut self, name: &str, result: &S) -> Result<PathBuf, CliError> {
        let doc = Document {
            format: FORMAT_TAG,
            config: &self.config,
            result,
        };
        let mut s = serde_json::to_string_pretty(&doc)
            .map_err(|e| CliError::Config(format!("{name}: {e}")))?;
        s.push('\n');
        self.commit(name, s.as_bytes())
    }
}

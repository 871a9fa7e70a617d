use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    fs::write(path, text).map_err(CliError::io(path))
}

/// Line-oriented JSON writer.
pub struct JsonLines {
    path: PathBuf,
    out: BufWriter<File>,
}

impl JsonLines {
    pub fn create(path: &Path) -> CliResult<Self> {
        let file = File::create(path).map_err(CliError::io(path))?;
        Ok(Self { path: path.to_path_buf(), out: BufWriter::new(file) })
    }

    pub fn write<T: Serialize>(&mut self, value: &T) -> CliResult<()> {
        serde_json::to_writer(&mut self.out, value).expect("record serializes");
        self.out.write_all(b"\n").map_err(CliError::io(&self.path))
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.out.flush().map_err(CliError::io(&self.path))
    }
}

pub fn thread_pool(workers: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))
}

/// Paths are processed in blocks of this many so memory stays bounded.
const BLOCK: usize = 256;

/// Runs `job` on every index in `0..n` on the pool and hands the results to
/// `sink` in index order, whatever the number of workers.
pub fn for_each_ordered<T: Send>(
    pool: &rayon::ThreadPool,
    n: usize,
    job: impl Fn(usize) -> CliResult<T> + Sync,
    mut sink: impl FnMut(usize, T) -> CliResult<()>,
) -> CliResult<()> {
    for start in (0..n).step_by(BLOCK) {
        let end = (start + BLOCK).min(n);
        let block: Vec<T> = pool.install(|| (start..end).into_par_iter().map(&job).collect::<CliResult<_>>())?;
        for (offset, item) in block.into_iter().enumerate() {
            sink(start + offset, item)?;
        }
    }
    Ok(())
}

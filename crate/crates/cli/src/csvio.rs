//! Per-step CSV logs: `t,cost,cum_cost,regret,avg_cost,episode,did_reset`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use neorl::runner::{RunObserver, StepRecord};

pub const HEADER: [&str; 7] = ["t", "cost", "cum_cost", "regret", "avg_cost", "episode", "did_reset"];

pub struct StepWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl StepWriter<BufWriter<File>> {
    pub fn create(path: &Path) -> Result<Self> {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        Self::new(BufWriter::new(f))
    }
}

impl<W: Write> StepWriter<W> {
    pub fn new(w: W) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        inner.write_record(HEADER)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, r: &StepRecord) -> Result<()> {
        self.inner.write_record([
            r.t.to_string(),
            r.cost.to_string(),
            r.cum_cost.to_string(),
            r.regret.to_string(),
            r.avg_cost.to_string(),
            r.episode.to_string(),
            u8::from(r.did_reset).to_string(),
        ])?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner.into_inner().map_err(|e| anyhow::anyhow!("flushing csv: {}", e.error()))
    }
}

impl<W: Write> RunObserver for StepWriter<W> {
    fn on_step(&mut self, record: &StepRecord) -> neorl::Result<()> {
        self.write(record).map_err(|e| neorl::Error::Precondition(format!("writing csv: {e}")))
    }

    fn on_refit(&mut self, _record: &neorl::runner::RefitRecord) -> neorl::Result<()> {
        self.flush().map_err(|e| neorl::Error::Precondition(format!("flushing csv: {e}")))
    }
}

pub fn read_steps_from<R: std::io::Read>(r: R) -> Result<Vec<StepRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != HEADER {
        bail!("unexpected csv header {header:?}, expected {HEADER:?}");
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let f = |k: usize| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .with_context(|| format!("row {}: column {} is not a number", i + 1, HEADER[k]))
        };
        let n = |k: usize| -> Result<usize> {
            rec[k]
                .parse::<usize>()
                .with_context(|| format!("row {}: column {} is not an integer", i + 1, HEADER[k]))
        };
        let did_reset = match &rec[6] {
            "0" => false,
            "1" => true,
            other => bail!("row {}: did_reset must be 0 or 1, found {other:?}", i + 1),
        };
        out.push(StepRecord {
            t: n(0)?,
            cost: f(1)?,
            cum_cost: f(2)?,
            regret: f(3)?,
            avg_cost: f(4)?,
            episode: n(5)?,
            did_reset,
        });
    }
    Ok(out)
}

pub fn read_steps(path: &Path) -> Result<Vec<StepRecord>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_steps_from(std::io::BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

pub fn write_steps(path: &Path, steps: &[StepRecord]) -> Result<()> {
    let mut w = StepWriter::create(path)?;
    for s in steps {
        w.write(s)?;
    }
    w.flush()
}

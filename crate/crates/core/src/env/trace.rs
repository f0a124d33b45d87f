use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// One row of a closed-loop trace, one per agent step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub vd: f64,
    pub vq: f64,
    pub ild: f64,
    pub ilq: f64,
    pub ild_ref: f64,
    pub ilq_ref: f64,
    pub p: f64,
    pub q: f64,
    pub ud: f64,
    pub uq: f64,
    pub kp: f64,
    pub ki: f64,
    pub reward: f64,
}

pub struct TraceWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl TraceWriter<std::fs::File> {
    pub fn create(path: &Path) -> Result<Self> {
        let file = std::fs::File::create(path).map_err(|e| Error::io_path(path, e))?;
        Ok(TraceWriter::new(file))
    }
}

impl<W: Write> TraceWriter<W> {
    pub fn new(sink: W) -> Self {
        TraceWriter {
            inner: csv::Writer::from_writer(sink),
        }
    }

    pub fn write(&mut self, row: &TraceRow) -> Result<()> {
        self.inner
            .serialize(row)
            .map_err(|e| Error::io("write trace row", std::io::Error::other(e)))
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush().map_err(|e| Error::io("flush trace", e))?;
        self.inner
            .into_inner()
            .map_err(|e| Error::io("flush trace", e.into_error()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_row() {
        let mut w = TraceWriter::new(Vec::new());
        w.write(&TraceRow {
            t: 0.5,
            kp: 1.0,
            ki: 5.0,
            reward: -0.25,
            ..TraceRow::default()
        })
        .unwrap();
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,vd,vq,ild,ilq,ild_ref,ilq_ref,p,q,ud,uq,kp,ki,reward"
        );
        assert_eq!(lines.next().unwrap(), "0.5,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,1.0,5.0,-0.25");
    }
}

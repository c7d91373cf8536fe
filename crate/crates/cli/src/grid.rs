//! Parameter grids: `start:stop:step` (inclusive) or a comma-separated list.

use anyhow::{bail, Result};

pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        bail!("empty parameter grid");
    }
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            bail!("range grid must be start:stop:step, got {spec:?}");
        };
        let (start, stop, step): (f64, f64, f64) = (start.trim().parse()?, stop.trim().parse()?, step.trim().parse()?);
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
            bail!("range grid needs finite bounds and a positive step");
        }
        if stop < start {
            bail!("empty parameter grid: stop {stop} < start {start}");
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count)
            .map(|i| {
                let v = start + i as f64 * step;
                // strip accumulated rounding (0.30000000000000004)
                format!("{v:.11e}").parse().expect("formatted float parses")
            })
            .collect());
    }
    let values = spec
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(anyhow::Error::from))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        bail!("empty parameter grid");
    }
    if values.iter().any(|v| !v.is_finite()) {
        bail!("grid values must be finite");
    }
    Ok(values)
}

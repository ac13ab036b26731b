//! Number lists on the command line: `start:step:stop` (inclusive) or
//! comma-separated values.

use anyhow::{bail, Context, Result};

fn tidy(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

pub fn parse_list(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            bail!("range '{spec}' must be start:step:stop");
        }
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number '{s}' in '{spec}'"))
        };
        let (start, step, stop) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || stop < start {
            bail!("range '{spec}' needs step > 0 and stop >= start");
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| tidy(start + i as f64 * step)).collect());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number '{s}' in '{spec}'"))
        })
        .collect()
}

use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::grid::{Domain, GridBox, GridFunction};
use crate::error::{Error, Result};

/// Float formatting shared by every CSV the crate writes: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Writes `axis0,...,axis{d-1},value_re,value_im` rows in row-major order.
pub fn write_grid_csv(f: &GridFunction, mut w: impl Write) -> Result<()> {
    let d = f.dim();
    let header: Vec<String> = (0..d)
        .map(|a| format!("axis{a}"))
        .chain(["value_re".to_string(), "value_im".to_string()])
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (flat, v) in f.values().iter().enumerate() {
        let mut fields: Vec<String> = f.coords(flat).into_iter().map(fmt_f64).collect();
        fields.push(fmt_f64(v.re));
        fields.push(fmt_f64(v.im));
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Reads a spatial grid function written by [`write_grid_csv`]. The box is
/// rebuilt from the distinct node coordinates per axis.
pub fn read_grid_csv(r: impl BufRead) -> Result<GridFunction> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Structural("empty grid csv".into()))??;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[cols.len() - 2] != "value_re" || cols[cols.len() - 1] != "value_im" {
        return Err(Error::Structural(format!("unexpected grid csv header `{header}`")));
    }
    let d = cols.len() - 2;
    let mut coords: Vec<Vec<f64>> = vec![Vec::new(); d];
    let mut values = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Structural(format!("bad number in grid csv: {e}")))?;
        if fields.len() != d + 2 {
            return Err(Error::Structural("ragged grid csv row".into()));
        }
        for a in 0..d {
            coords[a].push(fields[a]);
        }
        values.push(Complex64::new(fields[d], fields[d + 1]));
    }
    let mut lo = Vec::with_capacity(d);
    let mut dx = Vec::with_capacity(d);
    let mut n = Vec::with_capacity(d);
    for c in coords.iter_mut() {
        c.sort_by(f64::total_cmp);
        c.dedup();
        if c.len() < 2 {
            return Err(Error::Structural("grid csv axis with a single node".into()));
        }
        lo.push(c[0]);
        dx.push((c[c.len() - 1] - c[0]) / (c.len() - 1) as f64);
        n.push(c.len());
    }
    let grid = GridBox::with_spacing(lo, dx, n)?;
    GridFunction::new(grid, Domain::Spatial, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let g = GridBox::new(vec![-1.0, 0.0], vec![1.0, 3.0], vec![16, 32]).unwrap();
        let f = GridFunction::sample(g, |x| (x[0] * 1.7).sin() + x[1].sqrt() / 3.0);
        let mut buf = Vec::new();
        write_grid_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("axis0,axis1,value_re,value_im\n"));
        let back = read_grid_csv(&buf[..]).unwrap();
        assert_eq!(back.grid().counts(), f.grid().counts());
        for (a, b) in back.values().iter().zip(f.values()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }
}

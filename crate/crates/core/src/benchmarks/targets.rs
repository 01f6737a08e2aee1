use std::io::{Read, Write};

use super::{linspace, ForwardModel};
use crate::domain::{Bounds, TargetCurve};
use crate::error::{Error, Result};

/// Wavelength (µm) where the TPV emitter target drops from 1 to 0.
pub const TPV_CUTOFF_UM: f64 = 4.6;

/// 822 wavelengths evenly spaced over `[2.5, 12.5]` µm.
pub fn wavelength_grid() -> Vec<f64> {
    linspace(2.5, 12.5, 822)
}

/// Laser power (W), scanning speed (mm/s), line spacing (µm) for Inconel.
pub fn inconel_bounds() -> Bounds {
    Bounds::from_pairs(&[(0.2, 1.3), (10.0, 700.0), (15.0, 28.0)]).expect("static bounds")
}

/// Laser power (W), scanning speed (mm/s), line spacing (µm) for stainless steel.
pub fn stainless_bounds() -> Bounds {
    Bounds::from_pairs(&[(0.2, 1.3), (10.0, 700.0), (1.0, 42.0)]).expect("static bounds")
}

/// Response of `model` at `x_true`; a zero-discrepancy design exists by construction.
pub fn make_target(model: &dyn ForwardModel, x_true: &[f64]) -> Result<TargetCurve> {
    model.bounds().check(x_true)?;
    TargetCurve::new(model.evaluate(x_true)?)
}

/// 1 below `cutoff`, 0 at and above it.
pub fn step_target(grid: &[f64], cutoff: f64) -> Result<TargetCurve> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("wavelength grid"));
    }
    let values = grid.iter().map(|&w| if w < cutoff { 1.0 } else { 0.0 }).collect();
    TargetCurve::with_abscissa(values, grid.to_vec())
}

/// All-ones emissivity.
pub fn near_perfect_target(n: usize) -> Result<TargetCurve> {
    TargetCurve::new(vec![1.0; n])
}

/// Single `value` column, or `abscissa,value` when an abscissa is present.
pub fn write_target_csv<W: Write>(target: &TargetCurve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match target.abscissa() {
        Some(xs) => {
            w.write_record(["abscissa", "value"])?;
            for (x, v) in xs.iter().zip(target.values()) {
                w.write_record([x.to_string(), v.to_string()])?;
            }
        }
        None => {
            w.write_record(["value"])?;
            for v in target.values() {
                w.write_record([v.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_target_csv<R: Read>(input: R) -> Result<TargetCurve> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let value_col = headers
        .iter()
        .position(|h| h.trim() == "value")
        .ok_or_else(|| Error::InvalidInput("target CSV needs a `value` column".into()))?;
    let abscissa_col = headers.iter().position(|h| h.trim() == "abscissa");
    let mut values = Vec::new();
    let mut abscissa = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::InvalidInput(format!("bad number in target CSV row {:?}", rec.position())))
        };
        values.push(parse(value_col)?);
        if let Some(a) = abscissa_col {
            abscissa.push(parse(a)?);
        }
    }
    match abscissa_col {
        Some(_) => TargetCurve::with_abscissa(values, abscissa),
        None => TargetCurve::new(values),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{LogisticModel, SinusoidModel, SINUSOID_DEFAULT_TRUE};
    use crate::domain::rmse;

    #[test]
    fn step_examples() {
        let t = step_target(&[2.5, 4.5, 4.7, 12.5], TPV_CUTOFF_UM).unwrap();
        assert_eq!(t.values(), &[1.0, 1.0, 0.0, 0.0]);
        assert!(step_target(&[2.5, 4.5], 1.0).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(step_target(&[2.5, 4.5], 20.0).unwrap().values().iter().all(|&v| v == 1.0));
        assert!(matches!(step_target(&[], 1.0), Err(Error::EmptyInput(_))));
        assert!(step_target(&[3.0, 2.0], 2.5).is_err());
    }

    #[test]
    fn near_perfect_examples() {
        assert_eq!(near_perfect_target(822).unwrap().len(), 822);
        assert_eq!(near_perfect_target(1).unwrap().values(), &[1.0]);
        assert_eq!(rmse(near_perfect_target(5).unwrap().values(), &[0.0; 5]).unwrap(), 1.0);
    }

    #[test]
    fn wavelength_grid_spans_band() {
        let g = wavelength_grid();
        assert_eq!(g.len(), 822);
        assert_eq!((g[0], g[821]), (2.5, 12.5));
        let t = step_target(&g, TPV_CUTOFF_UM).unwrap();
        let ones = t.values().iter().filter(|&&v| v == 1.0).count();
        assert!(g[ones - 1] < TPV_CUTOFF_UM && g[ones] >= TPV_CUTOFF_UM);
    }

    #[test]
    fn material_bounds() {
        let i = inconel_bounds();
        let s = stainless_bounds();
        assert_eq!(i.lower(), &[0.2, 10.0, 15.0]);
        assert_eq!(i.upper(), &[1.3, 700.0, 28.0]);
        assert_eq!(s.lower(), &[0.2, 10.0, 1.0]);
        assert_eq!(s.upper(), &[1.3, 700.0, 42.0]);
    }

    #[test]
    fn made_targets_are_realizable() {
        let m = SinusoidModel::default();
        let t = make_target(&m, &SINUSOID_DEFAULT_TRUE).unwrap();
        assert_eq!(rmse(t.values(), &m.evaluate(&SINUSOID_DEFAULT_TRUE).unwrap()).unwrap(), 0.0);
        assert!(matches!(make_target(&m, &[9.0, 0.1, 1.0, 5.0]), Err(Error::OutOfBounds { .. })));
    }

    #[test]
    fn ill_posed_designs_share_curves() {
        // gamma = 0 makes the response depend on phi only through sin(phi):
        // phi and pi - phi + 2 pi give the same curve.
        let m = SinusoidModel::default();
        let phi = 4.0;
        let alt = 3.0 * std::f64::consts::PI - phi;
        let a = m.evaluate(&[3.0, 0.1, 0.0, phi]).unwrap();
        let b = m.evaluate(&[3.0, 0.1, 0.0, alt]).unwrap();
        assert!(rmse(&a, &b).unwrap() < 1e-12);
        let l = LogisticModel::default();
        let t = make_target(&l, &[500.0, 500.0, 0.1]).unwrap();
        let other = l.evaluate(&[500.0, 500.0, 0.3]).unwrap();
        assert_eq!(rmse(t.values(), &other).unwrap(), 0.0);
    }

    #[test]
    fn target_csv_round_trip() {
        let t = step_target(&[1.0, 2.0, 5.0], TPV_CUTOFF_UM).unwrap();
        let mut buf = Vec::new();
        write_target_csv(&t, &mut buf).unwrap();
        assert_eq!(read_target_csv(buf.as_slice()).unwrap(), t);
        let plain = near_perfect_target(3).unwrap();
        let mut buf = Vec::new();
        write_target_csv(&plain, &mut buf).unwrap();
        assert_eq!(read_target_csv(buf.as_slice()).unwrap(), plain);
        assert!(read_target_csv("foo\n1\n".as_bytes()).is_err());
    }
}

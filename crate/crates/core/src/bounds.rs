//! Closed-form lower bounds as functions of the overlap `z = |⟨φ|ψ⟩|`.
//!
//! With `cos δ = z` and `cos Δ = z²`, the angle restrictions on a unitary
//! machine give
//!
//! - relative error `≥ sin(Δ − δ) / sin Δ = z − z²/√(1 + z²)` ([`re_lower_bound`]),
//! - absolute error `≥ sin(Δ − δ) = z√(1 − z⁴) − z²√(1 − z²)` ([`ae_lower_bound`]).
//!
//! [`hb_bound`] is the older absolute-error bound `2(√(1 + z(1 − z)) − 1)`,
//! which the second bound dominates everywhere on `[0, 1]`.
//!
//! At `z = 1` the relative-error bound evaluates to `1 − 1/√2` even though
//! identical states clone perfectly; the bound is only meaningful on `[0, 1)`.

use std::io::{self, Write};

use serde::Serialize;

use crate::{Error, Result};

fn check_unit_interval(z: f64) -> Result<()> {
    if (0.0..=1.0).contains(&z) {
        Ok(())
    } else {
        Err(Error::out_of_domain("z", z, "[0, 1]"))
    }
}

/// `F(z) = z − z² / √(1 + z²)`.
pub fn re_lower_bound(z: f64) -> Result<f64> {
    check_unit_interval(z)?;
    Ok(z - z * z / (1.0 + z * z).sqrt())
}

/// `z √(1 − z⁴) − z² √(1 − z²)`.
pub fn ae_lower_bound(z: f64) -> Result<f64> {
    check_unit_interval(z)?;
    let z2 = z * z;
    Ok(z * (1.0 - z2 * z2).sqrt() - z2 * (1.0 - z2).sqrt())
}

/// `2 (√(1 + z(1 − z)) − 1)`.
pub fn hb_bound(z: f64) -> Result<f64> {
    check_unit_interval(z)?;
    Ok(2.0 * ((1.0 + z * (1.0 - z)).sqrt() - 1.0))
}

/// `sin(Δ − δ) / sin Δ` with `cos Δ = z²`, `cos δ = z`: the trigonometric
/// form of [`re_lower_bound`], undefined at `z = 1`.
pub fn re_bound_trig(z: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::out_of_domain("z", z, "[0, 1)"));
    }
    let big = (z * z).acos();
    let small = z.acos();
    Ok((big - small).sin() / big.sin())
}

/// Where [`re_lower_bound`] peaks: the root `z = √((√5 − 1)/2)` of
/// `z⁴ + z² − 1 = 0`, about 0.786. The bound increases before it and
/// decreases after it.
pub fn re_bound_peak() -> f64 {
    ((5f64.sqrt() - 1.0) / 2.0).sqrt()
}

/// Where [`ae_lower_bound`] peaks, `z = 1/√3`, with value `√(2/27)`.
pub fn ae_bound_peak() -> (f64, f64) {
    (1.0 / 3f64.sqrt(), (2.0f64 / 27.0).sqrt())
}

/// A sampled bound curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCurve {
    pub name: String,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// Samples `f` on `steps` uniformly spaced points covering `[z_min, z_max]`
/// inclusive.
pub fn sample_curve<F>(name: &str, f: F, z_min: f64, z_max: f64, steps: usize) -> Result<BoundCurve>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(0.0 <= z_min && z_min < z_max && z_max <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "need 0 ≤ z_min < z_max ≤ 1, got [{z_min}, {z_max}]"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 steps, got {steps}")));
    }
    let last = (steps - 1) as f64;
    let grid: Vec<f64> = (0..steps)
        .map(|i| {
            if i == steps - 1 {
                z_max
            } else {
                z_min + (z_max - z_min) * i as f64 / last
            }
        })
        .collect();
    let values = grid.iter().map(|&z| f(z)).collect::<Result<Vec<_>>>()?;
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig(format!("non-finite curve value {bad}")));
    }
    Ok(BoundCurve {
        name: name.to_string(),
        grid,
        values,
    })
}

impl BoundCurve {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `(z, value)` at the largest value; the first one on ties.
    pub fn argmax(&self) -> (f64, f64) {
        let mut best = (self.grid[0], self.values[0]);
        for (&z, &v) in self.grid.iter().zip(&self.values) {
            if v > best.1 {
                best = (z, v);
            }
        }
        best
    }

    fn pairs_in(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let pts: Vec<(f64, f64)> = self
            .grid
            .iter()
            .zip(&self.values)
            .filter(|(&z, _)| z >= lo - 1e-12 && z <= hi + 1e-12)
            .map(|(&z, &v)| (z, v))
            .collect();
        pts.into_iter()
    }

    /// Non-decreasing on the grid points inside `[lo, hi]`.
    pub fn is_increasing_on(&self, lo: f64, hi: f64) -> bool {
        let v: Vec<f64> = self.pairs_in(lo, hi).map(|p| p.1).collect();
        v.windows(2).all(|w| w[1] >= w[0])
    }

    /// Strictly decreasing on the grid points inside `[lo, hi]`.
    pub fn is_strictly_decreasing_on(&self, lo: f64, hi: f64) -> bool {
        let v: Vec<f64> = self.pairs_in(lo, hi).map(|p| p.1).collect();
        v.windows(2).all(|w| w[1] < w[0])
    }

    /// `z,value` rows with a header line.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        write_csv_table(out, &["z", "value"], &[self])
    }
}

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes curves sharing one grid as columns: `header[0]` is the grid column.
pub fn write_csv_table<W: Write>(mut out: W, header: &[&str], curves: &[&BoundCurve]) -> io::Result<()> {
    assert_eq!(header.len(), curves.len() + 1, "one header per column");
    let grid = &curves[0].grid;
    assert!(curves.iter().all(|c| &c.grid == grid), "curves must share a grid");
    writeln!(out, "{}", header.join(","))?;
    for (i, z) in grid.iter().enumerate() {
        let mut row = fmt17(*z);
        for c in curves {
            row.push(',');
            row.push_str(&fmt17(c.values[i]));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

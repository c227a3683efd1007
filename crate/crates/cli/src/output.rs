use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use twtc_core::polytope::Polygon2;
use twtc_core::regions::SweepCell;

use crate::CliError;

/// Formats like C's `%.12g`, with negative zero printed as `0`.
pub fn fmt_g12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..12).contains(&exp) {
        trim(&format!("{:.*}", (11 - exp) as usize, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

pub fn polygon_csv(poly: &Polygon2) -> String {
    let mut s = String::from("R1,R2\n");
    for &(x, y) in poly.vertices() {
        let _ = writeln!(s, "{},{}", fmt_g12(x), fmt_g12(y));
    }
    s
}

pub fn sweep_csv(cells: &[SweepCell]) -> String {
    let mut s = String::from("rho1n,rho2n,a1,a2,e1,e2,e12\n");
    for c in cells {
        let row = [c.rho1n, c.rho2n, c.mi.a1, c.mi.a2, c.mi.e1, c.mi.e2, c.mi.e12].map(fmt_g12);
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

pub fn keyrate_csv(points: &[(f64, f64)]) -> String {
    let mut s = String::from("rp,rk\n");
    for &(rp, rk) in points {
        let _ = writeln!(s, "{},{}", fmt_g12(rp), fmt_g12(rk));
    }
    s
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

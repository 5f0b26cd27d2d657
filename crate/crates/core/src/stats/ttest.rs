use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use super::mean;
use crate::error::{Error, Result};

/// Outcome of a paired two-tailed t-test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: usize,
    pub p: f64,
    pub stars: u8,
}

/// Significance stars: 3/2/1/0 for p below .001/.01/.05/otherwise.
pub fn stars(p: f64) -> u8 {
    if p < 0.001 {
        3
    } else if p < 0.01 {
        2
    } else if p < 0.05 {
        1
    } else {
        0
    }
}

pub fn star_label(stars: u8) -> &'static str {
    match stars {
        0 => "",
        1 => "*",
        2 => "**",
        _ => "***",
    }
}

/// Two-tailed p-value of Student's t with `df` degrees of freedom.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    let x = df / (df + t * t);
    beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// Paired t-test on `a - b` with a sample (n-1) standard deviation.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::contract(format!(
            "paired series lengths differ ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::contract("paired t-test needs at least two pairs"));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::contract("paired series contain non-finite values"));
    }
    if d.iter().all(|&v| v == d[0]) {
        return Err(Error::Degenerate("differences have zero variance".into()));
    }
    let m = mean(&d);
    let var = d.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        return Err(Error::Degenerate("differences have zero variance".into()));
    }
    let t = m / (var.sqrt() / (n as f64).sqrt());
    let df = n - 1;
    let p = student_t_two_tailed(t, df as f64);
    Ok(TTest {
        t,
        df,
        p,
        stars: stars(p),
    })
}

//! Measures, convolutions, Lp norms and the regular actions.
//!
//! Everything is real-valued and computed by direct O(|G|^2) loops; at the
//! orders we work with this is both exact enough (doubles, |G| <= 512) and
//! faster than any transform would be on a non-abelian group.

use crate::error::{Error, Result};
use crate::group::GroupTable;
use crate::msys::MultiplicativeSystem;
use crate::subset::Subset;

/// A real-valued function on the group, indexed by element id.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionVec {
    fingerprint: u64,
    pub values: Vec<f64>,
}

/// A real-valued measure on the group. `total` caches the total variation.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureVec {
    fingerprint: u64,
    pub weights: Vec<f64>,
    total: f64,
}

impl FunctionVec {
    pub fn zero(group: &GroupTable) -> Self {
        FunctionVec {
            fingerprint: group.fingerprint(),
            values: vec![0.0; group.order()],
        }
    }

    pub fn from_values(group: &GroupTable, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), group.order());
        FunctionVec {
            fingerprint: group.fingerprint(),
            values,
        }
    }

    /// The indicator 1_A.
    pub fn indicator(group: &GroupTable, a: &Subset) -> Self {
        let mut f = Self::zero(group);
        for x in a.iter() {
            f.values[x] = 1.0;
        }
        f
    }

    pub fn constant(group: &GroupTable, c: f64) -> Self {
        FunctionVec {
            fingerprint: group.fingerprint(),
            values: vec![c; group.order()],
        }
    }

    fn check(&self, group: &GroupTable) -> Result<()> {
        if self.fingerprint != group.fingerprint() {
            return Err(Error::GroupMismatch);
        }
        Ok(())
    }
}

impl MeasureVec {
    pub fn from_weights(group: &GroupTable, weights: Vec<f64>) -> Self {
        assert_eq!(weights.len(), group.order());
        let total = weights.iter().map(|w| w.abs()).sum();
        MeasureVec {
            fingerprint: group.fingerprint(),
            weights,
            total,
        }
    }

    /// Total variation norm, Sum |weights|.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0.0)
    }

    /// mu(A) = Sum of weights over A.
    pub fn mass_on(&self, a: &Subset) -> f64 {
        a.iter().map(|x| self.weights[x]).sum()
    }

    fn check(&self, group: &GroupTable) -> Result<()> {
        if self.fingerprint != group.fingerprint() {
            return Err(Error::GroupMismatch);
        }
        Ok(())
    }
}

/// The uniform probability measure mu_A.
pub fn uniform_measure(group: &GroupTable, a: &Subset) -> Result<MeasureVec> {
    a.check_group(group)?;
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let w = 1.0 / a.card() as f64;
    let mut weights = vec![0.0; group.order()];
    for x in a.iter() {
        weights[x] = w;
    }
    Ok(MeasureVec::from_weights(group, weights))
}

/// f * mu (x) = Sum_y f(x y^{-1}) mu({y}).
pub fn convolve_fn_measure(
    group: &GroupTable,
    f: &FunctionVec,
    mu: &MeasureVec,
) -> Result<FunctionVec> {
    f.check(group)?;
    mu.check(group)?;
    let n = group.order();
    let mut out = FunctionVec::zero(group);
    for y in 0..n {
        let w = mu.weights[y];
        if w == 0.0 {
            continue;
        }
        let yi = group.inv(y);
        for x in 0..n {
            out.values[x] += f.values[group.mul(x, yi)] * w;
        }
    }
    Ok(out)
}

/// mu * f (x) = Sum_y f(y^{-1} x) mu({y}).
pub fn convolve_measure_fn(
    group: &GroupTable,
    mu: &MeasureVec,
    f: &FunctionVec,
) -> Result<FunctionVec> {
    f.check(group)?;
    mu.check(group)?;
    let n = group.order();
    let mut out = FunctionVec::zero(group);
    for y in 0..n {
        let w = mu.weights[y];
        if w == 0.0 {
            continue;
        }
        let yi = group.inv(y);
        for x in 0..n {
            out.values[x] += f.values[group.mul(yi, x)] * w;
        }
    }
    Ok(out)
}

/// Pushforward of mu x nu under multiplication.
pub fn convolve_measures(
    group: &GroupTable,
    mu: &MeasureVec,
    nu: &MeasureVec,
) -> Result<MeasureVec> {
    mu.check(group)?;
    nu.check(group)?;
    let n = group.order();
    let mut weights = vec![0.0; n];
    for x in 0..n {
        let wx = mu.weights[x];
        if wx == 0.0 {
            continue;
        }
        let row = group.mul_row(x);
        for y in 0..n {
            let wy = nu.weights[y];
            if wy != 0.0 {
                weights[row[y] as usize] += wx * wy;
            }
        }
    }
    Ok(MeasureVec::from_weights(group, weights))
}

/// The weighted Lp norm, p in [1, inf].
pub fn lp_norm(f: &FunctionVec, mu: &MeasureVec, p: f64) -> Result<f64> {
    if !mu.is_nonnegative() {
        return Err(Error::NegativeMeasure);
    }
    if p.is_infinite() {
        return Ok(f
            .values
            .iter()
            .zip(&mu.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max));
    }
    if p < 1.0 {
        return Err(Error::BadExponent);
    }
    let s: f64 = f
        .values
        .iter()
        .zip(&mu.weights)
        .map(|(v, w)| v.abs().powf(p) * w)
        .sum();
    Ok(s.powf(1.0 / p))
}

/// <f, g>_{L2(mu)} = Integral f g dmu (real scalars).
pub fn inner_product(f: &FunctionVec, g: &FunctionVec, mu: &MeasureVec) -> f64 {
    f.values
        .iter()
        .zip(&g.values)
        .zip(&mu.weights)
        .map(|((a, b), w)| a * b * w)
        .sum()
}

/// rho_x(f)(y) = f(yx).
pub fn act_right(group: &GroupTable, x: usize, f: &FunctionVec) -> Result<FunctionVec> {
    f.check(group)?;
    let mut out = FunctionVec::zero(group);
    for y in 0..group.order() {
        out.values[y] = f.values[group.mul(y, x)];
    }
    Ok(out)
}

/// lambda_x(f)(y) = f(x^{-1} y).
pub fn act_left(group: &GroupTable, x: usize, f: &FunctionVec) -> Result<FunctionVec> {
    f.check(group)?;
    let xi = group.inv(x);
    let mut out = FunctionVec::zero(group);
    for y in 0..group.order() {
        out.values[y] = f.values[group.mul(xi, y)];
    }
    Ok(out)
}

/// rho_x(mu)({z}) = mu({zx}), so that rho_x(mu)(A) = mu(Ax).
pub fn act_right_measure(group: &GroupTable, x: usize, mu: &MeasureVec) -> Result<MeasureVec> {
    mu.check(group)?;
    let mut weights = vec![0.0; group.order()];
    for z in 0..group.order() {
        weights[z] = mu.weights[group.mul(z, x)];
    }
    Ok(MeasureVec::from_weights(group, weights))
}

/// lambda_x(mu)({z}) = mu({xz}), so that lambda_x(mu)(A) = mu(xA).
pub fn act_left_measure(group: &GroupTable, x: usize, mu: &MeasureVec) -> Result<MeasureVec> {
    mu.check(group)?;
    let mut weights = vec![0.0; group.order()];
    for z in 0..group.order() {
        weights[z] = mu.weights[group.mul(x, z)];
    }
    Ok(MeasureVec::from_weights(group, weights))
}

/// f~(x) = f(x^{-1}) (real-valued, so no conjugate).
pub fn tilde_fn(group: &GroupTable, f: &FunctionVec) -> Result<FunctionVec> {
    f.check(group)?;
    let mut out = FunctionVec::zero(group);
    for x in 0..group.order() {
        out.values[x] = f.values[group.inv(x)];
    }
    Ok(out)
}

pub fn tilde_measure(group: &GroupTable, mu: &MeasureVec) -> Result<MeasureVec> {
    mu.check(group)?;
    let mut weights = vec![0.0; group.order()];
    for x in 0..group.order() {
        weights[x] = mu.weights[group.inv(x)];
    }
    Ok(MeasureVec::from_weights(group, weights))
}

/// <f, mu> = Integral f dmu.
pub fn pair_fn_measure(f: &FunctionVec, mu: &MeasureVec) -> f64 {
    f.values
        .iter()
        .zip(&mu.weights)
        .map(|(v, w)| v * w)
        .sum()
}

/// ||rho_{x^{-1}}(mu_{B_i}) - mu_{B_i}|| for x in B_{i+1}.
///
/// For an epsilon-closed system the proof of the approximate-Haar lemma
/// pins this below 2 - 2 mu_{B_i}(B_{i-}) <= 2 epsilon / (1 + epsilon),
/// which is the explicit bound the verifier asserts.
pub fn tv_haar_defect(
    group: &GroupTable,
    sys: &MultiplicativeSystem,
    i: usize,
    x: usize,
) -> Result<f64> {
    if i > sys.r() {
        return Err(Error::StepOutOfRange { i, r: sys.r() });
    }
    if !sys.level_after(i).contains(x) {
        return Err(Error::NotInNextLevel { x, i });
    }
    let mu = uniform_measure(group, sys.mid(i))?;
    let xi = group.inv(x);
    let shifted = act_right_measure(group, xi, &mu)?;
    let tv: f64 = shifted
        .weights
        .iter()
        .zip(&mu.weights)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(tv)
}

/// Serialize a function or measure as CSV rows `element,value`.
pub fn to_csv(values: &[f64]) -> String {
    let mut out = String::from("element,value\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{i},{v}\n"));
    }
    out
}

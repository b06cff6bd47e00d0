//! Central finite differences and symplectic pullback defects.
//!
//! These are verification oracles: they deliberately avoid any of the
//! closed-form derivatives used elsewhere in the crate.

use crate::error::Result;
use crate::scalar::Real;

/// `(f(x + h d) − f(x − h d)) / 2h`.
pub fn directional<T: Real, const N: usize, const M: usize>(
    f: impl Fn(&[T; N]) -> Result<[T; M]>,
    x: &[T; N],
    dir: &[T; N],
    h: T,
) -> Result<[T; M]> {
    let shifted = |s: T| {
        let mut y = *x;
        for (yi, &di) in y.iter_mut().zip(dir) {
            *yi += s * di;
        }
        f(&y)
    };
    let (fp, fm) = (shifted(h)?, shifted(-h)?);
    let mut out = [T::zero(); M];
    for k in 0..M {
        out[k] = (fp[k] - fm[k]) / (h + h);
    }
    Ok(out)
}

/// Fourth-order five-point stencil
/// `(−f(x+2hd) + 8f(x+hd) − 8f(x−hd) + f(x−2hd)) / 12h`.
pub fn directional4<T: Real, const N: usize, const M: usize>(
    f: impl Fn(&[T; N]) -> Result<[T; M]>,
    x: &[T; N],
    dir: &[T; N],
    h: T,
) -> Result<[T; M]> {
    let near = directional(&f, x, dir, h)?;
    let far = directional(&f, x, dir, h + h)?;
    let mut out = [T::zero(); M];
    for k in 0..M {
        out[k] = (T::of(4.0) * near[k] - far[k]) / T::of(3.0);
    }
    Ok(out)
}

/// Jacobian `∂fᵢ/∂xⱼ` as `M` rows of length `N`.
pub fn jacobian<T: Real, const N: usize, const M: usize>(
    f: impl Fn(&[T; N]) -> Result<[T; M]>,
    x: &[T; N],
    h: T,
) -> Result<[[T; N]; M]> {
    let mut jac = [[T::zero(); N]; M];
    for j in 0..N {
        let mut e = [T::zero(); N];
        e[j] = T::one();
        let col = directional(&f, x, &e, h)?;
        for i in 0..M {
            jac[i][j] = col[i];
        }
    }
    Ok(jac)
}

/// The canonical form `[[0, I], [−I, 0]]` on `ℝ^{2k}` with `N = 2k`.
pub fn canonical_form<T: Real, const N: usize>() -> [[T; N]; N] {
    let k = N / 2;
    let mut j = [[T::zero(); N]; N];
    for i in 0..k {
        j[i][k + i] = T::one();
        j[k + i][i] = -T::one();
    }
    j
}

/// `Dᵀ Ω_target D` for a Jacobian `D` of shape `M × N`.
pub fn pullback<T: Real, const N: usize, const M: usize>(
    d: &[[T; N]; M],
    target: &[[T; M]; M],
) -> [[T; N]; N] {
    let mut out = [[T::zero(); N]; N];
    for a in 0..N {
        for b in 0..N {
            let mut acc = T::zero();
            for i in 0..M {
                for j in 0..M {
                    acc += d[i][a] * target[i][j] * d[j][b];
                }
            }
            out[a][b] = acc;
        }
    }
    out
}

/// Largest entrywise difference of two square matrices.
pub fn max_abs_diff<T: Real, const N: usize>(a: &[[T; N]; N], b: &[[T; N]; N]) -> T {
    let mut worst = T::zero();
    for i in 0..N {
        for j in 0..N {
            worst = worst.max((a[i][j] - b[i][j]).abs());
        }
    }
    worst
}

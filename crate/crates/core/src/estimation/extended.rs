//! Whole-sweep estimation in multiprecision.
//!
//! The window matrix for the largest window is factored once with a
//! semidefinite Cholesky decomposition, the cross covariances riding along
//! as extra rows. Because the leading `n p` columns of that factor are the
//! factor of the window-`p` matrix, every smaller window falls out of the
//! same pass: `Omega(p) = Gamma_0 - sum_{k < n p} l_a[k] l_b[k]`.
//! Pivots at rounding level are dropped, which is the exact-arithmetic
//! counterpart of the pseudo-inverse.

use rug::ops::Pow;
use rug::Float;

use crate::catalog::ProcessModel;
use crate::covariance::extended::{extended_autocov, ExtendedAutocov};
use crate::estimation::Direction;
use crate::{CMatrix, Complex64, Error, Result};

/// Working precision (bits) for sweeps up to window `max_window`.
pub fn default_precision(max_window: usize) -> u32 {
    256 + 12 * max_window as u32
}

/// Error covariances for windows `1..=max_window` from one factorization.
#[derive(Debug, Clone)]
pub struct ExtendedSweep {
    pub direction: Direction,
    pub precision_bits: u32,
    pub max_window: usize,
    /// `omegas[p - 1] = Omega(p)`, rounded to double precision.
    pub omegas: Vec<CMatrix>,
    pub traces: Vec<f64>,
    /// Retained pivots, cumulative per window.
    pub rank_used: Vec<usize>,
    traces_mp: Vec<Float>,
}

impl ExtendedSweep {
    /// `trace Omega(p)` at full precision.
    pub fn trace_mp(&self, p: usize) -> &Float {
        &self.traces_mp[p - 1]
    }

    /// `trace Omega(p) < trace Omega(q)`, decided at working precision.
    pub fn trace_below(&self, p: usize, q: usize) -> bool {
        self.trace_mp(p) < self.trace_mp(q)
    }

    /// `log10(trace Omega(p) - v)` at working precision; NaN when the
    /// trace does not exceed `v`. Excesses far below the double range stay
    /// representable this way.
    pub fn log10_trace_excess(&self, p: usize, v: f64) -> f64 {
        let d = Float::with_val(self.precision_bits, self.trace_mp(p) - v);
        if d > 0 {
            d.log10().to_f64()
        } else {
            f64::NAN
        }
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.traces_mp.windows(2).all(|w| w[1] < w[0])
    }
}

fn oriented_entry(g: &ExtendedAutocov, direction: Direction, k: i64, i: usize, j: usize) -> &Float {
    match direction {
        Direction::Forward => g.entry(k, i, j),
        // reversed process: Gamma~_k = Gamma_k^T
        Direction::Backward => g.entry(-k, i, j),
    }
}

/// Sweep windows `1..=max_window` in `direction` at `precision_bits`.
pub fn extended_sweep(
    model: &ProcessModel,
    max_window: usize,
    direction: Direction,
    precision_bits: u32,
) -> Result<ExtendedSweep> {
    if max_window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    if precision_bits < 64 {
        return Err(Error::InvalidArgument(format!("precision {precision_bits} below 64 bits")));
    }
    let prec = precision_bits;
    let gam = extended_autocov(model, max_window, prec)?;
    let n = gam.n();
    if (0..n).all(|i| (0..n).all(|j| gam.entry(0, i, j).is_zero())) {
        return Err(Error::DegenerateGamma0);
    }
    let dim = n * max_window;
    let rows = dim + n;

    // Packed lower triangle: row r holds columns 0..min(r, dim-1).
    let row_len = |r: usize| if r < dim { r + 1 } else { dim };
    let mut offsets = Vec::with_capacity(rows + 1);
    offsets.push(0usize);
    for r in 0..rows {
        offsets.push(offsets[r] + row_len(r));
    }
    let mut l: Vec<Float> = Vec::with_capacity(offsets[rows]);
    for r in 0..rows {
        for c in 0..row_len(r) {
            let (bc, cc) = (c / n, c % n);
            let v = if r < dim {
                let (br, cr) = (r / n, r % n);
                // block (i, j) = Gamma_{j-i}
                oriented_entry(&gam, direction, bc as i64 - br as i64, cr, cc)
            } else {
                oriented_entry(&gam, direction, bc as i64 + 1, r - dim, cc)
            };
            l.push(v.clone());
        }
    }

    let max_diag = (0..dim)
        .map(|r| l[offsets[r] + r].clone())
        .fold(Float::new(prec), |a, b| if b > a { b } else { a });
    let cutoff = max_diag * Float::with_val(prec, 2u32).pow(-(i64::from(prec) * 7 / 8) as i32);

    let mut kept = vec![false; dim];
    let mut acc = Float::new(prec);
    for j in 0..dim {
        let oj = offsets[j];
        // pivot
        acc.clone_from(&l[oj + j]);
        for k in 0..j {
            if kept[k] {
                acc -= &l[oj + k] * &l[oj + k];
            }
        }
        if acc > cutoff {
            kept[j] = true;
            acc.sqrt_mut();
            l[oj + j].clone_from(&acc);
        } else {
            l[oj + j] = Float::new(prec);
        }
        let (head, tail) = l.split_at_mut(offsets[j + 1]);
        let lj = &head[oj..oj + j + 1];
        for i in j + 1..rows {
            let oi = offsets[i] - offsets[j + 1];
            let row = &mut tail[oi..oi + row_len(i)];
            if !kept[j] {
                row[j] = Float::new(prec);
                continue;
            }
            acc.clone_from(&row[j]);
            for k in 0..j {
                if kept[k] {
                    acc -= &row[k] * &lj[k];
                }
            }
            acc /= &lj[j];
            row[j].clone_from(&acc);
        }
    }

    let mut running: Vec<Float> = (0..n * n).map(|_| Float::new(prec)).collect();
    let mut omegas = Vec::with_capacity(max_window);
    let mut traces = Vec::with_capacity(max_window);
    let mut traces_mp = Vec::with_capacity(max_window);
    let mut rank_used = Vec::with_capacity(max_window);
    let mut rank = 0;
    for p in 0..max_window {
        for k in p * n..(p + 1) * n {
            if !kept[k] {
                continue;
            }
            rank += 1;
            for a in 0..n {
                for b in a..n {
                    let la = &l[offsets[dim + a] + k];
                    let lb = &l[offsets[dim + b] + k];
                    running[a * n + b] += la * lb;
                }
            }
        }
        let mut om = CMatrix::zeros(n, n);
        let mut tr = Float::new(prec);
        for a in 0..n {
            for b in a..n {
                let v = Float::with_val(prec, gam.entry(0, a, b) - &running[a * n + b]);
                if a == b {
                    tr += &v;
                }
                let x = v.to_f64();
                om[(a, b)] = Complex64::new(x, 0.0);
                om[(b, a)] = Complex64::new(x, 0.0);
            }
        }
        omegas.push(om);
        traces.push(tr.to_f64());
        traces_mp.push(tr);
        rank_used.push(rank);
    }
    Ok(ExtendedSweep {
        direction,
        precision_bits,
        max_window,
        omegas,
        traces,
        rank_used,
        traces_mp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{custom, harmonic_example, ma_example};
    use crate::covariance::autocov_default;
    use crate::estimation::{predict, DEFAULT_RANK_TOL};
    use crate::linalg::max_abs;
    use crate::symbols::Symbol;

    #[test]
    fn ma_matches_closed_form() {
        for alpha in [0.5, 2.0] {
            let m = ma_example(alpha).unwrap();
            let f = extended_sweep(&m, 6, Direction::Forward, 200).unwrap();
            let b = extended_sweep(&m, 6, Direction::Backward, 200).unwrap();
            for p in 0..6 {
                let fo = &f.omegas[p];
                assert!((fo[(0, 0)].re - 1.0).abs() < 1e-30 && (fo[(0, 1)].re - 1.0).abs() < 1e-30);
                assert!((fo[(1, 1)].re - 1.0).abs() < 1e-30);
                let bo = &b.omegas[p];
                assert!((bo[(0, 0)].re - alpha * alpha).abs() < 1e-30);
                assert!(bo[(0, 1)].re.abs() < 1e-30 && bo[(1, 1)].re.abs() < 1e-30);
            }
            // 2p variables spanned by p + 1 noise values
            assert_eq!(f.rank_used, vec![2, 3, 4, 5, 6, 7]);
        }
    }

    #[test]
    fn agrees_with_pseudo_inverse_on_rational_models() {
        let m = custom(
            "r",
            vec![
                Symbol::rational(&[1.0], &[1.0, -0.5]).unwrap(),
                Symbol::polynomial(&[1.0, -0.3]).unwrap(),
            ],
        )
        .unwrap();
        let g = autocov_default(&m, 9).unwrap();
        for dir in [Direction::Forward, Direction::Backward] {
            let ext = extended_sweep(&m, 8, dir, 256).unwrap();
            for p in 1..=8 {
                let s = predict(&g, p, dir, DEFAULT_RANK_TOL).unwrap();
                assert!(max_abs(&(&s.error_covariance - &ext.omegas[p - 1])) < 1e-8, "{dir} p={p}");
            }
        }
    }

    #[test]
    fn harmonic_backward_small_windows() {
        // reduced-Gram oracle values at 60 digits
        let s = extended_sweep(&harmonic_example(), 4, Direction::Backward, 400).unwrap();
        let oracle = [0.706_751_445_935_188_4, 0.215_138_902_580_638_44, 0.011_233_049_707_255_371];
        for (p, o) in [1, 2, 4].into_iter().zip(oracle) {
            assert!(((s.traces[p - 1] - o) / o).abs() < 1e-14, "p={p}: {}", s.traces[p - 1]);
        }
        assert!(s.strictly_decreasing());
    }

    #[test]
    fn harmonic_forward_gap() {
        // direct joint-Gram oracle, 300 digits
        let s = extended_sweep(&harmonic_example(), 16, Direction::Forward, 600).unwrap();
        let oracle = [(4, 1.229_464_588_556_683_7e-8_f64), (16, 1.454_616_547_278_568_6e-31)];
        for (p, o) in oracle {
            assert!((s.log10_trace_excess(p, 2.0) - o.log10()).abs() < 1e-12, "p={p}");
        }
        assert!(s.log10_trace_excess(1, 100.0).is_nan());
    }

    #[test]
    fn bad_arguments() {
        let m = ma_example(2.0).unwrap();
        assert!(extended_sweep(&m, 0, Direction::Forward, 128).is_err());
        assert!(extended_sweep(&m, 2, Direction::Forward, 16).is_err());
    }
}

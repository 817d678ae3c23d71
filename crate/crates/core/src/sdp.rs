//! Small primal-dual interior-point solver for semidefinite programs over a
//! block-diagonal cone of complex Hermitian blocks.
//!
//! Primal: `min ⟨C, X⟩  s.t. ⟨A_i, X⟩ = b_i, X ⪰ 0`
//! Dual:   `max bᵀy     s.t. Σ y_i A_i + Z = C, Z ⪰ 0`
//!
//! with `⟨A, X⟩ = Re Tr(A·X)` summed over blocks. Nonnegative scalar
//! variables are 1×1 blocks. Search directions use the HKM scaling with a
//! Mehrotra predictor-corrector step, starting from the infeasible point
//! `X = Z = I, y = 0`. Intended for cones of total size well below ~50.

use crate::error::{Error, Result};
use crate::linalg::{solve_spd, ComplexMatrix, HermitianMatrix, C64};

/// One equality constraint: a list of `(block index, coefficient matrix)`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub terms: Vec<(usize, ComplexMatrix)>,
}

#[derive(Debug, Clone)]
pub struct BlockSdp {
    pub block_sizes: Vec<usize>,
    pub objective: Vec<ComplexMatrix>,
    pub constraints: Vec<Constraint>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SdpOptions {
    /// Bound on both `|pobj − dobj|` and `⟨X, Z⟩`.
    pub gap_tol: f64,
    /// Relative primal and dual residual bound.
    pub feas_tol: f64,
    pub max_iterations: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-10,
            feas_tol: 1e-10,
            max_iterations: 100,
            step_fraction: 0.98,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: Vec<ComplexMatrix>,
    pub y: Vec<f64>,
    pub z: Vec<ComplexMatrix>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub complementarity: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SdpSolution {
    pub fn gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective)
            .abs()
            .max(self.complementarity)
    }
}

type Blocks = Vec<ComplexMatrix>;

impl BlockSdp {
    fn check(&self) -> Result<()> {
        if self.objective.len() != self.block_sizes.len() {
            return Err(Error::InvalidData("objective block count mismatch".into()));
        }
        if self.rhs.len() != self.constraints.len() {
            return Err(Error::InvalidData("rhs length mismatch".into()));
        }
        for (c, &n) in self.objective.iter().zip(&self.block_sizes) {
            if c.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: c.dim(),
                });
            }
        }
        for con in &self.constraints {
            for (b, a) in &con.terms {
                let n = *self
                    .block_sizes
                    .get(*b)
                    .ok_or_else(|| Error::InvalidData(format!("block {b} out of range")))?;
                if a.dim() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: a.dim(),
                    });
                }
            }
        }
        Ok(())
    }

    /// `A(W)_i = Σ_b Re Tr(A_i^b W^b)`; `W` need not be Hermitian.
    fn apply(&self, w: &[ComplexMatrix]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| c.terms.iter().map(|(b, a)| a.re_trace_product(&w[*b])).sum())
            .collect()
    }

    /// `Aᵀ(y) = Σ_i y_i A_i`.
    fn adjoint(&self, y: &[f64]) -> Blocks {
        let mut out: Blocks = self.block_sizes.iter().map(|&n| ComplexMatrix::zeros(n)).collect();
        for (c, &yi) in self.constraints.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for (b, a) in &c.terms {
                out[*b] = &out[*b] + &a.scale_real(yi);
            }
        }
        out
    }

    pub fn solve(&self, opts: &SdpOptions) -> Result<SdpSolution> {
        self.check()?;
        let m = self.constraints.len();
        let n_total: usize = self.block_sizes.iter().sum();
        let mut x: Blocks = self.block_sizes.iter().map(|&n| ComplexMatrix::identity(n)).collect();
        let mut z = x.clone();
        let mut y = vec![0.0; m];

        let b_norm = norm(&self.rhs);
        let c_norm = blocks_norm(&self.objective);

        let mut best: Option<SdpSolution> = None;
        for iter in 0..=opts.max_iterations {
            let ax = self.apply(&x);
            let rp: Vec<f64> = self.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let aty = self.adjoint(&y);
            let rd: Blocks = (0..x.len()).map(|k| &(&self.objective[k] - &z[k]) - &aty[k]).collect();
            let pobj = inner(&self.objective, &x);
            let dobj: f64 = self.rhs.iter().zip(&y).map(|(b, yi)| b * yi).sum();
            let compl = inner(&x, &z);
            let pinf = norm(&rp) / (1.0 + b_norm);
            let dinf = blocks_norm(&rd) / (1.0 + c_norm);

            let current = SdpSolution {
                x: x.clone(),
                y: y.clone(),
                z: z.clone(),
                primal_objective: pobj,
                dual_objective: dobj,
                primal_infeasibility: pinf,
                dual_infeasibility: dinf,
                complementarity: compl,
                iterations: iter,
                converged: false,
            };
            let done = pinf <= opts.feas_tol && dinf <= opts.feas_tol && current.gap() <= opts.gap_tol;
            if done {
                return Ok(SdpSolution {
                    converged: true,
                    ..current
                });
            }
            if best.as_ref().is_none_or(|b| merit(&current) < merit(b)) {
                best = Some(current);
            }
            if iter == opts.max_iterations {
                break;
            }

            let mu = compl / n_total as f64;
            let zinv: Blocks = match z.iter().map(inverse_pd).collect::<Option<Blocks>>() {
                Some(v) => v,
                None => break,
            };

            // Schur complement M_ij = Re Tr(A_i X A_j Z⁻¹).
            let xaz: Vec<Vec<(usize, ComplexMatrix)>> = self
                .constraints
                .iter()
                .map(|c| {
                    c.terms
                        .iter()
                        .map(|(b, a)| (*b, x[*b].matmul_unchecked(a).matmul_unchecked(&zinv[*b])))
                        .collect()
                })
                .collect();
            let mut schur = vec![0.0; m * m];
            for i in 0..m {
                for j in i..m {
                    let mut s = 0.0;
                    for (bi, ai) in &self.constraints[i].terms {
                        for (bj, bmat) in &xaz[j] {
                            if bi == bj {
                                s += ai.re_trace_product(bmat);
                            }
                        }
                    }
                    schur[i * m + j] = s;
                    schur[j * m + i] = s;
                }
            }

            let x_rd_zinv: Blocks = (0..x.len())
                .map(|k| x[k].matmul_unchecked(&rd[k]).matmul_unchecked(&zinv[k]))
                .collect();
            let a_x_rd_zinv = self.apply(&x_rd_zinv);

            // Predictor: Rc Z⁻¹ = −X.
            let neg_x: Blocks = x.iter().map(|xi| -xi).collect();
            let Some((dx_a, _, dz_a)) = self.direction(&schur, &rp, &rd, &a_x_rd_zinv, &neg_x, &x, &zinv) else {
                break;
            };
            let ap = max_step(&x, &dx_a).map_or(1.0, |s| (opts.step_fraction * s).min(1.0));
            let ad = max_step(&z, &dz_a).map_or(1.0, |s| (opts.step_fraction * s).min(1.0));
            let x_trial: Blocks = x.iter().zip(&dx_a).map(|(a, d)| a + &d.scale_real(ap)).collect();
            let z_trial: Blocks = z.iter().zip(&dz_a).map(|(a, d)| a + &d.scale_real(ad)).collect();
            let ratio = (inner(&x_trial, &z_trial) / compl).clamp(0.0, 1.0);
            let sigma = ratio.powi(3);

            // Corrector: Rc Z⁻¹ = σμZ⁻¹ − X − dXa·dZa·Z⁻¹.
            let rc_zinv: Blocks = (0..x.len())
                .map(|k| {
                    let corr = dx_a[k].matmul_unchecked(&dz_a[k]).matmul_unchecked(&zinv[k]);
                    &(&zinv[k].scale_real(sigma * mu) - &x[k]) - &corr
                })
                .collect();
            let Some((dx, dy, dz)) = self.direction(&schur, &rp, &rd, &a_x_rd_zinv, &rc_zinv, &x, &zinv) else {
                break;
            };
            let ap = max_step(&x, &dx).map_or(1.0, |s| (opts.step_fraction * s).min(1.0));
            let ad = max_step(&z, &dz).map_or(1.0, |s| (opts.step_fraction * s).min(1.0));
            for k in 0..x.len() {
                x[k] = (&x[k] + &dx[k].scale_real(ap)).hermitian_part();
                z[k] = (&z[k] + &dz[k].scale_real(ad)).hermitian_part();
            }
            for (yi, d) in y.iter_mut().zip(&dy) {
                *yi += ad * d;
            }
        }

        // Not converged: hand back the best iterate and let the caller decide.
        Ok(best.expect("at least one iterate"))
    }

    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        schur: &[f64],
        rp: &[f64],
        rd: &[ComplexMatrix],
        a_x_rd_zinv: &[f64],
        rc_zinv: &[ComplexMatrix],
        x: &[ComplexMatrix],
        zinv: &[ComplexMatrix],
    ) -> Option<(Blocks, Vec<f64>, Blocks)> {
        let a_rc = self.apply(rc_zinv);
        let rhs: Vec<f64> = (0..rp.len()).map(|i| rp[i] - a_rc[i] + a_x_rd_zinv[i]).collect();
        let dy = solve_spd(schur, &rhs)?;
        let aty = self.adjoint(&dy);
        let dz: Blocks = rd.iter().zip(&aty).map(|(r, a)| r - a).collect();
        let dx: Blocks = (0..x.len())
            .map(|k| {
                let t = x[k].matmul_unchecked(&dz[k]).matmul_unchecked(&zinv[k]);
                (&rc_zinv[k] - &t).hermitian_part()
            })
            .collect();
        Some((dx, dy, dz))
    }
}

fn merit(s: &SdpSolution) -> f64 {
    s.gap().max(s.primal_infeasibility).max(s.dual_infeasibility)
}

fn inner(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re_trace_product(y)).sum()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn blocks_norm(v: &[ComplexMatrix]) -> f64 {
    v.iter().map(|m| m.frobenius_norm().powi(2)).sum::<f64>().sqrt()
}

fn inverse_pd(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    if m.dim() == 1 {
        let v = m[(0, 0)].re;
        return (v > 0.0).then(|| ComplexMatrix::from_real_diagonal(&[1.0 / v]));
    }
    let eig = HermitianMatrix::new_unchecked(m.clone()).eigh().ok()?;
    if eig.min() <= 0.0 {
        return None;
    }
    Some(eig.reconstruct_with(|l| 1.0 / l).into_matrix())
}

/// Largest `α` with `X + α·dX ⪰ 0` over all blocks; `None` if unbounded.
fn max_step(x: &[ComplexMatrix], dx: &[ComplexMatrix]) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.iter().zip(dx) {
        let lam_min = if xb.dim() == 1 {
            db[(0, 0)].re / xb[(0, 0)].re
        } else {
            let Ok(eig) = HermitianMatrix::new_unchecked(xb.clone()).eigh() else {
                return Some(0.0);
            };
            let inv_sqrt = eig.reconstruct_with(|l| 1.0 / l.max(1e-300).sqrt()).into_matrix();
            let s = inv_sqrt.matmul_unchecked(db).matmul_unchecked(&inv_sqrt);
            match HermitianMatrix::new_unchecked(s).eigh() {
                Ok(e) => e.min(),
                Err(_) => return Some(0.0),
            }
        };
        if lam_min < 0.0 {
            alpha = alpha.min(-1.0 / lam_min);
        }
    }
    alpha.is_finite().then_some(alpha)
}

/// Orthonormal basis of the `d²`-dimensional real space of `d×d` Hermitian
/// matrices under `Re Tr(A·B)`: diagonal units, then for each `j < k` the
/// symmetric `(|j⟩⟨k| + |k⟩⟨j|)/√2` and antisymmetric `i(|j⟩⟨k| − |k⟩⟨j|)/√2`.
pub fn hermitian_basis(d: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        out.push(ComplexMatrix::unit(d, j, j));
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in (j + 1)..d {
            let mut s = ComplexMatrix::zeros(d);
            s[(j, k)] = C64::new(r, 0.0);
            s[(k, j)] = C64::new(r, 0.0);
            out.push(s);
            let mut a = ComplexMatrix::zeros(d);
            a[(j, k)] = C64::new(0.0, r);
            a[(k, j)] = C64::new(0.0, -r);
            out.push(a);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[v])
    }

    #[test]
    fn basis_is_orthonormal() {
        let basis = hermitian_basis(3);
        assert_eq!(basis.len(), 9);
        for (i, a) in basis.iter().enumerate() {
            assert_eq!(a.hermiticity_defect(), 0.0);
            for (j, b) in basis.iter().enumerate() {
                let ip = a.re_trace_product(b);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-15, "({i},{j}) -> {ip}");
            }
        }
    }

    #[test]
    fn linear_program_in_scalar_blocks() {
        // min x0 + 2 x1  s.t. x0 + x1 = 1, x ≥ 0  → x = (1, 0), value 1.
        let sdp = BlockSdp {
            block_sizes: vec![1, 1],
            objective: vec![scalar(1.0), scalar(2.0)],
            constraints: vec![Constraint {
                terms: vec![(0, scalar(1.0)), (1, scalar(1.0))],
            }],
            rhs: vec![1.0],
        };
        let sol = sdp.solve(&SdpOptions::default()).unwrap();
        assert!(sol.converged);
        assert!((sol.primal_objective - 1.0).abs() < 1e-9);
        assert!((sol.x[0][(0, 0)].re - 1.0).abs() < 1e-8);
        assert!((sol.y[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn minimum_eigenvalue_as_sdp() {
        // min Tr(C X) s.t. Tr X = 1, X ⪰ 0 has value λ_min(C).
        let mut c = ComplexMatrix::from_real_diagonal(&[2.0, 1.0, 3.0]);
        c[(0, 1)] = C64::new(0.5, -0.7);
        c[(1, 0)] = C64::new(0.5, 0.7);
        c[(1, 2)] = C64::new(0.0, 0.3);
        c[(2, 1)] = C64::new(0.0, -0.3);
        let expected = HermitianMatrix::new(c.clone()).unwrap().eigh().unwrap().min();
        let sdp = BlockSdp {
            block_sizes: vec![3],
            objective: vec![c],
            constraints: vec![Constraint {
                terms: vec![(0, ComplexMatrix::identity(3))],
            }],
            rhs: vec![1.0],
        };
        let sol = sdp.solve(&SdpOptions::default()).unwrap();
        assert!(sol.converged);
        assert!((sol.primal_objective - expected).abs() < 1e-9);
        assert!((sol.dual_objective - expected).abs() < 1e-9);
    }

    #[test]
    fn rejects_malformed_problem() {
        let sdp = BlockSdp {
            block_sizes: vec![2],
            objective: vec![ComplexMatrix::identity(3)],
            constraints: vec![],
            rhs: vec![],
        };
        assert!(sdp.solve(&SdpOptions::default()).is_err());
    }
}

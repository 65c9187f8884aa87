//! Dressed-state ladder of the excitation-conserving Hamiltonian.
//!
//! Energies are measured from the vacuum `|0, ↑⟩`, whose bare energy is −Δa.

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Basis, Spin};
use crate::model::{hamiltonian, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Lower,
    Upper,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Lower => -1.0,
            Branch::Upper => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedLevel {
    pub n: usize,
    pub branch: Branch,
    pub energy: f64,
    pub splitting: f64,
}

/// `(Δ_{n,−}, Δ_{n,+})` with `Δ_{n,±} = [nU₀ ± √(n²U₀² + 4ng²)]/2`.
pub fn dressed_splitting(n: usize, g: f64, u0: f64) -> Result<(f64, f64)> {
    if n < 1 {
        return Err(Error::InvalidArgument("excitation number must be at least 1".into()));
    }
    let nf = n as f64;
    let root = (nf * nf * u0 * u0 + 4.0 * nf * g * g).sqrt();
    Ok(((nf * u0 - root) / 2.0, (nf * u0 + root) / 2.0))
}

/// `(E_{n−}, E_{n+})` with `E_{n±} = nΔc + Δ_{n,±}`; requires Δa = Δc.
pub fn dressed_energy(n: usize, params: &SystemParams) -> Result<(f64, f64)> {
    if !params.detunings_tied() {
        return Err(Error::UnsupportedConfiguration(format!(
            "closed-form ladder requires delta_a = delta_c (got {} and {})",
            params.two_photon_detuning(),
            params.delta_c
        )));
    }
    let (lo, hi) = dressed_splitting(n, params.g, params.u0)?;
    let shift = n as f64 * params.delta_c;
    Ok((shift + lo, shift + hi))
}

/// Both dressed levels of the n-th pair.
pub fn dressed_levels(n: usize, params: &SystemParams) -> Result<[DressedLevel; 2]> {
    let (s_lo, s_hi) = dressed_splitting(n, params.g, params.u0)?;
    let (e_lo, e_hi) = dressed_energy(n, params)?;
    Ok([
        DressedLevel { n, branch: Branch::Lower, energy: e_lo, splitting: s_lo },
        DressedLevel { n, branch: Branch::Upper, energy: e_hi, splitting: s_hi },
    ])
}

/// Cavity detuning `Δc = −Δ_{1,branch}` that puts the drive on the
/// single-photon resonance; positive for the lower branch when g ≠ 0.
pub fn resonance_detuning(branch: Branch, params: &SystemParams) -> f64 {
    let (lo, hi) = dressed_splitting(1, params.g, params.u0).expect("n = 1 is valid");
    match branch {
        Branch::Lower => -lo,
        Branch::Upper => -hi,
    }
}

/// One invariant block of the excitation-conserving Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationBlock {
    pub excitations: usize,
    pub states: Vec<(usize, Spin)>,
    /// Ascending, relative to the vacuum energy.
    pub eigenvalues: Vec<f64>,
    /// False for the single state left over by the truncation.
    pub complete: bool,
}

/// Eigenvalues of every excitation block `{|n, ↑⟩, |n−1, ↓⟩}`.
///
/// Block 0 is the vacuum `|0, ↑⟩`; the last block is `|n_max, ↓⟩`, whose
/// partner lies above the truncation.
pub fn numeric_spectrum(params: &SystemParams, basis: Basis) -> Result<Vec<ExcitationBlock>> {
    if params.eta != 0.0 || params.omega_m != 0.0 {
        return Err(Error::UnsupportedConfiguration(
            "numeric spectrum requires eta = 0 and omega_m = 0".into(),
        ));
    }
    let h = hamiltonian(params, basis);
    let vacuum = h.element((0, Spin::Up), (0, Spin::Up)).re;
    let n_max = basis.n_max();

    let mut blocks = Vec::with_capacity(n_max + 2);
    for excitations in 0..=n_max + 1 {
        let mut states = Vec::with_capacity(2);
        if excitations <= n_max {
            states.push((excitations, Spin::Up));
        }
        if excitations >= 1 {
            states.push((excitations - 1, Spin::Down));
        }
        let k = states.len();
        let m = Mat::<Complex64>::from_fn(k, k, |i, j| h.element(states[i], states[j]));
        let mut eigenvalues: Vec<f64> = m
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::UnsupportedConfiguration(format!("eigensolver failed: {e:?}")))?
            .into_iter()
            .map(|e| e - vacuum)
            .collect();
        eigenvalues.sort_by(f64::total_cmp);
        let complete = excitations == 0 || k == 2;
        blocks.push(ExcitationBlock { excitations, states, eigenvalues, complete });
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn params(g: f64, u0: f64, delta_c: f64) -> SystemParams {
        SystemParams { g, u0, delta_c, eta: 0.0, omega_m: 0.0, ..Default::default() }
    }

    #[test]
    fn splitting_examples() {
        assert_eq!(dressed_splitting(1, 1.0, 0.0).unwrap(), (-1.0, 1.0));
        let (lo, hi) = dressed_splitting(1, 1.0, -5.0).unwrap();
        assert!(close(lo, -5.19258, 5e-6) && close(hi, 0.19258, 5e-6));
        let (lo, _) = dressed_splitting(1, 0.38, -1.9).unwrap();
        assert!(close(lo, -1.9732, 5e-5));
        assert!(close(lo.abs(), 1.97, 5e-3));
        assert!(matches!(dressed_splitting(0, 1.0, 0.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn energy_examples() {
        let (lo, hi) = dressed_energy(1, &params(1.0, 0.0, 0.0)).unwrap();
        assert!(close(lo, -1.0, 1e-15) && close(hi, 1.0, 1e-15));
        let (lo, hi) = dressed_energy(2, &params(1.0, 0.0, 0.0)).unwrap();
        assert!(close(lo, -2f64.sqrt(), 1e-15) && close(hi, 2f64.sqrt(), 1e-15));
        // 2·1 + 2·(−2)/2 ± √(4·4 + 8)/2
        let (lo, hi) = dressed_energy(2, &params(1.0, -2.0, 1.0)).unwrap();
        assert!(close(lo, -2.44949, 5e-6) && close(hi, 2.44949, 5e-6));

        let untied = SystemParams { delta_a: Some(0.5), ..params(1.0, 0.0, 0.0) };
        assert!(matches!(dressed_energy(1, &untied), Err(Error::UnsupportedConfiguration(_))));
    }

    #[test]
    fn level_records() {
        let p = params(1.0, -2.0, 1.0);
        let [lo, hi] = dressed_levels(2, &p).unwrap();
        assert_eq!(lo.branch, Branch::Lower);
        assert!(hi.splitting >= lo.splitting);
        assert!(close(lo.energy, 2.0 * p.delta_c + lo.splitting, 1e-14));
    }

    #[test]
    fn resonance_examples() {
        assert!(close(resonance_detuning(Branch::Lower, &params(1.0, 0.0, 0.0)), 1.0, 1e-15));
        assert!(close(resonance_detuning(Branch::Lower, &params(1.0, -5.0, 0.0)), 5.19258, 5e-6));
        assert!(close(resonance_detuning(Branch::Upper, &params(1.0, -5.0, 0.0)), -0.19258, 5e-6));
    }

    #[test]
    fn jc_block() {
        let basis = Basis::new(4).unwrap();
        let blocks = numeric_spectrum(&params(1.0, 0.0, 0.0), basis).unwrap();
        let one = &blocks[1];
        assert_eq!(one.states, vec![(1, Spin::Up), (0, Spin::Down)]);
        assert!(close(one.eigenvalues[0], -1.0, 1e-12) && close(one.eigenvalues[1], 1.0, 1e-12));
        assert_eq!(blocks[0].eigenvalues, vec![0.0]);
        let last = blocks.last().unwrap();
        assert!(!last.complete);
        assert_eq!(last.states, vec![(4, Spin::Down)]);
    }

    #[test]
    fn uncoupled_spectrum_is_diagonal() {
        let basis = Basis::new(3).unwrap();
        let p = params(0.0, -0.7, 0.4);
        let blocks = numeric_spectrum(&p, basis).unwrap();
        for block in &blocks[1..] {
            let mut bare: Vec<f64> = block
                .states
                .iter()
                .map(|&(n, s)| match s {
                    Spin::Up => n as f64 * (p.delta_c + p.u0),
                    Spin::Down => n as f64 * p.delta_c + p.delta_c,
                })
                .collect();
            bare.sort_by(f64::total_cmp);
            for (a, b) in block.eigenvalues.iter().zip(&bare) {
                assert!(close(*a, *b, 1e-12));
            }
        }
    }

    #[test]
    fn driven_system_rejected() {
        let basis = Basis::new(2).unwrap();
        let p = SystemParams { eta: 0.1, ..params(1.0, 0.0, 0.0) };
        assert!(matches!(numeric_spectrum(&p, basis), Err(Error::UnsupportedConfiguration(_))));
    }

    #[test]
    fn mirror_symmetry() {
        for n in 1..6 {
            let (lo, hi) = dressed_splitting(n, 0.7, 2.3).unwrap();
            let (mlo, mhi) = dressed_splitting(n, 0.7, -2.3).unwrap();
            assert!(close(mlo, -hi, 1e-13) && close(mhi, -lo, 1e-13));
        }
    }

    #[test]
    fn gap_grows_with_stark_shift_and_excitations() {
        let gap = |n, u0| {
            let (lo, hi) = dressed_splitting(n, 0.5, u0).unwrap();
            hi - lo
        };
        for n in 1..6 {
            assert!(close(gap(n, -3.0), ((n * n) as f64 * 9.0 + 4.0 * n as f64 * 0.25).sqrt(), 1e-12));
            assert!(gap(n, -3.0) > gap(n, -1.0));
            assert!(gap(n + 1, -1.0) > gap(n, -1.0));
        }
    }
}

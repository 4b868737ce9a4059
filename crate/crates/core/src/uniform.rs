//! Closed-form machinery for uniform rotating-wave chains with a common
//! thermal rate `ζ` on every site.
//!
//! In the sine-transform mode basis the drift is `−ζ/2 ± iν_m` and the
//! covariance splits into Hadamard products of the rotated drive `O𝐷O`
//! with the kernel `L_jk = ∫ e^{−[ζ + i(ν_j − ν_k)]s} ds`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::SpectralPair;
use crate::model::{ChainEnd, System};
use crate::{CMat, RMat};

#[derive(Clone, Debug)]
pub struct UniformChain {
    pub n: usize,
    pub omega: f64,
    pub coupling: f64,
    pub zeta: f64,
    pub hbar: f64,
    pub spectral: SpectralPair,
    /// Diagonal of `𝐷 = ħ Diag(ζ N̄_k + δ_{k1} ζ_A N̄_A + δ_{kn} ζ_B N̄_B)`.
    pub drive: Vec<f64>,
}

impl UniformChain {
    /// Requires uniform hopping, one common thermal rate, no dephasing.
    /// `ζ = 0` is accepted (the all-diffusive chain).
    pub fn from_system(sys: &System) -> Result<Self> {
        let coupling = sys
            .chain
            .uniform_coupling()
            .ok_or_else(|| Error::NotApplicable("closed form needs uniform hopping".into()))?;
        let zeta = sys
            .bank
            .uniform_rate()
            .ok_or_else(|| Error::NotApplicable("closed form needs one common thermal rate".into()))?;
        if sys.bank.has_dephasing() {
            return Err(Error::NotApplicable("closed form excludes dephasing".into()));
        }
        let n = sys.n();
        let hbar = sys.chain.hbar;
        let mut drive: Vec<f64> = sys.bank.thermal.iter().map(|b| hbar * b.rate * b.nbar).collect();
        drive[0] += hbar * sys.bank.diffusive_drive(ChainEnd::A);
        drive[n - 1] += hbar * sys.bank.diffusive_drive(ChainEnd::B);
        Ok(UniformChain {
            n,
            omega: sys.chain.omega,
            coupling,
            zeta,
            hbar,
            spectral: SpectralPair::uniform_chain(n, sys.chain.omega, coupling)?,
            drive,
        })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.spectral.frequencies
    }

    /// `O 𝐷 O`.
    pub fn mode_drive(&self) -> RMat {
        let o = &self.spectral.transform;
        let scaled = RMat::from_fn(self.n, self.n, |j, k| self.drive[j] * o[(j, k)]);
        o * scaled
    }

    /// `(O⊕O) [[M∘Re K, −M∘Im K], [M∘Im K, M∘Re K]] (O⊕O)` with `M = O𝐷O`.
    pub fn hadamard_blocks(&self, kernel: &CMat) -> RMat {
        let m = self.mode_drive();
        let re = m.zip_map(kernel, |a, z| a * z.re);
        let im = m.zip_map(kernel, |a, z| a * z.im);
        let o = &self.spectral.transform;
        let re = o * re * o;
        let im = o * im * o;
        let n = self.n;
        let mut out = RMat::zeros(2 * n, 2 * n);
        out.view_mut((0, 0), (n, n)).copy_from(&re);
        out.view_mut((n, n), (n, n)).copy_from(&re);
        out.view_mut((0, n), (n, n)).copy_from(&(-&im));
        out.view_mut((n, 0), (n, n)).copy_from(&im);
        out
    }

    /// `e^{Γt} = e^{−ζt/2} [[cos Ht, sin Ht], [−sin Ht, cos Ht]]`.
    pub fn exp_drift(&self, t: f64) -> RMat {
        let n = self.n;
        let o = &self.spectral.transform;
        let damp = (-0.5 * self.zeta * t).exp();
        let (s, c): (Vec<f64>, Vec<f64>) = self.spectral.frequencies.iter().map(|nu| (nu * t).sin_cos()).unzip();
        let cos = o * RMat::from_fn(n, n, |j, k| c[j] * o[(j, k)]) * damp;
        let sin = o * RMat::from_fn(n, n, |j, k| s[j] * o[(j, k)]) * damp;
        let mut out = RMat::zeros(2 * n, 2 * n);
        out.view_mut((0, 0), (n, n)).copy_from(&cos);
        out.view_mut((n, n), (n, n)).copy_from(&cos);
        out.view_mut((0, n), (n, n)).copy_from(&sin);
        out.view_mut((n, 0), (n, n)).copy_from(&(-sin));
        out
    }

    pub fn kernel(&self, t: Option<f64>) -> CMat {
        let nu = &self.spectral.frequencies;
        CMat::from_fn(self.n, self.n, |j, k| {
            let s = Complex64::new(self.zeta, nu[j] - nu[k]);
            match t {
                Some(t) => decay_integral(s, t),
                None => s.inv(),
            }
        })
    }
}

/// `(1 − e^{−st})/s`, continuous through `s = 0` where it equals `t`.
pub fn decay_integral(s: Complex64, t: f64) -> Complex64 {
    let z = s * t;
    if z.norm() < 1e-2 {
        // t Σ (−z)^k/(k+1)!
        let mut term = Complex64::new(t, 0.0);
        let mut sum = term;
        for k in 1..10 {
            term *= -z / (k as f64 + 1.0);
            sum += term;
        }
        sum
    } else {
        (Complex64::new(1.0, 0.0) - (-z).exp()) / s
    }
}

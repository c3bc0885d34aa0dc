//! Product-operator time series for the validation experiments, and the
//! data-reduction pipeline: synthetic spectra from component coefficients,
//! FID synthesis with DFT window extraction, and linear least-squares
//! component fitting with Lorentzian model peaks.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gates::{variant_hamiltonian, HamiltonianVariant};
use crate::hamiltonian::{RfPulse, SpinSystem};
use crate::operator::{basis_op, decompose, expm_hermitian, Axis, OpLabel, Operator4, Spin};

/// The three validation experiments plus free parameter choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetId {
    I,
    II,
    III,
    Custom,
}

/// A pulse-and-sampling recipe for one simulated experiment.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExperimentPreset {
    pub id: PresetId,
    pub pulse: RfPulse,
    /// Latest sampled time (seconds); points run t_max/n .. t_max.
    pub t_max: f64,
    pub n_points: usize,
    pub variant: HamiltonianVariant,
}

impl ExperimentPreset {
    /// (i) on-resonance, omega1 = pi |J|, t_max = sqrt(2)/|J|.
    pub fn i(sys: &SpinSystem, variant: HamiltonianVariant) -> Self {
        let omega1 = PI * sys.j_hz.abs();
        let t_max = 2.0f64.sqrt() / sys.j_hz.abs();
        ExperimentPreset {
            id: PresetId::I,
            pulse: RfPulse::on_resonance_a(omega1, t_max),
            t_max,
            n_points: 16,
            variant,
        }
    }

    /// (ii) on-transition, omega1 = 2 pi |J|, t_max = 1/|J|.
    pub fn ii(sys: &SpinSystem, variant: HamiltonianVariant) -> Self {
        let omega1 = 2.0 * PI * sys.j_hz.abs();
        let t_max = 1.0 / sys.j_hz.abs();
        ExperimentPreset {
            id: PresetId::II,
            pulse: RfPulse::on_transition_a_minus(omega1, t_max),
            t_max,
            n_points: 16,
            variant,
        }
    }

    /// (iii) on-transition at fixed low power omega1 = 4 pi rad/s,
    /// t_max = 0.5 s.
    pub fn iii(_sys: &SpinSystem, variant: HamiltonianVariant) -> Self {
        let omega1 = 4.0 * PI;
        let t_max = 0.5;
        ExperimentPreset {
            id: PresetId::III,
            pulse: RfPulse::on_transition_a_minus(omega1, t_max),
            t_max,
            n_points: 16,
            variant,
        }
    }

    pub fn custom(pulse: RfPulse, t_max: f64, n_points: usize, variant: HamiltonianVariant) -> Self {
        ExperimentPreset { id: PresetId::Custom, pulse, t_max, n_points, variant }
    }

    pub fn validate(&self) -> Result<()> {
        self.pulse.validate()?;
        if self.t_max <= 0.0 || self.n_points == 0 {
            return Err(Error::InvalidParameter(
                "t_max must be > 0 and n_points >= 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// The observable product-operator components tracked by the experiments.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ObservableComponents {
    #[serde(rename = "Ix_A")]
    pub ix_a: f64,
    #[serde(rename = "Iy_A")]
    pub iy_a: f64,
    #[serde(rename = "2IxIz")]
    pub two_ix_iz: f64,
    #[serde(rename = "2IyIz")]
    pub two_iy_iz: f64,
    #[serde(rename = "Iz_A")]
    pub iz_a: f64,
    #[serde(rename = "2IzIz")]
    pub two_iz_iz: f64,
}

pub const SERIES_COLUMNS: [&str; 6] = ["Ix_A", "Iy_A", "2IxIz", "2IyIz", "Iz_A", "2IzIz"];

/// Run metadata echoed into every emitted series file.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub preset: PresetId,
    pub variant: HamiltonianVariant,
    pub omega1: f64,
    pub t_max: f64,
    pub n_points: usize,
    pub j_hz: f64,
    pub delta_omega: f64,
}

/// Simulated component trajectories, normalized so the Iz_A coefficient of
/// the initial state is 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeSeries {
    pub meta: SeriesMeta,
    pub times: Vec<f64>,
    pub components: Vec<ObservableComponents>,
}

/// Deviation density operator of the equilibrium state: Iz_A + Iz_B (the
/// high-temperature identity part is dropped throughout).
pub fn equilibrium_state() -> Operator4 {
    basis_op(OpLabel::Single(Spin::A, Axis::Z)) + basis_op(OpLabel::Single(Spin::B, Axis::Z))
}

/// Evolve the equilibrium state and extract the observable components at the
/// preset's sample times.
pub fn simulate_series(sys: &SpinSystem, preset: &ExperimentPreset) -> Result<TimeSeries> {
    preset.validate()?;
    let h = variant_hamiltonian(sys, &preset.pulse, preset.variant);
    let rho0 = equilibrium_state();
    let norm0 = decompose(&rho0).get(OpLabel::Single(Spin::A, Axis::Z)).re;

    let mut times = Vec::with_capacity(preset.n_points);
    let mut components = Vec::with_capacity(preset.n_points);
    for k in 1..=preset.n_points {
        let t = preset.t_max * (k as f64) / (preset.n_points as f64);
        let u = expm_hermitian(&h, t)?;
        let rho = u * rho0 * u.adjoint();
        let c = decompose(&rho);
        components.push(ObservableComponents {
            ix_a: c.get(OpLabel::Single(Spin::A, Axis::X)).re / norm0,
            iy_a: c.get(OpLabel::Single(Spin::A, Axis::Y)).re / norm0,
            two_ix_iz: c.get(OpLabel::Two(Axis::X, Axis::Z)).re / norm0,
            two_iy_iz: c.get(OpLabel::Two(Axis::Y, Axis::Z)).re / norm0,
            iz_a: c.get(OpLabel::Single(Spin::A, Axis::Z)).re / norm0,
            two_iz_iz: c.get(OpLabel::Two(Axis::Z, Axis::Z)).re / norm0,
        });
        times.push(t);
    }
    Ok(TimeSeries {
        meta: SeriesMeta {
            preset: preset.id,
            variant: preset.variant,
            omega1: preset.pulse.omega1,
            t_max: preset.t_max,
            n_points: preset.n_points,
            j_hz: sys.j_hz,
            delta_omega: sys.delta_omega(),
        },
        times,
        components,
    })
}

/// Lorentzian doublet model for spectrum synthesis and fitting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumModel {
    pub j_hz: f64,
    /// Half-width at half-maximum (Hz); the FID decay rate is 2 pi times this.
    pub half_width_hz: f64,
    /// Doublet center offset (Hz); lines sit at center -+ J/2.
    pub center_hz: f64,
    /// Frequency samples (Hz), strictly increasing.
    pub grid: Vec<f64>,
}

impl SpectrumModel {
    /// Evenly spaced window of `n` points centered on the doublet.
    pub fn window(j_hz: f64, half_width_hz: f64, center_hz: f64, n: usize, spacing_hz: f64) -> Self {
        let half = (n as f64 - 1.0) / 2.0;
        let grid = (0..n).map(|k| center_hz + (k as f64 - half) * spacing_hz).collect();
        SpectrumModel { j_hz, half_width_hz, center_hz, grid }
    }

    /// Window of `n` points on the exact DFT grid of an acquisition with the
    /// given dwell time and transform length, centered on the doublet.
    pub fn from_dft_grid(
        j_hz: f64,
        half_width_hz: f64,
        center_hz: f64,
        n: usize,
        dwell: f64,
        n_total: usize,
    ) -> Self {
        let df = 1.0 / (dwell * n_total as f64);
        let k_center = (center_hz / df).round() as i64;
        let half = (n as i64) / 2;
        let grid = (0..n as i64)
            .map(|k| (k_center - half + k) as f64 * df)
            .collect();
        SpectrumModel { j_hz, half_width_hz, center_hz, grid }
    }

    pub fn validate(&self) -> Result<()> {
        if self.half_width_hz <= 0.0 {
            return Err(Error::InvalidParameter("half_width must be > 0".to_string()));
        }
        if self.grid.len() < 2 || self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "grid must be strictly increasing with >= 2 points".to_string(),
            ));
        }
        Ok(())
    }

    /// Complex Lorentzian line of unit peak height at nu0: absorptive real
    /// part w^2/(w^2 + d^2), dispersive imaginary part w d/(w^2 + d^2).
    fn line(&self, nu: f64, nu0: f64) -> C64 {
        let w = self.half_width_hz;
        let d = nu - nu0;
        let denom = w * w + d * d;
        C64::new(w * w / denom, w * d / denom)
    }

    /// In-phase doublet shape: sum of the two lines.
    fn shape_inphase(&self, nu: f64) -> C64 {
        self.line(nu, self.center_hz - self.j_hz / 2.0) + self.line(nu, self.center_hz + self.j_hz / 2.0)
    }

    /// Anti-phase doublet shape: partner-up line minus partner-down line.
    fn shape_antiphase(&self, nu: f64) -> C64 {
        self.line(nu, self.center_hz - self.j_hz / 2.0) - self.line(nu, self.center_hz + self.j_hz / 2.0)
    }
}

/// Transverse-component amplitudes feeding the spectrum model, in the order
/// the experiments report them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentAmplitudes {
    /// Ix_A: absorptive in-phase.
    pub absorptive_inphase: f64,
    /// 2 Ix_A Iz_B: absorptive anti-phase.
    pub absorptive_antiphase: f64,
    /// 2 Iy_A Iz_B: dispersive anti-phase.
    pub dispersive_antiphase: f64,
    /// Iy_A: dispersive in-phase.
    pub dispersive_inphase: f64,
}

impl From<&ObservableComponents> for ComponentAmplitudes {
    fn from(c: &ObservableComponents) -> Self {
        ComponentAmplitudes {
            absorptive_inphase: c.ix_a,
            absorptive_antiphase: c.two_ix_iz,
            dispersive_antiphase: c.two_iy_iz,
            dispersive_inphase: c.iy_a,
        }
    }
}

/// Least-squares component estimates and the leftover misfit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitResult {
    pub absorptive_inphase: f64,
    pub absorptive_antiphase: f64,
    pub dispersive_antiphase: f64,
    pub dispersive_inphase: f64,
    pub residual_norm: f64,
}

impl FitResult {
    pub fn amplitudes(&self) -> ComponentAmplitudes {
        ComponentAmplitudes {
            absorptive_inphase: self.absorptive_inphase,
            absorptive_antiphase: self.absorptive_antiphase,
            dispersive_antiphase: self.dispersive_antiphase,
            dispersive_inphase: self.dispersive_inphase,
        }
    }
}

/// Complex spectrum window of the four-component model: the x-components
/// enter through the doublet shapes directly, the y-components through the
/// same shapes rotated 90 degrees in the complex plane.
pub fn synth_window(amps: &ComponentAmplitudes, model: &SpectrumModel) -> Result<Vec<C64>> {
    model.validate()?;
    let cx = C64::new(amps.absorptive_inphase, amps.dispersive_inphase);
    let cax = C64::new(amps.absorptive_antiphase, amps.dispersive_antiphase);
    Ok(model
        .grid
        .iter()
        .map(|&nu| cx * model.shape_inphase(nu) + cax * model.shape_antiphase(nu))
        .collect())
}

/// Linear least squares of the four model shapes against a complex window,
/// solved over the stacked real and imaginary parts.
pub fn fit_components(window: &[C64], model: &SpectrumModel) -> Result<FitResult> {
    model.validate()?;
    if window.len() != model.grid.len() {
        return Err(Error::GridMismatch(format!(
            "window has {} points, model grid {}",
            window.len(),
            model.grid.len()
        )));
    }
    let n = window.len();
    let i = C64::new(0.0, 1.0);
    // columns: absorptive in-phase, absorptive anti-phase,
    //          dispersive anti-phase, dispersive in-phase
    let cols: Vec<Vec<C64>> = vec![
        model.grid.iter().map(|&nu| model.shape_inphase(nu)).collect(),
        model.grid.iter().map(|&nu| model.shape_antiphase(nu)).collect(),
        model.grid.iter().map(|&nu| i * model.shape_antiphase(nu)).collect(),
        model.grid.iter().map(|&nu| i * model.shape_inphase(nu)).collect(),
    ];

    let mut a = nalgebra::DMatrix::<f64>::zeros(2 * n, 4);
    let mut b = nalgebra::DVector::<f64>::zeros(2 * n);
    for r in 0..n {
        for c in 0..4 {
            a[(r, c)] = cols[c][r].re;
            a[(n + r, c)] = cols[c][r].im;
        }
        b[r] = window[r].re;
        b[n + r] = window[r].im;
    }

    let svd = nalgebra::SVD::new(a.clone(), true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin > 1e-10 * smax && smax > 0.0) {
        return Err(Error::RankDeficient(format!(
            "singular values span [{smin:.3e}, {smax:.3e}]; are the doublet lines distinct (J != 0)?"
        )));
    }
    let x = svd.solve(&b, 1e-12).map_err(|e| Error::RankDeficient(e.to_string()))?;
    let residual = (&a * &x - &b).norm();
    Ok(FitResult {
        absorptive_inphase: x[0],
        absorptive_antiphase: x[1],
        dispersive_antiphase: x[2],
        dispersive_inphase: x[3],
        residual_norm: residual,
    })
}

/// Time-domain signal of the doublet: two damped complex exponentials with
/// decay rate 2 pi half_width, sampled at `dwell` spacing starting at t = 0.
pub fn synth_fid(
    amps: &ComponentAmplitudes,
    model: &SpectrumModel,
    n_samples: usize,
    dwell: f64,
) -> Result<Vec<C64>> {
    model.validate()?;
    if n_samples == 0 || dwell <= 0.0 {
        return Err(Error::InvalidParameter(
            "n_samples must be >= 1 and dwell > 0".to_string(),
        ));
    }
    let cx = C64::new(amps.absorptive_inphase, amps.dispersive_inphase);
    let cax = C64::new(amps.absorptive_antiphase, amps.dispersive_antiphase);
    let amp_up = cx + cax; // line at center - J/2
    let amp_down = cx - cax; // line at center + J/2
    let nu_up = model.center_hz - model.j_hz / 2.0;
    let nu_down = model.center_hz + model.j_hz / 2.0;
    let rate = 2.0 * PI * model.half_width_hz;
    Ok((0..n_samples)
        .map(|k| {
            let t = k as f64 * dwell;
            let osc = |nu: f64| C64::new(0.0, 2.0 * PI * nu * t).exp() * (-rate * t).exp();
            amp_up * osc(nu_up) + amp_down * osc(nu_down)
        })
        .collect())
}

/// Zero-fill, Fourier transform, and extract the model-grid window from an
/// FID, scaled so a unit-amplitude line has unit peak height (matching
/// [`synth_window`]).
pub fn fid_spectrum_window(
    fid: &[C64],
    zero_fill: usize,
    dwell: f64,
    model: &SpectrumModel,
) -> Result<Vec<C64>> {
    model.validate()?;
    if zero_fill < fid.len() {
        return Err(Error::InvalidParameter(
            "zero_fill length must be >= the FID length".to_string(),
        ));
    }
    let n = zero_fill;
    let mut buf: Vec<rustfft::num_complex::Complex<f64>> =
        fid.iter().map(|z| rustfft::num_complex::Complex::new(z.re, z.im)).collect();
    buf.resize(n, rustfft::num_complex::Complex::new(0.0, 0.0));
    // conjugate trick: forward FFT computes sum s_n exp(-2 pi i k n / N),
    // which is exactly the spectrum at nu_k = k/(N dwell)
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let df = 1.0 / (dwell * n as f64);
    let scale = dwell * 2.0 * PI * model.half_width_hz;
    let mut out = Vec::with_capacity(model.grid.len());
    for &nu in &model.grid {
        let k_float = nu / df;
        let k = k_float.round();
        if (k_float - k).abs() > 1e-6 {
            return Err(Error::GridMismatch(format!(
                "model grid point {nu} Hz does not lie on the DFT grid (spacing {df} Hz)"
            )));
        }
        let idx = ((k as i64).rem_euclid(n as i64)) as usize;
        out.push(C64::new(buf[idx].re, buf[idx].im) * scale);
    }
    Ok(out)
}

impl TimeSeries {
    /// CSV body with `# key = value` metadata header lines; numbers carry 17
    /// significant digits so files round-trip doubles exactly.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# preset = {:?}\n", self.meta.preset));
        s.push_str(&format!("# variant = {:?}\n", self.meta.variant));
        s.push_str(&format!("# omega1_rad_s = {:.16e}\n", self.meta.omega1));
        s.push_str(&format!("# t_max_s = {:.16e}\n", self.meta.t_max));
        s.push_str(&format!("# n_points = {}\n", self.meta.n_points));
        s.push_str(&format!("# j_hz = {:.16e}\n", self.meta.j_hz));
        s.push_str(&format!("# delta_omega_rad_s = {:.16e}\n", self.meta.delta_omega));
        s.push_str("t_seconds,Ix_A,Iy_A,2IxIz,2IyIz,Iz_A,2IzIz\n");
        for (t, c) in self.times.iter().zip(self.components.iter()) {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                t, c.ix_a, c.iy_a, c.two_ix_iz, c.two_iy_iz, c.iz_a, c.two_iz_iz
            ));
        }
        s
    }
}

//! JSON scenarios and the pipelines behind the `spdc` subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grid::{make_grid, Domain, Grid2D, RealField2D};
use crate::io::{self, PreviewScale};
use crate::measure::{
    estimate_correlations, render_frames, CameraSpec, Observable, PairSampler, PairStatistics,
};
use crate::observables::{
    intensity_marginal, map_to_camera, minus_projection, near_field_state, ridge_extract,
    row_correlation_map, sum_projection, ImagingConfig, ImagingMode, RowCorrelationMap,
};
use crate::pump::{
    axicon_mask, checkerboard_mask, flat_mask, gaussian_envelope, pump_angular_spectrum,
    random_mask, relay_to_crystal, ring_fourier_bessel_mask, tailor_pump_to_target, MaskKind,
    PumpAngularSpectrum, PumpSpec, SlmMask,
};
use crate::spdc::{build_state, kernel_check, CrystalSpec, PhaseMatching, TwoPhotonState};

pub const SCHEMA_VERSION: u32 = 1;

/// Ridges of an estimated row map use only bins this many standard errors
/// above zero.
pub const RIDGE_SIGMAS: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    /// Side length of the crystal-plane window in metres.
    pub extent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpConfig {
    #[serde(default = "default_pump_wavelength")]
    pub wavelength: f64,
    /// Defaults to a quarter of the grid extent.
    #[serde(default)]
    pub waist: Option<f64>,
    #[serde(default = "default_mask")]
    pub mask: MaskKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalConfig {
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_index")]
    pub refractive_index: f64,
    #[serde(default)]
    pub model: PhaseMatching,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagingSection {
    /// Crystal-to-sensor distance in metres.
    pub d: f64,
    pub mode: ImagingMode,
    #[serde(default = "default_dc_wavelength")]
    pub wavelength_dc: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    SumProjection,
    MinusProjection,
    RowMap,
    Intensity,
    NearField,
}

impl ObservableKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::SumProjection => "sum_projection",
            Self::MinusProjection => "minus_projection",
            Self::RowMap => "row_map",
            Self::Intensity => "intensity",
            Self::NearField => "near_field",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    pub quantum_efficiency: f64,
    #[serde(default)]
    pub dark_count_prob: f64,
    pub pairs_per_frame_mean: f64,
    #[serde(default)]
    pub statistics: PairStatistics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementConfig {
    pub camera: CameraConfig,
    pub frames: usize,
    pub seed: u64,
}

/// Annular `|V_p|²` target `exp(−(|q|−radius)²/width²)`, both in rad/m.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailorConfig {
    pub radius: f64,
    pub width: f64,
    pub iterations: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Binary,
    Pgm,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
    #[serde(default = "default_scale")]
    pub preview_scale: PreviewScale,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub grid: GridConfig,
    pub pump: PumpConfig,
    #[serde(default)]
    pub crystal: CrystalConfig,
    pub imaging: ImagingSection,
    pub observables: Vec<ObservableKind>,
    #[serde(default)]
    pub measurement: Option<MeasurementConfig>,
    #[serde(default)]
    pub tailor: Option<TailorConfig>,
    pub output: OutputConfig,
}

fn default_pump_wavelength() -> f64 {
    405e-9
}

fn default_dc_wavelength() -> f64 {
    810e-9
}

fn default_length() -> f64 {
    2e-3
}

fn default_index() -> f64 {
    1.0
}

fn default_mask() -> MaskKind {
    MaskKind::Flat
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Binary, OutputFormat::Pgm]
}

fn default_scale() -> PreviewScale {
    PreviewScale::Log
}

impl Default for CrystalConfig {
    fn default() -> Self {
        Self {
            length: default_length(),
            refractive_index: default_index(),
            model: PhaseMatching::default(),
        }
    }
}

fn schema<T>(context: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(_) | Error::Schema(_) => e,
        other => Error::Schema(format!("{context}: {other}")),
    })
}

/// Everything derived from a validated config before any heavy computation.
pub struct Setup {
    pub grid: Grid2D,
    pub spec: PumpSpec,
    pub mask: SlmMask,
    pub crystal: CrystalSpec,
    pub imaging: ImagingConfig,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Checks every module precondition and builds the cheap objects.
    pub fn setup(&self) -> Result<Setup> {
        if self.version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported config version {}, expected {SCHEMA_VERSION}",
                self.version
            )));
        }
        if self.observables.is_empty() {
            return Err(Error::Schema("observables list is empty".into()));
        }
        let grid = schema("grid", make_grid(self.grid.n, self.grid.extent, Domain::Position))?;
        let waist = self.pump.waist.unwrap_or(0.25 * grid.extent());
        let spec = schema("pump", PumpSpec::new(self.pump.wavelength, waist, grid))?;
        let mask = schema("pump.mask", build_mask(&grid, &self.pump.mask))?;
        let crystal = CrystalSpec {
            length: self.crystal.length,
            wavelength_pump: self.pump.wavelength,
            refractive_index: self.crystal.refractive_index,
            model: self.crystal.model,
        };
        schema("crystal", crystal.validate())?;
        let imaging = schema(
            "imaging",
            ImagingConfig::new(self.imaging.d, self.imaging.mode, self.imaging.wavelength_dc),
        )?;
        if let Some(m) = &self.measurement {
            schema("measurement.camera", self.camera_spec(&m.camera).validate())?;
            if m.frames < 2 {
                return Err(Error::Schema("measurement.frames must be at least 2".into()));
            }
        }
        if let Some(t) = &self.tailor {
            if !(t.radius >= 0.0 && t.width > 0.0 && t.iterations > 0) {
                return Err(Error::Schema(
                    "tailor needs radius >= 0, width > 0 and at least one iteration".into(),
                ));
            }
        }
        if self.output.formats.is_empty() {
            return Err(Error::Schema("output.formats is empty".into()));
        }
        Ok(Setup {
            grid,
            spec,
            mask,
            crystal,
            imaging,
        })
    }

    pub fn camera_spec(&self, c: &CameraConfig) -> CameraSpec {
        CameraSpec {
            n: self.grid.n,
            quantum_efficiency: c.quantum_efficiency,
            dark_count_prob: c.dark_count_prob,
            pairs_per_frame_mean: c.pairs_per_frame_mean,
            statistics: c.statistics,
        }
    }

    /// Replaces the measurement and tailoring seeds.
    pub fn override_seed(&mut self, seed: u64) {
        if let Some(m) = &mut self.measurement {
            m.seed = seed;
        }
        if let Some(t) = &mut self.tailor {
            t.seed = seed;
        }
    }

    fn has(&self, f: OutputFormat) -> bool {
        self.output.formats.contains(&f)
    }
}

pub fn build_mask(grid: &Grid2D, kind: &MaskKind) -> Result<SlmMask> {
    match *kind {
        MaskKind::Flat => flat_mask(grid),
        MaskKind::Axicon { k_r } => axicon_mask(grid, k_r),
        MaskKind::Checkerboard { tile_size, depth } => checkerboard_mask(grid, tile_size, depth),
        MaskKind::Random {
            seed,
            correlation_length,
        } => random_mask(grid, seed, correlation_length),
        MaskKind::RingFourierBessel {
            radius,
            width,
            carrier_period,
        } => ring_fourier_bessel_mask(grid, radius, width, carrier_period),
        MaskKind::Custom => Err(Error::Schema(
            "custom masks cannot be described in a config; use the tailor subcommand".into(),
        )),
    }
}

/// Writes artifacts and their JSON sidecars into one directory.
pub struct ArtifactWriter<'a> {
    dir: PathBuf,
    cfg: &'a ScenarioConfig,
    written: Vec<PathBuf>,
}

impl<'a> ArtifactWriter<'a> {
    pub fn new(dir: &Path, cfg: &'a ScenarioConfig) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            cfg,
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let p = self.dir.join(name);
        io::write_atomic(&p, bytes)?;
        self.written.push(p);
        Ok(())
    }

    fn sidecar(&mut self, stem: &str, files: &[String], grid: Option<&Grid2D>, extra: Value) -> Result<()> {
        let mut meta = json!({
            "artifact": stem,
            "files": files,
            "generator": { "name": "spdc", "version": env!("CARGO_PKG_VERSION") },
            "config": self.cfg,
            "extra": extra,
        });
        if let Some(g) = grid {
            meta["grid"] = json!({
                "n": g.n(),
                "pitch": g.pitch(),
                "domain": g.domain(),
                "units": match g.domain() {
                    Domain::Position => "m",
                    Domain::Momentum => "rad/m",
                },
            });
        }
        let mut text = serde_json::to_vec_pretty(&meta).map_err(|e| Error::Format(e.to_string()))?;
        text.push(b'\n');
        self.put(&format!("{stem}.json"), &text)
    }

    /// Real field as binary array, preview and optional radial profile.
    pub fn real(&mut self, stem: &str, field: &RealField2D, radial: bool, extra: Value) -> Result<()> {
        let n = field.grid().n();
        let mut files = Vec::new();
        if self.cfg.has(OutputFormat::Binary) {
            files.push(format!("{stem}.bpr"));
            self.put(&format!("{stem}.bpr"), &io::encode_real(n, n, field.values())?)?;
        }
        if self.cfg.has(OutputFormat::Pgm) {
            files.push(format!("{stem}.pgm"));
            let img = io::render_preview(n, n, field.values(), self.cfg.output.preview_scale)?;
            self.put(&format!("{stem}.pgm"), &img)?;
        }
        if radial && self.cfg.has(OutputFormat::Csv) {
            let (r, v): (Vec<f64>, Vec<f64>) = field.radial_profile().into_iter().unzip();
            files.push(format!("{stem}_radial.csv"));
            self.put(&format!("{stem}_radial.csv"), io::profile_csv(&r, &v)?.as_bytes())?;
        }
        self.sidecar(stem, &files, Some(field.grid()), extra)
    }

    pub fn complex(&mut self, stem: &str, field: &crate::grid::ComplexField2D, extra: Value) -> Result<()> {
        let n = field.grid().n();
        self.put(&format!("{stem}.bpf"), &io::encode_complex(n, n, field.values())?)?;
        self.sidecar(stem, &[format!("{stem}.bpf")], Some(field.grid()), extra)
    }

    pub fn json(&mut self, stem: &str, extra: Value) -> Result<()> {
        self.sidecar(stem, &[], None, extra)
    }
}

fn numerical<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidArgument(m) | Error::Range(m) => Error::Numerical(m),
        other => other,
    })
}

/// Pump spectrum after the kernel check; in strict mode a pump whose
/// structure the phase matching would wash out is an error.
pub fn prepare_spectrum(setup: &Setup, strict: bool) -> Result<PumpAngularSpectrum> {
    let env = numerical(gaussian_envelope(&setup.spec))?;
    let pump = numerical(relay_to_crystal(&env, &setup.mask))?;
    let vp = numerical(pump_angular_spectrum(&pump))?;
    check_kernel(&vp, &setup.crystal, strict)?;
    Ok(vp)
}

fn check_kernel(vp: &PumpAngularSpectrum, crystal: &CrystalSpec, strict: bool) -> Result<()> {
    let k = numerical(kernel_check(vp, crystal))?;
    if !k.observable {
        let msg = format!(
            "phase matching filters {:.1}% of the pump spectrum",
            100.0 * k.filtered_fraction
        );
        if strict {
            return Err(Error::Numerical(msg));
        }
        log::warn!("{msg}");
    }
    Ok(())
}

fn observe(
    w: &mut ArtifactWriter,
    state: &TwoPhotonState,
    imaging: &ImagingConfig,
    kinds: &[ObservableKind],
) -> Result<()> {
    let view = match imaging.mode() {
        ImagingMode::FarField => state.clone(),
        ImagingMode::NearField => numerical(near_field_state(state))?,
    };
    for &kind in kinds {
        let extra = json!({ "imaging_mode": imaging.mode(), "focal": imaging.focal() });
        let field = match kind {
            ObservableKind::SumProjection => numerical(sum_projection(&view))?.field,
            ObservableKind::MinusProjection => numerical(minus_projection(&view))?,
            ObservableKind::Intensity => numerical(intensity_marginal(&view))?,
            ObservableKind::RowMap => {
                let m = numerical(row_correlation_map(&view))?;
                write_ridges(w, "row_map_ridges", &m)?;
                m.to_field()
            }
            ObservableKind::NearField => {
                let near = match state.representation() {
                    Domain::Momentum => numerical(near_field_state(state))?,
                    Domain::Position => state.clone(),
                };
                let cfg = ImagingConfig::new(imaging.d(), ImagingMode::NearField, imaging.wavelength_dc())?;
                let f = numerical(intensity_marginal(&near))?;
                w.real(kind.name(), &numerical(map_to_camera(&f, &cfg))?, false, extra)?;
                continue;
            }
        };
        let radial = matches!(kind, ObservableKind::SumProjection | ObservableKind::Intensity);
        w.real(kind.name(), &numerical(map_to_camera(&field, imaging))?, radial, extra)?;
    }
    Ok(())
}

fn write_ridges(w: &mut ArtifactWriter, stem: &str, m: &RowCorrelationMap) -> Result<()> {
    let report = numerical(ridge_extract(m, 0.5))?;
    w.json(stem, json!({ "ridges": report, "axis_pitch": m.grid().pitch() }))
}

/// Full pipeline: mask, pump spectrum, state and every requested observable.
pub fn run_simulate(cfg: &ScenarioConfig, out: &Path, strict: bool) -> Result<Vec<PathBuf>> {
    let setup = cfg.setup()?;
    let vp = prepare_spectrum(&setup, strict)?;
    let mut w = ArtifactWriter::new(out, cfg)?;
    let mask = RealField2D::new(setup.grid, setup.mask.phase().to_vec())?;
    w.real("mask", &mask, false, json!({ "kind": setup.mask.kind() }))?;
    w.complex("pump_spectrum", vp.field(), json!({}))?;
    let state = numerical(build_state(&vp, setup.crystal))?;
    observe(&mut w, &state, &setup.imaging, &cfg.observables)?;
    Ok(w.written)
}

/// Observables from a saved pump spectrum (`pump_spectrum.bpf`).
pub fn run_project(cfg: &ScenarioConfig, spectrum: &Path, out: &Path, strict: bool) -> Result<Vec<PathBuf>> {
    let setup = cfg.setup()?;
    let field = io::load_complex(spectrum)?.into_field(setup.grid.conjugate())?;
    let vp = PumpAngularSpectrum::new(field).map_err(|e| Error::Format(e.to_string()))?;
    check_kernel(&vp, &setup.crystal, strict)?;
    let state = numerical(build_state(&vp, setup.crystal))?;
    let mut w = ArtifactWriter::new(out, cfg)?;
    observe(&mut w, &state, &setup.imaging, &cfg.observables)?;
    Ok(w.written)
}

/// Row map and its ridges only.
pub fn run_rowmap(cfg: &ScenarioConfig, out: &Path, strict: bool) -> Result<Vec<PathBuf>> {
    let setup = cfg.setup()?;
    let vp = prepare_spectrum(&setup, strict)?;
    let state = numerical(build_state(&vp, setup.crystal))?;
    let mut w = ArtifactWriter::new(out, cfg)?;
    observe(&mut w, &state, &setup.imaging, &[ObservableKind::RowMap])?;
    Ok(w.written)
}

/// Photon-counting chain: frames, estimated row map and sum projection.
pub fn run_sample(cfg: &ScenarioConfig, out: &Path, strict: bool) -> Result<Vec<PathBuf>> {
    let setup = cfg.setup()?;
    let m = cfg
        .measurement
        .as_ref()
        .ok_or_else(|| Error::Schema("the sample subcommand needs a measurement section".into()))?;
    let vp = prepare_spectrum(&setup, strict)?;
    let state = numerical(build_state(&vp, setup.crystal))?;
    let sampler = numerical(PairSampler::new(&state))?;
    let camera = cfg.camera_spec(&m.camera);
    let stack = numerical(render_frames(&sampler, &camera, m.frames, m.seed))?;
    let mut w = ArtifactWriter::new(out, cfg)?;
    if cfg.has(OutputFormat::Binary) {
        w.put("frames.bpb", &io::encode_frames(&stack)?)?;
    }
    w.json("frames", json!({ "seed": m.seed, "frames": m.frames, "file": "frames.bpb" }))?;
    let grid = state.camera_grid();
    for (obs, stem) in [
        (Observable::RowMap, "row_map_estimate"),
        (Observable::SumProjection, "sum_projection_estimate"),
    ] {
        let est = numerical(estimate_correlations(&stack, obs))?;
        let extra = json!({ "seed": m.seed, "frames_used": est.frames_used });
        if obs == Observable::RowMap {
            let significant = est.significant(RIDGE_SIGMAS);
            if significant.iter().any(|v| *v > 0.0) {
                let map = RowCorrelationMap::new(grid, significant)?;
                write_ridges(&mut w, "row_map_estimate_ridges", &map)?;
            } else {
                log::warn!("estimated row map is empty; no ridges extracted");
            }
        }
        w.real(stem, &RealField2D::new(grid, est.estimate)?, false, extra.clone())?;
        w.real(&format!("{stem}_stderr"), &RealField2D::new(grid, est.std_error)?, false, extra)?;
    }
    Ok(w.written)
}

/// Phase mask whose pump spectrum approximates the configured ring.
pub fn run_tailor(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let setup = cfg.setup()?;
    let t = cfg
        .tailor
        .as_ref()
        .ok_or_else(|| Error::Schema("the tailor subcommand needs a tailor section".into()))?;
    let target = RealField2D::from_fn(setup.grid.conjugate(), |x, y| {
        let d = (x.hypot(y) - t.radius) / t.width;
        (-d * d).exp()
    });
    let r = numerical(tailor_pump_to_target(&target, &setup.spec, t.iterations, t.seed))?;
    let mut w = ArtifactWriter::new(out, cfg)?;
    let mask = RealField2D::new(setup.grid, r.mask.phase().to_vec())?;
    w.real(
        "tailored_mask",
        &mask,
        false,
        json!({ "seed": t.seed, "residual": r.residual, "history": r.history }),
    )?;
    let env = numerical(gaussian_envelope(&setup.spec))?;
    let vp = numerical(pump_angular_spectrum(&numerical(relay_to_crystal(&env, &r.mask))?))?;
    w.real("tailored_spectrum", &vp.field().intensity(), true, json!({ "seed": t.seed }))?;
    Ok(w.written)
}

/// PGM preview of a saved real array.
pub fn run_preview(input: &Path, out: &Path, scale: PreviewScale) -> Result<()> {
    let a = io::load_real(input)?;
    io::write_atomic(out, &io::render_preview(a.rows, a.cols, &a.values, scale)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ScenarioConfig {
        ScenarioConfig::from_json(
            r#"{
                "version": 1,
                "grid": { "n": 32, "extent": 1e-3 },
                "pump": { "mask": { "kind": "axicon", "k_r": 25132.741228718345 } },
                "imaging": { "d": 0.2, "mode": "far_field" },
                "observables": ["sum_projection", "row_map"],
                "output": { "directory": "out" }
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let c = base();
        assert_eq!(c.pump.wavelength, 405e-9);
        assert_eq!(c.imaging.wavelength_dc, 810e-9);
        assert_eq!(c.crystal, CrystalConfig::default());
        assert_eq!(c.output.formats, vec![OutputFormat::Binary, OutputFormat::Pgm]);
        let s = c.setup().unwrap();
        assert_eq!(s.spec.waist(), 0.25e-3);
        assert_eq!(s.crystal.wavelength_pump, 405e-9);
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(
            ScenarioConfig::from_json(r#"{"version": 1, "bogus": 2}"#),
            Err(Error::Schema(_))
        ));
        let mut c = base();
        c.observables.clear();
        assert!(matches!(c.setup(), Err(Error::Schema(_))));
        let mut c = base();
        c.version = 2;
        assert!(matches!(c.setup(), Err(Error::Schema(_))));
        let mut c = base();
        c.pump.waist = Some(1e-6);
        assert!(matches!(c.setup(), Err(Error::Schema(_))));
        let mut c = base();
        c.pump.mask = MaskKind::Custom;
        assert!(matches!(c.setup(), Err(Error::Schema(_))));
        let mut c = base();
        c.measurement = Some(MeasurementConfig {
            camera: CameraConfig {
                quantum_efficiency: 1.5,
                dark_count_prob: 0.0,
                pairs_per_frame_mean: 1.0,
                statistics: PairStatistics::Poisson,
            },
            frames: 10,
            seed: 1,
        });
        assert!(matches!(c.setup(), Err(Error::Schema(_))));
    }

    #[test]
    fn seed_override_reaches_measurement_and_tailor() {
        let mut c = base();
        c.measurement = Some(MeasurementConfig {
            camera: CameraConfig {
                quantum_efficiency: 1.0,
                dark_count_prob: 0.0,
                pairs_per_frame_mean: 1.0,
                statistics: PairStatistics::Poisson,
            },
            frames: 10,
            seed: 1,
        });
        c.tailor = Some(TailorConfig {
            radius: 1e4,
            width: 1e4,
            iterations: 3,
            seed: 1,
        });
        c.override_seed(77);
        assert_eq!(c.measurement.unwrap().seed, 77);
        assert_eq!(c.tailor.unwrap().seed, 77);
    }

    #[test]
    fn strict_mode_rejects_filtered_pump() {
        let mut c = base();
        // a long crystal at a fine momentum pitch filters everything but the core
        c.grid = GridConfig { n: 64, extent: 2e-5 };
        c.pump.mask = MaskKind::Axicon { k_r: 6e6 };
        c.crystal.length = 5e-2;
        let s = c.setup().unwrap();
        assert!(matches!(prepare_spectrum(&s, true), Err(Error::Numerical(_))));
        assert!(prepare_spectrum(&s, false).is_ok());
    }
}
